import math

import numpy as np
import pytest

from stabledegen import bergman as bg
from stabledegen import differentials as di

CFG = bg.EpsilonProductConfig()


def _basis(model_fn=di.two_self_node_sphere, t=1e-3, m=3):
    return di.plumbed_basis(model_fn(), t, m)


def test_config_validation():
    with pytest.raises(ValueError):
        bg.EpsilonProductConfig(epsilon=0.6)
    with pytest.raises(ValueError):
        bg.EpsilonProductConfig(radial_order=8)
    doubled = CFG.doubled()
    assert doubled.radial_order == 2 * CFG.radial_order
    assert doubled.epsilon == CFG.epsilon


def test_inner_product_hermitian():
    basis = _basis()
    s1, s2 = basis.sections[0], basis.sections[1]
    ip12 = bg.epsilon_inner_product(s1, s2, CFG)
    ip21 = bg.epsilon_inner_product(s2, s1, CFG)
    assert abs(ip12 - np.conj(ip21)) < 1e-12 * max(1.0, abs(ip12))
    n1 = bg.epsilon_inner_product(s1, s1, CFG)
    assert abs(n1.imag) < 1e-12 * n1.real
    assert n1.real > 0


def test_gram_matrix_properties():
    basis = _basis()
    gram = bg.gram_matrix(basis, CFG)
    G = gram.entries
    assert np.max(np.abs(G - G.conj().T)) < 1e-12 * np.max(np.abs(G))
    assert np.min(gram.eigenvalues) > 0
    assert gram.condition_number >= 1.0


def test_orthonormalize_hand_cholesky():
    # G = [[4,2],[2,2]] has L = [[2,0],[1,1]]; the whitening transform is
    # inv(L)^T = [[0.5,-0.5],[0,1]]
    basis = _basis(m=3)
    two = di.SectionBasis(basis.sections[:2], basis.m, 2, "test",
                          smoothing=basis.smoothing, model=basis.model)
    gram = bg.GramMatrix(np.array([[4.0, 2.0], [2.0, 2.0]], dtype=complex),
                         "hand", 1.0, np.array([1.0, 1.0]))
    onb = bg.orthonormalize(two, gram)
    want = np.array([[0.5, -0.5], [0.0, 1.0]])
    assert np.max(np.abs(onb.transform - want)) < 1e-14
    with pytest.raises(ValueError):
        bad = bg.GramMatrix(np.array([[1.0, 2.0], [2.0, 1.0]], dtype=complex),
                            "hand", 1.0, np.array([1.0, 1.0]))
        bg.orthonormalize(two, bad)


def test_orthonormal_basis_gram_is_identity():
    basis = _basis()
    gram = bg.gram_matrix(basis, CFG)
    onb = bg.orthonormalize(basis, gram)
    recheck = di.SectionBasis(onb.sections, basis.m, len(onb.sections), "onb",
                              smoothing=basis.smoothing, model=basis.model)
    G = bg.gram_matrix(recheck, CFG).entries
    assert np.max(np.abs(G - np.eye(len(onb.sections)))) < 1e-8


def test_tail_series_matches_partial_fractions():
    # (x-q)^{-j} = sum_{s>=j} C(s-1,j-1) q^{s-j} x^{-s}; the tail column keeps
    # s >= 2m, so head + tail must reproduce the raw pole factor
    from scipy.special import comb

    m, q = 2, 0.8 + 0.3j
    x = np.array([3.0 + 0.5j, -2.5 + 2.0j, 4.0j])
    u = 1.0 / x
    for j in (1, 2, 3):
        n_terms = bg._tail_terms(abs(q) / np.min(np.abs(x)), 2 * m)
        tail = bg._tail_column(q, j, m, u, n_terms)
        head = sum(comb(s - 1, j - 1, exact=True) * q ** (s - j) * u**s
                   for s in range(j, 2 * m))
        raw = (x - q) ** (-j)
        assert np.max(np.abs(head + tail - raw)) < 1e-14 * np.max(np.abs(raw))


def test_quadrature_doubling_stability():
    basis = _basis(m=2)
    err = bg.quadrature_refinement_error(basis, CFG)
    assert err < 1e-8


def test_norm_ratio_at_least_one():
    basis = _basis()
    half = bg.EpsilonProductConfig(epsilon=CFG.epsilon / 2)
    for s in basis.sections:
        assert bg.norm_ratio(s, CFG, half) >= 1.0
    with pytest.raises(ValueError):
        bg.norm_ratio(basis.sections[0], CFG,
                      bg.EpsilonProductConfig(epsilon=0.2))


def test_fs_distance_extremes():
    e0 = np.array([1.0, 0.0], dtype=complex)
    e1 = np.array([0.0, 1.0], dtype=complex)
    assert bg.fs_distance(e0, e0) == 0.0
    assert abs(bg.fs_distance(e0, e1) - 1.0) < 1e-15
    # phase invariance
    assert bg.fs_distance(e0, np.exp(0.7j) * e0) < 1e-12


def _random_cloud(rng, n, dim):
    raw = rng.normal(size=(n, dim)) + 1j * rng.normal(size=(n, dim))
    raw /= np.linalg.norm(raw, axis=1)[:, None]
    return bg.EmbeddedCloud([(0, complex(k)) for k in range(n)], raw, 3)


def test_unitary_align_recovers_synthetic_unitary():
    rng = np.random.default_rng(2)
    cloud_a = _random_cloud(rng, 24, 5)
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    phases = np.exp(2j * np.pi * rng.random(24))
    vecs_b = phases[:, None] * (cloud_a.vectors @ q.T)
    cloud_b = bg.EmbeddedCloud(cloud_a.samples, vecs_b, 3)
    _, rms, degenerate = bg.unitary_align(cloud_a, cloud_b)
    assert rms < 1e-8
    assert not degenerate


def test_unitary_align_duplicate_is_exact():
    rng = np.random.default_rng(3)
    cloud = _random_cloud(rng, 12, 4)
    U, rms, degenerate = bg.unitary_align(cloud, cloud)
    assert rms == 0.0
    assert np.array_equal(U, np.eye(4, dtype=complex))
    assert not degenerate


def test_embed_cloud_requires_very_ample_power():
    basis = _basis(m=2)
    onb = bg.orthonormalize(basis, bg.gram_matrix(basis, CFG))
    with pytest.raises(ValueError):
        bg.embed_cloud(onb, [(0, 1.0 + 0j)])


def test_embed_cloud_rows_unit():
    basis = _basis()
    onb = bg.orthonormalize(basis, bg.gram_matrix(basis, CFG))
    samples = [(0, np.exp(2j * np.pi * k / 8)) for k in range(8)]
    cloud = bg.embed_cloud(onb, samples)
    assert cloud.vectors.shape == (8, len(onb.sections))
    assert np.max(np.abs(np.linalg.norm(cloud.vectors, axis=1) - 1.0)) < 1e-12
