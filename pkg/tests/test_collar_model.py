import cmath
import math
import random

import numpy as np
import pytest

from stabledegen import collar_model as cm


def fd_gaussian_curvature(log_density, x, y, h=1e-2):
    """K = -Laplacian(ln rho) / rho^2 for the metric rho |dtau|, with a
    fourth-order centered five-point Laplacian."""
    stencil = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
    lap = 0.0
    for k, c in zip((-2, -1, 0, 1, 2), stencil):
        lap += c * (log_density(x + k * h, y) + log_density(x, y + k * h))
    rho = math.exp(log_density(x, y))
    return -lap / rho**2


def _interior_points(rng, r_lo, r_hi, n=100):
    pts = []
    for _ in range(n):
        r = math.exp(rng.uniform(math.log(r_lo), math.log(r_hi)))
        a = rng.uniform(0.0, 2.0 * math.pi)
        pts.append((r * math.cos(a), r * math.sin(a)))
    return pts


def test_annulus_density_curvature():
    chart = cm.annulus_chart_for(0.35)
    rng = random.Random(11)

    def logrho(x, y):
        return math.log(cm.annulus_hyperbolic_density(complex(x, y), chart))

    # stay a few stencil widths inside the chart; the density varies on the
    # scale of |tau|, so the step must shrink with the point
    for x, y in _interior_points(rng, chart.r_inner * 1.3, chart.r_outer * 0.8):
        h = 0.01 * math.hypot(x, y)
        assert abs(fd_gaussian_curvature(logrho, x, y, h) + 1.0) < 1e-6


def test_punctured_disk_density_curvature():
    rng = random.Random(12)

    def logrho(x, y):
        return math.log(cm.punctured_disk_density(complex(x, y)))

    for x, y in _interior_points(rng, 0.1, 0.7):
        h = 0.01 * math.hypot(x, y)
        assert abs(fd_gaussian_curvature(logrho, x, y, h) + 1.0) < 1e-6


def test_wedge_density_curvature():
    rng = random.Random(13)

    def logrho(x, y):
        return math.log(cm.wedge_density(complex(x, y)))

    for _ in range(100):
        x = rng.uniform(-2.0, 2.0)
        y = rng.uniform(0.5, 3.0)
        assert abs(fd_gaussian_curvature(logrho, x, y, 0.01 * y) + 1.0) < 1e-6


def test_z_tau_round_trip():
    rng = random.Random(5)
    for lam in (0.05, 0.2, 0.45):
        chart = cm.annulus_chart_for(lam)
        for _ in range(200):
            r = math.exp(rng.uniform(math.log(chart.r_inner),
                                     math.log(chart.r_outer)))
            tau = r * cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
            z = cm.tau_to_z(tau, lam)
            back = cm.z_to_tau(z, lam)
            assert abs(back - tau) < 1e-14 * abs(tau) + 1e-14
            # deck identification: e^{2 pi lam} z maps to the same tau
            z_deck = z * math.exp(2.0 * math.pi * lam)
            if cm._in_wedge(z_deck, lam):
                assert abs(cm.z_to_tau(z_deck, lam) - tau) < 1e-12


def test_im_z_formula_matches_inverse_map():
    rng = random.Random(6)
    for lam in (0.1, 0.3):
        chart = cm.annulus_chart_for(lam)
        for _ in range(200):
            r = math.exp(rng.uniform(math.log(chart.r_inner),
                                     math.log(chart.r_outer)))
            tau = r * cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
            direct = cm.tau_to_z(tau, lam).imag
            assert abs(cm.im_z_of_tau(tau, lam) - direct) < 1e-12 * max(1.0, abs(direct))


def test_m_norm_chain_rule_oracle():
    # eta = u (dtau/tau)^m pulled to the wedge is f(z) dz^m with
    # f = u / (i lam z)^m; the two pointwise norms must agree.
    rng = random.Random(8)
    lam, m = 0.25, 3
    chart = cm.annulus_chart_for(lam)
    for _ in range(100):
        r = math.exp(rng.uniform(math.log(chart.r_inner), math.log(chart.r_outer)))
        tau = r * cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
        u = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        z = cm.tau_to_z(tau, lam)
        f = u / (1j * lam * z) ** m
        lhs = cm.m_norm_in_tau_frame(u, tau, lam, m)
        rhs = cm.pointwise_m_norm(f, z, m)
        assert abs(lhs - rhs) < 1e-12 * max(1.0, rhs)


def test_injectivity_radius_profile():
    lam = 0.06
    chart = cm.annulus_chart_for(lam)
    core = math.sqrt(chart.r_inner * chart.r_outer)
    # minimal at the core, equal to pi lam = half the core loop length
    assert abs(cm.collar_injectivity_radius(core, lam) - math.pi * lam) < 1e-12
    assert cm.collar_injectivity_radius(chart.r_outer, lam) > math.pi * lam
    theta = cm.thick_boundary_theta(lam, 0.3)
    tau_eps = math.exp(-theta / lam)
    if chart.r_inner < tau_eps < chart.r_outer:
        assert abs(cm.collar_injectivity_radius(tau_eps, lam) - 0.3) < 1e-12


def test_thin_volume_quadrature_matches_closed_form():
    for lam, eps in ((0.02, 0.3), (0.05, 0.25), (0.08, 0.4)):
        q = cm.thin_collar_volume(lam, eps)
        exact = cm.thin_collar_volume_closed_form(lam, eps)
        assert abs(q - exact) < 1e-10 * max(1.0, exact)
    assert cm.thin_collar_volume(0.2, 0.3) == 0.0


def test_domain_validation():
    with pytest.raises(ValueError):
        cm.CollarChart(0.0)
    with pytest.raises(ValueError):
        cm.CollarChart(math.pi / 2)
    with pytest.raises(ValueError):
        cm.tau_to_z(0.99, 0.2)
    with pytest.raises(ValueError):
        cm.wedge_density(1.0 - 1.0j)
    with pytest.raises(ValueError):
        cm.thick_boundary_theta(0.2, 0.3)
    with pytest.raises(ValueError):
        cm.AnnulusChart(0.0, 0.5, "hyperbolic-annulus")
