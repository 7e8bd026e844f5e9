import math

import numpy as np
import pytest

from stabledegen import bergman as bg
from stabledegen import degeneration as dg
from stabledegen import differentials as di


def _spec(decades=3, m=3):
    model = di.two_self_node_sphere()
    return dg.FamilySpec(model, dg.default_schedule(decades), m=m)


def test_default_schedule():
    sched = dg.default_schedule(4)
    assert sched == (0.1, 0.01, 1e-3, 1e-4)
    rotated = dg.default_schedule(2, argument=math.pi / 2)
    assert abs(rotated[0] - 0.1j) < 1e-15


def test_family_spec_validation():
    model = di.two_self_node_sphere()
    with pytest.raises(ValueError):
        dg.FamilySpec(model, ())
    with pytest.raises(ValueError):
        dg.FamilySpec(model, (1e-3, 1e-2))
    with pytest.raises(ValueError):
        dg.FamilySpec(model, (0.5, 1e-3))  # start violates |t| < R^2 e^{-2}


def test_sample_plan_avoids_node_rings():
    model = di.two_self_node_sphere()
    samples = dg.default_sample_points(model)
    assert len(samples) == 24 * len(model.components)
    with pytest.raises(ValueError):
        dg.default_sample_points(model, radius=2.0)  # hits the node disk at p=2


def test_run_family_diagnostics():
    report = dg.run_family(_spec(decades=3))
    assert report.flags["completed"]
    assert report.aborted_at is None
    assert len(report.t_values) == 3
    assert len(report.aligned_distance) == 2
    assert all(d < dg.DEFECT_FLOOR for d in report.max_defect)
    assert report.flags["defect_decreasing"]
    assert all(r >= 1.0 for r in report.max_ratio)
    assert report.flags["ratio_bounded"]
    assert all(c >= 1.0 for c in report.gram_condition)


def test_run_family_reports_abort():
    model = di.two_self_node_sphere()
    spec = dg.FamilySpec(model, (1e-2, 1e-3), m=3, truncation=1)
    report = dg.run_family(spec)
    if report.aborted_at is not None:
        assert not report.flags["completed"]
        assert report.abort_reason


def test_bounded_section_split():
    report = dg.run_family(_spec(decades=3))
    split = dg.bounded_section_split(report)
    n = len(report.onbs[-1].sections)
    n_nodes = report.residues[-1].shape[0]
    assert sorted(split.bounded + split.unbounded) == list(range(n))
    assert len(split.unbounded) == n_nodes
    assert not split.inconclusive
    # the rotation is unitary
    R = split.rotation
    assert np.max(np.abs(R.conj().T @ R - np.eye(n))) < 1e-12


def test_residue_kernel_is_rotation_invariant():
    rep_a = dg.run_family(_spec(decades=3))
    rep_b = dg.run_family(_spec(decades=3))
    angles = dg.residue_kernel_angles(rep_a, rep_b)
    assert np.max(angles) < 1e-10


def test_epsilon_robustness_identity_and_composition():
    spec = _spec(decades=2)
    same = dg.epsilon_robustness(spec, 0.3, 0.3)
    for g in same.transforms:
        assert np.max(np.abs(g - np.eye(g.shape[0]))) < 1e-8
    r12 = dg.epsilon_robustness(spec, 0.3, 0.2)
    r23 = dg.epsilon_robustness(spec, 0.2, 0.15)
    r13 = dg.epsilon_robustness(spec, 0.3, 0.15)
    for g12, g23, g13 in zip(r12.transforms, r23.transforms, r13.transforms):
        assert np.max(np.abs(g12 @ g23 - g13)) < 1e-8 * max(1.0, np.max(np.abs(g13)))
    assert r13.max_condition >= 1.0


def test_schedule_uniqueness_duplicate_control():
    spec = _spec(decades=2)
    sched = dg.default_schedule(2)
    verdict = dg.schedule_uniqueness_check(spec, sched, sched)
    assert verdict.verdict == "PASS"
    assert verdict.residual == 0.0
    assert not verdict.degenerate
