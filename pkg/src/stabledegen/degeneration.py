"""Degeneration drivers: t -> 0 schedules, convergence and uniqueness diagnostics.

Each scheduled t gets the full pipeline (basis -> Gram -> orthonormal basis
-> embedded cloud on a fixed, chart-pinned sample plan); consecutive clouds
are compared after unitary alignment.  The bounded/unbounded split of the
limiting sections is read off the node residues of the final orthonormal
basis.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from . import bergman
from .bergman import EpsilonProductConfig
from .differentials import (
    NodalCurveModel,
    RankDeficiencyError,
    branch_residue,
    build_plumbed_surface,
    node_matching_defect,
    plumbed_basis,
)

__all__ = [
    "FamilySpec",
    "ConvergenceReport",
    "RobustnessReport",
    "UniquenessVerdict",
    "SplitResult",
    "default_sample_points",
    "default_schedule",
    "run_family",
    "epsilon_robustness",
    "schedule_uniqueness_check",
    "bounded_section_split",
    "residue_kernel_angles",
]


def default_schedule(decades: int = 6, base: float = 10.0,
                     argument: float = 0.0) -> tuple:
    """t_i = base^{-i} e^{i arg}, i = 1..decades."""
    ph = cmath.exp(1j * argument)
    return tuple(base ** (-i) * ph for i in range(1, decades + 1))


def default_sample_points(model: NodalCurveModel, n: int = 24,
                          radius: float = 1.0) -> tuple:
    """Chart-pinned thick-part samples: a ring per component.

    The ring must stay clear of every node ring (distance > 0.9R); the
    standard fixtures put all marked points at |p| >= 2 with R = 1, so the
    unit circle works on every component.
    """
    samples = []
    for c, comp in enumerate(model.components):
        for k in range(n):
            x = radius * cmath.exp(2j * math.pi * k / n)
            samples.append((c, x))
    for node in model.nodes:
        for comp, pidx in node.branches():
            p = model.marked_point(comp, pidx)
            for c, x in samples:
                if c == comp and abs(x - p) <= 0.9 * node.radius:
                    raise ValueError("sample ring intersects a node ring")
    return tuple(samples)


@dataclass(frozen=True)
class FamilySpec:
    """A pinching family: one nodal model, a schedule of smoothing parameters."""

    model: NodalCurveModel
    schedule: tuple
    m: int = 3
    truncation: int | None = None
    product: EpsilonProductConfig = field(default_factory=EpsilonProductConfig)
    samples: tuple | None = None

    def __post_init__(self):
        mags = [abs(complex(t)) for t in self.schedule]
        if not mags:
            raise ValueError("schedule must be nonempty")
        if any(b >= a for a, b in zip(mags, mags[1:])):
            raise ValueError("schedule must be strictly decreasing in modulus")
        for node in self.model.nodes:
            if mags[0] >= node.radius**2 * math.exp(-2.0):
                raise ValueError("schedule start must satisfy |t| < R^2 e^{-2}")

    def sample_plan(self) -> tuple:
        if self.samples is not None:
            return self.samples
        return default_sample_points(self.model)


@dataclass
class ConvergenceReport:
    t_values: list
    gram_condition: list
    max_defect: list
    max_ratio: list
    min_vector_norm: list
    aligned_distance: list  # len(t_values) - 1 entries
    flags: dict
    aborted_at: complex | None = None
    abort_reason: str = ""
    # attached per-t data for downstream analysis
    onbs: list = field(default_factory=list)
    clouds: list = field(default_factory=list)
    residues: list = field(default_factory=list)  # (n_nodes, N+1) arrays

    def summary_rows(self) -> list:
        rows = []
        for i, t in enumerate(self.t_values):
            rows.append(
                {
                    "t": t,
                    "gram_condition": self.gram_condition[i],
                    "max_defect": self.max_defect[i],
                    "max_ratio": self.max_ratio[i],
                    "min_vector_norm": self.min_vector_norm[i],
                    "aligned_distance": (
                        self.aligned_distance[i - 1] if i > 0 else float("nan")
                    ),
                }
            )
        return rows


#: below this, a defect sequence counts as converged rather than "decreasing":
#: the residue law is enforced as an exact linear constraint at every t, so
#: measured defects sit at the contour-quadrature roundoff floor.
DEFECT_FLOOR = 1.0e-12


def _eventually_decreasing(values, floor=0.0, tail=3) -> bool:
    tail_vals = values[-(tail + 1):]
    return all(
        b <= a or (a <= floor and b <= floor)
        for a, b in zip(tail_vals, tail_vals[1:])
    )


def run_family(spec: FamilySpec, ratio_cap: float | None = None) -> ConvergenceReport:
    """Full pipeline along the schedule; partial report on basis-rank failure."""
    cfg = spec.product
    cfg_half = replace(cfg, epsilon=cfg.epsilon / 2.0)
    samples = spec.sample_plan()
    report = ConvergenceReport([], [], [], [], [], [], {})
    prev_cloud = None
    for t in spec.schedule:
        try:
            basis = plumbed_basis(spec.model, t, spec.m, spec.truncation)
            gram = bergman.gram_matrix(basis, cfg)
            onb = bergman.orthonormalize(basis, gram)
        except (RankDeficiencyError, ValueError) as exc:
            report.aborted_at = complex(t)
            report.abort_reason = str(exc)
            break
        n_nodes = len(spec.model.nodes)
        defect = max(
            node_matching_defect(s, i) for s in onb.sections for i in range(n_nodes)
        )
        ratio = max(bergman.norm_ratio(s, cfg, cfg_half) for s in onb.sections)
        cloud = bergman.embed_cloud(onb, list(samples))
        raw_norms = _raw_sample_norms(onb, samples)
        res = np.array(
            [
                [branch_residue(s, i, "a") for s in onb.sections]
                for i in range(n_nodes)
            ]
        )
        report.t_values.append(complex(t))
        report.gram_condition.append(gram.condition_number)
        report.max_defect.append(float(defect))
        report.max_ratio.append(float(ratio))
        report.min_vector_norm.append(float(np.min(raw_norms)))
        report.onbs.append(onb)
        report.clouds.append(cloud)
        report.residues.append(res)
        if prev_cloud is not None:
            _, rms, _ = bergman.unitary_align(prev_cloud, cloud)
            report.aligned_distance.append(float(rms))
        prev_cloud = cloud
    report.flags = {
        "cauchy": (
            len(report.aligned_distance) >= 3
            and _eventually_decreasing(report.aligned_distance, floor=1e-12, tail=2)
        ),
        "defect_decreasing": _eventually_decreasing(
            report.max_defect, floor=DEFECT_FLOOR
        ),
        "ratio_bounded": (
            all(r <= ratio_cap for r in report.max_ratio)
            if ratio_cap is not None
            else all(r >= 1.0 for r in report.max_ratio)
        ),
        "completed": report.aborted_at is None,
    }
    return report


def _raw_sample_norms(onb, samples) -> np.ndarray:
    norms = []
    for comp, x in samples:
        row = np.array(
            [s.component_value(comp, np.array([complex(x)]))[0] for s in onb.sections]
        )
        norms.append(np.linalg.norm(row))
    return np.array(norms)


@dataclass
class RobustnessReport:
    t_values: list
    transforms: list  # g_t with coords_eps1 = g_t @ coords_eps2
    condition_numbers: list
    increments: list  # ||g_{t_{i+1}} - g_{t_i}||_F

    @property
    def max_condition(self) -> float:
        return max(self.condition_numbers)


def epsilon_robustness(spec: FamilySpec, eps1: float, eps2: float) -> RobustnessReport:
    """Change-of-basis transforms between the eps1 and eps2 embeddings.

    With G_k = L_k L_k^H the Gram at cutoff eps_k (same raw basis), the ONB
    coordinate systems differ by g_t = L_1^{-1} L_2 — so g(eps, eps) is the
    identity and g(e1,e3) = g(e1,e2) g(e2,e3) holds exactly.
    """
    cfg1 = replace(spec.product, epsilon=eps1)
    cfg2 = replace(spec.product, epsilon=eps2)
    ts, gs, conds = [], [], []
    for t in spec.schedule:
        basis = plumbed_basis(spec.model, t, spec.m, spec.truncation)
        L1 = np.linalg.cholesky(bergman.gram_matrix(basis, cfg1).entries)
        L2 = np.linalg.cholesky(bergman.gram_matrix(basis, cfg2).entries)
        g = scipy.linalg.solve_triangular(L1, L2, lower=True)
        ts.append(complex(t))
        gs.append(g)
        conds.append(float(np.linalg.cond(g)))
    incs = [
        float(np.linalg.norm(b - a)) for a, b in zip(gs, gs[1:])
    ]
    return RobustnessReport(ts, gs, conds, incs)


@dataclass
class UniquenessVerdict:
    residual: float
    tolerance: float
    verdict: str  # "PASS" or "FAIL"
    unitary: np.ndarray
    degenerate: bool


def schedule_uniqueness_check(spec: FamilySpec, schedule_a, schedule_b,
                              tolerance: float = 1.0e-3) -> UniquenessVerdict:
    """Run both schedules; align the final clouds; PASS iff residual < tolerance."""
    rep_a = run_family(replace(spec, schedule=tuple(schedule_a)))
    rep_b = run_family(replace(spec, schedule=tuple(schedule_b)))
    if rep_a.aborted_at is not None or rep_b.aborted_at is not None:
        raise RankDeficiencyError("a schedule aborted before its final step")
    U, rms, degenerate = bergman.unitary_align(rep_a.clouds[-1], rep_b.clouds[-1])
    verdict = "PASS" if rms < tolerance else "FAIL"
    return UniquenessVerdict(rms, tolerance, verdict, U, degenerate)


@dataclass
class SplitResult:
    bounded: list
    unbounded: list
    threshold: float
    inconclusive: bool
    residue_scale: float
    rotation: np.ndarray  # unitary mixing the ONB into residue-adapted form


def bounded_section_split(report: ConvergenceReport,
                          threshold: float | None = None) -> SplitResult:
    """Partition of (residue-adapted) ONB indices at the final schedule point.

    A generic orthonormal basis mixes the residue kernel into every vector,
    so the split is computed in the residue-adapted rotation of the ONB:
    with Res = U S V^H the residue matrix at the final t, the rotated basis
    ONB . conj(V) concentrates all node residues in the first rank(S)
    vectors.  Index alpha is bounded iff its largest rotated residue is
    below the threshold (default: 10x the residue quadrature floor).
    Flags inconclusive when any residue falls within a factor 2 of the
    threshold.  The rotation leaves the Gram identity intact, so labels
    refer to an equally valid orthonormal basis.
    """
    if not report.residues:
        raise ValueError("report carries no residue data")
    res = np.asarray(report.residues[-1])
    _, _, vh = np.linalg.svd(res)
    rotation = vh.conj().T
    rotated = np.abs(res @ rotation)
    per_section = rotated.max(axis=0)
    scale = float(max(per_section.max(), 1.0e-300))
    if threshold is None:
        floor = 100.0 * np.finfo(float).eps * scale
        threshold = 10.0 * floor
    bounded = [i for i, v in enumerate(per_section) if v < threshold]
    unbounded = [i for i, v in enumerate(per_section) if v >= threshold]
    inconclusive = bool(
        np.any((per_section > threshold / 2.0) & (per_section < threshold * 2.0))
    )
    return SplitResult(bounded, unbounded, float(threshold), inconclusive, scale,
                       rotation)


def residue_kernel_angles(report_a: ConvergenceReport,
                          report_b: ConvergenceReport) -> np.ndarray:
    """Principal angles between the bounded (residue-kernel) subspaces.

    The split is a statement about subspaces, not individual vectors:
    unitary mixing within each class leaves the kernel of the residue
    matrix unchanged, which these angles detect.
    """
    ka = scipy.linalg.null_space(report_a.residues[-1], rcond=1e-8)
    kb = scipy.linalg.null_space(report_b.residues[-1], rcond=1e-8)
    if ka.shape[1] != kb.shape[1]:
        raise ValueError("residue kernels have different dimensions")
    return scipy.linalg.subspace_angles(ka, kb)
