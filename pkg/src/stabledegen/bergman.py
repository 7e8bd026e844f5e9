"""Thick-part Bergman inner products, Gram matrices, and projective embeddings.

The epsilon inner product pairs two m-differentials over the thick part of
the grafted metric only:

    <s1, s2>_eps = integral over X_eps of  s1 conj(s2) * rho^{-2m} dA_hyp.

Quadrature runs over a fixed plan of cells: polar charts on component
cores with a smooth partition of unity cutting out the node disks, and
log-polar bands on node annuli (or cusp necks at t = 0) with the thick
cutoff applied in closed form.  Each cell carries a matrix of basis
function values, so the whole plan collapses to one Hermitian form A on
coefficient vectors: <s1, s2> = c2^H A c1.  This makes Hermitian symmetry
exact and repeated Gram evaluations cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.special

from .differentials import (
    Atlas,
    MDifferential,
    SectionBasis,
    build_plumbed_surface,
    combine_sections,
    HANDOFF_FACTOR,
    _ramp,
)

__all__ = [
    "EpsilonProductConfig",
    "QuadratureCell",
    "QuadraturePlan",
    "GramMatrix",
    "OrthonormalBasis",
    "EmbeddedCloud",
    "NormComparisonReport",
    "build_plan",
    "build_extra_plan",
    "epsilon_inner_product",
    "epsilon_norm",
    "gram_matrix",
    "orthonormalize",
    "embed_cloud",
    "norm_ratio",
    "fs_distance",
    "unitary_align",
    "quadrature_refinement_error",
    "clear_plan_cache",
]


@dataclass(frozen=True)
class EpsilonProductConfig:
    """Cutoff and quadrature orders for the thick-part inner product.

    Radial rules are Gauss-Legendre (after a log substitution on annuli),
    angular rules are trapezoid.  ``split_radius`` separates the two polar
    charts of a component sphere; None means auto (beyond every node disk).
    """

    epsilon: float = 0.3
    radial_order: int = 128
    angular_order: int = 512
    band_radial_order: int = 48
    band_angular_order: int = 64
    margulis_cap: float = 0.5
    split_radius: float | None = None

    def __post_init__(self):
        if not 0 < self.epsilon < self.margulis_cap:
            raise ValueError("require 0 < epsilon < margulis_cap")
        if self.radial_order < 24 or self.band_radial_order < 24:
            raise ValueError("radial quadrature order must be >= 24")
        if self.angular_order < 64 or self.band_angular_order < 64:
            raise ValueError("angular quadrature order must be >= 64")

    def doubled(self) -> "EpsilonProductConfig":
        return EpsilonProductConfig(
            epsilon=self.epsilon,
            radial_order=2 * self.radial_order,
            angular_order=2 * self.angular_order,
            band_radial_order=2 * self.band_radial_order,
            band_angular_order=2 * self.band_angular_order,
            margulis_cap=self.margulis_cap,
            split_radius=self.split_radius,
        )


@dataclass
class QuadratureCell:
    """Sample points (in one chart frame) with ready-made real weights.

    frame is ("component", c) for values f(x) in the x dx^m frame, or
    ("annulus", node_idx) for values u(tau_a) in the (dtau/tau)^m frame.
    Weights already contain the metric factor rho^{-2m} dA_hyp.
    """

    label: str
    frame: tuple
    points: np.ndarray
    weights: np.ndarray
    #: evaluate basis functions by their x -> infinity tail series.  On the
    #: outer chart the raw functions (x-q)^{-j} only decay like x^{-2m} after
    #: cancellation across the decay constraints, which float64 cannot
    #: resolve; the tail-projected functions decay termwise and agree with
    #: the raw ones on every constraint-satisfying coefficient vector.
    tail: bool = False
    #: analytic angular-mode cell: points hold Laurent mode indices k and
    #: weights hold radial moments M_k, so the cell's form contribution is
    #: D^H diag(M_k) D with D the mode-coefficient matrix of the basis.
    #: Rotation invariance of the band weight makes this exact in the
    #: angle, and the radial boundary layers e^{+-2kL theta/pi} that defeat
    #: fixed-order quadrature are integrated adaptively one mode at a time.
    analytic: bool = False


@dataclass
class QuadraturePlan:
    atlas: Atlas
    m: int
    order: int
    config: EpsilonProductConfig
    cells: list
    form: np.ndarray  # Hermitian: <s1,s2> = c2^H form c1

    @property
    def n_points(self) -> int:
        return sum(len(c.weights) for c in self.cells)


@dataclass
class GramMatrix:
    entries: np.ndarray
    basis_id: str
    condition_number: float
    eigenvalues: np.ndarray


@dataclass
class OrthonormalBasis:
    """Sections with identity epsilon-Gram; transform is upper triangular."""

    sections: list
    transform: np.ndarray
    m: int
    source_basis: SectionBasis


@dataclass
class EmbeddedCloud:
    """Unit section-value vectors of an ONB at chart-pinned sample points."""

    samples: list
    vectors: np.ndarray  # shape (n_samples, N+1), rows unit
    m: int


@dataclass
class NormComparisonReport:
    ratios: list
    max_ratio: float
    tag: str


# ---------------------------------------------------------------------------
# plan construction
# ---------------------------------------------------------------------------


def _gauss_on(a: float, b: float, n: int):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * nodes + 0.5 * (b + a), 0.5 * (b - a) * weights


#: partition ramp interval around each node point, in units of the node
#: radius.  The ramp must sit where the pole factors |x - p|^{-2j} are O(1),
#: otherwise the origin-centered polar grid cannot resolve the product of
#: the ramp with the steep pole profile; everything inside HOLE_OUTER * R is
#: integrated on a node-centered log-polar grid instead, where the profile
#: is a plain exponential in log r.
HOLE_INNER = 1.05
HOLE_OUTER = 1.35


def _chi(r: np.ndarray, radius: float) -> np.ndarray:
    """Partition bump: exactly 1 for r <= 1.05R, exactly 0 for r >= 1.35R."""
    a, b = HOLE_INNER * radius, HOLE_OUTER * radius
    return 1.0 - _ramp((r - a) / (b - a))


def _node_branches(atlas: Atlas):
    for i, node in enumerate(atlas.model.nodes):
        for side, (comp, pidx) in zip("ab", node.branches()):
            yield i, node, side, comp, atlas.model.marked_point(comp, pidx)


def _split_radius(atlas: Atlas, cfg: EpsilonProductConfig) -> float:
    if cfg.split_radius is not None:
        return cfg.split_radius
    reach = [
        abs(p) + 0.9 * node.radius + 0.6
        for _, node, _, _, p in _node_branches(atlas)
    ]
    return max(2.0, *reach)


def _component_weight_factor(atlas: Atlas, comp: int, x: np.ndarray, m: int):
    """rho^{2-2m} for the grafted component density (includes the area form's rho^2)."""
    rho = atlas.component_density(comp, x)
    return rho ** (2 - 2 * m)


def _sphere_cells(atlas: Atlas, comp: int, m: int, cfg: EpsilonProductConfig):
    cells = []
    split = _split_radius(atlas, cfg)
    branches = list(_node_branches(atlas))
    for _, node, _, c, p in branches:
        if abs(p) + HOLE_OUTER * node.radius >= split:
            raise ValueError("split_radius too small: node ring crosses chart seam")
    for i1, (_, n1, _, c1, p1) in enumerate(branches):
        for _, n2, _, c2, p2 in branches[i1 + 1:]:
            if c1 == c2 and abs(p1 - p2) <= HOLE_OUTER * (n1.radius + n2.radius):
                raise ValueError("node points too close: partition rings overlap")
    # inner polar chart |x| <= split
    r, wr = _gauss_on(0.0, split, cfg.radial_order)
    psi = 2.0 * math.pi * np.arange(cfg.angular_order) / cfg.angular_order
    wpsi = 2.0 * math.pi / cfg.angular_order
    X = r[:, None] * np.exp(1j * psi)[None, :]
    W = (wr * r)[:, None] * np.full(len(psi), wpsi)[None, :]
    x = X.ravel()
    w = W.ravel()
    hole = np.ones_like(w)
    for _, node, _, c, p in _node_branches(atlas):
        if c != comp:
            continue
        hole = hole * (1.0 - _chi(np.abs(x - p), node.radius))
    w = w * hole
    keep = w > 0
    x, w = x[keep], w[keep]
    w = w * _component_weight_factor(atlas, comp, x, m)
    cells.append(QuadratureCell(f"sphere-inner-c{comp}", ("component", comp), x, w))
    # outer polar chart via y = 1/x, |y| <= 1/split; dA_x = |y|^{-4} dA_y
    r, wr = _gauss_on(0.0, 1.0 / split, cfg.radial_order)
    Y = r[:, None] * np.exp(1j * psi)[None, :]
    W = (wr * r)[:, None] * np.full(len(psi), wpsi)[None, :]
    y = Y.ravel()
    w = W.ravel() / np.abs(y) ** 4
    x = 1.0 / y
    w = w * _component_weight_factor(atlas, comp, x, m)
    cells.append(
        QuadratureCell(f"sphere-outer-c{comp}", ("component", comp), x, w, tail=True)
    )
    # blend ring around each node preimage on this component, weighted by chi
    for i, node, side, c, p in _node_branches(atlas):
        if c != comp:
            continue
        R = node.radius
        ell, well = _gauss_on(math.log(R * HANDOFF_FACTOR), math.log(HOLE_OUTER * R),
                              cfg.band_radial_order)
        psi_b = 2.0 * math.pi * np.arange(cfg.band_angular_order) / cfg.band_angular_order
        wpsi_b = 2.0 * math.pi / cfg.band_angular_order
        rr = np.exp(ell)
        TAU = rr[:, None] * np.exp(1j * psi_b)[None, :]
        # dA = r dr dpsi = r^2 d(ln r) dpsi
        W = (well * rr**2)[:, None] * np.full(len(psi_b), wpsi_b)[None, :]
        tau = TAU.ravel()
        w = W.ravel() * _chi(np.abs(tau), R)
        keep = w > 0
        tau, w = tau[keep], w[keep]
        x = p + tau
        w = w * _component_weight_factor(atlas, comp, x, m)
        cells.append(
            QuadratureCell(f"blend-n{i}{side}", ("component", comp), x, w)
        )
    return cells


def _annulus_thick_bands(atlas: Atlas, node_idx: int, eps: float):
    """Thick sub-bands [theta_lo, theta_hi] of the chart band of a node annulus.

    theta in (0, pi) parametrizes depth; injectivity radius pi^2/(L sin theta).
    """
    L = atlas.annulus_modulus(node_idx)
    lam = math.pi / L
    s = math.pi**2 / (L * eps)
    if s >= 1.0:
        return [(lam, math.pi - lam)]
    theta_eps = math.asin(s)
    return [(lam, theta_eps), (math.pi - theta_eps, math.pi - lam)]


def _mode_range(atlas: Atlas, node_idx: int, side: str, order: int, m: int):
    """Laurent mode grid for basis functions on a node neck.

    In the branch frame, (x - p)^{-j} contributes the single mode m - j and
    every other same-component pole contributes modes m, m+1, ... with
    coefficients falling off by (R / |p - q|)^i; the grid is truncated once
    that falloff passes 1e-20.
    """
    model = atlas.model
    node = model.nodes[node_idx]
    comp, pidx = node.branches()[0 if side == "a" else 1]
    p = model.marked_point(comp, pidx)
    dists = [abs(p - q) for q in model.components[comp] if q != p]
    hi = m
    if dists:
        ratio = node.radius / min(dists)
        hi = m + max(1, math.ceil(-20.0 * math.log(10.0) / math.log(ratio)))
    return np.arange(m - order, hi + 1)


def _mode_coeff_matrix(atlas: Atlas, order: int, m: int, cell: QuadratureCell):
    """D[k, col]: Laurent coefficients of the basis functions on a neck band.

    Branch frame, point p: column (p, j) is tau^{m-j}; column (q, j) with
    q != p expands as tau^m (p - q + tau)^{-j} =
    sum_i (-1)^i C(j+i-1, i) (p-q)^{-j-i} tau^{m+i}.
    """
    model = atlas.model
    layout = model.coefficient_layout(order)
    modes = cell.points.astype(int)
    node_idx = cell.frame[1]
    node = model.nodes[node_idx]
    comp, pidx = node.branches()[0 if cell.frame[0] == "annulus" else 1]
    p = model.marked_point(comp, pidx)
    pos = {k: i for i, k in enumerate(modes)}
    D = np.zeros((len(modes), len(layout)), dtype=complex)
    colidx = 0
    for c, comp_pts in enumerate(model.components):
        for q in comp_pts:
            if c != comp:
                colidx += order
                continue
            for j in range(1, order + 1):
                if q == p:
                    D[pos[m - j], colidx + j - 1] = 1.0
                else:
                    inv = 1.0 / (p - q)
                    for i in range(modes[-1] - m + 1):
                        coeff = ((-1) ** i * scipy.special.comb(j + i - 1, i)
                                 * inv ** (j + i))
                        D[pos[m + i], colidx + j - 1] = coeff
            colidx += order
    return D


def _layer_moment(c: float, lo: float, hi: float, profile) -> float:
    """integral of e^{-c (theta - theta*)} profile(theta) with the exponential
    peak factored out at theta* (the maximizing endpoint); returns the
    factored integral, caller re-applies e^{-c theta*}."""
    ref = lo if c > 0 else hi
    val, _ = scipy.integrate.quad(
        lambda th: math.exp(-c * (th - ref)) * profile(th),
        lo, hi, epsabs=0.0, epsrel=1e-13, limit=400,
    )
    return val, ref


def _annulus_band_cell(atlas: Atlas, node_idx: int, theta_lo: float, theta_hi: float,
                       order: int, m: int, cfg: EpsilonProductConfig, label: str):
    """One band of a node annulus as an analytic angular-mode cell.

    With rho the annulus density, |tau| rho = (pi/L)/sin(theta) and the
    band weight is ((pi/L)/sin theta)^{2-2m} (L/pi) dtheta dpsi.  Rotation
    invariance kills all cross-mode terms, leaving per-mode moments

        M_k = 2 pi (L/pi)^{2m-1} R^{2k} int e^{-2kL theta/pi}
              sin(theta)^{2m-2} dtheta.
    """
    node = atlas.model.nodes[node_idx]
    R = node.radius
    L = atlas.annulus_modulus(node_idx)
    modes = _mode_range(atlas, node_idx, "a", order, m)
    pref = 2.0 * math.pi * (L / math.pi) ** (2 * m - 1)
    M = np.empty(len(modes))
    for idx, k in enumerate(modes):
        c = 2.0 * k * L / math.pi
        val, ref = _layer_moment(c, theta_lo, theta_hi,
                                 lambda th: math.sin(th) ** (2 * m - 2))
        M[idx] = pref * val * math.exp(2.0 * k * (math.log(R) - L * ref / math.pi))
    return QuadratureCell(label, ("annulus", node_idx),
                          modes.astype(float), M, analytic=True)


def _cusp_cells(atlas: Atlas, node_idx: int, eps_outer: float, eps_inner: float | None,
                order: int, m: int, cfg: EpsilonProductConfig):
    """Thick neck bands of an unsmoothed node (both branches), as mode cells.

    With the scaled cusp density rho = 1/(r ln(R/r)), the region with
    injectivity radius >= eps_outer is r >= R e^{-pi/eps_outer}; a second
    cutoff eps_inner selects the band between the two radii instead.  Mode
    moments: M_k = 2 pi int e^{2kv} (ln R - v)^{2m-2} dv over v = ln r.
    """
    node = atlas.model.nodes[node_idx]
    R = node.radius
    hi = math.log(R * HANDOFF_FACTOR)
    lo = math.log(R) - math.pi / eps_outer
    if eps_inner is not None:
        hi = lo
        lo = math.log(R) - math.pi / eps_inner
    cells = []
    for side in "ab":
        modes = _mode_range(atlas, node_idx, side, order, m)
        M = np.empty(len(modes))
        for idx, k in enumerate(modes):
            val, ref = _layer_moment(-2.0 * float(k), lo, hi,
                                     lambda v: (math.log(R) - v) ** (2 * m - 2))
            M[idx] = 2.0 * math.pi * val * math.exp(2.0 * k * ref)
        cells.append(
            QuadratureCell(
                f"cusp-n{node_idx}{side}-{eps_outer if eps_inner is None else eps_inner}",
                ("annulus", node_idx) if side == "a" else ("annulus-b", node_idx),
                modes.astype(float),
                M,
                analytic=True,
            )
        )
    return cells


def _tail_terms(ratio: float, order: int) -> int:
    """Series length so the dropped tail is below 1e-20 (termwise geometric)."""
    if ratio >= 0.95:
        raise ValueError("outer chart too close to a pole for the tail series")
    n = 40
    while ratio**n * float(n) ** order > 1e-20 and n < 2000:
        n += 20
    return n


def _tail_column(q: complex, j: int, m: int, u: np.ndarray, n_terms: int):
    """Tail projection of (x - q)^{-j} at u = 1/x:

        sum_{s >= 2m} C(s-1, s-j) q^{s-j} x^{-s},

    i.e. the full Laurent series at infinity minus its first 2m-1 inverse
    powers.  Evaluated by Horner in u; exact (to roundoff) for |u q| < 1.
    """
    lo = 2 * m
    s = np.arange(lo, lo + n_terms)
    binom = scipy.special.comb(s - 1, j - 1)
    if q == 0:
        coeff = np.where(s == j, 1.0, 0.0).astype(complex)
    else:
        coeff = binom * np.power(complex(q), (s - j).astype(float))
        coeff[binom == 0] = 0.0
    vals = np.zeros_like(u)
    for b in coeff[::-1]:
        vals = vals * u + b
    return vals * u**lo


def _basis_value_matrix(atlas: Atlas, order: int, m: int, cell: QuadratureCell):
    """Matrix of basis-function values at the cell's points (global layout)."""
    model = atlas.model
    layout = model.coefficient_layout(order)
    pts = cell.points
    phi = np.zeros((len(pts), len(layout)), dtype=complex)
    kind = cell.frame[0]
    if kind == "component":
        comp = cell.frame[1]
        x = pts
        tau_pow = None
        branch_comp, branch_p = comp, None
        if cell.tail:
            u = 1.0 / x
            maxq = max((abs(q) for q in model.components[comp]), default=0.0)
            n_terms = _tail_terms(maxq * float(np.max(np.abs(u))), order)
            colidx = 0
            for c, comp_pts in enumerate(model.components):
                for q in comp_pts:
                    if c == comp:
                        for j in range(1, order + 1):
                            phi[:, colidx + j - 1] = _tail_column(q, j, m, u, n_terms)
                    colidx += order
            return phi
    else:
        node_idx = cell.frame[1]
        node = model.nodes[node_idx]
        bcomp, bpidx = node.branches()[0 if kind == "annulus" else 1]
        branch_comp = bcomp
        p = model.marked_point(bcomp, bpidx)
        x = p + pts
        tau_pow = pts**m
    colidx = 0
    for c, comp_pts in enumerate(model.components):
        for q in comp_pts:
            if c != branch_comp:
                colidx += order
                continue
            inv = 1.0 / (x - q)
            vals = inv.copy()
            for j in range(order):
                phi[:, colidx + j] = vals if tau_pow is None else vals * tau_pow
                vals = vals * inv
            colidx += order
    return phi


def _assemble_form(atlas: Atlas, order: int, m: int, cells: list):
    n = sum(len(comp) for comp in atlas.model.components) * order
    A = np.zeros((n, n), dtype=complex)
    for cell in cells:
        if cell.analytic:
            D = _mode_coeff_matrix(atlas, order, m, cell)
            A += D.conj().T @ (cell.weights[:, None] * D)
        else:
            phi = _basis_value_matrix(atlas, order, m, cell)
            A += phi.conj().T @ (cell.weights[:, None] * phi)
    return 0.5 * (A + A.conj().T)


def _build_cells(atlas: Atlas, order: int, m: int, cfg: EpsilonProductConfig):
    cells = []
    for comp in range(len(atlas.model.components)):
        cells.extend(_sphere_cells(atlas, comp, m, cfg))
    for i in range(len(atlas.model.nodes)):
        if atlas.node_t(i) == 0:
            cells.extend(_cusp_cells(atlas, i, cfg.epsilon, None, order, m, cfg))
        else:
            for k, (lo, hi) in enumerate(_annulus_thick_bands(atlas, i, cfg.epsilon)):
                cells.append(
                    _annulus_band_cell(atlas, i, lo, hi, order, m, cfg,
                                       f"annulus-n{i}b{k}")
                )
    return cells


def _build_extra_cells(atlas: Atlas, order: int, m: int, cfg: EpsilonProductConfig):
    """Cells covering X_{eps/2} minus X_eps (empty when nothing is thin at eps)."""
    eps = cfg.epsilon
    cells = []
    for i in range(len(atlas.model.nodes)):
        if atlas.node_t(i) == 0:
            cells.extend(_cusp_cells(atlas, i, eps, eps / 2.0, order, m, cfg))
            continue
        L = atlas.annulus_modulus(i)
        s_eps = math.pi**2 / (L * eps)
        s_half = math.pi**2 / (L * (eps / 2.0))
        if s_eps >= 1.0:
            continue  # nothing thin at eps; nothing to add
        th_eps = math.asin(s_eps)
        if s_half >= 1.0:
            bands = [(th_eps, math.pi - th_eps)]
        else:
            th_half = math.asin(s_half)
            bands = [(th_eps, th_half), (math.pi - th_half, math.pi - th_eps)]
        for k, (lo, hi) in enumerate(bands):
            cells.append(
                _annulus_band_cell(atlas, i, lo, hi, order, m, cfg, f"extra-n{i}b{k}")
            )
    return cells


_PLAN_CACHE: dict = {}


def clear_plan_cache() -> None:
    _PLAN_CACHE.clear()


def _plan_key(atlas, m, order, cfg, extra):
    return (atlas.model, atlas.smoothing, m, order, cfg, extra)


def build_plan(atlas: Atlas, m: int, order: int, cfg: EpsilonProductConfig,
               extra: bool = False) -> QuadraturePlan:
    """Quadrature plan over the thick part X_eps (or the eps/2 \\ eps band)."""
    key = _plan_key(atlas, m, order, cfg, extra)
    if key in _PLAN_CACHE:
        return _PLAN_CACHE[key]
    cells = (_build_extra_cells(atlas, order, m, cfg) if extra
             else _build_cells(atlas, order, m, cfg))
    form = _assemble_form(atlas, order, m, cells)
    plan = QuadraturePlan(atlas, m, order, cfg, cells, form)
    _PLAN_CACHE[key] = plan
    return plan


def build_extra_plan(atlas: Atlas, m: int, order: int,
                     cfg: EpsilonProductConfig) -> QuadraturePlan:
    return build_plan(atlas, m, order, cfg, extra=True)


# ---------------------------------------------------------------------------
# inner products
# ---------------------------------------------------------------------------


def _coeff_vector(s: MDifferential) -> np.ndarray:
    return np.concatenate([c.ravel() for c in s.coefficients])


def _atlas_for(s: MDifferential) -> Atlas:
    return build_plumbed_surface(s.model, s.smoothing)


def _plan_for(s: MDifferential, cfg: EpsilonProductConfig,
              extra: bool = False) -> QuadraturePlan:
    return build_plan(_atlas_for(s), s.m, s.order, cfg, extra=extra)


def _check_compatible(s1: MDifferential, s2: MDifferential) -> None:
    if s1.model != s2.model or s1.smoothing != s2.smoothing:
        raise ValueError("sections live on different atlases")
    if s1.m != s2.m or s1.order != s2.order:
        raise ValueError("sections have mismatched weight or truncation")


def epsilon_inner_product(s1: MDifferential, s2: MDifferential,
                          cfg: EpsilonProductConfig) -> complex:
    """<s1, s2>_eps over the thick part of the grafted metric.

    Hermitian exactly: the plan's quadratic form is Hermitized once, so
    swapping arguments conjugates the result to the last bit.
    """
    _check_compatible(s1, s2)
    plan = _plan_for(s1, cfg)
    c1, c2 = _coeff_vector(s1), _coeff_vector(s2)
    return complex(c2.conj() @ (plan.form @ c1))


def epsilon_norm(s: MDifferential, cfg: EpsilonProductConfig) -> float:
    val = epsilon_inner_product(s, s, cfg).real
    return math.sqrt(max(val, 0.0))


def gram_matrix(basis: SectionBasis, cfg: EpsilonProductConfig) -> GramMatrix:
    """Hermitian positive definite Gram of a basis; eigenvalues reported."""
    secs = basis.sections
    plan = _plan_for(secs[0], cfg)
    C = np.column_stack([_coeff_vector(s) for s in secs])
    H = C.conj().T @ (plan.form @ C)
    # H[beta, alpha] = <s_alpha, s_beta>; Gram entries G[a, b] = <s_a, s_b>
    G = H.T.copy()
    G = 0.5 * (G + G.conj().T)
    eig = np.linalg.eigvalsh(G)
    if eig[0] <= 0:
        raise ValueError("Gram matrix is not positive definite: dependent basis "
                         "or quadrature failure")
    return GramMatrix(G, basis.source, float(eig[-1] / eig[0]), eig)


def orthonormalize(basis: SectionBasis, gram: GramMatrix) -> OrthonormalBasis:
    """Cholesky whitening: G = L L^H, new sections = old . transpose(inv L).

    The transform is upper triangular and deterministic for a fixed basis
    order, so repeated runs give identical orthonormal bases.
    """
    G = gram.entries
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise ValueError("Gram matrix must be positive definite") from exc
    transform = np.linalg.inv(L).T
    sections = combine_sections(basis.sections, transform)
    return OrthonormalBasis(sections, transform, basis.m, basis)


def norm_ratio(s: MDifferential, cfg_eps: EpsilonProductConfig,
               cfg_eps_half: EpsilonProductConfig) -> float:
    """||s||_{eps/2} / ||s||_eps, computed with nested thick regions.

    The eps/2 norm is assembled as the eps norm plus the integral over the
    closed-form band between the two cutoffs, so the ratio is >= 1 exactly
    (the added mass is a sum of nonnegative quadrature terms).
    """
    if not math.isclose(cfg_eps_half.epsilon, cfg_eps.epsilon / 2.0,
                        rel_tol=0, abs_tol=1e-15):
        raise ValueError("second config must use half the cutoff of the first")
    base = epsilon_inner_product(s, s, cfg_eps).real
    if base <= 0:
        raise ValueError("section has zero norm on the thick part")
    plan_extra = _plan_for(s, cfg_eps, extra=True)
    c = _coeff_vector(s)
    extra = float((c.conj() @ (plan_extra.form @ c)).real)
    extra = max(extra, 0.0)
    return math.sqrt((base + extra) / base)


def quadrature_refinement_error(basis: SectionBasis,
                                cfg: EpsilonProductConfig) -> float:
    """Max relative change of Gram entries when all quadrature orders double."""
    g1 = gram_matrix(basis, cfg).entries
    g2 = gram_matrix(basis, cfg.doubled()).entries
    scale = max(np.max(np.abs(g2)), 1e-300)
    return float(np.max(np.abs(g1 - g2)) / scale)


# ---------------------------------------------------------------------------
# embeddings and alignment
# ---------------------------------------------------------------------------


def embed_cloud(onb: OrthonormalBasis, samples: list) -> EmbeddedCloud:
    """Section-value vectors at chart-pinned component points, unit-normalized.

    samples: list of (component index, complex chart coordinate).  A zero
    vector (base point) raises, signalling m < 3 behavior or a broken basis.
    """
    if onb.m < 3:
        raise ValueError("projective embedding requires m >= 3")
    vecs = []
    for comp, x in samples:
        row = np.array(
            [s.component_value(comp, np.array([complex(x)]))[0] for s in onb.sections]
        )
        nrm = np.linalg.norm(row)
        if nrm == 0 or not np.isfinite(nrm):
            raise ValueError(f"base point hit at sample ({comp}, {x})")
        vecs.append(row / nrm)
    return EmbeddedCloud(list(samples), np.array(vecs), onb.m)


def fs_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Fubini-Study (chordal) distance of unit vectors: sqrt(1 - |<a,b>|^2)."""
    ip = abs(np.vdot(a, b))
    return math.sqrt(max(0.0, 1.0 - min(ip, 1.0) ** 2))


def unitary_align(cloud_a: EmbeddedCloud, cloud_b: EmbeddedCloud):
    """Unitary U minimizing phase-aligned chordal misfit of b onto a.

    Alternates per-point phase alignment with an orthogonal Procrustes solve
    (SVD of the cross covariance); stops on stagnation below 1e-12 or after
    50 iterations.  Returns (U, rms Fubini-Study residual, degenerate flag):
    cloud_b.vectors @ U.T approximates cloud_a.vectors row by row.
    """
    A = cloud_a.vectors
    B = cloud_b.vectors
    if A.shape != B.shape:
        raise ValueError("clouds must have corresponding samples")
    n, dim = A.shape
    if np.array_equal(A, B):
        # duplicate clouds (e.g. a repeated schedule) align exactly
        return np.eye(dim, dtype=complex), 0.0, False
    degenerate = np.linalg.matrix_rank(B, tol=1e-10) < dim
    # plain Procrustes init (all phases 1): when the clouds are honest
    # section values of two nearby bases, the relating unitary needs no
    # per-point phases, and starting the alternation from U = I instead
    # strands it in a far-away local minimum.
    u_svd, _, vh = np.linalg.svd(B.conj().T @ A)
    U = (u_svd @ vh).T
    prev = math.inf
    for _ in range(50):
        BU = B @ U.T
        phases = np.ones(n, dtype=complex)
        for i in range(n):
            ip = np.vdot(BU[i], A[i])
            if abs(ip) > 0:
                phases[i] = ip / abs(ip)
        # Procrustes: minimize ||diag(phases) B U^T - A||_F over unitary U;
        # with X = U^T the minimizer is the polar factor of (PB)^H A.
        C = (phases[:, None] * B).conj().T @ A
        u_svd, _, vh = np.linalg.svd(C)
        U = (u_svd @ vh).T
        misfit = float(np.linalg.norm(phases[:, None] * (B @ U.T) - A))
        if abs(prev - misfit) < 1e-12:
            break
        prev = misfit
    BU = B @ U.T
    res = math.sqrt(
        sum(fs_distance(A[i], BU[i]) ** 2 for i in range(n)) / n
    )
    return U, res, degenerate
