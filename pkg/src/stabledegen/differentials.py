"""Pluricanonical sections on nodal sphere models and their plumbed smoothings.

A nodal model is a collection of rational components (spheres with marked
points) and nodes pairing the marked points.  An m-differential is carried
as one rational function per component, f(x) dx^m, with poles only at node
preimages; near a node branch it is rewritten in the frame (dtau/tau)^m as
u(tau) = f(p + tau) tau^m.  Smoothing a node with parameter t glues the
branch coordinates by tau_b = t / tau_a, which turns the frame by (-1)^m,
so a global section must satisfy u_b(sigma) = (-1)^m u_a(t/sigma) on the
overlap.  Bases are extracted as numerical nullspaces of the resulting
linear constraints.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "PlumbingNode",
    "NodalCurveModel",
    "MDifferential",
    "SectionBasis",
    "Atlas",
    "RankDeficiencyError",
    "dimension",
    "nodal_basis",
    "plumbed_basis",
    "build_plumbed_surface",
    "evaluate",
    "residue_coefficient",
    "branch_residue",
    "node_matching_defect",
    "gluing_residual",
    "combine_sections",
    "hyperelliptic_fixture_basis",
    "HyperellipticSection",
    "two_self_node_sphere",
    "dollar_sign_curve",
    "three_self_node_sphere",
]

#: relative singular-value gap required between kept and discarded directions
SV_GAP_TARGET = 1.0e6

#: handoff between annulus metric and component metric sits at |tau| = R/e
HANDOFF_FACTOR = math.exp(-1.0)


class RankDeficiencyError(RuntimeError):
    """Numerical kernel extraction could not separate kept from discarded directions."""


@dataclass(frozen=True)
class PlumbingNode:
    """A node pairing marked point ``point_a`` on component ``comp_a`` with
    ``point_b`` on ``comp_b`` (possibly the same component).

    ``radius`` is the plumbing radius R: the local coordinates live on
    |tau| <= R and smoothing by t (with |t| < R^2) glues tau_b = t / tau_a.
    """

    comp_a: int
    point_a: int
    comp_b: int
    point_b: int
    radius: float = 1.0

    def branches(self):
        return ((self.comp_a, self.point_a), (self.comp_b, self.point_b))


@dataclass(frozen=True)
class NodalCurveModel:
    """Rational components with marked points, glued at nodes.

    ``components[c]`` is the tuple of marked points of component c (all of
    them node preimages).  Arithmetic genus is #nodes - #components + 1.
    """

    components: tuple[tuple[complex, ...], ...]
    nodes: tuple[PlumbingNode, ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "components",
            tuple(tuple(complex(p) for p in comp) for comp in self.components),
        )

    @property
    def genus(self) -> int:
        return len(self.nodes) - len(self.components) + 1

    def marked_point(self, comp: int, idx: int) -> complex:
        return self.components[comp][idx]

    def validate(self) -> None:
        used: set[tuple[int, int]] = set()
        for node in self.nodes:
            if not 0 < node.radius:
                raise ValueError("node radius must be positive")
            for comp, idx in node.branches():
                if not 0 <= comp < len(self.components):
                    raise ValueError("node references missing component")
                if not 0 <= idx < len(self.components[comp]):
                    raise ValueError("node references missing marked point")
                if (comp, idx) in used:
                    raise ValueError("marked point used by two node branches")
                used.add((comp, idx))
        for c, comp in enumerate(self.components):
            if len(comp) < 3:
                raise ValueError(f"component {c} unstable: needs >= 3 marked points")
            if len(used & {(c, i) for i in range(len(comp))}) != len(comp):
                raise ValueError(f"component {c} has marked points not paired by nodes")
            for i in range(len(comp)):
                for j in range(i + 1, len(comp)):
                    d = abs(comp[i] - comp[j])
                    if d == 0:
                        raise ValueError("coincident marked points")
        for node in self.nodes:
            for comp, idx in node.branches():
                p = self.marked_point(comp, idx)
                others = [q for k, q in enumerate(self.components[comp]) if k != idx]
                if others and min(abs(p - q) for q in others) <= 2 * node.radius:
                    raise ValueError("plumbing disks overlap; reduce node radius")
        if self.genus < 2:
            raise ValueError("arithmetic genus must be >= 2")

    # -- coefficient layout -------------------------------------------------
    def coefficient_layout(self, order: int) -> list[tuple[int, int, int]]:
        """Global ordering of coefficients a_{(comp, point, j)} with 1 <= j <= order."""
        layout = []
        for c, comp in enumerate(self.components):
            for pidx in range(len(comp)):
                for j in range(1, order + 1):
                    layout.append((c, pidx, j))
        return layout

    def to_dict(self) -> dict:
        return {
            "components": [
                [[p.real, p.imag] for p in comp] for comp in self.components
            ],
            "nodes": [
                {
                    "a": [n.comp_a, n.point_a],
                    "b": [n.comp_b, n.point_b],
                    "radius": n.radius,
                }
                for n in self.nodes
            ],
        }

    @staticmethod
    def from_dict(d: dict) -> "NodalCurveModel":
        comps = tuple(
            tuple(complex(p[0], p[1]) for p in comp) for comp in d["components"]
        )
        nodes = tuple(
            PlumbingNode(n["a"][0], n["a"][1], n["b"][0], n["b"][1], n.get("radius", 1.0))
            for n in d["nodes"]
        )
        model = NodalCurveModel(comps, nodes)
        model.validate()
        return model


def two_self_node_sphere(radius: float = 1.0) -> NodalCurveModel:
    """Genus 2: one sphere with two self-nodes (marked points on a square)."""
    model = NodalCurveModel(
        components=((2.0, -2.0, 2.0j, -2.0j),),
        nodes=(
            PlumbingNode(0, 0, 0, 1, radius),
            PlumbingNode(0, 2, 0, 3, radius),
        ),
    )
    model.validate()
    return model


def dollar_sign_curve(radius: float = 1.0) -> NodalCurveModel:
    """Genus 2: two spheres joined at three nodes."""
    w = cmath.exp(2j * math.pi / 3)
    pts = tuple(2.0 * w**k for k in range(3))
    model = NodalCurveModel(
        components=(pts, pts),
        nodes=(
            PlumbingNode(0, 0, 1, 0, radius),
            PlumbingNode(0, 1, 1, 1, radius),
            PlumbingNode(0, 2, 1, 2, radius),
        ),
    )
    model.validate()
    return model


def three_self_node_sphere(radius: float = 1.0) -> NodalCurveModel:
    """Genus 3: one sphere with three self-nodes (marked points on a hexagon)."""
    pts = tuple(3.0 * cmath.exp(1j * math.pi * k / 3) for k in range(6))
    model = NodalCurveModel(
        components=(pts,),
        nodes=(
            PlumbingNode(0, 0, 0, 3, radius),
            PlumbingNode(0, 1, 0, 4, radius),
            PlumbingNode(0, 2, 0, 5, radius),
        ),
    )
    model.validate()
    return model


def dimension(g: int, m: int) -> int:
    """h^0 of the m-th pluricanonical bundle: (2m-1)(g-1) for m >= 2, g for m = 1."""
    if g < 2:
        raise ValueError("genus must be >= 2")
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return g
    return (2 * m - 1) * (g - 1)


# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------


@dataclass
class MDifferential:
    """An m-differential on a nodal model or its plumbed smoothing.

    ``coefficients[c]`` has shape (n_marked, order): entry (i, j-1) is the
    coefficient of (x - p_i)^{-j} in the rational part on component c.  The
    negative Laurent band at a node branch reaches order - m =: truncation.
    """

    m: int
    model: NodalCurveModel
    coefficients: tuple[np.ndarray, ...]
    smoothing: complex = 0.0
    source: str = "nodal_solve"

    def __post_init__(self):
        self.coefficients = tuple(
            np.asarray(c, dtype=complex) for c in self.coefficients
        )

    @property
    def order(self) -> int:
        return self.coefficients[0].shape[1]

    @property
    def truncation(self) -> int:
        return self.order - self.m

    def component_value(self, comp: int, x):
        """f(x) on component ``comp`` (vectorized over x)."""
        x = np.asarray(x, dtype=complex)
        pts = np.array(self.model.components[comp])
        co = self.coefficients[comp]
        out = np.zeros_like(x)
        for i, p in enumerate(pts):
            inv = 1.0 / (x - p)
            acc = np.zeros_like(x)
            # Horner in inv
            for j in range(co.shape[1] - 1, -1, -1):
                acc = acc * inv + co[i, j]
            out = out + acc * inv
        return out

    def branch_u(self, node_idx: int, side: str, tau):
        """u(tau) = f(p + tau) tau^m in the (dtau/tau)^m frame of a node branch."""
        node = self.model.nodes[node_idx]
        comp, pidx = node.branches()[0 if side == "a" else 1]
        p = self.model.marked_point(comp, pidx)
        tau = np.asarray(tau, dtype=complex)
        return self.component_value(comp, p + tau) * tau**self.m

    def laurent_tail(self, node_idx: int, side: str, n_coeff: int | None = None,
                     radius: float | None = None, n_samples: int = 256) -> np.ndarray:
        """Laurent coefficients c_k of u(tau), k = -K..K, by trapezoid contour sums."""
        K = self.truncation if n_coeff is None else n_coeff
        node = self.model.nodes[node_idx]
        if radius is None:
            radius = node.radius * HANDOFF_FACTOR
        theta = 2.0 * math.pi * np.arange(n_samples) / n_samples
        tau = radius * np.exp(1j * theta)
        u = self.branch_u(node_idx, side, tau)
        ks = np.arange(-K, K + 1)
        phases = np.exp(-1j * np.outer(ks, theta))
        return (phases @ u) / n_samples / np.power(radius, ks.astype(float))


@dataclass
class SectionBasis:
    """A numerically independent basis of m-differentials."""

    sections: list
    m: int
    gram_rank: int
    source: str
    sv_gap: float = math.inf
    smoothing: complex = 0.0
    model: NodalCurveModel | None = None


def combine_sections(sections: list[MDifferential], matrix: np.ndarray) -> list[MDifferential]:
    """New sections t_beta = sum_alpha s_alpha * matrix[alpha, beta]."""
    matrix = np.asarray(matrix, dtype=complex)
    base = sections[0]
    out = []
    for b in range(matrix.shape[1]):
        coeffs = tuple(
            sum(matrix[a, b] * sections[a].coefficients[c] for a in range(len(sections)))
            for c in range(len(base.coefficients))
        )
        out.append(
            MDifferential(
                m=base.m,
                model=base.model,
                coefficients=coeffs,
                smoothing=base.smoothing,
                source=base.source,
            )
        )
    return out


# ---------------------------------------------------------------------------
# constraint assembly
# ---------------------------------------------------------------------------


def _infinity_decay_matrix(model: NodalCurveModel, order: int, m: int) -> np.ndarray:
    """Rows forcing f(x) = O(x^{-2m}): coefficients of x^{-1}..x^{-(2m-1)} vanish.

    (x-p)^{-j} = sum_i binom(j+i-1, i) p^i x^{-(j+i)}, so the x^{-s}
    coefficient of the (p, j) basis function is binom(s-1, s-j) p^{s-j}.
    """
    layout = model.coefficient_layout(order)
    col = {key: k for k, key in enumerate(layout)}
    rows = []
    for c, comp in enumerate(model.components):
        for s in range(1, 2 * m):
            row = np.zeros(len(layout), dtype=complex)
            for pidx, p in enumerate(comp):
                for j in range(1, min(s, order) + 1):
                    row[col[(c, pidx, j)]] = math.comb(s - 1, s - j) * p ** (s - j)
            rows.append(row)
    return np.array(rows)


def _phase_fix(vectors: np.ndarray) -> np.ndarray:
    """Deterministic phase/sign convention: largest entry of each column real positive."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        idx = int(np.argmax(np.abs(out[:, k])))
        ph = out[idx, k]
        if ph != 0:
            out[:, k] = out[:, k] * (abs(ph) / ph)
    return out


def _split_coefficients(model: NodalCurveModel, order: int, vec: np.ndarray):
    coeffs = []
    k = 0
    for comp in model.components:
        n = len(comp)
        coeffs.append(vec[k : k + n * order].reshape(n, order))
        k += n * order
    return tuple(coeffs)


def nodal_basis(model: NodalCurveModel, m: int) -> SectionBasis:
    """Basis of m-differentials on the nodal model (t = 0).

    Rational parts with poles of order <= m at the node preimages, one
    matching condition per node on the order-zero Laurent coefficients:
    u_b(0) = (-1)^m u_a(0).  The count is (2m-1)(g-1).
    """
    if m < 2:
        raise ValueError("nodal_basis requires m >= 2")
    model.validate()
    layout = model.coefficient_layout(m)
    col = {key: k for k, key in enumerate(layout)}
    rows = [_infinity_decay_matrix(model, m, m)]
    match = []
    for node in model.nodes:
        row = np.zeros(len(layout), dtype=complex)
        # u(0) at a branch of pole order exactly m is the (p, m) coefficient
        row[col[(node.comp_b, node.point_b, m)]] += 1.0
        row[col[(node.comp_a, node.point_a, m)]] -= (-1.0) ** m
        match.append(row)
    full = np.vstack([rows[0]] + match) if match else rows[0]
    kernel = scipy.linalg.null_space(full)
    sv = scipy.linalg.svdvals(full)
    expected = dimension(model.genus, m)
    if kernel.shape[1] != expected:
        raise RankDeficiencyError(
            f"nodal kernel dimension {kernel.shape[1]} != expected {expected}"
        )
    nz = sv[sv > sv[0] * 1e-13]
    gap = (nz[-1] / sv[len(nz)]) if len(sv) > len(nz) and sv[len(nz)] > 0 else math.inf
    if gap < SV_GAP_TARGET:
        raise RankDeficiencyError(f"nodal singular-value gap {gap:.3g} below target")
    kernel = _phase_fix(kernel)
    sections = [
        MDifferential(m, model, _split_coefficients(model, m, kernel[:, k]),
                      smoothing=0.0, source="nodal_solve")
        for k in range(kernel.shape[1])
    ]
    return SectionBasis(sections, m, len(sections), "nodal_solve", gap, 0.0, model)


def _node_t(t, node_idx: int) -> complex:
    if np.isscalar(t):
        return complex(t)
    return complex(t[node_idx])


def _add_taylor_row(model, col, comp, p_idx, k, order, m, out, factor):
    """Add factor * (the linear functional c_k of u at branch (comp, p_idx)).

    c_k for k >= 0 is the coefficient a_{p, m-k} (when 1 <= m-k) plus, for
    k >= m, the (k-m)-th Taylor coefficient at p of the regular part, whose
    closed form per pole q != p is (-1)^i binom(j+i-1, i) (p-q)^{-j-i}.
    """
    p = model.marked_point(comp, p_idx)
    jm = m - k
    if 1 <= jm <= order:
        out[col[(comp, p_idx, jm)]] += factor
    i = k - m
    if i < 0:
        return
    for q_idx, q in enumerate(model.components[comp]):
        if q_idx == p_idx:
            continue
        delta = p - q
        for j in range(1, order + 1):
            out[col[(comp, q_idx, j)]] += (
                factor * (-1.0) ** i * math.comb(j + i - 1, i) * delta ** (-j - i)
            )


def _taylor_coefficient(model, comp, p_idx, k, m, coeffs):
    """c_k (k >= 0) of u(tau) at a branch, evaluated on given coefficient arrays."""
    p = model.marked_point(comp, p_idx)
    order = coeffs[comp].shape[1]
    c = 0.0 + 0.0j
    jm = m - k
    if 1 <= jm <= order:
        c += coeffs[comp][p_idx, jm - 1]
    i = k - m
    if i >= 0:
        for q_idx, q in enumerate(model.components[comp]):
            if q_idx == p_idx:
                continue
            delta = p - q
            for j in range(1, order + 1):
                c += (
                    coeffs[comp][q_idx, j - 1]
                    * (-1.0) ** i
                    * math.comb(j + i - 1, i)
                    * delta ** (-j - i)
                )
    return c


def _refine_high_coefficients(model, coeffs, t, m, K, n_iter=40, tol=1e-300):
    """Restore per-mode relative accuracy of the order > m pole coefficients.

    The gluing identity determines them as a_{m+k} = (-1)^m t^k c_k(other
    branch), a strong contraction in the high coefficients; iterating it
    keeps each a_{m+k} accurate relative to its own size t^k rather than to
    the overall coefficient scale, which matters when evaluating near nodes.
    """
    sgn = (-1.0) ** m
    for _ in range(n_iter):
        delta = 0.0
        size = 0.0
        for i, node in enumerate(model.nodes):
            ti = _node_t(t, i)
            for k in range(1, K + 1):
                new_b = sgn * ti**k * _taylor_coefficient(
                    model, node.comp_a, node.point_a, k, m, coeffs
                )
                new_a = sgn * ti**k * _taylor_coefficient(
                    model, node.comp_b, node.point_b, k, m, coeffs
                )
                delta = max(
                    delta,
                    abs(coeffs[node.comp_b][node.point_b, m + k - 1] - new_b),
                    abs(coeffs[node.comp_a][node.point_a, m + k - 1] - new_a),
                )
                size = max(size, abs(new_a), abs(new_b))
                coeffs[node.comp_b][node.point_b, m + k - 1] = new_b
                coeffs[node.comp_a][node.point_a, m + k - 1] = new_a
        if delta <= tol * max(size, 1.0):
            break
    return coeffs


def plumbed_basis(
    model: NodalCurveModel,
    t,
    m: int,
    truncation: int | None = None,
    gap_target: float = SV_GAP_TARGET,
) -> SectionBasis:
    """Basis of m-differentials on the plumbed surface X_t.

    Unknowns are rational parts with poles of order <= m + K at node
    preimages.  The gluing identity u_b(sigma) = (-1)^m u_a(t/sigma) is
    imposed mode by mode on the truncated Laurent band: the order-zero row
    is the residue law a_{p_b, m} = (-1)^m a_{p_a, m} (exact at every t),
    and mode k in 1..K pins the order m+k pole coefficient of one branch to
    t^k times the k-th Taylor coefficient of the other.  Together with the
    infinity-decay rows the nullity is exactly (2m-1)(g-1); the numerical
    kernel is accepted only if the singular-value gap between kept and
    discarded directions is >= the gap target (default 1e6).
    """
    if m < 2:
        raise ValueError("plumbed_basis requires m >= 2")
    model.validate()
    K = (m + 8) if truncation is None else truncation
    if K < m + 4:
        raise ValueError("truncation K must be >= m + 4")
    for i, node in enumerate(model.nodes):
        ti = _node_t(t, i)
        if not 0 < abs(ti) < node.radius**2:
            raise ValueError("require 0 < |t| < R^2 at every node")
    order = m + K
    layout = model.coefficient_layout(order)
    col = {key: k for k, key in enumerate(layout)}
    rows = list(_infinity_decay_matrix(model, order, m))
    sgn = (-1.0) ** m
    for i, node in enumerate(model.nodes):
        ti = _node_t(t, i)
        r0 = np.zeros(len(layout), dtype=complex)
        r0[col[(node.comp_b, node.point_b, m)]] += 1.0
        r0[col[(node.comp_a, node.point_a, m)]] -= sgn
        rows.append(r0)
        for k in range(1, K + 1):
            rb = np.zeros(len(layout), dtype=complex)
            rb[col[(node.comp_b, node.point_b, m + k)]] += 1.0
            _add_taylor_row(
                model, col, node.comp_a, node.point_a, k, order, m, rb, -sgn * ti**k
            )
            rows.append(rb)
            ra = np.zeros(len(layout), dtype=complex)
            ra[col[(node.comp_a, node.point_a, m + k)]] += 1.0
            _add_taylor_row(
                model, col, node.comp_b, node.point_b, k, order, m, ra, -sgn * ti**k
            )
            rows.append(ra)
    full = np.vstack(rows)
    sv = scipy.linalg.svdvals(full)
    kernel = scipy.linalg.null_space(full)
    expected = dimension(model.genus, m)
    ncols = full.shape[1]
    if kernel.shape[1] != expected:
        raise RankDeficiencyError(
            f"plumbed kernel dimension {kernel.shape[1]} != expected {expected}; "
            "try larger K or larger |t|"
        )
    rank = ncols - expected
    if rank < len(sv) and sv[rank] > 0:
        gap = sv[rank - 1] / sv[rank]
    else:
        # full row rank: separation measured against the kernel residual scale
        resid = np.linalg.norm(full @ kernel, axis=0).max()
        gap = sv[rank - 1] / resid if resid > 0 else math.inf
    if gap < gap_target:
        raise RankDeficiencyError(
            f"singular-value gap {gap:.3g} below target {gap_target:.3g}; "
            "try larger K or larger |t|"
        )
    coeff_vectors = _phase_fix(kernel)
    t_scalar = _node_t(t, 0)
    sections = []
    for k in range(coeff_vectors.shape[1]):
        coeffs = list(_split_coefficients(model, order, coeff_vectors[:, k]))
        coeffs = [c.copy() for c in coeffs]
        _refine_high_coefficients(model, coeffs, t, m, K)
        sections.append(
            MDifferential(m, model, tuple(coeffs), smoothing=t_scalar,
                          source="plumbed_solve")
        )
    return SectionBasis(sections, m, len(sections), "plumbed_solve", float(gap),
                        t_scalar, model)


# ---------------------------------------------------------------------------
# plumbed atlas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atlas:
    """Chart atlas of X_t: component charts minus small disks plus one
    annulus chart per node, with transitions tau_b = t / tau_a.

    ``t == 0`` degenerates the annuli to punctured-disk pairs.  The grafted
    metric: exact hyperbolic annulus (or punctured-disk) density on node
    annuli, a sphere-based reference density on component cores, geometric
    ramp between them on R/e <= |tau| <= 3R/4.
    """

    model: NodalCurveModel
    smoothing: tuple[complex, ...]

    def node_t(self, node_idx: int) -> complex:
        return self.smoothing[node_idx]

    def annulus_modulus(self, node_idx: int) -> float:
        t = abs(self.node_t(node_idx))
        R = self.model.nodes[node_idx].radius
        if t == 0:
            return math.inf
        return math.log(R**2 / t)

    def core_length(self, node_idx: int) -> float:
        L = self.annulus_modulus(node_idx)
        return 0.0 if math.isinf(L) else 2.0 * math.pi**2 / L

    def lam(self, node_idx: int) -> float:
        """Dilation parameter of the node annulus: pi / modulus."""
        L = self.annulus_modulus(node_idx)
        return 0.0 if math.isinf(L) else math.pi / L

    def transition(self, node_idx: int, tau, from_side: str = "a"):
        """tau_b = t / tau_a (and symmetrically back)."""
        t = self.node_t(node_idx)
        if t == 0:
            raise ValueError("no transition across an unsmoothed node")
        tau = np.asarray(tau, dtype=complex)
        node = self.model.nodes[node_idx]
        R = node.radius
        r = np.abs(tau)
        if np.any((r < abs(t) / R * (1 - 1e-12)) | (r > R * (1 + 1e-12))):
            raise ValueError("point outside the node annulus")
        return t / tau

    def handoff_radius(self, node_idx: int) -> float:
        return self.model.nodes[node_idx].radius * HANDOFF_FACTOR

    # -- grafted metric -----------------------------------------------------

    def annulus_density(self, node_idx: int, tau):
        """Hyperbolic density of the full plumbing annulus, in the tau_a chart.

        For t = 0 this is the scaled punctured-disk (cusp) density.
        """
        node = self.model.nodes[node_idx]
        R = node.radius
        r = np.abs(np.asarray(tau, dtype=complex))
        t = abs(self.node_t(node_idx))
        if t == 0:
            return 1.0 / (r * np.log(R / r))
        L = self.annulus_modulus(node_idx)
        w = r / R
        phi = math.pi * np.log(w) / (-L)
        return (math.pi / L) / (r * np.sin(phi))

    def sphere_density(self, comp: int, x):
        x = np.asarray(x, dtype=complex)
        return 2.0 / (1.0 + np.abs(x) ** 2)

    def component_density(self, comp: int, x):
        """Reference density on a component core, ramped into the node annuli.

        Pure sphere density away from nodes; within R/e <= |x - p| <= 3R/4 of
        a node preimage, a geometric blend that meets the annulus density at
        the handoff circle |tau| = R/e.
        """
        x = np.asarray(x, dtype=complex)
        rho = self.sphere_density(comp, x)
        out = np.array(rho, dtype=float, copy=True)
        for i, node in enumerate(self.model.nodes):
            for side, (c, pidx) in zip("ab", node.branches()):
                if c != comp:
                    continue
                p = self.model.marked_point(c, pidx)
                tau = x - p
                r = np.abs(tau)
                R = node.radius
                lo, hi = R * HANDOFF_FACTOR, 0.75 * R
                mask = (r >= lo * (1 - 1e-12)) & (r < hi)
                if not np.any(mask):
                    continue
                tau_m = np.where(mask, tau, lo)
                rho_ann = self.annulus_density_side(i, side, tau_m)
                s = _ramp((np.log(np.abs(tau_m)) - math.log(lo)) / (math.log(hi) - math.log(lo)))
                blend = np.exp((1.0 - s) * np.log(rho_ann) + s * np.log(rho))
                out = np.where(mask, blend, out)
        return out

    def _annulus_density_b(self, node_idx: int, tau_b):
        """Annulus density expressed in the branch-b coordinate."""
        t = self.node_t(node_idx)
        tau_b = np.asarray(tau_b, dtype=complex)
        tau_a = t / tau_b
        rho_a = self.annulus_density(node_idx, tau_a)
        # density transforms by |d tau_a / d tau_b| = |t| / |tau_b|^2
        return rho_a * abs(t) / np.abs(tau_b) ** 2

    def annulus_density_side(self, node_idx: int, side: str, tau):
        if side == "a" or self.node_t(node_idx) == 0:
            return self.annulus_density(node_idx, tau)
        return self._annulus_density_b(node_idx, tau)


def _ramp(xi):
    """High-order smoothstep: 0 for xi <= 0, 1 for xi >= 1, C^7 at the seams.

    Degree-15 polynomial with vanishing derivatives through order 7 at both
    ends.  A polynomial ramp keeps Gauss-Legendre and trapezoid rules
    converging at high algebraic order through the transition band, which
    an exponential (flat-but-nonanalytic) ramp does not.
    """
    xi = np.asarray(np.clip(xi, 0.0, 1.0), dtype=float)
    # sum_{k=0..7} C(7+k, k) C(15, 7-k) (-xi)^k, times xi^8
    coeffs = [6435.0, -40040.0, 108108.0, -163800.0, 150150.0,
              -83160.0, 25740.0, -3432.0]
    acc = np.zeros_like(xi)
    for c in reversed(coeffs):
        acc = acc * xi + c
    return acc * xi**8


def build_plumbed_surface(model: NodalCurveModel, t) -> Atlas:
    """Atlas of the plumbed surface X_t (t may be scalar or per node)."""
    model.validate()
    n = len(model.nodes)
    ts = tuple(_node_t(t, i) for i in range(n))
    for ti, node in zip(ts, model.nodes):
        # L = ln(R^2/|t|) > 2 keeps both handoff circles |tau| = R/e inside
        # the annulus and the annulus density positive on the blend band
        if abs(ti) >= node.radius**2 * math.exp(-2.0):
            raise ValueError("require |t| < R^2 e^{-2} at every node "
                             "(handoff circles must fit inside the annulus)")
    return Atlas(model=model, smoothing=ts)


# ---------------------------------------------------------------------------
# residues and defects
# ---------------------------------------------------------------------------


def residue_coefficient(u, r: float, n_samples: int = 64) -> complex:
    """(1/2 pi i) contour integral of u(tau) dtau/tau over |tau| = r.

    ``u`` is a vectorized callable; the N-point trapezoid rule is exact for
    trigonometric polynomials of degree < N, i.e. this returns the c_0
    Laurent coefficient exactly for truncated Laurent series.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    theta = 2.0 * math.pi * np.arange(n_samples) / n_samples
    tau = r * np.exp(1j * theta)
    vals = np.asarray(u(tau), dtype=complex)
    return complex(np.mean(vals))


def branch_residue(s: MDifferential, node_idx: int, side: str,
                   r: float | None = None, n_samples: int = 64) -> complex:
    """Residue functional u(0) of a section at one node branch."""
    node = s.model.nodes[node_idx]
    if r is None:
        r = node.radius * HANDOFF_FACTOR
    if not 0 < r <= node.radius:
        raise ValueError("contour radius outside the branch chart")
    return residue_coefficient(lambda tau: s.branch_u(node_idx, side, tau), r, n_samples)


def node_matching_defect(s: MDifferential, node_idx: int,
                         r: float | None = None, n_samples: int = 64) -> float:
    """|u_b(0) - (-1)^m u_a(0)| with both residues taken by contour quadrature."""
    ua = branch_residue(s, node_idx, "a", r, n_samples)
    ub = branch_residue(s, node_idx, "b", r, n_samples)
    return abs(ub - (-1.0) ** s.m * ua)


def gluing_residual(s: MDifferential, node_idx: int, t: complex | None = None,
                    r: float | None = None, n_samples: int = 128) -> float:
    """Max of |u_b(sigma) - (-1)^m u_a(t/sigma)| on the overlap circle |sigma| = r."""
    node = s.model.nodes[node_idx]
    if t is None:
        t = s.smoothing
    if t == 0:
        raise ValueError("gluing residual needs t != 0")
    if r is None:
        r = math.sqrt(abs(t))
    theta = 2.0 * math.pi * np.arange(n_samples) / n_samples
    sigma = r * np.exp(1j * theta)
    mismatch = s.branch_u(node_idx, "b", sigma) - (-1.0) ** s.m * s.branch_u(
        node_idx, "a", t / sigma
    )
    return float(np.max(np.abs(mismatch)))


def evaluate(s: MDifferential, atlas: Atlas, comp: int, x: complex):
    """Value (component dx^m frame) and grafted pointwise norm at a component point.

    The pointwise norm of f dx^m under a density rho |dx| is |f| rho^{-m}.
    """
    val = complex(s.component_value(comp, np.array([x]))[0])
    rho = float(np.asarray(atlas.component_density(comp, np.array([x])))[0])
    return val, abs(val) * rho ** (-s.m)


def evaluate_branch(s: MDifferential, atlas: Atlas, node_idx: int, side: str, tau: complex):
    """Value in the (dtau/tau)^m branch frame plus grafted pointwise norm."""
    val = complex(s.branch_u(node_idx, side, np.array([tau]))[0])
    rho = float(np.asarray(atlas.annulus_density_side(node_idx, side, np.array([tau])))[0])
    return val, abs(val) * (abs(tau) * rho) ** (-s.m)


# ---------------------------------------------------------------------------
# genus-2 hyperelliptic fixture
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HyperellipticSection:
    """x^j y^e (dx/y)^m on y^2 = f(x), deg f = 6 (e is 0 or 1)."""

    j: int
    with_y: bool
    m: int

    def order_at_infinity(self) -> int:
        # u = 1/x, y ~ x^3: (dx/y)^m ~ u^m du^m, x^j = u^{-j}, y = u^{-3}
        return self.m - self.j - (3 if self.with_y else 0)


def hyperelliptic_fixture_basis(m: int, poly_coeffs=None) -> SectionBasis:
    """Monomial basis of H^0(mK) on a genus-2 curve y^2 = f(x), deg f = 6.

    For m = 3: x^j (dx/y)^3 (j = 0..3) and y (dx/y)^3; for m = 2 the three
    x^j (dx/y)^2.  Degree bookkeeping: at the two points over infinity the
    order of x^j y^e (dx/y)^m is m - j - 3e, and sections are regular at
    branch points for any j, e.
    """
    if m not in (2, 3):
        raise ValueError("fixture restricted to m in {2, 3}")
    if poly_coeffs is None:
        poly_coeffs = [1.0, 0, 0, 0, 0, 0, -1.0]  # x^6 - 1
    roots = np.roots(poly_coeffs)
    if len(roots) != 6:
        raise ValueError("f must have degree 6")
    for i in range(6):
        for j in range(i + 1, 6):
            if abs(roots[i] - roots[j]) < 1e-9:
                raise ValueError("f has (numerically) repeated roots")
    sections = []
    for j in range(m + 1):
        sec = HyperellipticSection(j, False, m)
        assert sec.order_at_infinity() >= 0
        sections.append(sec)
    y_sec = HyperellipticSection(0, True, m)
    if y_sec.order_at_infinity() >= 0:
        sections.append(y_sec)
    expected = dimension(2, m)
    assert len(sections) == expected
    return SectionBasis(sections, m, expected, "fixture")
