"""Pants graphs, Fenchel-Nielsen coordinates, and thick-thin bookkeeping.

A genus-g surface (g >= 2) decomposes along 3g-3 disjoint geodesics into
2g-2 pairs of pants; the combinatorics is a trivalent multigraph, the
geometry a length and a twist per cut curve.  Everything in this module is
pure trigonometry and graph bookkeeping: no complex analysis lives here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

__all__ = [
    "PantsGraph",
    "FNCoordinates",
    "ThickThinConfig",
    "ThickThinReport",
    "validate_pants_graph",
    "require_valid_pants_graph",
    "enumerate_pants_graphs",
    "pants_seam_lengths",
    "collar_halfwidth",
    "injectivity_cut_width",
    "thick_thin_decompose",
    "paper_volume",
]

Edge = tuple[int, int]


def _normalize_edge(e) -> Edge:
    a, b = int(e[0]), int(e[1])
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class PantsGraph:
    """Trivalent multigraph of a pants decomposition.

    Vertices are pairs of pants, edges the 3g-3 cut curves; self-loops are
    allowed and count twice toward incidence.
    """

    genus: int
    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]

    @staticmethod
    def from_edges(genus: int, edges) -> "PantsGraph":
        """Build a graph on the standard vertex set 0..2g-3."""
        norm = tuple(sorted(_normalize_edge(e) for e in edges))
        return PantsGraph(genus=genus, vertices=tuple(range(2 * genus - 2)), edges=norm)

    def incidence(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b in self.edges)

    def to_dict(self) -> dict:
        return {"genus": self.genus, "edges": [list(e) for e in self.edges]}

    @staticmethod
    def from_dict(d: dict) -> "PantsGraph":
        return PantsGraph.from_edges(int(d["genus"]), d["edges"])


@dataclass(frozen=True)
class FNCoordinates:
    """Fenchel-Nielsen data: a length l_j >= 0 and a twist fraction per edge.

    A zero length marks a node.  ``bers_bound`` is the configured Bers
    constant C(g), which has no sharp known value; it is carried as a
    configurable bound and never computed.
    """

    lengths: tuple[float, ...]
    twists: tuple[float, ...]
    bers_bound: float = 26.0
    bers_normalized: bool = False

    def __post_init__(self):
        if len(self.lengths) != len(self.twists):
            raise ValueError("lengths and twists must have equal length")
        if any(l < 0 for l in self.lengths):
            raise ValueError("FN lengths must be nonnegative")
        if self.bers_bound <= 0:
            raise ValueError("bers_bound must be positive")
        if self.bers_normalized and any(l > self.bers_bound for l in self.lengths):
            raise ValueError("bers-normalized coordinates exceed bers_bound")

    def to_dict(self) -> dict:
        return {"lengths": list(self.lengths), "twists": list(self.twists)}


@dataclass(frozen=True)
class ThickThinConfig:
    """Injectivity-radius cutoff for the thick-thin decomposition."""

    epsilon: float
    margulis_cap: float = 0.5

    def __post_init__(self):
        if not 0 < self.epsilon < self.margulis_cap:
            raise ValueError("require 0 < epsilon < margulis_cap")


@dataclass
class ThickThinReport:
    """Short edges, their collar data, and the total thin volume."""

    short_edges: list[int]
    collar_params: list[dict]
    thin_volume: float


def validate_pants_graph(graph: PantsGraph) -> list[str]:
    """Return the list of violated invariants (empty means accept)."""
    g = graph.genus
    violations = []
    if g < 2:
        violations.append("genus must be >= 2")
        return violations
    if len(graph.vertices) != 2 * g - 2:
        violations.append("vertex count != 2g-2")
    if len(graph.edges) != 3 * g - 3:
        violations.append("edge count != 3g-3")
    vset = set(graph.vertices)
    if any(a not in vset or b not in vset for a, b in graph.edges):
        violations.append("edge endpoint outside vertex set")
        return violations
    for v in graph.vertices:
        if graph.incidence(v) != 3:
            violations.append("vertex incidence != 3")
            break
    if graph.vertices and not _connected(graph):
        violations.append("graph is disconnected")
    return violations


def require_valid_pants_graph(graph: PantsGraph) -> None:
    violations = validate_pants_graph(graph)
    if violations:
        raise ValueError("invalid pants graph: " + "; ".join(violations))


def _connected(graph: PantsGraph) -> bool:
    adj: dict[int, set[int]] = {v: set() for v in graph.vertices}
    for a, b in graph.edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {graph.vertices[0]}
    stack = [graph.vertices[0]]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(graph.vertices)


def _canonical_form(nv: int, edges: tuple[Edge, ...]) -> tuple[Edge, ...]:
    best = None
    for perm in itertools.permutations(range(nv)):
        relab = tuple(sorted(_normalize_edge((perm[a], perm[b])) for a, b in edges))
        if best is None or relab < best:
            best = relab
    return best


def enumerate_pants_graphs(g: int) -> list[PantsGraph]:
    """All trivalent pants graphs of genus g, up to isomorphism.

    Exhaustive enumeration with canonical-labeling dedup; supported for
    2 <= g <= 4 (desk scale).
    """
    if not 2 <= g <= 4:
        raise ValueError("enumerate_pants_graphs supports 2 <= g <= 4")
    nv = 2 * g - 2
    ne = 3 * g - 3
    pairs = [(i, j) for i in range(nv) for j in range(i, nv)]
    found: set[tuple[Edge, ...]] = set()

    def rec(pair_idx: int, deg: list[int], remaining: int, chosen: list[Edge]):
        if remaining == 0:
            if all(d == 3 for d in deg):
                cand = tuple(sorted(chosen))
                graph = PantsGraph.from_edges(g, cand)
                if not validate_pants_graph(graph):
                    found.add(_canonical_form(nv, cand))
            return
        if pair_idx == len(pairs):
            return
        a, b = pairs[pair_idx]
        cost = 2 if a == b else 1
        max_mult = min((3 - deg[a]) // cost if a == b else 3 - deg[a], 3 - deg[b])
        max_mult = min(max_mult, remaining)
        for mult in range(max_mult, -1, -1):
            deg[a] += cost * mult if a == b else mult
            if a != b:
                deg[b] += mult
            for _ in range(mult):
                chosen.append((a, b))
            rec(pair_idx + 1, deg, remaining - mult, chosen)
            for _ in range(mult):
                chosen.pop()
            deg[a] -= cost * mult if a == b else mult
            if a != b:
                deg[b] -= mult
        return

    rec(0, [0] * nv, ne, [])
    return [PantsGraph.from_edges(g, edges) for edges in sorted(found)]


def pants_seam_lengths(l1: float, l2: float, l3: float) -> tuple[float, float, float]:
    """Seam lengths (orthogeodesics between cuff pairs) of a hyperbolic pair of pants.

    Right-angled hexagon trigonometry: the seam opposite cuff k satisfies
    cosh(s_k) = (cosh(l_i/2) cosh(l_j/2) + cosh(l_k/2)) / (sinh(l_i/2) sinh(l_j/2)).
    Returned in the order (s_1, s_2, s_3) where s_k separates cuffs i and j.
    """
    cuffs = (l1, l2, l3)
    if any(l <= 0 for l in cuffs):
        raise ValueError("cuff lengths must be positive")
    h = [l / 2.0 for l in cuffs]
    seams = []
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        c = (math.cosh(h[i]) * math.cosh(h[j]) + math.cosh(h[k])) / (
            math.sinh(h[i]) * math.sinh(h[j])
        )
        seams.append(math.acosh(c))
    return tuple(seams)


def collar_halfwidth(l: float) -> float:
    """Embedded collar half-width around a geodesic of length l.

    Collar lemma closed form: sinh(w) sinh(l/2) = 1.
    """
    if l <= 0:
        raise ValueError("geodesic length must be positive")
    return math.asinh(1.0 / math.sinh(l / 2.0))


def injectivity_cut_width(l: float, epsilon: float) -> float:
    """Distance from a short geodesic at which the injectivity radius reaches epsilon.

    A loop freely homotopic to the core at distance d has length l cosh(d),
    so inj = epsilon at cosh(d) = 2 epsilon / l.  Requires l/2 < epsilon.
    """
    if l <= 0:
        raise ValueError("geodesic length must be positive")
    if l / 2.0 >= epsilon:
        raise ValueError("geodesic is not short for this epsilon")
    return math.acosh(2.0 * epsilon / l)


def thick_thin_decompose(fn: FNCoordinates, cfg: ThickThinConfig) -> ThickThinReport:
    """Short-curve report for FN data: which edges are thin and how much area they hold.

    An edge is short when its core injectivity radius l/2 drops below the
    cutoff.  Collar volume uses the 1D closed form 2 l sinh(w) with
    w = min(collar halfwidth, inj=epsilon level); a zero length is a node
    and contributes the cusp-pair limit 4 epsilon.
    """
    short: list[int] = []
    params: list[dict] = []
    total = 0.0
    for j, l in enumerate(fn.lengths):
        if l / 2.0 >= cfg.epsilon:
            continue
        short.append(j)
        if l == 0.0:
            total += 4.0 * cfg.epsilon
            params.append({"edge": j, "kind": "cusp", "lam": 0.0, "width": math.inf})
            continue
        w_collar = collar_halfwidth(l)
        w_eps = injectivity_cut_width(l, cfg.epsilon)
        w = min(w_collar, w_eps)
        total += 2.0 * l * math.sinh(w)
        params.append(
            {
                "edge": j,
                "kind": "collar",
                "lam": l / (2.0 * math.pi),
                "width": w,
                "halfwidth": w_collar,
                "width_at_eps": w_eps,
            }
        )
    return ThickThinReport(short_edges=short, collar_params=params, thin_volume=total)


def paper_volume(g: int, normalization: str = "paper") -> float:
    """Hyperbolic volume of a genus-g surface in either normalization.

    "paper" returns 2g-2; "curvature" returns the Gauss-Bonnet value
    2 pi (2g-2) for curvature -1.  The two differ by the constant 2 pi.
    """
    if g < 2:
        raise ValueError("genus must be >= 2")
    base = 2.0 * g - 2.0
    if normalization == "paper":
        return base
    if normalization == "curvature":
        return 2.0 * math.pi * base
    raise ValueError("normalization must be 'paper' or 'curvature'")
