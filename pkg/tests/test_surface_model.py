import itertools
import math
import random

import pytest

from stabledegen import surface_model as sm


# ---------------------------------------------------------------------------
# pants graphs
# ---------------------------------------------------------------------------


def brute_force_trivalent_multigraphs(g):
    """Independent enumeration: all connected trivalent multigraphs on 2g-2
    vertices with 3g-3 edges, deduplicated by explicit isomorphism search."""
    nv, ne = 2 * g - 2, 3 * g - 3
    pairs = [(i, j) for i in range(nv) for j in range(i, nv)]
    reps = []
    for combo in itertools.combinations_with_replacement(pairs, ne):
        deg = [0] * nv
        for a, b in combo:
            deg[a] += 2 if a == b else 1
            if a != b:
                deg[b] += 1
        if deg != [3] * nv:
            continue
        graph = sm.PantsGraph.from_edges(g, combo)
        if sm.validate_pants_graph(graph):
            continue
        if not any(_isomorphic(combo, r, nv) for r in reps):
            reps.append(tuple(sorted(combo)))
    return reps


def _isomorphic(edges_a, edges_b, nv):
    sa = tuple(sorted(edges_a))
    for perm in itertools.permutations(range(nv)):
        relab = tuple(
            sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edges_b)
        )
        if relab == sa:
            return True
    return False


def test_genus2_graph_count():
    graphs = sm.enumerate_pants_graphs(2)
    assert len(graphs) == 2
    for graph in graphs:
        assert sm.validate_pants_graph(graph) == []
        assert len(graph.edges) == 3
        assert len(graph.vertices) == 2


def test_genus3_enumeration_matches_brute_force():
    graphs = sm.enumerate_pants_graphs(3)
    oracle = brute_force_trivalent_multigraphs(3)
    assert len(graphs) == len(oracle)
    # every enumerated graph is isomorphic to exactly one oracle class
    for graph in graphs:
        hits = sum(_isomorphic(graph.edges, r, 4) for r in oracle)
        assert hits == 1


def test_graph_validation_catches_defects():
    ok = sm.PantsGraph.from_edges(2, [(0, 1), (0, 1), (0, 1)])
    assert sm.validate_pants_graph(ok) == []
    bad_count = sm.PantsGraph(2, (0, 1), ((0, 1), (0, 1)))
    assert "edge count != 3g-3" in sm.validate_pants_graph(bad_count)
    disconnected = sm.PantsGraph(3, (0, 1, 2, 3),
                                 ((0, 0), (0, 1), (1, 1), (2, 3), (2, 3), (2, 3)))
    assert any("incidence" in v or "disconnected" in v
               for v in sm.validate_pants_graph(disconnected))
    with pytest.raises(ValueError):
        sm.require_valid_pants_graph(bad_count)


def test_graph_dict_round_trip():
    graph = sm.enumerate_pants_graphs(2)[1]
    assert sm.PantsGraph.from_dict(graph.to_dict()) == graph


# ---------------------------------------------------------------------------
# hyperbolic trigonometry
# ---------------------------------------------------------------------------


def test_collar_halfwidth_identity():
    rng = random.Random(7)
    for _ in range(1000):
        l = math.exp(rng.uniform(math.log(1e-4), math.log(8.0)))
        w = sm.collar_halfwidth(l)
        assert abs(math.sinh(w) * math.sinh(l / 2.0) - 1.0) < 1e-12


def test_seam_lengths_hexagon_identity():
    # verify each seam against the right-angled hexagon cosh rule directly
    l = (0.9, 1.7, 2.4)
    seams = sm.pants_seam_lengths(*l)
    h = [x / 2 for x in l]
    for k, s in enumerate(seams):
        i, j = (k + 1) % 3, (k + 2) % 3
        lhs = math.cosh(s) * math.sinh(h[i]) * math.sinh(h[j])
        rhs = math.cosh(h[i]) * math.cosh(h[j]) + math.cosh(h[k])
        assert abs(lhs - rhs) < 1e-12
    # symmetry: equal cuffs give equal seams
    s_eq = sm.pants_seam_lengths(1.3, 1.3, 1.3)
    assert max(s_eq) - min(s_eq) < 1e-14


def test_injectivity_cut_width():
    l, eps = 0.1, 0.3
    d = sm.injectivity_cut_width(l, eps)
    # loop at distance d has length l cosh(d) = 2 eps
    assert abs(l * math.cosh(d) - 2 * eps) < 1e-12
    with pytest.raises(ValueError):
        sm.injectivity_cut_width(0.8, 0.3)


# ---------------------------------------------------------------------------
# thick-thin bookkeeping
# ---------------------------------------------------------------------------


def test_thick_thin_short_count_bounded():
    rng = random.Random(3)
    cfg = sm.ThickThinConfig(epsilon=0.3)
    for g in (2, 3):
        n = 3 * g - 3
        for _ in range(50):
            lengths = tuple(rng.uniform(0.0, 2.0) for _ in range(n))
            fn = sm.FNCoordinates(lengths, tuple(0.0 for _ in range(n)))
            rep = sm.thick_thin_decompose(fn, cfg)
            assert len(rep.short_edges) <= n
            assert all(lengths[j] / 2 < cfg.epsilon for j in rep.short_edges)
            assert rep.thin_volume >= 0.0


def test_thick_thin_node_edge():
    fn = sm.FNCoordinates((0.0, 1.5, 0.1), (0.0, 0.0, 0.0))
    rep = sm.thick_thin_decompose(fn, sm.ThickThinConfig(epsilon=0.3))
    assert rep.short_edges == [0, 2]
    kinds = {p["edge"]: p["kind"] for p in rep.collar_params}
    assert kinds == {0: "cusp", 2: "collar"}


def test_fn_validation():
    with pytest.raises(ValueError):
        sm.FNCoordinates((1.0, -0.1), (0.0, 0.0))
    with pytest.raises(ValueError):
        sm.FNCoordinates((1.0,), (0.0, 0.0))
    with pytest.raises(ValueError):
        sm.FNCoordinates((30.0,), (0.0,), bers_bound=26.0, bers_normalized=True)


def test_paper_volume_normalizations():
    assert sm.paper_volume(2) == 2.0
    assert abs(sm.paper_volume(3, "curvature") - 8 * math.pi) < 1e-14
    with pytest.raises(ValueError):
        sm.paper_volume(1)
