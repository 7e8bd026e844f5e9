"""Walk through the combinatorial and metric bookkeeping of a degenerating
genus-2 surface: pants graphs, collar widths, and the thick-thin split."""

import math

from stabledegen import collar_model as cm
from stabledegen import surface_model as sm


def main():
    print("== pants graphs ==")
    for g in (2, 3):
        graphs = sm.enumerate_pants_graphs(g)
        print(f"genus {g}: {len(graphs)} trivalent graphs on {2*g-2} vertices")
        for k, graph in enumerate(graphs):
            print(f"  graph {k}: edges {list(graph.edges)}")

    print("\n== collars around a shrinking curve ==")
    print(f"{'length':>10} {'halfwidth':>10} {'inj cut (eps=0.3)':>18}")
    for l in (1.0, 0.3, 0.1, 0.03, 0.01):
        w = sm.collar_halfwidth(l)
        cut = sm.injectivity_cut_width(l, 0.3) if l / 2 < 0.3 else float("nan")
        print(f"{l:10.3f} {w:10.3f} {cut:18.3f}")

    print("\n== thick-thin decomposition along a pinching path ==")
    cfg = sm.ThickThinConfig(epsilon=0.3)
    for scale in (1.0, 0.5, 0.1, 0.0):
        fn = sm.FNCoordinates((scale * 0.4, 1.5, scale * 0.2), (0.0, 0.2, 0.7))
        rep = sm.thick_thin_decompose(fn, cfg)
        print(f"lengths {fn.lengths}: short edges {rep.short_edges}, "
              f"thin volume {rep.thin_volume:.4f}")

    print("\n== wedge model of one collar ==")
    lam = 0.05
    chart = cm.annulus_chart_for(lam)
    core = math.sqrt(chart.r_inner * chart.r_outer)
    print(f"lam = {lam}: core geodesic length {cm.CollarChart(lam).core_length:.4f}")
    print(f"annulus chart |tau| in [{chart.r_inner:.3e}, {chart.r_outer:.3e}]")
    print(f"inj at core {cm.collar_injectivity_radius(core, lam):.4f} "
          f"(= pi*lam = {math.pi*lam:.4f})")
    theta = cm.thick_boundary_theta(lam, 0.3)
    print(f"eps = 0.3 boundary at theta = {theta:.4f}; thin area "
          f"{cm.thin_collar_volume_closed_form(lam, 0.3):.4f} "
          f"(quadrature {cm.thin_collar_volume(lam, 0.3):.4f})")


if __name__ == "__main__":
    main()
