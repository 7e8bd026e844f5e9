"""Push the smoothing parameter deep enough that the neck actually crosses
into the epsilon-thin part.

The plumbing annulus at parameter t has core injectivity radius pi^2 / L
with L = ln(R^2/|t|), so it only becomes epsilon-thin once
|t| < R^2 exp(-pi^2/epsilon).  For epsilon = 0.3 that is ~5e-15, beyond
what float64 mode moments (~e^{2KL}) survive; with the cutoff pushed to
epsilon = 0.49 the threshold moves to ~2e-9 and the whole regime is
computable.  Watch three things switch on together at t ~ 1e-9:

  * the eps/2-to-eps norm ratio lifts off 1 (the eps-thick part starts
    excising neck mass that the eps/2-thick part keeps),
  * the Gram condition number stops growing (the excised neck is what
    made the unbounded directions grow like L^{2m-1}),
  * the aligned increments between consecutive clouds contract.
"""

import math

from stabledegen import bergman as bg
from stabledegen import degeneration as dg
from stabledegen import differentials as di


def main():
    model = di.two_self_node_sphere()
    eps = 0.49
    cfg = bg.EpsilonProductConfig(epsilon=eps)
    threshold = math.exp(-math.pi**2 / eps)
    print(f"epsilon = {eps}: neck enters the thin part below "
          f"|t| = R^2 e^(-pi^2/eps) = {threshold:.2e}")

    schedule = tuple(10.0 ** (-k) for k in range(7, 13))
    spec = dg.FamilySpec(model, schedule, m=3, product=cfg)
    report = dg.run_family(spec)

    print(f"\n{'t':>8} {'core inj':>9} {'gram cond':>11} {'max ratio':>10} "
          f"{'aligned inc':>12}")
    for i, row in enumerate(report.summary_rows()):
        t = row["t"].real
        inj = math.pi**2 / math.log(1.0 / t)
        marker = "  <- thin" if t < threshold else ""
        print(f"{t:8.0e} {inj:9.4f} {row['gram_condition']:11.3e} "
              f"{row['max_ratio']:10.6f} {row['aligned_distance']:12.3e}"
              f"{marker}")
    print(f"\nflags: {report.flags}")


if __name__ == "__main__":
    main()
