"""Check the ladder-operator identities for one parameter point.

Algebraic identities (compatibility conditions, discrete system, ODE) are
exact up to rounding; the t-derivative ones (Toda system, sigma-form) are
checked with 6th-order central differences and compared against their
Richardson error bound.

    python demos/identity_check.py [alpha lambda t]
"""

import sys

import mpmath as mp

from dlaguerre import PrecisionCtx, WeightParams, build_t_grid, identity_suite, verify_painleve_v


def main(argv):
    a, lam, t = argv[1:4] if len(argv) >= 4 else ("0.5", "1.5", "1")
    p = WeightParams(a, lam, t)
    ctx = PrecisionCtx(target_digits=40)
    grid = build_t_grid(p, 6, ctx)
    reps = identity_suite(grid.tables[0], grid.aux[0], grid)
    if not p.lambda_is_zero:
        for n in (1, 2):
            rep = verify_painleve_v(grid, n)
            rep.identity = f"painleve_v[n={n}]"
            reps.append(rep)
    print(f"alpha={a} lambda={lam} t={t}: certified digits {grid.certified_digits}, FD step {mp.nstr(grid.step, 3)}")
    print(f"{'identity':<18}{'max residual':>14}{'tolerance':>14}  pass")
    for r in reps:
        print(f"{r.identity:<18}{mp.nstr(r.max_residual, 3):>14}{mp.nstr(r.tolerance, 3):>14}  {r.passed}")
    return 0 if all(r.passed for r in reps) else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv))
