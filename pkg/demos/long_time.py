"""Long-time (t -> infinity) expansions against the exact pipeline.

Every expansion is truncated after its t**-2 terms, so the residual should
fall like t**-3.  The constant term of ln D_n, C~(n), is a Barnes G ratio.

    python demos/long_time.py
"""

import mpmath as mp

from dlaguerre import PrecisionCtx, WeightParams, exact_recurrence, longtime_study
from dlaguerre.asymptotics import QUANTITIES, long_time_constant


def main():
    ctx = PrecisionCtx(target_digits=30)
    p = WeightParams(0, 1, 1)
    ts = [100, 1000, 10000]
    tables = {t: exact_recurrence(p.with_t(t), 3, ctx) for t in ts}
    print(f"alpha=0 lambda=1 n=2, t in {ts}")
    for q in QUANTITIES:
        rep = longtime_study(q, p, 2, ts, ctx, tables=tables)
        print(f"  {q:<8} slope {rep.slope:+.3f} (expected -3)")
    for n in (1, 2, 5):
        print(f"C~({n}) at alpha=1: {mp.nstr(mp.chop(long_time_constant(n, 1, ctx), mp.mpf(10) ** -25), 20)}")


if __name__ == "__main__":
    main()
