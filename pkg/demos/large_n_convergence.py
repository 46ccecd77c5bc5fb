"""Measure how fast the large-n expansions approach the exact values.

For each quantity the residual |exact - series| is fitted against n on a
log-log scale; the slope should match the exponent of the first term the
series leaves out.  Also fits the undetermined Hankel constants c2~, c0~.

    python demos/large_n_convergence.py
"""

import mpmath as mp

from dlaguerre import PrecisionCtx, WeightParams, exact_recurrence, fit_undetermined_constants, largen_study


def main():
    p = WeightParams("0.5", 1, 1)
    ctx = PrecisionCtx(target_digits=30)
    ns = [16, 32, 64, 128]
    rec = exact_recurrence(p, 129, ctx)
    print(f"alpha=0.5 lambda=1 t=1, n in {ns}")
    for q in ("alpha_n", "beta_n", "p_n", "H_n"):
        rep = largen_study(q, p, ns, ctx, recur=rec)
        print(f"  {q:<8} slope {rep.slope:+.3f}  expected {float(rep.expected):+.2f}  pass={rep.passed}")

    with mp.workdps(rec.work_digits):
        data = {n: mp.log(rec.D[n]) for n in range(32, 130)}
    fit = fit_undetermined_constants("lnD_n", data, p, digits=rec.work_digits)
    print("fitted Hankel constants (", fit.tag, "):")
    for k, v in fit.constants.items():
        print(f"  {k} = {mp.nstr(v, 15)} +- {mp.nstr(fit.errors[k], 2)}")
    print(f"  post-fit residual slope {fit.post_fit_slope:+.2f}")


if __name__ == "__main__":
    main()
