"""Walk through the exact fixture alpha = 0, lambda = 1, t = 2.

The weight is x**0 e**-x (x + 2), so every quantity is rational and can be
read off by eye: mu_j = (j+1)! + 2 j!, D_2 = 14, alpha_0 = 4/3, ...

    python demos/fixture_walkthrough.py
"""

import mpmath as mp

from dlaguerre import (
    PrecisionCtx,
    WeightParams,
    aux_from_recurrence,
    exact_recurrence,
    polynomial,
)


def main():
    ctx = PrecisionCtx(target_digits=40)
    p = WeightParams(alpha=0, lam=1, t=2)
    rec = exact_recurrence(p, 3, ctx)
    aux = aux_from_recurrence(rec)
    mu = rec.meta["moment_table"].mu
    with mp.workdps(rec.work_digits):
        print(f"certified digits: {rec.certified_digits} (working {rec.work_digits})")
        print("moments     :", [mp.nstr(m, 20) for m in mu[:4]], "  expect [3, 4, 10, 36]")
        print("D_n         :", [mp.nstr(d, 20) for d in rec.D], "  expect D_2 = 14")
        print("alpha_n     :", [mp.identify(a) or mp.nstr(a, 20) for a in rec.alpha_rc[:2]], "  expect 4/3, 74/21")
        print("beta_1      :", mp.identify(rec.beta[1]), "  expect 14/9")
        print("p(2, t)     :", mp.identify(rec.p_sub[2]), "  expect -34/7")
        print("P_2 coeffs  :", [mp.identify(c) for c in polynomial(rec, 2).coeffs], "  (constant term 22/7)")
        print("R_0, R_1    :", mp.identify(aux.R[0]), mp.identify(aux.R[1]))
        print("r_1, H_1    :", mp.identify(aux.r[1]), mp.identify(aux.H[1]))


if __name__ == "__main__":
    main()
