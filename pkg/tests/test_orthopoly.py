from fractions import Fraction as F

import mpmath as mp
import pytest

from conftest import close, hp
from dlaguerre import (
    DomainError,
    PrecisionCtx,
    RecurrenceTable,
    SemiaxisIntegrand,
    WeightParams,
    build_moment_table,
    exact_recurrence,
    gram_schmidt_oracle,
    hankel_ldl,
    integrate_semiaxis,
    polynomial,
    recurrence_coeffs,
)
from dlaguerre.orthopoly import eval_poly_derivs, hankel_work_digits, sub_leading

CTX = PrecisionCtx(30, 15)


def test_classical_hankel():
    t = build_moment_table(3, WeightParams(0, 0, 1), CTX, cross_check=False)
    fac = hankel_ldl(t, 3)
    for got, want in zip(fac.D, [1, 1, 1, 4]):
        assert close(got, want, 30)


def test_fixture_hankel(fixture_recur):
    r = fixture_recur
    assert r.D[0] == 1
    assert close(r.D[2], 14, 40)
    assert close(r.h[0], 3, 40)
    assert close(r.h[1], F(14, 3), 40)


def test_sub_leading_examples():
    t = build_moment_table(3, WeightParams(0, 1, 2), CTX, cross_check=False)
    assert sub_leading(t, 0) == 0
    assert close(sub_leading(t, 1), F(-4, 3), 30)
    assert close(sub_leading(t, 2), F(-34, 7), 30)


def test_fixture_recurrence(fixture_recur):
    r = fixture_recur
    assert close(r.alpha_rc[0], F(4, 3), 40)
    assert close(r.alpha_rc[1], F(74, 21), 40)
    assert close(r.beta[1], F(14, 9), 40)
    assert close(r.p_sub[2], F(-34, 7), 40)
    with mp.workdps(r.work_digits):
        for n in range(1, r.N + 1):
            assert close(r.beta[n], r.D[n + 1] * r.D[n - 1] / r.D[n] ** 2, r.certified_digits)


def test_polynomials(fixture_recur):
    r = fixture_recur
    with mp.workdps(r.work_digits):
        assert polynomial(r, 0).coeffs == (1,)
        P1 = polynomial(r, 1)
        assert close(P1.coeffs[0], F(-4, 3), 40)
        v, d1, d2 = eval_poly_derivs(P1, hp(F(4, 3)))
        assert abs(v) < mp.mpf(10) ** -40 and close(d1, 1, 40) and d2 == 0
        assert eval_poly_derivs(polynomial(r, 0), mp.mpf("3.7")) == (1, 0, 0)
        P2 = polynomial(r, 2)
        v, d1, d2 = eval_poly_derivs(P2, 0)
    # The bordered system gives q = -(10 + 4p)/3 = 22/7 (not 22/21).
    assert close(v, F(22, 7), 40)
    assert close(d1, F(-34, 7), 40)
    assert close(d2, 2, 40)
    # check P_2 is orthogonal to 1 and x under the fixture moments
    mu = [3, 4, 10, 36]
    q, p = F(22, 7), F(-34, 7)
    assert mu[2] + p * mu[1] + q * mu[0] == 0
    assert mu[3] + p * mu[2] + q * mu[1] == 0


def test_poly_sub_leading_matches_table(fixture_recur):
    r = fixture_recur
    with mp.workdps(r.work_digits):
        for n in range(1, r.N + 1):
            assert close(polynomial(r, n).coeffs[n - 1], r.p_sub[n], 40)


@pytest.mark.parametrize("alpha", ["-0.5", "0", "1.7"])
def test_lambda0_exact(alpha):
    r = exact_recurrence(WeightParams(alpha, 0, 1), 50, CTX)
    tol = r.tolerance
    with mp.workdps(r.work_digits):
        a = mp.mpf(alpha)
        for n in range(51):
            assert abs(r.alpha_rc[n] - (2 * n + a + 1)) <= tol * (2 * n + 2)
            assert abs(r.beta[n] - n * (n + a)) <= tol * max(1, n * n)


def test_gram_schmidt_fixture():
    t = build_moment_table(3, WeightParams(0, 1, 2), CTX.with_work(60), cross_check=False)
    g = gram_schmidt_oracle(t, 2)
    assert close(g.alpha_rc[0], F(4, 3), 40)
    assert close(g.beta[1], F(14, 9), 40)


def test_gram_schmidt_classical():
    t = build_moment_table(11, WeightParams(0, 0, 1), CTX.with_work(120), cross_check=False)
    g = gram_schmidt_oracle(t, 10)
    for n in range(11):
        assert close(g.alpha_rc[n], 2 * n + 1, 30)
        assert close(g.beta[n], n * n, 30)


@pytest.mark.parametrize("a, lam, t", [("0.5", "1.5", "1"), ("-0.5", "2.5", "0.5"), ("1", "-0.5", "2")])
def test_gram_schmidt_agrees(a, lam, t):
    p = WeightParams(a, lam, t)
    N = 8
    r = exact_recurrence(p, N, CTX)
    g = gram_schmidt_oracle(r.meta["moment_table"], N)
    for n in range(N + 1):
        assert close(g.alpha_rc[n], r.alpha_rc[n], r.certified_digits - 2)
        assert close(g.beta[n], r.beta[n], r.certified_digits - 2)
        assert close(g.D[n + 1], r.D[n + 1], r.certified_digits - 2)


def test_invariants_random(fixture_recur):
    r = exact_recurrence(WeightParams("0.3", "-0.7", "1.3"), 12, CTX)
    with mp.workdps(r.work_digits):
        acc = 0
        for n in range(1, 13):
            assert r.D[n] > 0 and r.h[n] > 0 and r.beta[n] > 0
            acc += r.alpha_rc[n - 1]
            assert abs(acc + r.p_sub[n]) <= r.tolerance * max(1, abs(r.p_sub[n])) * 10


def test_orthogonality_by_quadrature():
    p = WeightParams("0.5", "1.5", "1")
    r = exact_recurrence(p, 6, CTX)
    polys = [polynomial(r, n) for n in range(7)]
    qctx = PrecisionCtx(30, 15)
    with mp.workdps(r.work_digits):
        # int (P_n + P_k)^2 w = h_n + h_k exactly when the cross term vanishes;
        # the integrand stays positive, so relative quadrature error is meaningful
        for n in range(7):
            for k in range(n):
                f = SemiaxisIntegrand(p.a, g=lambda x, n=n, k=k: (polys[n](x) + polys[k](x)) ** 2 * (x + 1) ** p.l)
                v = integrate_semiaxis(f, qctx)
                assert abs(v - r.h[n] - r.h[k]) <= mp.mpf(10) ** -25 * r.h[n]
            f = SemiaxisIntegrand(p.a, g=lambda x, n=n: polys[n](x) ** 2 * (x + 1) ** p.l)
            assert abs(integrate_semiaxis(f, qctx) - r.h[n]) <= mp.mpf(10) ** -25 * r.h[n]


def test_certified_digits_reach_target():
    r = exact_recurrence(WeightParams(1, 2, "0.5"), 30, CTX)
    assert r.certified_digits >= CTX.target_digits
    assert r.work_digits >= hankel_work_digits(30, CTX)


def test_json_and_csv_roundtrip(fixture_recur):
    text = fixture_recur.to_json()
    back = RecurrenceTable.from_json(text)
    assert back.to_json() == text
    rows = fixture_recur.to_csv().splitlines()
    assert rows[0] == "n,D_n,h_n,beta_n,p_n,alpha_n"
    assert rows[1].split(",")[5].startswith("1.3333333333")


def test_domain_errors():
    t = build_moment_table(2, WeightParams(0, 1, 2), CTX, cross_check=False)
    with pytest.raises(DomainError):
        recurrence_coeffs(t, 2)
    with pytest.raises(DomainError):
        gram_schmidt_oracle(t, 5)
