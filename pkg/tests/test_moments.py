import itertools

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import close
from dlaguerre import (
    DataIntegrityError,
    DomainError,
    MomentTable,
    PrecisionCtx,
    Route,
    WeightParams,
    build_moment_table,
    moment_closed_form,
    moment_quadrature,
)
from dlaguerre.moments import (
    binomial_moment,
    contiguous_recurrence,
    moment_lambda_shifted,
    moment_t_derivative,
)

CTX = PrecisionCtx(30, 15)
FIX = WeightParams(0, 1, 2)


def test_params_domain():
    with pytest.raises(DomainError):
        WeightParams(-1, 0, 1)
    with pytest.raises(DomainError):
        WeightParams(0, 0, 0)
    p = WeightParams("0.5", 0, 1)
    assert p.lambda_is_zero and p.lambda_is_integer
    assert not WeightParams(0, "2.5", 1).lambda_is_integer


def test_params_json_roundtrip():
    p = WeightParams("1/3", "-0.5", "2")
    assert WeightParams.from_json(p.to_json()) == p


def test_classical_moment():
    assert close(moment_closed_form(3, WeightParams(0, 0, 5), CTX), 6, 30)


@pytest.mark.parametrize("j, v", [(0, 3), (1, 4), (2, 10), (3, 36)])
def test_fixture_moments(j, v):
    assert close(moment_closed_form(j, FIX, CTX), v, 30)


def test_quadrature_examples():
    assert close(moment_quadrature(0, WeightParams(0, 0, 1), CTX), 1, 30)
    assert close(moment_quadrature(1, FIX, CTX), 4, 30)
    p = WeightParams("0.5", "-0.5", 1)
    assert close(moment_quadrature(0, p, CTX), moment_closed_form(0, p, CTX), 30)


def test_lambda_shifted():
    assert close(moment_lambda_shifted(2, WeightParams(0, 1, 3), CTX), 2, 30)
    assert close(moment_t_derivative(0, FIX, CTX), 1, 30)
    # finite difference of mu_0 = t + 1
    h = mp.mpf("1e-10")
    with mp.workdps(50):
        fd = (moment_closed_form(0, FIX.with_t(2 + h), CTX) - moment_closed_form(0, FIX.with_t(2 - h), CTX)) / (2 * h)
    assert abs(fd - 1) < mp.mpf("1e-15")
    assert moment_t_derivative(4, WeightParams(1, 0, 2), CTX) == 0


def test_bad_index():
    with pytest.raises(DomainError):
        moment_closed_form(-1, FIX, CTX)
    with pytest.raises(DomainError):
        build_moment_table(0, FIX, CTX)


def test_table_fixture():
    t = build_moment_table(1, FIX, CTX)
    assert t.route is Route.cross_checked
    assert [float(m) for m in t.mu] == [3, 4, 10]
    assert t.cross_residual <= CTX.tolerance


def test_table_classical():
    t = build_moment_table(2, WeightParams(0, 0, 1), CTX)
    for m, v in zip(t.mu, [1, 1, 2, 6, 24]):
        assert close(m, v, 30)


def test_table_json_roundtrip():
    t = build_moment_table(3, WeightParams("0.5", "1.5", 1), CTX)
    text = t.to_json()
    back = MomentTable.from_json(text)
    assert back.mu == t.mu
    assert back.to_json() == text


def test_table_json_rejects_foreign():
    with pytest.raises(DataIntegrityError):
        MomentTable.from_json('{"schema_version": 99, "kind": "MomentTable"}')


def test_table_positivity_and_ratios():
    t = build_moment_table(8, WeightParams("-0.5", "2.5", "0.5"), CTX, cross_check=False)
    assert all(m > 0 for m in t.mu)
    with mp.workdps(t.work_digits):
        ratios = [t.mu[j + 1] / t.mu[j] for j in range(len(t.mu) - 1)]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_hankel_minors_positive():
    t = build_moment_table(5, WeightParams(1, "-0.5", 2), CTX, cross_check=False)
    with mp.workdps(t.work_digits):
        for n in range(1, 6):
            assert mp.det(mp.matrix([[t.mu[i + j] for j in range(n)] for i in range(n)])) > 0


def test_recurrence_matches_direct_high_j():
    p = WeightParams("0.5", "-0.5", 1)
    mu, loss = contiguous_recurrence(moment_closed_form(0, p, CTX.with_work(80)),
                                     moment_closed_form(1, p, CTX.with_work(80)), 41, p, 80)
    assert close(mu[40], moment_closed_form(40, p, CTX), 30)


def test_cross_check_detects_corruption(monkeypatch):
    import dlaguerre.moments as m

    real = m.moment_quadrature

    def bad(j, p, ctx, **kw):
        v = real(j, p, ctx, **kw)
        return v * (1 + mp.mpf("1e-10")) if j == 3 else v

    monkeypatch.setattr(m, "moment_quadrature", bad)
    with pytest.raises(DataIntegrityError, match="j=3"):
        m.build_moment_table(3, FIX, CTX)


@pytest.mark.slow
def test_route_agreement_grid_sample():
    """A corner sample of the full grid (the whole grid is an acceptance criterion)."""
    for a, lam, t in [("-0.5", "2.5", "0.5"), ("1", "-0.5", "2")]:
        p = WeightParams(a, lam, t)
        for j in (0, 7, 20):
            q = moment_quadrature(j, p, CTX)
            c = moment_closed_form(j, p, CTX)
            assert close(q, c, 30)


@pytest.mark.parametrize("lam", [1, 2, 3])
def test_binomial_oracle_all_j(lam):
    p = WeightParams("1.2", lam, "0.8")
    t = build_moment_table(4, p, CTX, cross_check=False)
    for j in range(9):
        assert close(t.mu[j], binomial_moment(j, p, CTX), 30)


@settings(max_examples=6, deadline=None)
@given(a=st.sampled_from(["-0.5", "0", "0.5", "1"]), lam=st.sampled_from(["-0.5", "0", "1", "2.5"]),
       t=st.sampled_from(["0.5", "1", "2"]))
def test_property_positive_increasing(a, lam, t):
    tab = build_moment_table(6, WeightParams(a, lam, t), PrecisionCtx(20, 10), cross_check=False)
    with mp.workdps(tab.work_digits):
        r = [tab.mu[j + 1] / tab.mu[j] for j in range(12)]
    assert all(m > 0 for m in tab.mu)
    assert all(y > x for x, y in itertools.pairwise(r))
