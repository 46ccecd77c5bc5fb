"""Shared fixtures: the exact fixture weight alpha=0, lambda=1, t=2."""

from fractions import Fraction

import mpmath as mp
import pytest

from dlaguerre import PrecisionCtx, WeightParams, aux_from_recurrence, exact_recurrence


@pytest.fixture(scope="session")
def ctx():
    return PrecisionCtx(target_digits=40, guard_digits=20)


@pytest.fixture(scope="session")
def fixture_params():
    return WeightParams(0, 1, 2)


@pytest.fixture(scope="session")
def fixture_recur(fixture_params, ctx):
    return exact_recurrence(fixture_params, 4, ctx)


@pytest.fixture(scope="session")
def fixture_aux(fixture_recur):
    return aux_from_recurrence(fixture_recur)


def hp(v):
    """mpf at the active precision; Fractions and strings are converted exactly."""
    if isinstance(v, Fraction):
        return mp.mpf(v.numerator) / v.denominator
    return mp.mpf(v)


def close(a, b, digits):
    """|a - b| <= 10**-digits * max(1, |b|), evaluated at generous precision.

    Pass exact references as Fraction or decimal string so that they are
    not rounded at the ambient 15 digits.
    """
    with mp.workdps(digits + 30):
        a, b = hp(a), hp(b)
        return abs(a - b) <= mp.mpf(10) ** (-digits) * max(1, abs(b))
