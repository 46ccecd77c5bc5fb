"""Coulomb-fluid quantities, large-n and long-time expansions, slope checks.

Every expansion is returned as a :class:`SeriesEval`: a ledger of terms,
each tagged with its order (power of n or t, plus a power of a logarithm),
so that any truncation can be formed and its residual against the exact
pipeline measured by :func:`convergence_order`.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

from .errors import DomainError
from .moments import WeightParams
from .orthopoly import RecurrenceTable, exact_recurrence
from .special import PrecisionCtx, log_barnes_g, log_gamma, zeta_prime_minus1

DEFAULT_DIGITS = 50

QUANTITIES = ("alpha_n", "beta_n", "p_n", "H_n", "lnD_n", "lnh_n")
FLUID_QUANTITIES = ("b", "b_half", "b_quarter_sq", "A", "F")

_ALIASES = {
    "alpha": "alpha_n",
    "beta": "beta_n",
    "p": "p_n",
    "H": "H_n",
    "lnD": "lnD_n",
    "ln D_n": "lnD_n",
    "ln h_n": "lnh_n",
    "ln_h_n": "lnh_n",
    "lnh": "lnh_n",
}

# printed remainder exponents
LARGE_N_REMAINDER = {
    "alpha_n": Fraction(-5, 2),
    "beta_n": Fraction(-3, 2),
    "p_n": Fraction(-3, 2),
    "H_n": Fraction(-3, 2),
    "lnD_n": Fraction(-3, 2),
    "lnh_n": Fraction(-3, 2),
    "b": Fraction(-7, 2),
    "b_half": Fraction(-7, 2),
    "b_quarter_sq": Fraction(-5, 2),
    "A": Fraction(-5, 2),
    "F": Fraction(-3, 2),
}
LONG_TIME_REMAINDER = Fraction(-3)


def canonical_quantity(q: str) -> str:
    q = _ALIASES.get(q, q)
    if q not in QUANTITIES and q not in FLUID_QUANTITIES:
        raise DomainError(f"unknown quantity {q!r}; expected one of {QUANTITIES + FLUID_QUANTITIES}")
    return q


@dataclass(frozen=True)
class SeriesTerm:
    """value = coeff * scale**exponent * ln(scale)**log_power."""

    label: str
    exponent: Fraction
    log_power: int
    value: object
    undetermined: bool = False


@dataclass(frozen=True)
class SeriesEval:
    """A truncated asymptotic series with its term ledger."""

    quantity: str
    regime: str
    scale: object
    params: WeightParams
    terms: tuple
    remainder_exponent: Fraction
    undetermined: tuple = ()
    exploratory: bool = False
    tags: tuple = ()

    @property
    def total(self):
        return mp.fsum(t.value for t in self.terms)

    def truncated(self, remainder_exponent) -> "SeriesEval":
        """Keep only terms of order strictly above ``remainder_exponent``."""
        r = Fraction(remainder_exponent)
        if r < self.remainder_exponent:
            raise DomainError(
                f"{self.quantity}: terms below order {self.remainder_exponent} are not implemented"
            )
        kept = tuple(t for t in self.terms if t.exponent > r)
        und = tuple(u for u in self.undetermined if any(t.label == u for t in kept))
        return SeriesEval(self.quantity, self.regime, self.scale, self.params, kept, r, und,
                          self.exploratory, self.tags)

    def ledger(self) -> list:
        return [(t.label, str(t.exponent), t.log_power, t.value, t.undetermined) for t in self.terms]

    def orders(self) -> list:
        """Distinct kept exponents, highest first."""
        return sorted({t.exponent for t in self.terms}, reverse=True)


def _series(quantity, regime, scale, p, spec, remainder, order, undetermined=(), tags=(), exploratory=False):
    terms = tuple(SeriesTerm(lbl, Fraction(e), lp, v, lbl in undetermined) for lbl, e, lp, v in spec)
    s = SeriesEval(quantity, regime, scale, p, terms, Fraction(remainder), tuple(undetermined),
                   exploratory, tuple(tags))
    return s if order is None else s.truncated(order)


def _mpf_params(p: WeightParams):
    return p.a, p.l, p.tt


# --------------------------------------------------------------------------
# Coulomb fluid


@dataclass(frozen=True)
class FluidQuantities:
    n: int
    params: WeightParams
    b: object
    A: object
    F: SeriesEval


def _check_fluid(n, p: WeightParams, exploratory: bool):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if p.a < 0 and not exploratory:
        raise DomainError("the Coulomb-fluid regime needs alpha >= 0 (pass exploratory=True to override)")


def _endpoint_residual(b, n, a, lam, t):
    return b - 2 * a - 2 * lam + 2 * lam * mp.sqrt(t / (b + t)) - 4 * n


def fluid_endpoint(n: int, p: WeightParams, ctx: PrecisionCtx, exploratory: bool = False):
    """Positive root b of b - 2a - 2l + 2l sqrt(t/(b+t)) = 4n.

    Newton from 4n+2a+2l, safeguarded by the bracket [0, 4n+2a+4|l|+1]
    (any Newton step leaving the bracket is replaced by bisection).
    """
    _check_fluid(n, p, exploratory)
    with mp.workdps(ctx.work_digits + 10):
        a, lam, t = _mpf_params(p)
        lo, hi = mp.mpf(0), 4 * n + 2 * a + 4 * abs(lam) + 1
        f_lo, f_hi = _endpoint_residual(lo, n, a, lam, t), _endpoint_residual(hi, n, a, lam, t)
        if f_lo * f_hi > 0:
            raise DomainError("fluid endpoint: no sign change on the bracket")
        b = min(max(4 * n + 2 * a + 2 * lam, lo), hi)
        tol = mp.mpf(10) ** (-(ctx.work_digits + 5))
        for _ in range(20 * ctx.work_digits):
            f = _endpoint_residual(b, n, a, lam, t)
            if abs(f) <= tol:
                break
            if (f < 0) == (f_lo < 0):
                lo = b
            else:
                hi = b
            df = 1 - lam * mp.sqrt(t) / (b + t) ** mp.mpf(1.5)
            nb = b - f / df if df != 0 else (lo + hi) / 2
            if not (lo < nb < hi):
                nb = (lo + hi) / 2
            if nb == b:
                break
            b = nb
    with mp.workdps(ctx.work_digits):
        return +b


def fluid_endpoint_series(n, p: WeightParams, order=None, which: str = "b", digits: int = DEFAULT_DIGITS) -> SeriesEval:
    """Large-n series for b, b/2 (``b_half``) or (b/4)^2 (``b_quarter_sq``).

    The last printed b/2 term is lambda^2 t [t+2(a+l)] / (32 n^3), half the
    matching b coefficient.
    """
    with mp.workdps(digits):
        a, lam, t = _mpf_params(p)
        st, N = mp.sqrt(t), mp.mpf(n)
        s, sq = a + lam, mp.sqrt(N)
        if which in ("b", "b_half"):
            k = 1 if which == "b" else mp.mpf(1) / 2
            spec = [
                ("4n", 1, 0, k * 4 * N),
                ("2(a+l)", 0, 0, k * 2 * s),
                ("n^-1/2", Fraction(-1, 2), 0, -k * lam * st / sq),
                ("n^-3/2", Fraction(-3, 2), 0, k * lam * st * (t + 2 * s) / (8 * N * sq)),
                ("n^-2", -2, 0, -k * lam**2 * t / (8 * N**2)),
                ("n^-5/2", Fraction(-5, 2), 0, -k * 3 * lam * st * (t + 2 * s) ** 2 / (128 * N**2 * sq)),
                ("n^-3", -3, 0, k * lam**2 * t * (t + 2 * s) / (16 * N**3)),
            ]
        elif which == "b_quarter_sq":
            spec = [
                ("n^2", 2, 0, N**2),
                ("n", 1, 0, N * s),
                ("n^1/2", Fraction(1, 2), 0, -lam * st * sq / 2),
                ("const", 0, 0, s**2 / 4),
                ("n^-1/2", Fraction(-1, 2), 0, lam * st * (t - 2 * s) / (16 * sq)),
                ("n^-3/2", Fraction(-3, 2), 0, -lam * st * (3 * t**2 + 4 * t * s - 4 * s**2) / (256 * N * sq)),
                ("n^-2", -2, 0, lam**2 * t**2 / (64 * N**2)),
            ]
        else:
            raise DomainError(f"unknown endpoint series {which!r}")
        return _series(which, "large_n", n, p, spec, LARGE_N_REMAINDER[which], order,
                       exploratory=p.a < 0)


def lagrange_multiplier(n: int, p: WeightParams, ctx: PrecisionCtx, exploratory: bool = False):
    """A = b/2 - (2n+a) ln(b/4) - l ln(t/4) - 2l ln(sqrt((b+t)/t) + 1) at the solved b."""
    b = fluid_endpoint(n, p, ctx, exploratory)
    with mp.workdps(ctx.work_digits + 5):
        a, lam, t = _mpf_params(p)
        val = b / 2 - (2 * n + a) * mp.log(b / 4)
        if lam != 0:
            val -= lam * mp.log(t / 4) + 2 * lam * mp.log(mp.sqrt((b + t) / t) + 1)
    with mp.workdps(ctx.work_digits):
        return +val


def lagrange_multiplier_series(n, p: WeightParams, order=None, digits: int = DEFAULT_DIGITS) -> SeriesEval:
    with mp.workdps(digits):
        a, lam, t = _mpf_params(p)
        st, N = mp.sqrt(t), mp.mpf(n)
        s, sq, ln = a + lam, mp.sqrt(N), mp.log(N)
        spec = [
            ("-2n ln n", 1, 1, -2 * N * ln),
            ("2n", 1, 0, 2 * N),
            ("-(a+l) ln n", 0, 1, -s * ln),
            ("n^-1/2", Fraction(-1, 2), 0, -lam * st / sq),
            ("n^-1", -1, 0, -(s**2) / (4 * N)),
            ("n^-3/2", Fraction(-3, 2), 0, lam * st * (6 * s + t) / (24 * N * sq)),
            ("n^-2", -2, 0, (2 * a**3 + 6 * a**2 * lam + 3 * (2 * a - t) * lam**2 + 2 * lam**3) / (48 * N**2)),
        ]
        return _series("A", "large_n", n, p, spec, LARGE_N_REMAINDER["A"], order, exploratory=p.a < 0)


def free_energy_series(n, p: WeightParams, order=None, digits: int = DEFAULT_DIGITS) -> SeriesEval:
    """Free-energy series; the constant C is carried as an undetermined 0."""
    with mp.workdps(digits):
        a, lam, t = _mpf_params(p)
        st, N = mp.sqrt(t), mp.mpf(n)
        s, sq, ln = a + lam, mp.sqrt(N), mp.log(N)
        spec = [
            ("-n^2 ln n", 2, 1, -(N**2) * ln),
            ("3n^2/2", 2, 0, 3 * N**2 / 2),
            ("-(a+l) n ln n", 1, 1, -s * N * ln),
            ("(a+l) n", 1, 0, s * N),
            ("n^1/2", Fraction(1, 2), 0, -2 * lam * st * sq),
            ("ln n", 0, 1, -(s**2) * ln / 4),
            ("C", 0, 0, mp.mpf(0)),
            ("n^-1/2", Fraction(-1, 2), 0, -lam * st * (6 * s + t) / (12 * sq)),
            ("n^-1", -1, 0, -(2 * a**3 + 6 * a**2 * lam + 3 * (2 * a - t) * lam**2 + 2 * lam**3) / (48 * N)),
        ]
        return _series("F", "large_n", n, p, spec, LARGE_N_REMAINDER["F"], order, undetermined=("C",),
                       exploratory=p.a < 0)


def fluid_quantities(n: int, p: WeightParams, ctx: PrecisionCtx, exploratory: bool = False) -> FluidQuantities:
    return FluidQuantities(n, p, fluid_endpoint(n, p, ctx, exploratory),
                           lagrange_multiplier(n, p, ctx, exploratory),
                           free_energy_series(n, p, digits=ctx.work_digits))


# --------------------------------------------------------------------------
# lambda = 0 constants


def c2_tilde_lambda0(alpha, ctx: PrecisionCtx):
    """c2~(alpha, 0) = alpha - ln(2 pi)."""
    with mp.workdps(ctx.work_digits):
        return mp.mpf(alpha) - mp.log(2 * mp.pi)


def c0_tilde_lambda0(alpha, ctx: PrecisionCtx):
    """c0~(alpha, 0) = -(alpha/2) ln(2 pi) - 2 zeta'(-1) + ln G(alpha+1)."""
    zp = zeta_prime_minus1(ctx)
    lg = log_barnes_g(mp.mpf(alpha) + 1 if not isinstance(alpha, mp.mpf) else alpha + 1, ctx)
    with mp.workdps(ctx.work_digits):
        return -mp.mpf(alpha) / 2 * mp.log(2 * mp.pi) - 2 * zp + lg


def classical_log_hankel(n: int, alpha, ctx: PrecisionCtx):
    """ln[G(n+1) G(n+alpha+1) / G(alpha+1)], the lambda = 0 value of ln D_n."""
    with mp.workdps(ctx.work_digits + 5):
        a = mp.mpf(alpha)
        val = log_barnes_g(n + 1, ctx) + log_barnes_g(n + a + 1, ctx) - log_barnes_g(a + 1, ctx)
    with mp.workdps(ctx.work_digits):
        return +val


# --------------------------------------------------------------------------
# large-n expansions


def largen_series(quantity: str, n, p: WeightParams, order=None, constants: dict | None = None,
                  digits: int = DEFAULT_DIGITS) -> SeriesEval:
    """Large-n expansion of ``quantity`` at fixed t.

    For lnD_n and lnh_n the constants c2~, c0~ come from ``constants``
    (keys ``"c2"``, ``"c0"``; tagged "empirically fitted"), from the
    closed forms when lambda = 0, or are flagged undetermined (value 0).
    """
    q = canonical_quantity(quantity)
    if q in FLUID_QUANTITIES:
        if q == "A":
            return lagrange_multiplier_series(n, p, order, digits)
        if q == "F":
            return free_energy_series(n, p, order, digits)
        return fluid_endpoint_series(n, p, order, q, digits)
    with mp.workdps(digits):
        a, lam, t = _mpf_params(p)
        st, N = mp.sqrt(t), mp.mpf(n)
        s, sq, ln = a + lam, mp.sqrt(N), mp.log(N)
        und, tags = [], []
        if q == "alpha_n":
            spec = [
                ("2n", 1, 0, 2 * N),
                ("const", 0, 0, 1 + s),
                ("n^-1/2", Fraction(-1, 2), 0, -lam * st / (2 * sq)),
                ("n^-3/2", Fraction(-3, 2), 0,
                 lam * (4 * t**2 + 8 * t * (s + 1) + 4 * a**2 - 1) / (64 * st * N * sq)),
                ("n^-2", -2, 0, -(lam**2) * (4 * t**2 - 4 * a**2 + 1) / (64 * t * N**2)),
            ]
        elif q == "beta_n":
            spec = [
                ("n^2", 2, 0, N**2),
                ("n", 1, 0, s * N),
                ("n^1/2", Fraction(1, 2), 0, -lam * st * sq / 2),
                ("const", 0, 0, lam * (2 * a + lam) / 4),
                ("n^-1/2", Fraction(-1, 2), 0,
                 lam * (4 * t**2 - 8 * t * s - 12 * a**2 + 3) / (64 * st * sq)),
                ("n^-1", -1, 0, lam**2 * (1 - 4 * a**2) / (32 * t * N)),
            ]
        elif q in ("p_n", "H_n"):
            tail = [
                ("n^1/2", Fraction(1, 2), 0, lam * st * sq),
                ("const", 0, 0, -lam * (2 * t + 2 * a + lam) / 4),
                ("n^-1/2", Fraction(-1, 2), 0,
                 lam * (4 * t**2 + 8 * s * t + 4 * a**2 - 1) / (32 * st * sq)),
                ("n^-1", -1, 0, -(lam**2) * (4 * t**2 - 4 * a**2 + 1) / (64 * t * N)),
            ]
            head = [("-n^2", 2, 0, -(N**2)), ("-(a+l) n", 1, 0, -s * N)] if q == "p_n" else []
            spec = head + tail
        elif q in ("lnD_n", "lnh_n"):
            c2, c0, tags, und = _hankel_constants(p, constants, digits)
            if q == "lnD_n":
                spec = [
                    ("n^2 ln n", 2, 1, N**2 * ln),
                    ("-3n^2/2", 2, 0, -3 * N**2 / 2),
                    ("(a+l) n ln n", 1, 1, s * N * ln),
                    ("c2", 1, 0, -c2 * N),
                    ("n^1/2", Fraction(1, 2), 0, 2 * lam * st * sq),
                    ("ln n", 0, 1, (6 * a**2 + 6 * a * lam + 3 * lam**2 - 2) / 12 * ln),
                    ("const(t)", 0, 0, -lam * t / 2 - lam * (2 * a + lam) / 4 * mp.log(t)),
                    ("c0", 0, 0, -c0),
                    ("n^-1/2", Fraction(-1, 2), 0,
                     lam * (4 * t**2 + 24 * t * s - 12 * a**2 + 3) / (48 * st * sq)),
                    ("n^-1", -1, 0,
                     -(12 * lam**2 * t**2 - 8 * t * s * (4 * a**2 + 2 * a * lam + lam**2 - 2)
                       + 3 * lam**2 * (4 * a**2 - 1)) / (192 * t * N)),
                ]
            else:
                und = [u for u in und if u == "c2"]
                spec = [
                    ("2n ln n", 1, 1, 2 * N * ln),
                    ("-2n", 1, 0, -2 * N),
                    ("(1+a+l) ln n", 0, 1, (1 + s) * ln),
                    ("a+l", 0, 0, s),
                    ("c2", 0, 0, -c2),
                    ("n^-1/2", Fraction(-1, 2), 0, lam * st / sq),
                    ("n^-1", -1, 0, (6 * a * (s + 1) + 3 * lam * (lam + 2) + 2) / (12 * N)),
                ]
        return _series(q, "large_n", n, p, spec, LARGE_N_REMAINDER[q], order, und, tags,
                       exploratory=p.a < 0)


def _hankel_constants(p: WeightParams, constants, digits):
    constants = constants or {}
    if "c2" in constants or "c0" in constants:
        c2 = mp.mpf(constants.get("c2", 0))
        c0 = mp.mpf(constants.get("c0", 0))
        und = [k for k in ("c2", "c0") if k not in constants]
        tag = "known" if p.lambda_is_zero else "empirically fitted"
        return c2, c0, (f"constants: {tag}",), und
    if p.lambda_is_zero:
        ctx = PrecisionCtx(target_digits=digits, guard_digits=20)
        return (c2_tilde_lambda0(p.a, ctx), c0_tilde_lambda0(p.a, ctx),
                ("constants: closed form (lambda = 0)",), [])
    return mp.mpf(0), mp.mpf(0), ("constants: undetermined",), ["c2", "c0"]


# --------------------------------------------------------------------------
# long-time expansions


def longtime_series(quantity: str, n: int, p: WeightParams, order=None, digits: int = DEFAULT_DIGITS) -> SeriesEval:
    """t -> infinity expansion at fixed n, through t^-2 with O(t^-3) remainder."""
    q = canonical_quantity(quantity)
    if q not in QUANTITIES:
        raise DomainError(f"no long-time expansion for {q!r}")
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n}")
    n = int(n)
    with mp.workdps(digits):
        a, lam, t = _mpf_params(p)
        m = n * (n + a)
        g = 2 * n + a - lam
        quad = 6 * n**2 + 2 * n * (3 * a - lam + 3) + (a + 1) * (a - lam + 2)
        if q == "alpha_n":
            spec = [("t^0", 0, 0, 2 * n + a + 1), ("t^-1", -1, 0, lam * (2 * n + a + 1) / t),
                    ("t^-2", -2, 0, -lam * quad / t**2)]
        elif q == "beta_n":
            spec = [("t^0", 0, 0, m), ("t^-1", -1, 0, 2 * lam * m / t), ("t^-2", -2, 0, -3 * lam * m * g / t**2)]
        elif q == "H_n":
            spec = [("t^0", 0, 0, lam * n), ("t^-1", -1, 0, -lam * m / t), ("t^-2", -2, 0, lam * m * g / t**2)]
        elif q == "p_n":
            spec = [("t^0", 0, 0, -m), ("t^-1", -1, 0, -lam * m / t), ("t^-2", -2, 0, lam * m * g / t**2)]
        elif q == "lnD_n":
            ctx = PrecisionCtx(target_digits=digits, guard_digits=20)
            spec = [("ln t", 0, 1, lam * n * mp.log(t)), ("C(n)", 0, 0, long_time_constant(n, a, ctx)),
                    ("t^-1", -1, 0, lam * m / t), ("t^-2", -2, 0, -lam * m * g / (2 * t**2))]
        else:
            ctx = PrecisionCtx(target_digits=digits, guard_digits=20)
            const = log_gamma(n + 1, ctx) + log_gamma(n + a + 1, ctx)
            spec = [("ln t", 0, 1, lam * mp.log(t)), ("ln Gamma", 0, 0, const),
                    ("t^-1", -1, 0, lam * (2 * n + a + 1) / t), ("t^-2", -2, 0, -lam * quad / (2 * t**2))]
        return _series(q, "long_time", p.t, p, spec, LONG_TIME_REMAINDER, order)


def long_time_constant(n: int, alpha, ctx: PrecisionCtx):
    """C~(n) = ln[G(n+1) G(n+alpha+1) / G(alpha+1)]."""
    return classical_log_hankel(n, alpha, ctx)


# --------------------------------------------------------------------------
# exact side


def exact_value(quantity: str, recur: RecurrenceTable, n: int):
    """The exact-pipeline value of ``quantity`` at index n."""
    q = canonical_quantity(quantity)
    p = recur.params
    with mp.workdps(recur.work_digits):
        if q == "alpha_n":
            return recur.alpha_rc[n]
        if q == "beta_n":
            return recur.beta[n]
        if q == "p_n":
            return recur.p_sub[n]
        if q == "H_n":
            return n * (n + p.a + p.l) + recur.p_sub[n]
        if q == "lnD_n":
            return mp.log(recur.D[n])
        if q == "lnh_n":
            return mp.log(recur.h[n])
    raise DomainError(f"{q} has no exact-pipeline value")


def required_N(quantity: str, n: int) -> int:
    """Smallest RecurrenceTable N that holds ``quantity`` at index n."""
    q = canonical_quantity(quantity)
    return max(1, n - 1) if q in ("p_n", "H_n", "lnD_n") else max(1, n)


# --------------------------------------------------------------------------
# convergence orders


@dataclass
class ConvergencePoint:
    scale: object
    exact: object
    series: object
    abs_err: object
    floor: object
    used: bool


@dataclass
class ConvergenceReport:
    quantity: str
    regime: str
    params: WeightParams
    expected: Fraction | None
    slope: float | None
    status: str
    points: list
    band: float = 0.2
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool | None:
        """True/False against the expected exponent; None when inconclusive."""
        if self.status == "exact match":
            return True
        if self.status != "ok" or self.expected is None:
            return None
        return abs(self.slope - float(self.expected)) <= self.band

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "regime": self.regime,
            "params": self.params.to_json(),
            "expected_slope": None if self.expected is None else str(self.expected),
            "observed_slope": None if self.slope is None else round(self.slope, 4),
            "band": self.band,
            "status": self.status,
            "pass": self.passed,
            "points": [
                {"scale": mp.nstr(mp.mpf(pt.scale), 12), "abs_err": mp.nstr(pt.abs_err, 6), "used": pt.used}
                for pt in self.points
            ],
            "notes": list(self.notes),
            **self.extra,
        }


def fit_slope(xs, ys) -> float:
    """Least-squares slope of ys against xs."""
    return statistics.linear_regression(xs, ys).slope


def convergence_order(samples, expected=None, band: float = 0.2, quantity: str = "", regime: str = "",
                      params: WeightParams | None = None, floor_factor: int = 1000,
                      exact_expected: bool | None = None) -> ConvergenceReport:
    """Observed slope of log|exact - series| against log(scale).

    ``samples`` is an iterable of (scale, exact, series_value, precision_floor).
    Points with |exact - series| below floor_factor * floor are dropped.
    All points below floor gives "exact match" unless ``exact_expected`` is
    False (the series is known to carry a remainder), in which case the
    remainder is unresolved and the status is "inconclusive"; fewer than
    three usable points also gives "inconclusive".
    """
    pts, notes = [], []
    for scale, exact, series, floor in samples:
        err = abs(exact - series)
        used = err >= floor_factor * floor
        pts.append(ConvergencePoint(scale, exact, series, err, floor, used))
        if not used:
            notes.append(f"scale {mp.nstr(mp.mpf(scale), 8)}: residual {mp.nstr(err, 3)} below floor, dropped")
    if len(pts) < 3:
        raise DomainError("convergence_order needs at least 3 scale points")
    usable = [pt for pt in pts if pt.used]
    if all(pt.abs_err <= pt.floor for pt in pts):
        if exact_expected is False:
            notes.append("residual below the precision floor at every point; remainder not resolved")
            return ConvergenceReport(quantity, regime, params, expected, None, "inconclusive", pts, band, notes)
        return ConvergenceReport(quantity, regime, params, expected, None, "exact match", pts, band, notes)
    if len(usable) < 3:
        return ConvergenceReport(quantity, regime, params, expected, None, "inconclusive", pts, band, notes)
    xs = [float(mp.log(mp.mpf(pt.scale))) for pt in usable]
    ys = [float(mp.log(pt.abs_err)) for pt in usable]
    slope = fit_slope(xs, ys)
    return ConvergenceReport(quantity, regime, params, expected, slope, "ok", pts, band, notes)


def _floor(recur: RecurrenceTable, value):
    return mp.mpf(10) ** (-recur.certified_digits) * max(mp.mpf(1), abs(value))


def largen_study(quantity: str, p: WeightParams, ns, ctx: PrecisionCtx, order=None,
                 constants: dict | None = None, band: float = 0.2, recur: RecurrenceTable | None = None):
    """Compare the large-n series with the exact pipeline over ``ns``.

    One exact table (N = max needed index) serves every n.  The expected
    slope is the exponent of the first omitted term.
    """
    q = canonical_quantity(quantity)
    ns = sorted(int(n) for n in ns)
    if recur is None:
        recur = exact_recurrence(p, required_N(q, ns[-1]), ctx)
    samples, rows = [], []
    with mp.workdps(recur.work_digits):
        for n in ns:
            ser = largen_series(q, n, p, order, constants, digits=recur.work_digits)
            ex = exact_value(q, recur, n)
            samples.append((n, ex, ser.total, _floor(recur, ex)))
            rows.append((n, ex, ser))
        full = largen_series(q, ns[0], p, None, constants, digits=30)
        expected = Fraction(order) if order is not None else full.remainder_exponent
        if p.lambda_is_zero and expected.denominator == 2:
            # every half-integer power carries a factor lambda
            expected = Fraction(math.floor(expected))
        if ser.undetermined:
            notes = [f"undetermined constants carried as 0: {', '.join(ser.undetermined)}"]
        else:
            notes = []
        rep = convergence_order(samples, expected, band, q, "large_n", p, exact_expected=p.lambda_is_zero)
    rep.notes += notes
    if p.a < 0:
        rep.notes.append("exploratory: alpha < 0 is outside the fluid regime")
        rep.extra["exploratory"] = True
    rep.extra["certified_digits"] = recur.certified_digits
    rep.rows = rows
    rep.work_digits = recur.work_digits
    return rep


def longtime_study(quantity: str, p: WeightParams, n: int, ts, ctx: PrecisionCtx, order=None,
                   band: float = 0.1, tables: dict | None = None):
    """Compare the long-time series with the exact pipeline over ``ts``.

    ``tables`` may map t to a RecurrenceTable (N large enough) to reuse.
    """
    q = canonical_quantity(quantity)
    samples, rows, cert = [], [], []
    for t in ts:
        pt = p.with_t(t)
        recur = (tables or {}).get(t)
        if recur is None or recur.N < required_N(q, n):
            recur = exact_recurrence(pt, required_N(q, n), ctx)
        else:
            pt = recur.params
        cert.append(recur.certified_digits)
        with mp.workdps(recur.work_digits):
            ser = longtime_series(q, n, pt, order, digits=recur.work_digits)
            ex = exact_value(q, recur, n)
            samples.append((pt.tt, ex, ser.total, _floor(recur, ex)))
            rows.append((pt.tt, ex, ser))
    expected = LONG_TIME_REMAINDER if order is None else Fraction(order)
    with mp.workdps(max(cert) + 20):
        rep = convergence_order(samples, expected, band, q, "long_time", p, exact_expected=p.lambda_is_zero)
    rep.extra["certified_digits"] = min(cert)
    rep.extra["n"] = n
    rep.rows = rows
    rep.work_digits = max(cert) + 20
    return rep


def comparison_csv(rows, digits: int = 20, work_digits: int = 60) -> str:
    """CSV with columns scale, exact, series, abs_err and one column per term.

    Totals and differences are formed at ``work_digits``.
    """
    with mp.workdps(work_digits):
        return _comparison_csv(rows, digits)


def _comparison_csv(rows, digits):
    labels = []
    for _, _, ser in rows:
        for term in ser.terms:
            if term.label not in labels:
                labels.append(term.label)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["scale", "exact", "series", "abs_err"] + [f"term[{lb}]" for lb in labels])
    for scale, ex, ser in rows:
        vals = {term.label: term.value for term in ser.terms}
        tot = ser.total
        w.writerow(
            [mp.nstr(mp.mpf(scale), digits), mp.nstr(ex, digits), mp.nstr(tot, digits), mp.nstr(abs(ex - tot), 8)]
            + [mp.nstr(vals[lb], digits) if lb in vals else "" for lb in labels]
        )
    return buf.getvalue()


# --------------------------------------------------------------------------
# constant fitting


@dataclass
class ConstantFit:
    quantity: str
    params: WeightParams
    constants: dict
    errors: dict
    n_range: tuple
    nuisance_exponents: tuple
    post_fit_slope: float | None
    ill_conditioned: bool
    tag: str
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "params": self.params.to_json(),
            "constants": {k: mp.nstr(v, 20) for k, v in self.constants.items()},
            "errors": {k: mp.nstr(v, 3) for k, v in self.errors.items()},
            "n_range": list(self.n_range),
            "nuisance_exponents": [str(e) for e in self.nuisance_exponents],
            "post_fit_residual_slope": None if self.post_fit_slope is None else round(self.post_fit_slope, 4),
            "ill_conditioned": self.ill_conditioned,
            "tag": self.tag,
            "notes": list(self.notes),
        }


_NUISANCE = tuple(Fraction(-k, 2) for k in range(3, 12))


def _lstsq(rows, rhs):
    A = mp.matrix(rows)
    b = mp.matrix(rhs)
    x, _ = mp.qr_solve(A, b)
    # condition estimate from the normal equations
    ata = A.T * A
    try:
        cond = mp.norm(ata, 1) * mp.norm(mp.inverse(ata), 1)
    except ZeroDivisionError:
        cond = mp.inf
    return [x[i] for i in range(A.cols)], cond


def fit_undetermined_constants(quantity: str, exact: dict, p: WeightParams, n_nuisance: int = 4,
                               digits: int = DEFAULT_DIGITS) -> ConstantFit:
    """Least-squares fit of c2~ (and c0~ for lnD_n) to exact data.

    ``exact`` maps n to the exact lnD_n or lnh_n.  All known series terms
    are subtracted; the fit model is the constants plus ``n_nuisance``
    correction terms n^-3/2, n^-2, ...  The quoted error is the largest
    change when the nuisance count moves by one either way.
    """
    q = canonical_quantity(quantity)
    if q not in ("lnD_n", "lnh_n"):
        raise DomainError("constants can only be fitted for lnD_n or lnh_n")
    ns = sorted(exact)
    if len(ns) < n_nuisance + 4:
        raise DomainError("not enough data points for the requested fit")
    names = ["c2", "c0"] if q == "lnD_n" else ["c2"]
    with mp.workdps(digits):
        resid = {}
        for n in ns:
            ser = largen_series(q, n, p, constants={"c2": 0, "c0": 0}, digits=digits)
            resid[n] = mp.mpf(exact[n]) - ser.total

        def basis(n, k):
            row = [-mp.mpf(n), mp.mpf(-1)] if q == "lnD_n" else [mp.mpf(-1)]
            return row + [mp.mpf(n) ** _NUISANCE[i] for i in range(k)]

        fits, conds = {}, {}
        for k in (n_nuisance - 1, n_nuisance, n_nuisance + 1):
            if k < 0:
                continue
            x, cond = _lstsq([basis(n, k) for n in ns], [resid[n] for n in ns])
            fits[k], conds[k] = x[: len(names)], cond
        central = fits[n_nuisance]
        errs = {
            nm: max(abs(fits[k][i] - central[i]) for k in fits if k != n_nuisance)
            for i, nm in enumerate(names)
        }
        ill = conds[n_nuisance] > mp.mpf(10) ** (digits - 10)
        # residual left after subtracting the fitted constants alone
        post = {}
        for n in ns:
            v = resid[n] - mp.fsum(c * b for c, b in zip(central, basis(n, 0)))
            post[n] = abs(v)
        pts = [n for n in ns if post[n] > mp.mpf(10) ** (-(digits - 10))]
        slope = (fit_slope([math.log(n) for n in pts], [float(mp.log(post[n])) for n in pts])
                 if len(pts) >= 3 else None)
    tag = "known (lambda = 0 self-test)" if p.lambda_is_zero else "empirically fitted"
    notes = ["advisory: ill-conditioned least-squares system"] if ill else []
    return ConstantFit(q, p, dict(zip(names, central)), errs, (ns[0], ns[-1]),
                       _NUISANCE[:n_nuisance], slope, bool(ill), tag, notes)
