"""Arbitrary-precision special functions and the semi-axis quadrature kernel.

Everything here is a pure function of its arguments and a
:class:`PrecisionCtx`.  Values are :class:`mpmath.mpf` numbers computed
inside ``mpmath.workdps(ctx.work_digits)``; callers do their own arithmetic
at whatever precision they hold.

The adaptive contract: every public operation accepts ``verify=True``,
which recomputes at twice the working digits and insists that both results
agree to ``target_digits``, escalating up to ``max_refinements`` times.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from typing import Callable

import mpmath as mp

from ._numeric import to_mpf
from .errors import DomainError, PrecisionError

__all__ = [
    "PrecisionCtx",
    "SemiaxisIntegrand",
    "adaptive",
    "log_gamma",
    "log_barnes_g",
    "zeta_prime_minus1",
    "integrate_semiaxis",
    "kummer_u",
    "log_kummer_u",
]


@dataclass(frozen=True)
class PrecisionCtx:
    """Working precision policy.

    ``work_digits`` defaults to ``target_digits + guard_digits`` and may not
    be set lower than that.
    """

    target_digits: int = 50
    guard_digits: int = 20
    work_digits: int | None = None
    max_refinements: int = 3

    def __post_init__(self):
        if self.target_digits < 1 or self.guard_digits < 1:
            raise DomainError("target_digits and guard_digits must be positive")
        if self.work_digits is None:
            object.__setattr__(self, "work_digits", self.target_digits + self.guard_digits)
        if self.work_digits < self.target_digits + self.guard_digits:
            raise DomainError(
                f"work_digits={self.work_digits} < target+guard="
                f"{self.target_digits + self.guard_digits}"
            )
        if self.max_refinements < 0:
            raise DomainError("max_refinements must be >= 0")

    def doubled(self) -> "PrecisionCtx":
        return replace(self, work_digits=2 * self.work_digits)

    def with_work(self, work_digits: int) -> "PrecisionCtx":
        return replace(self, work_digits=max(int(work_digits), self.target_digits + self.guard_digits))

    def with_target(self, target_digits: int) -> "PrecisionCtx":
        target_digits = int(target_digits)
        return PrecisionCtx(
            target_digits=target_digits,
            guard_digits=self.guard_digits,
            work_digits=max(self.work_digits, target_digits + self.guard_digits),
            max_refinements=self.max_refinements,
        )

    @property
    def tolerance(self):
        return mp.mpf(10) ** (-self.target_digits)


def _agree(a, b, digits: int) -> bool:
    scale = max(abs(a), abs(b), mp.mpf(1))
    return abs(a - b) <= mp.mpf(10) ** (-digits) * scale


def adaptive(fn: Callable) -> Callable:
    """Give ``fn(..., ctx)`` an optional ``verify`` keyword.

    With ``verify=True`` the call is repeated at doubled working digits; the
    pair must agree to ``ctx.target_digits``.  On disagreement the pair is
    shifted up one doubling, at most ``ctx.max_refinements`` times.
    """

    @functools.wraps(fn)
    def wrapper(*args, verify: bool = False, **kwargs):
        if "ctx" in kwargs:
            ctx = kwargs.pop("ctx")
        else:
            *args, ctx = args
        if not verify:
            return fn(*args, ctx, **kwargs)
        lo = fn(*args, ctx, **kwargs)
        cur = ctx
        for _ in range(ctx.max_refinements + 1):
            nxt = cur.doubled()
            hi = fn(*args, nxt, **kwargs)
            with mp.workdps(nxt.work_digits):
                if _agree(lo, hi, ctx.target_digits):
                    return lo if cur is ctx else hi
            lo, cur = hi, nxt
        raise PrecisionError(
            f"{fn.__name__}: no agreement to {ctx.target_digits} digits after "
            f"{ctx.max_refinements} refinements",
            estimates=(lo, hi),
        )

    return wrapper


# --------------------------------------------------------------------------
# Gamma, Barnes G, zeta'(-1)


@adaptive
def log_gamma(z, ctx: PrecisionCtx):
    """ln Gamma(z) for real z > 0."""
    with mp.workdps(ctx.work_digits):
        z = to_mpf(z)
        if z <= 0:
            raise DomainError(f"log_gamma needs z > 0, got {z}")
        return mp.loggamma(z)


def _bernoulli_tail_length(digits: int) -> int:
    # the Stirling-type tails below reach their smallest term near k ~ pi*z
    return int(0.45 * digits) + 12


@functools.lru_cache(maxsize=64)
def _zeta_prime_minus1(work_digits: int):
    with mp.workdps(work_digits + 10):
        # hyperfactorial H(N) = prod k^k, Euler-Maclaurin at the upper end
        N = _bernoulli_tail_length(work_digits)
        lnH = mp.fsum(k * mp.log(k) for k in range(2, N + 1))
        Nm = mp.mpf(N)
        ln_a = lnH - (Nm**2 / 2 + Nm / 2 + mp.mpf(1) / 12) * mp.log(Nm) + Nm**2 / 4
        eps = mp.mpf(10) ** (-(work_digits + 8))
        m = 2
        while True:
            term = mp.bernoulli(2 * m) / (2 * m * (2 * m - 1) * (2 * m - 2) * Nm ** (2 * m - 2))
            ln_a += term
            if abs(term) < eps or m > 4 * N:
                break
            m += 1
        return mp.mpf(1) / 12 - ln_a


@adaptive
def zeta_prime_minus1(ctx: PrecisionCtx):
    """zeta'(-1) = 1/12 - ln A, with Glaisher's A from the hyperfactorial."""
    val = _zeta_prime_minus1(ctx.work_digits)
    with mp.workdps(ctx.work_digits):
        return +val


def barnes_shift_threshold(ctx: PrecisionCtx) -> float:
    """Argument above which the large-z expansion of ln G is used directly."""
    return max(10 + ctx.target_digits / 2, 0.4 * ctx.work_digits + 5)


def _log_barnes_g_large(w, ctx: PrecisionCtx):
    """ln G(w + 1) by its large-w expansion including the Bernoulli tail."""
    zp = _zeta_prime_minus1(ctx.work_digits)
    lnw = mp.log(w)
    val = w**2 * (lnw / 2 - mp.mpf(3) / 4) + w / 2 * mp.log(2 * mp.pi) - lnw / 12 + zp
    eps = mp.mpf(10) ** (-(ctx.work_digits + 5))
    w2 = w * w
    wpow = w2
    prev = mp.inf
    for k in range(1, 10 * ctx.work_digits):
        term = mp.bernoulli(2 * k + 2) / (4 * k * (k + 1) * wpow)
        if abs(term) > prev:  # asymptotic series started diverging
            break
        val += term
        if abs(term) < eps:
            break
        prev = abs(term)
        wpow *= w2
    return val


@adaptive
def log_barnes_g(z, ctx: PrecisionCtx):
    """ln G(z) for real z > 0.

    z is pushed up with ln G(z+1) = ln Gamma(z) + ln G(z) until it clears
    :func:`barnes_shift_threshold`, then the large-argument expansion with
    its Bernoulli-number tail is summed to working precision.
    """
    with mp.workdps(ctx.work_digits + 10):
        z = to_mpf(z)
        if z <= 0:
            raise DomainError(f"log_barnes_g needs z > 0, got {z}")
        thresh = barnes_shift_threshold(ctx)
        shift = max(0, math.ceil(thresh - float(z)))
        acc = mp.fsum(mp.loggamma(z + k) for k in range(shift))
        val = _log_barnes_g_large(z + shift - 1, ctx) - acc
    with mp.workdps(ctx.work_digits):
        return +val


# --------------------------------------------------------------------------
# Quadrature on (0, inf)


@dataclass(frozen=True)
class SemiaxisIntegrand:
    """The integrand x**power * exp(-x) * g(x) on (0, inf).

    ``g`` must be smooth on [0, inf) and grow at most polynomially; it is
    called with mpf arguments at the working precision.  ``log_g`` may be
    given instead of ``g`` when g itself would overflow.
    """

    power: object = 0
    g: Callable | None = None
    log_g: Callable | None = None

    def __call__(self, x):
        if self.log_g is not None:
            return mp.exp(self.power * mp.log(x) - x + self.log_g(x))
        base = mp.exp(self.power * mp.log(x) - x)
        return base if self.g is None else base * self.g(x)

    def without_power(self, x):
        """exp(-x) * g(x), the integrand stripped of x**power."""
        if self.log_g is not None:
            return mp.exp(-x + self.log_g(x))
        base = mp.exp(-x)
        return base if self.g is None else base * self.g(x)


def _breakpoints(power):
    pts = [mp.mpf(0), mp.mpf(1)]
    # x**p e^{-x} peaks at x = p; a break there keeps the tail map well scaled
    if power > 2:
        pts.append(mp.mpf(power))
    pts.append(mp.inf)
    return pts


@adaptive
def integrate_semiaxis(f: SemiaxisIntegrand, ctx: PrecisionCtx):
    """Integral of ``f`` over (0, inf) to ``ctx.target_digits``.

    The range is split at 1 (and at the peak of x**p e^{-x} for large p);
    each piece is handled by double-exponential (tanh-sinh / exp-sinh)
    quadrature, whose level-to-level refinement stops once successive levels
    agree.  If the final error estimate still exceeds the target, the
    maximal level is raised, up to ``ctx.max_refinements`` times.

    For power < 0 the piece on [0, 1] is mapped by x = s**(1/(power+1)),
    which absorbs the endpoint singularity; otherwise the nodes' cut-off
    near 0 would drop a piece of size about 10**(-(power+1) * work_digits).
    """
    last = []
    with mp.workdps(ctx.work_digits):
        p = to_mpf(f.power)
        if p <= -1:
            raise DomainError(f"integrand power must exceed -1, got {p}")
        g = SemiaxisIntegrand(p, f.g, f.log_g)
        pts = _breakpoints(p)
        tol = ctx.tolerance
        degree = 6 + int(math.log2(max(ctx.work_digits, 16) / 16) + 1)
        if p < 0:
            q = 1 / (p + 1)

            def head(s):
                return g.without_power(s**q) * q if s > 0 else g.without_power(mp.mpf(0)) * q

            pieces = [(head, [mp.mpf(0), mp.mpf(1)]), (g, pts[1:])]
        else:
            pieces = [(g, pts)]
        for attempt in range(ctx.max_refinements + 1):
            val, err = mp.mpf(0), mp.mpf(0)
            for fn, span in pieces:
                v, e = mp.quad(fn, span, method="tanh-sinh", error=True, maxdegree=degree)
                val += v
                err += e
            last.append(val)
            if err <= tol * max(abs(val), mp.mpf(10) ** (-ctx.work_digits)):
                return val
            degree += 2
    raise PrecisionError(
        f"integrate_semiaxis: no convergence to {ctx.target_digits} digits",
        estimates=tuple(last[-2:]),
    )


# --------------------------------------------------------------------------
# Kummer U for a > 0, z > 0


def log_kummer_u(a, b, z, ctx: PrecisionCtx):
    """ln U(a, b, z) via the Laplace-type integral; a > 0, z > 0.

    U(a,b,z) = z**-a / Gamma(a) * int_0^inf u**(a-1) e^-u (1 + u/z)**(b-a-1) du.
    """
    with mp.workdps(ctx.work_digits + 5):
        a, b, z = to_mpf(a), to_mpf(b), to_mpf(z)
        if a <= 0 or z <= 0:
            raise DomainError(f"kummer_u needs a > 0 and z > 0, got a={a}, z={z}")
        expo = b - a - 1
        inner = SemiaxisIntegrand(
            power=a - 1,
            log_g=None if expo == 0 else (lambda u: expo * mp.log1p(u / z)),
        )
        integral = integrate_semiaxis(inner, ctx)
        val = mp.log(integral) - a * mp.log(z) - mp.loggamma(a)
    with mp.workdps(ctx.work_digits):
        return +val


@adaptive
def kummer_u(a, b, z, ctx: PrecisionCtx):
    """Confluent hypergeometric U(a, b, z) for a > 0, z > 0."""
    lu = log_kummer_u(a, b, z, ctx)
    with mp.workdps(ctx.work_digits):
        return mp.exp(lu)
