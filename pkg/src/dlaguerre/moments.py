"""Moments of the deformed Laguerre weight x**alpha e**-x (x+t)**lambda.

Two routes are kept apart on purpose:

* the closed form t**(a+lam) Gamma(a) U(a, a+lam+1, t), with a = alpha+j+1,
  evaluated term by term or, for whole tables, seeded at j = 0, 1 and
  carried upward by the contiguous relation of U in (a, b) -> (a+1, b+1);
* direct quadrature of x**(alpha+j) e**-x (x+t)**lambda on (0, inf).

A :class:`MomentTable` built with ``cross_check=True`` has had every entry
compared between the two.
"""

from __future__ import annotations

import enum
import functools
import json
from dataclasses import dataclass, field, replace

import mpmath as mp

from ._numeric import dec, exact_key, exact_param, param_str, to_mpf
from .errors import DataIntegrityError, DomainError, PrecisionError
from .special import (
    PrecisionCtx,
    SemiaxisIntegrand,
    adaptive,
    integrate_semiaxis,
    log_gamma,
    log_kummer_u,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class WeightParams:
    """Parameters (alpha, lambda, t) of the weight.

    Values are kept in exact form (int, Fraction, decimal string or mpf) and
    converted to mpf at whatever precision is active when used.
    """

    alpha: object
    lam: object
    t: object

    def __post_init__(self):
        for name in ("alpha", "lam", "t"):
            object.__setattr__(self, name, exact_param(getattr(self, name)))
        with mp.workdps(30):
            if to_mpf(self.alpha) <= -1:
                raise DomainError(f"alpha must exceed -1, got {self.alpha}")
            if to_mpf(self.t) <= 0:
                raise DomainError(f"t must be positive, got {self.t}")

    @property
    def a(self):
        return to_mpf(self.alpha)

    @property
    def l(self):  # noqa: E743
        return to_mpf(self.lam)

    @property
    def tt(self):
        return to_mpf(self.t)

    @property
    def lambda_is_zero(self) -> bool:
        with mp.workdps(30):
            return to_mpf(self.lam) == 0

    @property
    def lambda_is_integer(self) -> bool:
        with mp.workdps(60):
            v = to_mpf(self.lam)
            return v == mp.floor(v)

    def with_t(self, t) -> "WeightParams":
        return replace(self, t=t)

    def with_lambda(self, lam) -> "WeightParams":
        return replace(self, lam=lam)

    def key(self):
        return (exact_key(self.alpha), exact_key(self.lam), exact_key(self.t))

    def to_json(self) -> dict:
        return {"alpha": param_str(self.alpha), "lambda": param_str(self.lam), "t": param_str(self.t)}

    @classmethod
    def from_json(cls, d: dict) -> "WeightParams":
        return cls(d["alpha"], d["lambda"], d["t"])


class Route(str, enum.Enum):
    closed_form = "closed_form"
    quadrature = "quadrature"
    cross_checked = "cross_checked"


@dataclass(frozen=True)
class MomentTable:
    """mu_0 .. mu_{2 n_max} at fixed parameters and precision."""

    params: WeightParams
    n_max: int
    mu: tuple
    route: Route
    work_digits: int
    target_digits: int
    cross_residual: object = None
    recurrence_loss_digits: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> str:
        with mp.workdps(self.work_digits):
            doc = {
                "schema_version": SCHEMA_VERSION,
                "kind": "MomentTable",
                "params": self.params.to_json(),
                "n_max": self.n_max,
                "precision": {"work_digits": self.work_digits, "target_digits": self.target_digits},
                "route": self.route.value,
                "cross_residual": None if self.cross_residual is None else mp.nstr(self.cross_residual, 6),
                "recurrence_loss_digits": round(float(self.recurrence_loss_digits), 3),
                "mu": [dec(m) for m in self.mu],
            }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "MomentTable":
        doc = json.loads(text)
        if doc.get("schema_version") != SCHEMA_VERSION or doc.get("kind") != "MomentTable":
            raise DataIntegrityError("not a MomentTable document of a supported version")
        wd = doc["precision"]["work_digits"]
        with mp.workdps(wd):
            mu = tuple(mp.mpf(s) for s in doc["mu"])
            cr = None if doc["cross_residual"] is None else mp.mpf(doc["cross_residual"])
        return cls(
            params=WeightParams.from_json(doc["params"]),
            n_max=doc["n_max"],
            mu=mu,
            route=Route(doc["route"]),
            work_digits=wd,
            target_digits=doc["precision"]["target_digits"],
            cross_residual=cr,
            recurrence_loss_digits=doc["recurrence_loss_digits"],
        )


def _check_j(j):
    if int(j) != j or j < 0:
        raise DomainError(f"moment index must be a non-negative integer, got {j}")
    return int(j)


@functools.lru_cache(maxsize=4096)
def _closed_form_cached(j, pkey, params, ctx):
    with mp.workdps(ctx.work_digits + 5):
        a = params.a + j + 1
        lam, t = params.l, params.tt
        logv = (a + lam) * mp.log(t) + log_gamma(a, ctx) + log_kummer_u(a, a + lam + 1, t, ctx)
    with mp.workdps(ctx.work_digits):
        return mp.exp(logv)


@adaptive
def moment_closed_form(j, p: WeightParams, ctx: PrecisionCtx):
    """mu_j = t**(alpha+j+lam+1) Gamma(alpha+j+1) U(alpha+j+1, alpha+j+lam+2, t).

    Assembled in log space so that j in the hundreds does not overflow.
    """
    return _closed_form_cached(_check_j(j), p.key(), p, ctx)


@adaptive
def moment_quadrature(j, p: WeightParams, ctx: PrecisionCtx):
    """mu_j by direct quadrature of x**(alpha+j) e**-x (x+t)**lambda."""
    j = _check_j(j)
    with mp.workdps(ctx.work_digits + 5):
        lam, t = p.l, p.tt
        f = SemiaxisIntegrand(
            power=p.a + j,
            log_g=None if lam == 0 else (lambda x: lam * mp.log(x + t)),
        )
    return integrate_semiaxis(f, ctx)


@adaptive
def moment_lambda_shifted(j, p: WeightParams, ctx: PrecisionCtx):
    """mu_j at (alpha, lambda - 1, t).

    Differentiating the weight in t gives d mu_j / dt = lambda * this value.
    """
    return moment_closed_form(j, p.with_lambda(p.lam - 1), ctx)


def moment_t_derivative(j, p: WeightParams, ctx: PrecisionCtx):
    """d mu_j / dt = lambda * mu_j(alpha, lambda - 1, t)."""
    if p.lambda_is_zero:
        with mp.workdps(ctx.work_digits):
            return mp.mpf(0)
    v = moment_lambda_shifted(j, p, ctx)
    with mp.workdps(ctx.work_digits):
        return p.l * v


def contiguous_recurrence(mu0, mu1, count, p: WeightParams, digits: int):
    """Carry mu_0, mu_1 up to mu_{count-1}.

    Uses mu_{j+2} = (j+2+alpha+lambda-t) mu_{j+1} + t (j+1+alpha) mu_j, the
    (a, b) -> (a+1, b+1) contiguous relation of U.  Returns the moments and
    a bound (in decimal digits) on the relative error amplification.
    """
    with mp.workdps(digits):
        a, lam, t = p.a, p.l, p.tt
        mu = [+mu0, +mu1]
        # relative error bound in digits: L[j+2] = log10(kappa_j) + max(L[j+1], L[j])
        loss = [0.0, 0.0]
        for j in range(count - 2):
            u = (j + 2 + a + lam - t) * mu[j + 1]
            v = t * (j + 1 + a) * mu[j]
            nxt = u + v
            if nxt <= 0:
                raise PrecisionError(f"contiguous recurrence lost all digits at j={j + 2}")
            kappa = (abs(u) + abs(v)) / nxt
            loss.append(float(mp.log10(kappa)) + max(loss[-1], loss[-2]))
            mu.append(nxt)
        return mu[:count], max(loss[:count])


def _moments_by_recurrence(count, p, ctx):
    extra = 10
    for _ in range(ctx.max_refinements + 2):
        digits = ctx.work_digits + extra
        seed_ctx = ctx.with_work(digits)
        mu0 = moment_closed_form(0, p, seed_ctx)
        mu1 = moment_closed_form(1, p, seed_ctx) if count > 1 else None
        if count == 1:
            return [mu0], 0.0
        mu, loss = contiguous_recurrence(mu0, mu1, count, p, digits)
        if loss <= extra - 5:
            return mu, loss
        extra = int(loss) + 15
    raise PrecisionError("moment recurrence kept losing more digits than budgeted")


def build_moment_table(
    n_max: int,
    p: WeightParams,
    ctx: PrecisionCtx,
    cross_check: bool = True,
    quadrature_ctx: PrecisionCtx | None = None,
) -> MomentTable:
    """mu_0 .. mu_{2 n_max} by the closed-form route.

    With ``cross_check`` every entry is recomputed by quadrature (at
    ``quadrature_ctx``, default ``ctx``) and the worst relative disagreement
    is stored; disagreement beyond ``10**-target_digits`` raises
    :class:`DataIntegrityError` naming the worst index.  Without it, the top
    moment alone is recomputed from the closed form as a spot check.
    """
    if int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be a positive integer, got {n_max}")
    n_max = int(n_max)
    count = 2 * n_max + 1
    mu, loss = _moments_by_recurrence(count, p, ctx)
    with mp.workdps(ctx.work_digits):
        mu = tuple(+m for m in mu)
    tol = ctx.tolerance
    if cross_check:
        qctx = quadrature_ctx or ctx
        worst, worst_j = mp.mpf(0), 0
        for j in range(count):
            q = moment_quadrature(j, p, qctx)
            with mp.workdps(ctx.work_digits):
                rel = abs(q - mu[j]) / mu[j]
            if rel > worst:
                worst, worst_j = rel, j
        if worst > tol:
            raise DataIntegrityError(
                f"closed-form and quadrature moments disagree at j={worst_j}: "
                f"relative residual {mp.nstr(worst, 5)}"
            )
        return MomentTable(p, n_max, mu, Route.cross_checked, ctx.work_digits, ctx.target_digits, worst, loss)
    top = moment_closed_form(count - 1, p, ctx)
    with mp.workdps(ctx.work_digits):
        rel = abs(top - mu[-1]) / mu[-1]
    if rel > tol:
        raise DataIntegrityError(
            f"recurrence and direct closed form disagree at j={count - 1}: {mp.nstr(rel, 5)}"
        )
    return MomentTable(p, n_max, mu, Route.closed_form, ctx.work_digits, ctx.target_digits, None, loss)


def binomial_moment(j, p: WeightParams, ctx: PrecisionCtx):
    """mu_j for integer lambda >= 0 by expanding (x+t)**lambda.

    Test oracle only: sum_k C(lam,k) t**(lam-k) Gamma(alpha+j+k+1).
    """
    if not p.lambda_is_integer or p.l < 0:
        raise DomainError("binomial expansion needs a non-negative integer lambda")
    with mp.workdps(ctx.work_digits):
        lam = int(p.l)
        a, t = p.a, p.tt
        return mp.fsum(mp.binomial(lam, k) * t ** (lam - k) * mp.gamma(a + j + k + 1) for k in range(lam + 1))
