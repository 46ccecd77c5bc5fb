"""Ladder-operator auxiliary quantities and the finite-n identity suite.

R_n and r_n are the weighted integrals

    R_n = lambda / h_n     * int P_n^2     w(x) / (x + t) dx
    r_n = lambda / h_{n-1} * int P_n P_n-1 w(x) / (x + t) dx

and can also be read off algebraically from alpha_n, beta_n.  Both routes
are provided.  Every identity check returns a :class:`ResidualReport`
whose residual is |LHS - RHS| / max(1, largest participating term).

Identities that involve t-derivatives are checked on a :class:`TGrid` of
recurrence tables at t + k*step, with 6th-order central differences.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import mpmath as mp

from ._numeric import dec
from .errors import DomainError
from .moments import WeightParams
from .orthopoly import (
    RecurrenceTable,
    eval_by_recurrence,
    eval_poly_derivs,
    exact_recurrence,
    hankel_work_digits,
    polynomial,
)
from .special import PrecisionCtx, SemiaxisIntegrand, integrate_semiaxis

# central-difference stencils on offsets -3..3
_D1 = (-1, 9, -45, 0, 45, -9, 1)
_D1_DEN = 60
_D2 = (2, -27, 270, -490, 270, -27, 2)
_D2_DEN = 180

SCHEMA_VERSION = 1

# grid offsets (in units of the base step) that serve steps 1, 2 and 4
GRID_OFFSETS = (0, 1, 2, 3, 4, 6, 8, 12)


@dataclass(frozen=True)
class AuxTable:
    """R_n, r_n for n = 0..N; H_n and sum_{j<n} R_j for n = 0..N+1."""

    params: WeightParams
    N: int
    R: tuple
    r: tuple
    H: tuple
    sumR: tuple
    provenance: str
    certified_digits: int
    work_digits: int
    indeterminate: tuple = ()

    def _cell(self, v):
        return "" if v is None else dec(v, self.certified_digits)

    def to_json(self) -> str:
        with mp.workdps(self.work_digits):
            doc = {
                "schema_version": SCHEMA_VERSION,
                "kind": "AuxTable",
                "params": self.params.to_json(),
                "N": self.N,
                "provenance": self.provenance,
                "precision": {"work_digits": self.work_digits, "certified_digits": self.certified_digits},
                "indeterminate": list(self.indeterminate),
                "R": [self._cell(v) for v in self.R],
                "r": [self._cell(v) for v in self.r],
                "H": [self._cell(v) for v in self.H],
                "sumR": [self._cell(v) for v in self.sumR],
            }
        return json.dumps(doc, indent=1)

    def to_csv(self) -> str:
        """One row per n = 0..N with R_n, r_n, H_n at the certified digits."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "R_n", "r_n", "H_n"])
        with mp.workdps(self.work_digits):
            for n in range(self.N + 1):
                w.writerow([n, self._cell(self.R[n]), self._cell(self.r[n]), self._cell(self.H[n])])
        return buf.getvalue()


@dataclass
class ResidualReport:
    """Outcome of one identity family over a range of n."""

    identity: str
    n_range: tuple
    t: object
    max_residual: object
    scale: object
    certified_digits: int
    tolerance: object
    passed: bool
    worst_n: int | None = None
    notes: list = field(default_factory=list)
    per_n: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "n_range": list(self.n_range),
            "t": mp.nstr(mp.mpf(self.t), 20),
            "max_residual": mp.nstr(self.max_residual, 6),
            "scale": mp.nstr(self.scale, 6),
            "tolerance": mp.nstr(self.tolerance, 6),
            "certified_digits": self.certified_digits,
            "pass": bool(self.passed),
            "worst_n": self.worst_n,
            "notes": list(self.notes),
        }


def _residual(lhs, rhs):
    """Normalized |sum(lhs) - sum(rhs)| and the normalizing scale."""
    scale = max([mp.mpf(1)] + [abs(v) for v in list(lhs) + list(rhs)])
    return abs(mp.fsum(lhs) - mp.fsum(rhs)) / scale, scale


def _report(identity, per_n, t, certified, tolerance, notes=None):
    if per_n:
        worst_n = max(per_n, key=lambda k: per_n[k][0])
        worst, scale = per_n[worst_n]
    else:
        worst_n, worst, scale = None, mp.mpf(0), mp.mpf(1)
    ns = sorted(per_n) or [0]
    return ResidualReport(
        identity, (ns[0], ns[-1]), t, worst, scale, certified, tolerance,
        bool(worst <= tolerance), worst_n, list(notes or []),
        {k: v[0] for k, v in per_n.items()},
    )


def _aux_digits(recur: RecurrenceTable) -> int:
    return recur.certified_digits - 2 - int(math.ceil(math.log10(recur.N + 2)))


# --------------------------------------------------------------------------
# auxiliary quantities


def aux_from_recurrence(recur: RecurrenceTable, ctx: PrecisionCtx | None = None) -> AuxTable:
    """R_n, r_n, H_n from the recurrence coefficients.

    t R_n = 2n+1+alpha+lambda - alpha_n and
    (2n+alpha+lambda) t r_n = -n(n+alpha) t - beta_n (4n+2alpha+2lambda-t-alpha_n-alpha_{n-1}).
    Indices with 2n+alpha+lambda = 0 are listed in ``indeterminate``; their
    r_n comes from the defining integral when ``ctx`` is given and is
    ``None`` otherwise.
    """
    p = recur.params
    N = recur.N
    with mp.workdps(recur.work_digits):
        a, lam, t = p.a, p.l, p.tt
        al, be = recur.alpha_rc, recur.beta
        R = [(2 * n + 1 + a + lam - al[n]) / t for n in range(N + 1)]
        r = [mp.mpf(0)]
        bad = []
        for n in range(1, N + 1):
            den = 2 * n + a + lam
            if den == 0:
                r.append(None if ctx is None else _r_integral(recur, n, ctx))
                bad.append(n)
                continue
            num = -n * (n + a) * t - be[n] * (4 * n + 2 * a + 2 * lam - t - al[n] - al[n - 1])
            r.append(num / (den * t))
        H = [n * (n + a + lam) + recur.p_sub[n] for n in range(N + 2)]
        sumR = [mp.mpf(0)]
        for n in range(N + 1):
            sumR.append(sumR[-1] + R[n])
    return AuxTable(p, N, tuple(R), tuple(r), tuple(H), tuple(sumR),
                    "from_recurrence", _aux_digits(recur), recur.work_digits, tuple(bad))


def _r_integral(recur: RecurrenceTable, n: int, ctx: PrecisionCtx):
    """r_n = lambda / h_{n-1} * int P_n P_{n-1} w / (x + t) dx by quadrature."""
    p = recur.params
    with mp.workdps(ctx.work_digits + 5):
        lam, t = p.l, p.tt

        def g(x):
            return eval_by_recurrence(recur, n, x) * eval_by_recurrence(recur, n - 1, x) * (x + t) ** (lam - 1)

        return lam / recur.h[n - 1] * integrate_semiaxis(SemiaxisIntegrand(p.a, g), ctx)


def aux_from_integrals(recur: RecurrenceTable, ctx: PrecisionCtx, n_max: int | None = None) -> AuxTable:
    """R_n, r_n by direct quadrature of their defining integrals.

    P_n is evaluated inside the integrand by the three-term recurrence.
    H_n is then t * sum_{j<n} R_j.
    """
    p = recur.params
    N = recur.N if n_max is None else min(n_max, recur.N)
    with mp.workdps(ctx.work_digits + 5):
        a, lam, t = p.a, p.l, p.tt
        R, r = [], [mp.mpf(0)]
        if lam == 0:
            R = [mp.mpf(0)] * (N + 1)
            r = [mp.mpf(0)] * (N + 1)
        else:
            for n in range(N + 1):
                def g_sq(x, n=n):
                    return eval_by_recurrence(recur, n, x) ** 2 * (x + t) ** (lam - 1)
                R.append(lam / recur.h[n] * integrate_semiaxis(SemiaxisIntegrand(a, g_sq), ctx))
                if n == 0:
                    continue

                r.append(_r_integral(recur, n, ctx))
        sumR = [mp.mpf(0)]
        for n in range(N + 1):
            sumR.append(sumR[-1] + R[n])
        H = [t * s for s in sumR]
    digits = min(_aux_digits(recur), ctx.target_digits)
    return AuxTable(p, N, tuple(R), tuple(r), tuple(H), tuple(sumR),
                    "from_integrals", digits, ctx.work_digits)


# --------------------------------------------------------------------------
# t-grids and finite differences


@dataclass(frozen=True)
class TGrid:
    """Recurrence and aux tables at t0 + k * step for k in +-offsets."""

    params: WeightParams
    N: int
    step: object
    tables: dict
    aux: dict
    certified_digits: int

    @property
    def t0(self):
        return self.tables[0].params.tt

    def values(self, fn) -> dict:
        """Map offset -> fn(recur, aux)."""
        return {k: fn(self.tables[k], self.aux[k]) for k in self.tables}

    def derivative(self, fn, unit: int = 1):
        """6th-order central first derivative of fn at t0 with step unit*step."""
        vals = self.values(fn)
        return fd_first(vals, unit, self.step)

    def second_derivative(self, fn, unit: int = 1):
        vals = self.values(fn)
        return fd_second(vals, unit, self.step)


def fd_first(vals: dict, unit: int, step):
    s = mp.fsum(c * vals[(i - 3) * unit] for i, c in enumerate(_D1) if c)
    return s / (_D1_DEN * unit * step)


def fd_second(vals: dict, unit: int, step):
    s = mp.fsum(c * vals[(i - 3) * unit] for i, c in enumerate(_D2))
    return s / (_D2_DEN * (unit * step) ** 2)


def fd_truncation_bound(vals: dict, unit: int, step):
    """Richardson estimate of the O(step**6) error of :func:`fd_first`."""
    return abs(fd_first(vals, 2 * unit, step) - fd_first(vals, unit, step)) / 63


def default_step(t, certified_digits: int):
    """t * 10**(-certified/8): truncation and cancellation both stay small."""
    return mp.mpf(t) * mp.mpf(10) ** (-mp.mpf(certified_digits) / 8)


def build_t_grid(
    params: WeightParams,
    N: int,
    ctx: PrecisionCtx,
    step=None,
    offsets=GRID_OFFSETS,
) -> TGrid:
    """Exact tables at t0 + k*step for k in {0} and +-offsets.

    All tables share one working precision so that differences are
    consistent.  ``step`` defaults to :func:`default_step`.
    """
    work = hankel_work_digits(N, ctx)
    center = exact_recurrence(params, N, ctx, work_digits=work)
    work = center.work_digits
    with mp.workdps(work + 10):
        t0 = params.tt
        h = default_step(t0, center.certified_digits) if step is None else mp.mpf(step)
        if h * max(offsets) >= t0:
            raise DomainError("finite-difference step reaches t <= 0")
        ks = sorted({0} | {s * k for k in offsets for s in (1, -1)})
        tvals = {k: t0 + k * h for k in ks}
    tables = {0: center}
    for k in ks:
        if k:
            tables[k] = exact_recurrence(params.with_t(tvals[k]), N, ctx, work_digits=work)
    aux = {k: aux_from_recurrence(v) for k, v in tables.items()}
    cert = min(v.certified_digits for v in tables.values())
    return TGrid(params, N, h, tables, aux, cert)


# --------------------------------------------------------------------------
# identity families


def verify_compatibility(recur: RecurrenceTable, aux: AuxTable, tolerance=None) -> list:
    """The five compatibility conditions for n = 1 .. N-1."""
    p = recur.params
    N = recur.N
    cert = min(recur.certified_digits, aux.certified_digits)
    out = []
    with mp.workdps(recur.work_digits):
        tol = mp.mpf(10) ** (-(cert - 5)) if tolerance is None else mp.mpf(tolerance)
        a, lam, t = p.a, p.l, p.tt
        al, be = recur.alpha_rc, recur.beta
        R, r, S = aux.R, aux.r, aux.sumR
        fams = {k: {} for k in ("s12", "s11", "s21", "s23", "s22a")}
        for n in range(1, N):
            if r[n] is None or r[n + 1] is None:
                continue
            fams["s12"][n] = _residual([r[n], r[n + 1]], [lam, -R[n] * t, -R[n] * al[n]])
            fams["s11"][n] = _residual([2 * n + 1 + a, r[n], r[n + 1]], [al[n], -al[n] * R[n]])
            fams["s21"][n] = _residual([r[n] ** 2, -lam * r[n]], [be[n] * R[n] * R[n - 1]])
            fams["s23"][n] = _residual(
                [(n + r[n]) ** 2, a * (n + r[n])], [be[n] * (1 - R[n]) * (1 - R[n - 1])]
            )
            fams["s22a"][n] = _residual(
                [n * lam, -2 * r[n] ** 2, -(2 * n + a - lam + t) * r[n], -t * S[n]],
                [be[n] * R[n] * (1 - R[n - 1]), be[n] * R[n - 1] * (1 - R[n])],
            )
        notes = ["degenerate: classical Laguerre"] if p.lambda_is_zero else []
        for name, per in fams.items():
            out.append(_report(name, per, t, cert, tol, notes))
    return out


def _q(n, a, lam, t, al, be):
    return [n * (n + a) * t, be[n] * (4 * n + 2 * a + 2 * lam - t - al[n] - al[n - 1])]


def verify_discrete_system(recur: RecurrenceTable, tolerance=None) -> list:
    """The two-equation discrete system in alpha_{n-1..n+1}, beta_{n, n+1}."""
    p = recur.params
    N = recur.N
    cert = recur.certified_digits
    with mp.workdps(recur.work_digits):
        tol = mp.mpf(10) ** (-(cert - 5)) if tolerance is None else mp.mpf(tolerance)
        a, lam, t = p.a, p.l, p.tt
        al, be = recur.alpha_rc, recur.beta
        d11, d12 = {}, {}
        for n in range(1, N):
            c0 = 2 * n + a + lam
            c2 = 2 * n + 2 + a + lam
            qn = _q(n, a, lam, t, al, be)
            qn1 = _q(n + 1, a, lam, t, al, be)
            rhs = c0 * c2 * ((t + al[n]) * (2 * n + 1 + a + lam - al[n]) - lam * t)
            d11[n] = _residual([c2 * v for v in qn] + [c0 * v for v in qn1], [rhs])
            Q = mp.fsum(qn)
            lhs12 = [Q**2, c0 * lam * t * Q]
            rhs12 = c0**2 * be[n] * (2 * n + 1 + a + lam - al[n]) * (2 * n - 1 + a + lam - al[n - 1])
            d12[n] = _residual(lhs12, [rhs12])
    return [_report("d11", d11, t, cert, tol), _report("d12", d12, t, cert, tol)]


def _ab(x, n, a, lam, t, al, be):
    """A_n(x), A_n'(x), B_n(x), B_n'(x) in terms of alpha_n, beta_n."""
    s = x * (x + t)
    ds = 2 * x + t
    c = t - 2 * n - 1 - a - lam + al[n]
    A = (x + c) / s
    dA = (s - (x + c) * ds) / s**2
    den = 2 * n + a + lam
    k0 = n * (n + a) * t - n * den * t + be[n] * (4 * n + 2 * a + 2 * lam - t - al[n] - al[n - 1])
    k1 = -n * den
    B = (k0 + k1 * x) / (den * s)
    dB = (k1 * s - (k0 + k1 * x) * ds) / (den * s**2)
    return A, dA, B, dB


def verify_ode(recur: RecurrenceTable, n: int, xs, tolerance=None) -> ResidualReport:
    """Second-order ODE for P_n with coefficients built from alpha_n, beta_n.

    P'' - (v' + A'/A) P' + (B' - B^2 - v'B + beta_n A_n A_{n-1} - A'B/A) P = 0
    with v'(x) = 1 - alpha/x - lambda/(x+t).
    """
    if n < 1 or n > recur.N:
        raise DomainError(f"n={n} outside 1..{recur.N}")
    p = recur.params
    cert = recur.certified_digits
    notes, per = [], {}
    with mp.workdps(recur.work_digits):
        tol = mp.mpf(10) ** (-(cert - 5)) if tolerance is None else mp.mpf(tolerance)
        a, lam, t = p.a, p.l, p.tt
        al, be = recur.alpha_rc, recur.beta
        P = polynomial(recur, n)
        near = mp.mpf(10) ** (-mp.mpf(cert) / 2)
        zero_a = 2 * n + 1 + a + lam - al[n] - t
        worst = {}
        for x in xs:
            x = mp.mpf(x)
            if min(abs(x), abs(x + t), abs(x - zero_a)) < near:
                notes.append(f"x={mp.nstr(x, 8)} skipped: near a singular point")
                continue
            A, dA, B, dB = _ab(x, n, a, lam, t, al, be)
            Am1 = _ab(x, n - 1, a, lam, t, al, be)[0] if n >= 1 else None
            vp = 1 - a / x - lam / (x + t)
            f, df, d2f = eval_poly_derivs(P, x)
            c1 = -(vp + dA / A)
            c0 = dB - B**2 - vp * B + be[n] * A * Am1 - dA * B / A
            res, scale = _residual([d2f, c1 * df, c0 * f], [])
            worst[x] = (res, scale)
        if worst:
            xw = max(worst, key=lambda k: worst[k][0])
            per = {n: worst[xw]}
            notes.append(f"worst x={mp.nstr(xw, 8)}")
    return _report("ode", per, t, cert, tol, notes)


def hn_consistency(recur: RecurrenceTable, aux: AuxTable, grid: TGrid | None = None) -> ResidualReport:
    """H_n three ways: n(n+a+l) + p(n); n(n+a+l) - beta_n - t r_n; t d/dt ln D_n.

    The third route needs ``grid``; its tolerance then includes the FD
    truncation bound.
    """
    p = recur.params
    cert = min(recur.certified_digits, aux.certified_digits)
    notes = []
    with mp.workdps(recur.work_digits):
        a, lam, t = p.a, p.l, p.tt
        tol = mp.mpf(10) ** (-(cert - 5))
        per = {}
        fd_tol = mp.mpf(0)
        for n in range(1, recur.N + 1):
            if aux.r[n] is None:
                continue
            ex1 = n * (n + a + lam) + recur.p_sub[n]
            ex2 = n * (n + a + lam) - recur.beta[n] - t * aux.r[n]
            res, scale = _residual([ex1], [ex2])
            if grid is not None:
                vals = grid.values(lambda rt, ax, n=n: mp.log(rt.D[n]))
                num = grid.t0 * fd_first(vals, 1, grid.step)
                bound = grid.t0 * fd_truncation_bound(vals, 1, grid.step)
                r2, s2 = _residual([ex1], [num])
                fd_tol = max(fd_tol, 10 * bound / max(1, s2))
                res = max(res, r2 - 10 * bound / max(1, s2))
                scale = max(scale, s2)
            per[n] = (res, scale)
    if grid is not None:
        notes.append(f"finite-difference allowance {mp.nstr(fd_tol, 5)} subtracted")
    return _report("H_n", per, t, cert, tol, notes)


@dataclass
class FDReport(ResidualReport):
    """Residual report for a finite-difference identity."""

    bound: object = None
    halving_ratio: object = None

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["fd_bound"] = mp.nstr(self.bound, 6) if self.bound is not None else None
        d["halving_ratio"] = None if self.halving_ratio is None else mp.nstr(self.halving_ratio, 6)
        return d


def _fd_family(name, grid: TGrid, ns, deriv_fn, mult_fn, exact_fn):
    """Compare mult * d/dt deriv_fn against exact_fn on the grid center.

    Returns an :class:`FDReport` whose tolerance is 10x the Richardson
    bound of the worst n and whose halving ratio compares step 2 vs step 1.
    """
    t0 = grid.t0
    per, bounds, ratios = {}, {}, {}
    for n in ns:
        vals = grid.values(lambda rt, ax, n=n: deriv_fn(rt, ax, n))
        mult = mult_fn(grid.tables[0], grid.aux[0], n)
        ex = exact_fn(grid.tables[0], grid.aux[0], n)
        res1 = abs(mult * fd_first(vals, 1, grid.step) - ex)
        res2 = abs(mult * fd_first(vals, 2, grid.step) - ex)
        bound = abs(mult) * fd_truncation_bound(vals, 1, grid.step)
        scale = max(mp.mpf(1), abs(ex))
        per[n] = (res1, scale)
        bounds[n] = bound
        ratios[n] = res2 / res1 if res1 else None
    if per:
        worst_n = max(per, key=lambda k: per[k][0] / max(bounds[k], mp.mpf(10) ** (-grid.certified_digits)))
        floor = mp.mpf(10) ** (-(grid.certified_digits - 5)) * per[worst_n][1]
        ok = all(per[n][0] <= 10 * bounds[n] + floor for n in per)
        res, scale = per[worst_n]
        bound, ratio = bounds[worst_n], ratios[worst_n]
    else:
        worst_n, res, scale, bound, ratio, ok = None, mp.mpf(0), mp.mpf(1), mp.mpf(0), None, True
    ns_sorted = sorted(per) or [0]
    rep = FDReport(name, (ns_sorted[0], ns_sorted[-1]), t0, res, scale, grid.certified_digits,
                   10 * bound, ok, worst_n, [], {k: v[0] for k, v in per.items()},
                   bound=bound, halving_ratio=ratio)
    rep.ratios = ratios
    rep.bounds = bounds
    if all(v[0] == 0 for v in per.values()):
        rep.notes.append("exact: both sides vanish")
    return rep


def verify_toda(grid: TGrid) -> list:
    """t-derivative identities checked by 6th-order central differences.

    Families: ``tb1`` (t beta_n' = beta_n (alpha_{n-1} - alpha_n + 2)),
    ``tb2`` (the t alpha_n' equation), ``dphi`` (H_n' = -r_n),
    ``dlnhnt`` ((ln h_n)' = R_n) and ``alpha_prime`` (alpha_n' = r_{n+1} - r_n).
    """
    p = grid.params
    N = grid.N
    with mp.workdps(grid.tables[0].work_digits):
        a, lam = p.a, p.l
        t0 = grid.t0

        def tb2_exact(rt, ax, n):
            al, be = rt.alpha_rc, rt.beta
            c0, c2 = 2 * n + a + lam, 2 * n + 2 + a + lam
            return (
                -t0 * (2 * n**2 + 2 * n * (1 + a + lam) + (1 + a) * (a + lam))
                - c0 * be[n + 1] * (4 * n + 4 + 2 * a + 2 * lam - t0 - al[n + 1] - al[n])
                + c2 * be[n] * (4 * n + 2 * a + 2 * lam - t0 - al[n] - al[n - 1])
            )

        ns = range(1, N)
        reps = [
            _fd_family("tb1", grid, ns, lambda rt, ax, n: rt.beta[n], lambda rt, ax, n: t0,
                       lambda rt, ax, n: rt.beta[n] * (rt.alpha_rc[n - 1] - rt.alpha_rc[n] + 2)),
            _fd_family("tb2", grid, ns, lambda rt, ax, n: rt.alpha_rc[n],
                       lambda rt, ax, n: (2 * n + a + lam) * (2 * n + 2 + a + lam) * t0, tb2_exact),
            _fd_family("dphi", grid, ns, lambda rt, ax, n: ax.H[n], lambda rt, ax, n: 1,
                       lambda rt, ax, n: -ax.r[n]),
            _fd_family("dlnhnt", grid, ns, lambda rt, ax, n: mp.log(rt.h[n]), lambda rt, ax, n: 1,
                       lambda rt, ax, n: ax.R[n]),
            _fd_family("alpha_prime", grid, ns, lambda rt, ax, n: rt.alpha_rc[n], lambda rt, ax, n: 1,
                       lambda rt, ax, n: ax.r[n + 1] - ax.r[n]),
        ]
    return reps


def _r_prime(rt, ax, n):
    """R_n'(t) exactly: t R_n = 2n+1+alpha+lambda - alpha_n, alpha_n' = r_{n+1} - r_n."""
    t = rt.params.tt
    return -((ax.r[n + 1] - ax.r[n]) + ax.R[n]) / t


def painleve_v_residual(t, y, dy, d2y, n, a, lam):
    mu0, mu1, mu2, mu3 = a**2 / 2, -(lam**2) / 2, 2 * n + a + lam + 1, mp.mpf(-1) / 2
    rhs = [
        (3 * y - 1) / (2 * y * (y - 1)) * dy**2,
        -dy / t,
        (y - 1) ** 2 / t**2 * mu0 * y,
        (y - 1) ** 2 / t**2 * mu1 / y,
        mu2 * y / t,
        mu3 * y * (y + 1) / (y - 1),
    ]
    return _residual([d2y], rhs)


def verify_painleve_v(grid: TGrid, n: int, tolerance=None) -> ResidualReport:
    """y = 1 - 1/(1 - R_n) against the Painleve V equation at the grid center.

    y' is exact (through R_n' from alpha_n' = r_{n+1} - r_n); y'' is a
    6th-order central difference of y'.
    """
    p = grid.params
    notes = []
    if p.lambda_is_zero:
        return _report("painleve_v", {}, grid.t0, grid.certified_digits, mp.mpf(0),
                       ["excluded: lambda = 0 makes y identically 0"])
    if n < 0 or n >= grid.N:
        raise DomainError(f"n={n} needs r_(n+1); grid has N={grid.N}")
    with mp.workdps(grid.tables[0].work_digits):
        a, lam = p.a, p.l

        def y_of(rt, ax):
            return 1 - 1 / (1 - ax.R[n])

        def dy_of(rt, ax):
            return -_r_prime(rt, ax, n) / (1 - ax.R[n]) ** 2

        rt0, ax0 = grid.tables[0], grid.aux[0]
        y, dy = y_of(rt0, ax0), dy_of(rt0, ax0)
        vals = grid.values(dy_of)
        d2y = fd_first(vals, 1, grid.step)
        bound = fd_truncation_bound(vals, 1, grid.step)
        res, scale = painleve_v_residual(grid.t0, y, dy, d2y, n, a, lam)
        if min(abs(y), abs(y - 1)) < mp.mpf("1e-3"):
            notes.append("conditioning: y close to 0 or 1")
        floor = mp.mpf(10) ** (-(grid.certified_digits - 5))
        tol = (10 * bound / scale + floor) if tolerance is None else mp.mpf(tolerance)
        notes.append(f"fd bound {mp.nstr(bound, 5)}")
    return _report("painleve_v", {n: (res, scale)}, grid.t0, grid.certified_digits, tol, notes)


def sigma_form_residual(t, s, ds, d2s, n, a, lam):
    nu = (mp.mpf(0), mp.mpf(-n), lam, -n - a)
    lhs = (t * d2s) ** 2
    bracket = (s - t * ds + 2 * ds**2 + mp.fsum(nu) * ds) ** 2
    prod = 4 * (nu[0] + ds) * (nu[1] + ds) * (nu[2] + ds) * (nu[3] + ds)
    return _residual([lhs], [bracket, -prod])


def verify_sigma_form(grid: TGrid, n: int, tolerance=None) -> ResidualReport:
    """sigma = H_n - n lambda against the Jimbo-Miwa-Okamoto sigma-form.

    sigma and sigma' = -r_n are exact; sigma'' is the central difference of
    -r_n across the grid.
    """
    p = grid.params
    if n < 1 or n > grid.N:
        raise DomainError(f"n={n} outside 1..{grid.N}")
    with mp.workdps(grid.tables[0].work_digits):
        a, lam = p.a, p.l
        ax0 = grid.aux[0]
        s = ax0.H[n] - n * lam
        ds = -ax0.r[n]
        vals = grid.values(lambda rt, ax: -ax.r[n])
        d2s = fd_first(vals, 1, grid.step)
        bound = fd_truncation_bound(vals, 1, grid.step)
        res, scale = sigma_form_residual(grid.t0, s, ds, d2s, n, a, lam)
        # (t s'')^2 moves by about 2 t^2 |s''| per unit error in s''
        fd_allow = 2 * grid.t0**2 * abs(d2s) * bound / scale
        floor = mp.mpf(10) ** (-(grid.certified_digits - 5))
        tol = (10 * fd_allow + floor) if tolerance is None else mp.mpf(tolerance)
        notes = [f"fd bound {mp.nstr(bound, 5)}"]
        if p.lambda_is_zero:
            notes.append("degenerate: classical Laguerre")
    return _report("sigma_form", {n: (res, scale)}, grid.t0, grid.certified_digits, tol, notes)


def identity_suite(recur: RecurrenceTable, aux: AuxTable | None = None, grid: TGrid | None = None) -> list:
    """All algebraic identity families; t-derivative ones when a grid is given."""
    aux = aux or aux_from_recurrence(recur)
    reps = verify_compatibility(recur, aux) + verify_discrete_system(recur)
    reps.append(hn_consistency(recur, aux))
    for n in (1, 2, 3):
        if n <= recur.N:
            reps.append(verify_ode(recur, n, ["0.5", "2", "7"]))
            reps[-1].identity = f"ode[n={n}]"
    if grid is not None:
        reps += verify_toda(grid)
        if not recur.params.lambda_is_zero:
            for n in range(1, min(grid.N, 3)):
                rep = verify_sigma_form(grid, n)
                rep.identity = f"sigma_form[n={n}]"
                reps.append(rep)
    return reps
