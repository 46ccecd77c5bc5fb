"""Finite-n ground truth from a moment table.

The Hankel matrix (mu_{i+j}) is factored as L D L^T with unit lower
triangular L.  The pivots are the norms h_n, their partial products the
Hankel determinants D_n, and row n of L^{-1} holds the monic orthogonal
polynomial P_n, so its sub-leading coefficient is p(n) = -L[n][n-1].

Hankel matrices of this kind are exponentially ill-conditioned (about one
decimal digit per order here), so every result carries ``certified_digits``:
the working digits minus the loss observed when the same factorization is
repeated on moments rounded to fewer digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import mpmath as mp

from ._numeric import dec
from .errors import ConsistencyError, DataIntegrityError, DomainError, PrecisionError
from .moments import MomentTable, WeightParams, build_moment_table
from .special import PrecisionCtx

SCHEMA_VERSION = 1

# digits dropped from the moments for the perturbation re-run
PERTURB_DIGITS = 15
# decimal digits of working precision budgeted per polynomial degree
DIGITS_PER_ORDER = 2


@dataclass(frozen=True)
class HankelFactorization:
    """L D L^T of the N x N moment matrix.

    ``D`` holds D_0 .. D_N, ``h`` the pivots h_0 .. h_{N-1}; ``lower`` the
    strictly lower part of L by rows.
    """

    D: tuple
    h: tuple
    lower: tuple
    work_digits: int
    certified_digits: int


@dataclass(frozen=True)
class RecurrenceTable:
    """Recurrence data for n = 0 .. N, all lists indexed by n.

    ``D`` runs to N+1 and ``p_sub`` to N+1 (so that alpha_N is defined);
    ``beta[0]`` is 0 by convention.
    """

    params: WeightParams
    N: int
    D: tuple
    h: tuple
    beta: tuple
    p_sub: tuple
    alpha_rc: tuple
    work_digits: int
    certified_digits: int
    target_digits: int
    meta: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> str:
        with mp.workdps(self.work_digits):
            doc = {
                "schema_version": SCHEMA_VERSION,
                "kind": "RecurrenceTable",
                "params": self.params.to_json(),
                "N": self.N,
                "precision": {
                    "work_digits": self.work_digits,
                    "certified_digits": self.certified_digits,
                    "target_digits": self.target_digits,
                },
                "D": [dec(x, self.certified_digits) for x in self.D],
                "h": [dec(x, self.certified_digits) for x in self.h],
                "beta": [dec(x, self.certified_digits) for x in self.beta],
                "p": [dec(x, self.certified_digits) for x in self.p_sub],
                "alpha": [dec(x, self.certified_digits) for x in self.alpha_rc],
            }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "RecurrenceTable":
        doc = json.loads(text)
        if doc.get("schema_version") != SCHEMA_VERSION or doc.get("kind") != "RecurrenceTable":
            raise DataIntegrityError("not a RecurrenceTable document of a supported version")
        pr = doc["precision"]
        with mp.workdps(pr["work_digits"]):
            conv = lambda key: tuple(mp.mpf(s) for s in doc[key])  # noqa: E731
            return cls(
                WeightParams.from_json(doc["params"]),
                doc["N"],
                conv("D"),
                conv("h"),
                conv("beta"),
                conv("p"),
                conv("alpha"),
                pr["work_digits"],
                pr["certified_digits"],
                pr["target_digits"],
            )

    def to_csv(self) -> str:
        """One row per n with decimal strings at the certified digits."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "D_n", "h_n", "beta_n", "p_n", "alpha_n"])
        digits = self.certified_digits
        with mp.workdps(self.work_digits):
            for n in range(self.N + 1):
                w.writerow([
                    n,
                    dec(self.D[n], digits),
                    dec(self.h[n], digits),
                    dec(self.beta[n], digits),
                    dec(self.p_sub[n], digits),
                    dec(self.alpha_rc[n], digits),
                ])
        return buf.getvalue()

    @property
    def tolerance(self):
        return mp.mpf(10) ** (-self.certified_digits)


@dataclass(frozen=True)
class MonicPolynomial:
    """Monic polynomial; ``coeffs[k]`` multiplies x**k."""

    coeffs: tuple

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return eval_poly_derivs(self, x)[0]


# --------------------------------------------------------------------------


def _ldl(mu, size):
    """Pivots and strictly lower rows of L for the size x size Hankel matrix."""
    d = []
    lower = []
    for i in range(size):
        row, srow = [], []  # srow[m] = L[i][m] * d[m]
        for k in range(i):
            v = (mu[i + k] - mp.fdot(srow[:k], lower[k])) / d[k]
            row.append(v)
            srow.append(v * d[k])
        piv = mu[2 * i] - mp.fdot(srow, row)
        if piv <= 0:
            raise PrecisionError(f"non-positive Hankel pivot at n={i}")
        d.append(piv)
        lower.append(row)
    return d, lower


def _factor_at(mu, size, digits):
    with mp.workdps(digits):
        mu = [+m for m in mu[: 2 * size - 1]]
        return _ldl(mu, size)


def hankel_ldl(table: MomentTable, N: int, certify: bool = True) -> HankelFactorization:
    """Factor (mu_{i+j})_{i,j<N}; D_n = prod_{j<n} h_j with h_j the pivots.

    With ``certify`` the factorization is repeated at ``PERTURB_DIGITS``
    fewer digits on correspondingly rounded moments; the worst relative
    drift of pivots and sub-diagonal entries gives the digit loss.
    """
    if N < 0 or 2 * N - 2 > 2 * table.n_max:
        raise DomainError(f"N={N} needs moments beyond mu_{2 * table.n_max}")
    W = table.work_digits
    if N == 0:
        with mp.workdps(W):
            return HankelFactorization((mp.mpf(1),), (), (), W, W)
    d, lower = _factor_at(table.mu, N, W)
    certified = W
    if certify:
        lo_digits = W - PERTURB_DIGITS
        try:
            d2, lower2 = _factor_at(table.mu, N, lo_digits)
        except PrecisionError:
            certified = 0
        else:
            with mp.workdps(W):
                worst = mp.inf
                for i in range(N):
                    worst = min(worst, -mp.log10(abs(d2[i] / d[i] - 1) + mp.mpf(10) ** (-W)))
                    if i:
                        a, b = lower[i][i - 1], lower2[i][i - 1]
                        worst = min(worst, -mp.log10(abs(a - b) / max(abs(a), 1) + mp.mpf(10) ** (-W)))
            loss = max(0, lo_digits - int(mp.floor(worst)))
            certified = W - loss - 1
    with mp.workdps(W):
        D = [mp.mpf(1)]
        for piv in d:
            D.append(D[-1] * piv)
    return HankelFactorization(tuple(D), tuple(d), tuple(tuple(r) for r in lower), W, certified)


def sub_leading(table: MomentTable, n: int):
    """p(n): x**(n-1) coefficient of P_n from the n x n moment system.

    Solves sum_k c_k mu_{i+k} = -mu_{i+n}, i < n, for the lower coefficients.
    """
    if n < 0 or 2 * n - 1 > 2 * table.n_max:
        raise DomainError(f"n={n} needs moments beyond mu_{2 * table.n_max}")
    with mp.workdps(table.work_digits):
        if n == 0:
            return mp.mpf(0)
        A = mp.matrix([[table.mu[i + k] for k in range(n)] for i in range(n)])
        rhs = mp.matrix([-table.mu[i + n] for i in range(n)])
        try:
            c = mp.lu_solve(A, rhs)
        except ZeroDivisionError as exc:
            raise PrecisionError(f"singular moment system at n={n}") from exc
        return c[n - 1]


def _check_invariants(D, h, beta, p_sub, alpha, N, certified):
    tol = mp.mpf(10) ** (-(certified - 3))
    if p_sub[0] != 0:
        raise ConsistencyError("p(0) must vanish")
    for n in range(N + 1):
        if D[n] <= 0 or h[n] <= 0:
            raise ConsistencyError(f"non-positive D or h at n={n}")
    for n in range(1, N + 1):
        if beta[n] <= 0:
            raise ConsistencyError(f"non-positive beta at n={n}")
        ratio = D[n + 1] * D[n - 1] / D[n] ** 2
        if abs(beta[n] - ratio) / beta[n] > tol:
            raise ConsistencyError(f"beta_n != D_(n+1) D_(n-1) / D_n^2 at n={n}")
    acc = mp.mpf(0)
    for n in range(1, N + 1):
        acc += alpha[n - 1]
        if abs(acc + p_sub[n]) / max(1, abs(p_sub[n])) > tol:
            raise ConsistencyError(f"telescoped sum of alpha != -p at n={n}")


def recurrence_coeffs(table: MomentTable, N: int, certify: bool = True) -> RecurrenceTable:
    """D, h, beta, p, alpha for n = 0 .. N; needs ``table.n_max >= N + 1``.

    alpha_n = p(n) - p(n+1) and beta_n = h_n / h_{n-1}.
    """
    if N < 0 or N + 1 > table.n_max:
        raise DomainError(f"N={N} needs a moment table with n_max >= {N + 1}")
    fac = hankel_ldl(table, N + 2, certify=certify)
    W = table.work_digits
    with mp.workdps(W):
        h = fac.h[: N + 1]
        D = fac.D[: N + 2]
        p_sub = [mp.mpf(0)] + [-fac.lower[n][n - 1] for n in range(1, N + 2)]
        alpha = [p_sub[n] - p_sub[n + 1] for n in range(N + 1)]
        beta = [mp.mpf(0)] + [h[n] / h[n - 1] for n in range(1, N + 1)]
        certified = fac.certified_digits - int(math.ceil(math.log10(N + 2)))
        _check_invariants(D, h, beta, p_sub, alpha, N, certified)
    return RecurrenceTable(
        table.params,
        N,
        tuple(D),
        tuple(h),
        tuple(beta),
        tuple(p_sub),
        tuple(alpha),
        W,
        certified,
        table.target_digits,
    )


def polynomial(recur: RecurrenceTable, n: int) -> MonicPolynomial:
    """P_n from P_{k+1} = (x - alpha_k) P_k - beta_k P_{k-1}, P_0 = 1."""
    if n < 0 or n > recur.N + 1:
        raise DomainError(f"degree {n} outside 0..{recur.N + 1}")
    with mp.workdps(recur.work_digits):
        prev, cur = [], [mp.mpf(1)]
        for k in range(n):
            nxt = [mp.mpf(0)] + cur  # x * P_k
            for i, c in enumerate(cur):
                nxt[i] -= recur.alpha_rc[k] * c
            for i, c in enumerate(prev):
                nxt[i] -= recur.beta[k] * c
            prev, cur = cur, nxt
        return MonicPolynomial(tuple(cur))


def eval_poly_derivs(poly: MonicPolynomial, x):
    """(P(x), P'(x), P''(x)) by Horner's scheme."""
    p0 = mp.mpf(0)
    p1 = mp.mpf(0)
    p2 = mp.mpf(0)
    x = mp.mpf(x)
    for c in reversed(poly.coeffs):
        p2 = p2 * x + 2 * p1
        p1 = p1 * x + p0
        p0 = p0 * x + c
    return p0, p1, p2


def eval_by_recurrence(recur: RecurrenceTable, n: int, x):
    """P_n(x) via the three-term recurrence; stable where Horner cancels."""
    prev, cur = mp.mpf(0), mp.mpf(1)
    for k in range(n):
        prev, cur = cur, (x - recur.alpha_rc[k]) * cur - recur.beta[k] * prev
    return cur


def gram_schmidt_oracle(table: MomentTable, N: int, work_digits: int | None = None) -> RecurrenceTable:
    """Brute-force oracle: orthogonalize 1, x, .., x^(N+1) explicitly.

    The inner product is <u, v> = sum_ij u_i v_j mu_{i+j}.  Shares no code
    with the factorization route.  Classical Gram-Schmidt on monomials loses
    digits in its own arithmetic (about the Hankel condition number), so it
    runs at ``work_digits`` (default twice the table's); the result is then
    limited by the moments alone.
    """
    if N < 0 or N + 1 > table.n_max:
        raise DomainError(f"N={N} needs a moment table with n_max >= {N + 1}")
    mu = table.mu
    W = work_digits or 2 * table.work_digits
    with mp.workdps(W):
        polys, norms = [], []
        for n in range(N + 2):
            # <x^n, P_k> = sum_j P_k[j] mu_{n+j}
            P = [mp.mpf(0)] * n + [mp.mpf(1)]
            for k in range(n):
                Pk = polys[k]
                c = mp.fsum(Pk[j] * mu[n + j] for j in range(len(Pk))) / norms[k]
                for j in range(len(Pk)):
                    P[j] -= c * Pk[j]
            hn = mp.fsum(P[i] * P[j] * mu[i + j] for i in range(n + 1) for j in range(n + 1))
            polys.append(P)
            norms.append(hn)
        p_sub = [mp.mpf(0)] + [polys[n][n - 1] for n in range(1, N + 2)]
        h = norms[: N + 1]
        D = [mp.mpf(1)]
        for x in norms[: N + 1]:
            D.append(D[-1] * x)
        alpha = [p_sub[n] - p_sub[n + 1] for n in range(N + 1)]
        beta = [mp.mpf(0)] + [h[n] / h[n - 1] for n in range(1, N + 1)]
    return RecurrenceTable(
        table.params, N, tuple(D), tuple(h), tuple(beta), tuple(p_sub), tuple(alpha),
        W, 0, table.target_digits, meta={"route": "gram_schmidt"},
    )


def hankel_work_digits(N: int, ctx: PrecisionCtx) -> int:
    """Working digits for an order-N table: target + guard + 2 digits per order."""
    return ctx.target_digits + ctx.guard_digits + DIGITS_PER_ORDER * (N + 2)


def exact_recurrence(
    params: WeightParams,
    N: int,
    ctx: PrecisionCtx,
    cross_check: bool = False,
    work_digits: int | None = None,
) -> RecurrenceTable:
    """Moments, factorization and recurrence data at a self-chosen precision.

    Starts at :func:`hankel_work_digits` (or ``work_digits``) and raises the
    precision until ``certified_digits >= ctx.target_digits``.  Non-positive
    pivots that survive every escalation mean the moments are inconsistent.
    """
    work = work_digits or hankel_work_digits(N, ctx)
    last_exc = None
    for _ in range(ctx.max_refinements + 1):
        wctx = ctx.with_work(work)
        table = build_moment_table(N + 1, params, wctx, cross_check=cross_check)
        try:
            rec = recurrence_coeffs(table, N)
        except PrecisionError as exc:
            last_exc = exc
            work = 2 * work
            continue
        if rec.certified_digits >= ctx.target_digits:
            rec.meta["moment_table"] = table
            return rec
        work += (ctx.target_digits - rec.certified_digits) + DIGITS_PER_ORDER * (N + 2)
    if last_exc is not None:
        raise DataIntegrityError(f"moment table stays indefinite after escalation: {last_exc}")
    raise PrecisionError(f"could not certify {ctx.target_digits} digits at N={N}")
