"""Small helpers for exact parameter handling and decimal I/O."""

from __future__ import annotations

import hashlib
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import mpmath as mp
from mpmath import libmp


def to_mpf(x):
    """Convert ``x`` to an mpf at the *current* working precision.

    Floats go through their shortest decimal repr so that ``1.3`` means
    thirteen tenths at any precision, not the nearest double.
    """
    if isinstance(x, mp.mpf):
        return +x
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    if isinstance(x, float):
        return mp.mpf(repr(x))
    return mp.mpf(x)


def exact_param(x):
    """Normalize a parameter to an exact value: Fraction, or mpf as given."""
    if isinstance(x, mp.mpf):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a parameter value")
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(str(x))


def exact_key(x):
    """Hashable, precision-independent identity of a parameter value."""
    if isinstance(x, mp.mpf):
        return ("mpf", x._mpf_)
    if isinstance(x, float):
        return ("dec", repr(x))
    if isinstance(x, Fraction):
        return ("frac", x.numerator, x.denominator)
    return ("dec", str(x))


def param_str(x) -> str:
    """Decimal string for a parameter value, lossless for mpf inputs."""
    if isinstance(x, mp.mpf):
        return libmp.to_str(x._mpf_, libmp.repr_dps(x.context.prec) + 5)
    if isinstance(x, Fraction):
        d = x.denominator
        for q in (2, 5):
            while d % q == 0:
                d //= q
        if d != 1:
            return f"{x.numerator}/{x.denominator}"
        if x.denominator == 1:
            return str(x.numerator)
        # terminating decimal
        k = 0
        while (x * 10**k).denominator != 1:
            k += 1
        n = x.numerator * 10**k // x.denominator
        sign = "-" if n < 0 else ""
        digits = str(abs(n)).rjust(k + 1, "0")
        return f"{sign}{digits[:-k]}.{digits[-k:]}"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def round_trip_digits(prec_bits: int) -> int:
    """Decimal digits that make a binary value survive str -> mpf."""
    return libmp.repr_dps(prec_bits)


def dec(x, digits: int | None = None) -> str:
    """Decimal string of an mpf.

    Without ``digits`` the string round-trips bit-exactly at the current
    precision.
    """
    if digits is None:
        digits = round_trip_digits(mp.mp.prec)
    x = mp.mpf(x)
    if not x:
        return "0"
    return libmp.to_str(x._mpf_, max(1, int(digits)))


def log10_abs(x):
    if not x:
        return -mp.inf
    return mp.log10(abs(x))


def agreement_digits(a, b, scale=None):
    """Number of leading decimal digits on which ``a`` and ``b`` agree.

    Measured relative to ``max(1, |scale|)`` (``scale`` defaults to ``b``).
    """
    ref = abs(b if scale is None else scale)
    ref = ref if ref > 1 else mp.mpf(1)
    diff = abs(a - b)
    if not diff:
        return mp.inf
    return -mp.log10(diff / ref)


def atomic_write(path, data: str | bytes) -> None:
    """Write via a temporary sibling and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
