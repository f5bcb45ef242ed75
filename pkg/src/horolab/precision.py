"""Arbitrary-precision scaffolding on top of gmpy2 (MPFR).

All numeric kernels in this package run at an explicit bit precision. The
helpers here centralize three things:

* ``prec_ctx(bits)``: a context manager activating a gmpy2 context with the
  given significand precision. MPFR arithmetic is correctly rounded, so every
  result is deterministic for a given precision.
* conversion helpers (``to_mpfr``, ``mpfr_to_int``) that never lose bits by
  accident.
* decimal serialization with enough digits to round-trip the binary value
  (``ceil(p * log10(2)) + 3`` digits).

Exponential time sequences t_n = C e^{lambda n} need about
``lambda * n * log2(e)`` bits just to resolve the fractional part of t_n;
``exponential_policy`` implements the default budget with a 96-bit guard.
"""

from __future__ import annotations

import math

import gmpy2
from gmpy2 import mpfr

DEFAULT_PREC = 96
GUARD_BITS = 96

LOG2_E = math.log2(math.e)


def prec_ctx(bits: int):
    """Context manager: activate a fresh gmpy2 context with `bits` of precision."""
    if bits < 2:
        raise ValueError("precision must be at least 2 bits, got %r" % bits)
    return gmpy2.context(precision=int(bits))


def to_mpfr(x, bits: int) -> mpfr:
    """Convert x (int, float, str, Fraction, mpfr) to an mpfr at `bits` precision."""
    with prec_ctx(bits):
        if hasattr(x, "numerator") and not isinstance(x, int):
            return mpfr(x.numerator) / mpfr(x.denominator)
        return mpfr(x)


def mpfr_to_int(x) -> int:
    """Round x to the nearest integer, exactly (ties to even)."""
    return int(gmpy2.rint(x))


def exponential_policy(lam: float, n_max: int, guard: int = GUARD_BITS) -> int:
    """Default precision budget for t_n = e^{lam n}, n <= n_max."""
    return int(math.ceil(lam * n_max * LOG2_E)) + guard


def decimal_digits_for(bits: int) -> int:
    return int(math.ceil(bits * math.log10(2))) + 3


def mpfr_to_decimal(x) -> str:
    """Serialize an mpfr as a decimal string that round-trips at its own precision."""
    if gmpy2.is_nan(x) or gmpy2.is_infinite(x):
        raise ValueError("refusing to serialize non-finite value %r" % x)
    nd = decimal_digits_for(x.precision)
    digits, exp, _ = x.digits(10, nd)
    if digits.startswith("-"):
        sign, digits = "-", digits[1:]
    else:
        sign = ""
    if digits.strip("0") == "":
        return "0"
    # digits d1 d2 ... with value 0.d1d2... * 10^exp
    return "%s0.%se%d" % (sign, digits, exp)


def decimal_to_mpfr(s: str, bits: int) -> mpfr:
    with prec_ctx(bits):
        return mpfr(s)
