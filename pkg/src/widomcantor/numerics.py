"""Sign/log-magnitude scalars and precision policy.

Every magnitude in this package that can under- or overflow hardware floats
(scale factors r_s ~ exp(-c 2^s), polynomial values at exterior points
~ exp(+c 2^s), capacity powers, exp[n g]) is carried as a LogScalar: an exact
sign in {-1, 0, +1} plus the natural log of the absolute value stored as an
mpmath mpf at a stated working precision.  Addition is log-sum-exp; severe
cancellation is detected and flagged so callers can retry at doubled
precision.

The precision policy ties working precision to construction depth: endpoint
separations at level s shrink like r_s, which costs Theta(2^s) bits to
resolve, hence bits(s) = base_bits + slope_bits * 2^s.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, TypeVar

from mpmath import mp, mpf, workprec
import mpmath

__all__ = [
    "LogScalar",
    "PrecisionPolicy",
    "PrecisionExhausted",
    "DepthExhausted",
    "DEFAULT_POLICY",
    "as_mpf",
    "ls_mul",
    "ls_add",
    "ls_cmp",
    "ls_div",
    "ls_neg",
    "ls_abs",
    "ls_pow_int",
    "with_escalation",
]

_LN2 = None  # computed lazily at need, per working precision


def as_mpf(x, prec: int) -> mpf:
    """Convert to mpf without silently rounding at the ambient precision:
    mpf inputs pass through bit-exact, everything else converts at prec."""
    if isinstance(x, mpf):
        return x
    with workprec(prec):
        return mpf(x)


class PrecisionExhausted(RuntimeError):
    """Raised when doubling precision up to the configured ceiling still
    leaves a severely cancelled result."""


class DepthExhausted(RuntimeError):
    """Raised when a refinement loop hits its depth ceiling before reaching
    the requested accuracy."""


@dataclass(frozen=True)
class PrecisionPolicy:
    """Working-precision schedule.

    bits(s) is used when constructing level-s endpoint data; pointwise
    evaluations start at base_bits and escalate on cancellation flags up to
    max_bits.
    """

    base_bits: int = 256
    slope_bits: int = 4
    max_bits: int = 1 << 20

    def __post_init__(self) -> None:
        if self.base_bits < 64:
            raise ValueError("base_bits must be at least 64")
        if self.slope_bits < 0:
            raise ValueError("slope_bits must be nonnegative")
        if self.max_bits < self.base_bits:
            raise ValueError("max_bits below base_bits")

    def bits(self, s: int) -> int:
        if s < 0:
            raise ValueError("level must be nonnegative")
        return self.base_bits + self.slope_bits * (1 << s)


DEFAULT_POLICY = PrecisionPolicy()


@dataclass(frozen=True)
class LogScalar:
    """sign * exp(logmag) with an exact sign and a high-precision logmag.

    sign == 0 encodes exact zero; logmag is then -inf by convention.
    flagged propagates through arithmetic once a severe cancellation has
    contaminated a value.
    """

    sign: int
    logmag: mpf
    prec: int
    flagged: bool = False

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(prec: int) -> "LogScalar":
        return LogScalar(0, mpf("-inf"), prec)

    @staticmethod
    def one(prec: int) -> "LogScalar":
        return LogScalar(1, mpf(0), prec)

    @staticmethod
    def from_real(x, prec: int) -> "LogScalar":
        with workprec(prec):
            v = mpf(x)
            if v == 0:
                return LogScalar.zero(prec)
            return LogScalar(1 if v > 0 else -1, mp.log(abs(v)), prec)

    @staticmethod
    def from_log(sign: int, logmag, prec: int) -> "LogScalar":
        if sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")
        if sign == 0:
            return LogScalar.zero(prec)
        with workprec(prec):
            return LogScalar(sign, mpf(logmag), prec)

    # -- accessors ----------------------------------------------------------

    def value(self) -> mpf:
        """Materialize as an mpf.  Safe at any magnitude: mpf exponents are
        unbounded."""
        if self.sign == 0:
            return mpf(0)
        with workprec(self.prec):
            return self.sign * mp.exp(self.logmag)

    def is_zero(self) -> bool:
        return self.sign == 0

    def with_flag(self, flagged: bool = True) -> "LogScalar":
        return LogScalar(self.sign, self.logmag, self.prec, flagged)

    # -- operators ----------------------------------------------------------

    def __mul__(self, other: "LogScalar") -> "LogScalar":
        return ls_mul(self, other)

    def __add__(self, other: "LogScalar") -> "LogScalar":
        return ls_add(self, other)

    def __sub__(self, other: "LogScalar") -> "LogScalar":
        return ls_add(self, ls_neg(other))

    def __neg__(self) -> "LogScalar":
        return ls_neg(self)

    def __lt__(self, other: "LogScalar") -> bool:
        return ls_cmp(self, other) < 0

    def __le__(self, other: "LogScalar") -> bool:
        return ls_cmp(self, other) <= 0

    def __gt__(self, other: "LogScalar") -> bool:
        return ls_cmp(self, other) > 0

    def __ge__(self, other: "LogScalar") -> bool:
        return ls_cmp(self, other) >= 0

    def __repr__(self) -> str:
        if self.sign == 0:
            return "LogScalar(0)"
        s = "+" if self.sign > 0 else "-"
        return f"LogScalar({s}, ln={mpmath.nstr(self.logmag, 12)}, prec={self.prec})"


def _join_prec(a: LogScalar, b: LogScalar) -> int:
    return max(a.prec, b.prec)


def ls_neg(a: LogScalar) -> LogScalar:
    return LogScalar(-a.sign, a.logmag, a.prec, a.flagged)


def ls_abs(a: LogScalar) -> LogScalar:
    return LogScalar(abs(a.sign), a.logmag, a.prec, a.flagged)


def ls_mul(a: LogScalar, b: LogScalar) -> LogScalar:
    prec = _join_prec(a, b)
    flagged = a.flagged or b.flagged
    if a.sign == 0 or b.sign == 0:
        return LogScalar(0, mpf("-inf"), prec, flagged)
    with workprec(prec):
        return LogScalar(a.sign * b.sign, a.logmag + b.logmag, prec, flagged)


def ls_div(a: LogScalar, b: LogScalar) -> LogScalar:
    if b.sign == 0:
        raise ZeroDivisionError("LogScalar division by exact zero")
    prec = _join_prec(a, b)
    flagged = a.flagged or b.flagged
    if a.sign == 0:
        return LogScalar(0, mpf("-inf"), prec, flagged)
    with workprec(prec):
        return LogScalar(a.sign * b.sign, a.logmag - b.logmag, prec, flagged)


def ls_add(a: LogScalar, b: LogScalar) -> LogScalar:
    """Log-sum-exp addition.

    Exact zero is produced only when a and b have opposite signs and
    bit-identical logmag.  Otherwise, if the result magnitude drops below
    2^(-prec/2) times the larger operand, the result carries a cancellation
    flag: the caller has lost half its working bits and should escalate.
    """
    prec = _join_prec(a, b)
    flagged = a.flagged or b.flagged
    if a.sign == 0:
        return LogScalar(b.sign, b.logmag, prec, flagged)
    if b.sign == 0:
        return LogScalar(a.sign, a.logmag, prec, flagged)
    # order so that |big| >= |small|
    if a.logmag >= b.logmag:
        big, small = a, b
    else:
        big, small = b, a
    if big.sign != small.sign and big.logmag == small.logmag:
        return LogScalar(0, mpf("-inf"), prec, flagged)
    with workprec(prec):
        d = small.logmag - big.logmag  # <= 0
        if big.sign == small.sign:
            logmag = big.logmag + mpmath.log1p(mp.exp(d))
        else:
            # 1 - exp(d) in (0, 1); d < 0 strictly here
            logmag = big.logmag + mp.log(-mpmath.expm1(d))
            if big.logmag - logmag > prec * mp.log(2) / 2:
                flagged = True
        return LogScalar(big.sign, logmag, prec, flagged)


def ls_cmp(a: LogScalar, b: LogScalar) -> int:
    """Total order consistent with the represented reals: -1, 0 or +1."""
    if a.sign != b.sign:
        return -1 if a.sign < b.sign else 1
    if a.sign == 0:
        return 0
    if a.logmag == b.logmag:
        return 0
    bigger_mag = 1 if a.logmag > b.logmag else -1
    return bigger_mag * a.sign


def ls_pow_int(a: LogScalar, k: int) -> LogScalar:
    if k == 0:
        return LogScalar.one(a.prec)
    if a.sign == 0:
        if k < 0:
            raise ZeroDivisionError("0 to a negative power")
        return LogScalar.zero(a.prec)
    sign = a.sign if k % 2 else 1
    with workprec(a.prec):
        return LogScalar(sign, a.logmag * k, a.prec, a.flagged)


T = TypeVar("T")


def with_escalation(
    compute: Callable[[int], T],
    start_bits: int,
    max_bits: int,
    is_clean: Callable[[T], bool] = lambda r: not getattr(r, "flagged", False),
) -> T:
    """Run compute(bits), doubling bits while the result is cancellation
    flagged.  Raises PrecisionExhausted past max_bits."""
    bits = start_bits
    while True:
        result = compute(bits)
        if is_clean(result):
            return result
        if bits >= max_bits:
            raise PrecisionExhausted(
                f"cancellation persists at {bits} bits (ceiling {max_bits})"
            )
        bits = min(2 * bits, max_bits)
