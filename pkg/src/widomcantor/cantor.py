"""Weakly equilibrium Cantor sets from quadratic preimages.

The set is built from gap ratios 0 < gamma_s < 1/4.  With r_0 = 1 and
r_s = gamma_s r_{s-1}^2, the polynomials

    P_1(x) = x - 1,    P_{2^{s+1}} = P_{2^s} (P_{2^s} + r_s)

define nested level sets E_s = {x : -r_s <= P_{2^s}(x) <= 0}, each a union
of 2^s closed intervals in [0, 1]; the Cantor set is their intersection.
The affine renormalization F_s = (2/r_s) P_{2^s} + 1 satisfies

    F_0 = 2x - 1,    F_{s+1} = (F_s^2 - 1)/(2 gamma_{s+1}) + 1

and E_s = F_s^{-1}([-1, 1]).  On level-s interval number j (from the left),
F_s is monotone; it is decreasing for even j and increasing for odd j once
s >= 1, and the endpoint values follow the sign pattern +1, -1, -1, +1
repeating across interval pairs.  2^s T = r_s F_s / 2 is the degree-2^s
Chebyshev polynomial of the set, with sup norm r_s / 2.

Endpoints are computed by a stable closed-form descent through the quadratic
chain (branch selected from the bits of the interval index) and then polished
by Newton iteration on F_s = ±1, so every stored endpoint is accurate to the
build precision with protective headroom.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

from mpmath import mp, mpf, workprec

from .numerics import (
    DEFAULT_POLICY,
    LogScalar,
    PrecisionExhausted,
    PrecisionPolicy,
    as_mpf,
    ls_add,
    ls_div,
    ls_mul,
    with_escalation,
)
from .sequences import (
    HorizonExceeded,
    RegularizedSequence,
    SequenceError,
)

__all__ = [
    "TailCertificate",
    "CertificateUnavailable",
    "Gamma",
    "Level",
    "GapLocation",
    "CantorModel",
    "MAX_LEVEL",
]

MAX_LEVEL = 16  # hard cap; endpoint precision grows like 2^s

Raw = Union[int, float, str, mpf]


class CertificateUnavailable(RuntimeError):
    """A capacity or tail quantity was requested for a direct gap-ratio
    specification that carries no tail certificate."""


def _parse_ratio(raw: Raw, prec: int) -> mpf:
    # reuse the sequence parameter parser ('1/6', 'e^-2', decimals...)
    from .sequences import _param

    return _param(raw, prec)


@dataclass(frozen=True)
class TailCertificate:
    """Certified bracket for the weighted log tails of a gap-ratio sequence.

    Valid for every index m >= start: each gamma_m lies in [lo, hi], so the
    suffix sum sum_{j>=0} 2^{-j} ln gamma_{m+j} lies in [2 ln lo, 2 ln hi].
    A constant tail is the exact special case lo == hi.
    """

    lo: Raw
    hi: Raw
    start: int

    @staticmethod
    def constant(value: Raw, start: int = 1) -> "TailCertificate":
        return TailCertificate(value, value, start)

    @staticmethod
    def bounded(lo: Raw, hi: Raw, start: int = 1) -> "TailCertificate":
        return TailCertificate(lo, hi, start)

    def bounds(self, prec: int) -> Tuple[mpf, mpf]:
        with workprec(prec):
            lo = _parse_ratio(self.lo, prec)
            hi = _parse_ratio(self.hi, prec)
            if not (0 < lo <= hi < mpf(1) / 4):
                raise SequenceError("tail certificate bounds must lie in (0, 1/4)")
            return lo, hi

    def suffix_log_bracket(self, prec: int) -> Tuple[mpf, mpf]:
        """Bracket for sum_{j>=0} 2^{-j} ln gamma_{m+j}, any m >= start."""
        lo, hi = self.bounds(prec)
        with workprec(prec):
            return 2 * mp.log(lo), 2 * mp.log(hi)


class Gamma:
    """Gap-ratio sequence, either derived from a regularized scale sequence
    (gamma_n = s(2^{n+1}) / (6 s(2^n)^2), automatically <= 1/6) or given
    directly as a table of values in (0, 1/4).
    """

    def __init__(self, mode: str, *, reg: Optional[RegularizedSequence] = None,
                 values: Optional[tuple] = None, extension: str = "hold",
                 tail: Optional[TailCertificate] = None):
        self.mode = mode
        self.reg = reg
        self.values = values
        self.extension = extension
        if mode == "derived":
            if reg is None:
                raise ValueError("derived mode needs a regularized sequence")
            self.tail = None  # exact closed form, no certificate needed
            self.small_gamma = True  # gamma <= 1/6 from (ln s_n)/n monotone
        elif mode == "direct":
            if not values:
                raise ValueError("direct mode needs at least one ratio")
            check = 192
            with workprec(check):
                quarter = mpf(1) / 4
                sixth = mpf(1) / 6
                small = True
                for i, raw in enumerate(values):
                    v = _parse_ratio(raw, check)
                    if not (0 < v < quarter):
                        raise SequenceError(
                            f"gamma_{i + 1} = {v} outside (0, 1/4)"
                        )
                    small = small and v <= sixth
                if extension == "hold" and tail is None:
                    tail = TailCertificate.constant(values[-1], len(values))
                if tail is not None:
                    lo, hi = tail.bounds(check)
                    small = small and hi <= sixth
            self.tail = tail
            self.small_gamma = small
        else:
            raise ValueError(f"unknown gamma mode {mode!r}")

    @staticmethod
    def derived(reg: RegularizedSequence) -> "Gamma":
        return Gamma("derived", reg=reg)

    @staticmethod
    def direct(values: Sequence[Raw], extension: str = "hold",
               tail: Optional[TailCertificate] = None) -> "Gamma":
        return Gamma("direct", values=tuple(values), extension=extension, tail=tail)

    # -- pointwise access ---------------------------------------------------

    def log_gamma(self, n: int, prec: int) -> mpf:
        if n < 1:
            raise ValueError("gamma index must be >= 1")
        with workprec(prec):
            if self.mode == "derived":
                lo_hi = self.reg.log_value  # ln s at dyadic indices
                return lo_hi(1 << (n + 1), prec) - mp.log(6) \
                    - 2 * lo_hi(1 << n, prec)
            if n <= len(self.values):
                v = _parse_ratio(self.values[n - 1], prec)
            elif self.extension == "hold":
                v = _parse_ratio(self.values[-1], prec)
            else:
                raise HorizonExceeded(
                    f"gamma_{n} beyond finite table of length {len(self.values)}"
                )
            return mp.log(v)

    def ratio(self, n: int, prec: int) -> mpf:
        with workprec(prec):
            return mp.exp(self.log_gamma(n, prec))

    # -- tails --------------------------------------------------------------

    def suffix_log_bracket(self, m: int, prec: int) -> Tuple[mpf, mpf]:
        """Bracket for tau_m = sum_{j>=0} 2^{-j} ln gamma_{m+j}.

        Derived mode is exact: the sum telescopes to -2 ln(6 s(2^m)).
        Direct mode sums explicit prefix terms and closes with the tail
        certificate.
        """
        with workprec(prec):
            if self.mode == "derived":
                t = -2 * (mp.log(6) + self.reg.log_value(1 << m, prec))
                return t, t
            if self.tail is None:
                raise CertificateUnavailable(
                    "direct gap ratios without a tail certificate do not "
                    "determine capacities; attach a TailCertificate"
                )
            start = max(self.tail.start, 1)
            clo, chi = self.tail.suffix_log_bracket(prec)
            if m >= start:
                return clo, chi
            # explicit terms m .. start-1, then the certified suffix
            head = mpf(0)
            for j in range(start - m):
                head += self.log_gamma(m + j, prec) / (1 << j)
            scale = mpf(1) / (1 << (start - m))
            return head + scale * clo, head + scale * chi


@dataclass(frozen=True)
class Level:
    """One refinement level: 2^(s+1) endpoints of the 2^s closed intervals,
    in increasing order, plus ln r_s.  Endpoints carry headroom beyond the
    nominal precision."""

    s: int
    prec: int
    endpoints: tuple
    log_r: mpf

    def intervals(self) -> Tuple[Tuple[mpf, mpf], ...]:
        e = self.endpoints
        return tuple((e[2 * j], e[2 * j + 1]) for j in range(len(e) // 2))

    def endpoint_sign(self, i: int) -> int:
        """Value of F_s at endpoint i: the pattern +1,-1,-1,+1 repeating
        (level 0 is the single increasing interval -1,+1)."""
        if self.s == 0:
            return -1 if i == 0 else 1
        return 1 if i % 4 in (0, 3) else -1


@dataclass(frozen=True)
class GapLocation:
    """Where a point sits relative to the set: in the unbounded left/right
    complement component, in a bounded gap first opened at level s0 with
    exact endpoints (alpha, beta), or inside every computed level."""

    kind: str  # 'unbounded_left' | 'unbounded_right' | 'bounded' | 'inside'
    s0: int
    alpha: Optional[mpf]
    beta: Optional[mpf]

    @property
    def exterior(self) -> bool:
        return self.kind in ("unbounded_left", "unbounded_right")


class CantorModel:
    """Levels, endpoint sets and scalar evaluations for one gap-ratio
    sequence.  Level s costs about 2^s endpoint solves at O(2^s) bits, so
    s_max is capped; scalar quantities (capacities, Green values) never
    build levels and are available far deeper.
    """

    def __init__(self, gamma: Gamma, policy: PrecisionPolicy = DEFAULT_POLICY,
                 s_max: int = 12):
        if not (0 <= s_max <= MAX_LEVEL):
            raise ValueError(f"s_max must be in [0, {MAX_LEVEL}]")
        self.gamma = gamma
        self.policy = policy
        self.s_max = s_max
        self._levels: dict = {}
        self._log_r_cache: dict = {}
        self._lock = threading.RLock()

    # -- scalar layer -------------------------------------------------------

    def _build_bits(self, s: int) -> int:
        # headroom so F(endpoint) = ±1 holds to ~2^-bits(s) after polish:
        # |F_s'| at endpoints is about prod(1/gamma) <= 8^s
        return self.policy.bits(s) + 3 * s + 64

    def log_r(self, s: int, prec: int) -> mpf:
        """ln r_s with r_0 = 1, r_s = gamma_s r_{s-1}^2."""
        if s < 0:
            raise ValueError("level must be nonnegative")
        key = (s, prec)
        with self._lock:
            hit = self._log_r_cache.get(key)
        if hit is not None:
            return hit
        with workprec(prec):
            acc = mpf(0)
            for k in range(1, s + 1):
                acc = 2 * acc + self.gamma.log_gamma(k, prec)
        with self._lock:
            self._log_r_cache[key] = acc
        return acc

    def _r(self, s: int, prec: int) -> mpf:
        with workprec(prec):
            return mp.exp(self.log_r(s, prec))

    def log_cap_level(self, s: int, prec: int) -> mpf:
        """ln Cap(E_s) = (ln r_s - ln 4) / 2^s."""
        with workprec(prec):
            return (self.log_r(s, prec) - 2 * mp.log(2)) / (1 << s)

    def log_cap_K(self, prec: int) -> Tuple[mpf, mpf]:
        """Bracket for ln Cap(K) = sum 2^{-n} ln gamma_n (exact in derived
        mode, certificate-driven in direct mode)."""
        lo, hi = self.gamma.suffix_log_bracket(1, prec)
        with workprec(prec):
            return lo / 2, hi / 2

    def cap_gap_bracket(self, s: int, prec: int) -> Tuple[mpf, mpf]:
        """Bracket for ln Cap(E_s) - ln Cap(K) = 2^{-s}(-ln 4 - tau_{s+1}/2);
        always positive since gamma < 1/4."""
        tlo, thi = self.gamma.suffix_log_bracket(s + 1, prec)
        with workprec(prec):
            scale = mpf(1) / (1 << s)
            ln4 = 2 * mp.log(2)
            return scale * (-ln4 - thi / 2), scale * (-ln4 - tlo / 2)

    def capacity_tail_index(self, eps, prec: int, hard_cap: int = 4096) -> int:
        """Smallest s whose certified capacity gap is at most eps."""
        from .numerics import DepthExhausted

        with workprec(prec):
            eps = mpf(eps)
            if eps <= 0:
                raise ValueError("eps must be positive")
            for s in range(hard_cap + 1):
                if self.cap_gap_bracket(s, prec)[1] <= eps:
                    return s
        raise DepthExhausted(
            f"capacity gap did not reach {eps} within {hard_cap} levels"
        )

    # -- pointwise evaluation ----------------------------------------------

    def eval_F(self, s: int, x, bits: Optional[int] = None) -> LogScalar:
        """F_s(x) as a LogScalar, escalating precision until the quadratic
        cascade is free of flagged cancellation."""
        start = bits if bits is not None else self.policy.base_bits
        xv = as_mpf(x, start + 64)

        def compute(b: int) -> LogScalar:
            logg = [self.gamma.log_gamma(k, b) for k in range(1, s + 1)]
            with workprec(b):
                F = LogScalar.from_real(2 * xv - 1, b)
                minus_one = LogScalar.from_log(-1, mpf(0), b)
                one = LogScalar.one(b)
                ln2 = mp.log(2)
                for lg in logg:
                    num = ls_add(ls_mul(F, F), minus_one)
                    den = LogScalar.from_log(1, lg + ln2, b)
                    F = ls_add(ls_div(num, den), one)
                    if F.flagged:
                        break
                return F

        return with_escalation(compute, start, self.policy.max_bits)

    def eval_T(self, s: int, x, bits: Optional[int] = None) -> LogScalar:
        """Chebyshev value T_{2^s}(x) = (r_s/2) F_s(x)."""
        F = self.eval_F(s, x, bits)
        with workprec(F.prec):
            scale = LogScalar.from_log(
                1, self.log_r(s, F.prec) - mp.log(2), F.prec)
            return ls_mul(F, scale)

    def eval_P(self, s: int, x, bits: Optional[int] = None) -> LogScalar:
        """P_{2^s}(x) = (r_s/2)(F_s(x) - 1); zero at persistent endpoints."""
        F = self.eval_F(s, x, bits)
        with workprec(F.prec):
            minus_one = LogScalar.from_log(-1, mpf(0), F.prec)
            shifted = ls_add(F, minus_one)
            scale = LogScalar.from_log(
                1, self.log_r(s, F.prec) - mp.log(2), F.prec)
            return ls_mul(shifted, scale)

    def contains(self, s: int, x, bits: Optional[int] = None) -> bool:
        """Membership in E_s via |F_s(x)| <= 1, with a resolution-sized
        boundary allowance."""
        F = self.eval_F(s, x, bits)
        if F.sign == 0:
            return True
        return F.logmag <= mpf(2) ** (-(F.prec // 2))

    def _F_df(self, s: int, x: mpf, prec: int) -> Tuple[mpf, mpf]:
        """Plain-mpf F_s and F_s' for Newton polishing."""
        with workprec(prec):
            F = 2 * x - 1
            dF = mpf(2)
            for k in range(1, s + 1):
                g = self.gamma.ratio(k, prec)
                dF = F * dF / g
                F = (F * F - 1) / (2 * g) + 1
            return F, dF

    def _polish(self, s: int, x: mpf, target: int, prec: int) -> mpf:
        """Newton iteration on F_s(x) = target (±1) from a closed-form seed."""
        with workprec(prec + 32):
            x = +x
            tol = mpf(2) ** (-(prec + 8))
            for _ in range(6):
                F, dF = self._F_df(s, x, prec + 32)
                step = (F - target) / dF
                x = x - step
                if abs(step) <= tol * max(abs(x), mpf(2) ** -64):
                    break
            return x

    # -- endpoint solving ---------------------------------------------------

    def _preimage(self, t: int, j: int, y: mpf, prec: int) -> mpf:
        """The solution of P_{2^t}(x) = y lying in interval j of level t,
        for -r_t <= y <= 0, via the stable quadratic chain.  The branch at
        each stage follows the bits of j: consecutive equal bits take the
        root near zero, differing bits the root near -r."""
        with workprec(prec):
            w = +y
            for k in range(t, 1, -1):
                r = self._r(k - 1, prec)
                b_k = (j >> (t - k)) & 1
                b_prev = (j >> (t - k + 1)) & 1
                disc = mp.sqrt(r * r + 4 * w)
                if b_k == b_prev:
                    w = 2 * w / (r + disc)
                else:
                    w = -(r + disc) / 2
            if t == 0:
                return w + 1
            b1 = (j >> (t - 1)) & 1
            disc = mp.sqrt(1 + 4 * w)
            if b1:
                return (1 + disc) / 2
            return -2 * w / (1 + disc)

    def _new_points(self, s: int, j_parent: int, prec: int) -> Tuple[mpf, mpf]:
        """The two endpoints opened inside parent interval j_parent when
        refining level s-1 to level s; they solve F_s = -1."""
        with workprec(prec):
            g = self.gamma.ratio(s, prec)
            rq = self._r(s - 1, prec)
            d = mp.sqrt(1 - 4 * g)
            p_near = -2 * g * rq / (1 + d)   # root of z^2 + r z + gamma r^2 near 0
            p_far = -rq * (1 + d) / 2        # companion root near -r
            increasing = (s == 1) or (j_parent % 2 == 1)
            y_u, y_v = (p_far, p_near) if increasing else (p_near, p_far)
            u = self._preimage(s - 1, j_parent, y_u, prec)
            v = self._preimage(s - 1, j_parent, y_v, prec)
            u = self._polish(s, u, -1, prec)
            v = self._polish(s, v, -1, prec)
            return u, v

    # -- levels -------------------------------------------------------------

    def level(self, s: int) -> Level:
        if not (0 <= s <= self.s_max):
            raise ValueError(f"level {s} outside [0, {self.s_max}]")
        with self._lock:
            hit = self._levels.get(s)
        if hit is not None:
            return hit
        lvl = self._build(s)
        with self._lock:
            self._levels[s] = lvl
        return lvl

    def _build(self, s: int) -> Level:
        prec = self._build_bits(s)
        if s == 0:
            lvl = Level(0, self.policy.bits(0), (mpf(0), mpf(1)), mpf(0))
            return lvl
        parent = self.level(s - 1)
        with workprec(prec):
            pts = []
            pairs = parent.intervals()
            for j, (a, b) in enumerate(pairs):
                # persistent endpoints satisfy F_s = +1; re-polish at the
                # finer precision ({0,1} are exact already)
                a = +a if a == 0 or a == 1 else self._polish(s, +a, 1, prec)
                b = +b if b == 0 or b == 1 else self._polish(s, +b, 1, prec)
                u, v = self._new_points(s, j, prec)
                if not (a < u < v < b):
                    raise PrecisionExhausted(
                        f"level {s} interval {j} collapsed at {prec} bits"
                    )
                pts.extend((a, u, v, b))
            return Level(s, self.policy.bits(s), tuple(pts),
                         self.log_r(s, prec))

    # -- gap location -------------------------------------------------------

    def locate_gap(self, x0) -> GapLocation:
        """Classify x0 against the set by descending the single chain of
        intervals containing it; two endpoint solves per level."""
        x = as_mpf(x0, self._build_bits(self.s_max) + 64)
        if x < 0:
            return GapLocation("unbounded_left", 0, None, None)
        if x > 1:
            return GapLocation("unbounded_right", 0, None, None)
        j = 0
        for s in range(1, self.s_max + 1):
            prec = self._build_bits(s)
            while True:
                u, v = self._new_points(s, j, prec)
                with workprec(prec):
                    guard = mpf(2) ** (-(prec // 2))
                    near_edge = (u < x < v) and min(x - u, v - x) < guard
                if not near_edge:
                    break
                if prec >= self.policy.max_bits:
                    raise PrecisionExhausted(
                        f"cannot separate {x} from a gap endpoint at level {s}"
                    )
                prec = min(2 * prec, self.policy.max_bits)
            if x <= u:
                j = 2 * j
            elif x >= v:
                j = 2 * j + 1
            else:
                return GapLocation("bounded", s, u, v)
        return GapLocation("inside", self.s_max, None, None)
