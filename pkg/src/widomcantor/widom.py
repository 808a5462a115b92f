"""Widom factors of the models: sup and L2 norms of Chebyshev polynomials
against the capacity scaling, residual factors at an external pole, and the
certified lower-bound checks.

At dyadic degrees n = 2^s everything is closed-form in the gap ratios:
the Chebyshev sup norm is r_s / 2, so

    ln W_sup(2^s)  = ln(r_s/2) - 2^s ln Cap(set)
    ln W_2(2^s)    = ln W_sup(2^s) + (1/2) ln(1 - 2 gamma_{s+1})

where the L2 norm is taken against the equilibrium measure; the L2 identity
needs every ratio <= 1/6.  Capacities enter through certified tail brackets,
so each factor comes as a two-sided bracket (degenerate when the tail is
exact, as in derived mode).

The lower-bound checks: for a model derived from a regular sequence c,

    W_2(n) >= sqrt(6) c_n              (minimum over a dyadic block sits at
                                        its left edge, so block degrees
                                        inherit the dyadic bound)
    W_res(x0, n) >= (sqrt(6) c_n / 2)^(1/tau)

with tau the Harnack comparison constant between x0 and infinity in the
complement; the checks consume its certified upper bound, which weakens the
exponent in the safe direction.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import List, Optional, Tuple

from mpmath import mp, mpf, workprec

from .cantor import CantorModel, CertificateUnavailable
from .numerics import LogScalar, as_mpf, ls_div
from .potential import (
    GreenBracket,
    HarnackBracket,
    green_set_bracket,
    harnack_bracket,
    harnack_one_slit,
)

__all__ = [
    "FactorBracket",
    "widom_sup_dyadic",
    "widom_l2_dyadic",
    "widom_l2_block_lower",
    "ResidualPolynomial",
    "residual_widom_bracket",
    "alternating_set",
    "verify_alternation",
    "Thm1Row",
    "check_thm1",
    "Thm2Row",
    "check_thm2",
]


@dataclass(frozen=True)
class FactorBracket:
    """Certified bracket for one Widom factor at degree n = 2^s."""

    family: str  # 'sup' | 'l2'
    s: int
    n: int
    log_lo: mpf
    log_hi: mpf
    prec: int

    @property
    def lo(self) -> mpf:
        with workprec(self.prec):
            return mp.exp(self.log_lo)

    @property
    def hi(self) -> mpf:
        with workprec(self.prec):
            return mp.exp(self.log_hi)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "s": self.s,
            "n": self.n,
            "lo": mp.nstr(self.lo, 40),
            "hi": mp.nstr(self.hi, 40),
            "log_lo": mp.nstr(self.log_lo, 40),
            "log_hi": mp.nstr(self.log_hi, 40),
        }


def widom_sup_dyadic(model: CantorModel, s: int, prec: int = 192) -> FactorBracket:
    """W_sup at degree 2^s: Chebyshev sup norm over Cap^n."""
    with workprec(prec):
        log_norm = model.log_r(s, prec) - mp.log(2)
        cap_lo, cap_hi = model.log_cap_K(prec)
        n = 1 << s
        return FactorBracket("sup", s, n,
                             log_norm - n * cap_hi,
                             log_norm - n * cap_lo, prec)


def widom_l2_dyadic(model: CantorModel, s: int, prec: int = 192) -> FactorBracket:
    """W_2 at degree 2^s against the equilibrium measure.

    Uses ln W_2 = (1/2) ln(1 - 2 gamma_{s+1}) - ln 2 - tail(s)/1 with
    tail(s) = sum_{k>s} 2^{s-k} ln gamma_k, certified by the tail bracket;
    valid when every ratio is at most 1/6.
    """
    if not model.gamma.small_gamma:
        raise CertificateUnavailable(
            "closed-form L2 factors need all gap ratios <= 1/6"
        )
    with workprec(prec):
        g_next = model.gamma.ratio(s + 1, prec)
        head = mp.log(1 - 2 * g_next) / 2 - mp.log(2)
        tlo, thi = model.gamma.suffix_log_bracket(s + 1, prec)
        # tail(s) = tau_{s+1}/2, entering with a minus sign
        return FactorBracket("l2", s, 1 << s,
                             head - thi / 2, head - tlo / 2, prec)


def widom_l2_block_lower(model: CantorModel, n: int,
                         prec: int = 192) -> Tuple[mpf, int]:
    """Certified lower bound for W_2 at arbitrary degree n >= 1: the block
    minimum over 2^s <= m < 2^{s+1} sits at the dyadic left edge."""
    if n < 1:
        raise ValueError("degree must be >= 1")
    s = n.bit_length() - 1
    return widom_l2_dyadic(model, s, prec).log_lo, s


class ResidualPolynomial:
    """Degree-2^s residual polynomial at pole x0: R = T / T(x0), the
    extremal normalized polynomial with R(x0) = 1.  Its sup norm over the
    level set is 1/|F_s(x0)|."""

    def __init__(self, model: CantorModel, s: int, x0):
        self.model = model
        self.s = s
        self.x0 = as_mpf(x0, model._build_bits(s) + 64)
        self._F0 = model.eval_F(s, self.x0)
        if self._F0.sign == 0 or self._F0.logmag <= 0:
            raise ValueError(
                "residual pole must lie outside the level set"
            )

    @property
    def pole_sign(self) -> int:
        return self._F0.sign

    def log_sup_norm(self) -> mpf:
        """ln of the sup norm over E_s (and over the limit set, where the
        endpoints realizing it live)."""
        return -self._F0.logmag

    def value_log(self, x) -> LogScalar:
        """R(x) = T(x)/T(x0) as a LogScalar."""
        T = self.model.eval_T(self.s, x)
        T0 = self.model.eval_T(self.s, self.x0, bits=T.prec)
        return ls_div(T, T0)


def residual_widom_bracket(model: CantorModel, x0, s: int,
                           green: GreenBracket,
                           prec: int = 256) -> Tuple[mpf, mpf, "ResidualPolynomial"]:
    """Bracket for ln W_res(x0, 2^s) = 2^s g_set(x0) + ln ||R_{2^s}||."""
    R = ResidualPolynomial(model, s, x0)
    with workprec(prec):
        log_norm = R.log_sup_norm()
        n = 1 << s
        return n * green.lo + log_norm, n * green.hi + log_norm, R


# -- alternation sets -------------------------------------------------------


def _endpoint_sigma(level, idx: int, sign_t0: int) -> int:
    return level.endpoint_sign(idx) * sign_t0


def alternating_set(model: CantorModel, s: int, x0) -> Tuple[mpf, ...]:
    """2^s + 1 level-s endpoints where the residual attains its sup norm
    with the extremal sign pattern: alternating, except for one repeat
    across the gap holding x0.

    Exterior poles scan left to right keeping sign flips.  For a pole in a
    bounded gap the scan is anchored at the two gap-adjacent endpoints
    (which share the pattern value +1) and runs outward both ways; that
    yields 2^s + 2 points, one more than needed, and the rightmost is
    dropped.
    """
    x = as_mpf(x0, model._build_bits(s) + 64)
    lvl = model.level(s)
    e = lvl.endpoints
    t = bisect_right(e, x)
    sign_t0 = model.eval_F(s, x).sign
    if sign_t0 == 0:
        raise ValueError("pole lies on the level set")
    if t == 0 or t == len(e):
        # exterior: plain greedy keeps every sign flip
        kept = [0]
        for i in range(1, len(e)):
            if _endpoint_sigma(lvl, i, sign_t0) != \
                    _endpoint_sigma(lvl, kept[-1], sign_t0):
                kept.append(i)
        return tuple(e[i] for i in kept)
    if t % 2 == 1:
        raise ValueError(
            "pole lies inside a level interval; no alternation set at this "
            "level"
        )
    # bounded gap between endpoint t-1 and t
    left = [t - 1]
    for i in range(t - 2, -1, -1):
        if _endpoint_sigma(lvl, i, sign_t0) != \
                _endpoint_sigma(lvl, left[-1], sign_t0):
            left.append(i)
    left.reverse()
    right = [t]
    for i in range(t + 1, len(e)):
        if _endpoint_sigma(lvl, i, sign_t0) != \
                _endpoint_sigma(lvl, right[-1], sign_t0):
            right.append(i)
    kept = left + right
    kept.pop()  # overcomplete by one; the rightmost is expendable
    return tuple(e[i] for i in kept)


def verify_alternation(model: CantorModel, s: int, x0, points,
                       rel_tol=mpf("1e-20")) -> Tuple[bool, Optional[str], Optional[int]]:
    """Independent check that points form an extremal alternation set for
    the degree-2^s residual at x0: correct count, strictly sorted, each an
    extremum of |R| to relative tolerance, and the sign pattern
    sigma_j = (-1)^(k+1-j) sign(x_j - x0) with k points left of x0."""
    x = as_mpf(x0, model._build_bits(s) + 64)
    m = (1 << s) + 1
    if len(points) != m:
        return False, "count", len(points)
    for j in range(m - 1):
        if not points[j] < points[j + 1]:
            return False, "order", j
    F0 = model.eval_F(s, x)
    if F0.sign == 0:
        return False, "pole-on-set", -1
    prec = 256
    with workprec(prec):
        tol = mpf(rel_tol)
        k = sum(1 for p in points if p < x)
        for j, p in enumerate(points, start=1):
            F = model.eval_F(s, p)
            # |T(p)| must equal the sup norm r_s/2, i.e. |F(p)| = 1
            dev = abs(mp.expm1(F.logmag))
            if dev > tol:
                return False, "magnitude", j - 1
            sigma = F.sign * F0.sign
            want = (-1) ** ((k + 1 - j) % 2) * (1 if p > x else -1)
            if sigma != want:
                return False, "sign-pattern", j - 1
    return True, None, None


# -- lower-bound checks -----------------------------------------------------


@dataclass(frozen=True)
class Thm1Row:
    kind: str  # 'dyadic' | 'block'
    s: int
    n: int
    w_log_lo: mpf
    bound_index: int  # the scale index m in the bound sqrt(6) c_m
    log_bound: mpf  # ln(sqrt(6) c_m)
    log_weak: mpf  # ln c_n
    ok: bool
    ok_weak: bool

    @property
    def log_margin(self) -> mpf:
        with workprec(192):
            return self.w_log_lo - self.log_bound

    def to_dict(self) -> dict:
        with workprec(192):
            return {
                "kind": self.kind,
                "s": self.s,
                "n": self.n,
                "w_lo": mp.nstr(mp.exp(self.w_log_lo), 30),
                "bound": mp.nstr(mp.exp(self.log_bound), 30),
                "weak_bound": mp.nstr(mp.exp(self.log_weak), 30),
                "log_margin": mp.nstr(self.log_margin, 20),
                "ok": self.ok,
                "ok_weak": self.ok_weak,
            }


def check_thm1(model: CantorModel, N: int,
               prec: int = 192) -> Tuple[bool, List[Thm1Row]]:
    """Certify W_2(n) >= sqrt(6) c_n (and the weaker W_2(n) > c_n) for all
    dyadic n <= N plus sampled in-block degrees, for a derived model."""
    if model.gamma.mode != "derived":
        raise CertificateUnavailable(
            "the L2 lower bound is stated for models derived from a scale "
            "sequence"
        )
    reg = model.gamma.reg
    rows: List[Thm1Row] = []
    with workprec(prec):
        half_log6 = mp.log(6) / 2
        s = 0
        while (1 << s) <= N:
            n = 1 << s
            br = widom_l2_dyadic(model, s, prec)
            # dyadic degrees satisfy the bound at the next scale index
            log_c = reg.log_value(2 * n, prec)
            log_bound = half_log6 + log_c
            log_weak = reg.log_value(n, prec)
            rows.append(Thm1Row(
                "dyadic", s, n, br.log_lo, 2 * n, log_bound, log_weak,
                bool(br.log_lo >= log_bound),
                bool(br.log_lo > log_weak)))
            # in-block degrees inherit the block-minimum lower bound
            for m in sorted({n + n // 2, 2 * n - 1}):
                if m <= n or m > N:
                    continue
                w_lo, s_blk = widom_l2_block_lower(model, m, prec)
                log_cm = reg.log_value(m, prec)
                rows.append(Thm1Row(
                    "block", s_blk, m, w_lo, m, half_log6 + log_cm, log_cm,
                    bool(w_lo >= half_log6 + log_cm),
                    bool(w_lo > log_cm)))
            s += 1
    return all(r.ok and r.ok_weak for r in rows), rows


@dataclass(frozen=True)
class Thm2Row:
    s: int
    n: int
    log_lo: mpf  # certified bracket for ln W_res
    log_hi: mpf
    log_b1: mpf  # ln (sqrt(6) c_n / 2)^(1/tau_hi), certified bound
    log_b2: mpf  # ln (c_n)^(1/tau_hi), weaker certified bound
    log_b1_opt: mpf  # same with 1/tau_lo: informational only
    log_b3: Optional[mpf]  # (W_sup(n)/2)^(1/tau_hi) cross-check, exterior
    ok: bool
    ok_weak: bool
    ok_cross: Optional[bool]
    info_opt: bool

    @property
    def log_margin(self) -> mpf:
        with workprec(192):
            return self.log_lo - self.log_b1

    def to_dict(self) -> dict:
        with workprec(192):
            d = {
                "s": self.s,
                "n": self.n,
                "w_lo": mp.nstr(mp.exp(self.log_lo), 30),
                "w_hi": mp.nstr(mp.exp(self.log_hi), 30),
                "bound": mp.nstr(mp.exp(self.log_b1), 30),
                "weak_bound": mp.nstr(mp.exp(self.log_b2), 30),
                "log_margin": mp.nstr(self.log_margin, 20),
                "ok": self.ok,
                "ok_weak": self.ok_weak,
                "info_optimistic": self.info_opt,
            }
            if self.log_b3 is not None:
                d["cross_bound"] = mp.nstr(mp.exp(self.log_b3), 30)
                d["ok_cross"] = self.ok_cross
            return d


def check_thm2(model: CantorModel, x0, S: int, eps=mpf("1e-8"),
               prec: int = 320) -> Tuple[bool, List[Thm2Row], GreenBracket, HarnackBracket]:
    """Certify the residual lower bound W_res(x0, n) >= (sqrt(6) c_n / 2)^(1/tau)
    at dyadic degrees n = 2^s, s <= S, through the certified upper Harnack
    constant (which can only weaken the claimed bound).

    The Green bracket of x0 is computed once, tight enough that every row's
    ln-bracket has width below eps.
    """
    if model.gamma.mode != "derived":
        raise CertificateUnavailable(
            "the residual lower bound is stated for models derived from a "
            "scale sequence"
        )
    reg = model.gamma.reg
    hb = harnack_bracket(model, x0, prec)
    with workprec(prec):
        eps = mpf(eps)
        green = green_set_bracket(model, x0, eps / (1 << S), prec,
                                  tau_hi=hb.hi)
    s_min = hb.s0 if hb.kind == "bounded" else 0
    exterior = hb.kind != "bounded"
    rows: List[Thm2Row] = []
    with workprec(prec):
        half_log6 = mp.log(6) / 2
        ln2 = mp.log(2)
        for s in range(s_min, S + 1):
            n = 1 << s
            lo, hi, _ = residual_widom_bracket(model, x0, s, green, prec)
            log_c = reg.log_value(n, prec)
            base1 = half_log6 + log_c - ln2  # ln(sqrt(6) c_n / 2)
            log_b1 = base1 / hb.hi
            log_b2 = log_c / hb.hi
            log_b1_opt = base1 / hb.lo
            if exterior:
                sup_lo = widom_sup_dyadic(model, s, prec).log_lo
                log_b3 = (sup_lo - ln2) / hb.hi
                ok_cross = bool(lo >= log_b3)
            else:
                log_b3, ok_cross = None, None
            rows.append(Thm2Row(
                s, n, +lo, +hi, log_b1, log_b2, log_b1_opt, log_b3,
                bool(lo >= log_b1), bool(lo >= log_b2), ok_cross,
                bool(lo >= log_b1_opt)))
    ok = all(r.ok and r.ok_weak and (r.ok_cross is not False) for r in rows)
    return ok, rows, green, hb
