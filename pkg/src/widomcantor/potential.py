"""Green functions and Harnack comparison constants.

Green values come from the renormalization cascade: with F_s the degree-2^s
renormalized polynomial of a model, g_{E_s}(x) = 2^{-s} g_ref(F_s(x)) where
g_ref is the Green function of [-1, 1].  The levels increase to the Green
function of the limit set, and the overshoot is controlled by the capacity
gap: g_set - g_{E_s} is a positive harmonic function on the complement of
E_s whose value at infinity is ln Cap(E_s) - ln Cap(set), so a Harnack
constant between x0 and infinity turns the capacity gap into a certified
two-sided bracket.

The Harnack constant itself is bracketed through slit geometry.  For x0
outside [0, 1] the complement of one slit is conformally a disk and the
constant is exact.  For x0 in a bounded gap (alpha, beta) the two-slit
domain C minus ([0, alpha] u [beta, 1]) contains the complement of every level:
subdomains overestimate Harnack constants, so its constant is a certified
upper bound, obtained by chaining a disk step off the real axis with a
one-slit step to infinity; the one-slit constants of the two enclosing
slits bound it from below.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from mpmath import mp, mpc, mpf, workprec

from .cantor import CantorModel, GapLocation
from .numerics import DepthExhausted, LogScalar, as_mpf

__all__ = [
    "green_reference_log",
    "green_level",
    "GreenBracket",
    "green_set_bracket",
    "harnack_one_slit",
    "HarnackBracket",
    "harnack_bracket",
]

GREEN_DEPTH_CAP = 64  # pointwise evaluations only; independent of s_max


def green_reference_log(logmag: mpf, prec: int) -> mpf:
    """g_{[-1,1]} at a point with ln|t| = logmag >= 0:
    ln(|t| + sqrt(t^2 - 1)) arranged to stay stable for huge |t|."""
    with workprec(prec):
        L = +logmag
        if L <= 0:
            return mpf(0)
        # ln(|t|(1 + sqrt(1 - t^-2))) = L + ln(1 + sqrt(-expm1(-2L)))
        return L + mp.log(1 + mp.sqrt(-mp.expm1(-2 * L)))


def green_level(model: CantorModel, s: int, x0, bits: Optional[int] = None) -> mpf:
    """g_{E_s}(x0) = 2^{-s} g_ref(F_s(x0)); zero on the level set."""
    F = model.eval_F(s, x0, bits)
    if F.sign == 0 or F.logmag <= 0:
        return mpf(0)
    prec = F.prec
    with workprec(prec):
        return green_reference_log(F.logmag, prec) / (1 << s)


def harnack_one_slit(x0, a=0, b=1, prec: int = 256) -> mpf:
    """Harnack comparison constant between a real point outside [a, b] and
    infinity in the slit complement (plane minus [a, b]): exactly
    (|z|+1)/(|z|-1) for the Joukowski image z of the point."""
    with workprec(prec + 64):
        a, b, x = mpf(a), mpf(b), mpf(x0)
        if not a < b:
            raise ValueError("slit needs a < b")
        y = (2 * x - a - b) / (b - a)
        if abs(y) <= 1:
            raise ValueError("point lies on the slit")
        ay = abs(y)
        zeta = ay + mp.sqrt((ay - 1) * (ay + 1))
        return (zeta + 1) / (zeta - 1)


def _one_slit_complex(v: mpc, a, b, prec: int) -> mpf:
    """One-slit Harnack constant at a complex point off the slit [a, b]."""
    with workprec(prec + 64):
        a, b = mpf(a), mpf(b)
        y = (2 * v - a - b) / (b - a)
        root = mp.sqrt(y * y - 1)
        zeta = y + root
        if abs(zeta) < 1:
            zeta = y - root
        az = abs(zeta)
        if az <= 1:
            raise ValueError("point lies on the slit")
        return (az + 1) / (az - 1)


@dataclass(frozen=True)
class HarnackBracket:
    """Certified bracket [lo, hi] for the Harnack comparison constant
    between x0 and infinity in the slit proxy of the set complement.  hi
    also bounds the constant of the full complement from above, which is
    the direction the lower-bound checks consume (exponent 1/hi)."""

    x0: mpf
    kind: str  # gap kind of x0
    s0: int
    alpha: Optional[mpf]
    beta: Optional[mpf]
    lo: mpf
    hi: mpf
    prec: int

    def to_dict(self) -> dict:
        def fmt(v):
            return None if v is None else mp.nstr(v, 40)

        return {
            "x0": fmt(self.x0),
            "kind": self.kind,
            "s0": self.s0,
            "alpha": fmt(self.alpha),
            "beta": fmt(self.beta),
            "lo": fmt(self.lo),
            "hi": fmt(self.hi),
            "prec": self.prec,
        }


def harnack_bracket(model: CantorModel, x0, prec: int = 256) -> HarnackBracket:
    x = as_mpf(x0, prec + 64)
    loc = model.locate_gap(x)
    if loc.kind == "inside":
        raise ValueError(
            "x0 was not separated from the set; Harnack constants need an "
            "exterior or bounded-gap point"
        )
    with workprec(prec + 64):
        if loc.exterior:
            t = harnack_one_slit(x, 0, 1, prec)
            return HarnackBracket(x, loc.kind, loc.s0, None, None, t, t, prec)
        alpha, beta = loc.alpha, loc.beta
        # superdomains of the two-slit proxy give lower bounds
        lo = max(
            harnack_one_slit(x, 0, alpha, prec),
            harnack_one_slit(x, beta, 1, prec),
        )
        # chain x0 -> x0 + ih (disk inside the gap) -> infinity (one slit
        # [0,1], a subdomain of the two-slit proxy off the real axis)
        R = min(x - alpha, beta - x)
        if R <= 0:
            raise ValueError("x0 must lie strictly inside the gap")
        width = beta - alpha
        best = None
        k = 1
        while k <= 60:
            h = width / (1 << k)
            if h < R:
                tau_disk = (1 + h / R) / (1 - h / R)
                tau_slit = _one_slit_complex(mpc(x, h), 0, 1, prec)
                cand = tau_disk * tau_slit
                best = cand if best is None else min(best, cand)
            elif best is not None:
                break
            if k >= 8 and best is not None:
                break
            k += 1
        if best is None:
            raise DepthExhausted("no admissible Harnack waypoint inside the gap")
        hi = best
        if hi < lo:
            # both are certified bounds, so crossing means rounding trouble
            raise ArithmeticError("Harnack bracket crossed; raise precision")
        return HarnackBracket(x, loc.kind, loc.s0, alpha, beta, lo, hi, prec)


@dataclass(frozen=True)
class GreenBracket:
    """Certified bracket for the Green function of the limit set at x0,
    from level s: lo = g_{E_s}(x0), hi = lo + tau * capacity gap."""

    x0: mpf
    s: int
    lo: mpf
    hi: mpf
    eps: mpf
    tau: mpf
    kind: str
    prec: int

    @property
    def width(self) -> mpf:
        with workprec(self.prec):
            return self.hi - self.lo

    def to_dict(self) -> dict:
        return {
            "x0": mp.nstr(self.x0, 40),
            "level": self.s,
            "lo": mp.nstr(self.lo, 40),
            "hi": mp.nstr(self.hi, 40),
            "eps": mp.nstr(self.eps, 10),
            "tau": mp.nstr(self.tau, 40),
            "kind": self.kind,
            "prec": self.prec,
        }


def green_width_at(model: CantorModel, tau_hi: mpf, s: int, prec: int) -> mpf:
    """Width of the level-s Green bracket: tau * certified capacity gap."""
    with workprec(prec):
        return tau_hi * model.cap_gap_bracket(s, prec)[1]


def green_bracket_level(model: CantorModel, x0, s: int, prec: int = 320,
                        tau_hi: Optional[mpf] = None,
                        loc: Optional[GapLocation] = None) -> GreenBracket:
    """Certified Green bracket for the limit set at x0 using level s alone:
    lo = g_{E_s}(x0), hi = lo + tau * capacity gap at s."""
    x = as_mpf(x0, prec + 64)
    if loc is None:
        loc = model.locate_gap(x)
    if loc.kind == "inside":
        raise ValueError(
            "x0 was not separated from the set; its Green bracket is not "
            "resolvable at this depth"
        )
    if loc.kind == "bounded" and s < loc.s0:
        raise ValueError(
            f"level {s} precedes the separating level {loc.s0} for this x0")
    if tau_hi is None:
        if loc.exterior:
            tau_hi = harnack_one_slit(x, 0, 1, prec)
        else:
            tau_hi = harnack_bracket(model, x, prec).hi
    width = green_width_at(model, tau_hi, s, prec)
    lo = green_level(model, s, x)
    with workprec(prec):
        return GreenBracket(x, s, +lo, lo + width, +width, +mpf(tau_hi),
                            loc.kind, prec)


def green_set_bracket(model: CantorModel, x0, eps, prec: int = 320,
                      max_depth: int = GREEN_DEPTH_CAP,
                      tau_hi: Optional[mpf] = None,
                      loc: Optional[GapLocation] = None) -> GreenBracket:
    """Bracket the Green function of the limit set at x0 to width <= eps.

    Levels are stepped until the certified width suffices; only pointwise
    cascade evaluations are involved, so the depth cap is far beyond any
    endpoint-level cap.
    """
    x = as_mpf(x0, prec + 64)
    with workprec(prec):
        eps = mpf(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
    if loc is None:
        loc = model.locate_gap(x)
    if loc.kind == "inside":
        raise ValueError(
            "x0 was not separated from the set; its Green bracket is not "
            "resolvable at this depth"
        )
    if tau_hi is None:
        if loc.exterior:
            tau_hi = harnack_one_slit(x, 0, 1, prec)
        else:
            tau_hi = harnack_bracket(model, x, prec).hi
    s_start = loc.s0 if loc.kind == "bounded" else 0
    for s in range(s_start, max_depth + 1):
        width = green_width_at(model, tau_hi, s, prec)
        if width <= eps:
            lo = green_level(model, s, x)
            with workprec(prec):
                return GreenBracket(x, s, +lo, lo + width, eps, +mpf(tau_hi),
                                    loc.kind, prec)
    raise DepthExhausted(
        f"Green bracket width above {eps} after {max_depth} levels"
    )
