"""Structural invariant suite.

Every check here is a consequence of the construction that can fail only
through an implementation or precision defect, so the suite doubles as a
regression harness and as the certification backdrop for the headline
quantities: interval nesting, endpoint extremality, capacity telescoping,
norm identities, factor orderings, Green monotonicity and alternation
round-trips.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

from mpmath import mp, mpf, workprec

from .cantor import CantorModel
from .numerics import ls_add, ls_neg
from .potential import green_level, green_set_bracket, harnack_bracket
from .widom import (
    alternating_set,
    verify_alternation,
    widom_l2_dyadic,
    widom_sup_dyadic,
)

__all__ = ["CheckResult", "run_invariant_suite"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "detail": self.detail}


def _fmt(x) -> str:
    return mp.nstr(mpf(x), 8)


def _check_levels(model: CantorModel, s_top: int) -> CheckResult:
    for s in range(0, s_top + 1):
        lvl = model.level(s)
        e = lvl.endpoints
        if len(e) != 1 << (s + 1):
            return CheckResult("level-structure", False,
                               f"level {s}: {len(e)} endpoints")
        for i in range(len(e) - 1):
            if not e[i] < e[i + 1]:
                return CheckResult("level-structure", False,
                                   f"level {s}: order breaks at {i}")
        if s == 0:
            continue
        parents = model.level(s - 1).intervals()
        children = lvl.intervals()
        # persistent endpoints are re-polished each level, so they agree
        # with the parent copy only to the parent's build accuracy
        with workprec(model._build_bits(s) + 64):
            tol = mpf(2) ** (8 - model._build_bits(s - 1))
            for j, (a, b) in enumerate(parents):
                (a1, b1), (a2, b2) = children[2 * j], children[2 * j + 1]
                if not (a - tol <= a1 < b1 < a2 < b2 <= b + tol):
                    return CheckResult("level-structure", False,
                                       f"level {s}: nesting breaks in parent {j}")
    return CheckResult("level-structure", True,
                       f"levels 0..{s_top} nested and ordered")


def _check_endpoint_extrema(model: CantorModel, s_top: int) -> CheckResult:
    worst = mpf(0)
    where = None
    for s in range(1, s_top + 1):
        lvl = model.level(s)
        prec = model._build_bits(s) + 64
        tol = mpf(2) ** (8 - lvl.prec)
        with workprec(prec):
            for i, x in enumerate(lvl.endpoints):
                F, _ = model._F_df(s, x, prec)
                dev = abs(F - lvl.endpoint_sign(i))
                rel = dev / tol
                if rel > worst:
                    worst, where = rel, (s, i)
                if dev > tol:
                    return CheckResult(
                        "endpoint-extrema", False,
                        f"level {s} endpoint {i}: |F -/+ 1| = {_fmt(dev)} "
                        f"exceeds {_fmt(tol)}")
    return CheckResult("endpoint-extrema", True,
                       f"worst residual at {where} is {_fmt(worst)} of budget")


def _check_lengths(model: CantorModel, s_top: int) -> CheckResult:
    with workprec(256):
        prev = None
        for s in range(0, s_top + 1):
            tot = sum((b - a) for a, b in model.level(s).intervals())
            if prev is not None and not tot < prev:
                return CheckResult("length-decreasing", False,
                                   f"level {s}: {_fmt(tot)} !< {_fmt(prev)}")
            prev = tot
        return CheckResult("length-decreasing", True,
                           f"level {s_top} total length {_fmt(prev)}")


def _check_capacity(model: CantorModel, s_top: int, prec: int) -> CheckResult:
    with workprec(prec):
        tol = mpf(2) ** (-(prec - 24))
        try:
            cap_lo, cap_hi = model.log_cap_K(prec)
        except Exception as exc:  # direct mode without certificate
            return CheckResult("capacity-telescoping", False, str(exc))
        prev = None
        prev_gap = None
        for s in range(0, s_top + 1):
            ce = model.log_cap_level(s, prec)
            if prev is not None:
                drop = ce - prev
                want = mp.log(4 * model.gamma.ratio(s, prec)) / (1 << s)
                if abs(drop - want) > tol:
                    return CheckResult(
                        "capacity-telescoping", False,
                        f"level {s}: drop {_fmt(drop)} != {_fmt(want)}")
                if not drop < 0:
                    return CheckResult("capacity-telescoping", False,
                                       f"level {s}: capacity not decreasing")
            glo, ghi = model.cap_gap_bracket(s, prec)
            if not (0 < glo <= ghi):
                return CheckResult("capacity-telescoping", False,
                                   f"level {s}: gap bracket [{_fmt(glo)}, "
                                   f"{_fmt(ghi)}] not positive")
            # the two routes to ln Cap(set) must give overlapping brackets
            if ce - ghi > cap_hi + tol or ce - glo < cap_lo - tol:
                return CheckResult("capacity-telescoping", False,
                                   f"level {s}: gap and set brackets disagree")
            if prev_gap is not None and not ghi < prev_gap:
                return CheckResult("capacity-telescoping", False,
                                   f"level {s}: gap bound not decreasing")
            if not ce > cap_hi:
                return CheckResult("capacity-telescoping", False,
                                   f"level {s}: ln Cap(E_s) below the set")
            prev, prev_gap = ce, ghi
        return CheckResult(
            "capacity-telescoping", True,
            f"ln Cap drops match ln(4 gamma_s)/2^s; set bracket "
            f"[{_fmt(cap_lo)}, {_fmt(cap_hi)}]")


def _check_affine_identity(model: CantorModel, probes,
                           prec: int) -> CheckResult:
    worst = mpf("-inf")
    with workprec(prec):
        for x in probes:
            for s in (1, 2, 4):
                T = model.eval_T(s, x)
                P = model.eval_P(s, x, bits=T.prec)
                with workprec(max(T.prec, P.prec)):
                    half_r = mp.exp(model.log_r(s, T.prec)) / 2
                    from .numerics import LogScalar

                    rhs = ls_add(P, LogScalar.from_real(half_r, T.prec))
                    diff = ls_add(T, ls_neg(rhs))
                if diff.sign != 0:
                    rel = diff.logmag - T.logmag
                    worst = max(worst, rel)
                    if rel > -(T.prec // 2):
                        return CheckResult(
                            "chebyshev-affine-identity", False,
                            f"x={_fmt(x)} s={s}: relative gap 2^{_fmt(rel)}")
    detail = "exact" if worst == mpf("-inf") else f"worst 2^{_fmt(worst)}"
    return CheckResult("chebyshev-affine-identity", True, detail)


def _check_widom_ordering(model: CantorModel, s_top: int,
                          prec: int) -> CheckResult:
    with workprec(prec):
        tol = mpf(2) ** (-(prec // 2))
        prev_rate = None
        for s in range(0, s_top + 1):
            sup = widom_sup_dyadic(model, s, prec)
            if not sup.log_lo >= mp.log(2) - tol:
                return CheckResult("widom-ordering", False,
                                   f"s={s}: W_sup below 2")
            try:
                l2 = widom_l2_dyadic(model, s, prec)
            except Exception:
                l2 = None
            if l2 is not None:
                if not l2.log_lo >= -tol:
                    return CheckResult("widom-ordering", False,
                                       f"s={s}: W_2 below 1")
                if not l2.log_hi <= sup.log_hi + tol:
                    return CheckResult("widom-ordering", False,
                                       f"s={s}: W_2 above W_sup")
            rate = sup.log_hi / (1 << s)
            if prev_rate is not None and not rate <= prev_rate + tol:
                return CheckResult("widom-ordering", False,
                                   f"s={s}: ln W_sup / n increased")
            prev_rate = rate
        return CheckResult("widom-ordering", True,
                           f"2 <= W_2 ordering and subexponential rate "
                           f"through s={s_top}")


def _check_green(model: CantorModel, probes, prec: int) -> CheckResult:
    with workprec(prec):
        tol = mpf(2) ** (-128)
        for x in probes:
            prev = None
            for s in range(0, 10):
                g = green_level(model, s, x)
                if prev is not None and not g >= prev - tol:
                    return CheckResult("green-monotone", False,
                                       f"x={_fmt(x)}: level {s} decreased")
                prev = g
            b1 = green_set_bracket(model, x, mpf("1e-4"), prec)
            b2 = green_set_bracket(model, x, mpf("1e-8"), prec)
            if not (b1.lo <= b1.hi and b2.lo <= b2.hi):
                return CheckResult("green-monotone", False,
                                   f"x={_fmt(x)}: invalid bracket")
            if not (b2.width < b1.width and b1.lo - tol <= b2.lo
                    and b2.hi <= b1.hi + tol):
                return CheckResult("green-monotone", False,
                                   f"x={_fmt(x)}: refinement not nested")
        return CheckResult("green-monotone", True,
                           f"monotone levels and nested brackets at "
                           f"{len(list(probes))} probes")


def _check_harnack(model: CantorModel, probes, prec: int) -> CheckResult:
    for x in probes:
        hb = harnack_bracket(model, x, prec)
        if not (1 <= hb.lo <= hb.hi):
            return CheckResult("harnack-bracket", False,
                               f"x={_fmt(x)}: [{_fmt(hb.lo)}, {_fmt(hb.hi)}]")
        if hb.kind != "bounded" and hb.lo != hb.hi:
            return CheckResult("harnack-bracket", False,
                               f"x={_fmt(x)}: exterior bracket not exact")
    return CheckResult("harnack-bracket", True,
                       f"{len(list(probes))} probes in range")


def _check_alternation(model: CantorModel, probes, s_top: int) -> CheckResult:
    levels = sorted({min(2, s_top), min(4, s_top)})
    for x in probes:
        for s in levels:
            if s < 1:
                continue
            try:
                pts = alternating_set(model, s, x)
            except ValueError:
                continue  # probe inside a level interval at this depth
            ok, why, idx = verify_alternation(model, s, x, pts)
            if not ok:
                return CheckResult(
                    "alternation-roundtrip", False,
                    f"x={_fmt(x)} s={s}: {why} at {idx}")
    return CheckResult("alternation-roundtrip", True,
                       f"levels {levels} at {len(list(probes))} probes")


def _check_residual_norm(model: CantorModel, probes, prec: int) -> CheckResult:
    from .widom import ResidualPolynomial

    with workprec(prec):
        for x in probes:
            for s in (1, 3):
                try:
                    R = ResidualPolynomial(model, s, x)
                except ValueError:
                    continue
                direct = R.log_sup_norm()
                T0 = model.eval_T(s, x)
                via_T = (model.log_r(s, prec) - mp.log(2)) - T0.logmag
                if abs(direct - via_T) > mpf(2) ** (-(prec // 2)):
                    return CheckResult(
                        "residual-norm-identity", False,
                        f"x={_fmt(x)} s={s}: {_fmt(direct)} != {_fmt(via_T)}")
        return CheckResult("residual-norm-identity", True,
                           "two norm routes agree at all probes")


def run_invariant_suite(model: CantorModel, s_top: int = 6,
                        probes: Sequence = ("2", "-0.5", "0.5"),
                        prec: int = 256) -> List[CheckResult]:
    """Run the full structural suite; returns one result per check."""
    probes = tuple(mpf(p) for p in probes)
    exterior = tuple(p for p in probes if p < 0 or p > 1)
    s_top = min(s_top, model.s_max)
    results = [
        _check_levels(model, s_top),
        _check_endpoint_extrema(model, s_top),
        _check_lengths(model, s_top),
        _check_capacity(model, s_top, prec),
        _check_affine_identity(model, exterior or probes, prec),
        _check_widom_ordering(model, s_top, prec),
        _check_green(model, probes, prec),
        _check_harnack(model, probes, prec),
        _check_alternation(model, probes, s_top),
        _check_residual_norm(model, probes, prec),
    ]
    return results
