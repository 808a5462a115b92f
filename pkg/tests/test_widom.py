"""Widom factors, residual polynomials, alternation, lower-bound checks."""

import pytest
from mpmath import mp, mpf, workprec

from widomcantor import (
    CantorModel,
    CertificateUnavailable,
    Gamma,
    ResidualPolynomial,
    alternating_set,
    check_thm1,
    check_thm2,
    green_set_bracket,
    harnack_bracket,
    residual_widom_bracket,
    verify_alternation,
    widom_l2_block_lower,
    widom_l2_dyadic,
    widom_sup_dyadic,
)

PREC = 192


def rel_close(a, b, logtol=-120):
    with workprec(PREC + 64):
        a, b = mpf(a), mpf(b)
        return abs(a / b - 1) <= mpf(2) ** logtol


class TestClosedForms:
    def test_sixth_sup_is_three(self, model_sixth):
        for s in (0, 1, 5, 9):
            br = widom_sup_dyadic(model_sixth, s)
            assert br.log_lo == br.log_hi
            with workprec(PREC):
                assert rel_close(br.log_lo, mp.log(3))

    def test_sixth_l2_is_sqrt_six(self, model_sixth):
        for s in (0, 3, 7):
            br = widom_l2_dyadic(model_sixth, s)
            assert br.log_lo == br.log_hi
            with workprec(PREC):
                assert rel_close(br.log_lo, mp.log(6) / 2)

    def test_const_e_factors(self, model_const_e):
        with workprec(PREC):
            want_sup = mp.log(3) + 1
            want_l2 = want_sup + mp.log(1 - 1 / (3 * mp.e)) / 2
            for s in (0, 4):
                assert rel_close(widom_sup_dyadic(model_const_e, s).log_lo,
                                 want_sup)
                assert rel_close(widom_l2_dyadic(model_const_e, s).log_lo,
                                 want_l2)

    def test_power_sup_growth(self, model_power):
        # W_sup(2^s) = 3 c(2^{s+1}) = 3 e 2^{(s+1)/2} for c_n = e sqrt(n)
        with workprec(PREC):
            for s in (0, 2, 5):
                want = mp.log(3) + 1 + mpf(s + 1) / 2 * mp.log(2)
                assert rel_close(widom_sup_dyadic(model_power, s).log_lo,
                                 want)

    def test_l2_needs_small_ratios(self):
        model = CantorModel(Gamma.direct(["0.2"]), s_max=4)
        with pytest.raises(CertificateUnavailable):
            widom_l2_dyadic(model, 1)
        # sup-norm factors stay available
        assert widom_sup_dyadic(model, 1).log_lo < \
            widom_sup_dyadic(model, 1).log_hi + 1

    def test_block_lower_is_left_edge(self, model_const_e):
        for n in (3, 5, 6, 7):
            w_lo, s = widom_l2_block_lower(model_const_e, n)
            assert s == n.bit_length() - 1
            assert w_lo == widom_l2_dyadic(model_const_e, s).log_lo


class TestResidualPolynomial:
    def test_pole_must_be_off_the_set(self, model_sixth):
        with pytest.raises(ValueError):
            ResidualPolynomial(model_sixth, 2, 0)

    def test_normalized_at_pole(self, model_sixth):
        R = ResidualPolynomial(model_sixth, 3, 2)
        v = R.value_log(R.x0)
        with workprec(PREC):
            assert v.sign == 1 and abs(v.logmag) <= mpf(2) ** -120

    def test_sup_norm_two_routes(self, model_sixth):
        # 1/|F(x0)| against max |T(e_i)| / |T(x0)| over stored endpoints
        s = 3
        R = ResidualPolynomial(model_sixth, s, "-0.5")
        with workprec(PREC):
            best = None
            for p in model_sixth.level(s).endpoints:
                v = R.value_log(p)
                if best is None or v.logmag > best:
                    best = v.logmag
            assert abs(best - R.log_sup_norm()) <= mpf(2) ** -100

    def test_small_inside_large_outside(self, model_sixth):
        R = ResidualPolynomial(model_sixth, 4, 2)
        assert R.value_log("0.1").logmag < 0 < R.value_log(3).logmag


class TestAlternation:
    def test_exterior_count_and_verify(self, model_sixth):
        for s in (1, 2, 4):
            for x0 in (2, "-0.5"):
                pts = alternating_set(model_sixth, s, x0)
                assert len(pts) == (1 << s) + 1
                ok, reason, _ = verify_alternation(model_sixth, s, x0, pts)
                assert ok, reason

    def test_bounded_gap_count_and_verify(self, model_sixth):
        for s in (1, 3):
            pts = alternating_set(model_sixth, s, "0.5")
            assert len(pts) == (1 << s) + 1
            ok, reason, _ = verify_alternation(model_sixth, s, "0.5", pts)
            assert ok, reason

    def test_worked_small_case(self, model_sixth):
        # s = 2, pole in the central gap: the known five extremal points
        pts = alternating_set(model_sixth, 2, "0.5")
        e = model_sixth.level(2).endpoints
        assert pts == (e[0], e[2], e[3], e[4], e[5])

    def test_pole_inside_interval_rejected(self, model_sixth):
        with pytest.raises(ValueError, match="inside a level interval"):
            alternating_set(model_sixth, 1, "0.1")
        # one level deeper the pole sits in a proper gap
        assert len(alternating_set(model_sixth, 2, "0.1")) == 5

    def test_perturbations_fail_as_expected(self, model_sixth):
        s, x0 = 3, 2
        pts = list(alternating_set(model_sixth, s, x0))
        dropped = pts[:-1]
        ok, reason, _ = verify_alternation(model_sixth, s, x0, dropped)
        assert (ok, reason) == (False, "count")
        with workprec(256):
            mid = (pts[3] + pts[4]) / 2  # interior midpoint, not extremal
        swapped = pts[:3] + [mid] + pts[4:]
        ok, reason, idx = verify_alternation(model_sixth, s, x0, swapped)
        assert (ok, reason, idx) == (False, "magnitude", 3)
        shuffled = pts[:]
        shuffled[0], shuffled[1] = shuffled[1], shuffled[0]
        ok, reason, _ = verify_alternation(model_sixth, s, x0, shuffled)
        assert (ok, reason) == (False, "order")


class TestL2LowerBound:
    def test_passes_for_const_e(self, model_const_e):
        ok, rows = check_thm1(model_const_e, 64)
        assert ok and rows
        kinds = {r.kind for r in rows}
        assert kinds == {"dyadic", "block"}
        assert all(r.ok and r.ok_weak for r in rows)
        assert all(r.log_margin > 0 for r in rows)

    def test_needs_derived_model(self, model_sixth):
        with pytest.raises(CertificateUnavailable):
            check_thm1(model_sixth, 16)


class TestResidualLowerBound:
    def test_exterior_rows(self, model_const_e):
        ok, rows, green, hb = check_thm2(model_const_e, 2, 4)
        assert ok
        with workprec(PREC):
            assert rel_close(hb.hi, mp.sqrt(2))
        assert [r.n for r in rows] == [1, 2, 4, 8, 16]
        assert all(r.ok_cross for r in rows)

    def test_bounded_rows_start_at_separation(self, model_const_e):
        ok, rows, green, hb = check_thm2(model_const_e, "0.5", 4)
        assert ok
        assert hb.kind == "bounded" and hb.s0 == 1
        assert 1 <= hb.lo <= hb.hi
        assert [r.n for r in rows] == [2, 4, 8, 16]
        assert all(r.ok_cross is None for r in rows)

    def test_needs_derived_model(self, model_sixth):
        with pytest.raises(CertificateUnavailable):
            check_thm2(model_sixth, 2, 3)


class TestResidualBracket:
    def test_bracket_orders_and_converges(self, model_const_e):
        hb = harnack_bracket(model_const_e, 2)
        green = green_set_bracket(model_const_e, 2, mpf("1e-12"),
                                  tau_hi=hb.hi)
        with workprec(PREC):
            want = mp.log(3) + 1  # ln W_sup, the limit of ln W_res
            mids = []
            for s in (2, 6):
                lo, hi, _ = residual_widom_bracket(model_const_e, 2, s,
                                                   green)
                assert lo <= hi
                mids.append((lo + hi) / 2)
            assert abs(mids[1] - want) < abs(mids[0] - want)
            assert abs(mids[1] - want) < mpf("1e-3")
