"""Scale sequences, regularity checking, and the monotone envelope."""

import random

import pytest
from mpmath import mp, mpf, workprec

from widomcantor.sequences import (
    HorizonExceeded,
    SequenceError,
    SequenceSpec,
    check_regular,
    evaluate,
    log_evaluate,
    regularize,
    tail_decay,
)

PREC = 128


def rel_close(a, b, logtol=-100):
    with workprec(PREC + 64):
        return abs(mpf(a) / mpf(b) - 1) <= mpf(2) ** logtol


class TestSpecAndEvaluate:
    def test_parameter_spellings(self):
        with workprec(PREC):
            cases = [
                (SequenceSpec.constant("e"), mp.e),
                (SequenceSpec.constant("pi"), mp.pi),
                (SequenceSpec.constant("e^2"), mp.e ** 2),
                (SequenceSpec.constant("e**3"), mp.e ** 3),
                (SequenceSpec.constant("7/2"), mpf(7) / 2),
                (SequenceSpec.constant("2.5"), mpf("2.5")),
                (SequenceSpec.constant(3), mpf(3)),
            ]
            for spec, want in cases:
                assert rel_close(evaluate(spec, 1, PREC), want)

    def test_family_closed_forms(self):
        with workprec(PREC):
            p = SequenceSpec.power("e", "1/2")
            assert rel_close(evaluate(p, 9, PREC), 3 * mp.e)
            g = SequenceSpec.logarithmic("e", "2")
            assert rel_close(evaluate(g, 5, PREC), mp.e + 2 * mp.log(5))
            assert rel_close(log_evaluate(p, 4, PREC), 1 + mp.log(2))

    def test_table_hold_and_none(self):
        hold = SequenceSpec.table(["3", "4", "5"], "hold")
        assert evaluate(hold, 9, PREC) == evaluate(hold, 3, PREC)
        assert hold.domain_end is None
        fin = SequenceSpec.table(["3", "4", "5"], "none")
        assert fin.domain_end == 3
        with pytest.raises(SequenceError):
            evaluate(fin, 4, PREC)

    def test_dict_round_trip(self):
        spec = SequenceSpec.power("e", "1/2")
        again = SequenceSpec.from_dict(spec.to_dict())
        assert again == spec
        with pytest.raises(SequenceError):
            SequenceSpec.from_dict({"family": "geometric", "a": 2})

    def test_domain_and_floor_validation(self):
        with pytest.raises(SequenceError):
            evaluate(SequenceSpec.constant("e"), 0, PREC)
        with pytest.raises(SequenceError):
            evaluate(SequenceSpec.constant("0.5"), 1, PREC)


class TestCheckRegular:
    def test_accepts_regular_families(self):
        for spec in (SequenceSpec.constant("e"),
                     SequenceSpec.power("e", "1/2"),
                     SequenceSpec.logarithmic("e", "1")):
            report = check_regular(spec, 64, PREC)
            assert report.ok and report.first_violation is None

    def test_min_violation(self):
        report = check_regular(SequenceSpec.table(["e", "1.2"]), 8, PREC)
        assert (report.ok, report.first_violation, report.condition) == \
            (False, 2, "min")

    def test_monotone_violation(self):
        report = check_regular(SequenceSpec.table(["e^2", "4.2"]), 8, PREC)
        assert (report.ok, report.first_violation, report.condition) == \
            (False, 2, "monotone")

    def test_subexp_violation(self):
        report = check_regular(SequenceSpec.table(["e", "e^3"]), 8, PREC)
        assert (report.ok, report.first_violation, report.condition) == \
            (False, 2, "subexp")

    def test_finite_domain_truncates(self):
        report = check_regular(SequenceSpec.table(["e", "e"], "none"), 99,
                               PREC)
        assert report.ok


class TestRegularize:
    def test_requires_floor_e(self):
        with pytest.raises(SequenceError, match="lift the sequence"):
            regularize(SequenceSpec.constant(2), 16, PREC)
        # the floor is scanned on the whole prefix, not just up to the
        # first regularity violation (here: monotone at index 2)
        with pytest.raises(SequenceError, match="lift the sequence"):
            regularize(SequenceSpec.table(["e^2", "4.2", "2.5"]), 16, PREC)

    def test_idempotent_on_regular_input(self):
        reg = regularize(SequenceSpec.constant("e"), 32, PREC)
        assert reg.already_regular and reg.certificate == "analytic"
        for n in (1, 7, 32, 1000, 1 << 14):
            assert reg.log_value(n) == log_evaluate(reg.spec, n, PREC)

    def test_growing_power_closed_form_beyond_prefix(self):
        reg = regularize(SequenceSpec.power("e", "1/2"), 16, PREC)
        assert reg.already_regular
        with workprec(PREC + 64):
            target = mp.e * mpf(2) ** mpf("6.5")
            assert rel_close(reg.value(1 << 13), target, -100)

    def test_envelope_dominates_and_is_regular(self):
        # alpha peaks at n = 2 for this spec, so it is not regular as given
        spec = SequenceSpec.power("e", 3)
        assert not check_regular(spec, 8, PREC).ok
        reg = regularize(spec, 16, PREC)
        assert not reg.already_regular
        with workprec(PREC):
            slack = mpf(2) ** -100
            prev_s, prev_t = None, None
            for n in range(1, 17):
                s = reg.log_value(n)
                c = log_evaluate(spec, n, PREC)
                t = tail_decay(reg, n)
                assert s >= c - slack
                if prev_s is not None:
                    assert s >= prev_s - slack
                    assert t <= prev_t + slack
                prev_s, prev_t = s, t

    def test_non_table_beyond_prefix_raises(self):
        reg = regularize(SequenceSpec.power("e", 3), 16, PREC)
        with pytest.raises(HorizonExceeded):
            reg.log_value(17)

    def test_finite_domain_beyond_raises(self):
        reg = regularize(SequenceSpec.table(["e", "e"], "none"), 8, PREC)
        assert reg.N == 2
        with pytest.raises(HorizonExceeded):
            reg.log_value(3)

    def test_held_table_tail_is_frozen(self):
        reg = regularize(SequenceSpec.table(["e^2", "e", "e"]), 8, PREC)
        top = reg.log_value(8)
        for n in (9, 100, 1 << 14):
            assert reg.log_value(n) == top

    def test_worked_example_constant_envelope(self):
        # c = (e^2, e, e, ...) regularizes to the constant envelope e^2
        reg = regularize(SequenceSpec.table(["e^2", "e", "e"]), 64, PREC)
        first = reg.log_value(1)
        for n in list(range(2, 21)) + [1000, 1 << 14]:
            assert reg.log_value(n) == first
        with workprec(PREC + 64):
            assert rel_close(reg.value(1), mp.e ** 2, -100)

    def test_randomized_envelope_invariants(self):
        rng = random.Random(1729)
        for _ in range(10):
            length = rng.randint(3, 24)
            vals = [f"e^{rng.uniform(1, 5):.6f}" for _ in range(length)]
            reg = regularize(SequenceSpec.table(vals, "hold"), 128, PREC)
            with workprec(PREC):
                slack = mpf(2) ** -100
                prev_s, prev_t = None, None
                for n in range(1, 129):
                    s = reg.log_value(n)
                    assert s >= log_evaluate(reg.spec, n, PREC) - slack
                    t = tail_decay(reg, n)
                    if prev_s is not None:
                        assert s >= prev_s - slack
                        assert t <= prev_t + slack
                    prev_s, prev_t = s, t

    def test_prec_override_consistent(self):
        reg = regularize(SequenceSpec.power("e", 3), 16, PREC)
        a = reg.log_value(5)
        b = reg.log_value(5, 256)
        with workprec(256):
            assert abs(a - b) <= mpf(2) ** -(PREC - 10)
