from fractions import Fraction as F

import pytest

from padicfrac import (
    PERIODIC,
    PrimeCtx,
    Surd,
    audit_bounds,
    expand,
    finiteness_bound,
    rational_digit_oracle,
    reconstruct_rational,
    verify_period,
)
from padicfrac.oracle import AuditReport, oracle_expand


class TestDigitOracle:
    def test_examples(self):
        assert rational_digit_oracle(F(234, 505), 5, 1) == [-1, 2, -2]
        assert rational_digit_oracle(F(973, 234), 5, 2) == [2, -1, -2]
        assert rational_digit_oracle(1, 7, 3) == [1, 0, 0, 0]

    def test_s_from_digits(self):
        ds = rational_digit_oracle(F(973, 234), 5, 0)
        assert sum(d * 5 ** i for i, d in enumerate(ds)) == 2

    def test_zero(self):
        with pytest.raises(ValueError):
            rational_digit_oracle(0, 5, 3)


class TestReconstruct:
    def test_examples(self):
        assert reconstruct_rational([-12, F(-10, 71), 5]) == F(103, 21)
        assert reconstruct_rational([2, F(4, 5), -4, F(7, 5), -4, F(3, 5)]) == F(973, 234)
        assert reconstruct_rational([F(3, 7)]) == F(3, 7)

    def test_not_231_over_74(self):
        assert reconstruct_rational([2, F(4, 5), -4, F(7, 5), -4, F(3, 5)]) != F(231, 74)

    def test_malformed(self):
        with pytest.raises(ValueError):
            reconstruct_rational([1, 1, -1])


class TestVerifyPeriod:
    def test_sqrt19(self):
        ctx = PrimeCtx(5)
        for alg, shape in (("neww", (1, 6)), ("murru", (1, 20))):
            res = expand(Surd.sqrt(19, ctx), alg, verify=False)
            rep = verify_period(Surd.sqrt(19, ctx), alg, res)
            assert rep.passed and (res.preperiod, res.period) == shape

    def test_truncated_rejected(self):
        ctx = PrimeCtx(5)
        res = expand(Surd.sqrt(19, ctx), "browkin1", 50)
        with pytest.raises(ValueError):
            verify_period(Surd.sqrt(19, ctx), "browkin1", res)

    def test_detects_tampered_period(self):
        ctx = PrimeCtx(5)
        res = expand(Surd.sqrt(19, ctx), "murru", verify=False)
        res.period = 10
        rep = verify_period(Surd.sqrt(19, ctx), "murru", res)
        assert not rep.passed
        assert all(c.witness_index is not None or c.witness is not None for c in rep.failures())

    def test_detects_non_minimal_period(self):
        ctx = PrimeCtx(5)
        res = expand(Surd.sqrt(19, ctx), "neww", verify=False)
        res.quotients = res.quotients + res.period_quotients
        res.states = res.states + res.states[2:]
        res.period = 12
        rep = verify_period(Surd.sqrt(19, ctx), "neww", res)
        assert "no earlier recurrence" in [c.name for c in rep.failures()]

    def test_independent_loop_agrees_on_normalized_input(self):
        ctx = PrimeCtx(7)
        a = Surd(F(1, 2), 3, 2, ctx)
        res = expand(a, "neww", 2000)
        states, qs, finite = oracle_expand(a, "neww", 40)
        assert not finite and res.kind == PERIODIC
        mine = [b.value for b in res.quotients]
        cyc = mine[res.preperiod:]
        while len(mine) < 40:
            mine += cyc
        assert mine[:40] == qs[:40]


class TestAuditBounds:
    def test_rational_step_bound(self):
        ctx = PrimeCtx(71)
        x = F(1309328571134, 103481351)
        res = expand(Surd.rational(x, ctx), "neww")
        rep = audit_bounds(Surd.rational(x, ctx), "neww", res)
        assert rep.passed and res.steps == 14
        assert res.steps <= finiteness_bound(235713135135)

    def test_bound_formula(self):
        assert finiteness_bound(1) == 2
        assert finiteness_bound(4) == 4
        assert finiteness_bound(5) == 6
        assert finiteness_bound(235713135135) == 2 * 19 + 2

    def test_p3_m_bound(self):
        ctx = PrimeCtx(3)
        for D in (7, 10, 13, 19, 22):
            res = expand(Surd.sqrt(D, ctx), "neww", 5000)
            rep = audit_bounds(Surd.sqrt(D, ctx), "neww", res)
            assert rep.passed and any("max" in c.name for c in rep.checks)

    def test_p5_modified_block_bound(self):
        ctx = PrimeCtx(5)
        res = expand(Surd.sqrt(19, ctx), "modified")
        rep = audit_bounds(Surd.sqrt(19, ctx), "modified", res)
        assert rep.passed and rep.checks

    def test_failing_check_needs_witness(self):
        rep = AuditReport({})
        with pytest.raises(ValueError):
            rep.add("x", False)
        rep.add("x", False, 3)
        assert not rep.passed and rep.to_dict()["checks"][0]["witness_index"] == 3
