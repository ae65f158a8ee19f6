from fractions import Fraction as F

import pytest

from padicfrac import (
    FINITE,
    PERIODIC,
    TRUNCATED,
    Algorithm,
    PrimeCtx,
    Surd,
    block_certificate,
    choose_quotient,
    convergents,
    expand,
    parse_algorithm,
    rblock_expand,
    step_update,
    u_sequence,
    vp,
    zero_eliminate,
)
from padicfrac.engine import ExactnessError

from conftest import random_inputs


def vals(res):
    return [b.value for b in res.quotients]


class TestAlgorithmIds:
    def test_parse(self):
        assert parse_algorithm("rblock4") == Algorithm("rblock", 4)
        assert parse_algorithm("rblock:5") == Algorithm("rblock", 5)
        assert parse_algorithm("modified+zeros") == Algorithm("modified", 0, True)
        assert str(Algorithm("rblock", 4, True)) == "rblock4+zeros"

    @pytest.mark.parametrize("bad", ["browkin2", "rblock2", "neww+zeros", ""])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_algorithm(bad)

    def test_phases(self):
        phases = {a: parse_algorithm(a).phase for a in
                  ("browkin1", "browkin4", "murru", "neww", "new", "modified", "rblock5")}
        assert phases == {"browkin1": 2, "browkin4": 2, "murru": 2, "neww": 2,
                          "new": 1, "modified": 3, "rblock5": 5}


class TestStepUpdate:
    def test_rational_chain(self):
        assert step_update(973, 234, 0, 2, 0, 5) == (234, 505)
        assert step_update(234, 505, 0, 4, 1, 5) == (-101, 34)
        assert step_update(-101, 34, 0, -3, 0, 5) == (34, 1)

    def test_quadratic(self):
        # sqrt(19), b = 2: P' = 2*1 - 0, Q' = (19 - 4)/1
        assert step_update(0, 1, 19, 2, 0, 5) == (2, 15)

    def test_inexact_division_raises(self):
        with pytest.raises(ExactnessError):
            step_update(0, 2, 19, 1, 0, 5)


class TestChooseQuotient:
    def test_examples(self):
        ctx = PrimeCtx(5)
        assert choose_quotient("neww", Surd.rational(F(234, 505), ctx), 1) == F(4, 5)
        assert choose_quotient("modified", Surd.rational(F(-101, 34), ctx), 2) == -3
        assert choose_quotient("murru", Surd.sqrt(19, ctx), 0) == 2

    def test_browkin4_rejects_rationals(self):
        with pytest.raises(ValueError):
            expand(Surd.rational(F(3, 7), PrimeCtx(5)), "browkin4")


class TestExpand:
    def test_rationals(self):
        ctx71, ctx5 = PrimeCtx(71), PrimeCtx(5)
        r = expand(Surd.rational(F(103, 21), ctx71), "neww")
        assert r.kind == FINITE and vals(r) == [-12, F(-10, 71), 5]
        r = expand(Surd.rational(F(973, 234), ctx5), "neww")
        assert vals(r) == [2, F(4, 5), -4, F(7, 5), -4, F(3, 5)]
        r = expand(Surd.rational(F(973, 234), ctx5), "modified")
        assert vals(r) == [2, F(4, 5), -3, 34]

    def test_sqrt19(self):
        ctx = PrimeCtx(5)
        r = expand(Surd.sqrt(19, ctx), "neww", 5000)
        assert (r.kind, r.preperiod, r.period) == (PERIODIC, 1, 6)
        assert vals(r) == [2, F(3, 5), -2, F(1, 5), -3, F(2, 5), -1]
        r = expand(Surd.sqrt(19, ctx), "murru")
        assert (r.preperiod, r.period) == (1, 20)
        assert expand(Surd.sqrt(19, ctx), "browkin1", 1000).kind == TRUNCATED

    def test_periodic_state_invariant(self):
        r = expand(Surd.sqrt(19, PrimeCtx(5)), "murru")
        assert r.states[r.preperiod] == r.states[r.preperiod + r.period]

    def test_value_repeat_is_phase_blind(self):
        r = expand(Surd.sqrt(19, PrimeCtx(5)), "modified")
        assert (r.preperiod, r.period) == (6, 12)
        assert r.value_repeat == (11, 15)

    def test_truncation_counts_states(self):
        r = expand(Surd.sqrt(19, PrimeCtx(5)), "browkin1", 10)
        assert r.kind == TRUNCATED and r.steps == 10 and len(r.states) == 11

    def test_bad_arguments(self):
        ctx = PrimeCtx(5)
        with pytest.raises(ValueError):
            expand(Surd.sqrt(19, ctx), "neww", 0)
        with pytest.raises(ValueError):
            expand(Surd.rational(0, ctx), "neww")

    def test_diagnostics_shape(self):
        r = expand(Surd.rational(F(973, 234), PrimeCtx(5)), "neww")
        assert len(r.diagnostics) == r.steps
        d = r.diagnostics[1]
        assert d.vp_alpha == -1 and d.vp_b == -1 and (d.abs_P, d.abs_Q) == (234, 505)

    def test_new_takes_sbar_first(self):
        # v_p(alpha_0) > 0: first quotient comes from s-bar
        r = expand(Surd.rational(F(10, 3), PrimeCtx(5)), "new")
        assert vp(r.quotients[0].value - F(10, 3), 5) > 0

    def test_two_adic(self):
        ctx = PrimeCtx(2)
        for D in (17, 33, 41, 57, 68):
            for alg in ("new", "neww", "modified"):
                assert expand(Surd.sqrt(D, ctx), alg, 3000).kind == PERIODIC


class TestZeroElimination:
    def test_examples(self):
        assert zero_eliminate([1, 2, 0, 3, 4]).quotients == [1, 5, 4]
        assert zero_eliminate([1, 2, 0, 3, 0, 4]).quotients == [1, 9]
        assert zero_eliminate([1, 2, 3]).quotients == [1, 2, 3]

    def test_trailing_zero_flagged(self):
        z = zero_eliminate([1, 2, 0])
        assert z.trailing_zero and z.quotients == [1, 2, 0]

    def test_keep_zeros_policy_produces_zeros(self):
        ctx = PrimeCtx(5)
        r = expand(Surd.sqrt(235032571341, ctx), "modified+zeros", 3000, verify=False)
        assert any(b.value == 0 for b in r.quotients)
        r = expand(Surd.sqrt(235032571341, ctx), "modified", 3000, verify=False)
        assert all(b.value != 0 for b in r.quotients)


class TestConvergents:
    def test_examples(self):
        assert convergents([F(7)]) == [(F(7), F(1))]
        A, B = convergents([1, 2, 3])[2]
        assert A / B == F(10, 7)
        A, B = convergents([2, F(4, 5), -4])[2]
        assert vp(B, 5) == -1

    def test_matches_engine_valuation(self):
        r = expand(Surd.sqrt(19, PrimeCtx(5)), "neww")
        cv = convergents(r.quotients)
        for (A, B), d in zip(cv, r.diagnostics):
            assert vp(B, 5) == d.vp_B


class TestRBlock:
    def test_u_sequence_seed(self):
        U = u_sequence([5, 7, 11, 13], 1, 3)
        assert U[:2] == [1, 7] and U[2] == 11 * 7 + 1

    @pytest.mark.parametrize("p", [3, 5, 7, 11])
    def test_r3_is_modified(self, p):
        for a in random_inputs(p, 60, seed=7):
            m = expand(a, "modified", 300, verify=False)
            r = expand(a, "rblock3", 300, verify=False)
            assert m.quotients == r.quotients and m.kind == r.kind

    def test_sqrt19_block4_certificate(self):
        res, cert = rblock_expand(Surd.sqrt(19, PrimeCtx(5)), 4, 2000)
        assert res.kind in (PERIODIC, TRUNCATED)
        assert cert.r == 4 and cert.blocks_checked > 0
        if cert.holds:
            assert not cert.violations

    def test_certificate_reports_violations(self):
        # U_2^(2) = b_3 b_2 + 1 = 4*1 + 1 is divisible by 5
        qs = [1, F(1, 5), 1, 4, 1, F(1, 5), 1, 1, 1]
        cert = block_certificate(qs, 3, 5)
        assert cert.violations and not cert.holds

    def test_rejects_small_r(self):
        with pytest.raises(ValueError):
            rblock_expand(Surd.sqrt(19, PrimeCtx(5)), 2)
