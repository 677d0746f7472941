import pytest

from zetacalc.evaluator import WireBudgetError
from zetacalc.syntax import Basis, Phase, alpha_eq, parse
from zetacalc.theory import (
    beta_step,
    check_rule_instance,
    commutes_with_sharing,
    denotational_equal,
    normalize,
    rules,
    run_suite,
    standard_instances,
)
from zetacalc.types import Context, Numeral

EMPTY = Context()

RULE_IDS = [
    "alpha",
    "beta-linear",
    "eta",
    "cong-abs",
    "lambda-embed",
    "phase-absorb",
    "rot-compose",
    "copy",
    "pi-commute",
    "color-change",
    "h-gen",
    "unit-left",
    "unit-right",
]


class TestRules:
    def test_thirteen_schemas(self):
        rs = rules()
        assert len(rs) == 13
        assert [r.id for r in rs] == RULE_IDS

    def test_basis_duals_present_in_pool(self):
        pool = standard_instances()
        for rid in ("copy", "pi-commute", "color-change"):
            bases = {b["basis"] for r, b, _ in pool if r.id == rid}
            assert bases == {Basis.Z, Basis.X}

    def test_pool_covers_every_rule(self):
        covered = {r.id for r, _, _ in standard_instances()}
        assert covered == set(RULE_IDS)


class TestCheckRuleInstance:
    def _rule(self, rid):
        return next(r for r in rules() if r.id == rid)

    def test_beta_identity(self):
        v = check_rule_instance(
            self._rule("beta-linear"),
            {"M": parse("x"), "N": parse("Z[1]"), "ann": Numeral(1)},
            EMPTY,
        )
        assert v.status == "sound"
        assert v.scalar is not None

    def test_copy_pi_pole(self):
        v = check_rule_instance(
            self._rule("copy"),
            {"basis": Basis.Z, "alpha": Phase.zero(), "a": 1, "M": parse("<x,x>")},
            EMPTY,
        )
        assert v.status == "sound"

    def test_copy_bad_exponent(self):
        v = check_rule_instance(
            self._rule("copy"),
            {"basis": Basis.Z, "alpha": Phase.zero(), "a": 2, "M": parse("x")},
            EMPTY,
        )
        assert v.status == "side-condition-unmet"

    def test_eta_on_effect(self):
        v = check_rule_instance(
            self._rule("eta"), {"M": parse("Z[-1]"), "ann": None}, EMPTY
        )
        assert v.status == "sound"

    def test_pi_commute_side_condition(self):
        r = self._rule("pi-commute")
        unmet = check_rule_instance(
            r,
            {"basis": Basis.Z, "alpha": Phase.exact(1, 2), "a": 0, "M": parse("x")},
            EMPTY,
        )
        assert unmet.status == "side-condition-unmet"
        met = check_rule_instance(
            r,
            {"basis": Basis.Z, "alpha": Phase.exact(1, 2), "a": 1, "M": parse("x")},
            EMPTY,
        )
        assert met.status == "sound"

    def test_alpha_requires_linearity(self):
        v = check_rule_instance(
            self._rule("alpha"), {"M": parse("<x,x>"), "ann": Numeral(1)}, EMPTY
        )
        assert v.status == "side-condition-unmet"

    def test_verdict_json(self):
        v = check_rule_instance(
            self._rule("h-gen"), {"basis": Basis.Z, "alpha": Phase.exact(1)}, EMPTY
        )
        doc = v.to_json_obj()
        assert doc["rule"] == "h-gen" and doc["status"] == "sound"


class TestSuite:
    def test_no_unsound_verdicts(self):
        verdicts = run_suite()
        assert len(verdicts) >= 100
        bad = [v for v in verdicts if v.status in ("unsound", "type-error")]
        assert bad == []
        assert sum(v.status == "sound" for v in verdicts) > len(verdicts) / 2


class TestCommutesWithSharing:
    def test_x_pole_through_z(self):
        assert commutes_with_sharing(EMPTY, parse("X[1]^pi"), Basis.Z, 2)
        assert commutes_with_sharing(EMPTY, parse("X[1]^pi"), Basis.Z, 3)

    def test_negative_control(self):
        assert not commutes_with_sharing(EMPTY, parse("Z[1]^pi/2"), Basis.Z, 2)

    def test_n1_always(self):
        for src in ["Z[1]^pi/2", "X[1]", "Z x:1. <x,x>"]:
            assert commutes_with_sharing(EMPTY, parse(src), Basis.Z, 1)
            assert commutes_with_sharing(EMPTY, parse(src), Basis.X, 1)

    def test_budget(self):
        with pytest.raises(WireBudgetError):
            commutes_with_sharing(EMPTY, parse("Z[5]"), Basis.Z, 3)


class TestBetaStep:
    def test_identity_redex(self):
        t = beta_step(parse("(\\x:1. x) Z[1]"))
        assert alpha_eq(t, parse("Z[1]"))

    def test_linear_chain(self):
        t = parse("(\\f:1->1. f Z[1]) (\\y:1. y)")
        r = normalize(t)
        assert r.normal_form and r.steps == 2
        assert alpha_eq(r.term, parse("Z[1]"))

    def test_shared_redex_not_reduced(self):
        assert beta_step(parse("(Z x:1. <x,x>) Z[1]")) is None

    def test_phase_binder_not_reduced(self):
        assert beta_step(parse("(Z^pi/2 x:1. x) Z[1]")) is None

    def test_vacuous_binder_needs_closed_argument(self):
        t = parse("(Z x:1. Z[2]) Z[1]")
        assert beta_step(t) is not None
        open_arg = parse("(Z x:1. Z[2]) y")
        assert beta_step(open_arg) is None

    def test_no_redex(self):
        r = normalize(parse("Z[1]"))
        assert r.steps == 0 and r.normal_form

    def test_unit_redex(self):
        r = normalize(parse("(\\x:0. x)((\\y:0. y) *)"))
        assert r.steps == 2
        assert alpha_eq(r.term, parse("*"))

    def test_steps_preserve_denotation(self):
        for src in [
            "(\\x:1. x) Z[1]",
            "(\\f:1->1. f Z[1]) (\\y:1. y)",
            "(\\x:1. <x, Z[1]>) X[1]^pi",
        ]:
            t = parse(src)
            while True:
                nxt = beta_step(t)
                if nxt is None:
                    break
                assert denotational_equal(EMPTY, t, nxt, 1e-9) is not None
                t = nxt

    def test_h_normalizes_to_rotation_spine(self):
        r = normalize(parse("H"), max_steps=10)
        assert r.normal_form and r.steps <= 5


class TestComposeBasisIrrelevance:
    def test_zeta_vs_xi_elaboration(self):
        from zetacalc.syntax import compose, rotation

        m = rotation(Basis.Z, Phase.exact(1, 2))
        n = rotation(Basis.X, Phase.exact(1))
        for a, b in [(m, n), (n, m)]:
            tz = compose(a, b, Basis.Z)
            tx = compose(a, b, Basis.X)
            assert denotational_equal(EMPTY, tz, tx, 1e-9) is not None
