"""Fuzzy engine: memberships, rule generation, inference, defuzzification."""

import json
import random

import pytest
from hypothesis import given, strategies as st

from fogsim import fuzzy
from fogsim.errors import ConfigurationError, UndefinedScoreError
from fogsim.fuzzy import (
    Connective,
    FuzzyScorer,
    FuzzyVariable,
    OutputLabel,
    OutputVariable,
    Rule,
    RuleBase,
    SetLabel,
    TrapezoidSet,
    build_rule_base,
    cpmnr_score,
    defuzzify,
    infer,
    mrp_score,
    normalize,
)

from oracle_fuzzy import brute_force_activations, brute_force_score

MOBILITY = FuzzyVariable.default("mobility")


class TestNormalize:
    def test_lower_bound(self):
        assert normalize(3.0, 3.0, 10.0) == 0.0

    def test_upper_bound(self):
        assert normalize(10.0, 3.0, 10.0) == 1.0

    def test_midpoint(self):
        assert normalize(5.0, 0.0, 10.0) == 0.5

    def test_out_of_range_names_parameter(self):
        with pytest.raises(ValueError, match="response"):
            normalize(11.0, 0.0, 10.0, name="response")

    def test_degenerate_range_rejected(self):
        with pytest.raises(ValueError, match="beta"):
            normalize(1.0, 5.0, 5.0)


class TestMembership:
    def test_good_is_half_at_40(self):
        assert MOBILITY.good.membership(40.0) == pytest.approx(0.5)

    def test_mid_is_half_at_40(self):
        assert MOBILITY.mid.membership(40.0) == pytest.approx(0.5)

    def test_crossover_at_50(self):
        # low membership 0 / normal membership 1 at the 50 mark
        assert MOBILITY.good.membership(50.0) == 0.0
        assert MOBILITY.mid.membership(50.0) == 1.0

    def test_mid_plateau(self):
        assert MOBILITY.mid.membership(60.0) == 1.0

    def test_bad_plateau_from_90(self):
        assert MOBILITY.bad.membership(90.0) == 1.0
        assert MOBILITY.bad.membership(95.0) == 1.0

    def test_out_of_domain_rejected(self):
        with pytest.raises(ValueError):
            MOBILITY.good.membership(101.0)

    def test_breakpoint_ordering_enforced(self):
        with pytest.raises(ConfigurationError):
            TrapezoidSet(SetLabel.MID, 50.0, 30.0, 70.0, 90.0)

    def test_partition_of_unity_on_grid(self):
        xs = [i * 0.5 for i in range(201)]
        for x in xs:
            g, m, b = MOBILITY.memberships(x)
            assert g + m + b == pytest.approx(1.0, abs=1e-9)

    def test_matches_oracle_memberships(self):
        rng = random.Random(7)
        for _ in range(200):
            x = rng.uniform(0.0, 100.0)
            from oracle_fuzzy import memberships as oracle_mu

            assert MOBILITY.memberships(x) == pytest.approx(oracle_mu(x), abs=1e-12)


class TestRuleBase:
    def test_k3_counts(self):
        rb = build_rule_base(["mobility", "response", "power"])
        assert len(rb.rules) == 9
        counts = rb.counts()
        assert counts[OutputLabel.HIGH] == 1
        assert counts[OutputLabel.LOW] == 1
        assert counts[OutputLabel.NORMAL] == 7

    def test_k5_counts(self):
        rb = build_rule_base(list("abcde"))
        assert len(rb.rules) == 33
        assert rb.counts()[OutputLabel.NORMAL] == 31

    def test_k1_counts(self):
        rb = build_rule_base(["x"])
        assert len(rb.rules) == 3
        assert rb.counts() == {OutputLabel.LOW: 1, OutputLabel.NORMAL: 1, OutputLabel.HIGH: 1}

    def test_structure(self):
        rb = build_rule_base(["a", "b", "c"])
        or_rules = [r for r in rb.rules if r.connective is Connective.OR]
        assert len(or_rules) == 1
        assert all(label is SetLabel.BAD for _, label in or_rules[0].antecedent)
        assert or_rules[0].consequent is OutputLabel.HIGH
        low_rules = [r for r in rb.rules if r.consequent is OutputLabel.LOW]
        assert len(low_rules) == 1
        assert all(label is SetLabel.GOOD for _, label in low_rules[0].antecedent)
        normal_combos = {
            tuple(label for _, label in r.antecedent)
            for r in rb.rules
            if r.consequent is OutputLabel.NORMAL
        }
        assert len(normal_combos) == 7
        assert all(SetLabel.BAD not in combo for combo in normal_combos)
        assert tuple([SetLabel.GOOD] * 3) not in normal_combos

    def test_deterministic_order(self):
        assert build_rule_base(["a", "b"]) == build_rule_base(["a", "b"])

    def test_empty_rejected(self):
        with pytest.raises(ConfigurationError):
            build_rule_base([])


MRP_VARS = {name: FuzzyVariable.default(name) for name in ("mobility", "response", "power")}
MRP_RULES = build_rule_base(("mobility", "response", "power"))


class TestInfer:
    def test_all_safe_only_low_fires(self):
        acts = infer(MRP_RULES, MRP_VARS, {"mobility": 10, "response": 10, "power": 10})
        assert acts == {OutputLabel.LOW: 1.0, OutputLabel.NORMAL: 0.0, OutputLabel.HIGH: 0.0}

    def test_split_low_normal(self):
        acts = infer(MRP_RULES, MRP_VARS, {"mobility": 40, "response": 20, "power": 20})
        assert acts[OutputLabel.LOW] == pytest.approx(0.5)
        assert acts[OutputLabel.NORMAL] == pytest.approx(0.5)
        assert acts[OutputLabel.HIGH] == 0.0

    def test_split_normal_high(self):
        acts = infer(MRP_RULES, MRP_VARS, {"mobility": 80, "response": 20, "power": 20})
        assert acts[OutputLabel.LOW] == 0.0
        assert acts[OutputLabel.NORMAL] == pytest.approx(0.5)
        assert acts[OutputLabel.HIGH] == pytest.approx(0.5)

    def test_missing_input_is_configuration_error(self):
        with pytest.raises(ConfigurationError, match="power"):
            infer(MRP_RULES, MRP_VARS, {"mobility": 10, "response": 10})


class TestDefuzzify:
    OUT = OutputVariable.default()

    def test_single_set_returns_its_center(self):
        acts = {OutputLabel.LOW: 1.0, OutputLabel.NORMAL: 0.0, OutputLabel.HIGH: 0.0}
        assert defuzzify(acts, self.OUT) == 25.0

    def test_low_normal_mix(self):
        acts = {OutputLabel.LOW: 0.5, OutputLabel.NORMAL: 0.5, OutputLabel.HIGH: 0.0}
        assert defuzzify(acts, self.OUT) == pytest.approx(45.0)

    def test_normal_high_mix(self):
        acts = {OutputLabel.NORMAL: 0.5, OutputLabel.HIGH: 0.5}
        assert defuzzify(acts, self.OUT) == pytest.approx(77.5)

    def test_all_zero_is_undefined(self):
        with pytest.raises(UndefinedScoreError):
            defuzzify({}, self.OUT)

    def test_centers_must_increase(self):
        with pytest.raises(ConfigurationError):
            OutputVariable(
                low=TrapezoidSet(SetLabel.GOOD, 0, 0, 30, 50),
                normal=TrapezoidSet(SetLabel.MID, 50, 60, 70, 80),
                high=TrapezoidSet(SetLabel.BAD, 80, 90, 100, 100),
                centers={OutputLabel.LOW: 70.0, OutputLabel.NORMAL: 65.0, OutputLabel.HIGH: 90.0},
            )


class TestScorers:
    def test_mrp_examples(self):
        assert mrp_score(10, 10, 10) == pytest.approx(25.0)
        assert mrp_score(40, 20, 20) == pytest.approx(45.0)
        assert mrp_score(80, 20, 20) == pytest.approx(77.5)

    def test_cpmnr_examples(self):
        # Expected values computed with the brute-force oracle in
        # oracle_fuzzy.py and frozen here.
        assert cpmnr_score(10, 10, 10, 10, 10) == pytest.approx(25.0)
        assert cpmnr_score(85, 85, 85, 85, 85) == pytest.approx(83.75)
        assert cpmnr_score(60, 10, 10, 10, 10) == pytest.approx(65.0)

    def test_input_count_checked(self):
        with pytest.raises(ConfigurationError):
            fuzzy.mrp_scorer().score((10, 10))

    def test_out_of_range_clamped_with_warning(self, caplog):
        import logging

        with caplog.at_level(logging.WARNING, logger="fogsim.fuzzy"):
            clamped = mrp_score(120.0, 10, 10)
        assert clamped == pytest.approx(mrp_score(100.0, 10, 10))
        assert any("clamping" in rec.message for rec in caplog.records)

    def test_determinism_bit_identical(self):
        values = (33.7, 61.2, 18.9, 74.4, 52.0)
        first = cpmnr_score(*values)
        for _ in range(5):
            assert cpmnr_score(*values) == first

    def test_partition_of_unity_all_variables(self):
        variables = list(fuzzy.mrp_scorer().variables) + list(fuzzy.cpmnr_scorer().variables)
        assert len(variables) == 8
        xs = [i * 0.5 for i in range(201)]
        for var in variables:
            for x in xs:
                assert sum(var.memberships(x)) == pytest.approx(1.0, abs=1e-9)

    def test_score_bounds(self):
        rng = random.Random(11)
        scorer = fuzzy.cpmnr_scorer()
        for _ in range(300):
            s = scorer.score([rng.uniform(0, 100) for _ in range(5)])
            assert 25.0 <= s <= 90.0

    def test_matches_brute_force_oracle(self):
        rng = random.Random(20240809)
        mrp = fuzzy.mrp_scorer()
        cpmnr = fuzzy.cpmnr_scorer()
        for _ in range(1000):
            v3 = [rng.uniform(0, 100) for _ in range(3)]
            v5 = [rng.uniform(0, 100) for _ in range(5)]
            assert mrp.score(v3) == pytest.approx(brute_force_score(v3), abs=1e-9)
            assert cpmnr.score(v5) == pytest.approx(brute_force_score(v5), abs=1e-9)

    def test_fast_path_equals_infer_defuzzify(self):
        rng = random.Random(3)
        scorer = fuzzy.cpmnr_scorer()
        varmap = {v.name: v for v in scorer.variables}
        for _ in range(200):
            inputs = {name: rng.uniform(0, 100) for name in scorer.names}
            acts = infer(scorer.rule_base, varmap, inputs)
            assert scorer.score_map(inputs) == pytest.approx(defuzzify(acts, scorer.output), abs=1e-12)

    # Monotonicity holds on the five-interval grid {0,20,...,100}. It does
    # NOT hold at finer resolution: min/max inference lets the best NORMAL
    # rule dip while an input crosses its GOOD/MID overlap, e.g.
    # score(35,0,45)=55 > score(40,0,45)=51.67 for the reactive scorer.
    GRID = [0.0, 20.0, 40.0, 60.0, 80.0, 100.0]

    def test_grid_monotonicity_k3(self):
        scorer = fuzzy.mrp_scorer()
        for axis in range(3):
            for u in self.GRID:
                for v in self.GRID:
                    prev = None
                    for x in self.GRID:
                        point = [u, v]
                        point.insert(axis, x)
                        s = scorer.score(point)
                        if prev is not None:
                            assert s >= prev - 1e-9
                        prev = s

    def test_grid_monotonicity_k5_pinned(self):
        scorer = fuzzy.cpmnr_scorer()
        pins = [(0.0, 20.0, 40.0), (20.0, 20.0, 20.0), (40.0, 60.0, 80.0)]
        for pinned in pins:
            for axis in range(2):
                for u in self.GRID:
                    prev = None
                    for x in self.GRID:
                        free = [u, u]
                        free[axis] = x
                        s = scorer.score([free[0], free[1], *pinned])
                        if prev is not None and axis == 0:
                            assert s >= prev - 1e-9
                        prev = s

    def test_activations_match_oracle(self):
        scorer = fuzzy.mrp_scorer()
        rng = random.Random(5)
        for _ in range(100):
            values = [rng.uniform(0, 100) for _ in range(3)]
            acts = scorer.activations(dict(zip(scorer.names, values)))
            oracle = brute_force_activations(values)
            for label in OutputLabel:
                assert acts[label] == pytest.approx(oracle[label.value], abs=1e-12)


class TestSerialization:
    def test_rules_document_round_trips(self):
        doc = fuzzy.rules_document()
        text = json.dumps(doc, sort_keys=True)
        back = json.loads(text)
        assert set(back["scorers"]) == {"mrp", "cpmnr"}
        rb = RuleBase.from_dict(back["scorers"]["cpmnr"]["rules"])
        assert rb == fuzzy.cpmnr_scorer().rule_base
        var = FuzzyVariable.from_dict(back["scorers"]["mrp"]["variables"][0])
        assert var == fuzzy.mrp_scorer().variables[0]
        out = OutputVariable.from_dict(back["scorers"]["mrp"]["output"])
        assert out.centers[OutputLabel.NORMAL] == 65.0

    def test_dump_rules_writes_file(self, tmp_path):
        path = tmp_path / "rules.json"
        text = fuzzy.dump_rules(str(path))
        assert json.loads(path.read_text()) == json.loads(text)

    def test_rule_round_trip(self):
        rule = Rule((("a", SetLabel.BAD),), Connective.OR, OutputLabel.HIGH)
        assert Rule.from_dict(rule.to_dict()) == rule


@given(st.floats(min_value=0.0, max_value=100.0))
def test_partition_of_unity_everywhere(x):
    g, m, b = MOBILITY.memberships(x)
    assert g + m + b == pytest.approx(1.0, abs=1e-9)


@given(st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=3, max_size=3))
def test_score_always_defined_for_defaults(values):
    # With the default partition-of-unity breakpoints at least one rule
    # always fires, so a score exists for any input vector.
    s = mrp_score(*values)
    assert 25.0 <= s <= 90.0
