import numpy as np
import pytest

from gromarket.payoff import ConfigError, DiscreteDistribution, PayoffProcess, WealthProportionalPayoff
from gromarket.strategies import (GRORule, History, RuinError, ScheduleRule, ScriptedRule,
                                  ShiftedGRORule, as_proportions, example6_opponent, gro_rule,
                                  representative, rule_from_dict, schedule_rule)


def hist(state="s", wealth=(1.0, 1.0), t=0):
    y = np.array(wealth, dtype=float)
    return History(initial_wealth=y, past_profiles=[None] * t, current_state=state,
                   current_wealth=y)


def test_as_proportions_validation():
    assert as_proportions([0.5, 0.5]).tolist() == [0.5, 0.5]
    assert as_proportions([1.0, 1e-13]).sum() <= 1.0
    for bad in ([1.2], [-0.1], [0.6, 0.6], [float("nan")]):
        with pytest.raises(ConfigError):
            as_proportions(bad)
    with pytest.raises(ConfigError):
        as_proportions([0.5], n=2)


def test_gro_rule_examples():
    proc = WealthProportionalPayoff(0.5, 1.0)
    rule = gro_rule(proc)
    for w in ((1.0, 1.0), (0.3, 5.0), (2.0, 0.01)):
        assert rule(1, hist(wealth=w)) == pytest.approx([0.5], abs=1e-12)

    K = DiscreteDistribution.from_atoms([([1.0, 3.0], 0.5), ([2.0, 2.0], 0.5)])
    rule = gro_rule(PayoffProcess.iid(K, 0.0))
    assert rule(1, hist()) == pytest.approx([0.5 * 0.25 + 0.5 * 0.5, 0.5 * 0.75 + 0.5 * 0.5],
                                            abs=1e-15)

    rule = gro_rule(PayoffProcess.iid(DiscreteDistribution.point_mass([2.0]), 1.0))
    assert rule(1, hist(wealth=(2.5, 2.5))) == pytest.approx([0.4], abs=1e-12)


def test_gro_rule_ruin():
    rule = gro_rule(PayoffProcess.iid(DiscreteDistribution.point_mass([2.0]), 1.0))
    with pytest.raises(RuinError):
        rule(1, hist(wealth=(0.0, 0.0)))


def test_gro_rule_is_markov():
    # depends only on total wealth and state, not on the split or past
    K = DiscreteDistribution.from_atoms([([0.5], 0.5), ([2.0], 0.5)])
    rule = gro_rule(PayoffProcess.iid(K, 1.0))
    a = rule(1, hist(wealth=(1.0, 2.0)))
    b = rule(7, hist(wealth=(2.9, 0.1), t=6))
    assert a.tolist() == b.tolist()


def test_representative_examples():
    assert representative([[0.9, 0.0], [0.2, 0.5]], [0.3, 0.7], 0).tolist() == [0.2, 0.5]
    out = representative([[0.1, 0.1], [1.0, 0.0], [0.0, 1.0]], [0.5, 0.25, 0.25], 0)
    assert out.tolist() == [0.5, 0.5]
    assert representative([[0.1, 0.1], [1.0, 0.0], [0.0, 1.0]], [1, 0, 0], 0).tolist() == [0, 0]


def test_schedule_examples():
    half = schedule_rule(lambda t: [0.5])
    assert all(half(t, hist()).tolist() == [0.5] for t in range(1, 20))
    opp = ScheduleRule(example6_opponent)
    assert opp(3, hist()).tolist() == [0.75]
    assert opp(1, hist()).tolist() == [0.5]
    assert opp(2, hist()).tolist() == [1.0]


def test_schedule_invalid_vector():
    bad = schedule_rule(lambda t: [0.5 if t < 3 else 1.5])
    bad(2, hist())
    with pytest.raises(ConfigError):
        bad(3, hist())


def test_scripted_lookup_order():
    rule = ScriptedRule({(2, "a"): [0.1], 2: [0.2], "a": [0.3]}, default=[0.4])
    assert rule(2, hist("a")).tolist() == [0.1]
    assert rule(2, hist("b")).tolist() == [0.2]
    assert rule(3, hist("a")).tolist() == [0.3]
    assert rule(3, hist("b")).tolist() == [0.4]
    with pytest.raises(ConfigError):
        ScriptedRule({})(1, hist())


def test_shifted_gro_distance():
    K = DiscreteDistribution.from_atoms([([0.5], 0.5), ([2.0], 0.5)])
    proc = PayoffProcess.iid(K, 1.0)
    lam = GRORule(proc)(1, hist())
    shifted = ShiftedGRORule(proc, 0.2)(1, hist())
    assert abs(shifted - lam).sum() == pytest.approx(0.2, abs=1e-15)


def test_rule_from_dict_kinds():
    proc = PayoffProcess.iid(DiscreteDistribution.point_mass([2.0]), 1.0)
    assert rule_from_dict({"kind": "gro"}, proc).kind == "gro"
    assert rule_from_dict({"kind": "constant", "weights": [0.3]}, proc)(1, hist()).tolist() == [0.3]
    sched = rule_from_dict({"kind": "schedule", "table": {"1": [0.1], "2": [0.2]}}, proc)
    assert sched(5, hist()).tolist() == [0.2]
    sched = rule_from_dict({"kind": "schedule", "formula": "example6-opponent"}, proc)
    assert sched(3, hist()).tolist() == [0.75]
    scripted = rule_from_dict({"kind": "scripted", "table": [{"t": 1, "weights": [0.6]}],
                               "default": [0.0]}, proc)
    assert scripted(1, hist()).tolist() == [0.6] and scripted(2, hist()).tolist() == [0.0]
    with pytest.raises(ConfigError):
        rule_from_dict({"kind": "oracle"}, proc)
