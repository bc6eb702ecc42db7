import dataclasses
import itertools

import pytest

from mmcast.schedule import (
    Schedule,
    Transmission,
    completion_time,
    load_schedule,
    make_transmission,
    save_schedule,
    unreachable_nodes,
    validate,
)
from mmcast.topology import generate_scenario, scenario_from_positions


def _synthetic(pn, cns, duration):
    return Transmission(
        pn=pn,
        tns=frozenset(cns),
        cns=frozenset(cns),
        lobes=frozenset([1]),
        rate_bps=1e9 / duration,
        duration_s=duration,
        bits=1e9,
    )


def _relay_plan(scn):
    mk = lambda pn, cns: make_transmission(scn, pn, cns)
    return [[mk(0, [3])], [mk(0, [1, 2]), mk(3, [5])], [mk(3, [4])]]


def test_slot_sum_of_maxima():
    sched = Schedule(
        [[_synthetic(0, [1], 1.0)], [_synthetic(0, [2], 3.0), _synthetic(1, [3], 2.0)], [_synthetic(2, [4], 1.0)]]
    )
    assert completion_time(sched) == 5.0
    assert sched.slot_durations == [1.0, 3.0, 1.0]
    assert sched.n_slots == 3


def test_completion_time_permutation_invariant():
    slot = [_synthetic(0, [2], 3.0), _synthetic(1, [3], 2.0), _synthetic(4, [5], 2.5)]
    base = completion_time(Schedule([[_synthetic(0, [1], 1.0)], slot]))
    for perm in itertools.permutations(slot):
        assert completion_time(Schedule([[_synthetic(0, [1], 1.0)], list(perm)])) == base


def test_empty_schedule():
    with pytest.raises(ValueError):
        completion_time(Schedule([]))
    s = generate_scenario(2, 45.0, 0)
    assert [v.rule for v in validate(Schedule([]), s)] == ["coverage", "coverage"]


def test_relay_plan_is_feasible(schedule_scenario):
    sched = Schedule(_relay_plan(schedule_scenario))
    assert validate(sched, schedule_scenario) == []


def test_child_before_holding_frame_rejected(schedule_scenario):
    plan = _relay_plan(schedule_scenario)
    plan[1][1] = make_transmission(schedule_scenario, 4, [5])
    rules = {v.rule for v in validate(Schedule(plan), schedule_scenario)}
    assert "causality" in rules


def test_relay_in_first_slot_rejected(schedule_scenario):
    plan = _relay_plan(schedule_scenario)
    plan[0].append(make_transmission(schedule_scenario, 4, [5]))
    rules = {v.rule for v in validate(Schedule(plan), schedule_scenario)}
    assert "source-first" in rules


def test_missing_node_rejected(schedule_scenario):
    plan = _relay_plan(schedule_scenario)
    plan[1] = plan[1][:1]
    violations = validate(Schedule(plan), schedule_scenario)
    assert [v.rule for v in violations] == ["coverage"]
    assert "5" in violations[0].message


def test_double_parent_and_double_transmit_rejected(schedule_scenario):
    plan = _relay_plan(schedule_scenario)
    plan[2].append(make_transmission(schedule_scenario, 1, [4]))
    assert "slot" in {v.rule for v in validate(Schedule(plan), schedule_scenario)}
    plan = _relay_plan(schedule_scenario)
    plan[1].append(make_transmission(schedule_scenario, 3, [4]))
    assert "slot" in {v.rule for v in validate(Schedule(plan), schedule_scenario)}


def test_overstated_rate_rejected(schedule_scenario):
    plan = _relay_plan(schedule_scenario)
    t = plan[2][0]
    plan[2][0] = dataclasses.replace(t, rate_bps=t.rate_bps * 1.01, duration_s=t.bits / (t.rate_bps * 1.01))
    assert "transmission" in {v.rule for v in validate(Schedule(plan), schedule_scenario)}


def test_two_targets_in_one_lobe_rejected(sample_scenario):
    t = make_transmission(sample_scenario, 0, [1, 2])
    bad = dataclasses.replace(t, tns=frozenset([1, 2]))
    rules = {v.rule for v in validate(Schedule([[bad]]), sample_scenario)}
    assert "lobe-target" in rules


def test_blocked_link_rejected(schedule_scenario):
    plan = _relay_plan(schedule_scenario)
    plan[2][0] = make_transmission(schedule_scenario, 2, [4])
    plan[2].append(make_transmission(schedule_scenario, 3, [5]))
    assert "transmission" in {v.rule for v in validate(Schedule(plan), schedule_scenario)}


def test_weakest_child_is_target(sample_scenario):
    t = make_transmission(sample_scenario, 0, [1, 2])
    assert t.lobes == {1} and t.tns == {2}
    assert t.duration_s == pytest.approx(t.bits / t.rate_bps)


def test_partial_payloads_accumulate():
    s = scenario_from_positions([(0, 0), (50, 0)], 45.0)
    half = make_transmission(s, 0, [1], bits=s.radio.frame_bits / 2)
    assert validate(Schedule([[half]]), s)[0].rule == "coverage"
    assert validate(Schedule([[half], [half]]), s) == []


def test_round_trip(tmp_path, schedule_scenario):
    sched = Schedule(_relay_plan(schedule_scenario), algorithm="manual", meta={"note": "x"})
    save_schedule(sched, tmp_path / "s.json")
    back = load_schedule(tmp_path / "s.json")
    assert back == sched
    assert back.total_time_s == sched.total_time_s
    assert back.meta == {"note": "x"}


def test_unreachable_nodes(schedule_scenario):
    assert unreachable_nodes(schedule_scenario) == []
    s = scenario_from_positions([(0, 0), (10, 0), (20, 5)], 45.0, blocked=[(0, 2)])
    assert unreachable_nodes(s) == []
    assert unreachable_nodes(s, source_only=True) == [2]
    s = scenario_from_positions([(0, 0), (10, 0), (20, 5)], 45.0, blocked=[(0, 2), (1, 2)])
    assert unreachable_nodes(s) == [2]
