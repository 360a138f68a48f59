import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rover
from explicable.features import (PLAN_START, action_features, canonical, extract_plan_features,
                                 extract_relaxed_features, fluent_feature, state_features)
from explicable.pddl import InapplicableActionError, apply
from explicable.rover import RoverConfig, gen_problem
from explicable.search import ehc_plan, rpg_heuristic


def worked_example():
    inst = rover(3, 3, rover=1, resources=(2, 4), storages=(3,))
    t = inst.public_task
    return t, (t.lookup("navigate", "l1", "l4"),)


def test_first_action_features():
    t, plan = worked_example()
    feats = extract_plan_features(t, plan)
    assert {"navigate", "navigate(l1,l4)", "at(rover,l4)", "at(resource0,l2)", "at(resource1,l4)",
            "at(storage0,l3)"} <= feats[1]
    assert "at(rover,l1)" not in feats[1]
    assert PLAN_START in feats[0] and "at(rover,l1)" in feats[0]
    assert not any("adjacent" in f for f in feats[0])


def test_names_canonical():
    t, plan = worked_example()
    for fs in extract_plan_features(t, plan):
        for f in fs:
            assert f == canonical(f) and " " not in f and f == f.lower()
    assert canonical("At Rover L4") == "atroverl4"
    assert fluent_feature(("loaded",)) == "loaded"


def test_empty_plan_single_position():
    t, _ = worked_example()
    feats = extract_plan_features(t, ())
    assert len(feats) == 1 and PLAN_START in feats[0]


def test_shared_prefix_identical():
    inst = gen_problem(RoverConfig(4, 4), 3)
    plan = ehc_plan(inst.full_task)
    t = inst.public_task
    a = extract_plan_features(t, plan)
    b = extract_plan_features(t, plan[:3])
    assert a[:4] == b


def test_invalid_plan_rejected():
    t, _ = worked_example()
    with pytest.raises(InapplicableActionError):
        extract_plan_features(t, (t.lookup("navigate", "l7", "l8"),))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 5000))
def test_fluent_features_equal_simulated_state(seed):
    inst = gen_problem(RoverConfig(4, 4, max_hidden=3), seed)
    t = inst.full_task
    plan = ehc_plan(t)
    feats = extract_plan_features(t, plan)
    s = t.init
    for i, a in enumerate(plan, start=1):
        s = apply(t, s, a)
        schema_and_action = set(action_features(t, a))
        assert feats[i] - schema_and_action == state_features(t, s)


def test_relaxed_features_observe():
    inst = rover(3, 3, rover=4, observations=(5,))
    t = inst.public_task
    assert extract_relaxed_features(t, (t.lookup("observe", "l5"),)) == [frozenset({"observe", "observe(l5)"})]
    assert extract_relaxed_features(t, ()) == []


@pytest.mark.parametrize("seed", range(10))
def test_relaxed_features_have_no_fluents(seed):
    inst = gen_problem(RoverConfig(4, 4, max_hidden=3), seed)
    t = inst.full_task
    relaxed = rpg_heuristic(t, t.init).relaxed_plan
    fs = extract_relaxed_features(t, relaxed)
    assert len(fs) == len(relaxed)
    fluents = {fluent_feature(f) for f in t.fluents}
    for f in fs:
        assert not f & fluents
        assert len(f) == 2


def test_providers():
    t, plan = worked_example()
    base = extract_plan_features(t, plan)
    assert extract_plan_features(t, plan, providers=[lambda task, pos, a, s: ()]) == base
    tagged = extract_plan_features(t, plan, providers=[lambda task, pos, a, s: ["Tag"]])
    assert all(x == y | {"tag"} for x, y in zip(tagged, base))

    def duration(task, pos, a, s):
        if a is None:
            return []
        return [f"dur-{'long' if task.actions[a].cost > 1 else 'short'}"]
    with_dur = extract_plan_features(t, plan, providers=[duration])
    assert "dur-short" in with_dur[1] and not any(f.startswith("dur") for f in with_dur[0])
    seen = []
    extract_relaxed_features(t, plan, start=5, providers=[lambda task, pos, a, s: seen.append((pos, s)) or ()])
    assert seen == [(5, None)]
