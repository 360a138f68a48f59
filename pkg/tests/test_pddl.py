import pytest

from conftest import read, rover
from explicable.pddl import (GroundingError, InapplicableActionError, PDDLError, PDDLSyntaxError,
                             apply, domain_to_pddl, format_plan, ground, load_task, parse_domain,
                             parse_plan, parse_problem, parse_sexpr, simulate, validate_plan)
from explicable.rover import domain_text


def test_sexpr_nesting_and_comments():
    out = parse_sexpr("(a (b c) ; note\n d)")
    assert out == [["a", ["b", "c"], "d"]]


def test_sexpr_errors_carry_position():
    with pytest.raises(PDDLSyntaxError) as e:
        parse_sexpr("(a\n (b c)")
    assert (e.value.line, e.value.col) == (1, 1)
    with pytest.raises(PDDLSyntaxError) as e:
        parse_sexpr("(a))")
    assert e.value.col == 4


def test_rover_domain_has_four_schemas(rover_domain):
    assert [a.name for a in rover_domain.actions] == ["navigate", "load", "unload", "observe"]
    assert rover_domain.is_subtype("storage", "locatable")
    assert not rover_domain.is_subtype("location", "locatable")


def test_empty_domain():
    d = parse_domain("(define (domain d))")
    assert d.name == "d" and d.actions == ()


def test_blocksworld_costs_and_round_trip():
    d = parse_domain(read("blocksworld.pddl"))
    assert {a.name: a.cost for a in d.actions} == {"pickup": 1, "putdown": 1, "stack": 1, "unstack": 2}
    again = parse_domain(domain_to_pddl(d))
    assert again == d


@pytest.mark.parametrize("text, needle", [
    ("(define (domain d) (:requirements :adl))", "unsupported requirement"),
    ("(define (domain d) (:predicates (p)) (:action a :parameters () :precondition (q) :effect (p)))",
     "undeclared predicate"),
    ("(define (domain d) (:predicates (p ?x)) (:action a :parameters (?x) :precondition (p) :effect (p ?x)))",
     "arity mismatch"),
    ("(define (domain d) (:predicates (p ?x)) (:action a :parameters () :precondition (p ?y) :effect ()))",
     "unknown variable"),
])
def test_domain_errors(text, needle):
    with pytest.raises(PDDLSyntaxError, match=needle) as e:
        parse_domain(text)
    assert e.value.line == 1


def test_grounding_3x3_navigate_is_orthogonal():
    inst = rover(3, 3, 0, resources=[8], storages=[2])
    nav = [a for a in inst.full_task.actions if a.name == "navigate"]
    # 12 undirected edges in a 3x3 grid
    assert len(nav) == 24
    for a in nav:
        f, t = (int(x[1:]) for x in a.args)
        (r1, c1), (r2, c2) = divmod(f, 3), divmod(t, 3)
        assert abs(r1 - r2) + abs(c1 - c2) == 1


def test_static_predicates_are_compiled_away():
    inst = rover(3, 3, 0, resources=[8], storages=[2])
    assert not any(f[0] == "adjacent" for f in inst.full_task.fluents)


def test_zero_objects_gives_no_actions():
    d = parse_domain(read("blocksworld.pddl"))
    p = parse_problem("(define (problem e) (:domain blocksworld) (:objects) (:init (handempty)) (:goal (and)))", d)
    t = ground(d, p)
    assert t.actions == () and t.is_goal(t.init)


def test_grounding_is_deterministic_and_well_formed():
    a = load_task(read("blocksworld.pddl"), read("blocksworld-p01.pddl"))
    b = load_task(read("blocksworld.pddl"), read("blocksworld-p01.pddl"))
    assert [str(x) for x in a.actions] == [str(x) for x in b.actions]
    universe = (1 << len(a.fluents)) - 1
    for act in a.actions:
        assert act.add & act.delete == 0
        assert act.pre & ~universe == 0


def test_type_mismatch_and_foreign_goal():
    d = parse_domain(read("blocksworld.pddl"))
    bad_init = parse_problem("(define (problem e) (:domain blocksworld) (:objects a - block)"
                             " (:init (on a)) (:goal (and)))", d)
    with pytest.raises(GroundingError):
        ground(d, bad_init)
    bad_goal = parse_problem("(define (problem e) (:domain blocksworld) (:objects a - block)"
                             " (:init (handempty)) (:goal (and (holding z))))", d)
    with pytest.raises(GroundingError, match="goal fluent outside fluent universe"):
        ground(d, bad_goal)


def test_apply_semantics():
    t = rover(3, 3, 5, resources=[4, 3], storages=[0, 1], observations=[8]).full_task
    s = apply(t, t.init, t.lookup("navigate", "l5", "l4"))
    assert ("at", "rover", "l4") in t.fluents_of(s)
    assert ("at", "rover", "l5") not in t.fluents_of(s)
    observed = apply(t, s, t.lookup("observe", "l4"))
    assert apply(t, observed, t.lookup("observe", "l4")) == observed  # stays observed
    loaded = apply(t, s, t.lookup("load", "resource0", "l4"))
    assert ("loaded",) in t.fluents_of(loaded)
    there = apply(t, loaded, t.lookup("navigate", "l4", "l3"))
    with pytest.raises(InapplicableActionError, match="not-loaded"):
        apply(t, there, t.lookup("load", "resource1", "l3"))


def test_validate_plan_reports():
    inst = rover(3, 3, 5, resources=[4], storages=[3], observations=[8])
    t = inst.full_task
    steps = ["(navigate l5 l4)", "(load resource0 l4)", "(navigate l4 l3)",
             "(unload resource0 storage0 l3)", "(navigate l3 l4)", "(navigate l4 l5)",
             "(navigate l5 l8)", "(observe l8)"]
    plan = parse_plan(t, "\n".join(steps))
    rep = validate_plan(t, plan)
    assert rep.valid and rep.cost == len(plan)
    assert simulate(t, plan) == rep.states
    premature = parse_plan(t, "(navigate l5 l4)\n(navigate l4 l3)\n(unload resource0 storage0 l3)")
    rep = validate_plan(t, premature)
    assert not rep.valid and rep.failed_index == 3
    rep = validate_plan(t, plan[:2])
    assert not rep.valid and rep.goal_reached is False and rep.failed_index is None


def test_empty_plan_on_satisfied_goal(blocks_task):
    t = blocks_task.with_goal([("on", "c", "a")])
    rep = validate_plan(t, ())
    assert rep.valid and rep.cost == 0


def test_plan_text_round_trip(blocks_task):
    plan = (blocks_task.lookup("unstack", "c", "a"), blocks_task.lookup("putdown", "c"))
    text = "; comment\n" + format_plan(blocks_task, plan)
    assert parse_plan(blocks_task, text) == plan
    with pytest.raises(PDDLError):
        parse_plan(blocks_task, "(fly a b)")


def test_blocksworld_costs_in_validation(blocks_task):
    plan = parse_plan(blocks_task, "(unstack c a)\n(putdown c)\n(pickup b)\n(stack b c)\n(pickup a)\n(stack a b)")
    rep = validate_plan(blocks_task, plan)
    assert rep.valid and rep.cost == 7


def test_rover_pddl_text_round_trip():
    inst = rover(3, 3, 5, resources=[4], storages=[3], observations=[8], hidden=[0])
    t = load_task(domain_text(), inst.problem.to_pddl())
    assert t.fluents == inst.full_task.fluents
    assert [str(a) for a in t.actions] == [str(a) for a in inst.full_task.actions]
    assert t.goal == inst.full_task.goal
