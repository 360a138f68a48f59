"""Plan a rover instance with hidden visit-goals and label it like an observer would.

The observer only knows the public goal (fill the storages, observe the
observation cells). Steps that serve the hidden goals look pointless to them
and get an empty current label, which lowers explicability.

    python demos/01_label_a_plan.py
"""

from explicable import labels as L
from explicable.pddl import format_plan
from explicable.rover import GroundTruthLabeler, RoverConfig, gen_problem
from explicable.search import ehc_plan


def show(label):
    cur = ",".join(sorted(label.current)) or "-"
    nxt = ",".join(sorted(label.next)) or "-"
    return f"{cur:>8} -> {nxt:<8}"


def main():
    inst = gen_problem(RoverConfig(max_hidden=3, min_hidden=3), seed=4)
    p = inst.problem
    print(f"rover at l{p.rover}; resources {p.resources}, storages {p.storages}, "
          f"observations {p.observations}, hidden visits {p.hidden}")

    for name, task in (("public goal only", inst.public_task), ("public + hidden goals", inst.full_task)):
        plan = ehc_plan(task)
        labeler = GroundTruthLabeler(p, inst.public_task)
        explained = labeler.explain(task, plan)
        m = L.measure([lab for lab, _ in explained])
        print(f"\nFF plan for the {name}: {len(plan)} steps, theta = {m.theta:.2f}, beta = {m.beta:.2f}")
        steps = ["(a0)"] + format_plan(task, plan).splitlines()
        for step, (lab, why) in zip(steps, explained):
            print(f"  {step:<36} {show(lab)} [{why}]")


if __name__ == "__main__":
    main()
