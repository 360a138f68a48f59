"""Synthetic grid-rover domain with hidden visit-goals and its automatic labeler.

Cells of a ``width x height`` grid are named ``l0 .. l{w*h-1}`` row-major and
are 4-connected. The public goal fills every storage area and observes
every observation cell; the full goal additionally visits each hidden cell.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources

from . import labels as L
from .features import extract_plan_features
from .labels import ActionLabel, LabeledPlan
from .pddl import GroundTask, ProblemInstance, format_plan, ground, parse_domain
from .search import INF, GoalDistances, SearchConfig, ehc_plan, rpg_heuristic


class RoverError(Exception):
    pass


@lru_cache(maxsize=None)
def domain_text() -> str:
    return resources.files("explicable").joinpath("data/rover.pddl").read_text()


@lru_cache(maxsize=None)
def rover_domain():
    return parse_domain(domain_text())


@dataclass(frozen=True)
class RoverConfig:
    width: int = 4
    height: int = 4
    resources: tuple = (1, 3)
    storages: tuple = (1, 3)
    observations: tuple = (1, 3)
    max_hidden: int = 3
    min_hidden: int | None = None  # default: 1 when max_hidden > 0, else 0

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError("grid must be at least 2x2")
        for lo, hi in (self.resources, self.storages, self.observations):
            if not 1 <= lo <= hi:
                raise ValueError("entity count ranges must satisfy 1 <= lo <= hi")
        if self.max_hidden < 0:
            raise ValueError("max_hidden must be >= 0")

    @property
    def hidden_range(self) -> tuple:
        lo = self.min_hidden if self.min_hidden is not None else min(1, self.max_hidden)
        return lo, self.max_hidden


def loc(cell: int) -> str:
    return f"l{cell}"


@dataclass(frozen=True)
class RoverProblem:
    width: int
    height: int
    rover: int
    resources: tuple
    storages: tuple
    observations: tuple
    hidden: tuple = ()

    def __post_init__(self):
        cells = (self.rover,) + self.resources + self.storages + self.observations + self.hidden
        if len(set(cells)) != len(cells):
            raise RoverError("entity cells must be distinct")
        if any(not 0 <= c < self.width * self.height for c in cells):
            raise RoverError("entity outside the grid")
        if len(self.resources) < len(self.storages):
            raise RoverError("need at least as many resources as storage areas")

    def coord(self, cell: int) -> tuple:
        return divmod(cell, self.width)

    def distance(self, a: int, b: int) -> int:
        (r1, c1), (r2, c2) = self.coord(a), self.coord(b)
        return abs(r1 - r2) + abs(c1 - c2)

    def neighbours(self, cell: int) -> list:
        r, c = self.coord(cell)
        out = []
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < self.height and 0 <= cc < self.width:
                out.append(rr * self.width + cc)
        return out

    @property
    def public_goal(self) -> frozenset:
        g = {("full", f"storage{k}") for k in range(len(self.storages))}
        g |= {("observed", loc(c)) for c in self.observations}
        return frozenset(g)

    @property
    def full_goal(self) -> frozenset:
        return self.public_goal | {("visited", loc(c)) for c in self.hidden}

    def to_problem(self, hidden: bool = True) -> ProblemInstance:
        objects = {loc(c): "location" for c in range(self.width * self.height)}
        objects.update({f"resource{k}": "resource" for k in range(len(self.resources))})
        objects.update({f"storage{k}": "storage" for k in range(len(self.storages))})
        init = {("at", "rover", loc(self.rover)), ("not-loaded",), ("visited", loc(self.rover))}
        init |= {("at", f"resource{k}", loc(c)) for k, c in enumerate(self.resources)}
        init |= {("at", f"storage{k}", loc(c)) for k, c in enumerate(self.storages)}
        init |= {("empty", f"storage{k}") for k in range(len(self.storages))}
        for c in range(self.width * self.height):
            init |= {("adjacent", loc(c), loc(n)) for n in self.neighbours(c)}
        goal = self.full_goal if hidden else self.public_goal
        return ProblemInstance("rover", "rover", objects, frozenset(init), frozenset(goal))

    def to_pddl(self, hidden: bool = True) -> str:
        p = self.to_problem(hidden)
        by_type: dict = {}
        for o, t in p.objects.items():
            by_type.setdefault(t, []).append(o)
        objs = " ".join(" ".join(v) + f" - {t}" for t, v in by_type.items())
        atoms = "\n    ".join("(" + " ".join(a) + ")" for a in sorted(p.init))
        goal = " ".join("(" + " ".join(a) + ")" for a in sorted(p.goal))
        return (f"(define (problem {p.name})\n  (:domain rover)\n  (:objects {objs})\n"
                f"  (:init\n    {atoms})\n  (:goal (and {goal})))\n")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "RoverProblem":
        return cls(d["width"], d["height"], d["rover"], tuple(d["resources"]), tuple(d["storages"]),
                   tuple(d["observations"]), tuple(d.get("hidden", ())))

    def with_hidden(self, hidden) -> "RoverProblem":
        return RoverProblem(self.width, self.height, self.rover, self.resources, self.storages,
                            self.observations, tuple(hidden))


@dataclass(frozen=True, eq=False)
class RoverInstance:
    problem: RoverProblem
    public_task: GroundTask  # goal G
    full_task: GroundTask  # goal G' (G plus hidden visits); same fluent indexing


def build_tasks(problem: RoverProblem) -> RoverInstance:
    full = ground(rover_domain(), problem.to_problem(hidden=True))
    public = full.with_goal(problem.public_goal)
    return RoverInstance(problem, public, full)


def _draw_hidden_count(rng: random.Random, lo: int, hi: int) -> int:
    # one uniform draw mapped onto [lo, hi] keeps instances nested across levels
    u = rng.random()
    return lo + min(int(u * (hi - lo + 1)), hi - lo)


def gen_problem(cfg: RoverConfig, seed) -> RoverInstance:
    """Random instance; identical for identical (cfg, seed).

    Entity counts are drawn from the configured ranges (resources raised to
    the storage count when short). Hidden cells come from the same shuffled
    cell order, so raising ``max_hidden`` only appends hidden goals.
    """
    rng = random.Random(f"rover:{seed}")
    n_re = rng.randint(*cfg.resources)
    n_st = rng.randint(*cfg.storages)
    n_ob = rng.randint(*cfg.observations)
    n_re = max(n_re, n_st)
    n_hidden = _draw_hidden_count(rng, *cfg.hidden_range)
    cells = list(range(cfg.width * cfg.height))
    rng.shuffle(cells)
    need = 1 + n_re + n_st + n_ob + n_hidden
    if need > len(cells):
        raise RoverError(f"cannot place {need} distinct entities on a {cfg.width}x{cfg.height} grid")
    k = 1
    res = tuple(cells[k:k + n_re]); k += n_re
    st = tuple(cells[k:k + n_st]); k += n_st
    ob = tuple(cells[k:k + n_ob]); k += n_ob
    hidden = tuple(cells[k:k + n_hidden])
    problem = RoverProblem(cfg.width, cfg.height, cells[0], res, st, ob, hidden)
    inst = build_tasks(problem)
    if rpg_heuristic(inst.full_task, inst.full_task.init).dead_end:
        raise RoverError(f"generated instance {seed} is unsolvable")
    return inst


def gen_hidden_variant(problem: RoverProblem, max_hidden: int, seed, min_hidden: int | None = None) -> RoverInstance:
    """Same public problem with a fresh random set of hidden cells."""
    rng = random.Random(f"hidden:{seed}")
    lo = min(1, max_hidden) if min_hidden is None else min_hidden
    n = _draw_hidden_count(rng, lo, max_hidden)
    used = {problem.rover, *problem.resources, *problem.storages, *problem.observations}
    free = [c for c in range(problem.width * problem.height) if c not in used]
    rng.shuffle(free)
    if n > len(free):
        raise RoverError("not enough free cells for the hidden goals")
    return build_tasks(problem.with_hidden(free[:n]))


# -- ground-truth labeling -----------------------------------------------------------------

@dataclass(frozen=True)
class _View:
    rover: int
    loaded: bool
    resources: tuple  # cells of resources still on the ground
    empty_storages: tuple
    unobserved: tuple


class GroundTruthLabeler:
    """Automatic labeler modelling an observer who only knows the public goal.

    Current label of a_i: empty unless the optimal cost to the public goal
    strictly drops (|P(s_i)| < |P(s_{i-1})|). Then load, unload and observe
    get COLLECT, STORE and OBSERVE. A navigate gets the task of the closest
    target among those it moved strictly closer to (Manhattan distance from
    the rover's new cell); a tie for closest gives the empty label.

    Next label: empty when the current label is. Otherwise the task of the
    target closest to the rover once the current task is done; ties, or no
    task left, give the empty label.

    Targets are empty storage areas when loaded, remaining resources when
    unloaded and some storage is still empty, and unobserved observation
    cells in either case.
    """

    tasks = L.ROVER_TASKS

    def __init__(self, problem: RoverProblem, public_task: GroundTask):
        self.problem = problem
        self.task = public_task
        self._dist = None
        idx = public_task.fluent_index
        self._rover_at = {c: idx[("at", "rover", loc(c))] for c in range(problem.width * problem.height)
                          if ("at", "rover", loc(c)) in idx}
        self._res_at = [(c, idx[("at", f"resource{k}", loc(c))]) for k, c in enumerate(problem.resources)]
        self._empty = [(c, idx[("empty", f"storage{k}")]) for k, c in enumerate(problem.storages)]
        self._observed = [(c, idx[("observed", loc(c))]) for c in problem.observations]
        self._loaded = idx.get(("loaded",))  # absent when there is nothing to load

    @property
    def distances(self) -> GoalDistances:
        if self._dist is None:
            self._dist = GoalDistances(self.task)
        return self._dist

    def view(self, s: int) -> _View:
        rover = next(c for c, i in self._rover_at.items() if s >> i & 1)
        return _View(
            rover,
            self._loaded is not None and bool(s >> self._loaded & 1),
            tuple(c for c, i in self._res_at if s >> i & 1),
            tuple(c for c, i in self._empty if s >> i & 1),
            tuple(c for c, i in self._observed if not s >> i & 1),
        )

    @staticmethod
    def targets(v: _View) -> list:
        out = []
        if v.loaded:
            out += [(L.STORE, c) for c in v.empty_storages]
        elif v.empty_storages:
            out += [(L.COLLECT, c) for c in v.resources]
        out += [(L.OBSERVE, c) for c in v.unobserved]
        return out

    def _closest(self, cell: int, targets: list):
        if not targets:
            return None, "none"
        ds = sorted((self.problem.distance(cell, c), task, c) for task, c in targets)
        if len(ds) > 1 and ds[0][0] == ds[1][0]:
            return None, "tie"
        return (ds[0][1], ds[0][2]), "ok"

    @staticmethod
    def _achieve(v: _View, target) -> _View:
        task, cell = target
        if task == L.COLLECT:
            return _View(cell, True, tuple(c for c in v.resources if c != cell), v.empty_storages, v.unobserved)
        if task == L.STORE:
            return _View(cell, False, v.resources, tuple(c for c in v.empty_storages if c != cell), v.unobserved)
        return _View(cell, v.loaded, v.resources, v.empty_storages, tuple(c for c in v.unobserved if c != cell))

    def _next(self, post: _View):
        best, why = self._closest(post.rover, self.targets(post))
        return (best[0] if best else None), why

    def explain(self, task: GroundTask, plan) -> list:
        """Per-position ``(ActionLabel, reason)``; reasons name the rule that fired."""
        states = [task.init]
        s = task.init
        for i, a in enumerate(plan, start=1):
            act = task.actions[a]
            if act.pre & ~s:
                raise RoverError(f"invalid plan: a_{i} {act} is not applicable")
            s = (s & ~act.delete) | act.add
            states.append(s)
        P = [self.distances(x) for x in states]
        views = [self.view(x) for x in states]

        nxt, why = self._next(views[0])
        out = [(ActionLabel.of(L.START, nxt), "start/" + why)]
        for i, a in enumerate(plan, start=1):
            act = task.actions[a]
            prev, cur = views[i - 1], views[i]
            if not P[i] < P[i - 1]:
                out.append((ActionLabel(), "no-progress"))
                continue
            target, reason = None, "ok"
            if act.name == "load":
                target = (L.COLLECT, prev.rover)
            elif act.name == "unload":
                target = (L.STORE, prev.rover)
            elif act.name == "observe":
                target = (L.OBSERVE, prev.rover)
            else:
                closer = [t for t in self.targets(prev)
                          if self.problem.distance(cur.rover, t[1]) < self.problem.distance(prev.rover, t[1])]
                target, reason = self._closest(cur.rover, closer)
            if target is None:
                out.append((ActionLabel(), "current-" + reason))
                continue
            post = cur if act.name != "navigate" else self._achieve(cur, target)
            nxt, why = self._next(post)
            out.append((ActionLabel.of(target[0], nxt), "next-" + why))
        return out

    def label(self, task: GroundTask, plan) -> LabeledPlan:
        return LabeledPlan(tuple(plan), tuple(lab for lab, _ in self.explain(task, plan)))


def ground_truth_label(instance: RoverInstance, plan, labeler: GroundTruthLabeler | None = None) -> LabeledPlan:
    labeler = labeler or GroundTruthLabeler(instance.problem, instance.public_task)
    return labeler.label(instance.full_task, plan)


# -- dataset synthesis ------------------------------------------------------------------------

def make_example(instance: RoverInstance, plan, problem_id: str, split: str = "train",
                 labeler: GroundTruthLabeler | None = None) -> dict:
    lp = ground_truth_label(instance, plan, labeler)
    feats = extract_plan_features(instance.full_task, plan)
    steps = format_plan(instance.full_task, plan).splitlines()
    rec = L.make_record(problem_id, steps, lp.labels, split, feats)
    rec["problem"] = instance.problem.to_json()
    return rec


def gen_dataset(cfg: RoverConfig, n: int, seed: int, split: str = "train",
                search: SearchConfig = SearchConfig()) -> list:
    """``n`` labeled FF plans for random instances, as JSONL-ready records."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    for i in range(n):
        pid = f"rover-{seed}-{i}"
        try:
            inst = gen_problem(cfg, f"{seed}:{i}")
            plan = ehc_plan(inst.full_task, search)
            out.append(make_example(inst, plan, pid, split))
        except Exception as e:
            raise RoverError(f"instance {pid}: {e}") from e
    return out


def write_dataset(path, records, cfg: RoverConfig, n: int, seed: int) -> None:
    L.write_jsonl(path, records)
    manifest = {"config": asdict(cfg), "n": n, "seed": seed, "records": len(records)}
    with open(str(path) + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def record_dataset(records) -> list:
    """(observations, labels) pairs for CRF training from JSONL records."""
    return [([frozenset(f) for f in r["features"]], list(L.labels_from_record(r))) for r in records]


def is_finite(x) -> bool:
    return x != INF
