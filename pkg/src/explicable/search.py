"""Forward-search planning: FF relaxed-plan heuristic, enforced hill climbing
with a greedy best-first fallback, and uniform-cost optimal plan length."""

from __future__ import annotations

import heapq
import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Callable

from .pddl import GroundTask, iter_bits

INF = math.inf


class SearchError(Exception):
    pass


class UnsolvableError(SearchError):
    pass


@dataclass(frozen=True)
class RelaxedPlanResult:
    h_cost: float  # INF when the goal is unreachable even without deletes
    relaxed_plan: tuple = ()

    @property
    def dead_end(self) -> bool:
        return self.h_cost == INF


@dataclass(frozen=True)
class SearchConfig:
    expansion_limit: int = 100_000
    ehc_expansion_limit: int = 5_000  # hill-climbing budget before the fallback takes over
    plateau_fallback: str = "gbfs"  # or "none"
    tie_breaking: str = "lowest-id"  # or "random" (seeded shuffle of successors)
    seed: int = 0

    def __post_init__(self):
        if self.expansion_limit <= 0 or self.ehc_expansion_limit <= 0:
            raise ValueError("expansion limits must be positive")
        if self.plateau_fallback not in ("gbfs", "none"):
            raise ValueError(f"unknown plateau fallback {self.plateau_fallback!r}")
        if self.tie_breaking not in ("lowest-id", "random"):
            raise ValueError(f"unknown tie-breaking rule {self.tie_breaking!r}")


def rpg_heuristic(task: GroundTask, s: int) -> RelaxedPlanResult:
    """FF heuristic: build the delete-relaxed planning graph from ``s`` and
    extract a relaxed plan backwards, choosing for each subgoal its
    earliest-layer achiever (lowest action id on ties)."""
    goal_left = task.goal & ~s
    if not goal_left:
        return RelaxedPlanResult(0, ())
    actions = task.actions
    consumers = task.consumers
    add_lists = task.add_lists
    remaining = list(task.pre_counts)
    fact_level = [-1] * len(task.fluents)
    layer = iter_bits(s)
    for f in layer:
        fact_level[f] = 0
    act_level = [-1] * len(actions)
    ready = [a for a, c in enumerate(remaining) if c == 0]
    reached = s
    level = 0
    while True:
        for f in layer:
            for a in consumers[f]:
                remaining[a] -= 1
                if remaining[a] == 0:
                    ready.append(a)
        if not ready:
            return RelaxedPlanResult(INF, ())
        layer = []
        nxt = level + 1
        for a in ready:
            act_level[a] = level
            if actions[a].add & ~reached:
                for f in add_lists[a]:
                    if fact_level[f] < 0:
                        fact_level[f] = nxt
                        layer.append(f)
                reached |= actions[a].add
        ready = []
        level = nxt
        goal_left &= ~reached
        if not goal_left:
            break
        if not layer:
            return RelaxedPlanResult(INF, ())

    # backward extraction
    achievers = task.achievers
    pre_lists = task.pre_lists
    top = level
    agenda = [set() for _ in range(top + 1)]
    true_at = [set() for _ in range(top + 1)]
    for g in iter_bits(task.goal):
        agenda[fact_level[g]].add(g)
    chosen = []
    for lvl in range(top, 0, -1):
        for g in sorted(agenda[lvl]):
            if g in true_at[lvl]:
                continue
            best = None
            for a in achievers[g]:
                if act_level[a] == lvl - 1:
                    best = a
                    break  # achievers are sorted by id
            if best is None:  # pragma: no cover - guaranteed by construction
                raise AssertionError("no achiever at the expected layer")
            chosen.append((lvl - 1, best))
            for f in add_lists[best]:
                true_at[lvl].add(f)
                true_at[lvl - 1].add(f)
            for p in pre_lists[best]:
                pl = fact_level[p]
                if pl != 0 and p not in true_at[lvl - 1]:
                    agenda[pl].add(p)
    chosen.sort()
    plan = tuple(a for _, a in chosen)
    if task.unit_cost:
        return RelaxedPlanResult(len(plan), plan)
    return RelaxedPlanResult(sum(actions[a].cost for a in plan), plan)


def ff_evaluator(task: GroundTask) -> Callable:
    return lambda s, prefix: rpg_heuristic(task, s).h_cost


def _successors(task, s, order_rng):
    ids = task.applicable(s)
    if order_rng is not None:
        order_rng.shuffle(ids)
    return ids


def enforced_hill_climbing(task: GroundTask, evaluate: Callable, cfg: SearchConfig = SearchConfig(),
                           fallback: Callable | None = None) -> tuple:
    """Enforced hill climbing on ``evaluate(state, prefix) -> float``.

    From the current state, successors are searched breadth-first until one
    with a strictly smaller value than the current state is found; the search
    commits to it and repeats. A generated goal state ends the search. When a
    breadth-first phase exhausts (dead end or plateau with no exit) the
    search restarts as greedy best-first from the initial state.
    """
    rng = random.Random(cfg.seed) if cfg.tie_breaking == "random" else None
    s = task.init
    plan: tuple = ()
    if task.is_goal(s):
        return plan
    h = evaluate(s, plan)
    if h == INF:
        raise UnsolvableError("initial state is a dead end under the heuristic")
    rel = task.relevant_mask  # duplicate detection ignores fluents nothing reads
    expansions = 0
    while True:
        frontier = deque([(s, plan)])
        seen = {s & rel}
        found = None
        while frontier and found is None:
            u, up = frontier.popleft()
            expansions += 1
            if expansions > cfg.ehc_expansion_limit:
                frontier.clear()
                break
            for a in _successors(task, u, rng):
                act = task.actions[a]
                v = (u & ~act.delete) | act.add
                key = v & rel
                if key in seen:
                    continue
                seen.add(key)
                vp = up + (a,)
                if task.is_goal(v):
                    return vp
                hv = evaluate(v, vp)
                if hv < h:
                    found = (v, vp, hv)
                    break
                if hv != INF:
                    frontier.append((v, vp))
        if found is None:
            if cfg.plateau_fallback == "gbfs":
                return greedy_best_first(task, fallback or evaluate, cfg)
            raise UnsolvableError("enforced hill climbing failed and fallback is disabled")
        s, plan, h = found


def greedy_best_first(task: GroundTask, evaluate: Callable, cfg: SearchConfig = SearchConfig()) -> tuple:
    rng = random.Random(cfg.seed + 1) if cfg.tie_breaking == "random" else None
    s0 = task.init
    if task.is_goal(s0):
        return ()
    h0 = evaluate(s0, ())
    if h0 == INF:
        raise UnsolvableError("initial state is a dead end under the heuristic")
    counter = 0
    heap = [(h0, counter, s0, ())]
    rel = task.relevant_mask
    closed = set()
    expansions = 0
    while heap:
        _, _, u, up = heapq.heappop(heap)
        if u & rel in closed:
            continue
        closed.add(u & rel)
        expansions += 1
        if expansions > cfg.expansion_limit:
            break
        for a in _successors(task, u, rng):
            act = task.actions[a]
            v = (u & ~act.delete) | act.add
            if v & rel in closed:
                continue
            vp = up + (a,)
            if task.is_goal(v):
                return vp
            hv = evaluate(v, vp)
            if hv == INF:
                continue
            counter += 1
            heapq.heappush(heap, (hv, counter, v, vp))
    raise UnsolvableError(f"no plan found within {cfg.expansion_limit} expansions")


def ehc_plan(task: GroundTask, cfg: SearchConfig = SearchConfig()) -> tuple:
    """FF-style plan: enforced hill climbing on the relaxed-plan heuristic."""
    return enforced_hill_climbing(task, ff_evaluator(task), cfg)


def _step(task, u, a, rel):
    act = task.actions[a]
    return ((u & ~act.delete) | act.add) & rel


def optimal_plan_length(task: GroundTask, s: int) -> float:
    """Cost of a cheapest plan from ``s`` to the goal (its length under unit
    costs); INF if the goal is unreachable.

    Fluents that no precondition and no goal mentions cannot influence
    reachability, so states are compared after projecting them away.
    """
    rel = task.relevant_mask
    s &= rel
    if task.is_goal(s):
        return 0
    if task.unit_cost:
        seen = {s}
        frontier = [s]
        depth = 0
        while frontier:
            depth += 1
            nxt = []
            for u in frontier:
                for a in task.applicable(u):
                    v = _step(task, u, a, rel)
                    if v in seen:
                        continue
                    if task.is_goal(v):
                        return depth
                    seen.add(v)
                    nxt.append(v)
            frontier = nxt
        return INF
    dist = {s: 0.0}
    heap = [(0.0, 0, s)]
    counter = 0
    while heap:
        d, _, u = heapq.heappop(heap)
        if d > dist.get(u, INF):
            continue
        if task.is_goal(u):
            return d
        for a in task.applicable(u):
            v = _step(task, u, a, rel)
            nd = d + task.actions[a].cost
            if nd < dist.get(v, INF):
                dist[v] = nd
                counter += 1
                heapq.heappush(heap, (nd, counter, v))
    return INF


class GoalDistances:
    """Exact goal distance for every state reachable from a root state.

    Built once by exhaustive forward exploration followed by a backward
    uniform-cost sweep from the goal states; lookups are then O(1). States
    outside the explored region fall back to :func:`optimal_plan_length`.
    """

    def __init__(self, task: GroundTask, root: int | None = None):
        self.task = task
        rel = task.relevant_mask
        unit = task.unit_cost
        root = (task.init if root is None else root) & rel
        preds: dict = {root: []}
        order = [root]
        i = 0
        while i < len(order):
            u = order[i]
            i += 1
            for a in task.applicable(u):
                v = _step(task, u, a, rel)
                if v == u:
                    continue
                lst = preds.get(v)
                if lst is None:
                    preds[v] = lst = []
                    order.append(v)
                lst.append((u, 1 if unit else task.actions[a].cost))
        dist: dict = {}
        heap = []
        counter = 0
        for u in order:
            if task.is_goal(u):
                dist[u] = 0
                heap.append((0, counter, u))
                counter += 1
        heapq.heapify(heap)
        while heap:
            d, _, v = heapq.heappop(heap)
            if d > dist.get(v, INF):
                continue
            for u, c in preds[v]:
                nd = d + c
                if nd < dist.get(u, INF):
                    dist[u] = nd
                    counter += 1
                    heapq.heappush(heap, (nd, counter, u))
        self._explored = preds.keys()
        self._dist = dist
        self.size = len(order)

    def __call__(self, s: int) -> float:
        p = s & self.task.relevant_mask
        d = self._dist.get(p)
        if d is not None:
            return d
        if p in self._explored:
            return INF
        return optimal_plan_length(self.task, s)


def optimal_plan(task: GroundTask, cfg: SearchConfig = SearchConfig()) -> tuple:
    """A cheapest plan by uniform-cost search (breadth-first under unit costs),
    over states projected onto relevant fluents."""
    rel = task.relevant_mask
    s0 = task.init & rel
    if task.is_goal(s0):
        return ()
    parent = {s0: None}
    if task.unit_cost:
        frontier = [s0]
        while frontier:
            nxt = []
            for u in frontier:
                for a in task.applicable(u):
                    v = _step(task, u, a, rel)
                    if v in parent:
                        continue
                    parent[v] = (u, a)
                    if task.is_goal(v):
                        return _backtrack(parent, v)
                    nxt.append(v)
                if len(parent) > cfg.expansion_limit * 10:
                    raise UnsolvableError("state limit exceeded")
            frontier = nxt
        raise UnsolvableError("goal unreachable")
    dist = {s0: 0.0}
    heap = [(0.0, 0, s0)]
    counter = 0
    while heap:
        d, _, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if task.is_goal(u):
            return _backtrack(parent, u)
        for a in task.applicable(u):
            v = _step(task, u, a, rel)
            nd = d + task.actions[a].cost
            if nd < dist.get(v, INF):
                dist[v] = nd
                parent[v] = (u, a)
                counter += 1
                heapq.heappush(heap, (nd, counter, v))
    raise UnsolvableError("goal unreachable")


def _backtrack(parent, v):
    out = []
    while parent[v] is not None:
        v, a = parent[v]
        out.append(a)
    return tuple(reversed(out))
