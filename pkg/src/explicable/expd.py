"""Planning with learned interpretability: FF-EXPD search and plan selection."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import labels as L
from .crf import CRFModel, admissibility, decode_label, viterbi_step
from .features import PLAN_START, action_features, fluent_feature
from .pddl import GroundTask, InapplicableActionError, iter_bits
from .search import INF, SearchConfig, enforced_hill_climbing, ff_evaluator, rpg_heuristic


@dataclass(frozen=True)
class ExpdWeights:
    w_theta: float = 2.0
    w_beta: float = 2.0

    def __post_init__(self):
        for w in (self.w_theta, self.w_beta):
            if not (math.isfinite(w) and w >= 0):
                raise ValueError("weights must be finite and nonnegative")

    @property
    def zero(self) -> bool:
        return self.w_theta == 0 and self.w_beta == 0


@dataclass(frozen=True)
class PredictedMeasures:
    theta_hat: float
    beta_hat: float
    labels: tuple = ()


def measures_of(labels: Sequence[L.ActionLabel]) -> tuple:
    """(theta, beta) of a decoded sequence; an empty plan counts as fully explicable."""
    theta = L.explicability(labels) if len(labels) > 1 else 1.0
    return theta, L.predictability(labels)


def _code_measures(cur: list, nxt: list) -> tuple:
    """(theta, beta) on integer label codes (-1 = empty), same rules as the
    labels module; used in the search inner loop."""
    n1 = len(cur)
    theta = sum(1 for c in cur[1:] if c != -1) / (n1 - 1) if n1 > 1 else 1.0
    hits = 0
    diff_cur = cur[-1]
    suffix_empty = True
    for i in range(n1 - 1, -1, -1):
        suffix_empty = suffix_empty and nxt[i] == -1
        if i + 1 < n1 and cur[i + 1] != cur[i]:
            diff_cur = cur[i + 1]
        if cur[i] != -1 and (nxt[i] == diff_cur or suffix_empty):
            hits += 1
    return theta, hits / n1


class _Node:
    __slots__ = ("delta", "bp", "parent", "state")

    def __init__(self, delta, bp, parent, state):
        self.delta, self.bp, self.parent, self.state = delta, bp, parent, state


class _Scorer:
    """Incremental Viterbi over plan prefixes.

    Each prefix keeps its max-product message and backpointers, so a search
    node costs one step over its parent plus the relaxed suffix.
    """

    def __init__(self, model: CRFModel, task: GroundTask):
        self.model = model
        self.task = task
        self.T = model.transition
        self._W = model.unary
        labels = model.labels
        self._decoded = [decode_label(n) for n in labels.names]
        codes = {t: k for k, t in enumerate(sorted({t for lab in self._decoded for t in lab.current | lab.next}))}

        def code(s):
            return codes[next(iter(s))] if s else -1
        self._cur = [code(lab.current) for lab in self._decoded]
        self._nxt = [code(lab.next) for lab in self._decoded]
        adm = admissibility(labels, 2)
        self._adm0, self._adm = adm[0], adm[1]
        fidx = model.features.index
        self._fluent_col = [fidx.get(fluent_feature(f), -1) for f in task.fluents]
        self._action_cols = [np.array([fidx[n] for n in action_features(task, a.id) if n in fidx], dtype=np.int64)
                             for a in task.actions]
        self._start_col = fidx.get(PLAN_START, -1)
        self._relaxed: dict = {}
        root_row = self._state_row(task.init, [self._start_col])
        self._nodes: dict = {(): _Node(root_row + self._adm0, None, None, task.init)}

    def _state_row(self, s: int, extra) -> np.ndarray:
        fc = self._fluent_col
        cols = [c for c in (fc[i] for i in iter_bits(s)) if c >= 0]
        cols.extend(c for c in extra if c >= 0)
        if cols:
            return self._W[cols].sum(axis=0)
        return np.zeros(self._W.shape[1])

    def node(self, prefix: tuple, state: int | None = None) -> _Node:
        nd = self._nodes.get(prefix)
        if nd is not None:
            return nd
        parent = self.node(prefix[:-1])
        act = self.task.actions[prefix[-1]]
        if state is None:
            if act.pre & ~parent.state:
                raise InapplicableActionError(f"prefix is not executable at a_{len(prefix)} {act}")
            state = (parent.state & ~act.delete) | act.add
        row = self._state_row(state, self._action_cols[act.id]) + self._adm
        delta, bp = viterbi_step(parent.delta, row, self.T)
        nd = self._nodes[prefix] = _Node(delta, bp, parent, state)
        return nd

    def relaxed_row(self, a: int) -> np.ndarray:
        row = self._relaxed.get(a)
        if row is None:
            cols = self._action_cols[a]
            row = (self._W[cols].sum(axis=0) if cols.size else np.zeros(self._W.shape[1])) + self._adm
            self._relaxed[a] = row
        return row

    def decode_ids(self, prefix: tuple, relaxed: Sequence[int] = (), state: int | None = None) -> list:
        nd = self.node(tuple(prefix), state)
        delta = nd.delta
        tail = []
        for a in relaxed:
            delta, bp = viterbi_step(delta, self.relaxed_row(a), self.T)
            tail.append(bp)
        y = int(np.argmax(delta))
        out = [y]
        for bp in reversed(tail):
            y = int(bp[y])
            out.append(y)
        while nd.bp is not None:
            y = int(nd.bp[y])
            out.append(y)
            nd = nd.parent
        out.reverse()
        return out

    def decode(self, prefix: tuple, relaxed: Sequence[int] = (), state: int | None = None) -> tuple:
        return tuple(self._decoded[i] for i in self.decode_ids(prefix, relaxed, state))

    def measures(self, prefix: tuple, relaxed: Sequence[int] = (), state: int | None = None) -> tuple:
        ys = self.decode_ids(prefix, relaxed, state)
        return _code_measures([self._cur[i] for i in ys], [self._nxt[i] for i in ys])

    def predict(self, prefix: tuple, relaxed: Sequence[int] = (), state: int | None = None) -> PredictedMeasures:
        labels = self.decode(prefix, relaxed, state)
        theta, beta = measures_of(labels)
        return PredictedMeasures(theta, beta, labels)


def predict_measures(model: CRFModel, task: GroundTask, prefix: Sequence[int],
                     relaxed: Sequence[int] = ()) -> PredictedMeasures:
    """Decode prefix ++ relaxed suffix and measure the decoded labels.

    Prefix positions see their state and action features; relaxed actions
    only their action features.
    """
    return _Scorer(model, task).predict(tuple(prefix), tuple(relaxed))


def expd_evaluator(task: GroundTask, model: CRFModel, weights: ExpdWeights) -> Callable:
    """h(s) = h_cost + (w_theta (1 - theta) + w_beta (1 - beta)) |prefix ++ relaxed|."""
    if weights.zero:
        return ff_evaluator(task)
    scorer = _Scorer(model, task)

    def evaluate(s: int, prefix: tuple) -> float:
        r = rpg_heuristic(task, s)
        if r.dead_end:
            return INF
        theta, beta = scorer.measures(prefix, r.relaxed_plan, state=s)
        n = len(prefix) + len(r.relaxed_plan)
        return r.h_cost + (weights.w_theta * (1 - theta) + weights.w_beta * (1 - beta)) * n

    return evaluate


def ffexpd_plan(task: GroundTask, model: CRFModel, weights: ExpdWeights = ExpdWeights(),
                cfg: SearchConfig = SearchConfig()) -> tuple:
    """Enforced hill climbing on the expd evaluator; the best-first fallback
    is guided by the plain relaxed-plan heuristic."""
    return enforced_hill_climbing(task, expd_evaluator(task, model, weights), cfg, fallback=ff_evaluator(task))


# -- selection ----------------------------------------------------------------------------------

CRITERIA = ("theta", "beta")


def _normalise(candidates, task):
    out = []
    for c in candidates:
        if task is not None and not (isinstance(c, tuple) and len(c) == 2 and isinstance(c[0], GroundTask)):
            out.append((task, tuple(c)))
        else:
            out.append((c[0], tuple(c[1])))
    return out


def score_candidates(candidates, scorer, criterion: str = "theta", task: GroundTask | None = None) -> list:
    """Predicted measure of each candidate.

    ``candidates`` are plans for ``task`` or ``(task, plan)`` pairs.
    ``scorer`` is a CRFModel (full-plan features, no relaxed suffix) or any
    callable ``(task, plan) -> object with .theta/.beta`` such as a labeler.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    pairs = _normalise(candidates, task)
    out = []
    for t, plan in pairs:
        if isinstance(scorer, CRFModel):
            pm = _Scorer(scorer, t).predict(plan)
            out.append(pm.theta_hat if criterion == "theta" else pm.beta_hat)
        else:
            m = scorer(t, plan)
            out.append(m.theta if criterion == "theta" else m.beta)
    return out


def select_index(candidates, scorer, criterion: str = "theta", task: GroundTask | None = None) -> int:
    if not candidates:
        raise ValueError("empty candidate set")
    scores = score_candidates(candidates, scorer, criterion, task)
    return int(np.argmax(scores))  # first maximum wins ties


def select_plan(candidates, scorer, criterion: str = "theta", task: GroundTask | None = None):
    """Candidate with the highest predicted measure; ties go to the lowest index."""
    return candidates[select_index(candidates, scorer, criterion, task)]


def rand_index(n: int, seed) -> int:
    if n < 1:
        raise ValueError("empty candidate set")
    return random.Random(f"rand-select:{seed}").randrange(n)


def rand_select(candidates, seed):
    return candidates[rand_index(len(candidates), seed)]
