"""Task labels, per-action (current, next) labels and the two plan measures.

Explicability is the fraction of actions a_1..a_N that carry a non-empty
current label. Predictability is the fraction of positions a_0..a_N whose
next label names the task actually pursued next (or whose next labels are
empty from that point to the end of the plan).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

START = "START"
COLLECT = "COLLECT"
STORE = "STORE"
OBSERVE = "OBSERVE"
ROVER_TASKS = (COLLECT, STORE, OBSERVE)

EMPTY: frozenset = frozenset()


@dataclass(frozen=True)
class ActionLabel:
    current: frozenset = EMPTY
    next: frozenset = EMPTY

    def __post_init__(self):
        object.__setattr__(self, "current", frozenset(self.current))
        object.__setattr__(self, "next", frozenset(self.next))
        if START in self.next:
            raise ValueError("START cannot appear in a next label")

    @classmethod
    def of(cls, current=None, next=None) -> "ActionLabel":
        """Build from single task names; ``None`` means the empty label."""
        return cls(frozenset() if current is None else frozenset([current]),
                   frozenset() if next is None else frozenset([next]))

    def to_json(self) -> dict:
        return {"cur": sorted(self.current), "next": sorted(self.next)}

    @classmethod
    def from_json(cls, d: dict) -> "ActionLabel":
        return cls(frozenset(d["cur"]), frozenset(d["next"]))


@dataclass(frozen=True)
class LabeledPlan:
    plan: tuple  # ground action ids a_1..a_N (a_0 implicit)
    labels: tuple  # ActionLabel for a_0..a_N

    def __post_init__(self):
        object.__setattr__(self, "plan", tuple(self.plan))
        object.__setattr__(self, "labels", tuple(self.labels))
        check_labels(self.labels)
        if len(self.labels) != len(self.plan) + 1:
            raise ValueError(f"expected {len(self.plan) + 1} labels, got {len(self.labels)}")


@dataclass(frozen=True)
class MeasureReport:
    theta: float
    beta: float
    labels: tuple = field(default=(), repr=False)


def check_labels(labels: Sequence[ActionLabel]) -> None:
    if not labels:
        raise ValueError("a labeled plan needs at least the a_0 label")
    if labels[0].current != frozenset([START]):
        raise ValueError("a_0 must carry the current label {START}")
    for i, lab in enumerate(labels[1:], start=1):
        if START in lab.current:
            raise ValueError(f"START label at position {i}")


def _labels_of(lp) -> tuple:
    return lp.labels if isinstance(lp, LabeledPlan) else tuple(lp)


def explicability(lp) -> float:
    """Share of a_1..a_N with a non-empty current label."""
    labels = _labels_of(lp)
    n = len(labels) - 1
    if n < 1:
        raise ValueError("explicability is undefined for an empty plan")
    return sum(1 for lab in labels[1:] if lab.current) / n


def predictability(lp) -> float:
    """Share of a_0..a_N whose next label is confirmed.

    Position i counts when its current label is a singleton and either its
    next label equals the current label of a_j, the first later action whose
    current label differs from a_i's (the last action when there is none),
    or every next label from a_i to a_N is empty.
    """
    labels = _labels_of(lp)
    for i, lab in enumerate(labels):
        if len(lab.current) > 1 or len(lab.next) > 1:
            raise ValueError(f"label at position {i} has more than one task")
    n1 = len(labels)
    # single backward pass: first index after i with a different current label
    first_diff = [n1 - 1] * n1
    empty_suffix = [False] * n1
    suffix_ok = True
    for i in range(n1 - 1, -1, -1):
        suffix_ok = suffix_ok and not labels[i].next
        empty_suffix[i] = suffix_ok
        if i + 1 < n1:
            if labels[i + 1].current != labels[i].current:
                first_diff[i] = i + 1
            else:
                first_diff[i] = first_diff[i + 1]
    hits = 0
    for i, lab in enumerate(labels):
        if len(lab.current) != 1:
            continue
        if lab.next == labels[first_diff[i]].current or empty_suffix[i]:
            hits += 1
    return hits / n1


def measure(lp, f_theta: Callable = explicability, f_beta: Callable = predictability) -> MeasureReport:
    labels = _labels_of(lp)
    return MeasureReport(f_theta(labels), f_beta(labels), labels)


def rename_tasks(labels: Iterable[ActionLabel], mapping: dict) -> tuple:
    """Apply a task-name mapping (START is left alone)."""
    def m(s):
        return frozenset(mapping.get(t, t) if t != START else t for t in s)
    return tuple(ActionLabel(m(lab.current), m(lab.next)) for lab in labels)


# -- JSONL records -----------------------------------------------------------------

def record_to_json(record: dict) -> str:
    return json.dumps(record, sort_keys=False, separators=(",", ":"))


def make_record(problem_id: str, plan_strings: Sequence[str], labels: Sequence[ActionLabel],
                split: str = "train", features=None) -> dict:
    if split not in ("train", "test"):
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")
    rec = {
        "problem_id": problem_id,
        "plan": list(plan_strings),
        "labels": [lab.to_json() for lab in labels],
        "split": split,
    }
    if features is not None:
        rec["features"] = [sorted(f) for f in features]
    return rec


def read_jsonl(path) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_jsonl(path, records) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(record_to_json(rec) + "\n")


def labels_from_record(rec: dict) -> tuple:
    return tuple(ActionLabel.from_json(d) for d in rec["labels"])
