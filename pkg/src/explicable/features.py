"""Per-position observation features for a plan (the F_i of a training example).

Feature names are canonical: lowercase, no spaces, ``name(arg1,arg2)``
for fluents and ground actions, the bare schema name for lifted action
features and ``plan-start`` for the a_0 marker. Training-time and
planning-time extraction both go through :func:`fluent_feature` and
:func:`action_features`, so alphabets always agree.

Action and interaction features are supplied by optional providers:
callables ``provider(task, position, action_id, state) -> iterable[str]``
where ``action_id`` is None for a_0 and ``state`` is None for relaxed
actions. None are enabled by default.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

from .pddl import GroundTask, InapplicableActionError, iter_bits

PLAN_START = "plan-start"

FeatureProvider = Callable[..., Iterable[str]]


def canonical(name: str) -> str:
    return "".join(name.lower().split())


def fluent_feature(f: tuple) -> str:
    if len(f) == 1:
        return canonical(f[0])
    return canonical(f"{f[0]}({','.join(f[1:])})")


def action_features(task: GroundTask, a: int) -> tuple:
    act = task.actions[a]
    grounded = act.name if not act.args else f"{act.name}({','.join(act.args)})"
    return canonical(act.name), canonical(grounded)


def state_features(task: GroundTask, s: int) -> set:
    fl = task.fluents
    return {fluent_feature(fl[i]) for i in iter_bits(s)}


def _extra(providers, task, pos, a, s):
    out = set()
    for p in providers:
        out.update(canonical(n) for n in p(task, pos, a, s))
    return out


def extract_plan_features(task: GroundTask, plan: Sequence[int],
                          providers: Sequence[FeatureProvider] = ()) -> list:
    """Position 0: initial-state fluents plus ``plan-start``. Position i >= 1:
    schema name, ground action and every fluent true after a_1..a_i."""
    s = task.init
    out = [frozenset(state_features(task, s) | {PLAN_START} | _extra(providers, task, 0, None, s))]
    for i, a in enumerate(plan, start=1):
        act = task.actions[a]
        if act.pre & ~s:
            raise InapplicableActionError(f"invalid plan: a_{i} {act} is not applicable")
        s = (s & ~act.delete) | act.add
        out.append(frozenset(state_features(task, s) | set(action_features(task, a))
                             | _extra(providers, task, i, a, s)))
    return out


def extract_relaxed_features(task: GroundTask, relaxed: Sequence[int], start: int = 0,
                             providers: Sequence[FeatureProvider] = ()) -> list:
    """Action descriptions only; relaxed actions carry no trustworthy state.

    ``start`` is the plan position of the first relaxed action and is only
    passed through to providers.
    """
    return [frozenset(set(action_features(task, a)) | _extra(providers, task, start + k, a, None))
            for k, a in enumerate(relaxed)]
