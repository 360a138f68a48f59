"""Independent reference implementations used as test oracles."""

import itertools
import math

import numpy as np


def bfs_distance(task, s, limit=100_000):
    """Plain breadth-first search over full states (no projection)."""
    if task.is_goal(s):
        return 0
    seen = {s}
    frontier = [s]
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for u in frontier:
            for act in task.actions:
                if act.pre & ~u:
                    continue
                v = (u & ~act.delete) | act.add
                if v in seen:
                    continue
                if task.is_goal(v):
                    return depth
                seen.add(v)
                nxt.append(v)
        if len(seen) > limit:
            raise RuntimeError("state limit exceeded")
        frontier = nxt
    return math.inf


def states_along(task, plan):
    s = task.init
    out = [s]
    for a in plan:
        act = task.actions[a]
        s = (s & ~act.delete) | act.add
        out.append(s)
    return out


def crf_enumerate(U, T):
    """All label sequences by brute force: (log Z, unary marginals, best sequence)."""
    n, L = U.shape
    scores = {}
    for y in itertools.product(range(L), repeat=n):
        s = sum(U[t, y[t]] for t in range(n)) + sum(T[y[t - 1], y[t]] for t in range(1, n))
        scores[y] = s
    finite = [v for v in scores.values() if v != -math.inf]
    m = max(finite)
    logz = m + math.log(sum(math.exp(v - m) for v in finite))
    marg = np.zeros((n, L))
    for y, v in scores.items():
        if v == -math.inf:
            continue
        p = math.exp(v - logz)
        for t in range(n):
            marg[t, y[t]] += p
    best = max(scores.values())
    # lowest-index tie rule of the decoder: compare as the decoder would, by score only
    argbest = [y for y, v in scores.items() if v == best]
    return logz, marg, best, argbest


def naive_explicability(labels):
    n = len(labels) - 1
    return sum(1 for i in range(1, n + 1) if len(labels[i].current) > 0) / n


def naive_predictability(labels):
    n1 = len(labels)
    hits = 0
    for i in range(n1):
        if len(labels[i].current) != 1:
            continue
        j = None
        for k in range(i + 1, n1):
            if labels[k].current != labels[i].current:
                j = k
                break
        if j is None:
            j = n1 - 1
        rest_empty = all(len(labels[k].next) == 0 for k in range(i, n1))
        if labels[i].next == labels[j].current or rest_empty:
            hits += 1
    return hits / n1
