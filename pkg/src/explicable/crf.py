"""Linear-chain conditional random field over composite (current, next) labels.

Scores are log-linear: every active observation feature contributes one
weight per label, and consecutive labels contribute a transition weight.
Training maximises the L2-regularised conditional log-likelihood

    sum_k log p(y_k | x_k) - (l2 / 2) * ||w||^2

by gradient ascent with a backtracking (Armijo) line search. All
inference runs in log space.

When the label alphabet contains START labels (current component START),
position 0 may only take START labels and later positions never do.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .labels import START, ActionLabel

FORMAT_NAME = "explicable-crf"
FORMAT_VERSION = 1
EMPTY_MARK = "-"


class CRFError(Exception):
    pass


class TrainingError(CRFError):
    pass


class ModelFormatError(CRFError):
    """Model file has the wrong format name or version."""


class CorruptModelError(CRFError):
    pass


# -- composite labels ----------------------------------------------------------------

def _part(s: frozenset) -> str:
    if len(s) > 1:
        raise ValueError("composite labels hold at most one task per component")
    return next(iter(s)) if s else EMPTY_MARK


def encode_label(label: ActionLabel) -> str:
    return f"{_part(label.current)}/{_part(label.next)}"


def decode_label(name: str) -> ActionLabel:
    try:
        cur, nxt = name.split("/")
    except ValueError:
        raise ValueError(f"malformed composite label {name!r}") from None
    return ActionLabel(frozenset() if cur == EMPTY_MARK else frozenset([cur]),
                       frozenset() if nxt == EMPTY_MARK else frozenset([nxt]))


def _is_start(name: str) -> bool:
    return name.split("/", 1)[0] == START


@dataclass(frozen=True)
class LabelAlphabet:
    names: tuple

    @cached_property
    def index(self) -> dict:
        return {n: i for i, n in enumerate(self.names)}

    @cached_property
    def start_mask(self) -> np.ndarray:
        return np.array([_is_start(n) for n in self.names], dtype=bool)

    @property
    def constrained(self) -> bool:
        return bool(self.start_mask.any())

    def __len__(self):
        return len(self.names)


@dataclass(frozen=True)
class FeatureAlphabet:
    names: tuple

    @cached_property
    def index(self) -> dict:
        return {n: i for i, n in enumerate(self.names)}

    def encode(self, active: Iterable[str]) -> np.ndarray:
        """Indices of known features; unknown names are dropped."""
        idx = self.index
        return np.array(sorted({idx[f] for f in active if f in idx}), dtype=np.int64)

    def __len__(self):
        return len(self.names)


def build_alphabets(dataset) -> tuple:
    """Label and feature alphabets covering exactly what ``dataset`` uses.

    ``dataset`` is a sequence of ``(observations, labels)`` pairs where
    ``observations`` holds one iterable of feature names per position and
    ``labels`` one composite label name (or ActionLabel) per position.
    Both alphabets are sorted, so example order does not matter.
    """
    if not dataset:
        raise CRFError("cannot build alphabets from an empty dataset")
    labels, feats = set(), set()
    for k, (obs, ys) in enumerate(dataset):
        if len(obs) != len(ys) or not ys:
            raise CRFError(f"example {k}: {len(obs)} observations vs {len(ys)} labels")
        for y in ys:
            name = encode_label(y) if isinstance(y, ActionLabel) else y
            if not isinstance(name, str):
                raise CRFError(f"example {k}: malformed label {y!r}")
            if "/" in name:
                decode_label(name)
            labels.add(name)
        for f in obs:
            feats.update(f)
    return LabelAlphabet(tuple(sorted(labels))), FeatureAlphabet(tuple(sorted(feats)))


@dataclass
class CRFModel:
    labels: LabelAlphabet
    features: FeatureAlphabet
    weights: np.ndarray
    l2: float = 1.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        n = len(self.features) * len(self.labels) + len(self.labels) ** 2
        if self.weights.shape != (n,):
            raise CRFError(f"weight vector has length {self.weights.size}, expected {n}")
        if not np.all(np.isfinite(self.weights)):
            raise CRFError("weights must be finite")

    @classmethod
    def zeros(cls, labels: LabelAlphabet, features: FeatureAlphabet, **kw) -> "CRFModel":
        return cls(labels, features, np.zeros(len(features) * len(labels) + len(labels) ** 2), **kw)

    @property
    def unary(self) -> np.ndarray:
        """(features x labels) view into ``weights``."""
        return self.weights[: len(self.features) * len(self.labels)].reshape(len(self.features), len(self.labels))

    @property
    def transition(self) -> np.ndarray:
        """(labels x labels) view into ``weights``; row = previous label."""
        L = len(self.labels)
        return self.weights[len(self.features) * L:].reshape(L, L)

    def unary_scores(self, x: Sequence[Iterable[str]]) -> np.ndarray:
        """Per-position label scores, with -inf on START-inadmissible labels."""
        W = self.unary
        L = len(self.labels)
        out = np.zeros((len(x), L))
        for t, active in enumerate(x):
            idx = self.features.encode(active)
            if idx.size:
                out[t] = W[idx].sum(axis=0)
        return out + admissibility(self.labels, len(x))


def admissibility(labels: LabelAlphabet, n: int) -> np.ndarray:
    mask = np.zeros((n, len(labels)))
    if labels.constrained and n:
        start = labels.start_mask
        mask[0, ~start] = -np.inf
        mask[1:, start] = -np.inf
    return mask


# -- log-space inference ---------------------------------------------------------------

def _lse(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


def _forward(U: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Batched forward pass. U: (B, n, L) -> alpha (B, n, L)."""
    alpha = np.empty_like(U)
    alpha[:, 0] = U[:, 0]
    for t in range(1, U.shape[1]):
        alpha[:, t] = _lse(alpha[:, t - 1, :, None] + T[None], axis=1) + U[:, t]
    return alpha


def _backward(U: np.ndarray, T: np.ndarray) -> np.ndarray:
    beta = np.zeros_like(U)
    for t in range(U.shape[1] - 2, -1, -1):
        beta[:, t] = _lse(T[None] + (U[:, t + 1] + beta[:, t + 1])[:, None, :], axis=2)
    return beta


def log_partition_scores(U: np.ndarray, T: np.ndarray) -> float:
    alpha = _forward(U[None], T)
    return float(_lse(alpha[0, -1], axis=0))


def marginals_scores(U: np.ndarray, T: np.ndarray) -> tuple:
    alpha = _forward(U[None], T)[0]
    beta = _backward(U[None], T)[0]
    logz = _lse(alpha[-1], axis=0)
    with np.errstate(invalid="ignore"):
        unary = np.exp(alpha + beta - logz)
        pair = np.exp(alpha[:-1, :, None] + T[None] + (U[1:] + beta[1:])[:, None, :] - logz)
    return np.nan_to_num(unary), np.nan_to_num(pair)


def viterbi_step(delta: np.ndarray, u: np.ndarray, T: np.ndarray) -> tuple:
    """One max-product step: (new delta, backpointers). Ties go to the
    lowest predecessor index."""
    M = delta[:, None] + T
    bp = np.argmax(M, axis=0)
    return M[bp, np.arange(T.shape[0])] + u, bp


def viterbi_scores(U: np.ndarray, T: np.ndarray) -> tuple:
    """MAP sequence for unary scores ``U`` (n, L) and transitions ``T``.

    Forward max-product with backpointers; ties resolve to the lowest label
    index, both for the final label and for every backpointer.
    """
    n = U.shape[0]
    delta = U[0]
    bps = []
    for t in range(1, n):
        delta, bp = viterbi_step(delta, U[t], T)
        bps.append(bp)
    y = [int(np.argmax(delta))]
    for bp in reversed(bps):
        y.append(int(bp[y[-1]]))
    y.reverse()
    return y, float(delta[y[-1]])


def sequence_score(model: CRFModel, x, y: Sequence[int]) -> float:
    U = model.unary_scores(x)
    T = model.transition
    s = sum(U[t, y[t]] for t in range(len(y)))
    s += sum(T[y[t - 1], y[t]] for t in range(1, len(y)))
    return float(s)


def log_partition(model: CRFModel, x) -> float:
    return log_partition_scores(model.unary_scores(x), model.transition)


def marginals(model: CRFModel, x) -> tuple:
    """(unary (n, L), pairwise (n-1, L, L)) posterior marginals."""
    return marginals_scores(model.unary_scores(x), model.transition)


def viterbi(model: CRFModel, x) -> list:
    """Most probable composite label names for observation sequence ``x``."""
    y, _ = viterbi_scores(model.unary_scores(x), model.transition)
    return [model.labels.names[i] for i in y]


def decode(model: CRFModel, x) -> tuple:
    """Viterbi decode returned as ActionLabels."""
    return tuple(decode_label(n) for n in viterbi(model, x))


# -- training -----------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    l2: float = 1.0
    max_iterations: int = 500
    tolerance: float = 1e-6  # on relative objective change
    seed: int = 0  # recorded only; full-batch ascent from w = 0 is deterministic


class _Compiled:
    """Training set packed for batched forward-backward."""

    def __init__(self, labels: LabelAlphabet, features: FeatureAlphabet, dataset):
        L, F = len(labels), len(features)
        rows, cols, gold, masks = [], [], [], []
        self.groups: dict = {}
        offset = 0
        for obs, ys in dataset:
            n = len(ys)
            self.groups.setdefault(n, []).append(offset)
            for t, active in enumerate(obs):
                for j in features.encode(active):
                    rows.append(offset + t)
                    cols.append(int(j))
            for y in ys:
                name = encode_label(y) if isinstance(y, ActionLabel) else y
                if name not in labels.index:
                    raise CRFError(f"label {name!r} missing from the alphabet")
                gold.append(labels.index[name])
            masks.append(admissibility(labels, n))
            offset += n
        self.P = offset
        self.X = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(offset, F))
        self.XT = self.X.T.tocsr()
        self.gold = np.array(gold, dtype=np.int64)
        self.mask = np.concatenate(masks) if masks else np.zeros((0, L))
        onehot = np.zeros((offset, L))
        onehot[np.arange(offset), self.gold] = 1.0
        self.emp_unary = np.asarray(self.XT @ onehot)
        self.emp_trans = np.zeros((L, L))
        self.gather = {}
        for n, offs in self.groups.items():
            idx = np.asarray(offs)[:, None] + np.arange(n)[None, :]
            self.gather[n] = idx
            if n > 1:
                np.add.at(self.emp_trans, (self.gold[idx[:, :-1]].ravel(), self.gold[idx[:, 1:]].ravel()), 1.0)
        self.L, self.F = L, F

    def objective(self, w: np.ndarray, l2: float, need_grad: bool = True):
        L, F = self.L, self.F
        W = w[: F * L].reshape(F, L)
        T = w[F * L:].reshape(L, L)
        Uall = np.asarray(self.X @ W) + self.mask
        gold_score = Uall[np.arange(self.P), self.gold].sum() + (self.emp_trans * T).sum()
        logz_total = 0.0
        pm = np.zeros_like(Uall) if need_grad else None
        pair = np.zeros((L, L)) if need_grad else None
        for n, idx in self.gather.items():
            U = Uall[idx]  # (B, n, L)
            alpha = _forward(U, T)
            logz = _lse(alpha[:, -1], axis=1)  # (B,)
            logz_total += logz.sum()
            if not need_grad:
                continue
            beta = _backward(U, T)
            with np.errstate(invalid="ignore"):
                pm[idx] = np.nan_to_num(np.exp(alpha + beta - logz[:, None, None]))
                for t in range(n - 1):
                    e = alpha[:, t, :, None] + T[None] + (U[:, t + 1] + beta[:, t + 1])[:, None, :] - logz[:, None, None]
                    pair += np.nan_to_num(np.exp(e)).sum(axis=0)
        f = gold_score - logz_total - 0.5 * l2 * float(w @ w)
        if not need_grad:
            return f, None
        gW = self.emp_unary - np.asarray(self.XT @ pm)
        gT = self.emp_trans - pair
        g = np.concatenate([gW.ravel(), gT.ravel()]) - l2 * w
        return f, g


def objective_and_gradient(model: CRFModel, dataset, l2: float | None = None) -> tuple:
    """Regularised log-likelihood of ``dataset`` at ``model.weights`` and its gradient."""
    comp = _Compiled(model.labels, model.features, dataset)
    return comp.objective(model.weights, model.l2 if l2 is None else l2)


def train(dataset, config: TrainConfig = TrainConfig(), alphabets: tuple | None = None) -> CRFModel:
    """Fit a CRF by regularised maximum likelihood.

    Starts from w = 0. Each iteration tries a Barzilai-Borwein step along the
    gradient and halves it until the Armijo condition holds, so accepted
    objectives never decrease.
    """
    if not dataset:
        raise CRFError("empty training set")
    labels, features = alphabets if alphabets is not None else build_alphabets(dataset)
    comp = _Compiled(labels, features, dataset)
    w = np.zeros(comp.F * comp.L + comp.L ** 2)
    f, g = comp.objective(w, config.l2)
    f0 = f
    history = [f]
    gnorm2 = float(g @ g)
    step = 1.0 / max(1.0, math.sqrt(gnorm2))
    converged = False
    it = 0
    for it in range(1, config.max_iterations + 1):
        if gnorm2 == 0.0:
            converged = True
            break
        t = step
        while True:
            w_new = w + t * g
            f_new, g_new = comp.objective(w_new, config.l2)
            if not math.isfinite(f_new) or not np.all(np.isfinite(g_new)):
                if t < 1e-30:
                    raise TrainingError(f"non-finite objective at iteration {it}")
                t *= 0.5
                continue
            if f_new >= f + 1e-4 * t * gnorm2:
                break
            t *= 0.5
            if t < 1e-30:
                break
        if t < 1e-30:
            converged = True  # no ascent step left at machine precision
            break
        s = w_new - w
        dg = g_new - g
        denom = -float(s @ dg)
        step = float(s @ s) / denom if denom > 0 else 2.0 * t
        change = f_new - f
        w, f, g = w_new, f_new, g_new
        gnorm2 = float(g @ g)
        history.append(f)
        if abs(change) <= config.tolerance * max(1.0, abs(f)):
            converged = True
            break
    if not np.all(np.isfinite(w)):
        raise TrainingError(f"weights diverged at iteration {it}")
    meta = {
        "iterations": it,
        "objective": f,
        "initial_objective": f0,
        "converged": converged,
        "tolerance": config.tolerance,
        "max_iterations": config.max_iterations,
        "seed": config.seed,
        "n_sequences": len(dataset),
    }
    model = CRFModel(labels, features, w, config.l2, meta)
    model.metadata["history"] = history
    return model


# -- serialization ----------------------------------------------------------------------

def model_to_dict(model: CRFModel) -> dict:
    meta = {k: v for k, v in model.metadata.items() if k != "history"}
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "labels": list(model.labels.names),
        "features": list(model.features.names),
        "l2": model.l2,
        "metadata": meta,
        "weights": [float(v) for v in model.weights],
    }


def save_model(model: CRFModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, separators=(",", ":"))
        fh.write("\n")


def load_model(path) -> CRFModel:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CorruptModelError(f"{path}: not a readable model file ({e})") from None
    if not isinstance(d, dict) or d.get("format") != FORMAT_NAME:
        raise ModelFormatError(f"{path}: not an {FORMAT_NAME} file")
    if d.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported model version {d.get('version')!r}")
    try:
        return CRFModel(
            LabelAlphabet(tuple(d["labels"])),
            FeatureAlphabet(tuple(d["features"])),
            np.array(d["weights"], dtype=np.float64),
            float(d["l2"]),
            dict(d.get("metadata", {})),
        )
    except (KeyError, TypeError, ValueError, CRFError) as e:
        raise CorruptModelError(f"{path}: {e}") from None
