"""Experiment pipelines: prediction quality, plan selection and plan synthesis.

Every pipeline is a pure function of its config: all randomness is derived
from ``seed`` through string-keyed generators, and CSV floats are written
with six decimals, so identical configs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np
from scipy import stats

from . import labels as L
from .crf import CRFModel, TrainConfig, load_model, save_model, train
from .expd import ExpdWeights, ffexpd_plan, predict_measures, rand_index, select_index
from .rover import (GroundTruthLabeler, RoverConfig, gen_dataset, gen_hidden_variant, gen_problem,
                    record_dataset, write_dataset)
from .search import SearchConfig, SearchError, ehc_plan

EXPERIMENTS = ("prediction", "selection", "synthesis")
MODES = {"theta": (1, 0), "beta": (0, 1), "both": (1, 1), "zero": (0, 0)}

PREDICTION_COLUMNS = ("level", "theta_ratio", "beta_ratio", "n", "theta", "theta_hat", "beta", "beta_hat")
SELECTION_COLUMNS = ("level", "method", "theta", "beta", "p_theta", "p_beta", "n")
SYNTHESIS_COLUMNS = ("trial", "mode", "planner", "theta", "beta", "theta_hat", "beta_hat", "steps",
                     "n", "p_theta", "p_beta", "excluded")

# counts of the original study; desk-scale defaults shrink them
PAPER_SCALE = dict(n_train=1000, n_test=100, goals_per_level=50, candidates_per_goal=20,
                   problems_per_trial=100, trials=5)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "prediction"
    seed: int = 0
    width: int = 4
    height: int = 4
    # training
    n_train: int = 200
    train_max_hidden: int = 3
    l2: float = 1.0
    max_iterations: int = 500
    tolerance: float = 1e-6
    model_path: str | None = None  # reuse a trained model instead of training
    # prediction
    n_test: int = 50  # test plans per level
    levels: tuple = (1, 2, 3, 4, 5, 6)
    # selection
    goals_per_level: int = 20
    candidates_per_goal: int = 10
    # synthesis
    trials: int = 3
    problems_per_trial: int = 30  # filtered problems kept per trial
    synthesis_max_hidden: int = 6
    filter_threshold: float = 0.85
    max_draws: int = 2000  # per trial, before giving up on the filter
    modes: tuple = ("theta", "beta", "both")
    w_theta: float = 2.0
    w_beta: float = 2.0
    out_dir: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        object.__setattr__(self, "levels", tuple(int(x) for x in self.levels))
        object.__setattr__(self, "modes", tuple(self.modes))
        for name in ("n_train", "n_test", "goals_per_level", "candidates_per_goal", "trials",
                     "problems_per_trial", "max_draws"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.levels or any(not 0 <= x <= 10 for x in self.levels):
            raise ValueError("levels must lie in [0, 10]")
        if not 0 <= self.train_max_hidden <= 10 or not 0 <= self.synthesis_max_hidden <= 10:
            raise ValueError("hidden-goal levels must lie in [0, 10]")
        bad = [m for m in self.modes if m not in MODES]
        if bad:
            raise ValueError(f"unknown synthesis mode {bad[0]!r}")
        ExpdWeights(self.w_theta, self.w_beta)

    @classmethod
    def paper_scale(cls, **kw) -> "ExperimentConfig":
        return cls(**{**kw, **PAPER_SCALE})

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known - {"paper_scale"})
        if unknown:
            raise ValueError(f"unknown config key {unknown[0]!r}")
        kw = {k: v for k, v in d.items() if k in known}
        for k in ("levels", "modes"):
            if isinstance(kw.get(k), str):
                kw[k] = tuple(x.strip() for x in kw[k].split(",") if x.strip())
        if d.get("paper_scale") in (True, "true", "1", 1):
            return cls.paper_scale(**kw)
        return cls(**kw)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """JSON object, or ``key = value`` lines ('#' comments)."""
        text = Path(path).read_text()
        if text.lstrip().startswith("{"):
            return cls.from_dict(json.loads(text))
        d: dict = {}
        types = {f.name: f.type for f in fields(cls)}
        for n, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected 'key = value'")
            k, v = (x.strip() for x in line.split("=", 1))
            d[k] = _coerce(v, types.get(k, "str"))
        return cls.from_dict(d)

    @property
    def rover(self) -> RoverConfig:
        return RoverConfig(self.width, self.height, max_hidden=self.train_max_hidden)

    @property
    def train_config(self) -> TrainConfig:
        return TrainConfig(self.l2, self.max_iterations, self.tolerance, self.seed)


def _coerce(v: str, typ: str):
    typ = str(typ)
    if v.lower() in ("none", "null"):
        return None
    if typ.startswith("int"):
        return int(v)
    if typ.startswith("float"):
        return float(v)
    if typ.startswith("bool") or v.lower() in ("true", "false"):
        return v.lower() == "true"
    return v


# -- shared pieces ---------------------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else f"{x:.6f}"
    return str(x)


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


def paired_p(a, b) -> float:
    """Two-sided paired t-test p-value; identical samples give 1.0."""
    d = np.asarray(a, float) - np.asarray(b, float)
    if len(d) < 2 or np.all(d == d[0]):
        return 1.0 if len(d) < 2 or d[0] == 0 else 0.0
    p = float(stats.ttest_rel(a, b).pvalue)
    return 1.0 if math.isnan(p) else p


def training_records(cfg: ExperimentConfig) -> list:
    return gen_dataset(cfg.rover, cfg.n_train, f"{cfg.seed}-train")


def obtain_model(cfg: ExperimentConfig) -> CRFModel:
    """Load ``cfg.model_path`` or train on fresh rover data (saved to out_dir)."""
    if cfg.model_path:
        return load_model(cfg.model_path)
    records = training_records(cfg)
    model = train(record_dataset(records), cfg.train_config)
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_dataset(out / "train.jsonl", records, cfg.rover, cfg.n_train, cfg.seed)
        save_model(model, out / "model.json")
    return model


def _write(cfg, name, text):
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
        with open(out / "config.json", "w") as fh:
            # out_dir is where this file lives; leaving it out keeps reruns elsewhere byte-identical
            saved = {k: v for k, v in asdict(cfg).items() if k != "out_dir"}
            json.dump(saved, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _truth(inst, plan, labeler=None):
    labeler = labeler or GroundTruthLabeler(inst.problem, inst.public_task)
    return L.measure(labeler.label(inst.full_task, plan))


# -- prediction --------------------------------------------------------------------------------

def prediction_rows(cfg: ExperimentConfig, model: CRFModel) -> list:
    rows = []
    for level in cfg.levels:
        rc = replace(cfg.rover, max_hidden=level)
        th, thh, b, bh = [], [], [], []
        for i in range(cfg.n_test):
            inst = gen_problem(rc, f"{cfg.seed}-test-{level}-{i}")
            plan = ehc_plan(inst.full_task)
            m = _truth(inst, plan)
            pm = predict_measures(model, inst.full_task, plan)
            th.append(m.theta); b.append(m.beta)
            thh.append(pm.theta_hat); bh.append(pm.beta_hat)
        mt, mb = float(np.mean(th)), float(np.mean(b))
        rows.append(dict(level=level, n=len(th), theta=mt, theta_hat=float(np.mean(thh)),
                         beta=mb, beta_hat=float(np.mean(bh)),
                         theta_ratio=float(np.mean(thh)) / mt if mt else math.nan,
                         beta_ratio=float(np.mean(bh)) / mb if mb else math.nan))
    return rows


def run_prediction_experiment(cfg: ExperimentConfig, model: CRFModel | None = None) -> str:
    """Ratio of mean predicted to mean ground-truth measures per hidden-goal level."""
    model = model or obtain_model(cfg)
    text = to_csv(PREDICTION_COLUMNS, prediction_rows(cfg, model))
    _write(cfg, "prediction.csv", text)
    return text


# -- selection -----------------------------------------------------------------------------------

def candidate_set(cfg: ExperimentConfig, level: int, goal: int) -> tuple:
    """One public problem and FF plans for ``candidates_per_goal`` random hidden-goal variants."""
    base = gen_problem(replace(cfg.rover, max_hidden=0), f"{cfg.seed}-goal-{level}-{goal}").problem
    cands = []
    for c in range(cfg.candidates_per_goal):
        inst = gen_hidden_variant(base, level, f"{cfg.seed}-cand-{level}-{goal}-{c}")
        cands.append((inst, ehc_plan(inst.full_task)))
    return base, cands


def selection_rows(cfg: ExperimentConfig, model, oracle: bool = True) -> list:
    rows = []
    for level in cfg.levels:
        res = {"expd-select": ([], []), "rand-select": ([], []), "oracle-select": ([], [])}
        for g in range(cfg.goals_per_level):
            base, cands = candidate_set(cfg, level, g)
            labeler = GroundTruthLabeler(base, cands[0][0].public_task)
            truth = [L.measure(labeler.label(inst.full_task, p)) for inst, p in cands]
            pairs = [(inst.full_task, p) for inst, p in cands]
            kt = select_index(pairs, model, "theta")
            kb = select_index(pairs, model, "beta")
            kr = rand_index(len(cands), f"{cfg.seed}-rand-{level}-{g}")
            res["expd-select"][0].append(truth[kt].theta)
            res["expd-select"][1].append(truth[kb].beta)
            res["rand-select"][0].append(truth[kr].theta)
            res["rand-select"][1].append(truth[kr].beta)
            res["oracle-select"][0].append(max(m.theta for m in truth))
            res["oracle-select"][1].append(max(m.beta for m in truth))
        rt, rb = res["rand-select"]
        for method in ("expd-select", "rand-select", "oracle-select"):
            if method == "oracle-select" and not oracle:
                continue
            t, b = res[method]
            rows.append(dict(level=level, method=method, theta=float(np.mean(t)), beta=float(np.mean(b)),
                             p_theta=paired_p(t, rt), p_beta=paired_p(b, rb), n=len(t)))
    return rows


def run_selection_experiment(cfg: ExperimentConfig, model: CRFModel | None = None) -> str:
    """EXPD-SELECT vs RAND-SELECT ground-truth measures per level.

    p-values compare each method with RAND-SELECT (paired over goals); the
    oracle row selects by the ground-truth labeler and bounds what any
    predictor can reach.
    """
    model = model or obtain_model(cfg)
    text = to_csv(SELECTION_COLUMNS, selection_rows(cfg, model))
    _write(cfg, "selection.csv", text)
    return text


# -- synthesis -----------------------------------------------------------------------------------

def filtered_problems(cfg: ExperimentConfig, model: CRFModel, trial: int) -> tuple:
    """Problems whose FF plan has predicted explicability below the threshold.

    Draws instances in seed order until ``problems_per_trial`` pass.
    Returns ``([(instance, ff_plan)], draws)``.
    """
    rc = replace(cfg.rover, max_hidden=cfg.synthesis_max_hidden)
    kept = []
    draws = 0
    while len(kept) < cfg.problems_per_trial:
        if draws >= cfg.max_draws:
            raise RuntimeError(f"trial {trial}: only {len(kept)} problems passed the filter in {draws} draws")
        inst = gen_problem(rc, f"{cfg.seed}-syn-{trial}-{draws}")
        draws += 1
        plan = ehc_plan(inst.full_task)
        if predict_measures(model, inst.full_task, plan).theta_hat < cfg.filter_threshold:
            kept.append((inst, plan))
    return kept, draws


def synthesis_rows(cfg: ExperimentConfig, model: CRFModel, search: SearchConfig = SearchConfig()) -> list:
    rows = []
    for trial in range(cfg.trials):
        problems, _ = filtered_problems(cfg, model, trial)
        for mode in cfg.modes:
            kt, kb = MODES[mode]
            w = ExpdWeights(kt * cfg.w_theta, kb * cfg.w_beta)
            ff, ex = [], []
            excluded = 0
            for inst, plan in problems:
                try:
                    q = ffexpd_plan(inst.full_task, model, w, search)
                except SearchError:
                    excluded += 1
                    continue
                for out, p in ((ff, plan), (ex, q)):
                    m = _truth(inst, p)
                    pm = predict_measures(model, inst.full_task, p)
                    out.append((m.theta, m.beta, pm.theta_hat, pm.beta_hat, len(p)))
            ff_a, ex_a = np.array(ff).reshape(-1, 5), np.array(ex).reshape(-1, 5)
            for planner, arr in (("ff", ff_a), ("ff-expd", ex_a)):
                mean = arr.mean(axis=0) if len(arr) else np.full(5, math.nan)
                rows.append(dict(trial=trial, mode=mode, planner=planner, theta=float(mean[0]),
                                 beta=float(mean[1]), theta_hat=float(mean[2]), beta_hat=float(mean[3]),
                                 steps=float(mean[4]), n=len(arr),
                                 p_theta=paired_p(ex_a[:, 0], ff_a[:, 0]),
                                 p_beta=paired_p(ex_a[:, 1], ff_a[:, 1]), excluded=excluded))
    return rows


def run_synthesis_experiment(cfg: ExperimentConfig, model: CRFModel | None = None) -> str:
    """FF vs FF-EXPD on filtered problems, ground-truth and predicted measures."""
    model = model or obtain_model(cfg)
    text = to_csv(SYNTHESIS_COLUMNS, synthesis_rows(cfg, model))
    _write(cfg, "synthesis.csv", text)
    return text


RUNNERS = {
    "prediction": run_prediction_experiment,
    "selection": run_selection_experiment,
    "synthesis": run_synthesis_experiment,
}


def run_experiment(cfg: ExperimentConfig, model: CRFModel | None = None) -> str:
    return RUNNERS[cfg.experiment](cfg, model)


def read_csv(text: str) -> list:
    return list(csv.DictReader(io.StringIO(text)))
