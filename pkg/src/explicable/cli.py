"""Command-line front end (``explicable <subcommand>``).

Exit status is 0 on success, 1 on a reported error (diagnostic on stderr)
and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import labels as L
from .crf import CRFError, TrainConfig, load_model, save_model, train
from .expd import ExpdWeights, ffexpd_plan, predict_measures, score_candidates, select_index
from .experiments import PAPER_SCALE, ExperimentConfig, run_experiment
from .pddl import (PDDLError, format_plan, ground, load_task, parse_domain, parse_plan, parse_problem,
                   validate_plan)
from .rover import RoverConfig, domain_text, gen_dataset, record_dataset, write_dataset
from .search import SearchConfig, SearchError, ehc_plan, optimal_plan


class CLIError(Exception):
    pass


def _read_domain(path: str) -> str:
    """File contents; the name ``rover`` selects the bundled rover domain."""
    if path == "rover" and not Path(path).exists():
        return domain_text()
    return Path(path).read_text()


def _task(args):
    return load_task(_read_domain(args.domain), Path(args.problem).read_text())


def cmd_parse(args) -> int:
    domain = parse_domain(_read_domain(args.domain))
    print(f"domain {domain.name}: {len(domain.types)} types, {len(domain.predicates)} predicates, "
          f"{len(domain.actions)} actions")
    if args.problem:
        problem = parse_problem(Path(args.problem).read_text(), domain)
        task = ground(domain, problem)
        print(f"problem {problem.name}: {len(problem.objects)} objects, {len(task.fluents)} fluents, "
              f"{len(task.actions)} ground actions, {bin(task.goal).count('1')} goal fluents")
    return 0


def cmd_plan(args) -> int:
    task = _task(args)
    cfg = SearchConfig(seed=args.seed, tie_breaking="random" if args.random_ties else "lowest-id")
    if args.planner == "ff":
        plan = ehc_plan(task, cfg)
    elif args.planner == "opt":
        plan = optimal_plan(task, cfg)
    else:
        if not args.model:
            raise CLIError("--planner ffexpd needs --model")
        plan = ffexpd_plan(task, load_model(args.model), ExpdWeights(args.w_theta, args.w_beta), cfg)
    text = format_plan(task, plan)
    report = validate_plan(task, plan)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"; {len(plan)} steps, cost {report.cost:g}", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    records = [r for r in L.read_jsonl(args.data) if args.split in (None, r.get("split"))]
    if not records:
        raise CLIError(f"no records in {args.data}")
    missing = [r["problem_id"] for r in records if "features" not in r]
    if missing:
        raise CLIError(f"record {missing[0]} has no features")
    model = train(record_dataset(records), TrainConfig(args.l2, args.max_iters, args.tol))
    save_model(model, args.out)
    meta = model.metadata
    print(f"trained on {len(records)} plans: {len(model.labels)} labels, {len(model.features)} features, "
          f"{meta['iterations']} iterations, objective {meta['objective']:.6f}")
    return 0


def cmd_label(args) -> int:
    task = _task(args)
    plan = parse_plan(task, Path(args.plan).read_text())
    report = validate_plan(task, plan)
    if not report.valid:
        raise CLIError(f"invalid plan: {report.message}")
    pm = predict_measures(load_model(args.model), task, plan)
    rec = L.make_record(Path(args.plan).stem, format_plan(task, plan).splitlines(), pm.labels, "test")
    rec["theta"] = round(pm.theta_hat, 6)
    rec["beta"] = round(pm.beta_hat, 6)
    print(L.record_to_json(rec))
    return 0


def cmd_score(args) -> int:
    print("problem_id,theta,beta")
    for rec in L.read_jsonl(args.labeled):
        m = L.measure(L.labels_from_record(rec))
        print(f"{rec['problem_id']},{m.theta:.6f},{m.beta:.6f}")
    return 0


def _grid(text: str) -> tuple:
    try:
        w, h = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 4x4, got {text!r}") from None
    return w, h


def cmd_gen_rover(args) -> int:
    w, h = args.grid
    cfg = RoverConfig(w, h, max_hidden=args.max_hidden)
    records = gen_dataset(cfg, args.n, args.seed, args.split)
    write_dataset(args.out, records, cfg, args.n, args.seed)
    print(f"wrote {len(records)} labeled plans to {args.out}")
    return 0


def load_candidates(directory) -> tuple:
    """Candidate directory: ``manifest.json`` with ``domain`` and a list of
    ``candidates`` entries ``{"problem": file, "plan": file}`` (paths
    relative to the directory)."""
    root = Path(directory)
    try:
        manifest = json.loads((root / "manifest.json").read_text())
    except FileNotFoundError:
        raise CLIError(f"{root}: missing manifest.json") from None
    name = manifest["domain"]
    domain = parse_domain(domain_text() if name == "rover" else (root / name).read_text())
    entries = manifest.get("candidates", [])
    if not entries:
        raise CLIError(f"{root}: empty candidate set")
    pairs = []
    for e in entries:
        task = ground(domain, parse_problem((root / e["problem"]).read_text(), domain))
        plan = parse_plan(task, (root / e["plan"]).read_text())
        report = validate_plan(task, plan)
        if not report.valid:
            raise CLIError(f"candidate {e['plan']}: {report.message}")
        pairs.append((task, plan))
    return entries, pairs


def cmd_select(args) -> int:
    entries, pairs = load_candidates(args.candidates)
    model = load_model(args.model)
    scores = score_candidates(pairs, model, args.criterion)
    k = select_index(pairs, model, args.criterion)
    for i, (e, s) in enumerate(zip(entries, scores)):
        print(f"{'*' if i == k else ' '} {i} {e['plan']} {args.criterion}={s:.6f}")
    return 0


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    if args.paper_scale:
        cfg = replace(cfg, **PAPER_SCALE)
    if args.experiment:
        cfg = replace(cfg, experiment=args.experiment)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    cfg = replace(cfg, out_dir=args.out)
    run_experiment(cfg)
    print(f"wrote {cfg.experiment}.csv to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="explicable", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", help="parse (and ground) a domain and problem")
    s.add_argument("domain")
    s.add_argument("problem", nargs="?")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("plan", help="plan with FF, uniform-cost search or FF-EXPD")
    s.add_argument("domain")
    s.add_argument("problem")
    s.add_argument("--planner", choices=("ff", "opt", "ffexpd"), default="ff")
    s.add_argument("--model")
    s.add_argument("--w-theta", type=float, default=2.0)
    s.add_argument("--w-beta", type=float, default=2.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--random-ties", action="store_true", help="seeded random successor order")
    s.add_argument("--out")
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("train", help="train a CRF on a labeled JSONL dataset")
    s.add_argument("--data", required=True)
    s.add_argument("--split", choices=("train", "test"), default=None)
    s.add_argument("--l2", type=float, default=1.0)
    s.add_argument("--max-iters", type=int, default=500)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("label", help="decode labels and predicted measures for a plan")
    s.add_argument("domain")
    s.add_argument("problem")
    s.add_argument("--model", required=True)
    s.add_argument("--plan", required=True)
    s.set_defaults(func=cmd_label)

    s = sub.add_parser("score", help="explicability and predictability of labeled plans")
    s.add_argument("--labeled", required=True)
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("gen-rover", help="generate a labeled rover dataset")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--max-hidden", type=int, default=3)
    s.add_argument("--grid", type=_grid, default=(4, 4))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--split", choices=("train", "test"), default="train")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_rover)

    s = sub.add_parser("select", help="pick the candidate plan with the best predicted measure")
    s.add_argument("--candidates", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--criterion", choices=("theta", "beta"), default="theta")
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("experiment", help="run a prediction, selection or synthesis experiment")
    s.add_argument("--config")
    s.add_argument("--experiment", choices=("prediction", "selection", "synthesis"))
    s.add_argument("--seed", type=int)
    s.add_argument("--paper-scale", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CLIError, PDDLError, SearchError, CRFError, ValueError, KeyError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"explicable {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
