"""Command-line entry points: gen-data, run-sim, experiment, serve.

The report paths (run-sim, experiment) write delimited tables and render the
matching matplotlib figures next to them unless --no-figures is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import fields
from pathlib import Path

from . import core, experiment, figures, loop, model


def _resolve_dataset(spec) -> core.Dataset:
    """Dataset spec: {"manifest": path} or {"synthetic": {k, dim, per_class, separation, seed}}."""
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValueError('dataset spec must be {"manifest": ...} or {"synthetic": {...}}')
    if "manifest" in spec:
        return core.load_dataset(spec["manifest"])
    if "synthetic" in spec:
        s = dict(spec["synthetic"])
        unknown = set(s) - {"k", "dim", "per_class", "separation", "seed"}
        if unknown:
            raise ValueError(f"synthetic spec has unknown fields: {', '.join(sorted(unknown))}")
        return core.gen_synthetic(
            num_classes=s["k"],
            dim=s["dim"],
            per_class=s["per_class"],
            separation=s["separation"],
            seed=s.get("seed", 0),
        )
    raise ValueError('dataset spec must be {"manifest": ...} or {"synthetic": {...}}')


def cmd_gen_data(args) -> int:
    dataset = core.gen_synthetic(
        num_classes=args.k,
        dim=args.dim,
        per_class=args.per_class,
        separation=args.separation,
        seed=args.seed,
    )
    if args.name:
        dataset = core.Dataset(
            name=args.name, num_classes=dataset.num_classes, dim=dataset.dim, samples=dataset.samples
        )
    manifest = core.write_dataset(dataset, args.out)
    print(f"wrote {manifest} ({len(dataset)} samples, K={dataset.num_classes}, d={dataset.dim})")
    return 0


def cmd_run_sim(args) -> int:
    raw = json.loads(Path(args.config).read_text())
    if not isinstance(raw, dict) or "dataset" not in raw or "session" not in raw:
        raise ValueError('run-sim config needs top-level "dataset" and "session" objects')
    unknown = set(raw) - {"dataset", "session"}
    if unknown:
        raise ValueError(f"run-sim config has unknown fields: {', '.join(sorted(unknown))}")
    dataset = _resolve_dataset(raw["dataset"])
    config = loop.config_from_dict({"dataset": dataset.name, **raw["session"]})

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params, state, history = loop.run_session(config, dataset)

    loop.save_state(state, out / "session.json")
    model.save_checkpoint(out / "checkpoint.json", params, state.opt)
    with open(out / "history.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "labeled_total", "holdout_accuracy", "mean_pool_uncertainty"])
        for m in [state.initial_metrics, *history]:
            writer.writerow(
                [m.round, m.labeled_total, repr(m.holdout_accuracy), repr(m.mean_pool_uncertainty)]
            )
    with open(out / "labeled.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        pool, _ = loop.split_for_session(dataset, config)
        writer.writerow(
            ["id", *[f"f_{j + 1}" for j in range(dataset.dim)], "label", "round", "source"]
        )
        for rec in state.oracle_records():
            feats = [repr(float(v)) for v in pool.by_id[rec.sample_id].features]
            writer.writerow([rec.sample_id, *feats, rec.label, rec.round, rec.source])
    if not args.no_figures:
        figures.plot_session_history(history, out / "history.png", initial=state.initial_metrics)
    final = history[-1]
    print(
        f"session complete: {len(state.oracle_records())} labels over {config.rounds} rounds, "
        f"holdout accuracy {final.holdout_accuracy:.4f}"
    )
    print(f"outputs in {out}")
    return 0


def cmd_experiment(args) -> int:
    raw = json.loads(Path(args.grid).read_text())
    if not isinstance(raw, dict) or "dataset" not in raw:
        raise ValueError('experiment grid needs a top-level "dataset" object')
    dataset = _resolve_dataset(raw.pop("dataset"))
    grid_fields = {f.name for f in fields(experiment.ExperimentGrid)}
    unknown = set(raw) - grid_fields
    if unknown:
        raise ValueError(f"experiment grid has unknown fields: {', '.join(sorted(unknown))}")
    for key in ("methods", "budgets"):
        if key in raw:
            raw[key] = tuple(raw[key])
    grid = experiment.ExperimentGrid(**raw)

    out = Path(args.out)
    rows = experiment.run_experiment(grid, dataset, out_dir=out)
    if not args.no_figures:
        figures.plot_accuracy_vs_budget(rows, out / "accuracy_vs_budget.png")
        figures.plot_divergence_vs_budget(rows, out / "divergence_vs_budget.png")
    print(f"{len(rows)} rows -> {out / 'report.csv'}")
    for s in experiment.summarize(rows):
        print(
            f"  {s['method']:>8} n={s['budget']:<5} acc {s['mean_accuracy']:.4f}"
            f" (var {s['var_accuracy']:.2e})  div {s['mean_divergence']:.4f}"
        )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir, state_dir=args.state_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="activelabel",
        description="Budgeted active labeling: simulate sessions, run experiments, serve the labeling API.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic Gaussian-mixture dataset")
    p.add_argument("--k", type=int, required=True, help="number of classes (>= 2)")
    p.add_argument("--dim", type=int, required=True, help="feature dimension")
    p.add_argument("--per-class", type=int, required=True, help="samples per class")
    p.add_argument("--separation", type=float, required=True, help="center spacing scale")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="manifest path to write (.json)")
    p.add_argument("--name", default=None, help="dataset name (defaults to a generated one)")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("run-sim", help="run one simulated labeling session")
    p.add_argument("--config", required=True, help="JSON file with dataset + session config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_run_sim)

    p = sub.add_parser("experiment", help="run a method/budget/trial sweep")
    p.add_argument("--grid", required=True, help="JSON file with the experiment grid")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("serve", help="serve the labeling API (and UI assets if present)")
    p.add_argument("--data-dir", required=True, help="directory of dataset manifests")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument(
        "--state-dir",
        default=None,
        help="session state directory (default: $ACTIVELABEL_STATE_DIR or ./state)",
    )
    p.add_argument("--ui-dir", default=None, help="static UI bundle to serve at /ui/")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
