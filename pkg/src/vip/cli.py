"""Command-line entry points: generate, train, eval, pursue, serve."""
from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from .data import SYMCAT_MINI, SyntheticSpec, load_csv, planted_task, save_csv
from .errors import VipError
from .metrics import (DEFAULT_AGREEMENT_EPS_BITS, full_budget_curve,
                      normalized_auc, oracle_agreement)
from .networks import serialize_checkpoint
from .oracle import DiscreteJointModel
from .pursuit import StoppingRule, Strategy, run_pursuit
from .queries import AnswerVector
from .service import create_app, load_checkpoint_file
from .trainer import TrainConfig, train

DEFAULT_PORT = 8650


@click.group()
def cli():
    """Sequential query-selection: train, evaluate and run pursuit."""


@cli.command()
@click.option("--profile", default="symcat-mini",
              type=click.Choice(["symcat-mini", "planted"]))
@click.option("--seed", default=0, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
def generate(profile, seed, out_dir):
    """Write train.csv, test.csv and model.json for a synthetic profile."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if profile == "symcat-mini":
        spec = SyntheticSpec(seed=seed)
        from .data import generate_synthetic
        train_set, test_set, model = generate_synthetic(spec)
    else:
        train_set, test_set, model = planted_task(seed=seed)
    save_csv(train_set, out / "train.csv")
    save_csv(test_set, out / "test.csv")
    (out / "model.json").write_text(model.to_json())
    click.echo(f"wrote {out / 'train.csv'}, {out / 'test.csv'}, "
               f"{out / 'model.json'}")


@cli.command("train")
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--fast", is_flag=True, help="desk-scale defaults")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path())
def train_cmd(data_path, config_path, fast, out_path, report_path):
    """Train a querier/classifier pair and write a checkpoint."""
    dataset = load_csv(data_path)
    if config_path:
        config = TrainConfig.from_json(Path(config_path).read_text())
    elif fast:
        config = TrainConfig.fast()
    else:
        config = TrainConfig()
    classifier, querier, report = train(dataset, config)
    blob = serialize_checkpoint(classifier, querier, {
        "query_set": dataset.query_set.to_json(),
        "labels": list(dataset.label_names),
        "train_config": config.to_json(),
    })
    Path(out_path).write_bytes(blob)
    if report_path:
        Path(report_path).write_text(report.to_json_lines() + "\n")
    click.echo(f"trained {len(report.epochs)} epochs "
               f"in {report.wall_time:.1f}s -> {out_path}")


@cli.command("eval")
@click.option("--ckpt", "ckpt_path", required=True,
              type=click.Path(exists=True))
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True))
@click.option("--oracle", "oracle_path", type=click.Path(exists=True))
@click.option("--stop", default="map:0.05")
@click.option("--eps-mi", default=DEFAULT_AGREEMENT_EPS_BITS, type=float)
@click.option("--trajectories", default=500, type=int)
@click.option("--out", "out_path", type=click.Path())
def eval_cmd(ckpt_path, data_path, oracle_path, stop, eps_mi, trajectories,
             out_path):
    """Accuracy-vs-budget curve, normalized AUC and oracle agreement."""
    ckpt = load_checkpoint_file(ckpt_path)
    dataset = load_csv(data_path, label_names=ckpt.label_names)
    learned = Strategy.learned(ckpt.querier)
    curve = full_budget_curve(dataset, learned, ckpt.classifier)
    random_curve = full_budget_curve(dataset, Strategy.random(0),
                                     ckpt.classifier)
    doc = {
        "budgets": list(range(1, dataset.query_set.size + 1)),
        "learned_accuracy": curve,
        "random_accuracy": random_curve,
        "auc": normalized_auc(curve),
        "random_auc": normalized_auc(random_curve),
    }
    if oracle_path:
        model = DiscreteJointModel.from_json(Path(oracle_path).read_text())
        doc["agreement"] = oracle_agreement(
            ckpt.querier, ckpt.classifier, model, dataset,
            StoppingRule.parse(stop), eps_bits=eps_mi,
            max_trajectories=trajectories)
    text = json.dumps(doc, indent=2)
    if out_path:
        Path(out_path).write_text(text)
    click.echo(text)


@cli.command()
@click.option("--ckpt", "ckpt_path", required=True,
              type=click.Path(exists=True))
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True))
@click.option("--stop", default="map:0.05")
@click.option("--top", default=3, type=int, help="posterior entries to show")
def pursue(ckpt_path, input_path, stop, top):
    """Run one pursuit on a JSON row {"answers": [...]} and print the steps."""
    ckpt = load_checkpoint_file(ckpt_path)
    row = json.loads(Path(input_path).read_text())
    x = AnswerVector(np.asarray(row["answers"], dtype=np.float64))
    traj = run_pursuit(x, Strategy.learned(ckpt.querier), ckpt.classifier,
                       StoppingRule.parse(stop))
    names = ckpt.query_set.names()
    labels = ckpt.label_names

    def top_k(posterior):
        order = np.argsort(posterior.probs)[::-1][:top]
        return ", ".join(f"{labels[i]}={posterior.probs[i]:.3f}"
                         for i in order)

    click.echo(f"{'step':>4}  {'query':<20} {'answer':>7}  top posterior")
    click.echo(f"{0:>4}  {'(prior)':<20} {'':>7}  {top_k(traj.prior)}")
    for i, step in enumerate(traj.steps, start=1):
        click.echo(f"{i:>4}  {names[step.query_id]:<20} "
                   f"{step.answer:>7.1f}  {top_k(step.posterior)}")
    click.echo(f"prediction: {labels[traj.terminal_prediction]} "
               f"({traj.stop_reason.value})")


@cli.command()
@click.option("--ckpt", "ckpt_paths", multiple=True, required=True,
              type=click.Path(exists=True))
@click.option("--port", default=None, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--static", "static_dir", type=click.Path(),
              help="directory of built UI assets to serve under /")
def serve(ckpt_paths, port, host, static_dir):
    """Start the HTTP session service."""
    import uvicorn

    checkpoints = {}
    for path in ckpt_paths:
        ckpt = load_checkpoint_file(path)
        checkpoints[ckpt.name] = ckpt
    app = create_app(checkpoints, static_dir=static_dir)
    if port is None:
        port = int(os.environ.get("VIP_PORT", DEFAULT_PORT))
    uvicorn.run(app, host=host, port=port)


def main(argv=None):
    try:
        return cli.main(args=argv, standalone_mode=False) or 0
    except (click.UsageError, click.BadParameter) as exc:
        print(f"error: {exc.format_message()}", file=sys.stderr)
        return 1
    except click.Abort:
        return 1
    except click.ClickException as exc:
        print(f"error: {exc.format_message()}", file=sys.stderr)
        return 1
    except (VipError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
