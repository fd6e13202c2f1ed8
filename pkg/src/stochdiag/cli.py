"""``stochdiag`` command line.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import experiments
from .config import RunConfig
from .data import ReplicatedDataset
from .design import expand_replicates, maximin_lhs, scale_to_bounds, unscale_from_bounds
from .diagnostics import run_all
from .emulator import fit_hetgp, fit_homgp, model_from_dict, model_to_dict
from .exceptions import DomainError, FittingError, IngestionError, NumericalError, StochDiagError
from .io import ingest_runs, read_runs, write_runs
from .reporting import emit_plots, read_report, render_summary, write_report
from .rng import RngStream
from .simulators import ToySimulator, get_simulator

# substreams under the configured seed
_S_TRAIN, _S_VAL, _S_SIM, _S_FIT, _S_DIAG = range(5)


def _config(ctx) -> RunConfig:
    return ctx.obj["config"]


def _out_dir(ctx) -> Path:
    p = Path(ctx.obj["out_dir"])
    p.mkdir(parents=True, exist_ok=True)
    return p


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="YAML run configuration.")
@click.option("--seed", type=int, help="Master seed (overrides the config file).")
@click.option("--out-dir", default="stochdiag-out", show_default=True, help="Output directory.")
@click.pass_context
def cli(ctx, config_path, seed, out_dir):
    """Fit and validate Gaussian-process emulators of stochastic simulators."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = RunConfig.load(config_path, seed=seed)
    ctx.obj["out_dir"] = out_dir


@cli.command()
@click.pass_context
def design(ctx):
    """Write training and validation maximin LHS designs (replicated rows)."""
    cfg = _config(ctx)
    out = _out_dir(ctx)
    root = RngStream(cfg.seed)
    d = cfg["design"]
    for name, n, r, key in (("train", d["n_train"], d["r_train"], _S_TRAIN),
                            ("validation", cfg.n_val, d["r_val"], _S_VAL)):
        des = maximin_lhs(int(n), cfg.dim, root.substream(key), int(d["lhs_restarts"]), replicates=int(r))
        pts = scale_to_bounds(expand_replicates(des), cfg.lower, cfg.upper)
        write_runs(out / f"{name}_design.csv", pts)
        click.echo(f"wrote {out / f'{name}_design.csv'} ({des.n} locations x {int(r)} runs)")


def _read_design(path):
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise IngestionError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    cols = [j for j, h in enumerate(header) if h.startswith("x") and h[1:].isdigit()]
    X = np.empty((len(rows) - 1, len(cols)))
    for i, row in enumerate(rows[1:], start=1):
        for k, j in enumerate(cols):
            try:
                X[i - 1, k] = float(row[j])
            except (ValueError, IndexError):
                raise IngestionError(f"{path}: row {i}, column {header[j]!r} is malformed", row=i) from None
    return X


@cli.command()
@click.option("--design", "design_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Design CSV (x1..xd), one row per run.")
@click.option("--simulator", default=None,
              help="toy-normal | toy-gamma | table:<path> | exec:<cmd> (default from config).")
@click.option("--output", default="runs.csv", show_default=True, help="File name inside --out-dir.")
@click.pass_context
def simulate(ctx, design_path, simulator, output):
    """Run a simulator over a design and write a run table."""
    cfg = _config(ctx)
    out = _out_dir(ctx)
    spec = simulator or cfg["simulator"]["name"]
    sim = get_simulator(spec, workdir=cfg["simulator"]["workdir"])
    X = _read_design(design_path)
    if isinstance(sim, ToySimulator):
        unit = unscale_from_bounds(X, cfg.lower, cfg.upper)
        batch = sim.simulate(unit, RngStream(cfg.seed).substream(_S_SIM))
    else:
        batch = sim.simulate(X)
    write_runs(out / output, X, batch.outputs)
    click.echo(f"wrote {out / output} ({len(batch.outputs)} runs from {spec})")


@cli.command()
@click.option("--runs", "runs_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", default="model.json", show_default=True)
@click.pass_context
def fit(ctx, runs_path, output):
    """Fit an emulator to a run table and save it."""
    cfg = _config(ctx)
    out = _out_dir(ctx)
    X, y = read_runs(runs_path)
    if X.shape[1] != cfg.dim:
        raise DomainError(f"run table has {X.shape[1]} inputs but config bounds have {cfg.dim}")
    unit = unscale_from_bounds(X, cfg.lower, cfg.upper)
    rng = RngStream(cfg.seed).substream(_S_FIT)
    if cfg["emulator"]["kind"] == "het":
        model = fit_hetgp(unit, y, cfg.fit_config(), rng)
    else:
        model = fit_homgp(unit, y, cfg.fit_config(), rng)
    d = model_to_dict(model)
    d["input_bounds"] = {"lower": cfg.lower, "upper": cfg.upper}
    with open(out / output, "w", encoding="utf-8") as fh:
        json.dump(d, fh, indent=1)
        fh.write("\n")
    click.echo(f"wrote {out / output} ({model.kind} GP, {len(y)} runs)")


def _validate(model, bounds, validation: ReplicatedDataset, cfg: RunConfig, label=""):
    lower, upper = bounds
    unit = ReplicatedDataset(unscale_from_bounds(validation.X, lower, upper), validation.outputs)
    report = run_all(model, unit, cfg.tolerance(), cfg.diagnostics(),
                     RngStream(cfg.seed).substream(_S_DIAG), label=label)
    report.locations = validation.X
    return report


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--runs", "runs_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Replicated validation run table.")
@click.option("--output", default="report.json", show_default=True)
@click.option("--plots/--no-plots", default=False, help="Also write SVG plots.")
@click.pass_context
def validate(ctx, model_path, runs_path, output, plots):
    """Run every applicable diagnostic and write a report."""
    cfg = _config(ctx)
    out = _out_dir(ctx)
    with open(model_path, encoding="utf-8") as fh:
        md = json.load(fh)
    model = model_from_dict(md)
    b = md.get("input_bounds", {"lower": [0.0] * model.dim, "upper": [1.0] * model.dim})
    data = ingest_runs(runs_path, tol=float(cfg["ingest"]["grouping_tol"]))
    report = _validate(model, (b["lower"], b["upper"]), data, cfg, label=Path(runs_path).stem)
    write_report(report, out / output)
    click.echo(render_summary(report), nl=False)
    if plots:
        emit_plots(report, out / "plots")
    click.echo(f"wrote {out / output}")


@cli.command()
@click.argument("report_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--plots/--no-plots", default=True, help="Write SVG plots next to the summary.")
@click.pass_context
def report(ctx, report_path, plots):
    """Summarise a report file and draw its plots."""
    rep = read_report(report_path)
    text = render_summary(rep)
    click.echo(text, nl=False)
    out = _out_dir(ctx)
    (out / "summary.txt").write_text(text, encoding="utf-8")
    if plots:
        emit_plots(rep, out / "plots")


@cli.command("reproduce-paper")
@click.option("--n-mc", type=int, default=None, help="Monte Carlo size for every diagnostic.")
@click.pass_context
def reproduce_paper(ctx, n_mc):
    """Run the good, small-data and gamma toy experiments end to end."""
    from dataclasses import replace

    cfg = _config(ctx)
    out = _out_dir(ctx)
    diag = cfg.diagnostics()
    if n_mc is not None:
        diag = replace(diag, n_mc_mean=n_mc, n_mc_variance=n_mc, n_reference=n_mc)
    common = dict(tolerance=cfg.tolerance(), diagnostics=diag, r_val=5, n_val=10)
    runs = {
        "good": experiments.good_emulator(**common),
        "small_data": experiments.small_data_emulator(**common),
        "gamma": experiments.gamma_emulator(**common),
    }
    cfg.dump(out / "config.yaml")
    for name, exp in runs.items():
        sub = out / name
        sub.mkdir(parents=True, exist_ok=True)
        model, train, val, rep = exp.run(cfg.seed)
        write_runs(sub / "training_runs.csv", *train.runs())
        write_runs(sub / "validation_runs.csv", *val.runs())
        with open(sub / "model.json", "w", encoding="utf-8") as fh:
            json.dump(model_to_dict(model), fh, indent=1)
            fh.write("\n")
        write_report(rep, sub / "report.json")
        text = render_summary(rep)
        (sub / "summary.txt").write_text(text, encoding="utf-8")
        emit_plots(rep, sub / "plots")
        click.echo(text)
    click.echo(f"artifacts in {out}")


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="stochdiag", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.UsageError as exc:
        exc.show()
        return 1
    except (IngestionError, DomainError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except (NumericalError, FittingError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 3
    except StochDiagError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
