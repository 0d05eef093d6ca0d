"""Command-line pipeline: simulation, panel generation, estimation, tables."""

from __future__ import annotations

import json
import os
import sys
import tempfile
from pathlib import Path

import click
import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from . import broadband as bb
from . import causal, config as cfgmod, dgp, ppml
from .exceptions import (
    ConfigError,
    ConvergenceError,
    DataError,
    TeleparityError,
)
from .market import regime_sweep

EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_DATA = 4


def atomic_write_csv(frame: pd.DataFrame, path: Path, **kwargs) -> None:
    """Write CSV via a temp file and rename, so targets are never partial."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            frame.to_csv(fh, index=False, **kwargs)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(text: str, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(summary: dict) -> None:
    click.echo(json.dumps(summary, sort_keys=True))


def _fail(code: int, kind: str, exc: Exception) -> None:
    click.echo(json.dumps({"error": kind, "message": str(exc)}), err=True)
    sys.exit(code)


def _guarded(fn):
    """Map domain exceptions to the documented exit codes."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            _fail(EXIT_CONFIG, "config", exc)
        except ConvergenceError as exc:
            _fail(EXIT_CONVERGENCE, "convergence", exc)
        except DataError as exc:
            _fail(EXIT_DATA, "data", exc)
        except TeleparityError as exc:
            _fail(EXIT_CONFIG, "domain", exc)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _parse_levels(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"invalid --levels value {text!r}") from exc


config_opt = click.option(
    "--config", "config_path", required=True, type=click.Path(), help="YAML run config."
)
seed_opt = click.option("--seed", type=int, default=None, help="Override the RNG seed.")
out_opt = click.option(
    "--out", "out_dir", required=True, type=click.Path(), help="Output directory."
)


@click.group()
def main() -> None:
    """Telehealth regulation toolkit: equilibrium model and estimation pipeline."""


@main.command("simulate-equilibrium")
@config_opt
@out_opt
@_guarded
def simulate_equilibrium(config_path: str, out_dir: str) -> None:
    """Sweep policy regimes across broadband levels and tabulate shifts."""
    cfg = cfgmod.load_config(config_path)
    prim = cfgmod.build_market(cfg)
    regimes = cfgmod.build_regimes(cfg)
    levels = tuple(cfg.get("broadband_levels", [0.0, 1.0, 2.0]))
    table = regime_sweep(prim, regimes, levels)
    out = Path(out_dir) / "equilibrium_sweep.csv"
    atomic_write_csv(table, out)
    _emit(
        {
            "mode": "simulate-equilibrium",
            "rows": len(table),
            "regimes": sorted(regimes),
            "output": str(out),
        }
    )


@main.command("generate-panel")
@config_opt
@seed_opt
@out_opt
@_guarded
def generate_panel(config_path: str, seed: int | None, out_dir: str) -> None:
    """Generate a synthetic panel with known true coefficients."""
    cfg = cfgmod.load_config(config_path)
    panel_cfg = cfgmod.build_panel_config(cfg, seed)
    params = cfgmod.build_true_parameters(cfg)
    panel = dgp.generate_panel(params, panel_cfg)
    out = Path(out_dir) / "panel.csv"
    atomic_write_csv(panel, out, float_format=dgp.PANEL_FLOAT_FORMAT)
    _emit(
        {
            "mode": "generate-panel",
            "rows": len(panel),
            "seed": panel_cfg.seed,
            "output": str(out),
        }
    )


def _fit_panel(cfg: dict, panel: pd.DataFrame):
    types, controls, include_triple = cfgmod.model_options(cfg)
    design, names = causal.build_design(panel, types, include_triple, controls)
    spec = cfgmod.build_model_spec(cfg, names)
    result = ppml.fit(design, spec)
    if not result.converged:
        raise ConvergenceError(
            "fit did not converge", diagnostics={"iterations": result.iterations}
        )
    return result, types


def _coef_frame(result: ppml.FitResult) -> pd.DataFrame:
    ses = np.sqrt(np.diag(result.vcov_cluster))
    return pd.DataFrame(
        {
            "regressor": result.names,
            "coefficient": result.coefficients,
            "std_error": ses,
        }
    )


@main.command("fit")
@config_opt
@click.option("--panel", "panel_path", required=True, type=click.Path(),
              help="Panel CSV produced by generate-panel or the assembler.")
@out_opt
@_guarded
def fit_cmd(config_path: str, panel_path: str, out_dir: str) -> None:
    """Fit the fixed-effects Poisson model on a panel file."""
    cfg = cfgmod.load_config(config_path)
    panel = dgp.read_panel(panel_path)
    result, _ = _fit_panel(cfg, panel)
    out = Path(out_dir) / "coefficients.csv"
    atomic_write_csv(_coef_frame(result), out, float_format="%.17g")
    _emit(
        {
            "mode": "fit",
            "converged": result.converged,
            "iterations": result.iterations,
            "n_obs": result.n_obs,
            "deviance": result.deviance,
            "dropped_separated": result.n_dropped_separated,
            "dropped_collinear": result.n_dropped_collinear,
            "output": str(out),
        }
    )


@main.command("analyze")
@config_opt
@click.option("--panel", "panel_path", required=True, type=click.Path())
@click.option("--levels", default="0,1,2,4,8,12", show_default=True,
              help="Comma-separated broadband levels for the ATT table.")
@out_opt
@_guarded
def analyze(config_path: str, panel_path: str, levels: str, out_dir: str) -> None:
    """Fit and convert coefficients into treatment-effect tables."""
    cfg = cfgmod.load_config(config_path)
    panel = dgp.read_panel(panel_path)
    result, types = _fit_panel(cfg, panel)
    level_values = _parse_levels(levels)
    frames = []
    gaps = {}
    for k in types:
        summary = causal.att_table(result, k, level_values)
        frames.append(summary.to_frame())
        gaps[k] = summary.taylor_gap
    table = pd.concat(frames, ignore_index=True)
    out = Path(out_dir) / "att_table.csv"
    atomic_write_csv(table, out, float_format="%.10g")
    _emit(
        {
            "mode": "analyze",
            "levels": list(level_values),
            "policy_types": list(types),
            "taylor_gap": gaps,
            "output": str(out),
        }
    )


@main.command("ingest-broadband")
@click.argument("input_file", type=click.Path(exists=True))
@click.option("--transform", default="zscore", show_default=True,
              type=click.Choice(bb.TRANSFORMS))
@click.option("--per-year", is_flag=True, default=False,
              help="Standardize within each year instead of pooled.")
@out_opt
@_guarded
def ingest_broadband(input_file: str, transform: str, per_year: bool, out_dir: str) -> None:
    """Weight tier rates by households and write the broadband column."""
    try:
        raw = pd.read_csv(input_file)
    except (OSError, pd.errors.ParserError) as exc:
        raise DataError(f"cannot read broadband file: {exc}") from exc
    column, meta = bb.ingest_broadband(raw, transform, per_year)
    out = Path(out_dir) / "broadband.csv"
    atomic_write_csv(column, out, float_format="%.17g")
    meta_out = Path(out_dir) / "broadband_meta.json"
    atomic_write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n", meta_out)
    _emit(
        {
            "mode": "ingest-broadband",
            "rows": len(column),
            "transform": transform,
            "output": str(out),
            "metadata": str(meta_out),
        }
    )


def _montecarlo_rep(cfg: dict, base_seed: int, rep: int) -> dict:
    panel_cfg = cfgmod.build_panel_config(cfg, None)
    rep_seed = int(
        np.random.SeedSequence([base_seed, rep]).generate_state(1, np.uint32)[0]
    )
    panel_cfg = cfgmod.build_panel_config(cfg, rep_seed)
    params = cfgmod.build_true_parameters(cfg)
    panel = dgp.generate_panel(params, panel_cfg)
    result, types = _fit_panel(cfg, panel)
    row: dict = {"rep": rep, "seed": rep_seed}
    for k in types:
        b2_true = params.beta2.get(k, 0.0)
        b1_true = params.beta1.get(k, 0.0)
        name2, name1 = f"{k}_post", f"{k}_post_bb"
        if name2 in result.names:
            est, se = result.coef(name2), result.se(name2)
            row[f"{k}_beta2_hat"] = est
            row[f"{k}_beta2_se"] = se
            row[f"{k}_beta2_cover"] = int(abs(est - b2_true) <= causal.Z95 * se)
        if name1 in result.names:
            est, se = result.coef(name1), result.se(name1)
            row[f"{k}_beta1_hat"] = est
            row[f"{k}_beta1_se"] = se
            row[f"{k}_beta1_cover"] = int(abs(est - b1_true) <= causal.Z95 * se)
    return row


@main.command("montecarlo")
@config_opt
@seed_opt
@click.option("--reps", default=None, type=int, help="Override replication count.")
@click.option("--workers", default=None, type=int, help="Worker processes.")
@out_opt
@_guarded
def montecarlo(config_path: str, seed: int | None, reps: int | None,
               workers: int | None, out_dir: str) -> None:
    """Repeated generate-and-fit study of estimator bias and coverage."""
    cfg = cfgmod.load_config(config_path)
    mc = cfg.get("montecarlo", {})
    n_reps = reps if reps is not None else int(mc.get("reps", 100))
    n_workers = workers if workers is not None else int(mc.get("workers", 1))
    base_seed = seed if seed is not None else int(mc.get("seed", 0))
    if n_reps < 1:
        raise ConfigError("montecarlo reps must be >= 1")
    rows = Parallel(n_jobs=n_workers)(
        delayed(_montecarlo_rep)(cfg, base_seed, rep) for rep in range(n_reps)
    )
    table = pd.DataFrame(sorted(rows, key=lambda r: r["rep"]))
    out = Path(out_dir) / "montecarlo.csv"
    atomic_write_csv(table, out, float_format="%.17g")
    summary = {"mode": "montecarlo", "reps": n_reps, "seed": base_seed, "output": str(out)}
    for col in table.columns:
        if col.endswith("_hat"):
            summary[f"{col}_mean"] = float(table[col].mean())
        if col.endswith("_cover"):
            summary[f"{col}_rate"] = float(table[col].mean())
    _emit(summary)


if __name__ == "__main__":
    main()
