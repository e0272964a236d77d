"""Command-line interface: ``simulate``, ``estimate`` and ``experiment``.

Exit codes: 0 success, 1 experiment criteria failed, 2 usage error,
3 premise violation of the estimator.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .graphstats import GraphSummary, NoSolution, dense_diagnostics
from .harness import EXPERIMENTS, ExperimentConfig, default_out_dir, dumps17, run_experiment, write_report
from .inference import PremiseError, fit_mle, laplace_posterior
from .levy import DomainError, GGPParams
from .samplers import (
    dc_er_kr_theta,
    kr_constrained_d_max,
    sample_constrained_config_degrees,
    sample_dc_er,
    sample_dense_er,
    sample_ggp_graph,
    sample_hollywood,
    SimulatedGraph,
)
from .graphstats import karlin_rouault_pmf_table, summarize

MODELS = ("ggp", "hollywood", "dc-er", "dense-er", "kr-config")
DENSE_RATIO_THRESHOLD = 1.0
DENSE_LOGGED_THRESHOLD = 0.2


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


@click.group()
def main():
    """Simulate sparse multigraphs and fit the GGP model."""


@main.command()
@click.option("--model", type=click.Choice(MODELS), required=True)
@click.option("--sigma", type=float, default=0.5, show_default=True, help="GGP sigma0.")
@click.option("--tau", type=float, default=1.0, show_default=True, help="GGP tau0.")
@click.option("--t", "t", type=float, default=200.0, show_default=True, help="GGP process size.")
@click.option("--alpha", type=float, default=0.5, show_default=True, help="Hollywood or Karlin-Rouault exponent.")
@click.option("--theta", type=float, default=0.0, show_default=True, help="Hollywood concentration.")
@click.option("--edges", type=int, default=50_000, show_default=True, help="Hollywood edge count.")
@click.option("--n", type=int, default=10_000, show_default=True, help="Node count for ER and configuration models.")
@click.option("--p", type=float, default=0.01, show_default=True, help="Edge probability for ER models.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output JSON path (stdout if omitted).")
def simulate(model, sigma, tau, t, alpha, theta, edges, n, p, seed, out):
    """Draw one graph and write its degree-histogram JSON."""
    try:
        if model == "ggp":
            sg = sample_ggp_graph(GGPParams(sigma, tau, t), seed)
        elif model == "hollywood":
            sg = sample_hollywood(alpha, theta, edges, seed)
        elif model == "dc-er":
            sg = sample_dc_er(dc_er_kr_theta(n, alpha, p), p, seed)
        elif model == "dense-er":
            sg = sample_dense_er(n, p, seed)
        else:
            d_max = kr_constrained_d_max(alpha, n)
            deg = sample_constrained_config_degrees(karlin_rouault_pmf_table(alpha, d_max), d_max, n, seed)
            sg = SimulatedGraph(summarize(deg), {"model": "kr-config", "alpha": alpha, "n": n, "d_max": d_max, "seed": seed})
    except (DomainError, ValueError) as exc:
        raise click.UsageError(str(exc)) from exc
    _write(dumps17(sg.to_dict()), out)


@main.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--ci", "ci_level", type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True), default=None,
              help="Credible level, e.g. 0.95.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output JSON path (stdout if omitted).")
def estimate(input_path, ci_level, out):
    """Fit the GGP model to a histogram JSON."""
    try:
        g = GraphSummary.from_dict(json.loads(Path(input_path).read_text()))
    except (KeyError, ValueError, TypeError) as exc:
        raise click.UsageError(f"invalid summary file: {exc}") from exc
    try:
        fit = fit_mle(g)
    except (NoSolution, PremiseError) as exc:
        click.echo(f"{type(exc).__name__}: {exc}", err=True)
        sys.exit(3)
    ratio, logged = dense_diagnostics(g) if g.d_star >= 2 else (0.0, 0.0)
    flags = list(fit.boundary_flags)
    if "sigma_lo_boundary" in flags or (ratio >= DENSE_RATIO_THRESHOLD and logged >= DENSE_LOGGED_THRESHOLD):
        flags.append("dense_regime")
    if fit.interior:
        record = laplace_posterior(g, fit=fit).to_dict(ci_level)
    else:
        record = fit.to_dict()
    record["flags"] = flags
    record["diagnostics"] = {"n": g.n, "d_star": g.d_star, "density_ratio": ratio, "loggedness": logged}
    _write(dumps17(record), out)


@main.command()
@click.option("--name", type=click.Choice(EXPERIMENTS), required=True)
@click.option("--sigma", type=float, default=None, help="Override sigma0 where the experiment uses one.")
@click.option("--seeds", type=click.IntRange(min=1), default=None, help="Number of seeds (0..k-1).")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None,
              help="Report directory (default: $GGPGRAPH_OUT or ./runs).")
@click.option("--jobs", type=int, default=1, show_default=True, help="joblib worker count.")
def experiment(name, sigma, seeds, out_dir, jobs):
    """Run an experiment and write <name>.csv and <name>.json."""
    params = {} if sigma is None else {"sigma0": sigma}
    try:
        cfg = ExperimentConfig(name, params=params, seeds=tuple(range(seeds)) if seeds else (), n_jobs=jobs)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    res = run_experiment(cfg)
    csv_path, json_path = write_report(res, Path(out_dir) if out_dir else default_out_dir())
    for line in res.criteria_lines():
        click.echo(line)
    click.echo(f"wrote {csv_path} and {json_path}")
    sys.exit(0 if res.passed else 1)


if __name__ == "__main__":
    main()
