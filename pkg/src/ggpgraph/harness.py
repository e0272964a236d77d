"""Seeded experiment orchestration and report emission.

Each experiment returns per-replicate CSV rows and an aggregate record with a
pass/fail entry per checked criterion. Replicates run in parallel through
joblib; results are merged in (t, seed) order so serial and parallel runs
produce identical reports.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy import special

from .graphstats import (
    GraphSummary,
    NoSolution,
    dense_diagnostics,
    empirical_tau_star,
    karlin_rouault_pmf,
    karlin_rouault_pmf_table,
    solve_alpha_hat,
    sparsity_fit,
    summarize,
)
from .inference import (
    PriorSpec,
    assumption1_check,
    credible_interval,
    fit_mle,
    hessian_fd,
    hessian_qloglik,
    laplace_posterior,
    grid_posterior_sigma,
)
from .levy import GGPParams, ggp_theoretical_tau_star
from .likelihood import LOG2_HALF, Params, _saddle_poly, dA_dz, profile_psi, saddle_gap, solve_zeta
from .samplers import (
    kr_constrained_d_max,
    make_rng,
    sample_constrained_config_degrees,
    sample_dense_er,
    sample_ggp_graph,
    sample_hollywood,
    sample_unconstrained_kr_config,
)

OUT_ENV = "GGPGRAPH_OUT"
EXPERIMENTS = ("wellspecified", "sparsity", "hollywood", "saddlepoint", "bvm", "dense", "alphahat")
CSV_COLUMNS = ("seed", "t", "N", "D*", "sigma_hat", "tau_hat", "s_hat", "alpha_hat", "tau_star_emp", "flags")


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "runs"))


@dataclass
class ExperimentConfig:
    name: str
    params: dict = field(default_factory=dict)
    ladder: Sequence[float] = ()
    seeds: Sequence[int] = ()
    out_dir: Optional[Path] = None
    tolerances: dict = field(default_factory=dict)
    n_jobs: int = 1

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.name!r}")
        if self.ladder is not None and len(self.ladder) == 0:
            self.ladder = DEFAULTS[self.name]["ladder"]
        if len(self.seeds) == 0:
            self.seeds = DEFAULTS[self.name]["seeds"]
        merged = dict(DEFAULTS[self.name]["params"])
        merged.update(self.params)
        self.params = merged
        tol = dict(DEFAULTS[self.name]["tolerances"])
        tol.update(self.tolerances)
        self.tolerances = tol
        if any(v <= 0 for v in self.tolerances.values()):
            raise ValueError("tolerances must be positive")


DEFAULTS = {
    "wellspecified": {
        "params": {"sigma0": 0.5, "tau0": 1.0},
        "ladder": (200, 500, 800),
        "seeds": tuple(range(20)),
        "tolerances": {"sigma": 0.05, "s_rel": 0.1, "tau": 0.3},
    },
    "sparsity": {
        "params": {"sigmas": (0.3, 0.5), "tau0": 1.0, "ladder_seeds": 3, "tau_star_t": 800},
        "ladder": (100, 200, 400, 800),
        "seeds": tuple(range(20)),
        "tolerances": {"slope": 0.1, "tau_star_rel": 0.25, "tau_star_theory": 1e-10},
    },
    "hollywood": {
        "params": {"alpha": 0.5, "theta_h": 0.0},
        "ladder": (5_000, 20_000, 80_000, 320_000),
        "seeds": (0,),
        "tolerances": {"slope": 0.15},
    },
    "saddlepoint": {
        "params": {
            "graphs": ((0.3, 0.5), (0.3, 1.0), (0.5, 1.0), (0.7, 0.5), (0.7, 1.0)),
            "d_target": 3e4,
            "K": 2.0,
            "n_random": 1000,
            "n_scan": 100,
        },
        "ladder": None,
        "seeds": (0,),
        "tolerances": {"gap": 0.05, "residual": 1e-10},
    },
    "bvm": {
        "params": {"sigma0": 0.5, "tau0": 1.0, "grid_t": 300, "coverage_t": 500, "n_hessian": 5},
        "ladder": (200, 400, 800),
        "seeds": tuple(range(50)),
        "tolerances": {"hessian_rel": 1e-4, "cdf": 0.1, "sd_exp": 0.15, "coverage": 0.8},
    },
    "dense": {
        "params": {"p": 0.5, "c": 0.1, "ratio_threshold": 1.0, "logged_threshold": 0.2},
        "ladder": (100, 200, 400),
        "seeds": (0,),
        "tolerances": {"sigma": 0.05},
    },
    "alphahat": {
        "params": {"sigma0": 0.5, "tau0": 1.0, "t": 400, "alpha": 0.6, "n_kr": 100_000},
        "ladder": (12_500, 25_000, 50_000, 100_000),
        "seeds": tuple(range(20)),
        "tolerances": {"j1": 0.03, "j23": 0.02, "alpha": 0.02},
    },
}


@dataclass
class ExperimentResult:
    name: str
    rows: list
    aggregate: dict

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.aggregate["criteria"].values())

    def criteria_lines(self) -> list[str]:
        lines = []
        for key, c in self.aggregate["criteria"].items():
            verdict = "PASS" if c["passed"] else "FAIL"
            lines.append(f"{self.name}/{key}: {verdict} ({c['detail']})")
        return lines


def _criterion(passed: bool, detail: str, **values) -> dict:
    return {"passed": bool(passed), "detail": detail, **values}


def _row(seed, t, g: Optional[GraphSummary] = None, fit=None, flags=()) -> dict:
    row = {k: "" for k in CSV_COLUMNS}
    row["seed"] = seed
    row["t"] = t
    if g is not None:
        row["N"] = g.n
        row["D*"] = g.d_star
        try:
            a = solve_alpha_hat(g)
            row["alpha_hat"] = a
            row["tau_star_emp"] = empirical_tau_star(a, g)
        except NoSolution:
            pass
    if fit is not None:
        row["sigma_hat"] = fit.sigma_hat
        row["tau_hat"] = fit.tau_hat
        row["s_hat"] = fit.s_hat
        flags = tuple(flags) + tuple(fit.boundary_flags)
    row["flags"] = ";".join(flags)
    return row


def _parallel(fn: Callable, tasks: Sequence, n_jobs: int) -> list:
    if n_jobs == 1:
        return [fn(*task) for task in tasks]
    return Parallel(n_jobs=n_jobs)(delayed(fn)(*task) for task in tasks)


def _sort_rows(rows: list) -> list:
    return sorted(rows, key=lambda r: (float(r["t"]), int(r["seed"])))


# ---------------------------------------------------------------------------
# well-specified consistency


def _ggp_fit_task(sigma0, tau0, t, seed):
    g = sample_ggp_graph(GGPParams(sigma0, tau0, t), seed).summary
    fit = fit_mle(g)
    return _row(seed, t, g, fit)


def run_wellspecified(cfg: ExperimentConfig) -> ExperimentResult:
    s0, tau0 = cfg.params["sigma0"], cfg.params["tau0"]
    tasks = [(s0, tau0, t, seed) for t in cfg.ladder for seed in cfg.seeds]
    rows = _sort_rows(_parallel(_ggp_fit_task, tasks, cfg.n_jobs))
    med = {}
    for t in cfg.ladder:
        sub = [r for r in rows if r["t"] == t]
        med[t] = {
            "sigma": float(np.median([abs(r["sigma_hat"] - s0) for r in sub])),
            "s_rel": float(np.median([abs(r["s_hat"] / t - 1.0) for r in sub])),
            "tau": float(np.median([abs(r["tau_hat"] - tau0) for r in sub])),
        }
    tol = cfg.tolerances
    crit = {}
    t_mid = 500 if 500 in med else cfg.ladder[len(cfg.ladder) // 2]
    m = med[t_mid]
    ok = m["sigma"] <= tol["sigma"] and m["s_rel"] <= tol["s_rel"] and m["tau"] <= tol["tau"]
    crit["medians"] = _criterion(
        ok,
        f"t={t_mid}: |sigma-s0|={m['sigma']:.4f}, |s/t-1|={m['s_rel']:.4f}, |tau-tau0|={m['tau']:.4f}",
    )
    lo, hi = min(cfg.ladder), max(cfg.ladder)
    dec = all(med[hi][k] < med[lo][k] for k in ("sigma", "s_rel", "tau"))
    crit["rate_ordering"] = _criterion(
        dec, "; ".join(f"{k}: {med[lo][k]:.4f} -> {med[hi][k]:.4f}" for k in ("sigma", "s_rel", "tau"))
    )
    agg = {"medians": {str(k): v for k, v in med.items()}, "criteria": crit}
    return ExperimentResult("wellspecified", rows, agg)


# ---------------------------------------------------------------------------
# sparsity exponent and tau* calibration


def _ggp_graph_task(sigma0, tau0, t, seed):
    return sample_ggp_graph(GGPParams(sigma0, tau0, t), seed).summary


def _hollywood_task(alpha, theta_h, m_edges, seed):
    return sample_hollywood(alpha, theta_h, m_edges, seed).summary


def _ggp_summary_task(sigma0, tau0, t, seed):
    g = sample_ggp_graph(GGPParams(sigma0, tau0, t), seed).summary
    return _row(seed, t, g)


def run_sparsity(cfg: ExperimentConfig) -> ExperimentResult:
    tau0 = cfg.params["tau0"]
    sigmas = cfg.params["sigmas"]
    if "sigma0" in cfg.params:
        sigmas = (cfg.params["sigma0"],)
    n_ladder = cfg.params["ladder_seeds"]
    tol = cfg.tolerances
    rows, crit, agg = [], {}, {"slopes": {}}
    for s0 in sigmas:
        tasks = [(s0, tau0, t, seed) for t in cfg.ladder for seed in range(n_ladder)]
        sub = _sort_rows(_parallel(_ggp_summary_task, tasks, cfg.n_jobs))
        for r in sub:
            r["flags"] = f"sigma0={s0}"
        rows += sub
        slope, _ = sparsity_fit([(r["N"], r["D*"]) for r in sub])
        target = 2.0 / (1.0 + s0)
        agg["slopes"][str(s0)] = slope
        crit[f"slope_sigma0={s0}"] = _criterion(
            abs(slope - target) <= tol["slope"], f"slope={slope:.4f}, target={target:.4f}"
        )
    # theoretical tau* is tau0 on a grid
    grid_err = max(
        abs(ggp_theoretical_tau_star(s, t0) - t0) / t0
        for s in np.linspace(0.05, 0.95, 10)
        for t0 in np.geomspace(0.2, 5.0, 10)
    )
    crit["tau_star_theory"] = _criterion(grid_err <= tol["tau_star_theory"], f"max rel err={grid_err:.2e}")
    # empirical tau* at the top rung
    s0 = cfg.params.get("sigma0", 0.5)
    t_top = cfg.params["tau_star_t"]
    tasks = [(s0, tau0, t_top, seed) for seed in cfg.seeds]
    top = _sort_rows(_parallel(_ggp_summary_task, tasks, cfg.n_jobs))
    for r in top:
        r["flags"] = f"sigma0={s0};tau_star"
    rows += top
    emp_true = [
        math.sqrt(2 * r["D*"]) * (s0 * r["N"] / r["D*"]) ** (1.0 / (1.0 - s0)) for r in top
    ]
    med_true = float(np.median(emp_true))
    med_hat = float(np.median([r["tau_star_emp"] for r in top]))
    agg["tau_star_median_sigma0"] = med_true
    agg["tau_star_median_alpha_hat"] = med_hat
    crit["tau_star_empirical"] = _criterion(
        abs(med_true / tau0 - 1) <= tol["tau_star_rel"],
        f"median at t={t_top} with alpha=sigma0: {med_true:.4f}; with alpha=alpha_hat: {med_hat:.4f}",
    )
    agg["criteria"] = crit
    return ExperimentResult("sparsity", rows, agg)


# ---------------------------------------------------------------------------
# degree law and Karlin-Rouault estimator


def _kr_constrained_summary(alpha, n, seed):
    d_max = kr_constrained_d_max(alpha, n)
    pmf = karlin_rouault_pmf_table(alpha, d_max)
    return summarize(sample_constrained_config_degrees(pmf, d_max, n, seed))


def run_alphahat(cfg: ExperimentConfig) -> ExperimentResult:
    s0, tau0, t = cfg.params["sigma0"], cfg.params["tau0"], cfg.params["t"]
    tol = cfg.tolerances
    graphs = _parallel(_ggp_graph_task, [(s0, tau0, t, s) for s in cfg.seeds], cfg.n_jobs)
    rows = [_row(seed, t, g) for seed, g in zip(cfg.seeds, graphs)]
    crit, agg = {}, {}
    for j, key in ((1, "j1"), (2, "j23"), (3, "j23")):
        target = karlin_rouault_pmf(s0, j)
        err = float(np.mean([abs(g.count(j) / g.n - target) for g in graphs]))
        agg[f"degree_{j}_mean_abs_err"] = err
        crit[f"degree_law_j={j}"] = _criterion(err <= tol[key], f"mean |N_j/N - p_j| = {err:.4f}, p_j = {target:.4f}")
    alpha = cfg.params["alpha"]
    ladder = [int(n) for n in cfg.ladder]
    kr = [_kr_constrained_summary(alpha, n, 0) for n in ladder]
    for n, g in zip(ladder, kr):
        rows.append(_row(0, n, g, flags=("kr_constrained",)))
    a_top = solve_alpha_hat(kr[-1])
    crit["kr_constrained_alpha"] = _criterion(
        abs(a_top - alpha) <= tol["alpha"], f"alpha_hat={a_top:.4f} at n={ladder[-1]}, alpha={alpha}"
    )
    rep = assumption1_check(kr)
    crit["kr_constrained_trend"] = _criterion(rep.passed, f"assumption check {rep.to_dict()['verdict']}")
    unc = [summarize(sample_unconstrained_kr_config(alpha, n, 0)) for n in ladder]
    for n, g in zip(ladder, unc):
        rows.append(_row(0, n, g, flags=("kr_unconstrained",)))
    rep_u = assumption1_check(unc)
    crit["kr_unconstrained_trend_fails"] = _criterion(
        not rep_u.passed, f"assumption check {rep_u.to_dict()['verdict']}, slope={rep_u.slope:.3f}"
    )
    agg["kr_constrained"] = rep.to_dict()
    agg["kr_unconstrained"] = rep_u.to_dict()
    agg["criteria"] = crit
    return ExperimentResult("alphahat", _sort_rows(rows), agg)


# ---------------------------------------------------------------------------
# Hollywood misspecification


def run_hollywood(cfg: ExperimentConfig) -> ExperimentResult:
    alpha, theta = cfg.params["alpha"], cfg.params["theta_h"]
    seed = cfg.seeds[0]
    tasks = [(alpha, theta, int(m), seed) for m in cfg.ladder]
    graphs = _parallel(_hollywood_task, tasks, cfg.n_jobs)
    rows = [_row(seed, m, g, flags=("hollywood",)) for m, g in zip(cfg.ladder, graphs)]
    slope, _ = sparsity_fit([(g.n, g.d_star) for g in graphs])
    rep = assumption1_check(graphs)
    crit = {
        "slope": _criterion(abs(slope - 1.0 / alpha) <= cfg.tolerances["slope"], f"slope={slope:.4f}, target={1/alpha}"),
        "assumption_fails": _criterion(not rep.passed, f"assumption check {rep.to_dict()['verdict']}"),
    }
    return ExperimentResult("hollywood", rows, {"slope": slope, "assumption1": rep.to_dict(), "criteria": crit})


# ---------------------------------------------------------------------------
# saddlepoint sharpness and saddle equation


def saddle_graph(sigma0: float, tau0: float, d_target: float, seed: int = 0, max_tries: int = 50) -> GraphSummary:
    """GGP graph whose D* falls in [1e4, 1e5], with t sized from E[D*] ~ 2 t^2 tau^(2 sigma - 2)."""
    t = math.sqrt(d_target / (2.0 * tau0 ** (2.0 * sigma0 - 2.0)))
    for k in range(max_tries):
        g = sample_ggp_graph(GGPParams(sigma0, tau0, t), seed + k).summary
        if 1e4 <= g.d_star <= 1e5:
            return g
    raise RuntimeError("could not draw a graph with D* in [1e4, 1e5]")


def s_k_grid(g: GraphSummary, K: float = 2.0):
    """5x5x5 grid in S_K: sigma in [-0.5, 0.9], tau in [1/K, K], s up to K sqrt(2 D*)."""
    sig = np.linspace(-0.5, 0.9, 5)
    tau = np.geomspace(1.0 / K, K, 5)
    s = K * math.sqrt(2.0 * g.d_star) * np.array([1 / 16, 1 / 8, 1 / 4, 1 / 2, 1.0])
    return [Params(float(a), float(b), float(c)) for a in sig for b in tau for c in s]


def random_params(rng: np.random.Generator, g: GraphSummary, n: int) -> list:
    out = []
    for _ in range(n):
        out.append(
            Params(
                float(rng.uniform(-2.0, 0.99)),
                float(np.exp(rng.uniform(math.log(0.01), math.log(100.0)))),
                float(np.exp(rng.uniform(math.log(1e-3), math.log(10.0 * math.sqrt(2 * g.d_star))))),
            )
        )
    return out


def sign_changes_on_grid(phi: Params, g: GraphSummary, z_max: float, n: int = 20_000) -> int:
    z = np.geomspace(1e-6, z_max, n)
    sgn = np.sign(dA_dz(phi, g, z))
    return int(np.sum(sgn[1:] != sgn[:-1]))


def run_saddlepoint(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    tol = cfg.tolerances
    seed = cfg.seeds[0]
    rows, gaps_all = [], []
    upper_ok = True
    per_graph = {}
    graphs = []
    for s0, t0 in p["graphs"]:
        g = saddle_graph(s0, t0, p["d_target"], seed)
        graphs.append(g)
        gaps = np.array([saddle_gap(phi, g) for phi in s_k_grid(g, p["K"])])
        upper_ok &= bool(np.all(gaps <= LOG2_HALF))
        gaps_all.append(gaps)
        per_graph[f"{s0},{t0}"] = {"d_star": g.d_star, "max_abs_gap": float(np.max(np.abs(gaps)))}
        rows.append(_row(seed, f"{s0},{t0}", g, flags=("saddlepoint",)))
    max_gap = float(max(np.max(np.abs(x)) for x in gaps_all))
    crit = {
        "gap": _criterion(max_gap <= tol["gap"], f"max |saddle gap| = {max_gap:.4f} over {sum(x.size for x in gaps_all)} points"),
        "upper_bound": _criterion(upper_ok, "log I + D* A(zeta) <= 0 at every grid point"),
    }
    # saddle equation on random parameters
    rng = make_rng(seed, "saddle_params")
    g = graphs[0]
    phis = random_params(rng, g, p["n_random"])
    worst, above = 0.0, True
    unique = True
    for k, phi in enumerate(phis):
        sr = solve_zeta(phi, g)
        worst = max(worst, abs(_saddle_poly(phi, g, sr.zeta)) / sr.zeta**2)
        above &= sr.zeta > phi.tau
        if k < p["n_scan"]:
            unique &= sign_changes_on_grid(phi, g, 10.0 * sr.zeta) == 1
    crit["zeta_residual"] = _criterion(
        worst <= tol["residual"] and above, f"max rel residual={worst:.2e}, zeta>tau for all={above}"
    )
    crit["zeta_unique"] = _criterion(unique, f"single sign change of dA/dz for {p['n_scan']} parameters")
    agg = {"graphs": per_graph, "max_abs_gap": max_gap, "criteria": crit}
    return ExperimentResult("saddlepoint", rows, agg)


# ---------------------------------------------------------------------------
# Hessian, Laplace approximation, coverage


def _coverage_task(s0, tau0, t, seed, gamma):
    g = sample_ggp_graph(GGPParams(s0, tau0, t), seed).summary
    fit = fit_mle(g)
    row = _row(seed, t, g, fit)
    if fit.interior:
        post = laplace_posterior(g, fit=fit)
        lo, hi = credible_interval(post, "sigma", gamma)
        row["flags"] = ";".join(filter(None, [row["flags"], "covered" if lo <= s0 <= hi else "missed"]))
    return row


def sup_cdf_distance(grid: np.ndarray, weights: np.ndarray, mean: float, sd: float) -> float:
    """sup |F_grid - F_gauss| with the grid mass spread uniformly over cells."""
    edges = np.concatenate(([grid[0] - 0.5 * (grid[1] - grid[0])], 0.5 * (grid[1:] + grid[:-1]), [grid[-1] + 0.5 * (grid[-1] - grid[-2])]))
    f_grid = np.concatenate(([0.0], np.cumsum(weights)))
    f_gauss = special.ndtr((edges - mean) / sd)
    return float(np.max(np.abs(f_grid - f_gauss)))


def run_bvm(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    s0, tau0 = p["sigma0"], p["tau0"]
    tol = cfg.tolerances
    rows, crit, agg = [], {}, {}
    # analytic vs finite-difference observed information
    worst, spd = 0.0, True
    for seed in range(p["n_hessian"]):
        g = sample_ggp_graph(GGPParams(s0, tau0, 300 + 100 * seed), seed).summary
        fit = fit_mle(g)
        a = hessian_qloglik(fit, g)
        f = hessian_fd(fit, g)
        worst = max(worst, float(np.max(np.abs(a - f) / np.abs(f))))
        spd &= bool(np.all(np.linalg.eigvalsh(a) > 0)) and np.allclose(a, a.T, rtol=0, atol=1e-9 * np.linalg.norm(a))
    crit["hessian_fd"] = _criterion(worst <= tol["hessian_rel"], f"max entrywise rel diff = {worst:.2e}")
    crit["hessian_spd"] = _criterion(spd, "symmetric positive definite at all interior fits")
    # Laplace marginal vs grid posterior
    g = sample_ggp_graph(GGPParams(s0, tau0, p["grid_t"]), 0).summary
    fit = fit_mle(g)
    post = laplace_posterior(g, fit=fit)
    sd = post.sd("sigma")
    grid = fit.sigma_hat + sd * np.linspace(-5, 5, 41)
    w = grid_posterior_sigma(g, PriorSpec(), grid)
    dist = sup_cdf_distance(grid, w, fit.sigma_hat, sd)
    agg["grid_cdf_distance"] = dist
    crit["laplace_vs_grid"] = _criterion(dist <= tol["cdf"], f"sup CDF distance = {dist:.4f} at t={p['grid_t']}")
    # sd scaling along the ladder
    sds = []
    for t in cfg.ladder:
        gt = sample_ggp_graph(GGPParams(s0, tau0, t), 0).summary
        pt = laplace_posterior(gt)
        info_ss = float(np.linalg.inv(pt.cov)[0, 0])
        sds.append((gt.n, gt.d_star, pt.sd("sigma"), pt.sd("tau"), pt.s_star_t, info_ss, pt.fit.sigma_hat))
        rows.append(_row(0, t, gt, pt.fit, flags=("sd_ladder",)))
    arr = np.array(sds)
    e_tau = float(np.polyfit(np.log(arr[:, 1]), np.log(arr[:, 3]), 1)[0])
    e_sig = float(np.polyfit(np.log(arr[:, 0]), np.log(arr[:, 2]), 1)[0])
    # reported only: the upper bound carries an extra log^2 D* factor
    agg["info_exponent_sigma_vs_s_star"] = float(np.polyfit(np.log(arr[:, 4]), np.log(arr[:, 5]), 1)[0])
    agg["info_exponent_target"] = 1.0 + float(np.mean(arr[:, 6]))
    agg["sd_exponent_tau_vs_dstar"] = e_tau
    agg["sd_exponent_sigma_vs_n"] = e_sig
    crit["sd_exponents"] = _criterion(
        abs(e_tau + 0.25) <= tol["sd_exp"] and abs(e_sig + 0.5) <= tol["sd_exp"],
        f"tau-sd ~ D*^{e_tau:.3f}, sigma-sd ~ N^{e_sig:.3f}",
    )
    # coverage of the 95% sigma interval
    tasks = [(s0, tau0, p["coverage_t"], seed, 0.05) for seed in cfg.seeds]
    cov_rows = _sort_rows(_parallel(_coverage_task, tasks, cfg.n_jobs))
    rows += cov_rows
    hits = sum("covered" in r["flags"].split(";") for r in cov_rows)
    rate = hits / len(cov_rows)
    agg["coverage"] = rate
    crit["coverage"] = _criterion(rate >= tol["coverage"], f"95% sigma-interval coverage = {rate:.3f} over {len(cov_rows)} seeds")
    agg["criteria"] = crit
    return ExperimentResult("bvm", _sort_rows(rows), agg)


# ---------------------------------------------------------------------------
# dense regime


def run_dense(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    seed = cfg.seeds[0]
    rows, sig_ok, diag_ok = [], True, True
    drops, details = [], []
    for n in cfg.ladder:
        g = sample_dense_er(int(n), p["p"], seed).summary
        fit = fit_mle(g)
        ratio, logged = dense_diagnostics(g, p["c"])
        sig_ok &= fit.sigma_hat <= cfg.tolerances["sigma"] or "sigma_lo_boundary" in fit.boundary_flags
        diag_ok &= ratio >= p["ratio_threshold"] and logged >= p["logged_threshold"]
        # profile drop from sigma = 0 to the optimum, per node
        drops.append((fit.psi_max - profile_psi(0.0, g)) / g.n)
        details.append(f"n={n}: sigma_hat={fit.sigma_hat:.3f}, ratio={ratio:.3f}, logged={logged:.3f}")
        rows.append(_row(seed, n, g, fit, flags=("dense_er",)))
    trend = bool(np.all(np.diff(drops) > 0))
    crit = {
        "sigma_nonpositive": _criterion(sig_ok and trend, "; ".join(details) + f"; profile drop per node {np.round(drops, 4).tolist()}"),
        "diagnostics": _criterion(
            diag_ok, f"thresholds ratio>={p['ratio_threshold']}, logged>={p['logged_threshold']}; " + "; ".join(details)
        ),
    }
    return ExperimentResult("dense", rows, {"profile_drop_per_node": drops, "criteria": crit})


RUNNERS = {
    "wellspecified": run_wellspecified,
    "sparsity": run_sparsity,
    "hollywood": run_hollywood,
    "saddlepoint": run_saddlepoint,
    "bvm": run_bvm,
    "dense": run_dense,
    "alphahat": run_alphahat,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    res = RUNNERS[cfg.name](cfg)
    res.aggregate["name"] = cfg.name
    res.aggregate["passed"] = res.passed
    return res


# ---------------------------------------------------------------------------
# serialization


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return "null"
        return format(x, ".17g")
    if x is None:
        return "null"
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{_fmt(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x)}")


def dumps17(obj) -> str:
    """JSON text with every float printed at 17 significant digits."""
    return _fmt(obj) + "\n"


def write_report(res: ExperimentResult, out_dir: Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{res.name}.csv"
    json_path = out_dir / f"{res.name}.json"
    with open(csv_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for r in res.rows:
            w.writerow({k: (format(v, ".17g") if isinstance(v, float) else v) for k, v in r.items()})
    json_path.write_text(dumps17(res.aggregate))
    return csv_path, json_path
