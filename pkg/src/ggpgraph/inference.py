"""Profile MLE, observed information, Laplace posterior and diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize, special, stats

from .graphstats import (
    GraphSummary,
    NoSolution,
    c_t,
    c_t_d1,
    c_t_d2,
    empirical_tau_star,
    solve_alpha_hat,
    sparsity_fit,
)
from .levy import DomainError
from .likelihood import (
    NumericError,
    Params,
    ReparamPoint,
    beta_sigma,
    exact_loglik_quad,
    inner_eps_tilde,
    int_ypow_exp,
    profile_psi,
    profile_psi_d1,
    psi_real,
    reparam_inverse,
    solve_zeta,
)

COORDS = ("sigma", "tau", "s")


class PremiseError(ValueError):
    """The data violate a premise of the estimator."""


@dataclass(frozen=True)
class FitOptions:
    sigma_lo: float = -0.9
    sigma_hi: float = 0.98
    n_grid: int = 64
    tol: float = 1e-6


@dataclass(frozen=True)
class MleFit:
    sigma_hat: float
    tau_hat: float
    s_hat: float
    eps_hat: float
    u_hat: float
    zeta_hat: float
    psi_max: float
    s_star_t: float
    converged: bool
    boundary_flags: tuple = ()

    @property
    def params(self) -> Params:
        return Params(self.sigma_hat, self.tau_hat, self.s_hat)

    @property
    def interior(self) -> bool:
        return not self.boundary_flags

    def to_dict(self) -> dict:
        return {
            "sigma_hat": self.sigma_hat,
            "tau_hat": self.tau_hat,
            "s_hat": self.s_hat,
            "s_star_t": self.s_star_t,
            "cov": None,
            "ci": {},
            "flags": list(self.boundary_flags),
        }


def s_star(sigma: float, tau: float, g: GraphSummary) -> float:
    """Plug-in scale tau^(1-sigma) sqrt(2 D*)/2 for the s coordinate."""
    return tau ** (1.0 - sigma) * math.sqrt(2.0 * g.d_star) / 2.0


def check_premises(g: GraphSummary) -> None:
    if g.n1 == g.n:
        raise NoSolution("N_{t,1} = N")
    if not g.d_star > g.n:
        raise PremiseError("need D* > N")


def fit_mle(g: GraphSummary, opts: FitOptions = FitOptions()) -> MleFit:
    """Maximize the profile Psi(sigma) and map back to (sigma, tau, s)."""
    check_premises(g)
    grid = np.linspace(opts.sigma_lo, opts.sigma_hi, opts.n_grid)
    vals = np.array([profile_psi(float(s), g) for s in grid])
    if not np.all(np.isfinite(vals)):
        raise NumericError("non-finite profile values on the coarse grid")
    i = int(np.argmax(vals))
    flags = []
    if i == 0:
        flags.append("sigma_lo_boundary")
    if i == grid.size - 1:
        flags.append("sigma_hi_boundary")
    converged = True
    if flags:
        sigma = float(grid[i])
    else:
        a, b = float(grid[i - 1]), float(grid[i + 1])
        res = optimize.minimize_scalar(
            lambda s: -profile_psi(s, g), bounds=(a, b), method="bounded", options={"xatol": opts.tol}
        )
        sigma = float(res.x)
        converged = bool(res.success)
        # polish on the stationarity equation
        h = 4.0 * opts.tol
        lo, hi = max(a, sigma - h), min(b, sigma + h)
        d_lo, d_hi = profile_psi_d1(lo, g), profile_psi_d1(hi, g)
        if d_lo > 0 > d_hi:
            sigma = float(optimize.brentq(profile_psi_d1, lo, hi, args=(g,), xtol=1e-14))
    eps, u = inner_eps_tilde(sigma, g)
    phi = reparam_inverse(ReparamPoint(sigma, eps, u, beta_sigma(sigma, g)), g)
    zeta = phi.tau / eps
    return MleFit(
        sigma_hat=sigma,
        tau_hat=phi.tau,
        s_hat=phi.s,
        eps_hat=eps,
        u_hat=u,
        zeta_hat=zeta,
        psi_max=profile_psi(sigma, g),
        s_star_t=s_star(sigma, phi.tau, g),
        converged=converged,
        boundary_flags=tuple(flags),
    )


# ---------------------------------------------------------------------------
# derivatives of Q_t in (sigma, tau, s)


def _a_partials(phi: Params, g: GraphSummary, z: float):
    """First and second partials of B = D* A(phi; z) in (sigma, tau, s, z)."""
    sig, tau, s = phi.sigma, phi.tau, phi.s
    N, D = g.n, g.d_star
    lz, lt = math.log(z), math.log(tau)
    dpsi1 = int_ypow_exp(1, sig, lz, lt)
    dpsi2 = int_ypow_exp(2, sig, lz, lt)
    psi = psi_real(sig, tau, z)
    grad = np.array([-N * lz + s * dpsi1, (z - tau) / 2.0 - s * tau ** (sig - 1.0), psi])
    hess = np.empty((3, 3))
    hess[0, 0] = s * dpsi2
    hess[1, 1] = -0.5 - s * (sig - 1.0) * tau ** (sig - 2.0)
    hess[2, 2] = 0.0
    hess[0, 1] = hess[1, 0] = -s * tau ** (sig - 1.0) * lt
    hess[0, 2] = hess[2, 0] = dpsi1
    hess[1, 2] = hess[2, 1] = -tau ** (sig - 1.0)
    cross = np.array([-N / z + s * z ** (sig - 1.0) * lz, 0.5, z ** (sig - 1.0)])
    bzz = -0.5 - (D - sig * N) / z**2 + s * (sig - 1.0) * z ** (sig - 2.0)
    return grad, hess, cross, bzz


def zeta_gradient(phi: Params, g: GraphSummary, zeta: Optional[float] = None) -> np.ndarray:
    """(d zeta/d sigma, d zeta/d tau, d zeta/d s) by implicit differentiation."""
    z = zeta if zeta is not None else solve_zeta(phi, g).zeta
    _, _, cross, bzz = _a_partials(phi, g, z)
    return -cross / bzz


def qloglik_grad(phi: Params, g: GraphSummary, zeta: Optional[float] = None) -> np.ndarray:
    """Gradient of Q_t in (sigma, tau, s); zeta enters only through the envelope."""
    z = zeta if zeta is not None else solve_zeta(phi, g).zeta
    grad, _, _, _ = _a_partials(phi, g, z)
    return np.array([c_t_d1(phi.sigma, g), 0.0, g.n / phi.s]) - grad


def qloglik_hessian(phi: Params, g: GraphSummary, zeta: Optional[float] = None) -> np.ndarray:
    """Hessian of Q_t in (sigma, tau, s)."""
    z = zeta if zeta is not None else solve_zeta(phi, g).zeta
    _, hess, cross, bzz = _a_partials(phi, g, z)
    total = hess - np.outer(cross, cross) / bzz
    out = -total
    out[0, 0] += c_t_d2(phi.sigma, g)
    out[2, 2] -= g.n / phi.s**2
    return out


def _rescale(m: np.ndarray, s_star_t: float) -> np.ndarray:
    jac = np.diag([1.0, 1.0, s_star_t])
    return jac @ m @ jac


def hessian_qloglik(fit: MleFit, g: GraphSummary) -> np.ndarray:
    """Observed information -D^2 Q_t at the fit, coordinates (sigma, tau, u = s/s*)."""
    h = qloglik_hessian(fit.params, g, fit.zeta_hat)
    m = -_rescale(h, fit.s_star_t)
    return 0.5 * (m + m.T)


def hessian_fd(fit: MleFit, g: GraphSummary, rel_step: float = 1e-3) -> np.ndarray:
    """Central finite-difference observed information in (sigma, tau, u).

    Uses a Richardson-extrapolated five-point stencil on qloglik.
    """
    from .likelihood import qloglik

    x0 = np.array([fit.sigma_hat, fit.tau_hat, fit.s_hat / fit.s_star_t])

    def q(x):
        return qloglik(Params(x[0], x[1], x[2] * fit.s_star_t), g)

    steps = rel_step * np.maximum(np.abs(x0), 0.1)
    m = np.empty((3, 3))
    f0 = q(x0)
    for i in range(3):
        for j in range(i, 3):
            def d2(hi, hj):
                ei = np.zeros(3)
                ej = np.zeros(3)
                ei[i] = hi
                ej[j] = hj
                if i == j:
                    return (-q(x0 + 2 * ei) + 16 * q(x0 + ei) - 30 * f0 + 16 * q(x0 - ei) - q(x0 - 2 * ei)) / (
                        12 * hi * hi
                    )
                return (q(x0 + ei + ej) - q(x0 + ei - ej) - q(x0 - ei + ej) + q(x0 - ei - ej)) / (4 * hi * hj)

            a1 = d2(steps[i], steps[j])
            a2 = d2(steps[i] / 2, steps[j] / 2)
            order = 4 if i == j else 2
            val = (2**order * a2 - a1) / (2**order - 1)
            m[i, j] = m[j, i] = -val
    return m


# ---------------------------------------------------------------------------
# priors and posterior


@dataclass(frozen=True)
class PriorSpec:
    """Independent priors: Gamma on 1 - sigma, Gamma on tau, half-Student on s.

    Gamma shapes and rates are (shape, rate) pairs.
    """

    one_minus_sigma: tuple = (2.0, 2.0)
    tau: tuple = (2.0, 2.0)
    s_df: float = 3.0
    s_scale: float = 1.0

    def log_density(self, phi: Params) -> float:
        a1, r1 = self.one_minus_sigma
        a2, r2 = self.tau
        lp = stats.gamma.logpdf(1.0 - phi.sigma, a1, scale=1.0 / r1)
        lp += stats.gamma.logpdf(phi.tau, a2, scale=1.0 / r2)
        lp += math.log(2.0) + stats.t.logpdf(phi.s / self.s_scale, self.s_df) - math.log(self.s_scale)
        return float(lp)

    def to_dict(self) -> dict:
        return {
            "one_minus_sigma_gamma": list(self.one_minus_sigma),
            "tau_gamma": list(self.tau),
            "s_half_student_df": self.s_df,
            "s_half_student_scale": self.s_scale,
        }


def default_prior(phi: Params) -> float:
    return PriorSpec().log_density(phi)


@dataclass(frozen=True)
class PosteriorApprox:
    mode: np.ndarray
    cov: np.ndarray
    s_star_t: float
    fit: MleFit
    prior_meta: dict = field(default_factory=dict)

    def sd(self, coord: str) -> float:
        i = COORDS.index(coord)
        sd = math.sqrt(self.cov[i, i])
        return sd * self.s_star_t if coord == "s" else sd

    def to_dict(self, level: Optional[float] = None) -> dict:
        """Fit record plus covariance; ``level`` adds equal-tailed intervals for every coordinate."""
        out = self.fit.to_dict()
        out["cov"] = self.cov.tolist()
        if level is not None:
            out["ci"] = {c: list(credible_interval(self, c, 1.0 - level)) for c in COORDS}
        out["prior"] = self.prior_meta
        return out


def laplace_posterior(
    g: GraphSummary, prior: Optional[PriorSpec] = None, fit: Optional[MleFit] = None
) -> PosteriorApprox:
    """Gaussian approximation centred at the MLE with covariance the inverse observed information.

    The prior does not enter the Gaussian; it is recorded for reference.
    """
    prior = prior or PriorSpec()
    fit = fit or fit_mle(g)
    if not fit.interior:
        raise PremiseError(f"MLE on the boundary: {fit.boundary_flags}")
    info = hessian_qloglik(fit, g)
    eig = np.linalg.eigvalsh(info)
    if not np.all(eig > 0):
        raise NumericError("observed information is not positive definite")
    cov = np.linalg.inv(info)
    cov = 0.5 * (cov + cov.T)
    mode = np.array([fit.sigma_hat, fit.tau_hat, fit.s_hat / fit.s_star_t])
    return PosteriorApprox(mode, cov, fit.s_star_t, fit, prior.to_dict())


def credible_interval(p: PosteriorApprox, coord: str, gamma: float) -> tuple[float, float]:
    """Equal-tailed interval with tail mass gamma; s is reported on its own scale."""
    if not 0 < gamma < 1:
        raise DomainError("gamma must lie in (0, 1)")
    if coord not in COORDS:
        raise DomainError(f"unknown coordinate {coord}")
    i = COORDS.index(coord)
    half = special.ndtri(1.0 - gamma / 2.0) * math.sqrt(p.cov[i, i])
    lo, hi = p.mode[i] - half, p.mode[i] + half
    if coord == "s":
        lo, hi = lo * p.s_star_t, hi * p.s_star_t
    return float(lo), float(hi)


def profile_exact_loglik(sigma: float, g: GraphSummary, prior: Optional[PriorSpec] = None) -> float:
    """max over (tau, s) of the quadrature log-likelihood plus log prior."""
    eps, u = inner_eps_tilde(sigma, g)
    start = reparam_inverse(ReparamPoint(sigma, eps, u, beta_sigma(sigma, g)), g)
    cst = c_t(sigma, g)

    def neg(x):
        phi = Params(sigma, math.exp(x[0]), math.exp(x[1]))
        val = g.n * x[1] + cst + exact_loglik_quad(phi, g, steps=1024)
        if prior is not None:
            val += prior.log_density(phi)
        return -val

    x0 = np.array([math.log(start.tau), math.log(start.s)])
    res = optimize.minimize(neg, x0, method="Nelder-Mead", options={"xatol": 1e-5, "fatol": 1e-7, "maxiter": 400})
    return float(-res.fun)


def grid_posterior_sigma(
    g: GraphSummary, prior: Optional[PriorSpec], sigma_grid: Sequence[float]
) -> np.ndarray:
    """Normalized weights on sigma_grid from the profiled quadrature log-likelihood."""
    logw = np.array([profile_exact_loglik(float(s), g, prior) for s in sigma_grid])
    w = np.exp(logw - special.logsumexp(logw))
    return w / w.sum()


# ---------------------------------------------------------------------------
# Assumption-1 diagnostics


@dataclass(frozen=True)
class Assumption1Report:
    alpha_hats: list
    tau_stars: list
    slope: float
    slope_target: float
    alpha_drift: float
    tau_drift: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "alpha_hats": self.alpha_hats,
            "tau_stars": self.tau_stars,
            "slope": self.slope,
            "slope_target": self.slope_target,
            "alpha_drift": self.alpha_drift,
            "tau_drift": self.tau_drift,
            "verdict": "PASS" if self.passed else "FAIL",
        }


def assumption1_check(
    ladder: Sequence[GraphSummary],
    tol_alpha: float = 0.05,
    tol_tau: float = 0.25,
    tol_slope: float = 0.1,
) -> Assumption1Report:
    """Heuristic check that a size ladder behaves like a sparse power-law sequence.

    tau* is evaluated with the last-rung alpha for every rung, so its drift
    measures departure from D* ~ C N^(2/(1+alpha)).
    """
    if len(ladder) < 3:
        raise ValueError("need at least 3 graphs")
    alphas = [solve_alpha_hat(g) for g in ladder]
    a_last = alphas[-1]
    taus = [empirical_tau_star(a_last, g) for g in ladder]
    slope, _ = sparsity_fit([(g.n, g.d_star) for g in ladder])
    target = 2.0 / (1.0 + a_last)
    alpha_drift = float(max(alphas) - min(alphas))
    tau_drift = float(abs(math.log(taus[-1] / taus[0])))
    passed = alpha_drift <= tol_alpha and tau_drift <= tol_tau and abs(slope - target) <= tol_slope
    return Assumption1Report(alphas, taus, slope, target, alpha_drift, tau_drift, passed)
