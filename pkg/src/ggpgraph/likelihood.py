"""Saddlepoint likelihood for the GGP multigraph model.

The log-likelihood of a degree histogram is an integral over a tilted-stable
variable. It is represented as a contour integral of ``exp(-D* A(phi; z))``
and approximated at the real saddle point ``zeta(phi)``:

    Q_t(phi) = N log s + C_t(sigma) - D* A(phi; zeta) - log(2)/2.

For maximization the coordinates ``(sigma, eps, u)`` with ``eps = tau/zeta``
and ``u = s zeta^sigma / (D* beta)`` split ``Q_t`` into ``H + K`` up to a
data-only constant, and ``(eps, u)`` can be profiled out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from .graphstats import GraphSummary, c_t, c_t_d1
from .levy import DomainError, laplace_exponent

LOG2_HALF = 0.5 * math.log(2.0)


class NumericError(RuntimeError):
    """A numerical routine failed to reach its tolerance."""


@dataclass(frozen=True)
class Params:
    sigma: float
    tau: float
    s: float

    def __post_init__(self):
        if not self.sigma < 1:
            raise DomainError(f"sigma must be < 1, got {self.sigma}")
        if not self.tau > 0:
            raise DomainError(f"tau must be > 0, got {self.tau}")
        if not self.s > 0:
            raise DomainError(f"s must be > 0, got {self.s}")


@dataclass(frozen=True)
class ReparamPoint:
    sigma: float
    eps: float
    u: float
    beta: float
    clamped: bool = False


@dataclass(frozen=True)
class SaddleResult:
    zeta: float
    residual: float
    a_value: float


def beta_sigma(sigma: float, g: GraphSummary) -> float:
    return 1.0 - sigma * g.n / g.d_star


# ---------------------------------------------------------------------------
# scalar helpers, continuous through sigma = 0


def _exprel(x: float) -> float:
    """(e^x - 1)/x."""
    if abs(x) < 1e-8:
        return 1.0 + 0.5 * x
    return math.expm1(x) / x


def int_ypow_exp(k: int, sigma: float, a: float, b: float) -> float:
    """int_b^a y^k e^(sigma y) dy.

    With ``a = log z`` and ``b = log tau`` this is the k-th sigma-derivative of
    ``(z^sigma - tau^sigma)/sigma``.
    """
    m = max(abs(a), abs(b))
    if abs(sigma) * m < 1.0:
        total, coef = 0.0, 1.0
        for i in range(80):
            n = k + i + 1
            term = coef * (a**n - b**n) / n
            total += term
            if i > 2 and abs(term) <= 1e-17 * abs(total):
                break
            coef *= sigma / (i + 1)
        return total

    def anti(y):
        acc, fact = 0.0, 1.0
        for i in range(k + 1):
            acc += (-1) ** i * fact * y ** (k - i) / sigma ** (i + 1)
            fact *= k - i
        return math.exp(sigma * y) * acc

    return anti(a) - anti(b)


def psi_real(sigma: float, tau: float, z: float) -> float:
    """Real Laplace exponent (z^sigma - tau^sigma)/sigma for z > 0."""
    L = math.log(z / tau)
    return tau**sigma * L * _exprel(sigma * L)


def f_func(sigma: float, eps: float) -> float:
    """(1 - eps^sigma)/sigma, log(1/eps) at sigma = 0."""
    L = math.log(eps)
    return -L * _exprel(sigma * L)


def g_func(sigma: float, eps: float) -> float:
    return f_func(sigma, eps) - 0.5 * (1.0 - eps)


def f_dsigma(sigma: float, eps: float) -> float:
    return int_ypow_exp(1, sigma, 0.0, math.log(eps))


# ---------------------------------------------------------------------------
# A and the saddle point


def eval_A(phi: Params, g: GraphSummary, z):
    """A(phi; z) on the principal branch; complex input gives complex output."""
    z_arr = np.asarray(z)
    zc = z_arr.astype(complex)
    if np.any((zc.imag == 0) & (zc.real <= 0)):
        raise DomainError("z on the branch cut (-inf, 0]")
    D = g.d_star
    beta = beta_sigma(phi.sigma, g)
    out = -((zc - phi.tau) ** 2) / (4.0 * D) + beta * np.log(zc) + (phi.s / D) * laplace_exponent(
        phi.sigma, phi.tau, zc
    )
    if not np.iscomplexobj(z_arr):
        out = out.real
    return out if out.ndim else out.item()


def dA_dz(phi: Params, g: GraphSummary, z: float) -> float:
    D = g.d_star
    beta = beta_sigma(phi.sigma, g)
    return -(z - phi.tau) / (2.0 * D) + beta / z + (phi.s / D) * z ** (phi.sigma - 1.0)


def _saddle_poly(phi: Params, g: GraphSummary, z: float) -> float:
    """z^2 - tau z - 2 s z^sigma - 2 D* beta; zero exactly at the saddle."""
    beta = beta_sigma(phi.sigma, g)
    return z * z - phi.tau * z - 2.0 * phi.s * z**phi.sigma - 2.0 * g.d_star * beta


def solve_zeta(phi: Params, g: GraphSummary) -> SaddleResult:
    """Unique positive root of dA/dz; always exceeds tau."""
    if g.d_star < g.n:
        raise DomainError("need D* >= N")
    lo = phi.tau
    hi = max(2.0 * phi.tau, math.sqrt(2.0 * g.d_star) + phi.tau)
    for _ in range(2000):
        if _saddle_poly(phi, g, hi) > 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericError("could not bracket the saddle point")
    z = optimize.brentq(lambda x: _saddle_poly(phi, g, x), lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    # Newton polish; the root is simple
    for _ in range(3):
        fz = _saddle_poly(phi, g, z)
        dfz = 2.0 * z - phi.tau - 2.0 * phi.s * phi.sigma * z ** (phi.sigma - 1.0)
        if dfz <= 0:
            break
        z_new = z - fz / dfz
        if not z_new > phi.tau:
            break
        if abs(_saddle_poly(phi, g, z_new)) > abs(fz):
            break
        z = z_new
    resid = _saddle_poly(phi, g, z)
    if abs(resid) > 1e-10 * z * z:
        raise NumericError(f"saddle residual {resid} above tolerance")
    return SaddleResult(zeta=z, residual=resid, a_value=eval_A(phi, g, z))


def qloglik(phi: Params, g: GraphSummary) -> float:
    """Saddlepoint approximation Q_t of the log-likelihood."""
    sr = solve_zeta(phi, g)
    return _qloglik_at(phi, g, sr.zeta)


def _qloglik_at(phi: Params, g: GraphSummary, zeta: float) -> float:
    D = g.d_star
    beta = beta_sigma(phi.sigma, g)
    dA = -((zeta - phi.tau) ** 2) / 4.0 + D * beta * math.log(zeta) + phi.s * psi_real(phi.sigma, phi.tau, zeta)
    return g.n * math.log(phi.s) + c_t(phi.sigma, g) - dA - LOG2_HALF


# ---------------------------------------------------------------------------
# contour quadrature


def log_contour_integral(
    shifted_a: Callable[[np.ndarray], np.ndarray], half_width: float = 12.0, steps: int = 4096
) -> float:
    """log of int exp(-shifted_a(u)) du over [-half_width, half_width].

    ``shifted_a(u)`` must return ``D*[A(zeta - iu) - A(zeta)]``. The trapezoid
    rule is evaluated with a log-sum-exp shift; the imaginary part cancels by
    conjugate symmetry.
    """
    u = np.linspace(-half_width, half_width, steps + 1)
    h = u[1] - u[0]
    expo = -np.asarray(shifted_a(u), dtype=complex)
    if not np.all(np.isfinite(expo)):
        raise NumericError("non-finite contour integrand")
    shift = float(np.max(expo.real))
    w = np.full(u.shape, h)
    w[0] = w[-1] = 0.5 * h
    total = np.sum(w * np.exp(expo - shift))
    if not total.real > 0:
        raise NumericError("contour integral is not positive")
    return math.log(total.real) + shift


def exact_loglik_quad(
    phi: Params, g: GraphSummary, half_width: float = 12.0, steps: int = 4096, saddle: SaddleResult | None = None
) -> float:
    """log I(phi), I(phi) = (1/(2 sqrt(pi))) int exp(-D* A(phi; zeta - iu)) du."""
    sr = saddle or solve_zeta(phi, g)
    D = g.d_star
    zeta = sr.zeta
    a0 = sr.a_value

    def shifted(u):
        return D * (eval_A(phi, g, zeta - 1j * u) - a0)

    log_int = log_contour_integral(shifted, half_width, steps)
    return log_int - D * a0 - math.log(2.0 * math.sqrt(math.pi))


def saddle_gap(phi: Params, g: GraphSummary, **kw) -> float:
    """log I + D* A(zeta) + log(2)/2; tends to zero on bounded parameter sets."""
    sr = solve_zeta(phi, g)
    return exact_loglik_quad(phi, g, saddle=sr, **kw) + g.d_star * sr.a_value + LOG2_HALF


def exact_loglik(phi: Params, g: GraphSummary, **kw) -> float:
    """Log-likelihood up to the data-only constant: N log s + C_t + log I."""
    return g.n * math.log(phi.s) + c_t(phi.sigma, g) + exact_loglik_quad(phi, g, **kw)


# ---------------------------------------------------------------------------
# reparameterization


def reparam_forward(phi: Params, g: GraphSummary, zeta: float | None = None) -> ReparamPoint:
    if zeta is None:
        zeta = solve_zeta(phi, g).zeta
    beta = beta_sigma(phi.sigma, g)
    eps = phi.tau / zeta
    u = phi.s * zeta**phi.sigma / (g.d_star * beta)
    clamped = False
    if not 0 < eps < 1:
        eps = min(max(eps, 1e-300), 1 - 1e-16)
        clamped = True
    return ReparamPoint(phi.sigma, eps, u, beta, clamped)


def reparam_inverse(r: ReparamPoint, g: GraphSummary) -> Params:
    beta = beta_sigma(r.sigma, g)
    zeta = math.sqrt(2.0 * g.d_star * beta * (1.0 + r.u) / (1.0 - r.eps))
    return Params(r.sigma, zeta * r.eps, g.d_star * beta * r.u * zeta ** (-r.sigma))


def _beta_checked(sigma: float, g: GraphSummary) -> float:
    beta = beta_sigma(sigma, g)
    if not beta > 0:
        raise DomainError("beta_sigma <= 0")
    return beta


def H_func(sigma: float, eps: float, u: float, g: GraphSummary) -> float:
    D, N = g.d_star, g.n
    beta = _beta_checked(sigma, g)
    return (
        N * math.log(u)
        - 0.5 * D * math.log1p(u)
        - D * beta * g_func(sigma, eps) * u
        + 0.5 * D * math.log1p(-eps)
        + 0.5 * D * (1.0 - eps) * beta
    )


def K_func(sigma: float, g: GraphSummary) -> float:
    D, N = g.d_star, g.n
    beta = _beta_checked(sigma, g)
    return (N - 0.5 * D) * math.log(beta) + c_t(sigma, g)


def q_star(r: ReparamPoint, g: GraphSummary) -> float:
    return H_func(r.sigma, r.eps, r.u, g) + K_func(r.sigma, g)


def dH_du(sigma: float, eps: float, u: float, g: GraphSummary) -> float:
    D, N = g.d_star, g.n
    beta = beta_sigma(sigma, g)
    return N / u - 0.5 * D / (1.0 + u) - D * beta * g_func(sigma, eps)


def dH_deps(sigma: float, eps: float, u: float, g: GraphSummary) -> float:
    D = g.d_star
    beta = beta_sigma(sigma, g)
    return D * beta * u * (eps ** (sigma - 1.0) - 0.5) - 0.5 * D / (1.0 - eps) - 0.5 * D * beta


def dH_dsigma(sigma: float, eps: float, u: float, g: GraphSummary) -> float:
    D, N = g.d_star, g.n
    beta = beta_sigma(sigma, g)
    return N * g_func(sigma, eps) * u - D * beta * u * f_dsigma(sigma, eps) - 0.5 * N * (1.0 - eps)


def dK_dsigma(sigma: float, g: GraphSummary) -> float:
    D, N = g.d_star, g.n
    beta = beta_sigma(sigma, g)
    return -(N - 0.5 * D) * N / (D * beta) + c_t_d1(sigma, g)


# ---------------------------------------------------------------------------
# inner fixed points and profile


def inner_u_bar(sigma: float, eps: float, g: GraphSummary, return_flag: bool = False):
    """Maximizer in u of H(sigma, eps, .): positive root of a quadratic."""
    D, N = g.d_star, g.n
    beta = beta_sigma(sigma, g)
    a = D * beta * g_func(sigma, eps)
    b = 0.5 * D + a - N
    degenerate = not a > 0
    if degenerate:
        if not b > 0:
            raise DomainError("inner u problem has no positive solution")
        u = N / b
    else:
        disc = math.sqrt(b * b + 4.0 * a * N)
        u = 2.0 * N / (b + disc) if b >= 0 else (disc - b) / (2.0 * a)
    return (u, degenerate) if return_flag else u


def _deps_profile(log_eps: float, sigma: float, g: GraphSummary) -> float:
    eps = math.exp(log_eps)
    return dH_deps(sigma, eps, inner_u_bar(sigma, eps, g), g) / g.d_star


def inner_eps_tilde(sigma: float, g: GraphSummary, c_bound: float = 1.0) -> tuple[float, float]:
    """(eps, u) maximizing H(sigma, ., .), by bracketed root finding in log eps."""
    _beta_checked(sigma, g)
    D, N = g.d_star, g.n
    hi = min(0.5, 3.0 * c_bound * N / D)
    lo = 1e-16
    f_hi = _deps_profile(math.log(hi), sigma, g)
    for cand in (0.5, 0.9, 0.99, 1.0 - 1e-6, 1.0 - 1e-12):
        if f_hi <= 0:
            break
        hi = cand
        f_hi = _deps_profile(math.log(hi), sigma, g)
    if f_hi > 0:
        raise NumericError(f"no sign change for eps at sigma={sigma}")
    f_lo = _deps_profile(math.log(lo), sigma, g)
    while f_lo < 0:
        lo *= 1e-8
        if lo < 1e-290:
            raise NumericError(f"no sign change for eps at sigma={sigma}")
        f_lo = _deps_profile(math.log(lo), sigma, g)
    log_eps = optimize.brentq(_deps_profile, math.log(lo), math.log(hi), args=(sigma, g), xtol=1e-14, rtol=1e-15)
    eps = math.exp(log_eps)
    return eps, inner_u_bar(sigma, eps, g)


def profile_psi(sigma: float, g: GraphSummary) -> float:
    eps, u = inner_eps_tilde(sigma, g)
    return K_func(sigma, g) + H_func(sigma, eps, u, g)


def profile_psi_d1(sigma: float, g: GraphSummary) -> float:
    """Psi'(sigma) by the envelope theorem."""
    eps, u = inner_eps_tilde(sigma, g)
    return dK_dsigma(sigma, g) + dH_dsigma(sigma, eps, u, g)


def profile_point(sigma: float, g: GraphSummary) -> ReparamPoint:
    eps, u = inner_eps_tilde(sigma, g)
    return ReparamPoint(sigma, eps, u, beta_sigma(sigma, g))
