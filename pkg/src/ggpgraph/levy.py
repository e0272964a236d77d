"""Generalized gamma process Levy machinery.

Levy density ``rho(w) = w^(-1-sigma) exp(-tau w) / Gamma(1-sigma)``, its tail
``rhobar(x) = int_x^inf rho``, the generalized inverse of the tail, the
tilted-stable Laplace exponent ``psi`` and the closed-form GGP sparsity
constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np
from scipy import special

EULER_GAMMA = 0.5772156649015329

# series coefficients (-1)^k zeta(k) / k, used for log Gamma(1+a) near a = 0
_LGAMMA1P_COEF = np.array(
    [(-1.0) ** k * float(special.zeta(k)) / k for k in range(2, 80)]
)

INV_BRACKET = (1e-12, 1e4)


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


@dataclass(frozen=True)
class GGPParams:
    """Generative parameters of the GGP multigraph.

    ``w_min`` is the cutoff below which atoms are not enumerated individually
    by the sampler; ``None`` lets the sampler pick it from ``trunc_tol``.
    """

    sigma0: float
    tau0: float
    t: float
    w_min: Optional[float] = None
    trunc_tol: float = 0.1

    def __post_init__(self):
        if not self.sigma0 < 1:
            raise DomainError(f"sigma0 must be < 1, got {self.sigma0}")
        if not self.tau0 > 0:
            raise DomainError(f"tau0 must be > 0, got {self.tau0}")
        if not self.t > 0:
            raise DomainError(f"t must be > 0, got {self.t}")
        if self.w_min is not None and not self.w_min > 0:
            raise DomainError(f"w_min must be > 0, got {self.w_min}")
        if not self.trunc_tol > 0:
            raise DomainError("trunc_tol must be > 0")


def _positive(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} must be > 0")
    return arr


def ggp_density(w, p: GGPParams):
    """Levy density rho(w)."""
    w = _positive(w, "w")
    s, tau = p.sigma0, p.tau0
    out = np.exp((-1.0 - s) * np.log(w) - tau * w - special.gammaln(1.0 - s))
    return out if out.ndim else float(out)


def log_ggp_density(w, p: GGPParams):
    w = _positive(w, "w")
    s, tau = p.sigma0, p.tau0
    return (-1.0 - s) * np.log(w) - tau * w - special.gammaln(1.0 - s)


# ---------------------------------------------------------------------------
# upper incomplete gamma for any real a > -1 (and a >= 1 via scipy)


@numba.njit(cache=True)
def _gamma1pm1_over_a(a):
    """(Gamma(1+a) - 1)/a for |a| <= 0.5, exact at a = 0."""
    acc = 0.0
    for k in range(_LGAMMA1P_COEF.size - 1, -1, -1):
        acc = acc * a + _LGAMMA1P_COEF[k]
    lg_over_a = -EULER_GAMMA + a * acc
    z = a * lg_over_a
    rel = 1.0 + 0.5 * z if abs(z) < 1e-8 else math.expm1(z) / z
    return rel * lg_over_a


@numba.njit(cache=True)
def _log_upper_gamma_cf(a, x):
    """log Gamma(a, x) by modified Lentz continued fraction; good for x >~ 1."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 2000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return -x + a * math.log(x) + math.log(h)


@numba.njit(cache=True)
def _upper_gamma_small(a, x):
    """Gamma(a, x) for -1 < a < 1 and small x, by the series route."""
    lx = math.log(x)
    if abs(a) <= 0.5:
        # Gamma(a) - x^a / a, split to stay accurate as a -> 0
        z = a * lx
        rel = 1.0 + 0.5 * z if abs(z) < 1e-8 else math.expm1(z) / z
        head = _gamma1pm1_over_a(a) - lx * rel
    else:
        head = math.gamma(a) - math.exp(a * lx) / a
    # x^a * sum_{k>=1} (-x)^k / (k! (a+k))
    term = 1.0
    tail = 0.0
    for k in range(1, 200):
        term *= -x / k
        inc = term / (a + k)
        tail += inc
        if abs(inc) < 1e-17 * abs(tail):
            break
    return head - math.exp(a * lx) * tail


@numba.njit(cache=True)
def _log_upper_gamma_large_a(a, x):
    """log Gamma(a, x) for a >= 1 and x < a + 1 via the lower-gamma series."""
    term = 1.0 / a
    acc = term
    for k in range(1, 1000):
        term *= x / (a + k)
        acc += term
        if term < 1e-17 * acc:
            break
    log_lower = a * math.log(x) - x + math.log(acc)
    lg = math.lgamma(a)
    return lg + math.log1p(-math.exp(log_lower - lg))


@numba.vectorize(["float64(float64, float64)"], cache=True)
def _log_upper_gamma_kernel(a, x):
    if a >= 1.0:
        if x < a + 1.0:
            return _log_upper_gamma_large_a(a, x)
        return _log_upper_gamma_cf(a, x)
    if x >= 1.5:
        return _log_upper_gamma_cf(a, x)
    return math.log(_upper_gamma_small(a, x))


def log_upper_gamma(a, x):
    """log Gamma(a, x) for real a > -1 and x > 0, vectorized."""
    x = _positive(x)
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr <= -1):
        raise DomainError("first argument must exceed -1")
    out = _log_upper_gamma_kernel(a_arr, x)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# tail intensity and its inverse


def log_tail_intensity(x, p: GGPParams):
    """log rhobar(x) via rhobar(x) = tau^sigma Gamma(-sigma, tau x) / Gamma(1-sigma)."""
    x = _positive(x)
    s, tau = p.sigma0, p.tau0
    return s * math.log(tau) + log_upper_gamma(-s, tau * x) - special.gammaln(1.0 - s)


def tail_intensity(x, p: GGPParams):
    """rhobar(x) = int_x^inf rho(w) dw."""
    out = np.exp(log_tail_intensity(x, p))
    return out if np.ndim(out) else float(out)


def tail_intensity_at_zero(p: GGPParams) -> float:
    """rhobar(0+), finite only when sigma0 < 0."""
    s = p.sigma0
    if s >= 0:
        return math.inf
    return p.tau0**s / (-s)


def inv_tail_intensity(y, p: GGPParams, return_flag: bool = False):
    """Generalized inverse of rhobar by bisection on log x.

    Bracket is ``[1e-12, 1e4]`` with 1e-12 relative tolerance. When ``y``
    exceeds rhobar at the lower bracket the lower endpoint is returned and the
    flag is set.
    """
    y = _positive(y, "y")
    logy = np.log(y)
    lo = np.full(y.shape, math.log(INV_BRACKET[0]))
    hi = np.full(y.shape, math.log(INV_BRACKET[1]))
    clipped = logy >= log_tail_intensity(INV_BRACKET[0], p)
    # 45 halvings bring a width of ~37 below 1e-12
    while np.any(hi - lo > 1e-13):
        mid = 0.5 * (lo + hi)
        above = log_tail_intensity(np.exp(mid), p) > logy
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    res = np.exp(hi)
    res = np.where(clipped, INV_BRACKET[0], res)
    out = res if res.ndim else float(res)
    if return_flag:
        return out, bool(np.any(clipped))
    return out


def inv_tail_fast(logy: np.ndarray, p: GGPParams, x_lo: float) -> np.ndarray:
    """Vectorized inverse of rhobar for large batches, given log targets.

    Interpolation on a log grid followed by safeguarded Newton steps in log x.
    Targets must satisfy rhobar(result) <= rhobar(x_lo).
    """
    logy = np.asarray(logy, dtype=float)
    if logy.size == 0:
        return np.empty(0)
    v_lo = math.log(x_lo)
    v_hi = math.log(INV_BRACKET[1])
    grid = np.linspace(v_lo, v_hi, 4000)
    lt = log_tail_intensity(np.exp(grid), p)
    finite = np.isfinite(lt)
    grid, lt = grid[finite], lt[finite]
    # lt is decreasing; np.interp needs increasing abscissae
    v = np.interp(logy, lt[::-1], grid[::-1])
    for _ in range(6):
        x = np.exp(v)
        lr = log_tail_intensity(x, p)
        dlr = -np.exp(np.log(x) + log_ggp_density(x, p) - lr)
        step = (lr - logy) / dlr
        step = np.clip(step, -1.0, 1.0)
        v = np.clip(v - step, v_lo, v_hi)
        if np.all(np.abs(step) < 1e-13):
            break
    return np.exp(v)


# ---------------------------------------------------------------------------
# Laplace exponent


def _cexpm1(w):
    """expm1 for complex input without cancellation at small |w|."""
    w = np.asarray(w, dtype=complex)
    x, y = w.real, w.imag
    re = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2
    im = np.exp(x) * np.sin(y)
    return re + 1j * im


def _cexprel(w):
    """(e^w - 1)/w for complex w, by series near 0."""
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < 1e-4
    safe = np.where(small, 1.0, w)
    return np.where(small, 1.0 + w / 2.0 + w * w / 6.0 + w**3 / 24.0, _cexpm1(safe) / safe)


def laplace_exponent(sigma: float, tau: float, xi):
    """psi(sigma, tau; xi) = (xi^sigma - tau^sigma)/sigma, log(xi/tau) at sigma = 0.

    Principal branch on C minus (-inf, 0]. Evaluated as
    ``tau^sigma L (e^(sigma L) - 1)/(sigma L)`` with ``L = Log(xi/tau)``,
    which is continuous through sigma = 0.
    """
    if not sigma < 1:
        raise DomainError("sigma must be < 1")
    if not tau > 0:
        raise DomainError("tau must be > 0")
    xi = np.asarray(xi, dtype=complex)
    if np.any((xi.imag == 0) & (xi.real <= 0)):
        raise DomainError("xi on the branch cut (-inf, 0]")
    L = np.log(xi.real / tau + 1j * (xi.imag / tau))
    if sigma == 0:
        out = L
    else:
        out = tau**sigma * L * _cexprel(sigma * L)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# closed-form GGP constants


def ggp_c0(sigma0: float, tau0: float) -> float:
    return 2.0**sigma0 / (sigma0 * tau0 ** (sigma0 * (1.0 - sigma0)) * math.gamma(1.0 - sigma0))


def ggp_int_wbar1(sigma0: float, tau0: float) -> float:
    return 2.0 * tau0 ** (2.0 * sigma0 - 2.0)


def ggp_theoretical_tau_star(sigma0: float, tau0: float) -> float:
    """tau* implied by the GGP sparsity constants; equals tau0."""
    if not 0 < sigma0 < 1:
        raise DomainError("sigma0 must lie in (0, 1)")
    if not tau0 > 0:
        raise DomainError("tau0 must be > 0")
    a = sigma0
    c0 = ggp_c0(sigma0, tau0)
    iw = ggp_int_wbar1(sigma0, tau0)
    inner = 2.0 * a * c0 * math.gamma(1.0 - a) / (2.0 * iw) ** ((1.0 + a) / 2.0)
    return inner ** (1.0 / (1.0 - a))
