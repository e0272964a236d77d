"""Random graph generators reduced to their degree histograms.

Every sampler owns a private Philox stream keyed on ``(seed, model tag)``, so
a replicate never depends on how many others run or in which order.
"""

from __future__ import annotations

import math
import warnings
import zlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba
import numpy as np
from scipy import optimize, special

from .graphstats import (
    GraphSummary,
    karlin_rouault_log_survival,
    karlin_rouault_pmf_table,
    summarize,
)
from .levy import (
    DomainError,
    GGPParams,
    inv_tail_fast,
    log_tail_intensity,
    tail_intensity_at_zero,
)

MAX_ATOMS = 50_000_000


@dataclass(frozen=True)
class SimulatedGraph:
    summary: GraphSummary
    model_meta: dict
    weights: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        meta = dict(self.model_meta)
        seed = meta.pop("seed", None)
        out = self.summary.to_dict()
        out["model"] = meta
        out["seed"] = seed
        return out


def make_rng(seed: int, tag: str) -> np.random.Generator:
    """Counter-based generator keyed on the seed and the model tag."""
    key = zlib.crc32(tag.encode("utf-8"))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), key])))


@numba.njit(cache=True)
def _nb_seed(s):
    np.random.seed(s)


# ---------------------------------------------------------------------------
# GGP multigraph


def _lower_gamma(a: float, y: float) -> float:
    """Unregularized lower incomplete gamma for a > 0."""
    return float(special.gammainc(a, y) * special.gamma(a))


def _small_atom_moments(p: GGPParams, c: float) -> tuple[float, float]:
    """Mean and variance of the total weight of atoms below c."""
    s, tau, t = p.sigma0, p.tau0, p.t
    g1 = special.gamma(1.0 - s)
    m1 = t * tau ** (s - 1.0) * _lower_gamma(1.0 - s, tau * c) / g1
    m2 = t * tau ** (s - 2.0) * _lower_gamma(2.0 - s, tau * c) / g1
    return m1, m2


def collision_budget(p: GGPParams, c: float, total_mass: float) -> float:
    """Expected number of atoms below c that would receive two or more endpoints."""
    s, tau, t = p.sigma0, p.tau0, p.t
    lam = 2.0 * total_mass
    return 0.5 * t * lam**2 * tau ** (s - 2.0) * _lower_gamma(2.0 - s, tau * c) / special.gamma(1.0 - s)


def choose_w_min(p: GGPParams) -> float:
    """Largest cutoff whose collision budget stays below ``p.trunc_tol``.

    Total mass is bounded by its mean plus five standard deviations.
    """
    s, tau, t = p.sigma0, p.tau0, p.t
    mean_w = t * tau ** (s - 1.0)
    sd_w = math.sqrt(t * (1.0 - s) * tau ** (s - 2.0))
    w_hi = mean_w + 5.0 * sd_w

    def excess(logc):
        return math.log(collision_budget(p, math.exp(logc), w_hi)) - math.log(p.trunc_tol)

    lo, hi = math.log(1e-60), math.log(1e3)
    if excess(hi) <= 0:
        return 1e3
    return math.exp(optimize.brentq(excess, lo, hi, xtol=1e-10))


@numba.njit(cache=True)
def _degrees_from_endpoints(a, b, k_atoms):
    """Degrees of enumerated atoms and count of bucket endpoints.

    Index ``k_atoms`` denotes the aggregated small-atom bucket; each bucket
    endpoint becomes its own degree-one node. Self-loops count once.
    """
    deg = np.zeros(k_atoms, dtype=np.int64)
    bucket = 0
    for e in range(a.size):
        i, j = a[e], b[e]
        if i == j and i < k_atoms:
            deg[i] += 1
            continue
        if i < k_atoms:
            deg[i] += 1
        else:
            bucket += 1
        if j < k_atoms:
            deg[j] += 1
        else:
            bucket += 1
    return deg, bucket


def sample_ggp_weights(p: GGPParams, rng: np.random.Generator, w_min: float) -> np.ndarray:
    """Atoms with weight >= w_min of the GGP Poisson random measure on [0, t].

    Points ``theta_i`` of a rate-t Poisson process on (0, rhobar(w_min)) are
    mapped through the generalized inverse of the tail intensity.
    """
    log_top = float(log_tail_intensity(w_min, p))
    mean_atoms = p.t * math.exp(log_top)
    if mean_atoms > MAX_ATOMS:
        raise ValueError(f"expected {mean_atoms:.3g} atoms exceeds the cap {MAX_ATOMS}")
    k = rng.poisson(mean_atoms)
    # uniform points on (0, rhobar(w_min)), in log scale
    log_theta = log_top + np.log(rng.random(k))
    return inv_tail_fast(log_theta, p, w_min)


def sample_ggp_graph(p: GGPParams, seed: int, keep_weights: bool = False) -> SimulatedGraph:
    """GGP multigraph on [0, t] reduced to its degree histogram.

    Atoms above the cutoff ``w_min`` are enumerated. Atoms below it are
    aggregated into one bucket whose total weight is drawn by moment matching
    and whose endpoints each become a distinct degree-one node. Edges use the
    total-mass device: Poisson(W^2) ordered endpoint pairs drawn proportional
    to weight.
    """
    rng = make_rng(seed, "ggp")
    meta = {
        "model": "ggp",
        "sigma0": p.sigma0,
        "tau0": p.tau0,
        "t": p.t,
        "seed": int(seed),
    }
    if p.sigma0 < 0:
        # finite activity: all atoms can be enumerated
        k = rng.poisson(p.t * tail_intensity_at_zero(p))
        weights = rng.gamma(-p.sigma0, 1.0 / p.tau0, size=k)
        w_min, w_small = 0.0, 0.0
    else:
        w_min = p.w_min if p.w_min is not None else choose_w_min(p)
        weights = sample_ggp_weights(p, rng, w_min)
        m1, m2 = _small_atom_moments(p, w_min)
        w_small = float(rng.gamma(m1 * m1 / m2, m2 / m1)) if m1 > 0 else 0.0
    big_mass = float(weights.sum())
    total = big_mass + w_small
    meta["w_min"] = w_min
    meta["atoms"] = int(weights.size)
    meta["small_mass"] = w_small
    flags = []
    if w_min > 0:
        budget = collision_budget(p, w_min, total)
        meta["collision_budget"] = budget
        if budget > p.trunc_tol:
            flags.append("truncation_budget")
            warnings.warn(f"small-atom collision budget {budget:.3g} exceeds {p.trunc_tol}")
    meta["flags"] = flags

    n_edges = rng.poisson(total * total)
    cum = np.cumsum(np.append(weights, w_small))
    ends = np.searchsorted(cum, rng.random(2 * n_edges) * cum[-1], side="right")
    ends = np.minimum(ends, weights.size)
    deg, bucket = _degrees_from_endpoints(ends[:n_edges], ends[n_edges:], weights.size)
    degrees = np.concatenate([deg[deg > 0], np.ones(bucket, dtype=np.int64)])
    meta["edges"] = int(n_edges)
    summary = summarize(degrees)
    return SimulatedGraph(summary, meta, weights if keep_weights else None)


# ---------------------------------------------------------------------------
# Karlin-Rouault and configuration models


KR_TABLE_MAX = 1_000_000


def sample_karlin_rouault_degrees(alpha: float, n: int, seed: int, rng: np.random.Generator | None = None):
    """n i.i.d. draws of p_j = alpha Gamma(j - alpha)/(j! Gamma(1 - alpha)).

    Inverse CDF on the recurrence table up to 10^6; beyond, the closed-form
    survival function is inverted by integer bisection.
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = rng or make_rng(seed, "karlin_rouault")
    u = rng.random(n)
    pmf = karlin_rouault_pmf_table(alpha, KR_TABLE_MAX)
    cdf = np.cumsum(pmf)
    out = np.searchsorted(cdf, u, side="right").astype(np.int64) + 1
    far = out > KR_TABLE_MAX
    if np.any(far):
        log_tail = np.log1p(-u[far])
        lo = np.full(log_tail.shape, float(KR_TABLE_MAX))
        hi = lo * 2.0
        while True:
            grow = karlin_rouault_log_survival(alpha, hi) > log_tail
            if not np.any(grow):
                break
            hi = np.where(grow, hi * 2.0, hi)
            if np.any(hi > 2.0**62):
                raise OverflowError("Karlin-Rouault draw beyond int64 range")
        # smallest j with P(X > j) <= 1 - u
        while np.any(hi - lo > 1):
            mid = np.floor(0.5 * (lo + hi))
            ok = karlin_rouault_log_survival(alpha, mid) <= log_tail
            hi = np.where(ok, mid, hi)
            lo = np.where(ok, lo, mid)
        out[far] = hi.astype(np.int64)
    return out


def sample_constrained_config_degrees(f: Sequence[float], d_max: int, n: int, seed: int):
    """n i.i.d. degrees from f restricted to {1..d_max}, with a parity fix.

    ``f[j-1]`` is the mass at degree j. If the degree sum is odd the last
    degree is incremented by one.
    """
    f = np.asarray(f, dtype=float)
    if d_max < 2:
        raise DomainError("d_max must be >= 2")
    if n < 1:
        raise DomainError("n must be >= 1")
    if np.any(f < 0) or f.size == 0:
        raise DomainError("f must be a nonnegative pmf")
    fr = f[:d_max]
    if fr.sum() <= 0 or fr[0] >= fr.sum():
        raise DomainError("degenerate pmf: all mass at degree 1")
    cdf = np.cumsum(fr / fr.sum())
    rng = make_rng(seed, "constrained_config")
    out = np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right").astype(np.int64) + 1
    out = np.minimum(out, fr.size)
    if out.sum() % 2:
        out[-1] += 1
    return out


def sample_unconstrained_kr_config(alpha: float, n: int, seed: int):
    """I.i.d. Karlin-Rouault degrees with no maximum-degree constraint."""
    out = sample_karlin_rouault_degrees(alpha, n, seed, rng=make_rng(seed, "unconstrained_config"))
    if out.sum() % 2:
        out[-1] += 1
    return out


def kr_constrained_d_max(alpha: float, n: int, scale: float = 1.0) -> int:
    """Maximum degree A n^((1-a)/((1+a)(1-a))) = A n^(1/(1+a)) for Karlin-Rouault f."""
    return max(2, int(round(scale * n ** (1.0 / (1.0 + alpha)))))


# ---------------------------------------------------------------------------
# degree-corrected and dense Erdos-Renyi


@numba.njit(cache=True)
def _dc_er_degrees(theta, p_n):
    n = theta.size
    deg = np.zeros(n, dtype=np.int64)
    for i in range(n):
        ti = theta[i] * p_n
        for j in range(i + 1, n):
            if np.random.random() < ti * theta[j]:
                deg[i] += 1
                deg[j] += 1
    return deg


def _simple_graph_meta(model: str, seed: int, **kw) -> dict:
    meta = {"model": model, "seed": int(seed)}
    meta.update(kw)
    return meta


def _summary_or_empty(deg: np.ndarray) -> GraphSummary:
    deg = deg[deg > 0]
    if deg.size == 0:
        raise ValueError("sampled graph has no edges")
    return summarize(deg)


def sample_dc_er(theta, p_n: float, seed: int) -> SimulatedGraph:
    """Simple graph with independent edges P(i~j) = theta_i theta_j p_n."""
    theta = np.asarray(theta, dtype=float)
    if not 0 < p_n <= 1:
        raise DomainError("p_n must lie in (0, 1]")
    if np.any(theta <= 0):
        raise DomainError("theta must be positive")
    top = np.sort(theta)[-2:]
    if top.size == 2 and top[0] * top[1] * p_n > 1 + 1e-12:
        raise DomainError("edge probability exceeds 1 for some pair")
    rng = make_rng(seed, "dc_er")
    _nb_seed(int(rng.integers(0, 2**31 - 1)))
    deg = _dc_er_degrees(theta, p_n)
    meta = _simple_graph_meta("dc_er", seed, p_n=p_n, nodes=int(theta.size))
    return SimulatedGraph(_summary_or_empty(deg), meta)


def dc_er_kr_theta(n: int, alpha: float, p_n: float) -> np.ndarray:
    """Weights whose expected degrees follow the Karlin-Rouault quantiles.

    Expected degree of node i is theta_i p_n sum_j theta_j, so with target
    degrees mu_i one takes theta_i = mu_i / sqrt(p_n sum mu). Targets are
    capped at sqrt(sum mu) to keep all edge probabilities below one.
    """
    q = (np.arange(n) + 0.5) / n
    pmf = karlin_rouault_pmf_table(alpha, max(n, 10))
    mu = np.searchsorted(np.cumsum(pmf), q, side="right").astype(float) + 1.0
    for _ in range(50):
        cap = math.sqrt(mu.sum())
        if mu.max() <= cap:
            break
        mu = np.minimum(mu, cap)
    return mu / math.sqrt(p_n * mu.sum())


def sample_dense_er(n: int, p: float, seed: int) -> SimulatedGraph:
    """Erdos-Renyi G(n, p) simple graph."""
    if not 0 < p <= 1:
        raise DomainError("p must lie in (0, 1]")
    if n < 2:
        raise DomainError("n must be >= 2")
    rng = make_rng(seed, "dense_er")
    iu = np.triu_indices(n, 1)
    adj = rng.random(iu[0].size) < p
    deg = np.bincount(iu[0][adj], minlength=n) + np.bincount(iu[1][adj], minlength=n)
    meta = _simple_graph_meta("dense_er", seed, nodes=n, p=p)
    return SimulatedGraph(_summary_or_empty(deg), meta)


# ---------------------------------------------------------------------------
# Hollywood process


@numba.njit(cache=True)
def _hollywood_slots(alpha, theta, n_slots):
    owner = np.empty(n_slots, dtype=np.int64)
    deg = np.zeros(n_slots, dtype=np.int64)
    v_count = 0
    for n in range(n_slots):
        if n == 0:
            new = True
        else:
            new = np.random.random() * (n + theta) < theta + alpha * v_count
        if new:
            v = v_count
            v_count += 1
        else:
            # existing vertex with probability proportional to deg - alpha
            while True:
                v = owner[np.random.randint(0, n)]
                if np.random.random() * deg[v] < deg[v] - alpha:
                    break
        owner[n] = v
        deg[v] += 1
    return owner, v_count


def sample_hollywood(alpha: float, theta_h: float, m_edges: int, seed: int) -> SimulatedGraph:
    """Two-parameter edge-exchangeable multigraph with m_edges edges.

    Endpoint slots are filled one at a time: an existing vertex v with weight
    deg(v) - alpha, a new vertex with weight theta_h + alpha V.
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    if not theta_h > -alpha:
        raise DomainError("theta_h must exceed -alpha")
    if m_edges < 1:
        raise DomainError("m_edges must be >= 1")
    rng = make_rng(seed, "hollywood")
    _nb_seed(int(rng.integers(0, 2**31 - 1)))
    owner, v_count = _hollywood_slots(alpha, theta_h, 2 * m_edges)
    deg = np.bincount(owner, minlength=v_count)
    a, b = owner[0::2], owner[1::2]
    loops = a[a == b]
    deg -= np.bincount(loops, minlength=v_count)
    meta = _simple_graph_meta("hollywood", seed, alpha=alpha, theta_h=theta_h, edges=m_edges)
    return SimulatedGraph(summarize(deg), meta)
