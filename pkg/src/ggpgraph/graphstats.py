"""Degree-histogram statistics and model-free estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import optimize, special

from .levy import DomainError


class NoSolution(ValueError):
    """The estimating equation has no root for this histogram."""


@dataclass(frozen=True)
class GraphSummary:
    """Sufficient statistic of a multigraph: the degree histogram.

    ``degrees`` holds the distinct degrees (increasing, all >= 1) and
    ``counts`` the number of nodes with each degree.
    """

    degrees: np.ndarray
    counts: np.ndarray
    n: int = field(init=False)
    d_star: int = field(init=False)
    tail_counts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        deg = np.asarray(self.degrees, dtype=np.int64)
        cnt = np.asarray(self.counts, dtype=np.int64)
        if deg.shape != cnt.shape or deg.ndim != 1:
            raise ValueError("degrees and counts must be 1-d arrays of equal length")
        if deg.size == 0:
            raise ValueError("empty histogram")
        if np.any(deg < 1):
            raise ValueError("degree 0 present: isolated nodes are not part of the graph")
        if np.any(cnt < 1):
            raise ValueError("histogram counts must be >= 1")
        if np.any(np.diff(deg) <= 0):
            raise ValueError("degrees must be strictly increasing")
        deg.setflags(write=False)
        cnt.setflags(write=False)
        object.__setattr__(self, "degrees", deg)
        object.__setattr__(self, "counts", cnt)
        object.__setattr__(self, "n", int(cnt.sum()))
        object.__setattr__(self, "d_star", int((deg * cnt).sum()))
        dense = np.zeros(int(deg[-1]) + 1, dtype=np.int64)
        dense[deg] = cnt
        # c_k = #{nodes with degree > k}, k = 1..max_degree-1
        tail = (np.cumsum(dense[::-1])[::-1])[2:]
        tail.setflags(write=False)
        object.__setattr__(self, "tail_counts", tail)

    @property
    def max_degree(self) -> int:
        return int(self.degrees[-1])

    @property
    def n1(self) -> int:
        return int(self.counts[0]) if self.degrees[0] == 1 else 0

    def histogram(self) -> dict:
        return {int(j): int(c) for j, c in zip(self.degrees, self.counts)}

    def count(self, j: int) -> int:
        i = np.searchsorted(self.degrees, j)
        if i < self.degrees.size and self.degrees[i] == j:
            return int(self.counts[i])
        return 0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d_star": self.d_star,
            "histogram": [[int(j), int(c)] for j, c in zip(self.degrees, self.counts)],
        }

    @classmethod
    def from_histogram(cls, hist: Mapping[int, int] | Iterable[Sequence[int]]) -> "GraphSummary":
        items = hist.items() if isinstance(hist, Mapping) else hist
        pairs = sorted((int(j), int(c)) for j, c in items if int(c) != 0)
        deg = np.array([j for j, _ in pairs], dtype=np.int64)
        cnt = np.array([c for _, c in pairs], dtype=np.int64)
        return cls(deg, cnt)

    @classmethod
    def from_dict(cls, d: Mapping) -> "GraphSummary":
        g = cls.from_histogram(d["histogram"])
        for key, val in (("n", g.n), ("d_star", g.d_star)):
            if key in d and int(d[key]) != val:
                raise ValueError(f"{key}={d[key]} inconsistent with histogram ({val})")
        return g

    def csv_rows(self) -> list[tuple[int, int]]:
        return [(int(j), int(c)) for j, c in zip(self.degrees, self.counts)]


def summarize(degrees) -> GraphSummary:
    """Histogram of a degree sequence."""
    d = np.asarray(degrees, dtype=np.int64).ravel()
    if d.size == 0:
        raise ValueError("empty degree sequence")
    if np.any(d < 1):
        raise ValueError("degree 0 present: isolated nodes are not part of the graph")
    deg, cnt = np.unique(d, return_counts=True)
    return GraphSummary(deg, cnt)


# ---------------------------------------------------------------------------
# C_t and its derivatives


def _check_sigma(sigma):
    if not sigma < 1:
        raise DomainError(f"sigma must be < 1, got {sigma}")


def _k(g: GraphSummary) -> np.ndarray:
    return np.arange(1, g.tail_counts.size + 1, dtype=float)


def c_t(sigma: float, g: GraphSummary) -> float:
    """C_t(sigma) = sum_k c_k log(k - sigma)."""
    _check_sigma(sigma)
    return float(g.tail_counts @ np.log(_k(g) - sigma))


def c_t_d1(sigma: float, g: GraphSummary) -> float:
    _check_sigma(sigma)
    return float(-(g.tail_counts @ (1.0 / (_k(g) - sigma))))


def c_t_d2(sigma: float, g: GraphSummary) -> float:
    _check_sigma(sigma)
    return float(-(g.tail_counts @ (1.0 / (_k(g) - sigma) ** 2)))


# ---------------------------------------------------------------------------
# Karlin-Rouault exponent


def alpha_equation(alpha: float, g: GraphSummary) -> float:
    """sum_j N_j sum_{k<j} alpha/(k - alpha) - N."""
    return float(g.tail_counts @ (alpha / (_k(g) - alpha))) - g.n


def solve_alpha_hat(g: GraphSummary) -> float:
    """Root in (0, 1) of the Karlin-Rouault estimating equation."""
    if g.tail_counts.size == 0 or g.tail_counts[0] == 0:
        raise NoSolution("N_{t,1} = N")
    lo, hi = 1e-9, 1.0 - 1e-9
    f_lo, f_hi = alpha_equation(lo, g), alpha_equation(hi, g)
    if not (f_lo < 0 < f_hi):
        raise NoSolution("no sign change of the estimating equation on (0, 1)")
    return float(optimize.brentq(alpha_equation, lo, hi, args=(g,), xtol=1e-15, rtol=1e-15))


def empirical_tau_star(alpha: float, g: GraphSummary) -> float:
    """sqrt(2 D*) (alpha N / D*)^(1/(1-alpha))."""
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    return math.sqrt(2.0 * g.d_star) * (alpha * g.n / g.d_star) ** (1.0 / (1.0 - alpha))


def sparsity_constant(alpha0: float, tau_star: float) -> float:
    """C in D* ~ C N^(2/(1+alpha0)) given the scale tau*."""
    return ((math.sqrt(2.0) / tau_star) ** (1.0 - alpha0) * alpha0) ** (2.0 / (1.0 + alpha0))


def sparsity_fit(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares slope and intercept of log D* against log N."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 3:
        raise ValueError("need at least 3 (N, D*) points")
    x, y = np.log(arr[:, 0]), np.log(arr[:, 1])
    if np.ptp(x) == 0:
        raise ValueError("degenerate ladder: constant N")
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def dense_diagnostics(g: GraphSummary, c: float = 0.1) -> tuple[float, float]:
    """(D*/N^(2-c), sum_{j>=2} N_j log j / (N log D*))."""
    if not 0 < c < 1:
        raise DomainError("c must lie in (0, 1)")
    if g.d_star < 2:
        raise ValueError("need D* >= 2")
    ratio = g.d_star / g.n ** (2.0 - c)
    logged = float(g.counts @ np.log(g.degrees.astype(float))) / (g.n * math.log(g.d_star))
    return float(ratio), logged


# ---------------------------------------------------------------------------
# Karlin-Rouault distribution


def karlin_rouault_pmf_table(alpha: float, jmax: int) -> np.ndarray:
    """p_1..p_jmax by the recurrence p_{j+1} = p_j (j - alpha)/(j + 1)."""
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    if jmax < 1:
        raise DomainError("jmax must be >= 1")
    j = np.arange(1, jmax, dtype=float)
    ratios = (j - alpha) / (j + 1.0)
    return alpha * np.concatenate(([1.0], np.cumprod(ratios)))


def karlin_rouault_pmf(alpha: float, j):
    """p_j = alpha Gamma(j - alpha) / (j! Gamma(1 - alpha))."""
    j_arr = np.asarray(j)
    if np.any(j_arr < 1) or np.any(j_arr != np.floor(j_arr)):
        raise DomainError("j must be a positive integer")
    table = karlin_rouault_pmf_table(alpha, int(j_arr.max()))
    out = table[j_arr.astype(np.int64) - 1]
    return out if out.ndim else float(out)


def karlin_rouault_log_survival(alpha: float, j):
    """log P(X > j) = log Gamma(j+1-alpha) - log Gamma(1-alpha) - log j!."""
    j = np.asarray(j, dtype=float)
    return special.gammaln(j + 1.0 - alpha) - special.gammaln(1.0 - alpha) - special.gammaln(j + 1.0)
