import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from ggpgraph.graphstats import (
    GraphSummary,
    NoSolution,
    alpha_equation,
    c_t,
    c_t_d1,
    c_t_d2,
    dense_diagnostics,
    empirical_tau_star,
    karlin_rouault_log_survival,
    karlin_rouault_pmf,
    karlin_rouault_pmf_table,
    solve_alpha_hat,
    sparsity_constant,
    sparsity_fit,
    summarize,
)
from ggpgraph.levy import DomainError
from ggpgraph.samplers import sample_karlin_rouault_degrees

degree_lists = st.lists(st.integers(1, 60), min_size=1, max_size=200)
histograms = st.dictionaries(st.integers(1, 80), st.integers(1, 500), min_size=1, max_size=25)
mixed_histograms = histograms.filter(lambda h: any(j >= 2 for j in h))


def naive_c_t(sigma, hist):
    return sum(n * sum(math.log(k - sigma) for k in range(1, j)) for j, n in hist.items())


@pytest.mark.parametrize(
    "degrees,n,d_star,hist",
    [([2, 2, 2], 3, 6, {2: 3}), ([1, 1, 1, 1], 4, 4, {1: 4})],
)
def test_summarize_examples(degrees, n, d_star, hist):
    g = summarize(degrees)
    assert (g.n, g.d_star, g.histogram()) == (n, d_star, hist)


@given(degree_lists)
def test_summary_identities(degrees):
    g = summarize(degrees)
    assert g.counts.sum() == g.n == len(degrees)
    assert (g.degrees * g.counts).sum() == g.d_star == sum(degrees)
    assert np.all(g.counts >= 1) and np.all(g.degrees >= 1)
    assert np.all(np.diff(g.tail_counts) <= 0)
    for k, c in enumerate(g.tail_counts, start=1):
        assert c == sum(d > k for d in degrees)


def test_summarize_rejects_zero():
    with pytest.raises(ValueError):
        summarize([1, 0, 2])


@given(histograms)
def test_dict_roundtrip(hist):
    g = GraphSummary.from_histogram(hist)
    g2 = GraphSummary.from_dict(g.to_dict())
    assert g2.histogram() == g.histogram() == hist
    assert g.csv_rows() == sorted(hist.items())


def test_from_dict_inconsistent():
    with pytest.raises(ValueError):
        GraphSummary.from_dict({"n": 5, "d_star": 6, "histogram": [[2, 3]]})


def test_c_t_single_term():
    g = GraphSummary.from_histogram({2: 3})
    assert c_t(0.5, g) == pytest.approx(3 * math.log(0.5), abs=1e-15)
    assert round(c_t(0.5, g), 5) == -2.07944


@given(st.integers(1, 1000), st.floats(-5.0, 0.99))
def test_c_t_all_ones(n, sigma):
    assert c_t(sigma, GraphSummary.from_histogram({1: n})) == 0.0


@given(histograms, st.floats(-3.0, 0.99))
def test_c_t_matches_double_sum(hist, sigma):
    g = GraphSummary.from_histogram(hist)
    ref = naive_c_t(sigma, hist)
    assert abs(c_t(sigma, g) - ref) <= 1e-10 * max(1.0, abs(ref))


def test_c_t_derivatives_fd():
    rng = np.random.default_rng(4)
    g = summarize(rng.integers(1, 40, 500))
    for sigma in rng.uniform(-2, 0.9, 20):
        h = 1e-5
        fd1 = (c_t(sigma + h, g) - c_t(sigma - h, g)) / (2 * h)
        fd2 = (c_t_d1(sigma + h, g) - c_t_d1(sigma - h, g)) / (2 * h)
        assert c_t_d1(sigma, g) == pytest.approx(fd1, rel=1e-6)
        assert c_t_d2(sigma, g) == pytest.approx(fd2, rel=1e-6)
        assert c_t_d2(sigma, g) < 0


@pytest.mark.parametrize("fn", [c_t, c_t_d1, c_t_d2])
def test_c_t_domain(fn):
    with pytest.raises(DomainError):
        fn(1.0, GraphSummary.from_histogram({2: 1}))


@pytest.mark.parametrize("n", [1, 7, 1000])
def test_alpha_hat_all_twos(n):
    assert solve_alpha_hat(GraphSummary.from_histogram({2: n})) == pytest.approx(0.5, abs=1e-14)


def test_alpha_hat_all_ones():
    with pytest.raises(NoSolution, match=r"N_\{t,1\} = N"):
        solve_alpha_hat(GraphSummary.from_histogram({1: 10}))


def test_alpha_hat_karlin_rouault():
    g = summarize(sample_karlin_rouault_degrees(0.6, 100_000, 0))
    assert abs(solve_alpha_hat(g) - 0.6) <= 0.02


@given(mixed_histograms)
def test_alpha_hat_residual_and_uniqueness(hist):
    g = GraphSummary.from_histogram(hist)
    a = solve_alpha_hat(g)
    assert 0 < a < 1
    assert abs(alpha_equation(a, g)) <= 1e-10 * g.n
    grid = np.linspace(1e-6, 1 - 1e-6, 10_000)
    vals = np.array([alpha_equation(x, g) for x in grid[::50]])
    assert np.sum(np.diff(np.sign(vals)) != 0) == 1


@given(mixed_histograms)
def test_alpha_equation_monotone(hist):
    g = GraphSummary.from_histogram(hist)
    grid = np.linspace(0.001, 0.999, 200)
    vals = np.array([-a * c_t_d1(a, g) for a in grid])
    assert np.all(np.diff(vals) > 0)


def test_empirical_tau_star_arithmetic():
    g = GraphSummary.from_histogram({1: 999, 19001: 1})
    assert (g.n, g.d_star) == (1000, 20000)
    assert empirical_tau_star(0.5, g) == pytest.approx(0.125, rel=1e-14)


@pytest.mark.parametrize("alpha,tau", [(0.5, 1.0), (0.3, 2.0), (0.7, 0.5)])
def test_empirical_tau_star_inverts_sparsity_constant(alpha, tau):
    # D* = C N^(2/(1+alpha)) with C from tau should give tau back
    n = 10_000
    d = sparsity_constant(alpha, tau) * n ** (2 / (1 + alpha))
    val = math.sqrt(2 * d) * (alpha * n / d) ** (1 / (1 - alpha))
    assert val == pytest.approx(tau, rel=1e-10)


@pytest.mark.paper_claim
def test_empirical_tau_star_with_alpha_hat():
    from ggpgraph.levy import GGPParams
    from ggpgraph.samplers import sample_ggp_graph

    vals = []
    for seed in range(20):
        g = sample_ggp_graph(GGPParams(0.5, 1.0, 800.0), seed).summary
        vals.append(empirical_tau_star(solve_alpha_hat(g), g))
    assert abs(np.median(vals) - 1.0) <= 0.25


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_empirical_tau_star_domain(alpha):
    with pytest.raises(DomainError):
        empirical_tau_star(alpha, GraphSummary.from_histogram({2: 3}))


@given(st.floats(1.0, 2.0), st.floats(0.01, 100.0))
def test_sparsity_fit_exact(slope, c):
    n = np.array([100.0, 300.0, 1000.0, 5000.0])
    s, b = sparsity_fit(list(zip(n, c * n**slope)))
    assert s == pytest.approx(slope, abs=1e-12)
    assert b == pytest.approx(math.log(c), abs=1e-9)


def test_sparsity_fit_exact_example():
    n = np.array([10.0, 100.0, 1000.0])
    assert sparsity_fit(list(zip(n, 3 * n**1.5)))[0] == pytest.approx(1.5, abs=1e-12)


@pytest.mark.parametrize("pts", [[(10, 20), (10, 30), (10, 40)], [(10, 20), (20, 40)]])
def test_sparsity_fit_degenerate(pts):
    with pytest.raises(ValueError):
        sparsity_fit(pts)


def test_dense_diagnostics_complete_graph():
    n = 100
    g = GraphSummary.from_histogram({n - 1: n})
    ratio, logged = dense_diagnostics(g, 0.1)
    assert ratio == pytest.approx(n * (n - 1) / n**1.9, rel=1e-12)
    assert logged == pytest.approx(math.log(n - 1) / math.log(n * (n - 1)), rel=1e-12)
    assert 0.45 < logged < 0.55


def test_dense_diagnostics_all_ones():
    assert dense_diagnostics(GraphSummary.from_histogram({1: 50}))[1] == 0.0


def test_dense_ratio_decreases_on_sparse_ladder():
    from ggpgraph.levy import GGPParams
    from ggpgraph.samplers import sample_ggp_graph

    ratios = [dense_diagnostics(sample_ggp_graph(GGPParams(0.5, 1.0, t), 0).summary)[0] for t in (100, 200, 400)]
    assert ratios[0] > ratios[1] > ratios[2]


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.9])
def test_kr_pmf_first_terms(alpha):
    assert karlin_rouault_pmf(alpha, 1) == alpha
    assert karlin_rouault_pmf(alpha, 2) == pytest.approx(alpha * (1 - alpha) / 2, rel=1e-15)
    assert karlin_rouault_pmf(0.5, 2) == 0.125


@pytest.mark.parametrize("alpha", [0.05, 0.3, 0.5, 0.77, 0.95])
def test_kr_recurrence_vs_gamma(alpha):
    j = np.arange(1, 1001)
    direct = alpha * np.exp(special.gammaln(j - alpha) - special.gammaln(j + 1) - special.gammaln(1 - alpha))
    table = karlin_rouault_pmf_table(alpha, 1000)
    assert np.max(np.abs(table - direct) / direct) <= 1e-10


def test_kr_partial_sums():
    p = karlin_rouault_pmf_table(0.3, 10_000_000)
    partial = np.cumsum(p)
    assert 0.99 <= partial[-1] <= 1.0
    assert np.all(np.diff(partial[::100_000]) > 0)
    # survival identity against the closed form
    for jj in (10, 1000, 1_000_000):
        assert 1 - partial[jj - 1] == pytest.approx(math.exp(karlin_rouault_log_survival(0.3, jj)), rel=1e-6)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_kr_tail_power_law(alpha):
    j = 100_000
    assert karlin_rouault_pmf(alpha, j) * j ** (1 + alpha) == pytest.approx(alpha / math.gamma(1 - alpha), rel=0.05)


@pytest.mark.parametrize("alpha,j", [(0.0, 1), (1.0, 1), (0.5, 0)])
def test_kr_domain(alpha, j):
    with pytest.raises(DomainError):
        karlin_rouault_pmf(alpha, j)
