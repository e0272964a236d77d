import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from ggpgraph.graphstats import GraphSummary, NoSolution
from ggpgraph.inference import (
    FitOptions,
    PremiseError,
    PriorSpec,
    assumption1_check,
    credible_interval,
    default_prior,
    fit_mle,
    grid_posterior_sigma,
    hessian_fd,
    hessian_qloglik,
    laplace_posterior,
    qloglik_grad,
    qloglik_hessian,
    s_star,
    zeta_gradient,
)
from ggpgraph.levy import DomainError, GGPParams
from ggpgraph.likelihood import Params, dH_deps, dH_du, profile_psi_d1, qloglik, solve_zeta
from ggpgraph.samplers import sample_dense_er, sample_ggp_graph, sample_hollywood


@pytest.fixture(scope="module")
def fit_medium(ggp_medium):
    return fit_mle(ggp_medium)


@pytest.fixture(scope="module")
def ladder():
    return [sample_ggp_graph(GGPParams(0.5, 1.0, t), 0).summary for t in (200, 400, 800)]


# ---------------------------------------------------------------------------
# MLE


def test_fit_example(fit_medium):
    assert 0.4 < fit_medium.sigma_hat < 0.6
    assert fit_medium.interior and fit_medium.converged


def test_fit_invariants(ggp_medium, fit_medium):
    g, f = ggp_medium, fit_medium
    assert f.sigma_hat < 1 and f.tau_hat > 0 and f.s_hat > 0
    assert abs(dH_du(f.sigma_hat, f.eps_hat, f.u_hat, g)) * f.u_hat <= 1e-8 * g.d_star
    assert abs(dH_deps(f.sigma_hat, f.eps_hat, f.u_hat, g)) <= 1e-8 * g.d_star
    assert abs(profile_psi_d1(f.sigma_hat, g)) <= 1e-6 * g.n
    assert f.s_star_t == pytest.approx(f.tau_hat ** (1 - f.sigma_hat) * math.sqrt(2 * g.d_star) / 2, rel=1e-14)


def test_fit_backmap_consistent(ggp_medium, fit_medium):
    f = fit_medium
    assert solve_zeta(f.params, ggp_medium).zeta == pytest.approx(f.zeta_hat, rel=1e-9)


def test_stationarity_of_q(ggp_medium, fit_medium):
    grad = qloglik_grad(fit_medium.params, ggp_medium)
    # s-component scaled to the natural s* unit
    scaled = grad * np.array([1.0, 1.0, fit_medium.s_star_t])
    assert np.linalg.norm(scaled) <= 1e-6 * ggp_medium.d_star


def test_gradient_finite_difference(ggp_small):
    phi = Params(0.45, 0.9, 180.0)
    grad = qloglik_grad(phi, ggp_small)
    for i, h in enumerate((1e-6, 1e-6, 1e-4)):
        e = np.zeros(3)
        e[i] = h
        up = Params(*(np.array([phi.sigma, phi.tau, phi.s]) + e))
        dn = Params(*(np.array([phi.sigma, phi.tau, phi.s]) - e))
        fd = (qloglik(up, ggp_small) - qloglik(dn, ggp_small)) / (2 * h)
        assert fd == pytest.approx(grad[i], rel=1e-5, abs=1e-4)


def test_zeta_gradient_finite_difference(ggp_small):
    phi = Params(0.45, 0.9, 180.0)
    zg = zeta_gradient(phi, ggp_small)
    for i, h in enumerate((1e-6, 1e-6, 1e-4)):
        x = np.array([phi.sigma, phi.tau, phi.s])
        e = np.zeros(3)
        e[i] = h
        fd = (solve_zeta(Params(*(x + e)), ggp_small).zeta - solve_zeta(Params(*(x - e)), ggp_small).zeta) / (2 * h)
        assert fd == pytest.approx(zg[i], rel=1e-5)


def test_fit_permutation_invariant(ggp_small):
    hist = ggp_small.histogram()
    rev = GraphSummary.from_histogram(list(reversed(list(hist.items()))))
    shuffled = GraphSummary.from_dict({"histogram": [list(x) for x in np.random.default_rng(0).permutation(list(hist.items()))]})
    a, b, c = fit_mle(ggp_small), fit_mle(rev), fit_mle(shuffled)
    assert a == b == c


def test_fit_dense_er():
    g = sample_dense_er(200, 0.5, 0).summary
    f = fit_mle(g)
    assert f.sigma_hat <= 0.05 or "sigma_lo_boundary" in f.boundary_flags


def test_fit_premises():
    with pytest.raises(NoSolution, match=r"N_\{t,1\} = N"):
        fit_mle(GraphSummary.from_histogram({1: 20}))


def test_fit_hi_boundary_flag():
    g = sample_ggp_graph(GGPParams(0.9, 1.0, 200.0), 0).summary
    f = fit_mle(g, FitOptions(sigma_hi=0.6))
    assert "sigma_hi_boundary" in f.boundary_flags


# ---------------------------------------------------------------------------
# Hessian


def test_hessian_matches_fd(ggp_medium, fit_medium):
    a = hessian_qloglik(fit_medium, ggp_medium)
    f = hessian_fd(fit_medium, ggp_medium)
    assert np.max(np.abs(a - f) / np.abs(f)) <= 1e-4


def test_hessian_symmetric_pd(ggp_medium, fit_medium):
    m = hessian_qloglik(fit_medium, ggp_medium)
    raw = -qloglik_hessian(fit_medium.params, ggp_medium)
    assert np.max(np.abs(raw - raw.T)) <= 1e-9 * np.linalg.norm(raw)
    assert np.all(np.linalg.eigvalsh(m) > 0)


def test_hessian_tau_entry_leading_term(ggp_medium, fit_medium):
    f = fit_medium
    lead = f.s_hat * (1 - f.sigma_hat) * f.tau_hat ** (f.sigma_hat - 2)
    assert hessian_qloglik(f, ggp_medium)[1, 1] == pytest.approx(lead, rel=0.2)


# ---------------------------------------------------------------------------
# posterior


def test_laplace_mode_is_fit(ggp_medium, fit_medium):
    p = laplace_posterior(ggp_medium, fit=fit_medium)
    assert p.mode[0] == fit_medium.sigma_hat and p.mode[1] == fit_medium.tau_hat
    assert p.mode[2] * p.s_star_t == pytest.approx(fit_medium.s_hat, rel=1e-14)
    assert np.allclose(p.cov, p.cov.T, rtol=0, atol=0)
    assert np.all(np.linalg.eigvalsh(p.cov) > 0)


def test_laplace_rejects_boundary():
    g = sample_dense_er(100, 0.5, 0).summary
    with pytest.raises(PremiseError):
        laplace_posterior(g)


def test_posterior_json(ggp_medium, fit_medium):
    d = laplace_posterior(ggp_medium, fit=fit_medium).to_dict(0.95)
    assert {"sigma_hat", "tau_hat", "s_hat", "s_star_t", "cov", "ci", "flags"} <= set(d)
    assert set(d["ci"]) == {"sigma", "tau", "s"}
    assert len(d["cov"]) == 3


@pytest.mark.parametrize("coord", ["sigma", "tau", "s"])
def test_interval_one_sd(ggp_medium, fit_medium, coord):
    p = laplace_posterior(ggp_medium, fit=fit_medium)
    lo, hi = credible_interval(p, coord, 0.32)
    z = special.ndtri(0.84)
    assert round(z, 4) == 0.9945
    assert (hi - lo) / 2 == pytest.approx(z * p.sd(coord), rel=1e-12)


@pytest.mark.parametrize("gamma", [0.0, 1.0, -0.1])
def test_interval_domain(ggp_medium, fit_medium, gamma):
    p = laplace_posterior(ggp_medium, fit=fit_medium)
    with pytest.raises(DomainError):
        credible_interval(p, "sigma", gamma)


def test_interval_widths_shrink():
    def median_width(t):
        w = []
        for seed in range(5):
            g = sample_ggp_graph(GGPParams(0.5, 1.0, t), seed).summary
            lo, hi = credible_interval(laplace_posterior(g), "sigma", 0.05)
            w.append(hi - lo)
        return np.median(w)

    assert median_width(800) < median_width(200)


@pytest.mark.paper_claim
def test_info_scaling_exponent(ladder):
    pts = []
    for g in ladder:
        p = laplace_posterior(g)
        pts.append((p.s_star_t, np.linalg.inv(p.cov)[0, 0], p.fit.sigma_hat))
    arr = np.array(pts)
    slope = np.polyfit(np.log(arr[:, 0]), np.log(arr[:, 1]), 1)[0]
    assert np.all(np.diff(arr[:, 1]) > 0)
    assert abs(slope - (1 + arr[:, 2].mean())) <= 0.2


def test_sd_rates(ladder):
    sds = np.array([(g.n, g.d_star, laplace_posterior(g).sd("sigma"), laplace_posterior(g).sd("tau")) for g in ladder])
    e_sig = np.polyfit(np.log(sds[:, 0]), np.log(sds[:, 2]), 1)[0]
    e_tau = np.polyfit(np.log(sds[:, 1]), np.log(sds[:, 3]), 1)[0]
    assert abs(e_sig + 0.5) <= 0.15 and abs(e_tau + 0.25) <= 0.15


def test_grid_posterior_mode_flat_prior(ggp_small):
    fit = fit_mle(ggp_small)
    sd = laplace_posterior(ggp_small, fit=fit).sd("sigma")
    grid = fit.sigma_hat + sd * np.linspace(-3, 3, 13)
    w = grid_posterior_sigma(ggp_small, None, grid)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.argmax(w) == 6
    assert np.array_equal(w, grid_posterior_sigma(ggp_small, None, grid))


# ---------------------------------------------------------------------------
# prior


@given(st.floats(-5.0, 0.999), st.floats(0.01, 50.0), st.floats(0.01, 1e4))
def test_prior_finite(sigma, tau, s):
    assert math.isfinite(default_prior(Params(sigma, tau, s)))


def test_prior_normalized_per_coordinate():
    p = PriorSpec()
    base = Params(0.0, 1.0, 1.0)
    ref = p.log_density(base)
    f_sig = lambda x: math.exp(p.log_density(Params(x, 1.0, 1.0)) - ref + p.log_density(Params(0.0, 1.0, 1.0)) - p.log_density(Params(0.0, 1.0, 1.0)))
    # marginal densities: divide out the other two coordinates at their base values
    other_sig = stats.gamma.logpdf(1.0, 2, scale=0.5) + math.log(2) + stats.t.logpdf(1.0, 3)
    other_tau = stats.gamma.logpdf(1.0, 2, scale=0.5) + math.log(2) + stats.t.logpdf(1.0, 3)
    other_s = 2 * stats.gamma.logpdf(1.0, 2, scale=0.5)
    i_sig, _ = integrate.quad(lambda x: math.exp(p.log_density(Params(x, 1.0, 1.0)) - other_sig), -np.inf, 1, limit=200)
    i_tau, _ = integrate.quad(lambda x: math.exp(p.log_density(Params(0.0, x, 1.0)) - other_tau), 0, np.inf, limit=200)
    i_s, _ = integrate.quad(lambda x: math.exp(p.log_density(Params(0.0, 1.0, x)) - other_s), 0, np.inf, limit=200)
    assert f_sig(0.0) > 0
    for val in (i_sig, i_tau, i_s):
        assert val == pytest.approx(1.0, abs=1e-4)


def test_prior_student_tail():
    p = PriorSpec()
    ratio = math.exp(p.log_density(Params(0.0, 1.0, 1e3)) - p.log_density(Params(0.0, 1.0, 1e2)))
    nu = 3.0
    expected = ((1 + 1e6 / nu) / (1 + 1e4 / nu)) ** (-(nu + 1) / 2)
    assert ratio == pytest.approx(expected, rel=1e-12)


def test_prior_meta_roundtrip():
    d = PriorSpec().to_dict()
    assert d["s_half_student_df"] == 3.0 and d["tau_gamma"] == [2.0, 2.0]


# ---------------------------------------------------------------------------
# Assumption-1 check


def test_assumption1_ggp_pass():
    # heuristic verdict; majority over seeds on a ladder past the noisy t=100 rung
    verdicts = []
    for seed in range(6):
        ladder = [sample_ggp_graph(GGPParams(0.5, 1.0, t), seed).summary for t in (200, 400, 800, 1600)]
        rep = assumption1_check(ladder)
        verdicts.append(rep.passed)
        assert rep.slope == pytest.approx(4 / 3, abs=0.1)
    assert sum(verdicts) >= 4


def test_assumption1_hollywood_fail():
    ladder = [sample_hollywood(0.5, 0.0, m, 0).summary for m in (5_000, 20_000, 80_000, 320_000)]
    rep = assumption1_check(ladder)
    assert not rep.passed
    assert rep.to_dict()["verdict"] == "FAIL"
    assert abs(rep.slope - 4 / 3) > 0.3


def test_assumption1_needs_three():
    with pytest.raises(ValueError):
        assumption1_check([GraphSummary.from_histogram({2: 3})] * 2)


def test_s_star_formula():
    g = GraphSummary.from_histogram({2: 50})
    assert s_star(0.5, 4.0, g) == pytest.approx(2.0 * math.sqrt(200) / 2, rel=1e-15)
