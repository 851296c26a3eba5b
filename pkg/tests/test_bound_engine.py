import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvebound.bound_engine import (
    auxiliary_poincare_bounds,
    be_baseline,
    best_poincare,
    compare_beta_branches,
    entropic_w1_rate,
    poincare_bound,
    poincare_bound_positive_curvature,
    solve_epsilon_quadratic,
    ultrabounded_direct_bound,
    w1_rate_kappa,
    w1_rate_logconcave,
    w1_rate_positive_curvature,
    w1_rate_rho,
)
from curvebound.potential_measure import (
    CurvatureStats,
    build_grid_measure,
    make_gaussian,
)
from curvebound.wi_certificates import WICertificate, from_poincare


def stats(rho0, mean, osc, lip=None, median=None, cost="hamming"):
    return CurvatureStats(rho0=rho0, mean=mean, osc=osc,
                          lip=osc if lip is None else lip,
                          median=mean if median is None else median,
                          cost_kind=cost)


def test_baseline_pair():
    poin, ls = be_baseline(2.0)
    assert poin.valid and poin.cp_bound == 0.5
    assert ls.valid and ls.cp_bound == 1.0
    assert any("log-Sobolev" in n for n in ls.notes)
    poin0, ls0 = be_baseline(0.0)
    assert not poin0.valid and not ls0.valid


def test_quadratic_solver_frozen_root():
    sol = solve_epsilon_quadratic(1.0, 0.0, 1.0, 1.0, 2.0)
    assert sol["eta"] == pytest.approx(2.0 - math.sqrt(3.0), rel=1e-14)
    assert sol["eps"] == pytest.approx(2.0 - math.sqrt(3.0), rel=1e-14)
    assert abs(sol["h_residual"]) <= 1e-10


def test_quadratic_solver_degenerate_and_infeasible():
    sol = solve_epsilon_quadratic(1.5, 1.5, 0.0, 1.0, 2.0)
    assert sol["eta"] == 1.5 and sol["eps"] == 1.0
    # h(0) = mu^2 + a C g0 |g|^2 <= 0 kills existence
    assert solve_epsilon_quadratic(0.5, -1.0, 1.0, 1.0, 2.0) is None
    assert solve_epsilon_quadratic(-0.5, -1.0, 1.0, 1.0, 2.0) is None


@given(mean=st.floats(0.05, 10.0), gap=st.floats(0.0, 5.0),
       norm=st.floats(1e-6, 10.0), c=st.floats(0.01, 50.0),
       a=st.sampled_from([1.0, 2.0]))
def test_quadratic_solver_properties(mean, gap, norm, c, a):
    lower = mean - gap
    sol = solve_epsilon_quadratic(mean, lower, norm, c, a)
    if sol is None:
        # only possible when h(0) <= 0
        assert mean * mean + a * c * lower * norm * norm <= 1e-9
        return
    eta, eps = sol["eta"], sol["eps"]
    assert 0.0 < eps <= 1.0 + 1e-12
    assert abs(sol["h_residual"]) <= 1e-10 * max(
        1.0, mean * mean + a * c * abs(lower) * norm * norm)
    d, s = sol["forms"]["direct"], sol["forms"]["shifted"]
    assert abs(d - s) <= 1e-12 * max(1.0, abs(d))
    # eta never exceeds the drift mean and never undercuts the floor
    assert eta <= mean + 1e-12
    assert eta >= lower - 1e-12


def test_poincare_alpha_star_frozen():
    s = stats(0.5, 1.0, 0.5)
    rep = poincare_bound(s, WICertificate("hamming", 1.0), "alpha_star")
    assert rep.valid
    assert rep.cp_bound == pytest.approx(8.0 / 7.0, rel=1e-14)
    assert rep.r == 2.0
    assert rep.branch == "poincare_alpha_star"


def test_poincare_alpha_star_precondition():
    s = stats(0.0, 0.1, 1.0)
    rep = poincare_bound(s, WICertificate("hamming", 1.0), "alpha_star")
    assert not rep.valid
    assert rep.reason


def test_poincare_cost_mismatch_raises():
    s = stats(0.5, 1.0, 0.5, cost="hamming")
    with pytest.raises(ValueError, match="cost"):
        poincare_bound(s, WICertificate("euclidean", 1.0), "alpha_star")


def test_poincare_constant_curvature_is_baseline():
    s = stats(2.0, 2.0, 0.0)
    for strat in ("alpha_star", "alpha_optimal"):
        rep = poincare_bound(s, WICertificate("hamming", 0.5), strat)
        assert rep.valid
        assert rep.cp_bound == 0.5


def test_poincare_alpha_optimal_balanced_r():
    s = stats(0.5, 1.0, 0.5)
    rep = poincare_bound(s, WICertificate("hamming", 1.0), "alpha_optimal")
    assert rep.valid
    assert rep.r == pytest.approx(2.0, rel=1e-9)
    assert rep.cp_bound == pytest.approx(1.0 / rep.epsilon, rel=1e-12)


def test_positive_curvature_frozen_values():
    s = stats(1.0, 1.2, 0.4)
    rep = poincare_bound_positive_curvature(s, "osc")
    d = 0.2 + 1.0 * 0.16
    eps = d * (1.0 - math.sqrt(1.0 - (0.2 / d) ** 2))
    assert rep.valid
    assert rep.cp_bound == pytest.approx(1.0 / (1.0 + eps), rel=1e-12)
    assert rep.cp_bound < 1.0  # strictly better than the baseline

    rep_lip = poincare_bound_positive_curvature(s, "lip")
    d2 = 0.2 + 4.0 * 0.16
    eps2 = d2 * (1.0 - math.sqrt(1.0 - (0.2 / d2) ** 2))
    assert rep_lip.cp_bound == pytest.approx(1.0 / (1.0 + eps2), rel=1e-12)

    neg = poincare_bound_positive_curvature(stats(0.0, 0.5, 1.0), "osc")
    assert not neg.valid


def test_positive_curvature_constant_case_returns_baseline():
    s = stats(3.0, 3.0, 0.0)
    rep = poincare_bound_positive_curvature(s, "osc")
    assert rep.valid
    assert rep.cp_bound == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert rep.prefactor_desc["eps_prime"] == 0.0


def test_w1_kappa_alpha_star_frozen():
    s = stats(0.75, 1.0, 0.25)
    rep = w1_rate_kappa(s, WICertificate("hamming", 1.0), "alpha_star", r=4.0)
    assert rep.valid
    assert rep.theta == pytest.approx(1.875, rel=1e-14)
    assert rep.prefactor_desc["p"] == 2.0
    assert "N^(1/r)" in rep.prefactor_desc["form"]


def test_w1_kappa_default_r_hits_lower_edge():
    # theta decreases in r, so the rate-optimal exponent sits at r = 2
    s = stats(0.75, 1.0, 0.25)
    rep = w1_rate_kappa(s, WICertificate("hamming", 1.0), "alpha_star")
    assert rep.valid
    assert rep.r == pytest.approx(2.0, rel=1e-6)
    assert rep.theta == pytest.approx(2.0 * (1.0 - 0.25 * 2.0 * 0.0625),
                                      rel=1e-6)


def test_w1_kappa_alpha_optimal_balanced():
    s = stats(0.75, 1.0, 0.25)
    rep = w1_rate_kappa(s, WICertificate("hamming", 1.0), "alpha_optimal")
    assert rep.valid
    assert rep.r == pytest.approx(2.0, rel=1e-9)
    assert rep.theta == pytest.approx(1.75, rel=1e-12)
    assert rep.epsilon == pytest.approx(0.875, rel=1e-12)


def test_w1_kappa_precondition():
    s = stats(0.0, 0.2, 1.0)
    rep = w1_rate_kappa(s, WICertificate("hamming", 1.0), "alpha_star")
    assert not rep.valid


def test_w1_rho_frozen_values():
    s = stats(0.0, 1.0, 1.0)
    rep = w1_rate_rho(s, WICertificate("hamming", 1.0), "alpha_star", r=1.0)
    assert rep.valid
    assert rep.theta == pytest.approx(0.75, rel=1e-14)
    assert rep.r == 1.0
    assert rep.prefactor_desc["conditional"]

    opt = w1_rate_rho(s, WICertificate("hamming", 1.0), "alpha_optimal")
    assert opt.valid
    assert opt.theta == pytest.approx((3.0 - math.sqrt(5.0)) / 2.0, rel=1e-12)
    assert opt.r == pytest.approx(1.0, rel=1e-9)


def test_w1_rho_numeric_prefactor():
    s = stats(0.0, 1.0, 1.0)
    rep = w1_rate_rho(s, WICertificate("hamming", 1.0), "alpha_star", r=1.0,
                      sup_density=4.0, eta=0.5)
    pf = rep.prefactor_desc
    theta = rep.theta
    # 2^{1/r} K(2 eta)^{1/(2r)} e^{(theta - rho0) eta} with r = 1
    expected = 2.0 * 4.0 ** 0.5 * math.exp((theta - 0.0) * 0.5)
    assert pf["factor"] == pytest.approx(expected, rel=1e-12)


def test_w1_positive_curvature_frozen():
    s = stats(1.0, 1.2, 0.4)
    rep = w1_rate_positive_curvature(s, "osc")
    d = 0.2 + 0.5 * 1.0 * 0.16
    eps = d * (1.0 - math.sqrt(1.0 - (0.2 / d) ** 2))
    assert rep.valid
    assert rep.theta == pytest.approx(1.0 + eps, rel=1e-12)
    assert rep.theta > s.rho0
    assert rep.r == 1.0


def test_w1_logconcave_branches():
    s = stats(0.0, 1.0, 2.0, lip=3.0)
    osc = w1_rate_logconcave(s, WICertificate("hamming", 2.0), "poincare_osc")
    assert osc.valid
    assert osc.theta == pytest.approx(min(0.5, 1.0 / 8.0), rel=1e-12)
    lip = w1_rate_logconcave(s.with_cost("euclidean"),
                             WICertificate("euclidean", 4.0), "lsi_lip")
    assert lip.theta == pytest.approx(min(0.5, 1.0 / 36.0), rel=1e-12)
    uni = w1_rate_logconcave(s, None, "universal_min", cp=2.0)
    assert uni.theta == pytest.approx(0.25 * min(1.0, 0.5), rel=1e-12)
    # strictly positive floor is not log-concave input
    bad = w1_rate_logconcave(stats(0.5, 1.0, 0.5), WICertificate("hamming", 2.0),
                             "poincare_osc")
    assert not bad.valid
    assert "positive-curvature" in bad.reason


def test_entropic_rate_frozen_values():
    s = stats(0.75, 1.0, 0.25, cost="euclidean")
    out = entropic_w1_rate(s, WICertificate("euclidean", 1.0), q=4.0,
                           eps=0.1, t=2.0, rel_entropy=math.log(2.0))
    assert out["valid"]
    assert out["p"] == pytest.approx(2.0)
    assert out["r"] == pytest.approx(4.0)
    assert out["A"] == pytest.approx(0.0625)
    alpha_arg = 0.9 / 0.25
    h1 = ((2.0 * math.log(2.0)) / (2.0 * alpha_arg ** 2)) ** 0.25 * math.exp(
        -(1.0 + 0.75 - 0.0625) * 2.0)
    assert out["H1"] == pytest.approx(h1, rel=1e-10)
    assert out["H2"] == pytest.approx(math.exp(-(1.1 - 0.0625) * 2.0),
                                      rel=1e-12)


def test_entropic_rate_index_budget():
    s = stats(0.75, 1.0, 0.25, cost="euclidean")
    # 1/p = 1 - 2/3 - 1/3 = 0 leaves no Wasserstein index
    with pytest.raises(ValueError, match="no room"):
        entropic_w1_rate(s, WICertificate("euclidean", 1.0), q=1.5,
                         eps=0.1, t=1.0, rel_entropy=0.5, r=3.0)


def test_entropic_rate_amplitude_guard():
    s = stats(0.1, 0.2, 2.0, lip=2.0, cost="euclidean")
    out = entropic_w1_rate(s, WICertificate("euclidean", 10.0), q=4.0,
                           eps=0.1, t=1.0, rel_entropy=0.5)
    assert not out["valid"]


def test_beta_crossover_sweep():
    # crossover at mu = (5a/16) C |g|^2 + g0 = 0.625 + 0.5 = 1.125
    for mu in np.linspace(0.8, 1.5, 29):
        out = compare_beta_branches(float(mu), 0.5, 1.0, 1.0, 2.0)
        if out["case"] != 4:
            continue
        direct = "beta" if out["beta"] >= out["beta_star"] else "beta_star"
        if abs(out["beta"] - out["beta_star"]) > 1e-12:
            assert out["winner"] == direct
        side = "beta" if mu <= out["crossover"] else "beta_star"
        if abs(mu - out["crossover"]) > 1e-9:
            assert out["winner"] == side


def test_beta_single_branch_cases():
    # beta* infeasible, beta feasible
    out = compare_beta_branches(0.4, 0.3, 1.0, 1.0, 2.0)
    assert out["winner"] == "beta"
    assert out["beta_star"] is None or out["beta_star"] <= 0.0
    # beta infeasible (h(0) <= 0), beta* feasible
    out2 = compare_beta_branches(1.0, -0.6, 1.0, 1.0, 2.0)
    assert out2["winner"] == "beta_star"
    # neither
    out3 = compare_beta_branches(0.3, -1.0, 1.0, 1.0, 2.0)
    assert out3["winner"] == "none"


def test_beta_frozen_case4():
    out = compare_beta_branches(1.0, 0.5, 1.0, 1.0, 2.0)
    assert out["case"] == 4
    assert out["beta_star"] == pytest.approx(0.5)
    assert out["beta"] == pytest.approx(2.0 - math.sqrt(2.0), rel=1e-12)
    assert out["crossover"] == pytest.approx(1.125)
    assert out["winner"] == "beta"


def test_auxiliary_bounds_gaussian_1d():
    p = make_gaussian(1.0, dim=1, domain_box=((-8.0, 8.0),))
    m = build_grid_measure(p, 512)
    kls, bl, lv = auxiliary_poincare_bounds(m, p, bl_constant=1.0)
    assert kls.valid
    assert kls.cp_bound == pytest.approx(4.0, rel=1e-6)
    assert kls.prefactor_desc["chain_bound_4nlambda"] == pytest.approx(
        4.0, rel=1e-6)
    assert bl.valid
    assert bl.cp_bound == pytest.approx(1.0, rel=1e-9)
    assert not lv.valid
    assert "conjectural" in lv.reason


def test_auxiliary_bounds_anisotropic_2d():
    # Hess V = diag(1, 1/4): covariance diag(1, 4), trace 5
    p = make_gaussian(1.0, dim=2, domain_box=((-8.0, 8.0), (-16.0, 16.0)))
    from dataclasses import replace

    def hess(x):
        n = len(np.atleast_2d(x))
        h = np.zeros((n, 2, 2))
        h[:, 0, 0] = 1.0
        h[:, 1, 1] = 0.25
        return h

    p = replace(
        p,
        value=lambda x: 0.5 * (np.atleast_2d(x)[:, 0] ** 2
                               + 0.25 * np.atleast_2d(x)[:, 1] ** 2),
        gradient=lambda x: np.atleast_2d(x) * np.array([1.0, 0.25]),
        hessian=hess,
        analytic_curvature=lambda x: np.full(len(np.atleast_2d(x)), 0.25),
        params={},
        kind="custom",
    )
    m = build_grid_measure(p, 256)
    kls, bl, lv = auxiliary_poincare_bounds(m, p, bl_constant=1.0)
    assert kls.cp_bound == pytest.approx(20.0, rel=1e-4)
    assert kls.prefactor_desc["lambda_star"] == pytest.approx(4.0, rel=1e-4)
    assert kls.prefactor_desc["chain_bound_4nlambda"] == pytest.approx(
        32.0, rel=1e-4)
    assert bl.cp_bound == pytest.approx(4.0, rel=1e-4)


def test_brascamp_lieb_needs_constant_and_positivity():
    p = make_gaussian(1.0, dim=1)
    m = build_grid_measure(p, 256)
    _, bl, _ = auxiliary_poincare_bounds(m, p)
    assert not bl.valid


def test_ultrabounded_frozen_value():
    val = ultrabounded_direct_bound(2.0, 1.0, 1.0, 1.0, 2.0, 2.0)
    assert val == pytest.approx(math.sqrt(2.0) * math.exp(-1.0), rel=1e-12)
    assert ultrabounded_direct_bound(1.0, 1.0, 1.0, 1.0, 2.0, 2.0) == 0.0
    with pytest.raises(ValueError):
        ultrabounded_direct_bound(2.0, 2.0, 1.0, 1.0, 2.0, 1.0)


def test_tournament_gaussian_reduces_to_baseline(gaussian_problem):
    p, m, s = gaussian_problem
    out = best_poincare(s, m=m, potential=p)
    win = out["winner"]
    assert win is not None
    assert win.cp_bound == pytest.approx(1.0, rel=1e-12)
    assert win.branch == "be_baseline"
    branches = {r.branch for r in out["reports"]}
    assert {"be_baseline", "poincare_alpha_star", "poincare_alpha_optimal",
            "positive_curvature_osc", "positive_curvature_lip",
            "kls", "brascamp_lieb"} <= branches


def test_tournament_cosine_improves_and_converges(cosine_problem):
    p, m, s = cosine_problem
    out = best_poincare(s)
    win = out["winner"]
    assert win is not None
    assert win.cp_bound < 1.0 / s.rho0 - 1e-3
    traj = [it["cp_bound"] for it in out["iterations"]]
    assert all(b <= a + 1e-12 for a, b in zip(traj, traj[1:]))
    # audit rows carry every branch of the final round
    assert len(out["audit"]) == len(out["reports"])
    for row in out["audit"]:
        assert set(row) == {"branch", "valid", "theta_or_cp", "epsilon",
                            "r", "reason"}


def test_tournament_accepts_user_certificates(cosine_problem):
    _, _, s = cosine_problem
    free = best_poincare(s)["winner"].cp_bound
    helped = best_poincare(s, [from_poincare(1.1)])["winner"].cp_bound
    assert helped <= free + 1e-12
    assert helped < 1.0 / s.rho0


def test_report_serialisation_roundtrip(gaussian_problem):
    _, _, s = gaussian_problem
    rep = poincare_bound_positive_curvature(s, "osc")
    d = rep.to_dict()
    assert d["branch"] == "positive_curvature_osc"
    assert isinstance(d["prefactor_desc"], dict)
    row = rep.csv_row()
    assert row["theta_or_cp"] == rep.cp_bound
