"""Closed-form Poincare and W1-contraction bounds from curvature statistics.

Every bound here combines a :class:`CurvatureStats` summary with a quadratic
certificate alpha(s) = s^2 / C and comes in two flavours: a Legendre-transform
route (exponent cost alpha*(r ||g||) / r at a caller-chosen index r) and an
optimally balanced route where epsilon solves a quadratic so the two decay
regimes of the split Laplace bound match.  ``best_poincare`` runs the branch
tournament and re-feeds its own winner as a certificate until the bound stops
moving.

All formulas degrade gracefully for constant curvature fields: the seminorm
vanishes and every branch collapses to the baseline 1/rho0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .potential_measure import (
    CurvatureStats,
    GridMeasure,
    Potential,
    curvature_values,
)
from .wi_certificates import WICertificate, from_logsobolev, from_poincare

__all__ = [
    "BoundReport",
    "be_baseline",
    "solve_epsilon_quadratic",
    "poincare_bound",
    "poincare_bound_positive_curvature",
    "w1_rate_kappa",
    "w1_rate_rho",
    "w1_rate_positive_curvature",
    "w1_rate_logconcave",
    "entropic_w1_rate",
    "compare_beta_branches",
    "auxiliary_poincare_bounds",
    "ultrabounded_direct_bound",
    "best_poincare",
    "BRANCH_ORDER",
]

# Tournament evaluation order; ties in the bound value go to the earlier entry.
BRANCH_ORDER = (
    "be_baseline",
    "alpha_star",
    "alpha_optimal",
    "positive_curvature_osc",
    "positive_curvature_lip",
    "kls",
    "brascamp_lieb",
)

R_EDGE_TOL = 1e-9  # balanced solutions sit exactly on r = 2; accept to roundoff


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one bound branch.

    ``cp_bound`` holds the Poincare bound for kind "poincare" and the
    log-Sobolev constant for kind "logsobolev"; ``theta`` holds contraction
    rates for the W1 kinds.  Invalid reports keep the inputs echo and a
    human-readable reason but no numbers.
    """

    kind: str
    branch: str
    valid: bool
    reason: str = ""
    theta: Optional[float] = None
    cp_bound: Optional[float] = None
    epsilon: Optional[float] = None
    r: Optional[float] = None
    prefactor_desc: dict = field(default_factory=dict)
    inputs_echo: dict = field(default_factory=dict)
    notes: tuple = ()

    def __post_init__(self) -> None:
        if self.valid:
            for name, v in (("theta", self.theta), ("cp_bound", self.cp_bound)):
                if v is not None:
                    assert math.isfinite(v), f"{name} not finite on valid report"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "branch": self.branch,
            "valid": self.valid,
            "reason": self.reason,
            "theta": self.theta,
            "cp_bound": self.cp_bound,
            "epsilon": self.epsilon,
            "r": self.r,
            "prefactor_desc": dict(self.prefactor_desc),
            "inputs_echo": dict(self.inputs_echo),
            "notes": list(self.notes),
        }

    def csv_row(self) -> dict:
        value = self.cp_bound if self.kind in ("poincare", "logsobolev") else self.theta
        return {
            "branch": self.branch,
            "valid": self.valid,
            "theta_or_cp": value,
            "epsilon": self.epsilon,
            "r": self.r,
            "reason": self.reason,
        }


def _stats_echo(stats: CurvatureStats) -> dict:
    return {
        "rho0": stats.rho0,
        "mean": stats.mean,
        "osc": stats.osc,
        "lip": stats.lip,
        "median": stats.median,
        "cost_kind": stats.cost_kind,
    }


def _balance_offset(gap: float, extra: float) -> float:
    """D (1 - sqrt(1 - (gap/D)^2)) for D = gap + extra, both nonnegative.

    Evaluates both z = (gap/D)^2 and 1 - z = extra (D + gap) / D^2 from
    products, so neither the z -> 0 nor the z -> 1 regime cancels.
    """
    assert gap >= 0.0 and extra >= 0.0, (gap, extra)
    d = gap + extra
    if d == 0.0:
        return 0.0
    z = (gap / d) ** 2
    w = extra * (d + gap) / (d * d)
    return d * z / (1.0 + math.sqrt(w))


# ---------------------------------------------------------------------------
# baseline


def be_baseline(rho0: float) -> tuple[BoundReport, BoundReport]:
    """Baseline constants from a positive curvature floor.

    A pointwise lower bound rho >= rho0 > 0 gives C_P <= 1/rho0 and
    C_LS <= 2/rho0.  Nonpositive floors give no information here.
    """
    echo = {"rho0": rho0}
    if rho0 > 0.0:
        cp = BoundReport(
            kind="poincare", branch="be_baseline", valid=True,
            cp_bound=1.0 / rho0, inputs_echo=echo,
        )
        cls_ = BoundReport(
            kind="logsobolev", branch="be_baseline", valid=True,
            cp_bound=2.0 / rho0, inputs_echo=echo,
            notes=("value is a log-Sobolev constant",),
        )
        return cp, cls_
    reason = f"curvature floor {rho0} is not positive"
    return (
        BoundReport(kind="poincare", branch="be_baseline", valid=False,
                    reason=reason, inputs_echo=echo),
        BoundReport(kind="logsobolev", branch="be_baseline", valid=False,
                    reason=reason, inputs_echo=echo),
    )


# ---------------------------------------------------------------------------
# the balancing quadratic


def solve_epsilon_quadratic(
    mean: float,
    lower_bound: float,
    norm_c: float,
    C: float,
    a: float,
) -> Optional[dict]:
    """Balanced epsilon for the two-regime Laplace bound.

    Solves a C (eps mean - g0) ||g||^2 = (1 - eps)^2 mean^2 for eps in
    (0, 1).  In eta = eps * mean this is the quadratic
    h(eta) = eta^2 - eta (2 mean + a C ||g||^2) + (mean^2 + a C g0 ||g||^2),
    whose smaller root is the balance point; a solution exists iff h(0) > 0.
    Returns {"eta", "eps", "h_residual", "forms"} or None when no balanced
    epsilon exists.  A vanishing seminorm returns the degenerate limit
    eps -> 1, eta = mean.
    """
    if not (math.isfinite(mean) and math.isfinite(lower_bound)):
        raise ValueError("mean and lower_bound must be finite")
    if not (norm_c >= 0.0 and math.isfinite(norm_c)):
        raise ValueError(f"seminorm must be nonnegative finite, got {norm_c}")
    if not (C > 0.0 and math.isfinite(C)):
        raise ValueError(f"certificate constant must be positive, got {C}")
    if not (a > 0.0 and math.isfinite(a)):
        raise ValueError(f"regime weight must be positive, got {a}")
    tol = 1e-9 * max(1.0, abs(mean), abs(lower_bound))
    if lower_bound > mean + tol:
        raise ValueError(
            f"pointwise lower bound {lower_bound} exceeds mean {mean}"
        )
    if mean <= 0.0:
        return None  # eta = eps * mean cannot be positive
    if norm_c == 0.0:
        return {"eta": mean, "eps": 1.0, "h_residual": 0.0,
                "forms": {"direct": mean, "shifted": mean}}

    acn = a * C * norm_c * norm_c
    B = 2.0 * mean + acn
    h0 = mean * mean + acn * lower_bound
    if h0 <= 0.0:
        return None
    # Expanded discriminant: B^2 - 4 h0 = a C ||g||^2 (4 (mean - g0) + a C ||g||^2).
    # The subtracted form cancels catastrophically when g0 is close to mean.
    disc = acn * (4.0 * max(mean - lower_bound, 0.0) + acn)
    eta = 2.0 * h0 / (B + math.sqrt(disc))  # smaller root, cancellation-free

    gap = max(mean - lower_bound, 0.0)
    eta_shifted = lower_bound + _balance_offset(gap, 0.5 * acn)
    agree = abs(eta - eta_shifted) <= 1e-10 * max(1.0, abs(eta))
    assert agree, f"closed forms disagree: {eta} vs {eta_shifted}"

    h_res = eta * eta - eta * B + h0
    assert abs(h_res) <= 1e-10 * max(1.0, abs(h0)), (
        f"quadratic residual {h_res} too large"
    )
    eps = eta / mean
    assert 0.0 < eps <= 1.0 + 1e-12, f"balanced eps {eps} outside (0, 1]"
    return {
        "eta": eta,
        "eps": min(eps, 1.0),
        "h_residual": h_res,
        "forms": {"direct": eta, "shifted": eta_shifted},
    }


# ---------------------------------------------------------------------------
# Poincare bounds


def _check_cost(stats: CurvatureStats, cert: WICertificate) -> None:
    if stats.cost_kind != cert.cost_kind:
        raise ValueError(
            f"cost mismatch: stats use {stats.cost_kind}, "
            f"certificate uses {cert.cost_kind}"
        )


def poincare_bound(
    stats: CurvatureStats,
    cert: WICertificate,
    strategy: str = "alpha_optimal",
) -> BoundReport:
    """Poincare bound from mean curvature and a certificate.

    "alpha_star": C_P <= 1 / (mu(rho) - C ||rho||^2 / 2), the Legendre route
    at index r = 2.  "alpha_optimal": C_P <= 1 / (eps mu(rho)) at the
    balanced epsilon (a = 2); its admissibility index r(eps) equals 2 by
    construction.  For constant curvature both reduce to 1/rho0.
    """
    if strategy not in ("alpha_star", "alpha_optimal"):
        raise ValueError(f"unknown strategy {strategy!r}")
    _check_cost(stats, cert)
    mean, rho0, norm = stats.mean, stats.rho0, stats.norm_c
    C = cert.constant_C
    echo = {**_stats_echo(stats), "C": C, "strategy": strategy}
    branch = f"poincare_{strategy}"

    if norm == 0.0:
        if rho0 > 0.0:
            return BoundReport(
                kind="poincare", branch=branch, valid=True,
                cp_bound=1.0 / rho0, inputs_echo=echo,
                reason="constant curvature: reduces to the baseline",
            )
        return BoundReport(
            kind="poincare", branch=branch, valid=False,
            reason="constant nonpositive curvature", inputs_echo=echo,
        )

    if strategy == "alpha_star":
        denom = mean - 0.5 * C * norm * norm  # mu - alpha*(2||rho||)/2
        if denom <= 0.0:
            return BoundReport(
                kind="poincare", branch=branch, valid=False,
                reason=f"mean curvature {mean} does not dominate "
                       f"alpha*(2||rho||)/2 = {0.5 * C * norm * norm}",
                inputs_echo=echo, r=2.0,
            )
        return BoundReport(
            kind="poincare", branch=branch, valid=True,
            cp_bound=1.0 / denom, r=2.0, inputs_echo=echo,
        )

    sol = solve_epsilon_quadratic(mean, rho0, norm, C, a=2.0)
    if sol is None:
        return BoundReport(
            kind="poincare", branch=branch, valid=False,
            reason="no balanced epsilon: 2 rho0 + alpha(mu/||rho||) <= 0",
            inputs_echo=echo,
        )
    eta, eps = sol["eta"], sol["eps"]
    if eta > rho0:
        r_eps = _alpha(C, (1.0 - eps) * mean / norm) / (eta - rho0)
    else:
        r_eps = math.inf
    if r_eps < 2.0 * (1.0 - R_EDGE_TOL):
        return BoundReport(
            kind="poincare", branch=branch, valid=False,
            reason=f"balanced index r(eps) = {r_eps:.6g} falls below 2",
            epsilon=eps, r=r_eps, inputs_echo=echo,
        )
    notes = ()
    if stats.cost_kind == "hamming":
        notes = (
            "balance point uses the continuity convention for oscillation costs",
        )
    return BoundReport(
        kind="poincare", branch=branch, valid=True,
        cp_bound=1.0 / eta, epsilon=eps, r=r_eps,
        inputs_echo=echo, notes=notes,
    )


def _alpha(C: float, s: float) -> float:
    return s * s / C


def _positive_curvature_setup(stats: CurvatureStats, which: str) -> tuple:
    """Certificate constant and seminorm for the self-seeded branches."""
    if which not in ("osc", "lip"):
        raise ValueError(f"which must be 'osc' or 'lip', got {which!r}")
    rho0 = stats.rho0
    if which == "osc":
        return 1.0 / rho0, stats.osc  # Hamming certificate from C_P <= 1/rho0
    return 4.0 / (rho0 * rho0), stats.lip  # Euclidean from C_LS <= 2/rho0


def poincare_bound_positive_curvature(
    stats: CurvatureStats,
    which: str = "osc",
) -> BoundReport:
    """Self-seeded Poincare improvement under a positive curvature floor.

    Seeds the certificate from the baseline itself (C = 1/rho0 with
    oscillation seminorm, or C = (2/rho0)^2 with Lipschitz seminorm) and
    reports C_P <= 1 / (rho0 + eps') where
    eps' = D (1 - sqrt(1 - (mu - rho0)^2 / D^2)), D = (mu - rho0) + C ||rho||^2.
    Constant curvature gives eps' = 0 and the bound collapses to 1/rho0.
    """
    branch = f"positive_curvature_{which}"
    echo = _stats_echo(stats)
    if stats.rho0 <= 0.0:
        return BoundReport(
            kind="poincare", branch=branch, valid=False,
            reason=f"curvature floor {stats.rho0} is not positive",
            inputs_echo=echo,
        )
    C, norm = _positive_curvature_setup(stats, which)
    mean, rho0 = stats.mean, stats.rho0
    gap = mean - rho0
    if norm == 0.0:
        eps_prime = gap  # degenerate limit of the balance
    else:
        # offset against D = gap + (a/2) C ||rho||^2 with a = 2
        eps_prime = _balance_offset(gap, C * norm * norm)
        sol = solve_epsilon_quadratic(mean, rho0, norm, C, a=2.0)
        assert sol is not None  # h(0) = mean^2 + 2 C rho0 ||rho||^2 > 0 here
        assert abs((rho0 + eps_prime) - sol["eta"]) <= 1e-12 * max(1.0, sol["eta"]), (
            f"displayed form disagrees with balanced quadratic: "
            f"{rho0 + eps_prime} vs {sol['eta']}"
        )
    cp = 1.0 / (rho0 + eps_prime)
    return BoundReport(
        kind="poincare", branch=branch, valid=True,
        cp_bound=cp, epsilon=eps_prime / mean if mean > 0 else None, r=2.0,
        inputs_echo={**echo, "C": C, "norm": norm},
        prefactor_desc={"eps_prime": eps_prime},
    )


# ---------------------------------------------------------------------------
# W1 contraction rates


def _golden_section_max(
    f: Callable[[float], float], lo: float, hi: float,
    tol: float = 1e-10, max_iter: int = 200,
) -> float:
    """Argmax of a unimodal f on [lo, hi]; boundary maxima are reported at
    the boundary to within tol."""
    assert hi > lo
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a), abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    mid = (a + b) / 2.0
    candidates = [(f(x), -i, x) for i, x in enumerate((mid, lo, hi))]
    return max(candidates)[2]


def _conjugate_index(r: float) -> float:
    """p with 1/p = 1/2 - 1/r appearing in the moment prefactors."""
    if r <= 2.0:
        return math.inf
    return r / (r - 2.0)


def w1_rate_kappa(
    stats: CurvatureStats,
    cert: WICertificate,
    strategy: str = "alpha_star",
    r: Optional[float] = None,
    eps: Optional[float] = None,
) -> BoundReport:
    """W1 contraction rate from the reinforced two-point curvature kappa.

    The coupled distance contracts like exp(-int (kappa(X) + kappa(Y)) ds),
    hence the factor 2 in the rates.  "alpha_star" gives
    theta = 2 (mu(kappa) - alpha*(r ||kappa||) / r) for r > 2 with prefactor
    N^{1/r} W_p(nu, mu), p = r/(r-2).  "alpha_optimal" gives
    theta = 2 min(eps mu, kappa_0 + alpha((1-eps) mu / ||kappa||) / r) with
    prefactor (1+N)^{1/r} W_p; its balanced solution sits exactly at r = 2.
    """
    if strategy not in ("alpha_star", "alpha_optimal"):
        raise ValueError(f"unknown strategy {strategy!r}")
    _check_cost(stats, cert)
    mean, k0, norm = stats.mean, stats.rho0, stats.norm_c
    C = cert.constant_C
    branch = f"w1_kappa_{strategy}"
    echo = {**_stats_echo(stats), "C": C, "strategy": strategy}

    if norm == 0.0:
        if mean <= 0.0:
            return BoundReport(
                kind="w1_rate", branch=branch, valid=False,
                reason="constant kappa is not positive", inputs_echo=echo,
            )
        return BoundReport(
            kind="w1_rate", branch=branch, valid=True, theta=2.0 * mean,
            reason="constant kappa: pathwise rate", inputs_echo=echo,
            prefactor_desc={"form": "W1(nu, mu)", "factor": 1.0},
        )

    if strategy == "alpha_star":
        if mean <= 0.5 * C * norm * norm:
            return BoundReport(
                kind="w1_rate", branch=branch, valid=False,
                reason=f"mean {mean} does not dominate alpha*(2||kappa||)/2 "
                       f"= {0.5 * C * norm * norm}",
                inputs_echo=echo,
            )
        r_max = 4.0 * mean / (C * norm * norm) * (1.0 - 1e-9)
        lo = 2.0 * (1.0 + 1e-9)
        if r is None:
            if r_max <= lo:
                return BoundReport(
                    kind="w1_rate", branch=branch, valid=False,
                    reason="no admissible index r > 2", inputs_echo=echo,
                )
            r = _golden_section_max(
                lambda s: 2.0 * (mean - 0.25 * C * s * norm * norm),
                lo, min(r_max, 1000.0),
            )
        if r <= 2.0:
            return BoundReport(
                kind="w1_rate", branch=branch, valid=False,
                reason=f"index r = {r} must exceed 2", r=r, inputs_echo=echo,
            )
        theta = 2.0 * (mean - 0.25 * C * r * norm * norm)
        if theta <= 0.0:
            return BoundReport(
                kind="w1_rate", branch=branch, valid=False,
                reason=f"rate {theta} not positive at r = {r}", r=r,
                inputs_echo=echo,
            )
        p = _conjugate_index(r)
        return BoundReport(
            kind="w1_rate", branch=branch, valid=True, theta=theta, r=r,
            inputs_echo=echo,
            prefactor_desc={
                "form": "N^(1/r) * W_p(nu, mu)",
                "exponent": 1.0 / r,
                "p": p if math.isfinite(p) else "inf",
            },
        )

    # alpha_optimal
    if eps is None or r is None:
        sol = solve_epsilon_quadratic(mean, k0, norm, C, a=2.0)
        if sol is None:
            return BoundReport(
                kind="w1_rate", branch=branch, valid=False,
                reason="no balanced epsilon: 2 kappa_0 + alpha(mu/||kappa||) <= 0",
                inputs_echo=echo,
            )
        eps = sol["eps"] if eps is None else eps
        if r is None:
            eta = sol["eta"]
            r = (_alpha(C, (1.0 - eps) * mean / norm) / (eta - k0)
                 if eta > k0 else math.inf)
    if not 0.0 < eps < 1.0:
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason=f"eps = {eps} outside (0, 1)", epsilon=eps, inputs_echo=echo,
        )
    if r < 2.0 * (1.0 - R_EDGE_TOL):
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason=f"index r = {r:.6g} falls below 2", epsilon=eps, r=r,
            inputs_echo=echo,
        )
    if mean <= 0.0:
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason="mean kappa not positive", inputs_echo=echo,
        )
    second = (k0 + _alpha(C, (1.0 - eps) * mean / norm) / r
              if math.isfinite(r) else k0)
    theta = 2.0 * min(eps * mean, second)
    if theta <= 0.0 or r * k0 + _alpha(C, (1.0 - eps) * mean / norm) <= 0.0:
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason="deviation regime has nonpositive rate",
            epsilon=eps, r=r, inputs_echo=echo,
        )
    p = _conjugate_index(r)
    return BoundReport(
        kind="w1_rate", branch=branch, valid=True, theta=theta,
        epsilon=eps, r=r, inputs_echo=echo,
        prefactor_desc={
            "form": "(1 + N)^(1/r) * W_p(nu, mu)",
            "exponent": 1.0 / r,
            "p": p if math.isfinite(p) else "inf",
        },
    )


def w1_rate_rho(
    stats: CurvatureStats,
    cert: WICertificate,
    strategy: str = "alpha_star",
    r: Optional[float] = None,
    eps: Optional[float] = None,
    sup_density: Optional[float] = None,
    eta: Optional[float] = None,
) -> BoundReport:
    """W1 contraction rate from curvature averaged along the coupling path.

    Here the exponent integrates rho once (no factor 2) and any index r >= 1
    is admissible.  "alpha_star": theta = mu(rho) - alpha*(r ||rho||) / r,
    default r = 1.  "alpha_optimal": theta = min(eps mu, rho0 +
    alpha((1-eps) mu / ||rho||) / r); the balanced solution has r = 1 and
    theta = eps mu.  The prefactor 2^{1/r} K(2 eta)^{1/(2r)}
    exp((theta - rho0) eta) needs the on-diagonal kernel bound
    K(2 eta) = sup_x r(2 eta, x, x); it stays symbolic unless one is given.
    """
    if strategy not in ("alpha_star", "alpha_optimal"):
        raise ValueError(f"unknown strategy {strategy!r}")
    _check_cost(stats, cert)
    mean, rho0, norm = stats.mean, stats.rho0, stats.norm_c
    C = cert.constant_C
    branch = f"w1_rho_{strategy}"
    echo = {**_stats_echo(stats), "C": C, "strategy": strategy}

    def prefactor(theta: float, r_: float) -> dict:
        out = {
            "form": "2^(1/r) * K(2 eta)^(1/(2r)) * exp((theta - rho0) eta) "
                    "* W1(nu, mu)",
            "conditional": "finite on-diagonal kernel bound K(2 eta)",
        }
        if sup_density is not None and eta is not None:
            assert eta > 0.0 and sup_density > 0.0
            out["factor"] = (
                2.0 ** (1.0 / r_) * sup_density ** (1.0 / (2.0 * r_))
                * math.exp((theta - rho0) * eta)
            )
            out["eta"] = eta
        return out

    if norm == 0.0:
        if mean <= 0.0:
            return BoundReport(
                kind="w1_rate", branch=branch, valid=False,
                reason="constant rho is not positive", inputs_echo=echo,
            )
        return BoundReport(
            kind="w1_rate", branch=branch, valid=True, theta=mean, r=1.0,
            reason="constant rho: pathwise rate", inputs_echo=echo,
            prefactor_desc=prefactor(mean, 1.0),
        )

    if strategy == "alpha_star":
        if r is None:
            r = 1.0  # rate is decreasing in r, so the smallest index wins
        if r < 1.0:
            return BoundReport(
                kind="w1_rate", branch=branch, valid=False,
                reason=f"index r = {r} must be at least 1", r=r,
                inputs_echo=echo,
            )
        theta = mean - 0.25 * C * r * norm * norm
        if theta <= 0.0:
            return BoundReport(
                kind="w1_rate", branch=branch, valid=False,
                reason=f"mean {mean} does not dominate alpha*(r||rho||)/r "
                       f"= {0.25 * C * r * norm * norm}",
                r=r, inputs_echo=echo,
            )
        return BoundReport(
            kind="w1_rate", branch=branch, valid=True, theta=theta, r=r,
            inputs_echo=echo, prefactor_desc=prefactor(theta, r),
        )

    # alpha_optimal
    if eps is None or r is None:
        sol = solve_epsilon_quadratic(mean, rho0, norm, C, a=1.0)
        if sol is None:
            return BoundReport(
                kind="w1_rate", branch=branch, valid=False,
                reason="no balanced epsilon: rho0 + alpha(mu/||rho||) <= 0",
                inputs_echo=echo,
            )
        eps = sol["eps"] if eps is None else eps
        if r is None:
            eta_bal = sol["eta"]
            r = (_alpha(C, (1.0 - eps) * mean / norm) / (eta_bal - rho0)
                 if eta_bal > rho0 else math.inf)
            r = max(r, 1.0) if math.isfinite(r) else r
    if not 0.0 < eps < 1.0:
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason=f"eps = {eps} outside (0, 1)", epsilon=eps, inputs_echo=echo,
        )
    if r < 1.0 * (1.0 - R_EDGE_TOL):
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason=f"index r = {r:.6g} falls below 1", epsilon=eps, r=r,
            inputs_echo=echo,
        )
    if mean <= 0.0:
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason="mean rho not positive", inputs_echo=echo,
        )
    second = (rho0 + _alpha(C, (1.0 - eps) * mean / norm) / r
              if math.isfinite(r) else rho0)
    theta = min(eps * mean, second)
    if theta <= 0.0:
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason="deviation regime has nonpositive rate",
            epsilon=eps, r=r, inputs_echo=echo,
        )
    return BoundReport(
        kind="w1_rate", branch=branch, valid=True, theta=theta,
        epsilon=eps, r=r, inputs_echo=echo,
        prefactor_desc=prefactor(theta, r if math.isfinite(r) else 1.0),
    )


def w1_rate_positive_curvature(
    stats: CurvatureStats,
    which: str = "osc",
) -> BoundReport:
    """Improved W1 rate under a positive curvature floor.

    Self-seeded like the Poincare analogue but with a = 1:
    theta = rho0 + D (1 - sqrt(1 - (mu - rho0)^2 / D^2)) with
    D = (mu - rho0) + C ||rho||^2 / 2, C = 1/rho0 (oscillation) or
    C = 4/rho0^2 (Lipschitz).  Prefactor 2 K(2 eta)^{1/2}
    exp((theta - rho0) eta) on W1(nu, mu).
    """
    branch = f"w1_positive_curvature_{which}"
    echo = _stats_echo(stats)
    if stats.rho0 <= 0.0:
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason=f"curvature floor {stats.rho0} is not positive",
            inputs_echo=echo,
        )
    C, norm = _positive_curvature_setup(stats, which)
    mean, rho0 = stats.mean, stats.rho0
    gap = mean - rho0
    if norm == 0.0:
        eps_prime = gap
    else:
        # offset against D = gap + (a/2) C ||rho||^2 with a = 1
        eps_prime = _balance_offset(gap, 0.5 * C * norm * norm)
        sol = solve_epsilon_quadratic(mean, rho0, norm, C, a=1.0)
        assert sol is not None
        assert abs((rho0 + eps_prime) - sol["eta"]) <= 1e-12 * max(1.0, sol["eta"])
    theta = rho0 + eps_prime
    return BoundReport(
        kind="w1_rate", branch=branch, valid=True, theta=theta, r=1.0,
        epsilon=eps_prime / mean if mean > 0 else None,
        inputs_echo={**echo, "C": C, "norm": norm},
        prefactor_desc={
            "form": "2 * K(2 eta)^(1/2) * exp((theta - rho0) eta) * W1(nu, mu)",
            "conditional": "finite on-diagonal kernel bound K(2 eta)",
        },
    )


def w1_rate_logconcave(
    stats: CurvatureStats,
    cert: Optional[WICertificate] = None,
    which: str = "poincare_osc",
    cp: Optional[float] = None,
) -> BoundReport:
    """W1 rates for log-concave measures (curvature floor exactly zero).

    "lsi_lip": theta = min(mu/2, mu^2 / (lip^2 C_LS^2)) from a Euclidean
    certificate.  "poincare_osc": theta = min(mu/2, mu^2 / (osc^2 C_P)) from
    a Hamming certificate.  "universal_min": theta = min(median, 1/C_P) / 4,
    which needs no seminorm at all (clip the field at its median first).
    Prefactor 2 K(2 eta)^{1/2} exp(theta eta) on W1(nu, mu).
    """
    if which not in ("lsi_lip", "poincare_osc", "universal_min"):
        raise ValueError(f"unknown variant {which!r}")
    branch = f"w1_logconcave_{which}"
    echo = _stats_echo(stats)
    tol = 1e-12 * max(1.0, abs(stats.mean))
    if stats.rho0 > tol:
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason="curvature floor is strictly positive: subtract it and "
                   "use the positive-curvature route",
            inputs_echo=echo,
        )
    if stats.rho0 < -tol:
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason=f"curvature floor {stats.rho0} is negative", inputs_echo=echo,
        )
    mean = stats.mean
    if mean <= 0.0:
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason="mean curvature not positive", inputs_echo=echo,
        )

    if which == "universal_min":
        if cp is None:
            if cert is None or cert.cost_kind != "hamming":
                raise ValueError("universal_min needs cp or a Hamming certificate")
            cp = cert.constant_C
        if stats.median <= 0.0:
            return BoundReport(
                kind="w1_rate", branch=branch, valid=False,
                reason=f"median curvature {stats.median} not positive",
                inputs_echo=echo,
            )
        theta = 0.25 * min(stats.median, 1.0 / cp)
        return BoundReport(
            kind="w1_rate", branch=branch, valid=True, theta=theta,
            inputs_echo={**echo, "cp": cp},
            prefactor_desc={
                "form": "2 * K(2 eta)^(1/2) * exp(theta eta) * W1(nu, mu)",
                "conditional": "finite on-diagonal kernel bound K(2 eta)",
            },
            notes=("seminorm-free rate via clipping at the median",),
        )

    if which == "lsi_lip":
        if cert is None or cert.cost_kind != "euclidean":
            raise ValueError("lsi_lip needs a Euclidean (log-Sobolev) certificate")
        norm = stats.lip
        denom_c = cert.constant_C  # C_LS^2
    else:
        if cert is None or cert.cost_kind != "hamming":
            raise ValueError("poincare_osc needs a Hamming (Poincare) certificate")
        norm = stats.osc
        denom_c = cert.constant_C  # C_P
    if norm == 0.0:
        theta = 0.5 * mean  # constant field: only the mean regime remains
    else:
        theta = min(0.5 * mean, mean * mean / (norm * norm * denom_c))
    if theta <= 0.0:
        return BoundReport(
            kind="w1_rate", branch=branch, valid=False,
            reason="rate not positive", inputs_echo=echo,
        )
    return BoundReport(
        kind="w1_rate", branch=branch, valid=True, theta=theta,
        inputs_echo={**echo, "C": denom_c},
        prefactor_desc={
            "form": "2 * K(2 eta)^(1/2) * exp(theta eta) * W1(nu, mu)",
            "conditional": "finite on-diagonal kernel bound K(2 eta)",
        },
    )


def entropic_w1_rate(
    stats: CurvatureStats,
    cert: WICertificate,
    q: float,
    eps: float,
    t: float,
    rel_entropy: float,
    r: Optional[float] = None,
) -> dict:
    """Finite-time W1 bound from relative entropy of the initial law.

    With indices 1/p + 1/q + 1/r = 1 and A = C q ||kappa||^2 / 4,
    W1(law_t, mu) <= W_p(nu, mu) * (H1 + H2) where
    H1 = ((ln 2 + H) / (t * alpha((1-eps) mu / ||kappa||)))^{1/r}
         * exp(-(mu + kappa_0 - A) t)   and
    H2 = exp(-((1+eps) mu - A) t).
    Needs A <= mu + kappa_0 and (1-eps) mu > A.
    """
    _check_cost(stats, cert)
    if not q > 1.0:
        raise ValueError(f"index q must exceed 1, got {q}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if t <= 0.0:
        raise ValueError(f"time must be positive, got {t}")
    if rel_entropy < 0.0:
        raise ValueError(f"relative entropy must be nonnegative, got {rel_entropy}")
    if r is None:
        r = q
    if not r > 1.0:
        raise ValueError(f"index r must exceed 1, got {r}")
    inv_p = 1.0 - 1.0 / q - 1.0 / r
    # 1/q + 1/r = 1 lands at rounding-noise level, not at a usable index
    if inv_p <= 1e-12:
        raise ValueError(f"indices q = {q}, r = {r} leave no room for p")
    p = 1.0 / inv_p

    mean, k0, norm = stats.mean, stats.rho0, stats.norm_c
    C = cert.constant_C
    A = 0.25 * C * q * norm * norm
    out = {
        "p": p, "q": q, "r": r, "A": A, "t": t,
        "valid": True, "reason": "",
        "notes": [
            "deviation rate uses alpha((1-eps) mu / ||kappa||); the compact "
            "display drops the mean from this argument",
            "index identity reads 1/p + 1/q + 1/r = 1",
        ],
    }
    if mean <= 0.0:
        out.update(valid=False, reason="mean kappa not positive",
                   H1=None, H2=None, total_factor=None)
        return out
    if A > mean + k0:
        out.update(
            valid=False,
            reason=f"A = {A} exceeds mu + kappa_0 = {mean + k0}",
            H1=None, H2=None, total_factor=None,
        )
        return out
    if norm == 0.0:
        h1 = 0.0  # no deviation regime for a constant field
        h2 = math.exp(-((1.0 + eps) * mean) * t)
    else:
        if (1.0 - eps) * mean <= A:
            out.update(
                valid=False,
                reason=f"(1 - eps) mu = {(1.0 - eps) * mean} does not exceed A = {A}",
                H1=None, H2=None, total_factor=None,
            )
            return out
        dev = _alpha(C, (1.0 - eps) * mean / norm)
        h1 = ((math.log(2.0) + rel_entropy) / (t * dev)) ** (1.0 / r) \
            * math.exp(-(mean + k0 - A) * t)
        h2 = math.exp(-((1.0 + eps) * mean - A) * t)
    out.update(H1=h1, H2=h2, total_factor=h1 + h2)
    return out


# ---------------------------------------------------------------------------
# branch comparison


def compare_beta_branches(
    mean: float,
    lower_bound: float,
    norm_c: float,
    C: float,
    a: float,
) -> dict:
    """Which improved rate wins: Legendre (beta*) or balanced (beta)?

    beta* = mu - (a C / 4) ||g||^2 and beta = eps mu from the balanced
    quadratic.  Four cases by sign of beta* and of h(0) = mu^2 +
    a C g0 ||g||^2; when both exist, beta wins iff
    mu <= (5 a / 16) C ||g||^2 + g0 (equality: either).
    """
    if norm_c == 0.0:
        val = mean if mean > 0 else None
        return {
            "case": 4 if val is not None else 1,
            "winner": "either" if val is not None else "none",
            "beta_star": val, "beta": val,
            "crossover": lower_bound,
        }
    beta_star = mean - 0.25 * a * C * norm_c * norm_c
    sol = solve_epsilon_quadratic(mean, lower_bound, norm_c, C, a)
    beta = sol["eta"] if sol is not None else None
    crossover = (5.0 * a / 16.0) * C * norm_c * norm_c + lower_bound
    star_ok = beta_star > 0.0
    bal_ok = beta is not None and beta > 0.0
    if not star_ok and not bal_ok:
        return {"case": 1, "winner": "none", "beta_star": None, "beta": None,
                "crossover": crossover}
    if not star_ok:
        return {"case": 2, "winner": "beta", "beta_star": None, "beta": beta,
                "crossover": crossover}
    if not bal_ok:
        return {"case": 3, "winner": "beta_star", "beta_star": beta_star,
                "beta": None, "crossover": crossover}
    if abs(mean - crossover) <= 1e-12 * max(1.0, abs(mean), abs(crossover)):
        winner = "either"
    elif mean <= crossover:
        winner = "beta"
    else:
        winner = "beta_star"
    return {"case": 4, "winner": winner, "beta_star": beta_star, "beta": beta,
            "crossover": crossover}


# ---------------------------------------------------------------------------
# dimension-aware extras


def auxiliary_poincare_bounds(
    m: GridMeasure,
    potential: Potential,
    bl_constant: Optional[float] = None,
) -> list[BoundReport]:
    """Variance-based and inverse-curvature Poincare bounds.

    kls_variance: C_P <= 4 Var_mu(x) (trace of the covariance), always at
    most 4 n lambda* for the top covariance eigenvalue lambda*.
    brascamp_lieb: C_P <= c * mu(1/rho) for positive pointwise curvature,
    with a caller-supplied comparability constant c.  The conjectural
    dimensional bound c n^{1/2} lambda* is echoed for context only.
    """
    nodes, w = m.nodes, m.weights
    mean_vec = w @ nodes
    centred = nodes - mean_vec
    cov = (centred * w[:, None]).T @ centred
    var = float(np.trace(cov))
    lam_star = float(np.linalg.eigvalsh(cov)[-1])
    dim = m.dim
    reports = [
        BoundReport(
            kind="poincare", branch="kls", valid=True,
            cp_bound=4.0 * var,
            inputs_echo={"variance": var, "dim": dim},
            prefactor_desc={
                "lambda_star": lam_star,
                "chain_bound_4nlambda": 4.0 * dim * lam_star,
            },
        )
    ]

    if bl_constant is None:
        reports.append(BoundReport(
            kind="poincare", branch="brascamp_lieb", valid=False,
            reason="comparability constant not supplied",
        ))
    else:
        if bl_constant <= 0.0:
            raise ValueError(f"comparability constant must be positive, got {bl_constant}")
        rho = curvature_values(potential, nodes)
        if float(rho.min()) <= 0.0:
            reports.append(BoundReport(
                kind="poincare", branch="brascamp_lieb", valid=False,
                reason=f"curvature reaches {float(rho.min())} <= 0 on the grid",
            ))
        else:
            cp_bl = bl_constant * float(np.dot(w, 1.0 / rho))
            reports.append(BoundReport(
                kind="poincare", branch="brascamp_lieb", valid=True,
                cp_bound=cp_bl,
                inputs_echo={"bl_constant": bl_constant,
                             "mean_inverse_curvature": cp_bl / bl_constant},
            ))

    reports.append(BoundReport(
        kind="poincare", branch="lee_vempala", valid=False,
        reason="dimensional constant is conjectural; reported for context only",
        prefactor_desc={"form": "c * n^(1/2) * lambda_star",
                        "lambda_star": lam_star, "n": dim},
    ))
    return reports


def ultrabounded_direct_bound(
    k_eta: float,
    eta: float,
    cp: float,
    second_moment: float,
    tv: float,
    t: float,
) -> float:
    """Direct W1 decay at the exact spectral rate for ultrabounded kernels.

    W1(law_t, mu) <= sqrt(K(eta) - 1) * sqrt(mu(|x|^2)) * e^{eta / C_P}
    * sqrt(||nu - mu||_TV) * e^{-t / C_P}, valid for t > eta > 0, where
    K(eta) bounds the on-diagonal kernel sup_x r(eta, x, x).
    """
    if not t > eta > 0.0:
        raise ValueError(f"need t > eta > 0, got t = {t}, eta = {eta}")
    if not cp > 0.0:
        raise ValueError(f"Poincare constant must be positive, got {cp}")
    if second_moment < 0.0:
        raise ValueError(f"second moment must be nonnegative, got {second_moment}")
    if not 0.0 <= tv <= 2.0:
        raise ValueError(f"total variation must lie in [0, 2], got {tv}")
    if k_eta <= 1.0:
        return 0.0  # kernel bound carries no excess mass information
    return (
        math.sqrt(k_eta - 1.0) * math.sqrt(second_moment)
        * math.exp(eta / cp) * math.sqrt(tv) * math.exp(-t / cp)
    )


# ---------------------------------------------------------------------------
# tournament


def _tournament_round(
    stats: CurvatureStats,
    certs: Sequence[WICertificate],
    m: Optional[GridMeasure],
    potential: Optional[Potential],
    bl_constant: Optional[float],
) -> list[BoundReport]:
    """One pass over every Poincare branch with the given certificates."""
    reports: list[BoundReport] = []
    cp_base, _ = be_baseline(stats.rho0)
    reports.append(cp_base)

    for strategy in ("alpha_star", "alpha_optimal"):
        best: Optional[BoundReport] = None
        for cert in certs:
            rep = poincare_bound(stats.with_cost(cert.cost_kind), cert, strategy)
            if rep.valid and (best is None or not best.valid
                              or rep.cp_bound < best.cp_bound):
                best = rep
            elif best is None:
                best = rep
        if best is None:
            best = BoundReport(
                kind="poincare", branch=f"poincare_{strategy}", valid=False,
                reason="no certificate supplied",
            )
        reports.append(best)

    reports.append(poincare_bound_positive_curvature(stats, "osc"))
    reports.append(poincare_bound_positive_curvature(stats, "lip"))

    if m is not None and potential is not None:
        reports.extend(auxiliary_poincare_bounds(m, potential, bl_constant))
    else:
        reports.append(BoundReport(
            kind="poincare", branch="kls", valid=False,
            reason="grid measure not supplied"))
        reports.append(BoundReport(
            kind="poincare", branch="brascamp_lieb", valid=False,
            reason="grid measure not supplied"))
    return reports


_BRANCH_RANK = {
    "be_baseline": 0,
    "poincare_alpha_star": 1,
    "poincare_alpha_optimal": 2,
    "positive_curvature_osc": 3,
    "positive_curvature_lip": 4,
    "kls": 5,
    "brascamp_lieb": 6,
    "lee_vempala": 7,
}


def best_poincare(
    stats: CurvatureStats,
    certs: Optional[Sequence[WICertificate]] = None,
    m: Optional[GridMeasure] = None,
    potential: Optional[Potential] = None,
    bl_constant: Optional[float] = None,
    max_iters: int = 200,
    rel_tol: float = 1e-13,
) -> dict:
    """Branch tournament with self-improvement to a fixed point.

    Runs every branch, takes the smallest valid bound (ties go to the earlier
    branch in ``BRANCH_ORDER``), then feeds the winner back in as a Hamming
    certificate and repeats until the bound stops decreasing.  The returned
    audit holds the final round's reports and the per-iteration trace, so the
    winner's value is already stationary under another feedback pass.
    """
    if certs is None:
        if stats.rho0 > 0.0:
            certs = [from_poincare(1.0 / stats.rho0),
                     from_logsobolev(2.0 / stats.rho0)]
        else:
            certs = []
    certs = list(certs)

    def run(cs: Sequence[WICertificate]) -> tuple[Optional[BoundReport], list]:
        reports = _tournament_round(stats, cs, m, potential, bl_constant)
        valid = [rp for rp in reports if rp.valid and rp.cp_bound is not None]
        if not valid:
            return None, reports
        win = min(valid, key=lambda rp: (rp.cp_bound,
                                         _BRANCH_RANK.get(rp.branch, 99)))
        return win, reports

    winner, reports = run(certs)
    trace = []
    if winner is not None:
        trace.append({"iteration": 0, "branch": winner.branch,
                      "cp_bound": winner.cp_bound})
        current = winner.cp_bound
        iter_certs = certs
        for it in range(1, max_iters + 1):
            fed = [c for c in iter_certs if c.source != "tournament"]
            fed.append(WICertificate(cost_kind="hamming", constant_C=current,
                                     source="tournament"))
            nxt, nxt_reports = run(fed)
            if nxt is None:
                break
            assert nxt.cp_bound <= current * (1.0 + 1e-12), (
                "feedback made the bound worse"
            )
            moved = current - nxt.cp_bound > rel_tol * current
            winner, reports, iter_certs = nxt, nxt_reports, fed
            trace.append({"iteration": it, "branch": nxt.branch,
                          "cp_bound": nxt.cp_bound})
            current = nxt.cp_bound
            if not moved:
                break

    return {
        "winner": winner,
        "reports": reports,
        "iterations": trace,
        "audit": [rp.csv_row() for rp in reports],
    }
