"""Quadratic transport-information certificates and Laplace-type bounds.

A certificate pairs a cost structure with a rate function
alpha(s) = s^2 / C whose Legendre transform is alpha*(lam) = C lam^2 / 4.
Under Hamming cost the relevant function seminorm is the oscillation and a
Poincare constant C_P yields C = C_P; under Euclidean cost the seminorm is
the Lipschitz constant and a log-Sobolev constant C_LS yields C = C_LS^2.
Both constructions stay valid when C overshoots the optimal constant, so
certificates built from upper bounds are themselves legitimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .potential_measure import COST_KINDS, CurvatureStats

__all__ = [
    "WICertificate",
    "FunctionalStats",
    "from_poincare",
    "from_logsobolev",
    "from_curvature_stats",
    "laplace_moment_bound",
    "laplace_split_bound",
    "entropy_deviation_bound",
]


@dataclass(frozen=True)
class WICertificate:
    """Rate function alpha(s) = s^2 / constant_C under one cost structure."""

    cost_kind: str
    constant_C: float
    source: str = "user"

    def __post_init__(self) -> None:
        assert self.cost_kind in COST_KINDS, self.cost_kind
        assert self.constant_C > 0.0 and math.isfinite(self.constant_C), (
            f"certificate constant must be positive finite, got {self.constant_C}"
        )

    def alpha(self, s: float) -> float:
        """alpha(s) = s^2 / C."""
        return s * s / self.constant_C

    def alpha_star(self, lam: float) -> float:
        """Legendre transform alpha*(lam) = C lam^2 / 4."""
        return self.constant_C * lam * lam / 4.0

    def rescale(self, lam: float) -> "WICertificate":
        """Certificate constant after dilation x -> lam x.

        The quadratic constant transforms as C -> C * lam^{2 eta + 2} where
        eta is the cost homogeneity degree: Hamming costs are scale free
        (eta = 0, factor lam^2) while Euclidean-Lipschitz costs gain one
        power per argument (eta = 1, factor lam^4).
        """
        assert lam > 0.0, f"dilation factor must be positive, got {lam}"
        power = 2 if self.cost_kind == "hamming" else 4
        return replace(self, constant_C=self.constant_C * lam ** power)


def from_poincare(cp: float) -> WICertificate:
    """Hamming-cost certificate alpha(s) = s^2 / C_P from a Poincare constant."""
    if not (cp > 0.0 and math.isfinite(cp)):
        raise ValueError(f"Poincare constant must be positive finite, got {cp}")
    return WICertificate(cost_kind="hamming", constant_C=cp, source="poincare")


def from_logsobolev(cls_: float) -> WICertificate:
    """Euclidean-cost certificate alpha(s) = s^2 / C_LS^2 from a log-Sobolev constant."""
    if not (cls_ > 0.0 and math.isfinite(cls_)):
        raise ValueError(f"log-Sobolev constant must be positive finite, got {cls_}")
    return WICertificate(
        cost_kind="euclidean", constant_C=cls_ * cls_, source="logsobolev"
    )


@dataclass(frozen=True)
class FunctionalStats:
    """Summary of an integrand u needed by the Laplace bounds.

    ``lower_bound`` is a pointwise bound u >= u_0, ``mean`` is mu(u),
    ``norm_c`` the cost seminorm of u, and ``l2_prefactor`` the L^2(mu)
    density bound N of the initial law (N = 1 when starting at equilibrium).
    """

    lower_bound: float
    mean: float
    norm_c: float
    l2_prefactor: float = 1.0

    def __post_init__(self) -> None:
        assert math.isfinite(self.mean), self.mean
        assert self.norm_c >= 0.0, f"negative seminorm {self.norm_c}"
        assert self.l2_prefactor >= 1.0, (
            f"L2 density prefactor below 1: {self.l2_prefactor}"
        )
        tol = 1e-9 * max(1.0, abs(self.mean), abs(self.lower_bound))
        assert self.lower_bound <= self.mean + tol, (
            f"pointwise lower bound {self.lower_bound} exceeds mean {self.mean}"
        )


def from_curvature_stats(stats: CurvatureStats, l2_prefactor: float = 1.0) -> FunctionalStats:
    """FunctionalStats of the curvature field itself under its cost."""
    return FunctionalStats(
        lower_bound=stats.rho0,
        mean=stats.mean,
        norm_c=stats.norm_c,
        l2_prefactor=l2_prefactor,
    )


def _check_cost_compatible(cert: WICertificate, what: str) -> None:
    # FunctionalStats carries no cost tag of its own; callers pass seminorms
    # measured in the certificate's cost, so only the certificate is checked.
    assert cert.cost_kind in COST_KINDS, f"{what}: bad cost {cert.cost_kind}"


def laplace_moment_bound(
    cert: WICertificate,
    fs: FunctionalStats,
    lam: float,
    t: float,
) -> float:
    """Upper bound for E[exp(-lam * int_0^t u(X_s) ds)] started from density N.

    The deviation estimate for time averages gives
    N * exp(t * (-lam * mu(u) + alpha*(lam * ||u||_c))); a function with zero
    seminorm contributes only its mean.
    """
    _check_cost_compatible(cert, "laplace_moment_bound")
    if lam < 0.0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    if t < 0.0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if lam == 0.0 or t == 0.0:
        return fs.l2_prefactor
    if fs.norm_c == 0.0:
        return fs.l2_prefactor * math.exp(-lam * fs.mean * t)
    exponent = t * (-lam * fs.mean + cert.alpha_star(lam * fs.norm_c))
    if exponent > 700.0:
        return math.inf  # true but vacuous: past float range
    return fs.l2_prefactor * math.exp(exponent)


def laplace_split_bound(
    cert: WICertificate,
    fs: FunctionalStats,
    lam: float,
    t: float,
    eps: float,
) -> float:
    """Two-regime bound for E[exp(-lam * int_0^t u ds)], u of positive mean.

    Splitting at the event {time average of u <= (1 - eps) mu(u)} yields
    (1 + N) * max(exp(-lam eps mu(u) t),
                  exp(-t (lam u_0 + alpha((1 - eps) mu(u) / ||u||_c)))).
    """
    _check_cost_compatible(cert, "laplace_split_bound")
    if fs.mean <= 0.0:
        raise ValueError(f"mean curvature not positive: mu(u) = {fs.mean}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if lam < 0.0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    if t < 0.0:
        raise ValueError(f"time must be nonnegative, got {t}")
    pref = 1.0 + fs.l2_prefactor
    if fs.norm_c == 0.0:
        # Constant-mean regime: the deviation event is empty.
        return pref * math.exp(-lam * fs.mean * t)
    good = math.exp(-lam * eps * fs.mean * t)
    dev_rate = lam * fs.lower_bound + cert.alpha((1.0 - eps) * fs.mean / fs.norm_c)
    bad = math.exp(-t * dev_rate)
    return pref * max(good, bad)


def entropy_deviation_bound(
    cert: WICertificate,
    fs: FunctionalStats,
    rel_entropy: float,
    deviation: float,
    t: float,
) -> float:
    """Probability bound for a time-average deviation of size ``deviation``.

    P(A_t) <= (ln 2 + H) / (t * alpha(r)) where H is the relative entropy of
    the path law's initial condition and r the deviation expressed in the
    cost seminorm scale.  The right side may exceed 1; callers should clip.
    """
    _check_cost_compatible(cert, "entropy_deviation_bound")
    if rel_entropy < 0.0:
        raise ValueError(f"relative entropy must be nonnegative, got {rel_entropy}")
    if t <= 0.0:
        raise ValueError(f"time must be positive, got {t}")
    if deviation <= 0.0:
        raise ValueError(f"deviation must be positive, got {deviation}")
    return (math.log(2.0) + rel_entropy) / (t * cert.alpha(deviation))
