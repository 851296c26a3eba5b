"""Ground-truth numerics: 1d spectral gap, exact 1d W1, curvature energy.

The spectral gap of the weighted Dirichlet form E(f) = int f'^2 dmu on the
grid is the reference every closed-form Poincare bound is judged against:
C_P(true) = 1/lambda_1.  The discretisation is the standard three-point
scheme in similarity-transformed (symmetric tridiagonal) form, so the zero
mode is represented exactly and the gap converges at second order in the
mesh, which a Richardson extrapolation against the half-resolution grid both
accelerates and certifies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .potential_measure import (
    GridMeasure,
    Potential,
    ScalarField,
    build_grid_measure,
)

__all__ = [
    "SpectralResult",
    "spectral_gap_1d",
    "w1_exact_1d",
    "gamma2_integral_margin",
]

_trapz = getattr(np, "trapezoid", np.trapz)


@dataclass(frozen=True)
class SpectralResult:
    """Spectral gap of the overdamped generator on a grid.

    ``lambda1`` is the finest-grid gap and ``cp_true`` its reciprocal;
    ``richardson_estimate`` combines it with the half-resolution gap,
    and ``converged`` records whether the two agree to 1%.
    """

    lambda1: float
    cp_true: float
    resolution: int
    richardson_estimate: float
    converged: bool
    eigenfunction: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        assert self.lambda1 > 0.0, f"nonpositive spectral gap {self.lambda1}"
        assert math.isfinite(self.richardson_estimate)


def _gap_on_grid(
    m: GridMeasure,
    potential: Potential,
    want_vector: bool,
) -> tuple[float, Optional[np.ndarray]]:
    """Smallest nonzero eigenvalue of the weighted Neumann Laplacian."""
    x = m.axes[0]
    n = x.size
    vals = np.asarray(potential.value(m.nodes), dtype=float)
    v_min = float(vals.min())
    dens = np.exp(-(vals - v_min))

    dx = np.diff(x)
    mids = (x[:-1] + x[1:]) / 2.0
    v_mid = np.asarray(potential.value(mids[:, None]), dtype=float)
    c = np.exp(-(v_mid - v_min)) / dx  # conductances of the Dirichlet form

    # Lumped mass from the same trapezoid rule as the measure itself.
    mass = np.zeros(n)
    mass[:-1] += dx / 2.0
    mass[1:] += dx / 2.0
    mass *= dens

    inv_sqrt = 1.0 / np.sqrt(mass)
    diag = np.zeros(n)
    diag[:-1] += c
    diag[1:] += c
    diag *= inv_sqrt * inv_sqrt
    off = -c * inv_sqrt[:-1] * inv_sqrt[1:]

    if want_vector:
        w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 1))
    else:
        w = eigh_tridiagonal(diag, off, select="i", select_range=(0, 1),
                             eigvals_only=True)
        v = None
    lam0, lam1 = float(w[0]), float(w[1])
    # The zero mode is exact in exact arithmetic; rounding through the
    # similarity transform grows with the density's dynamic range, so the
    # gate only needs to catch structural assembly errors.
    assert abs(lam0) <= 1e-6 * max(1.0, lam1), (
        f"zero mode not resolved: lambda0 = {lam0}"
    )
    assert lam1 > 0.0, f"spectral gap {lam1} not positive"
    if v is None:
        return lam1, None
    f1 = inv_sqrt * v[:, 1]
    # Fix the sign and the mu-normalisation for downstream use.
    norm = math.sqrt(float(np.dot(m.weights, f1 * f1)))
    f1 = f1 / norm
    if f1[np.argmax(np.abs(f1))] < 0:
        f1 = -f1
    return lam1, f1


def spectral_gap_1d(
    m: GridMeasure,
    potential: Potential,
    return_eigenfunction: bool = False,
) -> SpectralResult:
    """Spectral gap lambda_1 of L = d^2/dx^2 - V' d/dx on the grid measure.

    The half-resolution grid is rebuilt from the potential (tail checking
    already happened on the fine grid) and a Richardson step
    lam_R = lam_f + (lam_f - lam_c) / 3 removes the leading O(dx^2) error.
    """
    if m.dim != 1:
        raise ValueError("spectral gap solver is one-dimensional")
    lam_fine, vec = _gap_on_grid(m, potential, return_eigenfunction)

    res = m.axes[0].size
    coarse_res = max(res // 2, 16)
    m_coarse = build_grid_measure(potential, coarse_res, tail_threshold=math.inf)
    lam_coarse, _ = _gap_on_grid(m_coarse, potential, False)

    richardson = lam_fine + (lam_fine - lam_coarse) / 3.0
    converged = abs(richardson - lam_fine) <= 0.01 * lam_fine
    return SpectralResult(
        lambda1=lam_fine,
        cp_true=1.0 / lam_fine,
        resolution=res,
        richardson_estimate=richardson,
        converged=converged,
        eigenfunction=vec,
    )


def w1_exact_1d(x: np.ndarray, cdf_a: np.ndarray, cdf_b: np.ndarray) -> float:
    """W1 distance between two 1d laws given their CDFs on a common grid.

    W1 = int |F_a - F_b| dx by the quantile representation.  Both CDF arrays
    must be nondecreasing (to roundoff) from ~0 to ~1.
    """
    x = np.asarray(x, dtype=float)
    fa = np.asarray(cdf_a, dtype=float)
    fb = np.asarray(cdf_b, dtype=float)
    if not (x.shape == fa.shape == fb.shape) or x.ndim != 1:
        raise ValueError("grid and CDFs must be matching 1d arrays")
    if np.any(np.diff(x) <= 0.0):
        raise ValueError("grid must be strictly increasing")
    for name, f in (("cdf_a", fa), ("cdf_b", fb)):
        if np.any(np.diff(f) < -1e-12):
            raise ValueError(f"{name} is not nondecreasing")
        if not (-1e-9 <= f[0] and f[-1] <= 1.0 + 1e-9):
            raise ValueError(f"{name} values leave [0, 1]")
    return float(_trapz(np.abs(fa - fb), x))


def gamma2_integral_margin(
    m: GridMeasure,
    potential: Potential,
    f: ScalarField,
    C: float,
) -> float:
    """Integrated curvature-energy margin for a test function.

    Returns mu(|Hess f|_HS^2) + mu(<grad f, Hess V grad f>) - C mu(|grad f|^2);
    nonnegativity of this margin for all smooth f at level C is equivalent to
    C_P <= 1/C, and the margin vanishes at the spectral gap's eigenfunction.
    """
    if f.gradient is None or f.hessian is None:
        raise ValueError("test function needs gradient and hessian")
    grad = np.asarray(f.gradient(m.nodes), dtype=float)
    hess_f = np.asarray(f.hessian(m.nodes), dtype=float)
    hess_v = np.asarray(potential.hessian(m.nodes), dtype=float)
    if grad.ndim == 1:
        grad = grad[:, None]
    if hess_f.ndim == 1:
        hess_f = hess_f[:, None, None]
    hs = np.sum(hess_f * hess_f, axis=(1, 2))
    quad = np.einsum("ni,nij,nj->n", grad, hess_v, grad)
    energy = np.sum(grad * grad, axis=1)
    return (
        m.expectation(hs)
        + m.expectation(quad)
        - C * m.expectation(energy)
    )
