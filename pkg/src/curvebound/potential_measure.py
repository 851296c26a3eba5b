"""Potentials V, grid quadrature for mu = e^{-V}/Z, and curvature statistics.

Everything downstream consumes two objects built here: a :class:`GridMeasure`
(tensor-product trapezoid quadrature of the Gibbs density on a box, with a
certified bound on the mass left outside) and a :class:`CurvatureStats`
summary of the Hessian's smallest eigenvalue field rho(x) = lambda_min(Hess V).

Points are arrays with a trailing axis of length ``dim``: shape (dim,) for a
single point or (n, dim) for batches.  Values come back with the point axis
removed, gradients with shape (n, dim), Hessians with shape (n, dim, dim).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Potential",
    "GridMeasure",
    "CurvatureStats",
    "ScalarField",
    "build_grid_measure",
    "curvature_at",
    "curvature_values",
    "curvature_stats",
    "clip_curvature",
    "kappa_for_radial",
    "dilate",
    "potential_from_spec",
    "weighted_quantile",
]

COST_KINDS = ("hamming", "euclidean")

# Hessians are produced by our own closures, so asymmetry beyond roundoff
# means a coding error, not data noise.
HESSIAN_SYMMETRY_RTOL = 1e-10
ANALYTIC_CURVATURE_RTOL = 1e-8


def _as_batch(x: np.ndarray, dim: int) -> tuple[np.ndarray, bool]:
    """Coerce a point or batch of points to shape (n, dim)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1 and arr.shape[0] == dim:
        return arr[None, :], True
    if arr.ndim == 2 and arr.shape[1] == dim:
        return arr, False
    raise ValueError(f"expected shape (dim,) or (n, {dim}), got {arr.shape}")


@dataclass(frozen=True)
class Potential:
    """A smooth confining potential on a reference box.

    ``value``, ``gradient`` and ``hessian`` accept (n, dim) arrays and return
    (n,), (n, dim) and (n, dim, dim) arrays respectively.  ``domain_box`` is
    the per-axis interval ((a_1, b_1), ..., (a_d, b_d)) on which quadrature
    and statistics are taken; it is a numerical truncation, not a support
    restriction.  ``analytic_curvature`` (if given) evaluates
    lambda_min(Hess V) exactly, and ``analytic_lip`` is an exact Lipschitz
    bound for that curvature field on the box.
    """

    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    domain_box: tuple[tuple[float, float], ...]
    kind: str = "custom"  # "quadratic" | "radial_convex" | "custom"
    analytic_curvature: Optional[Callable[[np.ndarray], np.ndarray]] = None
    analytic_lip: Optional[float] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        assert self.dim >= 1, f"dim must be positive, got {self.dim}"
        assert len(self.domain_box) == self.dim, (
            f"domain_box has {len(self.domain_box)} axes for dim {self.dim}"
        )
        for a, b in self.domain_box:
            assert a < b, f"degenerate box axis [{a}, {b}]"
        assert self.kind in ("quadratic", "radial_convex", "custom"), self.kind
        if self.analytic_lip is not None:
            assert self.analytic_lip >= 0.0

    def box_half_widths(self) -> np.ndarray:
        return np.array([(b - a) / 2.0 for a, b in self.domain_box])

    def box_centers(self) -> np.ndarray:
        return np.array([(b + a) / 2.0 for a, b in self.domain_box])

    def contains(self, x: np.ndarray) -> np.ndarray:
        pts, _ = _as_batch(x, self.dim)
        lo = np.array([a for a, _ in self.domain_box])
        hi = np.array([b for _, b in self.domain_box])
        return np.all((pts >= lo) & (pts <= hi), axis=1)


@dataclass(frozen=True)
class ScalarField:
    """Test function f with optional derivatives, same array conventions."""

    value: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass(frozen=True)
class GridMeasure:
    """Normalised trapezoid quadrature of e^{-V} on the domain box.

    ``weights`` sum to one; ``log_norm`` is ln of the unnormalised mass
    (ln Z); ``tail_mass_bound`` is a conservative estimate of the mass
    fraction outside the box obtained from the boundary log-density slope.
    """

    nodes: np.ndarray
    weights: np.ndarray
    log_norm: float
    tail_mass_bound: float
    axes: tuple[np.ndarray, ...]
    shape: tuple[int, ...]

    def __post_init__(self) -> None:
        assert self.nodes.ndim == 2
        assert self.weights.shape == (self.nodes.shape[0],)
        assert np.all(self.weights >= 0.0), "negative quadrature weight"
        total = float(self.weights.sum())
        assert abs(total - 1.0) <= 1e-12, f"weights sum to {total}, not 1"

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def expectation(self, values: np.ndarray) -> float:
        """Weighted mean of nodal values: sum_i w_i values_i."""
        v = np.asarray(values, dtype=float)
        assert v.shape == self.weights.shape, (v.shape, self.weights.shape)
        return float(np.dot(self.weights, v))


@dataclass(frozen=True)
class CurvatureStats:
    """Summary of a curvature field g on the grid, under one cost structure.

    ``norm_c`` is Osc(g) for Hamming cost and the Lipschitz seminorm for
    Euclidean cost.  ``provenance`` records per-field whether the number is
    analytic or a grid estimate.
    """

    rho0: float        # pointwise lower bound min g
    mean: float        # mu(g)
    osc: float         # max g - min g
    lip: float         # Lipschitz seminorm of g on the box
    median: float      # weighted q-quantile (q recorded below)
    cost_kind: str
    quantile: float = 0.5
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        tol = 1e-9 * max(1.0, abs(self.rho0), abs(self.mean), self.osc)
        assert self.osc >= -tol, f"negative oscillation {self.osc}"
        assert self.lip >= 0.0, f"negative Lipschitz seminorm {self.lip}"
        assert self.rho0 - tol <= self.mean <= self.rho0 + self.osc + tol, (
            f"mean {self.mean} outside [{self.rho0}, {self.rho0 + self.osc}]"
        )
        assert self.rho0 - tol <= self.median <= self.rho0 + self.osc + tol
        assert self.cost_kind in COST_KINDS, self.cost_kind
        assert 0.0 < self.quantile < 1.0

    @property
    def norm_c(self) -> float:
        return self.osc if self.cost_kind == "hamming" else self.lip

    def with_cost(self, cost_kind: str) -> "CurvatureStats":
        assert cost_kind in COST_KINDS, cost_kind
        return replace(self, cost_kind=cost_kind)

    def rescale(self, lam: float) -> "CurvatureStats":
        """Stats of the curvature field after dilation x -> lam * x.

        Curvature values scale by 1/lam^2 and the Lipschitz seminorm picks up
        one more power from the argument, 1/lam^3.
        """
        assert lam > 0.0, f"dilation factor must be positive, got {lam}"
        s2 = lam * lam
        return replace(
            self,
            rho0=self.rho0 / s2,
            mean=self.mean / s2,
            osc=self.osc / s2,
            lip=self.lip / (s2 * lam),
            median=self.median / s2,
        )


# ---------------------------------------------------------------------------
# quadrature


def _trapezoid_axis_weights(axis: np.ndarray) -> np.ndarray:
    """Composite trapezoid weights for a sorted 1d node array."""
    w = np.zeros_like(axis)
    d = np.diff(axis)
    w[:-1] += d / 2.0
    w[1:] += d / 2.0
    return w


def build_grid_measure(
    potential: Potential,
    resolution: int,
    tail_threshold: float = 1e-10,
) -> GridMeasure:
    """Tensor-product trapezoid quadrature of e^{-V} over the domain box.

    The density is evaluated as e^{-(V - min V)} so that deep wells never
    overflow; the shift is restored in ``log_norm``.  The mass outside the box
    is estimated per face from the boundary log-density slope (density
    p(edge) decaying at rate s per unit length contributes ~ p(edge)/s), and
    construction fails if the resulting fraction exceeds ``tail_threshold``.
    """
    if resolution < 16:
        raise ValueError(f"resolution must be at least 16, got {resolution}")
    if potential.dim > 2:
        raise ValueError("grid quadrature supports dim <= 2 only")

    axes = tuple(
        np.linspace(a, b, resolution) for a, b in potential.domain_box
    )
    mesh = np.meshgrid(*axes, indexing="ij")
    shape = mesh[0].shape
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)

    vals = np.asarray(potential.value(nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("potential is not finite on the grid")
    v_min = float(vals.min())
    dens = np.exp(-(vals - v_min)).reshape(shape)

    axis_w = [_trapezoid_axis_weights(ax) for ax in axes]
    trap = axis_w[0]
    if potential.dim == 2:
        trap = np.outer(axis_w[0], axis_w[1])
    mass_shifted = float((trap * dens).sum())
    if not (mass_shifted > 0.0 and np.isfinite(mass_shifted)):
        raise ValueError("quadrature mass is degenerate")

    outside = _tail_mass_estimate(dens, axes, axis_w, potential.dim)
    tail_bound = outside / (mass_shifted + outside) if np.isfinite(outside) else 1.0
    if tail_bound > tail_threshold:
        raise ValueError(
            f"domain too small: estimated tail mass fraction {tail_bound:.3e} "
            f"exceeds threshold {tail_threshold:.3e}"
        )

    weights = (trap * dens).ravel() / mass_shifted
    # Renormalise away the last few ulps so the sum-to-one invariant is exact
    # enough for downstream asserts.
    weights = weights / weights.sum()
    return GridMeasure(
        nodes=nodes,
        weights=weights,
        log_norm=math.log(mass_shifted) - v_min,
        tail_mass_bound=tail_bound,
        axes=axes,
        shape=shape,
    )


def _tail_mass_estimate(
    dens: np.ndarray,
    axes: tuple[np.ndarray, ...],
    axis_w: list[np.ndarray],
    dim: int,
) -> float:
    """Estimate of the unnormalised mass outside the box.

    For each face the log-density slope between the edge node and its inward
    neighbour extrapolates the density as p(edge) * e^{-s*t}; integrating in
    t gives p(edge)/s per face node.  A non-positive slope means the density
    is not decaying at that face and the estimate is infinite.
    """
    total = 0.0
    if dim == 1:
        d = dens
        for edge, inner, dx in ((0, 1, axes[0][1] - axes[0][0]),
                                (-1, -2, axes[0][-1] - axes[0][-2])):
            if d[inner] <= 0.0 or d[edge] <= 0.0:
                continue  # underflowed to zero: face contributes nothing
            slope = (math.log(d[inner]) - math.log(d[edge])) / dx
            if slope <= 0.0:
                return math.inf
            total += d[edge] / slope
        return total

    for axis in range(2):
        other = 1 - axis
        dx_lo = axes[axis][1] - axes[axis][0]
        dx_hi = axes[axis][-1] - axes[axis][-2]
        for edge, inner, dx in ((0, 1, dx_lo), (-1, -2, dx_hi)):
            face = np.take(dens, edge, axis=axis)
            nbr = np.take(dens, inner, axis=axis)
            live = (face > 0.0) & (nbr > 0.0)
            if not live.any():
                continue
            slope = (np.log(nbr[live]) - np.log(face[live])) / dx
            if np.any(slope <= 0.0):
                return math.inf
            total += float((face[live] / slope * axis_w[other][live]).sum())
    return total


# ---------------------------------------------------------------------------
# curvature


def _check_hessians(h: np.ndarray) -> None:
    if not np.all(np.isfinite(h)):
        raise ValueError("Hessian has non-finite entries")
    scale = max(1.0, float(np.abs(h).max()))
    asym = float(np.abs(h - np.swapaxes(h, -1, -2)).max())
    if asym > HESSIAN_SYMMETRY_RTOL * scale:
        raise ValueError(f"Hessian asymmetry {asym:.3e} exceeds tolerance")


def curvature_values(
    potential: Potential,
    x: np.ndarray,
    cross_check: bool = False,
) -> np.ndarray:
    """lambda_min(Hess V) at each point of a batch.

    Uses the analytic curvature when the potential carries one; with
    ``cross_check`` the eigensolve is run anyway and must agree to
    ``ANALYTIC_CURVATURE_RTOL``.
    """
    pts, single = _as_batch(x, potential.dim)
    analytic = None
    if potential.analytic_curvature is not None:
        analytic = np.asarray(potential.analytic_curvature(pts), dtype=float)
    if analytic is None or cross_check:
        h = np.asarray(potential.hessian(pts), dtype=float)
        _check_hessians(h)
        eig = np.linalg.eigvalsh(h)[..., 0]
        if analytic is not None:
            scale = np.maximum(1.0, np.abs(analytic))
            err = np.abs(eig - analytic) / scale
            if err.max() > ANALYTIC_CURVATURE_RTOL:
                raise ValueError(
                    f"analytic curvature disagrees with eigensolve by "
                    f"{err.max():.3e} (relative)"
                )
        out = analytic if analytic is not None else eig
    else:
        out = analytic
    if not np.all(np.isfinite(out)):
        raise ValueError("curvature is not finite")
    return out[0] if single else out


def curvature_at(potential: Potential, x: np.ndarray) -> float:
    """Pointwise lambda_min(Hess V), warning if x leaves the reference box."""
    pts, _ = _as_batch(x, potential.dim)
    if not bool(potential.contains(pts).all()):
        warnings.warn("curvature requested outside the domain box", stacklevel=2)
    return float(curvature_values(potential, pts, cross_check=True)[0])


def weighted_quantile(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    """q-quantile of a weighted sample, linear interpolation at midpoints."""
    assert 0.0 < q < 1.0, f"quantile must lie in (0, 1), got {q}"
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    order = np.argsort(v, kind="stable")
    v, w = v[order], w[order]
    total = w.sum()
    assert total > 0.0
    # Midpoint convention: node i sits at cumulative mass c_i - w_i / 2.
    c = (np.cumsum(w) - w / 2.0) / total
    return float(np.interp(q, c, v))


def _grid_lipschitz_estimate(field_vals: np.ndarray, m: GridMeasure) -> float:
    """Max slope between axis-neighbouring grid nodes (a lower estimate)."""
    grid = field_vals.reshape(m.shape)
    best = 0.0
    for axis in range(m.dim):
        dx = np.diff(m.axes[axis])
        dv = np.abs(np.diff(grid, axis=axis))
        shape = [1] * m.dim
        shape[axis] = dx.size
        best = max(best, float((dv / dx.reshape(shape)).max()))
    return best


def curvature_stats(
    m: GridMeasure,
    potential: Potential,
    cost_kind: str = "hamming",
    quantile: float = 0.5,
) -> CurvatureStats:
    """CurvatureStats of rho = lambda_min(Hess V) over the grid measure.

    Extremal fields (rho0, osc, median, Lipschitz estimate) are grid
    estimates unless the potential has constant curvature; the Lipschitz
    seminorm prefers ``analytic_lip`` when the potential carries one.
    """
    assert cost_kind in COST_KINDS, cost_kind
    rho = curvature_values(potential, m.nodes)
    rho0 = float(rho.min())
    osc = float(rho.max() - rho.min())
    mean = m.expectation(rho)
    med = weighted_quantile(rho, m.weights, quantile)
    if potential.analytic_lip is not None:
        lip = float(potential.analytic_lip)
        lip_src = "analytic"
    else:
        lip = _grid_lipschitz_estimate(rho, m)
        lip_src = "grid_estimate"
    constant = potential.kind == "quadratic"
    tag = "analytic" if constant else "grid_estimate"
    provenance = {
        "rho0": tag,
        "mean": tag,
        "osc": tag,
        "median": tag,
        "lip": "analytic" if constant and potential.analytic_lip is None else lip_src,
    }
    if constant:
        lip = 0.0 if potential.analytic_lip is None else lip
        osc = 0.0  # constant field: kill roundoff so degenerate branches fire
        med = rho0
        mean = rho0
    return CurvatureStats(
        rho0=rho0, mean=mean, osc=osc, lip=lip, median=med,
        cost_kind=cost_kind, quantile=quantile, provenance=provenance,
    )


def clip_curvature(
    stats: CurvatureStats,
    m: GridMeasure,
    potential: Potential,
    level: float,
) -> CurvatureStats:
    """Stats of the truncated field min(rho, level) on the same measure.

    Truncation never increases mean, oscillation or cost norm and never
    decreases the pointwise lower bound.  For a nonnegative field,
    mu(min(rho, K)) >= K * mu(rho >= K), so clipping at the median keeps at
    least half the median worth of mass.
    """
    rho = curvature_values(potential, m.nodes)
    clipped = np.minimum(rho, level)
    rho0 = float(clipped.min())
    osc = float(clipped.max() - clipped.min())
    mean = m.expectation(clipped)
    med = weighted_quantile(clipped, m.weights, stats.quantile)
    if potential.analytic_lip is not None:
        lip = float(potential.analytic_lip)  # still an upper bound after min
        lip_src = "analytic"
    else:
        lip = _grid_lipschitz_estimate(clipped, m)
        lip_src = "grid_estimate"
    if float(clipped.min()) >= 0.0:
        mass_above = float(m.weights[rho >= level].sum())
        assert mean >= level * mass_above - 1e-12, (
            f"truncation guarantee violated: {mean} < {level} * {mass_above}"
        )
    out = CurvatureStats(
        rho0=rho0, mean=mean, osc=osc, lip=lip, median=med,
        cost_kind=stats.cost_kind, quantile=stats.quantile,
        provenance={**stats.provenance, "lip": lip_src, "clipped_at": level},
    )
    tol = 1e-12 * max(1.0, abs(stats.mean))
    assert out.mean <= stats.mean + tol
    assert out.osc <= stats.osc + tol
    assert out.rho0 >= stats.rho0 - tol
    return out


def kappa_for_radial(
    potential: Potential,
    m: Optional[GridMeasure] = None,
    cost_kind: str = "euclidean",
    minorant: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    minorant_lip: Optional[float] = None,
    quantile: float = 0.5,
) -> tuple[Callable[[np.ndarray], np.ndarray], Optional[CurvatureStats]]:
    """Reinforced radial curvature kappa(x) = g'(|x|^2) for V = g(|x|^2).

    The convexity profile satisfies <grad V(x) - grad V(y), x - y> >=
    (kappa(x) + kappa(y)) |x - y|^2 when g is convex.  A pointwise-smaller
    ``minorant`` may be substituted (validated on the grid when one is
    given); its Lipschitz seminorm must then be supplied by the caller.
    Returns the kappa callable and, when ``m`` is given, its stats.
    """
    if potential.kind != "radial_convex" or "g_prime" not in potential.params:
        raise ValueError("radial convexity profile g' is not available")
    g_prime = potential.params["g_prime"]

    def kappa_natural(x: np.ndarray) -> np.ndarray:
        pts, single = _as_batch(x, potential.dim)
        u = np.sum(pts * pts, axis=1)
        out = np.asarray(g_prime(u), dtype=float)
        return out[0] if single else out

    kappa = kappa_natural
    lip: Optional[float] = None
    if minorant is not None:
        def kappa(x: np.ndarray) -> np.ndarray:  # noqa: F811
            pts, single = _as_batch(x, potential.dim)
            out = np.asarray(minorant(pts), dtype=float)
            return out[0] if single else out
        lip = minorant_lip
    if m is None:
        return kappa, None

    vals = kappa(m.nodes)
    if minorant is not None:
        natural = kappa_natural(m.nodes)
        excess = float((vals - natural).max())
        if excess > 1e-9 * max(1.0, float(np.abs(natural).max())):
            raise ValueError(
                f"minorant exceeds the natural profile by {excess:.3e}"
            )
    if lip is None:
        lip = _grid_lipschitz_estimate(vals, m)
        lip_src = "grid_estimate"
    else:
        lip_src = "analytic"
    stats = CurvatureStats(
        rho0=float(vals.min()),
        mean=m.expectation(vals),
        osc=float(vals.max() - vals.min()),
        lip=float(lip),
        median=weighted_quantile(vals, m.weights, quantile),
        cost_kind=cost_kind,
        quantile=quantile,
        provenance={"rho0": "grid_estimate", "mean": "grid_estimate",
                    "osc": "grid_estimate", "median": "grid_estimate",
                    "lip": lip_src, "field": "kappa"},
    )
    return kappa, stats


# ---------------------------------------------------------------------------
# dilation


def dilate(potential: Potential, lam: float) -> Potential:
    """Pushforward potential under x -> lam * x, keeping mu a probability.

    V_lam(x) = dim * ln(lam) + V(x / lam), so e^{-V_lam} integrates to the
    same Z.  Gradients scale by 1/lam, Hessians and curvature by 1/lam^2,
    the curvature Lipschitz seminorm by 1/lam^3, and the box by lam.
    """
    if not (lam > 0.0 and math.isfinite(lam)):
        raise ValueError(f"dilation factor must be positive, got {lam}")
    p = potential
    shift = p.dim * math.log(lam)

    def value(x: np.ndarray) -> np.ndarray:
        return np.asarray(p.value(np.asarray(x, float) / lam)) + shift

    def gradient(x: np.ndarray) -> np.ndarray:
        return np.asarray(p.gradient(np.asarray(x, float) / lam)) / lam

    def hessian(x: np.ndarray) -> np.ndarray:
        return np.asarray(p.hessian(np.asarray(x, float) / lam)) / (lam * lam)

    analytic_curv = None
    if p.analytic_curvature is not None:
        base_curv = p.analytic_curvature

        def analytic_curv(x: np.ndarray) -> np.ndarray:
            return np.asarray(base_curv(np.asarray(x, float) / lam)) / (lam * lam)

    params = dict(p.params)
    if p.kind == "quadratic" and "rho" in params:
        params["rho"] = params["rho"] / (lam * lam)
    if p.kind == "radial_convex" and "g" in params:
        g, gp, d = params["g"], params["g_prime"], p.dim

        def g_lam(u, _g=g, _d=d, _lam=lam):
            return np.asarray(_g(np.asarray(u, float) / (_lam * _lam))) + _d * math.log(_lam)

        def g_prime_lam(u, _gp=gp, _lam=lam):
            return np.asarray(_gp(np.asarray(u, float) / (_lam * _lam))) / (_lam * _lam)

        params["g"], params["g_prime"] = g_lam, g_prime_lam

    return Potential(
        dim=p.dim,
        value=value,
        gradient=gradient,
        hessian=hessian,
        domain_box=tuple((lam * a, lam * b) for a, b in p.domain_box),
        kind=p.kind,
        analytic_curvature=analytic_curv,
        analytic_lip=None if p.analytic_lip is None else p.analytic_lip / lam ** 3,
        params=params,
    )


# ---------------------------------------------------------------------------
# built-in families and the JSON entry point


def _poly_abs_max(coeffs: np.ndarray, a: float, b: float) -> float:
    """Exact max of |p(x)| on [a, b] via stationary points of p."""
    poly = np.polynomial.Polynomial(coeffs)
    crit = [a, b]
    deriv = poly.deriv()
    if deriv.degree() >= 1:
        roots = deriv.roots()
        crit.extend(float(r.real) for r in roots
                    if abs(r.imag) < 1e-12 and a <= r.real <= b)
    return float(max(abs(poly(x)) for x in crit))


def make_gaussian(rho: float, dim: int = 1,
                  domain_box: Optional[tuple] = None) -> Potential:
    """V(x) = rho |x|^2 / 2 with constant curvature rho > 0."""
    if not rho > 0.0:
        raise ValueError(f"gaussian potential needs rho > 0, got {rho}")
    if domain_box is None:
        half = 8.0 / math.sqrt(rho)
        domain_box = tuple((-half, half) for _ in range(dim))

    def value(x):
        pts = np.asarray(x, float)
        return 0.5 * rho * np.sum(pts * pts, axis=-1)

    def gradient(x):
        return rho * np.asarray(x, float)

    def hessian(x):
        pts = np.asarray(x, float)
        n = pts.shape[0]
        return np.broadcast_to(rho * np.eye(dim), (n, dim, dim)).copy()

    def curv(x):
        pts = np.asarray(x, float)
        return np.full(pts.shape[0], rho)

    return Potential(
        dim=dim, value=value, gradient=gradient, hessian=hessian,
        domain_box=tuple(domain_box), kind="quadratic",
        analytic_curvature=curv, analytic_lip=0.0, params={"rho": rho},
    )


def make_quartic(domain_box: tuple = ((-6.0, 6.0),)) -> Potential:
    """V(x) = x^4/4 + x^2/2 in 1d; also radial with g(u) = u^2/4 + u/2."""
    (a, b), = domain_box
    r = max(abs(a), abs(b))

    def value(x):
        t = np.asarray(x, float)[..., 0]
        return t ** 4 / 4.0 + t ** 2 / 2.0

    def gradient(x):
        t = np.asarray(x, float)
        return t ** 3 + t

    def hessian(x):
        t = np.asarray(x, float)[..., 0]
        return (3.0 * t ** 2 + 1.0)[:, None, None]

    def curv(x):
        t = np.asarray(x, float)[..., 0]
        return 3.0 * t ** 2 + 1.0

    def g(u):
        u = np.asarray(u, float)
        return u ** 2 / 4.0 + u / 2.0

    def g_prime(u):
        u = np.asarray(u, float)
        return u / 2.0 + 0.5

    return Potential(
        dim=1, value=value, gradient=gradient, hessian=hessian,
        domain_box=tuple(domain_box), kind="radial_convex",
        analytic_curvature=curv,
        analytic_lip=6.0 * r,  # |rho'| = 6|x| on the box
        params={"g": g, "g_prime": g_prime},
    )


def make_radial_power(beta: float, dim: int = 1,
                      domain_box: Optional[tuple] = None) -> Potential:
    """V(x) = |x|^beta, beta >= 2, with profile g(u) = u^{beta/2}."""
    if beta < 2.0:
        raise ValueError(f"radial power needs beta >= 2, got {beta}")
    if domain_box is None:
        domain_box = tuple((-6.0, 6.0) for _ in range(dim))
    r_box = max(max(abs(a), abs(b)) for a, b in domain_box)
    if dim == 2:
        r_box = math.hypot(*[max(abs(a), abs(b)) for a, b in domain_box])

    def value(x):
        pts = np.asarray(x, float)
        return np.sum(pts * pts, axis=-1) ** (beta / 2.0)

    def gradient(x):
        pts = np.asarray(x, float)
        r2 = np.sum(pts * pts, axis=-1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = beta * np.where(r2 > 0.0, r2 ** (beta / 2.0 - 1.0), 0.0)
        return scale * pts

    def hessian(x):
        pts = np.asarray(x, float)
        n = pts.shape[0]
        r2 = np.sum(pts * pts, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            s1 = beta * np.where(r2 > 0.0, r2 ** (beta / 2.0 - 1.0), 0.0)
            s2 = np.where(
                r2 > 0.0,
                beta * (beta - 2.0) * r2 ** (beta / 2.0 - 2.0),
                0.0,
            )
        eye = np.broadcast_to(np.eye(dim), (n, dim, dim))
        outer = pts[:, :, None] * pts[:, None, :]
        return s1[:, None, None] * eye + s2[:, None, None] * outer

    def curv(x):
        pts = np.asarray(x, float)
        r2 = np.sum(pts * pts, axis=-1)
        base = np.where(r2 > 0.0, r2 ** (beta / 2.0 - 1.0), 0.0 if beta > 2.0 else 1.0)
        # 1d: full second derivative; dim >= 2: tangential eigenvalue is smaller.
        factor = beta * (beta - 1.0) if dim == 1 else beta
        return factor * base

    def g(u):
        return np.asarray(u, float) ** (beta / 2.0)

    def g_prime(u):
        u = np.asarray(u, float)
        return (beta / 2.0) * np.where(u > 0.0, u ** (beta / 2.0 - 1.0),
                                       0.0 if beta > 2.0 else 1.0)

    if dim == 1:
        lip = beta * (beta - 1.0) * abs(beta - 2.0) * r_box ** max(beta - 3.0, 0.0)
    else:
        lip = beta * abs(beta - 2.0) * r_box ** max(beta - 3.0, 0.0)

    return Potential(
        dim=dim, value=value, gradient=gradient, hessian=hessian,
        domain_box=tuple(domain_box), kind="radial_convex",
        analytic_curvature=curv, analytic_lip=float(lip),
        params={"g": g, "g_prime": g_prime, "beta": beta},
    )


def make_cosine_perturbed_gaussian(
    a: float, k: float, domain_box: tuple = ((-8.0, 8.0),),
) -> Potential:
    """V(x) = x^2/2 + a cos(kx): curvature 1 - a k^2 cos(kx), Lipschitz a k^3."""
    if abs(a) * k * k >= 1.0:
        raise ValueError("perturbation destroys convexity control: |a| k^2 >= 1")

    def value(x):
        t = np.asarray(x, float)[..., 0]
        return t ** 2 / 2.0 + a * np.cos(k * t)

    def gradient(x):
        t = np.asarray(x, float)
        return t - a * k * np.sin(k * t)

    def hessian(x):
        t = np.asarray(x, float)[..., 0]
        return (1.0 - a * k * k * np.cos(k * t))[:, None, None]

    def curv(x):
        t = np.asarray(x, float)[..., 0]
        return 1.0 - a * k * k * np.cos(k * t)

    return Potential(
        dim=1, value=value, gradient=gradient, hessian=hessian,
        domain_box=tuple(domain_box), kind="custom",
        analytic_curvature=curv, analytic_lip=abs(a) * k ** 3,
        params={"a": a, "k": k},
    )


def make_custom_polynomial(coeffs, domain_box: tuple) -> Potential:
    """1d potential V(x) = sum_j coeffs[j] x^j with exact derivative bounds."""
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size < 3:
        raise ValueError("polynomial needs at least degree 2")
    poly = np.polynomial.Polynomial(c)
    d1, d2, d3 = poly.deriv(1), poly.deriv(2), poly.deriv(3)
    (a, b), = domain_box

    def value(x):
        return poly(np.asarray(x, float)[..., 0])

    def gradient(x):
        return d1(np.asarray(x, float))

    def hessian(x):
        return d2(np.asarray(x, float)[..., 0])[:, None, None]

    def curv(x):
        return d2(np.asarray(x, float)[..., 0])

    return Potential(
        dim=1, value=value, gradient=gradient, hessian=hessian,
        domain_box=tuple(domain_box), kind="custom",
        analytic_curvature=curv,
        analytic_lip=_poly_abs_max(d3.coef, a, b),
        params={"coeffs": tuple(c.tolist())},
    )


_SPEC_KINDS = {
    "gaussian": {"rho"},
    "quartic": set(),
    "radial_power": {"beta"},
    "cosine_perturbed_gaussian": {"a", "k"},
    "custom_polynomial": {"coeffs"},
}


def potential_from_spec(doc: dict) -> Potential:
    """Build a Potential from a JSON-style document.

    Expected keys: ``kind``, ``params``, ``domain_box``; optional ``dim``
    (gaussian / radial_power) and ``analytic_lip`` override.  Unknown kinds
    or parameters are rejected.
    """
    if not isinstance(doc, dict):
        raise ValueError("potential spec must be a mapping")
    known = {"kind", "params", "domain_box", "dim", "analytic_lip", "resolution"}
    extra = set(doc) - known
    if extra:
        raise ValueError(f"unknown potential spec fields: {sorted(extra)}")
    kind = doc.get("kind")
    if kind not in _SPEC_KINDS:
        raise ValueError(f"unknown potential kind {kind!r}")
    params = doc.get("params", {})
    if set(params) != _SPEC_KINDS[kind]:
        raise ValueError(
            f"{kind} expects params {sorted(_SPEC_KINDS[kind])}, "
            f"got {sorted(params)}"
        )
    box_raw = doc.get("domain_box")
    if box_raw is None:
        raise ValueError("potential spec requires domain_box")
    box = np.asarray(box_raw, dtype=float)
    if box.ndim == 1:
        box = box[None, :]
    if box.ndim != 2 or box.shape[1] != 2:
        raise ValueError("domain_box must be a list of [low, high] pairs")
    domain_box = tuple((float(lo), float(hi)) for lo, hi in box)
    dim = int(doc.get("dim", len(domain_box)))
    if dim != len(domain_box):
        raise ValueError(f"dim {dim} does not match domain_box axes {len(domain_box)}")

    if kind == "gaussian":
        p = make_gaussian(float(params["rho"]), dim=dim, domain_box=domain_box)
    elif kind == "quartic":
        if dim != 1:
            raise ValueError("quartic potential is one-dimensional")
        p = make_quartic(domain_box)
    elif kind == "radial_power":
        p = make_radial_power(float(params["beta"]), dim=dim, domain_box=domain_box)
    elif kind == "cosine_perturbed_gaussian":
        if dim != 1:
            raise ValueError("cosine-perturbed gaussian is one-dimensional")
        p = make_cosine_perturbed_gaussian(
            float(params["a"]), float(params["k"]), domain_box)
    else:
        if dim != 1:
            raise ValueError("custom polynomial is one-dimensional")
        p = make_custom_polynomial(params["coeffs"], domain_box)

    if "analytic_lip" in doc and doc["analytic_lip"] is not None:
        p = replace(p, analytic_lip=float(doc["analytic_lip"]))
    return p
