"""Monte Carlo for the overdamped Langevin dynamics dX = -grad V dt + sqrt(2) dB.

Reproducibility contract: path i draws its whole noise sequence from a
counter-based generator keyed by (seed, i), so results are independent of
chunking and path count; samplers use the reserved lane (seed, 2^63).
Paths that leave a safety box (three times the potential's domain box) or go
non-finite are flagged, clamped, and excluded from every estimate; more than
1% flagged aborts the run.

The coupled simulator drives two copies with the same noise (synchronous
coupling) and accumulates the curvature seen along the connecting segment,
which is what the pathwise contraction inequality integrates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .potential_measure import (
    GridMeasure,
    Potential,
    ScalarField,
    curvature_values,
)

__all__ = [
    "SimConfig",
    "EstimateCI",
    "SimResult",
    "CoupledEnsemble",
    "simulate",
    "simulate_coupled",
    "check_pathwise_contraction",
    "pathwise_contraction_verdict",
    "estimate_exp_functional",
    "check_gradient_commutation",
    "check_derivative_flow",
    "empirical_w1",
    "equilibrium_sampler_1d",
    "w1_decay_curve",
    "variance_decay_check",
]

SAMPLER_LANE = 2 ** 63  # path indices stay below this key component
MAX_FLAGGED_FRACTION = 0.01
MAX_ASSIGNMENT_SIZE = 512


@dataclass(frozen=True)
class SimConfig:
    """Euler-Maruyama discretisation parameters."""

    dt: float
    horizon: float
    n_paths: int
    seed: int
    scheme: str = "euler_maruyama"
    richardson: bool = False

    def __post_init__(self) -> None:
        assert self.dt > 0.0, f"dt must be positive, got {self.dt}"
        assert self.horizon > 0.0, f"horizon must be positive, got {self.horizon}"
        assert self.dt <= self.horizon, "dt exceeds the horizon"
        assert self.n_paths >= 2, f"need at least 2 paths, got {self.n_paths}"
        assert self.seed >= 0, f"seed must be nonnegative, got {self.seed}"
        assert self.scheme == "euler_maruyama", f"unknown scheme {self.scheme}"

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.horizon / self.dt)))


@dataclass(frozen=True)
class EstimateCI:
    """Monte Carlo estimate with a normal-theory confidence interval."""

    mean: float
    stderr: float
    n: int

    @property
    def ci95(self) -> tuple[float, float]:
        return (self.mean - 1.96 * self.stderr, self.mean + 1.96 * self.stderr)


@dataclass(frozen=True)
class SimResult:
    final: np.ndarray                      # (n, dim)
    times: np.ndarray                      # snapshot times actually used
    snapshots: Optional[np.ndarray]        # (n_snap, n, dim)
    integral: Optional[np.ndarray]         # (n,) time integral of the integrand
    integral_snapshots: Optional[np.ndarray]  # (n_snap, n)
    flagged: np.ndarray                    # (n,) excluded from estimates
    n_flagged: int


@dataclass(frozen=True)
class CoupledEnsemble:
    times: np.ndarray            # (n_save,)
    dist: np.ndarray             # (n_pairs, n_save)
    rho_integral: np.ndarray     # segment-averaged curvature, integrated
    kappa_integral: Optional[np.ndarray]
    dist0: np.ndarray
    flagged: np.ndarray
    dt: float
    monotone_applicable: bool
    monotone_violations: int


def _path_rng(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sampler_rng(seed: int) -> np.random.Generator:
    """Generator on the reserved lane, for initial-condition sampling."""
    return _path_rng(seed, SAMPLER_LANE)


def _safety_bounds(potential: Potential) -> tuple[np.ndarray, np.ndarray]:
    center = potential.box_centers()
    half = potential.box_half_widths()
    return center - 3.0 * half, center + 3.0 * half


def _resolve_init(init, n: int, dim: int, seed: int) -> np.ndarray:
    if callable(init):
        pts = np.asarray(init(n, sampler_rng(seed)), dtype=float)
    else:
        pts = np.asarray(init, dtype=float)
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
        if pts.ndim == 1:
            # In one dimension a flat array is a batch of starting points;
            # otherwise it is a single point.
            pts = pts[:, None] if (dim == 1 and pts.size != 1) else pts[None, :]
        if pts.shape[0] == 1:
            pts = np.broadcast_to(pts, (n, pts.shape[1])).copy()
    if pts.shape != (n, dim):
        raise ValueError(f"initial points have shape {pts.shape}, need ({n}, {dim})")
    return pts


def _snapshot_steps(times, dt: float, n_steps: int) -> tuple[np.ndarray, np.ndarray]:
    req = np.atleast_1d(np.asarray(times, dtype=float))
    steps = np.round(req / dt).astype(int)
    if np.any(steps < 0) or np.any(steps > n_steps):
        raise ValueError("snapshot times outside the simulated horizon")
    if np.any(np.abs(steps * dt - req) > dt / 2 + 1e-12):
        raise ValueError("snapshot times are not aligned with the time grid")
    return steps, steps * dt


def _chunk_size(n_steps: int, dim: int) -> int:
    # Keep each chunk's noise block around 64 MB.
    return max(128, min(4096, (1 << 23) // max(1, n_steps * dim)))


def _flag_and_clip(x: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                   flag: np.ndarray) -> np.ndarray:
    bad = ~np.all(np.isfinite(x), axis=1) | np.any(x < lo, axis=1) \
        | np.any(x > hi, axis=1)
    flag |= bad
    return np.clip(np.nan_to_num(x, nan=0.0, posinf=0.0, neginf=0.0), lo, hi)


def _check_flag_budget(flagged: np.ndarray) -> None:
    frac = float(flagged.mean())
    if frac > MAX_FLAGGED_FRACTION:
        raise RuntimeError(
            f"{frac:.1%} of paths left the safety box: possible "
            "non-conservativity or a domain box that is too small"
        )


def simulate(
    potential: Potential,
    cfg: SimConfig,
    init,
    snapshot_times=None,
    integrand: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> SimResult:
    """Euler-Maruyama ensemble, optionally accumulating int g(X_s) ds.

    ``init`` is an (n, dim) array, a single point, or a callable
    ``(n, rng) -> (n, dim)`` drawing from the reserved sampler lane.  The
    integrand is integrated by the trapezoid rule on the time grid and both
    positions and running integrals can be snapshotted.
    """
    dim = potential.dim
    n, dt, n_steps = cfg.n_paths, cfg.dt, cfg.n_steps
    inits = _resolve_init(init, n, dim, cfg.seed)
    lo, hi = _safety_bounds(potential)
    sq2dt = math.sqrt(2.0 * dt)

    want_snaps = snapshot_times is not None
    if want_snaps:
        steps, times = _snapshot_steps(snapshot_times, dt, n_steps)
        step_slots = {int(s): i for i, s in enumerate(steps)}
        snaps = np.empty((len(steps), n, dim))
        int_snaps = np.empty((len(steps), n)) if integrand is not None else None
    else:
        times = np.array([n_steps * dt])
        snaps = int_snaps = None
        step_slots = {}

    final = np.empty((n, dim))
    integral = np.zeros(n) if integrand is not None else None
    flagged = np.zeros(n, dtype=bool)

    chunk = _chunk_size(n_steps, dim)
    for start in range(0, n, chunk):
        idx = np.arange(start, min(start + chunk, n))
        c = idx.size
        noise = np.empty((c, n_steps, dim))
        for j, i_path in enumerate(idx):
            noise[j] = _path_rng(cfg.seed, int(i_path)).standard_normal(
                (n_steps, dim))
        x = inits[idx].copy()
        flag = np.zeros(c, dtype=bool)
        if integrand is not None:
            g_prev = np.asarray(integrand(x), dtype=float)
            acc = np.zeros(c)
        if 0 in step_slots:
            slot = step_slots[0]
            snaps[slot, idx] = x
            if int_snaps is not None:
                int_snaps[slot, idx] = 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(n_steps):
                x = x - potential.gradient(x) * dt + sq2dt * noise[:, k, :]
                x = _flag_and_clip(x, lo, hi, flag)
                if integrand is not None:
                    g_cur = np.asarray(integrand(x), dtype=float)
                    acc += dt * (g_prev + g_cur) / 2.0
                    g_prev = g_cur
                if (k + 1) in step_slots:
                    slot = step_slots[k + 1]
                    snaps[slot, idx] = x
                    if int_snaps is not None:
                        int_snaps[slot, idx] = acc
        final[idx] = x
        flagged[idx] = flag
        if integrand is not None:
            integral[idx] = acc

    _check_flag_budget(flagged)
    return SimResult(
        final=final, times=times, snapshots=snaps, integral=integral,
        integral_snapshots=int_snaps, flagged=flagged,
        n_flagged=int(flagged.sum()),
    )


def simulate_coupled(
    potential: Potential,
    cfg: SimConfig,
    x_init,
    y_init,
    kappa_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    save_every: Optional[int] = None,
    gl_order: int = 8,
) -> CoupledEnsemble:
    """Synchronously coupled pairs with segment-curvature bookkeeping.

    For each pair the quantity int_0^t int_0^1 rho(lam X + (1-lam) Y) dlam ds
    is accumulated (Gauss-Legendre in lam, trapezoid in s); when ``kappa_fn``
    is given, int (kappa(X) + kappa(Y)) ds is tracked as well.  In one
    dimension the coupling preserves the order of the pair, and sign flips
    are counted as monotonicity violations.
    """
    dim = potential.dim
    n, dt, n_steps = cfg.n_paths, cfg.dt, cfg.n_steps
    xs = _resolve_init(x_init, n, dim, cfg.seed)
    ys = _resolve_init(y_init, n, dim, cfg.seed)
    lo, hi = _safety_bounds(potential)
    sq2dt = math.sqrt(2.0 * dt)

    gl_x, gl_w = np.polynomial.legendre.leggauss(gl_order)
    lam = (gl_x + 1.0) / 2.0        # nodes on [0, 1]
    lam_w = gl_w / 2.0              # weights summing to 1

    if save_every is None:
        save_every = max(1, n_steps // 200)
    save_steps = sorted(set(range(0, n_steps + 1, save_every)) | {n_steps})
    slot_of = {s: i for i, s in enumerate(save_steps)}
    n_save = len(save_steps)

    times = np.array([s * dt for s in save_steps])
    dist = np.empty((n, n_save))
    rho_int = np.empty((n, n_save))
    kap_int = np.empty((n, n_save)) if kappa_fn is not None else None
    dist0 = np.linalg.norm(xs - ys, axis=1)
    flagged = np.zeros(n, dtype=bool)
    mono_viol = np.zeros(n, dtype=bool)

    def segment_mean_curvature(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        pts = lam[:, None, None] * x[None] + (1.0 - lam)[:, None, None] * y[None]
        vals = curvature_values(potential, pts.reshape(-1, dim))
        return lam_w @ vals.reshape(gl_order, -1)

    chunk = _chunk_size(n_steps, dim)
    for start in range(0, n, chunk):
        idx = np.arange(start, min(start + chunk, n))
        c = idx.size
        noise = np.empty((c, n_steps, dim))
        for j, i_pair in enumerate(idx):
            noise[j] = _path_rng(cfg.seed, int(i_pair)).standard_normal(
                (n_steps, dim))
        x, y = xs[idx].copy(), ys[idx].copy()
        flag = np.zeros(c, dtype=bool)
        sign0 = np.sign(x[:, 0] - y[:, 0]) if dim == 1 else None
        viol = np.zeros(c, dtype=bool)

        rbar_prev = segment_mean_curvature(x, y)
        acc_rho = np.zeros(c)
        if kappa_fn is not None:
            kap_prev = (np.asarray(kappa_fn(x), dtype=float)
                        + np.asarray(kappa_fn(y), dtype=float))
            acc_kap = np.zeros(c)
        if 0 in slot_of:
            dist[idx, 0] = np.linalg.norm(x - y, axis=1)
            rho_int[idx, 0] = 0.0
            if kap_int is not None:
                kap_int[idx, 0] = 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(n_steps):
                dw = sq2dt * noise[:, k, :]
                x = x - potential.gradient(x) * dt + dw
                y = y - potential.gradient(y) * dt + dw
                x = _flag_and_clip(x, lo, hi, flag)
                y = _flag_and_clip(y, lo, hi, flag)
                if dim == 1:
                    viol |= sign0 * np.sign(x[:, 0] - y[:, 0]) < 0.0
                rbar_cur = segment_mean_curvature(x, y)
                acc_rho += dt * (rbar_prev + rbar_cur) / 2.0
                rbar_prev = rbar_cur
                if kappa_fn is not None:
                    kap_cur = (np.asarray(kappa_fn(x), dtype=float)
                               + np.asarray(kappa_fn(y), dtype=float))
                    acc_kap += dt * (kap_prev + kap_cur) / 2.0
                    kap_prev = kap_cur
                if (k + 1) in slot_of:
                    slot = slot_of[k + 1]
                    dist[idx, slot] = np.linalg.norm(x - y, axis=1)
                    rho_int[idx, slot] = acc_rho
                    if kap_int is not None:
                        kap_int[idx, slot] = acc_kap
        flagged[idx] = flag
        mono_viol[idx] = viol

    _check_flag_budget(flagged)
    n_mono = int((mono_viol & ~flagged).sum()) if dim == 1 else 0
    return CoupledEnsemble(
        times=times, dist=dist, rho_integral=rho_int, kappa_integral=kap_int,
        dist0=dist0, flagged=flagged, dt=dt,
        monotone_applicable=(dim == 1), monotone_violations=n_mono,
    )


def check_pathwise_contraction(
    ens: CoupledEnsemble,
    mode: str = "rho",
    c1: float = 10.0,
) -> dict:
    """Verify dist_t <= dist_0 * exp(-E_t) * (1 + c1 dt) at all saved times.

    E_t is the segment-curvature integral (mode "rho") or the two-point
    reinforced integral (mode "kappa").  The multiplicative slack absorbs the
    O(dt) gap between the Euler product and the trapezoid exponent.
    """
    if mode == "rho":
        exponent = ens.rho_integral
    elif mode == "kappa":
        if ens.kappa_integral is None:
            raise ValueError("ensemble carries no kappa integral")
        exponent = ens.kappa_integral
    else:
        raise ValueError(f"unknown mode {mode!r}")
    mask = ~ens.flagged & (ens.dist0 > 0.0)
    tol = c1 * ens.dt
    with np.errstate(over="ignore"):
        ref = ens.dist0[mask, None] * np.exp(-exponent[mask])
    rel = ens.dist[mask] / ref - 1.0
    n_checks = int(rel.size)
    viol = rel > tol
    return {
        "mode": mode,
        "n_pairs": int(mask.sum()),
        "n_checks": n_checks,
        "n_violations": int(viol.sum()),
        "n_pairs_violating": int(np.any(viol, axis=1).sum()),
        "max_rel_violation": float(rel.max()) if n_checks else 0.0,
        "tol": tol,
        "monotone_violations": ens.monotone_violations,
        "passed": bool(viol.sum() == 0),
    }


def pathwise_contraction_verdict(
    potential: Potential,
    cfg: SimConfig,
    x_init,
    y_init,
    mode: str = "rho",
    c1: float = 10.0,
    kappa_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> dict:
    """Contraction check at dt and dt/2; only failures at both are hard."""
    ens = simulate_coupled(potential, cfg, x_init, y_init, kappa_fn=kappa_fn)
    fine_cfg = replace(cfg, dt=cfg.dt / 2.0)
    ens_fine = simulate_coupled(potential, fine_cfg, x_init, y_init,
                                kappa_fn=kappa_fn)
    coarse = check_pathwise_contraction(ens, mode, c1)
    fine = check_pathwise_contraction(ens_fine, mode, c1)
    if coarse["passed"] and fine["passed"]:
        verdict = "pass"
    elif not coarse["passed"] and not fine["passed"]:
        verdict = "fail"
    else:
        verdict = "inconclusive_discretization"
    return {"verdict": verdict, "coarse": coarse, "fine": fine}


def estimate_exp_functional(
    potential: Potential,
    cfg: SimConfig,
    init,
    g: Callable[[np.ndarray], np.ndarray],
    lam: float,
    t: float,
) -> EstimateCI:
    """Monte Carlo estimate of E[exp(-lam int_0^t g(X_s) ds)]."""
    if t <= 0.0:
        raise ValueError(f"time must be positive, got {t}")
    run_cfg = replace(cfg, horizon=t)
    res = simulate(potential, run_cfg, init, integrand=g)
    vals = np.exp(-lam * res.integral[~res.flagged])
    n = vals.size
    if n < 2:
        raise RuntimeError("too few unflagged paths for an estimate")
    return EstimateCI(
        mean=float(vals.mean()),
        stderr=float(vals.std(ddof=1) / math.sqrt(n)),
        n=int(n),
    )


def check_gradient_commutation(
    potential: Potential,
    cfg: SimConfig,
    f: ScalarField,
    x0,
    times,
    fd_step: Optional[float] = None,
) -> list[dict]:
    """Test |grad P_t f|(x) <= E_x[exp(-int rho) |grad f|(X_t)] at given times.

    The left side is a central difference of the Monte Carlo semigroup with
    common random numbers across the stencil; the right side reuses one
    ensemble accumulating the curvature integral.  The verdict tolerance
    combines the paired-difference standard errors with an O(dt) weak-error
    and O(h^2) stencil allowance.
    """
    if f.gradient is None:
        raise ValueError("test function needs a gradient")
    dim = potential.dim
    x0 = np.asarray(x0, dtype=float).reshape(dim)
    t_arr = np.atleast_1d(np.asarray(times, dtype=float))
    horizon = float(t_arr.max())
    run_cfg = replace(cfg, horizon=horizon)
    h = fd_step if fd_step is not None else 1e-3 * (1.0 + float(np.abs(x0).max()))

    rhs_res = simulate(
        potential, run_cfg, x0, snapshot_times=t_arr,
        integrand=lambda pts: curvature_values(potential, pts),
    )
    ok_rhs = ~rhs_res.flagged

    plus_runs, minus_runs = [], []
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = h
        plus_runs.append(simulate(potential, run_cfg, x0 + e,
                                  snapshot_times=t_arr))
        minus_runs.append(simulate(potential, run_cfg, x0 - e,
                                   snapshot_times=t_arr))

    reports = []
    for ti, t in enumerate(t_arr):
        decay = np.exp(-rhs_res.integral_snapshots[ti][ok_rhs])
        gnorm = np.linalg.norm(
            np.asarray(f.gradient(rhs_res.snapshots[ti][ok_rhs]), dtype=float)
            .reshape(-1, dim), axis=1)
        rhs_vals = decay * gnorm
        rhs = float(rhs_vals.mean())
        rhs_se = float(rhs_vals.std(ddof=1) / math.sqrt(rhs_vals.size))

        means = np.empty(dim)
        variances = np.empty(dim)
        for j in range(dim):
            ok = ~(plus_runs[j].flagged | minus_runs[j].flagged)
            fp = np.asarray(f.value(plus_runs[j].snapshots[ti][ok]), dtype=float)
            fm = np.asarray(f.value(minus_runs[j].snapshots[ti][ok]), dtype=float)
            d = (fp - fm) / (2.0 * h)
            means[j] = d.mean()
            variances[j] = d.var(ddof=1) / d.size
        lhs = float(np.linalg.norm(means))
        lhs_se = float(math.sqrt(variances.sum()))

        scale = abs(lhs) + abs(rhs)
        slack = cfg.dt * scale + h * h
        excess = lhs - rhs
        if excess <= 2.0 * (lhs_se + rhs_se) + slack:
            verdict = "pass"
        elif excess > 4.0 * (lhs_se + rhs_se) + slack:
            verdict = "fail"
        else:
            verdict = "inconclusive"
        reports.append({
            "t": float(t), "lhs": lhs, "lhs_stderr": lhs_se,
            "rhs": rhs, "rhs_stderr": rhs_se,
            "slack": slack, "verdict": verdict, "h": h,
        })
    return reports


def check_derivative_flow(
    potential: Potential,
    cfg: SimConfig,
    x0,
    c1: float = 10.0,
) -> dict:
    """Tangent-flow check: ||J_t||_op <= exp(-int rho(X_s) ds) (1 + c1 dt).

    J solves J' = -Hess V(X) J along each path (Euler, same grid), so its
    operator norm must decay at least as fast as the integrated pointwise
    curvature floor along that same path.
    """
    dim = potential.dim
    n, dt, n_steps = cfg.n_paths, cfg.dt, cfg.n_steps
    inits = _resolve_init(x0, n, dim, cfg.seed)
    lo, hi = _safety_bounds(potential)
    sq2dt = math.sqrt(2.0 * dt)

    chunk = _chunk_size(n_steps, dim * (1 + dim))
    norms = np.empty(n)
    expo = np.empty(n)
    flagged = np.zeros(n, dtype=bool)
    for start in range(0, n, chunk):
        idx = np.arange(start, min(start + chunk, n))
        c = idx.size
        noise = np.empty((c, n_steps, dim))
        for j, i_path in enumerate(idx):
            noise[j] = _path_rng(cfg.seed, int(i_path)).standard_normal(
                (n_steps, dim))
        x = inits[idx].copy()
        jac = np.broadcast_to(np.eye(dim), (c, dim, dim)).copy()
        flag = np.zeros(c, dtype=bool)
        rho_prev = curvature_values(potential, x)
        acc = np.zeros(c)
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(n_steps):
                hess = np.asarray(potential.hessian(x), dtype=float)
                jac = jac - dt * np.einsum("nij,njk->nik", hess, jac)
                x = x - potential.gradient(x) * dt + sq2dt * noise[:, k, :]
                x = _flag_and_clip(x, lo, hi, flag)
                rho_cur = curvature_values(potential, x)
                acc += dt * (rho_prev + rho_cur) / 2.0
                rho_prev = rho_cur
        if dim == 1:
            norms[idx] = np.abs(jac[:, 0, 0])
        else:
            norms[idx] = np.linalg.norm(jac, ord=2, axis=(1, 2))
        expo[idx] = acc
        flagged[idx] = flag

    _check_flag_budget(flagged)
    mask = ~flagged
    with np.errstate(over="ignore"):
        rel = norms[mask] / np.exp(-expo[mask]) - 1.0
    tol = c1 * dt
    viol = rel > tol
    return {
        "n_paths": int(mask.sum()),
        "n_violations": int(viol.sum()),
        "max_rel_violation": float(rel.max()) if rel.size else 0.0,
        "tol": tol,
        "passed": bool(viol.sum() == 0),
    }


# ---------------------------------------------------------------------------
# empirical transport distances


def _evenly_spaced(sorted_vals: np.ndarray, k: int) -> np.ndarray:
    n = sorted_vals.size
    idx = ((np.arange(k) + 0.5) * n / k).astype(int)
    return sorted_vals[np.minimum(idx, n - 1)]


def empirical_w1(a: np.ndarray, b: np.ndarray) -> float:
    """W1 between two empirical clouds.

    One dimension: mean absolute difference of matched order statistics
    (the larger sample is thinned to evenly spaced quantiles first).  Higher
    dimensions: exact optimal assignment on the Euclidean cost, which needs
    equal sizes of at most 512 points.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if a.shape[1] == 1:
        av = np.sort(a.ravel())
        bv = np.sort(b.ravel())
        k = min(av.size, bv.size)
        if av.size != k:
            av = _evenly_spaced(av, k)
        if bv.size != k:
            bv = _evenly_spaced(bv, k)
        return float(np.abs(av - bv).mean())
    if a.shape[0] != b.shape[0]:
        raise ValueError("equal sample sizes are required beyond one dimension")
    if a.shape[0] > MAX_ASSIGNMENT_SIZE:
        raise ValueError(
            f"assignment limited to {MAX_ASSIGNMENT_SIZE} points; "
            "subsample required"
        )
    from scipy.optimize import linear_sum_assignment

    cost = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    row, col = linear_sum_assignment(cost)
    return float(cost[row, col].mean())


def equilibrium_sampler_1d(
    m: GridMeasure,
    n: int,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Inverse-CDF draws from the grid measure; stratified when rng is None."""
    if m.dim != 1:
        raise ValueError("sampler is one-dimensional")
    # Midpoint cumulative, matching the weighted-quantile convention; the
    # right-edge cumsum shifts every quantile left by about half a cell.
    w = m.weights / m.weights.sum()
    cdf = np.cumsum(w) - 0.5 * w
    if rng is None:
        u = (np.arange(n) + 0.5) / n
    else:
        u = rng.random(n)
    return np.interp(u, cdf, m.nodes[:, 0])[:, None]


def w1_decay_curve(
    potential: Potential,
    cfg: SimConfig,
    init,
    times,
    m: GridMeasure,
    n_groups: int = 10,
) -> dict:
    """Empirical W1(law_t, mu) at the given times plus a fitted decay rate.

    Each snapshot is compared, as a whole, against stratified equilibrium
    quantiles of matching size; contiguous path groups give a conservative
    standard error.  The rate is the negated slope of an ordinary least
    squares fit of ln W1 against t, with its residual-based standard error.
    """
    if potential.dim != 1:
        raise ValueError("decay curve estimator is one-dimensional")
    t_arr = np.atleast_1d(np.asarray(times, dtype=float))
    run_cfg = replace(cfg, horizon=float(t_arr.max()))
    res = simulate(potential, run_cfg, init, snapshot_times=t_arr)
    ok = ~res.flagged

    w1 = np.empty(t_arr.size)
    stderr = np.empty(t_arr.size)
    for ti in range(t_arr.size):
        sample = res.snapshots[ti][ok, 0]
        ref = equilibrium_sampler_1d(m, sample.size)[:, 0]
        w1[ti] = empirical_w1(sample, ref)
        bounds = np.linspace(0, sample.size, n_groups + 1).astype(int)
        gvals = []
        for g in range(n_groups):
            part = sample[bounds[g]:bounds[g + 1]]
            if part.size >= 2:
                gref = equilibrium_sampler_1d(m, part.size)[:, 0]
                gvals.append(empirical_w1(part, gref))
        gvals = np.asarray(gvals)
        stderr[ti] = float(gvals.std(ddof=1) / math.sqrt(gvals.size))

    logs = np.log(w1)
    t_mean = t_arr.mean()
    sxx = float(((t_arr - t_mean) ** 2).sum())
    slope = float(((t_arr - t_mean) * (logs - logs.mean())).sum() / sxx)
    resid = logs - (logs.mean() + slope * (t_arr - t_mean))
    dof = max(t_arr.size - 2, 1)
    slope_se = math.sqrt(float((resid ** 2).sum()) / dof / sxx)
    return {
        "times": t_arr, "w1": w1, "stderr": stderr,
        "rate": -slope, "rate_stderr": slope_se,
        "n_paths": int(ok.sum()),
    }


def variance_decay_check(
    potential: Potential,
    cfg: SimConfig,
    f: ScalarField,
    times,
    m: GridMeasure,
    n_outer: int = 256,
    n_inner: int = 64,
) -> dict:
    """Estimate Var_mu(P_t f) by nested Monte Carlo over equilibrium starts.

    Outer points are stratified equilibrium quantiles, each spawning
    ``n_inner`` paths; Var of the inner means minus the within-cell noise
    divided by n_inner is an (approximately) unbiased estimate of the
    variance of the conditional expectation.  Cells whose paths were flagged
    are dropped; a time is marked inconclusive when the noise correction
    exceeds half the raw outer variance.
    """
    if potential.dim != 1:
        raise ValueError("variance decay estimator is one-dimensional")
    t_arr = np.atleast_1d(np.asarray(times, dtype=float))
    n_total = n_outer * n_inner
    outer_pts = equilibrium_sampler_1d(m, n_outer)
    inits = np.repeat(outer_pts, n_inner, axis=0)
    run_cfg = replace(cfg, horizon=float(t_arr.max()), n_paths=n_total)
    res = simulate(potential, run_cfg, inits, snapshot_times=t_arr)
    cell_ok = ~np.any(res.flagged.reshape(n_outer, n_inner), axis=1)

    f_nodes = np.asarray(f.value(m.nodes), dtype=float)
    var_mu_f = m.expectation(f_nodes * f_nodes) - m.expectation(f_nodes) ** 2

    var_est = np.empty(t_arr.size)
    stderr = np.empty(t_arr.size)
    correction = np.empty(t_arr.size)
    inconclusive = np.zeros(t_arr.size, dtype=bool)
    n_blocks = 8
    for ti in range(t_arr.size):
        vals = np.asarray(f.value(res.snapshots[ti]), dtype=float) \
            .reshape(n_outer, n_inner)[cell_ok]
        inner_mean = vals.mean(axis=1)
        inner_var = vals.var(axis=1, ddof=1)
        raw = float(inner_mean.var(ddof=1))
        corr = float(inner_var.mean() / n_inner)
        var_est[ti] = raw - corr
        correction[ti] = corr
        if raw > 0 and corr > 0.5 * raw:
            inconclusive[ti] = True
        # Interleave cells: outer points are stratified quantiles, so each
        # round-robin block is itself a stratified sample of mu.
        cell_idx = np.arange(inner_mean.size)
        bvals = []
        for b in range(n_blocks):
            blk = cell_idx[cell_idx % n_blocks == b]
            if blk.size >= 2:
                bvals.append(inner_mean[blk].var(ddof=1)
                             - inner_var[blk].mean() / n_inner)
        bvals = np.asarray(bvals)
        stderr[ti] = float(bvals.std(ddof=1) / math.sqrt(bvals.size))

    return {
        "times": t_arr, "var_est": var_est, "stderr": stderr,
        "correction": correction, "inconclusive": inconclusive,
        "var_mu_f": float(var_mu_f),
        "n_cells": int(cell_ok.sum()),
    }
