"""JSON-driven command line harness.

``curvebound run config.json`` executes the tasks listed in the config
(spectral, bounds, simulate, validate, sweep — always in that order), writing
``report.json``, CSV curves and SVG figures into the output directory.
``curvebound bounds`` runs only the branch tournament and prints the table;
``curvebound validate`` runs only the verdict checks.

Exit codes: 0 all checks passed, 1 hard failure, 2 configuration error,
3 no failures but at least one inconclusive check.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bound_engine import (
    BRANCH_ORDER,
    best_poincare,
    be_baseline,
    ultrabounded_direct_bound,
    w1_rate_positive_curvature,
)
from .coupled_sde import (
    SimConfig,
    check_gradient_commutation,
    equilibrium_sampler_1d,
    estimate_exp_functional,
    pathwise_contraction_verdict,
    simulate,
    variance_decay_check,
    w1_decay_curve,
)
from .potential_measure import (
    ScalarField,
    build_grid_measure,
    curvature_stats,
    curvature_values,
    potential_from_spec,
)
from .spectral_oracle import spectral_gap_1d
from .wi_certificates import (
    from_curvature_stats,
    from_logsobolev,
    from_poincare,
    laplace_moment_bound,
)

__all__ = ["main", "ConfigError", "load_config"]


class ConfigError(ValueError):
    """Raised for malformed or contradictory configuration documents."""


_TASKS = ("spectral", "bounds", "simulate", "validate", "sweep")
_TOP_KEYS = {
    "schema_version", "potential", "certificates", "sim", "tasks", "sweep",
    "output_dir", "brascamp_lieb_constant", "ultrabounded", "quantile",
}
_SIM_KEYS = {"dt", "horizon", "n_paths", "seed", "richardson",
             "init_point", "times"}
_CERT_KEYS = {"source", "constant"}
_ULTRA_KEYS = {"K_eta", "eta", "tv", "t"}


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def load_config(path: str) -> dict:
    """Read and validate a config document; unknown fields are rejected."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    _require(isinstance(doc, dict), "config must be a JSON object")
    extra = set(doc) - _TOP_KEYS
    _require(not extra, f"unknown config fields: {sorted(extra)}")
    _require(doc.get("schema_version") == 1,
             f"unsupported schema_version {doc.get('schema_version')!r}")
    _require("potential" in doc, "config requires a potential")
    _require("tasks" in doc, "config requires a tasks list")
    tasks = doc["tasks"]
    _require(isinstance(tasks, list) and tasks, "tasks must be a nonempty list")
    bad = [t for t in tasks if t not in _TASKS]
    _require(not bad, f"unknown tasks: {bad}")
    _require("output_dir" in doc, "config requires output_dir")

    pot = doc["potential"]
    _require(isinstance(pot, dict), "potential must be an object")
    _require("resolution" in pot, "potential requires a resolution")
    res = pot["resolution"]
    _require(isinstance(res, int) and res >= 16,
             f"resolution must be an integer >= 16, got {res!r}")

    certs = doc.get("certificates", [])
    _require(isinstance(certs, list), "certificates must be a list")
    for c in certs:
        _require(isinstance(c, dict) and set(c) == _CERT_KEYS,
                 f"certificate entries need exactly {sorted(_CERT_KEYS)}")
        _require(c["source"] in ("poincare", "logsobolev"),
                 f"unknown certificate source {c['source']!r}")
        _require(isinstance(c["constant"], (int, float)) and c["constant"] > 0,
                 "certificate constant must be a positive number")

    needs_sim = bool(set(tasks) & {"simulate", "validate"})
    if needs_sim:
        _require("sim" in doc, "simulate/validate tasks require a sim block")
    if "sim" in doc:
        sim = doc["sim"]
        _require(isinstance(sim, dict), "sim must be an object")
        extra = set(sim) - _SIM_KEYS
        _require(not extra, f"unknown sim fields: {sorted(extra)}")
        for key in ("dt", "horizon", "n_paths", "seed"):
            _require(key in sim, f"sim requires {key}")

    if "sweep" in doc or "sweep" in tasks:
        _require("sweep" in doc and "sweep" in tasks,
                 "sweep task and sweep block must appear together")
        sw = doc["sweep"]
        _require(isinstance(sw, dict) and set(sw) == {"parameter", "values"},
                 "sweep needs exactly parameter and values")
        _require(sw["parameter"] == "dilation",
                 f"unsupported sweep parameter {sw['parameter']!r}")
        _require(isinstance(sw["values"], list) and sw["values"]
                 and all(isinstance(v, (int, float)) and v > 0
                         for v in sw["values"]),
                 "sweep values must be positive numbers")

    if "ultrabounded" in doc:
        ub = doc["ultrabounded"]
        _require(isinstance(ub, dict) and set(ub) == _ULTRA_KEYS,
                 f"ultrabounded needs exactly {sorted(_ULTRA_KEYS)}")
    return doc


def _sim_config(doc: dict, seed_override=None) -> SimConfig:
    sim = doc["sim"]
    seed = int(sim["seed"] if seed_override is None else seed_override)
    try:
        return SimConfig(
            dt=float(sim["dt"]), horizon=float(sim["horizon"]),
            n_paths=int(sim["n_paths"]), seed=seed,
            richardson=bool(sim.get("richardson", False)),
        )
    except AssertionError as exc:
        raise ConfigError(f"invalid sim block: {exc}")


def _certificates(doc: dict):
    out = []
    for c in doc.get("certificates", []):
        if c["source"] == "poincare":
            out.append(from_poincare(float(c["constant"])))
        else:
            out.append(from_logsobolev(float(c["constant"])))
    return out


def _jsonable(obj):
    """Recursively convert to JSON-safe values; non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _write_csv(path: Path, rows: list[dict], fieldnames: list[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k) for k in fieldnames})


def _plot_w1_decay(path: Path, curve: dict, theta=None) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t = np.asarray(curve["times"])
    w1 = np.asarray(curve["w1"])
    err = 1.96 * np.asarray(curve["stderr"])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(t, w1, yerr=err, fmt="o", ms=3, capsize=2, label="empirical W1")
    fit = w1[0] * np.exp(-curve["rate"] * (t - t[0]))
    ax.plot(t, fit, "--", label=f"fit: rate {curve['rate']:.3f}")
    if theta is not None and theta > 0:
        ref = w1[0] * np.exp(-theta * (t - t[0]))
        ax.plot(t, ref, ":", label=f"bound rate {theta:.3f}")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("W1(law_t, mu)")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _plot_bounds(path: Path, rows: list[dict], cp_true=None) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = [r["branch"] for r in rows if r["valid"] and r["theta_or_cp"]]
    vals = [r["theta_or_cp"] for r in rows if r["valid"] and r["theta_or_cp"]]
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.bar(range(len(vals)), vals, color="#4878a8")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    if cp_true is not None:
        ax.axhline(cp_true, color="#a84848", ls="--", lw=1.2,
                   label=f"spectral truth {cp_true:.4f}")
        ax.legend(frameon=False)
    ax.set_ylabel("Poincare bound")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# ---------------------------------------------------------------------------
# task runners


def _build_problem(doc: dict):
    pot_doc = dict(doc["potential"])
    resolution = pot_doc.pop("resolution")
    try:
        potential = potential_from_spec(pot_doc)
        m = build_grid_measure(potential, resolution)
        stats = curvature_stats(m, potential, cost_kind="hamming",
                                quantile=float(doc.get("quantile", 0.5)))
    except ValueError as exc:
        raise ConfigError(str(exc))
    return potential, m, stats


def _run_bounds(doc, potential, m, stats):
    certs = _certificates(doc) or None
    return best_poincare(
        stats, certs, m=m, potential=potential,
        bl_constant=doc.get("brascamp_lieb_constant"),
    )


def _run_spectral(potential, m):
    if m.dim != 1:
        return None
    return spectral_gap_1d(m, potential)


def _run_simulate(doc, potential, m, cfg, theta_ref):
    sim = doc["sim"]
    if potential.dim != 1:
        raise ConfigError("the simulate task is one-dimensional")
    center = potential.box_centers()
    half = potential.box_half_widths()
    init = np.asarray(sim.get("init_point", center + 0.5 * half), dtype=float)
    times = sim.get("times")
    if times is None:
        times = np.linspace(cfg.horizon / 8.0, cfg.horizon, 8)
    else:
        times = np.asarray(times, dtype=float)
    curve = w1_decay_curve(potential, cfg, init.reshape(1, -1), times, m)
    return curve


def _check(name: str, verdict: str, evidence: str) -> dict:
    return {"check": name, "verdict": verdict, "evidence": evidence}


def _run_validate(doc, potential, m, stats, cfg, spectral, bounds) -> list[dict]:
    """The verdict table.  Every check returns pass, fail, or inconclusive."""
    checks: list[dict] = []
    dim = potential.dim
    if dim != 1:
        raise ConfigError("the validate task is one-dimensional")
    cp_true = spectral.cp_true
    grid_gap = abs(1.0 / spectral.richardson_estimate - cp_true)
    tol = 1e-3 * max(1.0, cp_true) + 2.0 * grid_gap

    for c in doc.get("certificates", []):
        if c["source"] == "poincare":
            ok = c["constant"] >= cp_true - tol
            need = cp_true
        else:
            ok = c["constant"] >= 2.0 * cp_true - tol
            need = 2.0 * cp_true
        checks.append(_check(
            f"certificate_plausibility[{c['source']}]",
            "pass" if ok else "fail",
            f"constant {c['constant']:.6g} vs spectral floor {need:.6g}",
        ))

    winner = bounds["winner"]
    if winner is None:
        checks.append(_check("oracle_dominance", "inconclusive",
                             "no valid bound to compare"))
    else:
        ok = winner.cp_bound >= cp_true - tol
        checks.append(_check(
            "oracle_dominance", "pass" if ok else "fail",
            f"bound {winner.cp_bound:.6g} ({winner.branch}) vs "
            f"truth {cp_true:.6g}",
        ))

    # Pathwise contraction on a stratified spread of pairs.
    n_pairs = max(2, min(cfg.n_paths, 2000))
    qs = equilibrium_sampler_1d(m, n_pairs)
    pair_cfg = replace(cfg, n_paths=n_pairs,
                       horizon=min(cfg.horizon, 1.0))
    contraction = pathwise_contraction_verdict(
        potential, pair_cfg, qs, qs[::-1].copy(), mode="rho")
    verdict = {"pass": "pass", "fail": "fail",
               "inconclusive_discretization": "inconclusive"}[
        contraction["verdict"]]
    checks.append(_check(
        "pathwise_contraction", verdict,
        f"violations coarse {contraction['coarse']['n_violations']}, "
        f"fine {contraction['fine']['n_violations']} "
        f"(tol {contraction['coarse']['tol']:.2e}); "
        f"monotone flips {contraction['coarse']['monotone_violations']}",
    ))

    # Gradient commutation at a generic point with a bounded test function.
    f = ScalarField(
        value=lambda x: np.sin(np.asarray(x)[..., 0]),
        gradient=lambda x: np.cos(np.asarray(x, dtype=float)[..., 0:1]),
    )
    x_gen = potential.box_centers() + 0.25 * potential.box_half_widths()
    comm_cfg = replace(cfg, n_paths=max(2, min(cfg.n_paths, 20000)))
    comm = check_gradient_commutation(
        potential, comm_cfg, f, x_gen, [min(1.0, cfg.horizon)])
    checks.append(_check(
        "gradient_commutation", comm[0]["verdict"],
        f"lhs {comm[0]['lhs']:.5g} (se {comm[0]['lhs_stderr']:.2g}) vs "
        f"rhs {comm[0]['rhs']:.5g} (se {comm[0]['rhs_stderr']:.2g})",
    ))

    # Laplace transform dominance from equilibrium starts.
    cp_for_cert = winner.cp_bound if winner is not None else None
    if cp_for_cert is None:
        checks.append(_check("laplace_dominance", "inconclusive",
                             "no Poincare bound available for a certificate"))
    else:
        cert = from_poincare(cp_for_cert)
        fs = from_curvature_stats(stats.with_cost("hamming"))
        t_lap = min(2.0, cfg.horizon)
        bound = laplace_moment_bound(cert, fs, lam=1.0, t=t_lap)
        mc = estimate_exp_functional(
            potential, cfg,
            lambda n, rng: equilibrium_sampler_1d(m, n),
            lambda pts: curvature_values(potential, pts),
            lam=1.0, t=t_lap,
        )
        upper = mc.ci95[1]
        ok = bound >= upper - 1e-9 * max(1.0, abs(upper))
        checks.append(_check(
            "laplace_dominance", "pass" if ok else "fail",
            f"bound {bound:.6g} vs MC upper CI {upper:.6g} "
            f"(mean {mc.mean:.6g}, se {mc.stderr:.2g})",
        ))

    # Variance decay against the certified bound rate.  Late times drown in
    # inner sampling noise, so stop near one certified relaxation time.
    ident = ScalarField(value=lambda x: np.asarray(x)[..., 0])
    cp_bound_val = cp_for_cert if cp_for_cert is not None else cp_true
    t_hi = min(cfg.horizon, 1.5 * cp_bound_val)
    t_var = np.linspace(t_hi / 3.0, t_hi, 3)
    vdec = variance_decay_check(potential, cfg, ident, t_var, m,
                                n_outer=192, n_inner=128)
    worst = "pass"
    details = []
    for ti, t in enumerate(vdec["times"]):
        if vdec["inconclusive"][ti]:
            worst = "inconclusive" if worst == "pass" else worst
            details.append(f"t={t:.2f}: inconclusive")
            continue
        limit = (math.exp(-t / cp_bound_val) * vdec["var_mu_f"]
                 + 2.0 * vdec["stderr"][ti])
        if vdec["var_est"][ti] > limit:
            worst = "fail"
            details.append(f"t={t:.2f}: {vdec['var_est'][ti]:.4g} > {limit:.4g}")
        else:
            details.append(f"t={t:.2f}: {vdec['var_est'][ti]:.4g} <= {limit:.4g}")
    checks.append(_check("variance_decay", worst, "; ".join(details)))

    # Fixed point: feeding the winner back must not improve it further.
    if winner is not None:
        refreshed = best_poincare(
            stats, [from_poincare(winner.cp_bound)], m=m, potential=potential,
            bl_constant=doc.get("brascamp_lieb_constant"),
        )
        again = refreshed["winner"]
        moved = (again is not None
                 and again.cp_bound < winner.cp_bound * (1.0 - 1e-9))
        checks.append(_check(
            "fixed_point", "fail" if moved else "pass",
            f"re-fed bound {again.cp_bound if again else float('nan'):.10g} "
            f"vs winner {winner.cp_bound:.10g}",
        ))

    # Determinism: two identical short runs must agree bitwise.
    small = SimConfig(dt=cfg.dt, horizon=50 * cfg.dt, n_paths=64,
                      seed=cfg.seed)
    x_det = potential.box_centers() + 0.25 * potential.box_half_widths()
    r1 = simulate(potential, small, x_det)
    r2 = simulate(potential, small, x_det)
    same = bool(np.array_equal(r1.final, r2.final))
    checks.append(_check(
        "determinism", "pass" if same else "fail",
        "repeated run with the same seed is bitwise identical"
        if same else "repeated run diverged",
    ))

    if "ultrabounded" in doc:
        ub = doc["ultrabounded"]
        nodes = m.nodes[:, 0]
        second = m.expectation(nodes * nodes)
        val = ultrabounded_direct_bound(
            float(ub["K_eta"]), float(ub["eta"]), cp_true, second,
            float(ub["tv"]), float(ub["t"]),
        )
        checks.append(_check(
            "ultrabounded_bound", "pass",
            f"direct W1 bound {val:.6g} at rate 1/C_P = {1.0 / cp_true:.6g}",
        ))
    return checks


def _run_sweep(doc, potential, stats) -> list[dict]:
    from .potential_measure import dilate

    resolution = doc["potential"]["resolution"]
    rows = []
    base = best_poincare(stats)["winner"]
    for lam in doc["sweep"]["values"]:
        lam = float(lam)
        p_lam = dilate(potential, lam)
        m_lam = build_grid_measure(p_lam, resolution)
        s_lam = curvature_stats(m_lam, p_lam, cost_kind=stats.cost_kind,
                                quantile=stats.quantile)
        win = best_poincare(s_lam)["winner"]
        row = {"lambda": lam}
        if win is not None and base is not None:
            row["cp_bound"] = win.cp_bound
            row["branch"] = win.branch
            row["scaled_ratio"] = win.cp_bound / (lam * lam * base.cp_bound)
        else:
            row["cp_bound"] = None
            row["branch"] = None
            row["scaled_ratio"] = None
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# commands


def _print_bounds_table(bounds: dict) -> None:
    print(f"{'branch':28s} {'valid':6s} {'value':>14s} {'epsilon':>10s} "
          f"{'r':>8s}  reason")
    for row in bounds["audit"]:
        val = row["theta_or_cp"]
        eps = row["epsilon"]
        r = row["r"]
        print(f"{row['branch']:28s} {str(row['valid']):6s} "
              f"{'' if val is None else format(val, '.6g'):>14s} "
              f"{'' if eps is None else format(eps, '.4g'):>10s} "
              f"{'' if r is None else format(r, '.4g'):>8s}  {row['reason']}")
    win = bounds["winner"]
    if win is not None:
        print(f"\nwinner: {win.branch}  C_P <= {win.cp_bound:.8g} "
              f"({len(bounds['iterations'])} feedback iterations)")
    else:
        print("\nno valid Poincare bound")


def _exit_code_from_checks(checks: list[dict]) -> int:
    verdicts = {c["verdict"] for c in checks}
    if "fail" in verdicts:
        return 1
    if "inconclusive" in verdicts:
        return 3
    return 0


def cmd_bounds(doc: dict, out_dir: Path, branch_filter=None) -> int:
    potential, m, stats = _build_problem(doc)
    bounds = _run_bounds(doc, potential, m, stats)
    if branch_filter is not None:
        wanted = [rp for rp in bounds["reports"]
                  if rp.branch == branch_filter
                  or rp.branch == f"poincare_{branch_filter}"]
        if not wanted:
            raise ConfigError(f"unknown branch {branch_filter!r}; "
                              f"choose from {list(BRANCH_ORDER)}")
        bounds = {**bounds, "winner": wanted[0],
                  "audit": [wanted[0].csv_row()], "reports": wanted}
    _print_bounds_table(bounds)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "bounds.csv", bounds["audit"],
               ["branch", "valid", "theta_or_cp", "epsilon", "r", "reason"])
    report = {
        "schema_version": 1,
        "config": doc,
        "curvature_stats": _jsonable(stats.__dict__),
        "bounds": {
            "winner": None if bounds["winner"] is None
            else bounds["winner"].to_dict(),
            "reports": [rp.to_dict() for rp in bounds["reports"]],
            "iterations": bounds["iterations"],
        },
    }
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(_jsonable(report), fh, indent=2)
    if bounds["winner"] is None:
        return 3
    return 0


def cmd_run(doc: dict, out_dir: Path, seed_override=None,
            only_validate: bool = False) -> int:
    potential, m, stats = _build_problem(doc)
    tasks = list(doc["tasks"])
    if only_validate and "validate" not in tasks:
        tasks.append("validate")

    spectral = None
    if "spectral" in tasks or "validate" in tasks:
        spectral = _run_spectral(potential, m)

    bounds = _run_bounds(doc, potential, m, stats)

    cfg = None
    if set(tasks) & {"simulate", "validate"}:
        cfg = _sim_config(doc, seed_override)

    curve = None
    theta_ref = None
    baseline_theta = None
    if stats.rho0 > 0.0:
        w1rep = w1_rate_positive_curvature(stats, "osc")
        if w1rep.valid:
            theta_ref = w1rep.theta
        baseline_theta = stats.rho0
    if "simulate" in tasks and not only_validate:
        curve = _run_simulate(doc, potential, m, cfg, theta_ref)

    checks = None
    if "validate" in tasks or only_validate:
        if spectral is None:
            raise ConfigError("validation requires the 1d spectral oracle")
        checks = _run_validate(doc, potential, m, stats, cfg, spectral, bounds)

    sweep_rows = None
    if "sweep" in tasks and not only_validate:
        sweep_rows = _run_sweep(doc, potential, stats)

    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "bounds.csv", bounds["audit"],
               ["branch", "valid", "theta_or_cp", "epsilon", "r", "reason"])
    if curve is not None:
        rows = [{"t": float(t), "estimate": float(v), "stderr": float(s)}
                for t, v, s in zip(curve["times"], curve["w1"],
                                   curve["stderr"])]
        _write_csv(out_dir / "w1_decay.csv", rows, ["t", "estimate", "stderr"])
        _plot_w1_decay(out_dir / "w1_decay.svg", curve, theta_ref)
    cp_true = spectral.cp_true if spectral is not None else None
    _plot_bounds(out_dir / "bounds_vs_truth.svg", bounds["audit"], cp_true)
    if sweep_rows is not None:
        _write_csv(out_dir / "sweep.csv", sweep_rows,
                   ["lambda", "cp_bound", "branch", "scaled_ratio"])

    exit_code = 0 if checks is None else _exit_code_from_checks(checks)
    report = {
        "schema_version": 1,
        "config": doc,
        "curvature_stats": _jsonable(stats.__dict__),
        "spectral": None if spectral is None else {
            "lambda1": spectral.lambda1,
            "cp_true": spectral.cp_true,
            "resolution": spectral.resolution,
            "richardson_estimate": spectral.richardson_estimate,
            "converged": spectral.converged,
        },
        "bounds": {
            "winner": None if bounds["winner"] is None
            else bounds["winner"].to_dict(),
            "reports": [rp.to_dict() for rp in bounds["reports"]],
            "iterations": bounds["iterations"],
        },
        "w1_curve": None if curve is None else {
            "times": curve["times"], "w1": curve["w1"],
            "stderr": curve["stderr"], "rate": curve["rate"],
            "rate_stderr": curve["rate_stderr"],
            "reference_theta": theta_ref,
            "baseline_theta": baseline_theta,
        },
        "validation": checks,
        "sweep": sweep_rows,
        "exit_code": exit_code,
    }
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(_jsonable(report), fh, indent=2)

    if checks is not None:
        width = max(len(c["check"]) for c in checks)
        for c in checks:
            print(f"{c['check']:{width}s}  {c['verdict']:12s}  {c['evidence']}")
    if bounds["winner"] is not None:
        print(f"\nbest Poincare bound: {bounds['winner'].cp_bound:.8g} "
              f"({bounds['winner'].branch})"
              + ("" if cp_true is None else f"; spectral truth {cp_true:.8g}"))
    return exit_code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="curvebound",
        description="Curvature-driven Poincare bounds and W1 contraction "
                    "rates, with spectral and Monte Carlo validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("run", "execute the config's task list and write reports"),
        ("validate", "run only the validation verdict table"),
        ("bounds", "run only the bound tournament"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="path to the JSON config")
        p.add_argument("--seed", type=int, default=None,
                       help="override the sim seed")
        p.add_argument("--out", default=None,
                       help="override the output directory")
        if name == "bounds":
            p.add_argument("--branch", default=None,
                           help="report a single branch instead of the winner")

    args = parser.parse_args(argv)
    try:
        doc = load_config(args.config)
        out_dir = Path(args.out if args.out is not None else doc["output_dir"])
        if args.command == "bounds":
            return cmd_bounds(doc, out_dir, args.branch)
        if args.command == "validate":
            return cmd_run(doc, out_dir, args.seed, only_validate=True)
        return cmd_run(doc, out_dir, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"hard failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
