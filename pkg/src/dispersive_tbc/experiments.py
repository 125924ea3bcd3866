"""Numerical experiments behind the command-line interface.

Functions here return plain data; file output lives in ``cli``.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .orthopoly import build_rule, legendre_table
from .reference import airy_exact, error_norms, fourier_constant_g
from .solver import gaussian, run, scale_problem
from .tbc import build_kernels, classified_roots, polynomial_residual


def exact_solution(g: str, t: float, x) -> np.ndarray | None:
    """Whole-line solution for the Gaussian, or None when g is not constant."""
    x = np.asarray(x, dtype=float)
    if t == 0:
        return gaussian(x)
    if str(g).strip().lower() == "cosine":
        return None
    gv = float(g)
    if gv == 0:
        return airy_exact(t, x, gaussian)
    return fourier_constant_g(t, x, gaussian, gv)


@dataclass
class Snapshot:
    t: float
    x: np.ndarray
    u: np.ndarray
    exact: np.ndarray | None

    @property
    def abs_error(self):
        return None if self.exact is None else np.abs(self.u - self.exact)


@dataclass
class RunResult:
    snapshots: list
    info: dict = field(default_factory=dict)


def run_experiment(cfg: RunConfig) -> RunResult:
    spec = cfg.problem()
    t0 = time.perf_counter()
    traj = run(spec, cfg.snapshot_times, check_bc=True)
    elapsed = time.perf_counter() - t0
    snaps = [Snapshot(t, traj.x, u, exact_solution(cfg.g_kind, t, traj.x)) for t, u in zip(traj.times, traj.values)]
    k = traj.machinery.kernels
    info = {
        "wall_time_s": elapsed,
        "max_bc_residual": traj.max_bc_residual,
        "scaled_tau": traj.scaled.tau,
        "scaled_g_minus": traj.scaled.g_minus,
        "scaled_g_plus": traj.scaled.g_plus,
        "kernel_radius": k.radius,
        "kernel_samples": k.n_samples,
        "kernel_max_imag": k.max_imag,
        "y0": list(k.y0),
        **k.diagnostics,
        "snapshot_max_abs_error": [None if s.exact is None else float(np.max(s.abs_error)) for s in snaps],
    }
    return RunResult(snaps, info)


def _solve_all_steps(task):
    """Worker: every step of one solve, evaluated at the physical points ``x``."""
    cfg, g, n_steps, n_modes, x = task
    traj = run(cfg.problem(g, n_steps, n_modes), record_coeffs=True)
    xi = np.asarray(x) / cfg.half_width
    return traj.coeffs @ legendre_table(n_modes, xi)


def _solve_final(task):
    cfg, g, n_steps, n_modes = task
    traj = run(cfg.problem(g, n_steps, n_modes), [cfg.t_final])
    return traj.x, traj.values[-1]


def _map(fn, tasks, workers: int):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def supergeometric_fit(n_values, errors) -> dict:
    """Least-squares fits of log(err) against N^2 and against (N, N^2)."""
    n = np.asarray(n_values, dtype=float)
    le = np.log(np.asarray(errors, dtype=float))
    slope_n2, icpt = np.polyfit(n**2, le, 1)
    quad, lin, c0 = np.polyfit(n, le, 2)
    return {"slope_vs_n2": float(slope_n2), "intercept": float(icpt), "quad_coeff": float(quad), "lin_coeff": float(lin)}


def converge_space(cfg: RunConfig) -> dict:
    """Error against an N = ref_modes run over all steps, for each N in sweep_modes.

    Errors are compared at the reference nodes. ``rel_l2`` is
    sqrt(tau * sum_m (||e^m|| / ||u_ref^m||)^2); ``pointwise_l2`` uses
    pointwise-relative errors with small reference values excluded.
    """
    tau = cfg.t_final / cfg.n_steps
    rows, fits = [], {}
    for g in cfg.g_list():
        ref_traj_x = cfg.half_width * build_rule(cfg.ref_modes).nodes
        tasks = [(cfg, g, cfg.n_steps, n, ref_traj_x) for n in [cfg.ref_modes, *cfg.sweep_modes]]
        results = _map(_solve_all_steps, tasks, cfg.workers)
        ref = results[0]
        errs = []
        for n, vals in zip(cfg.sweep_modes, results[1:]):
            rep = error_norms(vals[1:], ref[1:], tau)
            final = float(rep.rel_m[-1])
            rows.append({"g": g, "N": n, "rel_l2": rep.rel_l2, "pointwise_l2": rep.l2, "final_rel": final})
            errs.append(rep.rel_l2)
        fits[g] = supergeometric_fit(cfg.sweep_modes, errs)
    return {"rows": rows, "fits": fits}


def converge_time(cfg: RunConfig) -> dict:
    """Relative l2 error at t_final for each m in sweep_steps, N = n_modes.

    Constant g compares with the whole-line solution; otherwise with an
    m = ref_steps run on the same nodes.
    """
    rows, slopes = [], {}
    for g in cfg.g_list():
        tasks = [(cfg, g, m, cfg.n_modes) for m in cfg.sweep_steps]
        exact_known = str(g).strip().lower() != "cosine"
        if not exact_known:
            tasks.append((cfg, g, cfg.ref_steps, cfg.n_modes))
        results = _map(_solve_final, tasks, cfg.workers)
        x = results[0][0]
        ref = exact_solution(g, cfg.t_final, x) if exact_known else results[-1][1]
        taus, errs = [], []
        for m, (_, u) in zip(cfg.sweep_steps, results):
            err = float(np.linalg.norm(u - ref) / np.linalg.norm(ref))
            tau = cfg.t_final / m
            rows.append({"g": g, "m": m, "tau": tau, "rel_error": err})
            taus.append(tau)
            errs.append(err)
        slopes[g] = float(np.polyfit(np.log(taus), np.log(errs), 1)[0])
    return {"rows": rows, "slopes": slopes}


def kernel_report(cfg: RunConfig) -> dict:
    """Kernels for the configured problem plus classification and convergence checks."""
    scaled = scale_problem(cfg.problem())
    c = 1.0 / scaled.t_final if cfg.c_radius is None else cfg.c_radius
    k = build_kernels(scaled.tau, scaled.g_minus, scaled.g_plus, scaled.n_steps, c)
    k2 = build_kernels(scaled.tau, scaled.g_minus, scaled.g_plus, scaled.n_steps, c, 2 * k.n_samples)
    delta = max(float(np.max(np.abs(a - b))) for a, b in zip((k.y1, k.y2, k.y3, k.y4), (k2.y1, k2.y2, k2.y3, k2.y4)))
    z = k.radius * np.exp(2j * np.pi * np.arange(k.n_samples) / k.n_samples)
    side = {}
    for name, g in (("minus", scaled.g_minus), ("plus", scaled.g_plus)):
        roots = classified_roots(z, scaled.tau, g)  # raises if classification fails
        side[name] = {
            "samples": int(k.n_samples),
            "negative_real_roots_each_sample": 1,
            "min_abs_real_part": float(np.min(np.abs(roots.real))),
            "max_poly_residual": float(np.max(np.abs(polynomial_residual(roots, z, scaled.tau, g)))),
        }
    return {
        "kernels": k,
        "tau": scaled.tau,
        "g_minus": scaled.g_minus,
        "g_plus": scaled.g_plus,
        "radius": k.radius,
        "n_samples": k.n_samples,
        "max_imag": k.max_imag,
        "doubling_delta": delta,
        "classification": side,
        **k.diagnostics,
        "log_radius_times_m": math.log(k.radius) * scaled.n_steps,
    }
