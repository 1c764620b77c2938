"""Acceptance criteria 1-10, each checked at its stated tolerance and runtime budget.

Every test records a single ``PASS``/``FAIL`` line (shown in the terminal
summary, and printed immediately with ``-s``) before asserting.
"""

import math
import tempfile
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from adaptive_gm.harness import load_preset, preset_names, run_experiment, run_oracle_theorem
from adaptive_gm.linalg import Spectrum
from adaptive_gm.optimizers import (
    AdaptiveSchedule,
    FixedSchedule,
    Method,
    RunConfig,
    optimal_params,
    param_rule,
    rate_bound,
    run,
)
from adaptive_gm.oracle import (
    case1_threshold,
    gd_limit,
    nag_iteration_matrix,
    nag_limit,
    nag_spectral_radius,
    simulate_gd_rho_sequence,
    simulate_nag_rho_sequence,
)
from adaptive_gm.problems import (
    DenoiseProblem,
    denoise_bounds,
    denoise_grad,
    denoise_value,
    gen_denoise,
    gen_logistic,
    logistic_grad,
    logistic_hvp,
    logistic_value,
    quadratic_from_spectrum,
    reference_solve,
)

from conftest import ACCEPTANCE_LINES


def report(number, title, ok, detail, elapsed):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} -- {detail} ({elapsed:.2f}s)"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    assert ok, line


def fd_grad(f, x, h):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def run_preset(name, **overrides):
    cfg = load_preset(name).with_overrides(output_dir=tempfile.mkdtemp(prefix=f"{name}-"), **overrides)
    return run_experiment(cfg)


def test_criterion_01_gd_oracle_limit():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    worst_limit = worst_contraction = 0.0
    case1 = 0
    for _ in range(50):
        mu = float(rng.uniform(0.01, 0.8))
        L = float(rng.uniform(mu, 1.0))
        spec = Spectrum([mu, L])
        rho = [r for r, _ in simulate_gd_rho_sequence(spec, 200)]
        lim = gd_limit(mu)
        worst_limit = max(worst_limit, abs(rho[-1] - lim))
        if L <= case1_threshold(mu):
            case1 += 1
            for a, b in zip(rho, rho[1:]):
                worst_contraction = max(worst_contraction, abs(abs(b - lim) - mu * abs(a - lim)))
    elapsed = time.perf_counter() - t0
    ok = worst_limit < 1e-10 and worst_contraction <= 1e-13 and case1 > 0 and elapsed < 1.0
    report(1, "adaptive GD oracle limit", ok,
           f"max |rho_200 - lim| = {worst_limit:.2e} (< 1e-10), case-1 contraction residual "
           f"{worst_contraction:.2e} (<= 1e-13) over {case1} case-1 pairs", elapsed)


def test_criterion_02_nag_oracle_limit():
    t0 = time.perf_counter()
    gaps, bounds_ok = [], True
    for mu in (0.25, 0.09, 0.01):
        rho = np.array([r for r, _ in simulate_nag_rho_sequence(Spectrum([mu, 1.0]), 2000)])
        gaps.append(abs(rho[-1] - nag_limit(mu)))
        bounds_ok &= bool(np.all(rho >= 0.0) and np.all(rho <= 1.0 - mu))
    elapsed = time.perf_counter() - t0
    ok = max(gaps) < 1e-8 and bounds_ok and elapsed < 1.0
    report(2, "adaptive NAG oracle limit", ok,
           f"gaps {', '.join(f'{g:.1e}' for g in gaps)} (< 1e-8), 0 <= rho_k <= 1-mu: {bounds_ok}", elapsed)


def test_criterion_03_adaptive_gd_contraction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_ratio = -math.inf
    alpha_ok = True
    for _ in range(100):
        mu = float(rng.uniform(0.01, 0.5))
        L = float(rng.uniform(mu, 1.0))
        lam = np.concatenate([[mu, L], rng.uniform(mu, L, 48)])
        prob = quadratic_from_spectrum(Spectrum(lam), rng.standard_normal(50))
        x0 = rng.standard_normal(50)
        for window in (1, 5, "full"):
            tr = run("GD", AdaptiveSchedule(window), prob, x0, RunConfig(200, 1e-12))
            g = np.array([r.grad_norm for r in tr.rows])
            # excess of ||r_k|| / ||r_{k-1}|| over the bound (1 - mu)(1 + 1e-12)
            worst_ratio = max(worst_ratio, float(np.max(g[1:] / g[:-1] - (1 - mu) * (1 + 1e-12))))
            alphas = np.array([r.alpha for r in tr.rows[1:]])
            alpha_ok &= bool(np.all(alphas >= 1.0) and np.all(alphas <= 2.0 - mu + 1e-12))
    elapsed = time.perf_counter() - t0
    ok = worst_ratio <= 0.0 and alpha_ok and elapsed < 5.0
    report(3, "adaptive GD contraction and step range", ok,
           f"max ratio excess over (1-mu)(1+1e-12) = {worst_ratio:.2e} (<= 0), "
           f"alpha in [1, 2-mu+1e-12]: {alpha_ok}", elapsed)


def test_criterion_04_fixed_point_identities():
    t0 = time.perf_counter()
    worst_fp = worst_inv = 0.0
    for mu in (0.01, 0.09, 0.25, 0.5):
        for method in Method:
            rho = rate_bound(method, mu, 1.0)
            got = np.array(param_rule(method, rho, 1.0))
            want = np.array(optimal_params(method, mu, 1.0))
            worst_fp = max(worst_fp, float(np.max(np.abs(got - want))))
    for method in (Method.NAG, Method.HB):
        for rho in np.arange(1, 10) / 10:
            betas = [param_rule(method, rho, Lt)[1] for Lt in (0.5, 1.0, 4.0, 100.0)]
            worst_inv = max(worst_inv, max(betas) - min(betas))
    elapsed = time.perf_counter() - t0
    ok = worst_fp <= 1e-14 and worst_inv <= 1e-14 and elapsed < 1.0
    report(4, "parameter-rule fixed points", ok,
           f"max |rule(rho*) - optimal| = {worst_fp:.1e}, max beta spread over L_tilde = {worst_inv:.1e} "
           f"(<= 1e-14)", elapsed)


def test_criterion_05_uniform_preset():
    t0 = time.perf_counter()
    res = run_preset("quadratic-uniform-gd")
    elapsed = time.perf_counter() - t0
    tr = res.traces
    rho_hat = tr["GD-adaptive-full"].last.rho_est
    rho_star = (1 - 0.001) / (1 + 0.001)
    fe_adapt = tr["GD-adaptive-l1"].last.function_error
    fe_fixed = tr["GD-fixed-optimal"].last.function_error
    ok = abs(rho_hat - rho_star) <= 0.05 and fe_adapt <= 10 * fe_fixed and elapsed < 30.0
    report(5, "uniform spectrum, adaptive GD", ok,
           f"|rho_hat - rho*| = {abs(rho_hat - rho_star):.4f} (<= 0.05); function error "
           f"adaptive l=1 {fe_adapt:.3e} vs fixed {fe_fixed:.3e} (<= 10x)", elapsed)


def test_criterion_06_log_preset_nag():
    # tol 1e-12 is out of reach for every NAG variant within 3000 iterations on this
    # spectrum, so the iteration comparison runs the same preset with a larger cap
    t0 = time.perf_counter()
    cfg = load_preset("quadratic-log-nag")
    cfg = cfg.with_overrides(output_dir=tempfile.mkdtemp(), max_iterations=20000)
    keep = ("NAG-fixed-optimal", "NAG-adaptive-l1", "NAG-adaptive-full")
    cfg = replace(cfg, methods=tuple(m for m in cfg.methods if m.label in keep))
    res = run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    tr = res.traces
    fixed, adapt, full = tr["NAG-fixed-optimal"], tr["NAG-adaptive-l1"], tr["NAG-adaptive-full"]
    mu = 1e-5  # smallest eigenvalue after rescaling to L = 1
    gap = abs(full.last.rho_est - nag_limit(mu))
    reached = all(t.stop_reason == "tolerance" for t in (fixed, adapt, full))
    ok = reached and adapt.iterations <= 2 * fixed.iterations and gap <= 0.05 and elapsed < 30.0
    report(6, "log spectrum, adaptive NAG", ok,
           f"iterations adaptive l=1 {adapt.iterations} vs fixed {fixed.iterations} (<= 2x); "
           f"|rho_hat(full) - (1-sqrt(mu))| = {gap:.1e} (<= 0.05) at iteration {full.iterations}", elapsed)


def test_criterion_07_logistic():
    t0 = time.perf_counter()
    worst_g = worst_h = 0.0
    for seed in range(5):
        prob = gen_logistic(3, 5, 0.1, seed)
        rng = np.random.default_rng(100 + seed)
        x, v = rng.standard_normal((2, 3))
        worst_g = max(worst_g, rel(logistic_grad(prob, x), fd_grad(lambda z: logistic_value(prob, z), x, 1e-6)))
        h = 1e-6
        fd = (logistic_grad(prob, x + h * v) - logistic_grad(prob, x - h * v)) / (2 * h)
        worst_h = max(worst_h, rel(logistic_hvp(prob, x, v), fd))

    res = run_preset("logistic-nag")
    tr = res.traces
    nag_ok = all(tr[k].stop_reason == "tolerance" and tr[k].iterations <= 350
                 for k in ("NAG-adaptive-l1", "NAG-adaptive-l5"))

    big = gen_logistic(500, 2000, 0.1, seed=0)
    x0 = np.zeros(500)
    _, info = reference_solve(big, x0, big.bounds()[1], tol=1e-12, max_iters=100_000)
    elapsed = time.perf_counter() - t0
    ok = worst_g < 1e-6 and worst_h < 1e-5 and nag_ok and info["relative_grad_norm"] < 1e-12 and elapsed < 120
    report(7, "logistic regression", ok,
           f"FD grad {worst_g:.1e} (< 1e-6), FD hvp {worst_h:.1e} (< 1e-5); adaptive NAG iterations "
           f"l=1 {tr['NAG-adaptive-l1'].iterations}, l=5 {tr['NAG-adaptive-l5'].iterations} by tolerance; "
           f"reference rel grad {info['relative_grad_norm']:.1e} (< 1e-12)", elapsed)


def test_criterion_08_denoise():
    t0 = time.perf_counter()
    prob, _ = gen_denoise("synthetic", sigma=0.05, seed=0, xi=4.0, eta=0.06, delta=0.05)
    bounds_ok = denoise_bounds(prob) == (4.0, 13.6)

    rng = np.random.default_rng(3)
    small = DenoiseProblem(rng.random((6, 6)), 4.0, 0.06, 0.05)
    u = rng.random(36)
    fd_err = rel(denoise_grad(small, u), fd_grad(lambda z: denoise_value(small, z), u, 1e-7))

    mu_t, L_t = denoise_bounds(prob)
    x0 = prob.u0.ravel().copy()
    cfg = RunConfig(200, np.finfo(float).tiny)
    fixed = run("GD", FixedSchedule(2.0 / (mu_t + L_t)), prob, x0, cfg, x_star=x0)
    adapt = run("GD", AdaptiveSchedule(1, L_tilde=L_t), prob, x0, cfg, x_star=x0)
    f0 = denoise_value(prob, x0)
    values = np.array([f0 + r.function_error for r in fixed.rows])
    # pairwise summation of N pixel terms is exact to ~log2(N) ulps of the total
    slack = math.log2(prob.dimension) * np.finfo(float).eps * abs(values[-1])
    increase = float(np.max(np.diff(values)))
    mono_ok = len(fixed.rows) == 201 and increase <= slack
    f_fixed = denoise_value(prob, fixed.x_final)
    f_adapt = denoise_value(prob, adapt.x_final)
    rel_gap = abs(f_adapt - f_fixed) / abs(f_fixed)
    elapsed = time.perf_counter() - t0
    ok = bounds_ok and fd_err < 1e-5 and mono_ok and adapt.iterations == 200 and rel_gap <= 0.01 and elapsed < 120
    report(8, "Huber-TV denoising", ok,
           f"bounds {denoise_bounds(prob)}; FD grad {fd_err:.1e} (< 1e-5); fixed GD max increase "
           f"{increase:.1e} (rounding bound {slack:.1e}) over 200 iterations; objective gap "
           f"{100 * rel_gap:.4f}% (<= 1%)", elapsed)


def test_criterion_09_oracle_vs_dense():
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 9))
        lam = rng.uniform(0.0, 1.0, n)
        lam = np.where(lam > 0.0, lam, 0.5)
        beta = float(rng.uniform(0.0, 1.0))
        dense = float(np.max(np.abs(np.linalg.eigvals(nag_iteration_matrix(beta, lam)))))
        worst = max(worst, abs(nag_spectral_radius(beta, Spectrum(lam)) - dense))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 5.0
    report(9, "NAG oracle vs dense eigensolve", ok, f"max difference {worst:.1e} (<= 1e-10)", elapsed)


def test_criterion_10_determinism():
    t0 = time.perf_counter()
    mismatches, compared = [], 0
    for name in preset_names():
        dirs = [Path(tempfile.mkdtemp(prefix=f"{name}-{i}-")) for i in range(2)]
        for i, d in enumerate(dirs):
            cfg = load_preset(name).with_overrides(output_dir=str(d))
            if cfg.experiment == "oracle-theorem":
                run_oracle_theorem(cfg)
            else:
                # the second run uses worker threads; output must not depend on scheduling
                run_experiment(cfg, jobs=1 if i == 0 else 4)
        for f in sorted(dirs[0].glob("*.csv")):
            compared += 1
            if f.read_bytes() != (dirs[1] / f.name).read_bytes():
                mismatches.append(f"{name}/{f.name}")
    elapsed = time.perf_counter() - t0
    ok = compared > 0 and not mismatches
    report(10, "determinism", ok,
           f"{compared} CSV files over {len(preset_names())} presets, {len(mismatches)} differ", elapsed)
