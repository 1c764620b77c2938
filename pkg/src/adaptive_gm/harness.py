"""Experiment runner: JSON config in, CSV traces out.

A config names an experiment family (``quadratic``, ``logistic``,
``denoise`` or ``oracle-theorem``), its problem parameters and a list of
methods. Each method entry is ``{"method": "GD"|"NAG"|"HB", "schedule":
"fixed-optimal"|"fixed-estimated"|"adaptive", "window": 1|5|"full"}``.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import oracle
from .eigen import power_iteration, shifted_power_iteration
from .linalg import ContractViolation, Spectrum
from .optimizers import (
    AdaptiveSchedule,
    DivergenceError,
    EstimatedSchedule,
    FixedSchedule,
    Method,
    RunConfig,
    Trace,
    optimal_params,
    run,
)
from .problems import (
    gen_denoise,
    gen_logistic,
    gen_spectrum,
    quadratic_from_spectrum,
    reference_solve,
    write_pgm,
    SpectrumSpec,
)
from .rates import parse_window

EXPERIMENTS = ("quadratic", "logistic", "denoise", "oracle-theorem")
SCHEDULES = ("fixed-optimal", "fixed-estimated", "adaptive")
TRACE_COLUMNS = ("iter", "solution_error", "function_error", "grad_norm", "rho_est", "alpha", "beta")
SUMMARY_COLUMNS = ("label", "method", "schedule", "window", "iterations", "solution_error",
                   "function_error", "grad_norm", "rho_est", "stop_reason")
ORACLE_COLUMNS = ("k", "rho_k", "limit", "gap", "param", "delta_L", "epsilon", "case")


class ConfigError(ValueError):
    """The experiment config is malformed or inconsistent."""


@dataclass(frozen=True)
class MethodSpec:
    method: Method
    schedule: str
    window: object = 1
    warmup_alpha: Optional[float] = None

    @property
    def label(self) -> str:
        if self.schedule == "adaptive":
            w = "full" if parse_window(self.window) is None else f"l{parse_window(self.window)}"
            return f"{self.method.value}-adaptive-{w}"
        return f"{self.method.value}-{self.schedule}"

    @classmethod
    def from_dict(cls, d: dict) -> "MethodSpec":
        try:
            method = Method(str(d["method"]).upper())
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad method entry {d!r}") from exc
        schedule = d.get("schedule", "adaptive")
        if schedule not in SCHEDULES:
            raise ConfigError(f"unknown schedule {schedule!r}; expected one of {SCHEDULES}")
        window = d.get("window", 1)
        try:
            parse_window(window)
        except (ContractViolation, ValueError) as exc:
            raise ConfigError(f"bad window {window!r}") from exc
        warm = d.get("warmup_alpha")
        return cls(method, schedule, window, None if warm is None else float(warm))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    problem: dict
    methods: tuple = ()
    max_iterations: int = 3000
    tolerance: float = 1e-12
    tolerance_mode: str = "absolute"
    seed: int = 0
    output_dir: str = "out"
    name: str = "experiment"
    description: str = ""
    options: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        experiment = d.get("experiment")
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
        methods = tuple(MethodSpec.from_dict(m) for m in d.get("methods", ()))
        if experiment != "oracle-theorem" and not methods:
            raise ConfigError("config lists no methods")
        cfg = cls(
            experiment=experiment,
            problem=dict(d.get("problem", {})),
            methods=methods,
            max_iterations=int(d.get("max_iterations", 3000)),
            tolerance=float(d.get("tolerance", 1e-12)),
            tolerance_mode=d.get("tolerance_mode", "absolute"),
            seed=int(d.get("seed", 0)),
            output_dir=str(d.get("output_dir", "out")),
            name=str(d.get("name", experiment)),
            description=str(d.get("description", "")),
            options=dict(d.get("options", {})),
        )
        try:
            cfg.run_config.validate()
        except ContractViolation as exc:
            raise ConfigError(str(exc)) from exc
        return cfg

    @property
    def run_config(self) -> RunConfig:
        return RunConfig(self.max_iterations, self.tolerance, self.tolerance_mode)

    def with_overrides(self, seed=None, output_dir=None, max_iterations=None, tolerance=None):
        changes = {k: v for k, v in dict(seed=seed, output_dir=output_dir,
                                          max_iterations=max_iterations,
                                          tolerance=tolerance).items() if v is not None}
        return replace(self, **changes)


def load_config(source) -> ExperimentConfig:
    """Load a config from a path, a preset name or an already-parsed dict."""
    if isinstance(source, dict):
        return ExperimentConfig.from_dict(source)
    path = Path(source)
    if not path.exists():
        if str(source) in preset_names():
            return load_preset(str(source))
        raise ConfigError(f"no config file or preset named {source!r}")
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def _preset_dir():
    return resources.files("adaptive_gm") / "configs"


def preset_names() -> list[str]:
    return sorted(p.name[:-5] for p in _preset_dir().iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> ExperimentConfig:
    p = _preset_dir() / f"{name}.json"
    if not p.is_file():
        raise ConfigError(f"unknown preset {name!r}")
    return ExperimentConfig.from_dict(json.loads(p.read_text()))


# -- CSV output ---------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float) or isinstance(v, np.floating):
        return format(float(v), ".17g")
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_trace_csv(trace: Trace, path) -> None:
    _write_csv(Path(path), TRACE_COLUMNS, trace.rows)


def emit_summary_csv(summaries, path) -> None:
    _write_csv(Path(path), SUMMARY_COLUMNS,
               ([getattr(s, c) for c in SUMMARY_COLUMNS] for s in summaries))


@dataclass(frozen=True)
class RunSummary:
    label: str
    method: str
    schedule: str
    window: str
    iterations: int
    solution_error: Optional[float]
    function_error: Optional[float]
    grad_norm: float
    rho_est: Optional[float]
    stop_reason: str

    @classmethod
    def from_trace(cls, spec: MethodSpec, trace: Trace, stop_reason=None) -> "RunSummary":
        last = trace.last
        window = "" if spec.schedule != "adaptive" else str(spec.window)
        return cls(spec.label, spec.method.value, spec.schedule, window, last.iteration,
                   last.solution_error, last.function_error, last.grad_norm, last.rho_est,
                   stop_reason or trace.stop_reason)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: dict
    summaries: list
    files: list

    @property
    def diverged(self) -> bool:
        return any(s.stop_reason == "diverged" for s in self.summaries)


# -- problem setup ------------------------------------------------------------

@dataclass
class _Setup:
    objective: object
    x0: np.ndarray
    x_star: Optional[np.ndarray]
    mu: float
    L: float
    L_tilde: float
    fixed_warmup: Optional[float]
    adaptive_warmup: dict  # Method -> warmup alpha or None
    extra: dict = field(default_factory=dict)


def _seeds(seed: int, count: int = 4):
    return np.random.SeedSequence(seed).spawn(count)


def _setup_quadratic(cfg: ExperimentConfig) -> _Setup:
    p = cfg.problem
    s_problem, s_x0, _, _ = _seeds(cfg.seed)
    if "spectrum" in p:
        sd = dict(p["spectrum"])
        sd.setdefault("seed", int(s_problem.generate_state(1)[0]))
        spectrum = gen_spectrum(SpectrumSpec.from_dict(sd))
    elif "eigenvalues" in p:
        spectrum = Spectrum(np.asarray(p["eigenvalues"], dtype=float))
    else:
        raise ConfigError("quadratic problem needs 'spectrum' or 'eigenvalues'")
    problem = quadratic_from_spectrum(spectrum)
    rescale = p.get("rescale", "exact")
    if rescale == "exact":
        problem = problem.rescaled(spectrum.L)
    elif rescale == "power":
        L_hat, _ = power_iteration(lambda v: problem.hvp(None, v), problem.dimension,
                                   seed=_seeds(cfg.seed)[2])
        problem = problem.rescaled(L_hat)
    elif rescale not in ("none", None, False):
        raise ConfigError(f"unknown rescale mode {rescale!r}")
    spec = problem.spectrum()
    x0 = np.random.default_rng(s_x0).uniform(0.0, 1.0, problem.dimension)
    warm = cfg.options.get("warmup_alpha", 1.0)
    return _Setup(problem, x0, problem.minimizer(), spec.mu, spec.L, 1.0, warm,
                  {m: warm for m in Method})


def _setup_logistic(cfg: ExperimentConfig) -> _Setup:
    p = cfg.problem
    s_problem, _, s_power, _ = _seeds(cfg.seed)
    prob = gen_logistic(int(p.get("n", 500)), int(p.get("p", 2000)), float(p.get("xi", 0.1)),
                        seed=p.get("seed", s_problem), label_prob=float(p.get("label_prob", 0.5)))
    x0 = np.zeros(prob.dimension)
    mu_t, L_t = prob.bounds()
    source = p.get("L_source", "bound")
    extra = {"L_bound": L_t}
    if source == "power":
        L_t, iters = power_iteration(lambda v: prob.hvp(x0, v), prob.dimension,
                                     tol=1e-6, max_iters=500, seed=s_power)
        extra["L_power_iterations"] = iters
    elif source != "bound":
        raise ConfigError(f"unknown L_source {source!r}")
    x_ref = _reference(cfg, prob, x0, L_t)
    two_over = 2.0 / (mu_t + L_t)
    return _Setup(prob, x0, x_ref, mu_t, L_t, L_t, two_over,
                  {Method.GD: None, Method.NAG: two_over, Method.HB: two_over}, extra)


def _setup_denoise(cfg: ExperimentConfig) -> _Setup:
    p = cfg.problem
    s_problem, _, _, _ = _seeds(cfg.seed)
    prob, clean = gen_denoise(p.get("image", "synthetic"), float(p.get("sigma", 0.05)),
                              seed=p.get("seed", s_problem), xi=float(p.get("xi", 4.0)),
                              eta=float(p.get("eta", 0.06)), delta=float(p.get("delta", 0.05)),
                              size=int(p.get("size", 256)))
    mu_t, L_t = prob.bounds()
    x0 = prob.u0.ravel().copy()
    x_ref = _reference(cfg, prob, x0, L_t)
    return _Setup(prob, x0, x_ref, mu_t, L_t, L_t, 2.0 / (mu_t + L_t),
                  {m: None for m in Method}, {"clean": clean})


def _reference(cfg: ExperimentConfig, prob, x0, L_t):
    ref = cfg.problem.get("reference", {"tol": 1e-12, "max_iters": 100_000})
    if not ref:
        return None
    x_ref, _ = reference_solve(prob, x0, L_t, float(ref.get("tol", 1e-12)),
                               int(ref.get("max_iters", 100_000)))
    return x_ref


_SETUPS = {"quadratic": _setup_quadratic, "logistic": _setup_logistic, "denoise": _setup_denoise}


def _estimated_schedule(setup: _Setup, spec: MethodSpec, seed) -> EstimatedSchedule:
    """Fixed-form parameters with ``mu`` re-estimated at every iterate.

    ``L`` stays at ``setup.L_tilde``; ``mu`` comes from shifted power
    iteration on the local Hessian, warm-started from the previous vector.
    """
    obj = setup.objective
    if not hasattr(obj, "hvp"):
        raise ConfigError("fixed-estimated schedule needs a problem with Hessian-vector products")
    L_hat = setup.L_tilde
    state = {"v": None}
    rng_seed = seed

    def params(x):
        mu_hat, v = shifted_power_iteration(lambda w: obj.hvp(x, w), x.size, L_hat, tol=1e-6,
                                            max_iters=500, seed=rng_seed, v0=state["v"],
                                            return_vector=True)
        state["v"] = v
        # the Hessian is bounded below by mu_tilde; power-iteration noise can undershoot
        mu_hat = min(max(mu_hat, setup.mu), L_hat)
        return optimal_params(spec.method, mu_hat, L_hat)

    return EstimatedSchedule(params, warmup_alpha=setup.fixed_warmup if spec.method.has_momentum else None)


def _schedule_for(setup: _Setup, spec: MethodSpec, seed):
    if spec.schedule == "fixed-optimal":
        alpha, beta = optimal_params(spec.method, setup.mu, setup.L)
        warm = spec.warmup_alpha if spec.warmup_alpha is not None else setup.fixed_warmup
        return FixedSchedule(alpha, beta, warmup_alpha=warm if spec.method.has_momentum else None)
    if spec.schedule == "fixed-estimated":
        return _estimated_schedule(setup, spec, seed)
    warm = spec.warmup_alpha if spec.warmup_alpha is not None else setup.adaptive_warmup[spec.method]
    return AdaptiveSchedule(spec.window, setup.L_tilde, warmup_alpha=warm)


def run_experiment(config, jobs: int = 1) -> ExperimentResult:
    """Run every configured method and write one trace CSV each plus ``summary.csv``.

    A diverging method is recorded in the summary (``stop_reason =
    "diverged"``) with its partial trace; it does not stop the batch.
    """
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config)
    if cfg.experiment == "oracle-theorem":
        raise ConfigError("oracle-theorem configs run through run_oracle_theorem")
    setup = _SETUPS[cfg.experiment](cfg)
    out = Path(cfg.output_dir)
    labels = [m.label for m in cfg.methods]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate method labels in config: {labels}")
    power_seed = _seeds(cfg.seed)[3]

    def one(spec: MethodSpec):
        schedule = _schedule_for(setup, spec, power_seed)
        try:
            trace = run(spec.method, schedule, setup.objective, setup.x0, cfg.run_config,
                        x_star=setup.x_star)
            return spec, trace, None
        except DivergenceError as exc:
            return spec, exc.trace, "diverged"

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, cfg.methods))
    else:
        results = [one(m) for m in cfg.methods]

    traces, summaries, files = {}, [], []
    for spec, trace, failure in results:
        path = out / f"{spec.label}.csv"
        emit_trace_csv(trace, path)
        files.append(path)
        traces[spec.label] = trace
        summaries.append(RunSummary.from_trace(spec, trace, failure))
        if cfg.experiment == "denoise" and cfg.options.get("write_images", False) and trace.x_final is not None:
            img = out / f"{spec.label}.pgm"
            write_pgm(img, trace.x_final.reshape(setup.objective.shape))
            files.append(img)
    if cfg.experiment == "denoise" and cfg.options.get("write_images", False):
        for name, img in (("noisy", setup.objective.u0), ("clean", setup.extra["clean"])):
            write_pgm(out / f"{name}.pgm", img)
            files.append(out / f"{name}.pgm")
    summary_path = out / "summary.csv"
    emit_summary_csv(summaries, summary_path)
    files.append(summary_path)
    return ExperimentResult(cfg, traces, summaries, files)


def oracle_rows(cfg: ExperimentConfig) -> list[tuple]:
    p = cfg.problem
    if "spectrum" in p:
        sd = dict(p["spectrum"])
        sd.setdefault("seed", int(_seeds(cfg.seed)[0].generate_state(1)[0]))
        spec = gen_spectrum(SpectrumSpec.from_dict(sd))
    elif "eigenvalues" in p:
        spec = Spectrum(np.asarray(p["eigenvalues"], dtype=float))
    elif "mu" in p:
        spec = Spectrum.interval(float(p["mu"]), float(p.get("L", 1.0)))
    else:
        raise ConfigError("oracle problem needs 'spectrum', 'eigenvalues' or 'mu'")
    sequence = cfg.options.get("sequence", p.get("sequence", "gd"))
    k_max = int(cfg.options.get("k_max", cfg.max_iterations))
    rows = []
    if sequence == "gd":
        limit = oracle.gd_limit(spec.mu)
        for k, (rho, alpha) in enumerate(oracle.simulate_gd_rho_sequence(spec, k_max), start=1):
            d = oracle.decompose_epsilon(rho, spec)
            rows.append((k, rho, limit, abs(rho - limit), alpha, d.delta_L, d.epsilon, d.case))
            if rho == limit:
                break
    elif sequence == "nag":
        limit = oracle.nag_limit(spec.mu)
        for k, (rho, beta) in enumerate(oracle.simulate_nag_rho_sequence(spec, k_max), start=1):
            rows.append((k, rho, limit, abs(rho - limit), beta, None, None, None))
            if rho == limit:
                break
    else:
        raise ConfigError(f"oracle sequence must be 'gd' or 'nag', got {sequence!r}")
    return rows


def run_oracle_theorem(config) -> Path:
    """Write ``oracle.csv`` with the exact-radius rate sequence and its limit."""
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config)
    if cfg.experiment != "oracle-theorem":
        raise ConfigError("run_oracle_theorem needs an oracle-theorem config")
    path = Path(cfg.output_dir) / "oracle.csv"
    _write_csv(path, ORACLE_COLUMNS, oracle_rows(cfg))
    return path

