"""Adaptive step-search loop with quasi-Newton directions and noisy oracles.

One iteration estimates the gradient with an adaptively chosen number of
draws, refreshes the curvature store (inserting the newest displacement /
gradient-difference pair and enforcing the eigenvalue band), forms the
trial point ``x - alpha * H g``, and accepts or rejects it with a
sufficient-decrease test relaxed by twice the current function tolerance.
Successes grow the step size by ``1 / gamma``, failures shrink it by
``gamma``.

Variants
--------
``qsass``       bounded memory, spectrum enforcement on (the default)
``sass``        no memory at all; directions are ``g / c``
``qsass-bfgs``  unbounded memory, no enforcement; each iteration records
                whether enforcement would have removed at least one pair

Traces serialize to a plain text table with a key-value header and summary
so that runs can be archived, compared byte for byte, and replayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .oracles import (OracleModel, adaptive_eps_f, adaptive_eps_g,
                      compute_sample_sizes, fd_gradient_estimate,
                      fd_sample_size, parameter_shift_gradient,
                      SAMPLE_CAP_DEFAULT)
from .store import CURVATURE_TOL, CurvaturePairStore, SpectrumBounds

VARIANTS = ("qsass", "sass", "qsass-bfgs")

STOP_RULE_KINDS = ("gradient-norm", "optimality-gap", "none")

STOP_REASONS = ("stopping-rule", "iteration-budget", "sample-budget")


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the step search.  Defaults follow the standard synthetic
    noise protocol except for the problem-dependent tolerances."""

    variant: str = "qsass"
    theta: float = 0.2
    gamma: float = 0.8
    alpha0: float = 1.0
    memory: int = 10
    c: float = 1.0
    spectrum_lb: float = 1e-4
    spectrum_ub: float = 1e4
    curvature_tol: float = CURVATURE_TOL
    eps_f: float = 1e-6
    eps_g: float = 1e-3
    tau: float = 10.0
    kappa: float = 1.0
    delta: float = 0.1
    adaptive_eps_f: bool = True
    sample_cap: int = SAMPLE_CAP_DEFAULT
    pilot_samples: int = 30
    max_iterations: int = 1000
    max_samples: float = 1e20
    alpha_max: float | None = None
    clamp_memory: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}")
        if not 0.0 < self.theta < 1.0:
            raise ConfigurationError(f"theta must lie in (0, 1), got {self.theta}")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigurationError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.alpha0 <= 0.0:
            raise ConfigurationError("alpha0 must be > 0")
        if int(self.memory) != self.memory or self.memory < 0:
            raise ConfigurationError("memory must be a non-negative integer")
        if not (0.0 < self.spectrum_lb <= self.spectrum_ub < math.inf):
            raise ConfigurationError("need 0 < spectrum_lb <= spectrum_ub < inf")
        if not (self.spectrum_lb <= self.c <= self.spectrum_ub):
            raise ConfigurationError(
                f"base scale c = {self.c} outside spectrum band "
                f"[{self.spectrum_lb}, {self.spectrum_ub}]")
        if self.eps_f < 0.0 or self.eps_g < 0.0:
            raise ConfigurationError("tolerances must be >= 0")
        if self.tau <= 0.0 or self.kappa <= 0.0:
            raise ConfigurationError("tau and kappa must be > 0")
        if not 0.0 < self.delta < 0.5:
            raise ConfigurationError("delta must lie in (0, 1/2)")
        if int(self.sample_cap) < 1:
            raise ConfigurationError("sample_cap must be >= 1")
        if int(self.pilot_samples) < 2:
            raise ConfigurationError("pilot_samples must be >= 2")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 0:
            raise ConfigurationError("max_iterations must be a non-negative integer")
        if self.max_samples <= 0.0:
            raise ConfigurationError("max_samples must be > 0")
        if self.alpha_max is not None and self.alpha_max <= 0.0:
            raise ConfigurationError("alpha_max must be > 0 when set")


@dataclass(frozen=True)
class StoppingRule:
    """When to declare a run finished, measured on ground truth."""

    kind: str = "gradient-norm"
    threshold: float = 1e-3

    def __post_init__(self):
        if self.kind not in STOP_RULE_KINDS:
            raise ConfigurationError(f"unknown stopping rule {self.kind!r}")
        if self.kind != "none" and self.threshold <= 0.0:
            raise ConfigurationError("stopping threshold must be > 0")


def sufficient_decrease_test(f_plus, f_current, alpha, theta, gd_inner, eps_f_k):
    """Accept the trial point when ``f_plus <= f_current - alpha * theta *
    <g, d> + 2 * eps_f_k`` (equality accepts)."""
    return f_plus <= f_current - alpha * theta * gd_inner + 2.0 * eps_f_k


_COLUMNS = (
    ("k", int), ("alpha", float), ("success", int), ("f_est", float),
    ("f_plus_est", float), ("gd_inner", float), ("g_norm", float),
    ("d_norm", float), ("eps_f_k", float), ("eps_g_k", float),
    ("n_f", int), ("n_g", int),
    ("pairs", int), ("inserted", int), ("removed", int), ("cum_samples", int),
    ("x_norm", float), ("true_grad_norm", float), ("true_gap", float),
    ("true_flag_g", int), ("true_flag_f", int), ("would_violate", int),
)


@dataclass
class IterationRecord:
    k: int
    alpha: float
    success: int
    f_est: float
    f_plus_est: float
    gd_inner: float
    g_norm: float
    d_norm: float
    eps_f_k: float
    eps_g_k: float
    n_f: int
    n_g: int
    pairs: int
    inserted: int
    removed: int
    cum_samples: int
    x_norm: float
    true_grad_norm: float = math.nan
    true_gap: float = math.nan
    true_flag_g: int = -1
    true_flag_f: int = -1
    would_violate: int = -1


@dataclass
class SolverState:
    """Mutable loop state; built by :func:`initialize_state`."""

    x: np.ndarray
    alpha: float
    store: CurvaturePairStore
    bounds: SpectrumBounds
    g_prev_norm: float
    var_f: float
    var_g: float
    coord_vars: np.ndarray | None = None
    point_vars: np.ndarray | None = None
    x_prev: np.ndarray | None = None
    g_prev: np.ndarray | None = None
    samples: int = 0
    gt_evals: int = 0
    census_b: np.ndarray | None = None


def _store_capacity(config):
    if config.variant == "sass":
        return 0
    if config.variant == "qsass-bfgs":
        return None
    return int(config.memory)


def _bfgs_update(b, s, y):
    bs = b @ s
    return (b - np.outer(bs, bs) / float(s @ bs)
            + np.outer(y, y) / float(y @ s))


def initialize_state(problem, config, oracle):
    """Pilot draws at the start point seed the variance estimates and the
    reference gradient norm."""
    x0 = problem.start_point.copy()
    n = problem.dim
    store = CurvaturePairStore(n, capacity=_store_capacity(config), c=config.c,
                               curvature_tol=config.curvature_tol,
                               clamp_capacity=config.clamp_memory)
    bounds = SpectrumBounds(config.spectrum_lb, config.spectrum_ub)
    pilot = int(config.pilot_samples)
    samples = 0

    f_est = oracle.function_estimate(problem, x0, pilot)
    samples += f_est.samples
    var_f = f_est.variance if f_est.variance is not None else 0.0

    coord_vars = None
    point_vars = None
    if oracle.gradient_mode == "direct":
        g_est = oracle.gradient_estimate(problem, x0, pilot)
        var_g = g_est.variance if g_est.variance is not None else 0.0
        coord_vars = g_est.coord_variances
    elif oracle.gradient_mode == "shift":
        g_est = parameter_shift_gradient(oracle, problem, x0, pilot * 2 * n)
        var_g = g_est.variance if g_est.variance is not None else 0.0
        point_vars = g_est.point_variances
    else:  # fd
        g_est = fd_gradient_estimate(oracle, problem, x0, pilot * (n + 1),
                                     e_std=math.sqrt(var_f / pilot))
        var_g = 0.0
        coord_vars = g_est.coord_variances
        if g_est.base_variance is not None:
            var_f = g_est.base_variance
    samples += g_est.samples

    census_b = config.c * np.eye(n) if config.variant == "qsass-bfgs" else None
    return SolverState(x=x0, alpha=float(config.alpha0), store=store,
                       bounds=bounds,
                       g_prev_norm=float(np.linalg.norm(g_est.vector)),
                       var_f=var_f, var_g=var_g, coord_vars=coord_vars,
                       point_vars=point_vars, samples=samples,
                       census_b=census_b)


def _gradient_budget(state, config, eps_g_k, dim, mode, l_bar):
    cap = int(config.sample_cap)
    if mode == "fd":
        return fd_sample_size(state.var_f, max(l_bar, 1e-8), dim,
                              config.delta, eps_g_k, cap)
    if eps_g_k <= 0.0:
        return 1 if state.var_g == 0.0 else cap
    n_g = compute_sample_sizes(0.0, state.var_g, 1.0, eps_g_k,
                               config.delta, cap)[1]
    if mode == "shift":
        n_g = max(n_g, 2 * dim)
    return n_g


def _function_budget(state, config, eps_f_k):
    cap = int(config.sample_cap)
    if eps_f_k <= 0.0:
        return 1 if state.var_f == 0.0 else cap
    return compute_sample_sizes(state.var_f, 0.0, eps_f_k, 1.0,
                                config.delta, cap)[0]


def qsass_step(problem, config, oracle, state, k, true_g=None, true_phi=None):
    """Run one iteration, mutate ``state``, and return its record.

    ``true_g`` and ``true_phi`` are optional ground-truth values at the
    incoming iterate; when given, the record carries oracle-accuracy flags
    (computing the flag for the function estimates costs one extra
    ground-truth objective evaluation at the trial point).
    """
    x = state.x
    n = problem.dim
    alpha = state.alpha
    mode = oracle.gradient_mode

    eps_g_k = adaptive_eps_g(config.eps_g, config.tau, config.kappa, alpha,
                             state.g_prev_norm)
    l_bar = getattr(problem, "hessian_norm_hint", 1.0)
    n_g = _gradient_budget(state, config, eps_g_k, n, mode, l_bar)
    if mode == "direct":
        g_est = oracle.gradient_estimate(problem, x, n_g)
        if g_est.variance is not None:
            state.var_g = g_est.variance
            state.coord_vars = g_est.coord_variances
    elif mode == "shift":
        g_est = parameter_shift_gradient(oracle, problem, x, n_g,
                                         state.point_vars)
        if g_est.variance is not None:
            state.var_g = g_est.variance
            state.point_vars = g_est.point_variances
    else:
        s0 = max(n_g // (problem.dim + 1), 1)
        g_est = fd_gradient_estimate(oracle, problem, x, n_g,
                                     e_std=math.sqrt(state.var_f / s0),
                                     coord_variances=state.coord_vars)
        if g_est.coord_variances is not None:
            state.coord_vars = g_est.coord_variances
        if g_est.base_variance is not None:
            state.var_f = g_est.base_variance
    state.samples += g_est.samples
    g = g_est.vector
    g_norm = float(np.linalg.norm(g))

    inserted = False
    removed = 0
    if state.x_prev is not None:
        s = x - state.x_prev
        y = g - state.g_prev
        inserted = state.store.try_insert(s, y)
        if config.variant == "qsass-bfgs":
            if inserted:
                state.census_b = _bfgs_update(state.census_b, s, y)
        else:
            removed = state.store.enforce_spectrum(state.bounds)

    would_violate = -1
    if config.variant == "qsass-bfgs":
        eigs = np.linalg.eigvalsh(state.census_b)
        would_violate = int(not state.bounds.admits(float(eigs[-1]),
                                                    float(eigs[0])))

    d = state.store.apply_inverse(g)
    gd = float(d @ g)
    x_plus = x - alpha * d

    if config.adaptive_eps_f:
        eps_f_k = adaptive_eps_f(config.eps_f, alpha, config.theta, gd)
    else:
        eps_f_k = config.eps_f
    n_f = _function_budget(state, config, eps_f_k)
    f_est = oracle.function_estimate(problem, x, n_f)
    f_plus_est = oracle.function_estimate(problem, x_plus, n_f)
    state.samples += f_est.samples + f_plus_est.samples
    variances = [v for v in (f_est.variance, f_plus_est.variance)
                 if v is not None]
    if variances:
        state.var_f = float(np.mean(variances))

    success = sufficient_decrease_test(f_plus_est.value, f_est.value, alpha,
                                       config.theta, gd, eps_f_k)

    true_flag_g = -1
    true_flag_f = -1
    true_grad_norm = math.nan
    true_gap = math.nan
    if true_g is not None:
        true_grad_norm = float(np.linalg.norm(true_g))
        bound = max(config.eps_g, min(config.tau, config.kappa * alpha) * g_norm)
        true_flag_g = int(float(np.linalg.norm(g - true_g)) <= bound)
    if true_phi is not None:
        phi_plus = problem.objective(x_plus)
        state.gt_evals += 1
        err = abs(f_est.value - true_phi) + abs(f_plus_est.value - phi_plus)
        true_flag_f = int(err <= 2.0 * eps_f_k)
        if problem.optimal_value is not None:
            true_gap = true_phi - problem.optimal_value

    if success:
        state.x_prev = x
        state.g_prev = g
        state.x = x_plus
        new_alpha = alpha / config.gamma
        if config.alpha_max is not None:
            new_alpha = min(new_alpha, config.alpha_max)
    else:
        new_alpha = alpha * config.gamma
    state.g_prev_norm = g_norm
    state.alpha = new_alpha

    return IterationRecord(
        k=k, alpha=alpha, success=int(success), f_est=f_est.value,
        f_plus_est=f_plus_est.value, gd_inner=gd, g_norm=g_norm,
        d_norm=float(np.linalg.norm(d)), eps_f_k=eps_f_k, eps_g_k=eps_g_k,
        n_f=n_f, n_g=n_g,
        pairs=len(state.store), inserted=int(inserted), removed=removed,
        cum_samples=state.samples, x_norm=float(np.linalg.norm(x)),
        true_grad_norm=true_grad_norm, true_gap=true_gap,
        true_flag_g=true_flag_g, true_flag_f=true_flag_f,
        would_violate=would_violate)


@dataclass
class RunTrace:
    """Everything a run produced, serializable to a plain text table."""

    labels: dict
    config: SolverConfig
    stopping: StoppingRule
    records: list = field(default_factory=list)
    stop_reason: str = "iteration-budget"
    hit: bool = False
    stop_iteration: int | None = None
    iterations: int = 0
    total_samples: int = 0
    ground_truth_evals: int = 0
    final_true_grad_norm: float = math.nan
    final_gap: float = math.nan
    final_alpha: float = math.nan
    final_x_norm: float = math.nan

    def to_text(self):
        lines = ["# trace-format = 1"]
        for key in sorted(self.labels):
            lines.append(f"# {key} = {self.labels[key]}")
        lines.append(f"# config = {config_to_text(self.config)}")
        lines.append(f"# stopping = {self.stopping.kind}")
        lines.append(f"# threshold = {_fmt(self.stopping.threshold)}")
        lines.append("\t".join(name for name, _ in _COLUMNS))
        for rec in self.records:
            lines.append("\t".join(_fmt(getattr(rec, name))
                                   for name, _ in _COLUMNS))
        lines.append("")
        lines.append(f"stop_reason = {self.stop_reason}")
        lines.append(f"iterations = {self.iterations}")
        lines.append(f"total_samples = {self.total_samples}")
        lines.append(f"ground_truth_evals = {self.ground_truth_evals}")
        lines.append(f"hit = {'true' if self.hit else 'false'}")
        lines.append("stop_iteration = "
                     + ("none" if self.stop_iteration is None
                        else str(self.stop_iteration)))
        lines.append(f"final_true_grad_norm = {_fmt(self.final_true_grad_norm)}")
        lines.append(f"final_gap = {_fmt(self.final_gap)}")
        lines.append(f"final_alpha = {_fmt(self.final_alpha)}")
        lines.append(f"final_x_norm = {_fmt(self.final_x_norm)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        labels = {}
        config = None
        stop_kind = None
        threshold = None
        records = []
        summary = {}
        lines = text.splitlines()
        i = 0
        while i < len(lines) and lines[i].startswith("# "):
            body = lines[i][2:]
            key, _, value = body.partition(" = ")
            if key == "config":
                config = config_from_text(value)
            elif key == "stopping":
                stop_kind = value
            elif key == "threshold":
                threshold = float(value)
            elif key != "trace-format":
                labels[key] = value
            i += 1
        if config is None or stop_kind is None:
            raise ValueError("trace text is missing its header")
        header = lines[i].split("\t")
        if header != [name for name, _ in _COLUMNS]:
            raise ValueError("trace table header does not match this format")
        i += 1
        while i < len(lines) and lines[i]:
            values = lines[i].split("\t")
            kwargs = {name: int(v) if kind is int else float(v)
                      for (name, kind), v in zip(_COLUMNS, values)}
            records.append(IterationRecord(**kwargs))
            i += 1
        for line in lines[i:]:
            if line:
                key, _, value = line.partition(" = ")
                summary[key] = value
        if stop_kind == "none":
            stopping = StoppingRule(kind="none", threshold=1.0)
        else:
            stopping = StoppingRule(kind=stop_kind, threshold=threshold)
        stop_iter = summary.get("stop_iteration", "none")
        return cls(
            labels=labels, config=config, stopping=stopping, records=records,
            stop_reason=summary["stop_reason"],
            hit=summary["hit"] == "true",
            stop_iteration=None if stop_iter == "none" else int(stop_iter),
            iterations=int(summary["iterations"]),
            total_samples=int(summary["total_samples"]),
            ground_truth_evals=int(summary["ground_truth_evals"]),
            final_true_grad_norm=float(summary["final_true_grad_norm"]),
            final_gap=float(summary["final_gap"]),
            final_alpha=float(summary["final_alpha"]),
            final_x_norm=float(summary["final_x_norm"]))

    def summary_text(self):
        tail = self.to_text().rstrip("\n").splitlines()
        idx = tail.index("")
        return "\n".join(tail[idx + 1:]) + "\n"


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


_CONFIG_FIELD_ORDER = (
    "variant", "theta", "gamma", "alpha0", "memory", "c", "spectrum_lb",
    "spectrum_ub", "curvature_tol", "eps_f", "eps_g", "tau", "kappa", "delta",
    "adaptive_eps_f", "sample_cap", "pilot_samples", "max_iterations",
    "max_samples", "alpha_max", "clamp_memory",
)


def config_to_text(config):
    parts = []
    for name in _CONFIG_FIELD_ORDER:
        value = getattr(config, name)
        if value is None:
            text = "none"
        elif isinstance(value, bool):
            text = "1" if value else "0"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        parts.append(f"{name}={text}")
    return ",".join(parts)


def config_from_text(text):
    kwargs = {}
    for part in text.split(","):
        name, _, value = part.partition("=")
        if name == "variant":
            kwargs[name] = value
        elif name in ("adaptive_eps_f", "clamp_memory"):
            kwargs[name] = value == "1"
        elif name in ("memory", "sample_cap", "pilot_samples", "max_iterations"):
            kwargs[name] = int(value)
        elif name == "alpha_max":
            kwargs[name] = None if value == "none" else float(value)
        else:
            kwargs[name] = float(value)
    return SolverConfig(**kwargs)


def run(problem, config, oracle, stopping=None, labels=None, instrument=True):
    """Drive the loop until a stopping rule, iteration, or sample budget.

    ``oracle`` is a seeded :class:`~qsass.oracles.OracleModel`; the run is
    deterministic given the oracle's seed, the configuration, and the
    problem.  Ground-truth evaluations (stopping checks, accuracy flags)
    are metered separately from oracle samples.
    """
    stopping = stopping if stopping is not None else StoppingRule()
    if stopping.kind == "optimality-gap" and problem.optimal_value is None:
        raise ConfigurationError(
            f"problem {problem.name!r} has no known optimum for the "
            "optimality-gap rule")
    if not isinstance(oracle, OracleModel):
        raise TypeError("oracle must be an OracleModel")
    trace = RunTrace(labels=dict(labels or {}), config=config,
                     stopping=stopping)
    state = initialize_state(problem, config, oracle)
    need_grad = instrument or stopping.kind == "gradient-norm"
    need_phi = instrument or stopping.kind == "optimality-gap"

    reason = None
    for k in range(int(config.max_iterations)):
        true_g = None
        true_phi = None
        if need_grad:
            true_g = problem.gradient(state.x)
            state.gt_evals += 1
        if need_phi:
            true_phi = problem.objective(state.x)
            state.gt_evals += 1
        if stopping.kind == "gradient-norm":
            if float(np.linalg.norm(true_g)) <= stopping.threshold:
                trace.hit = True
                trace.stop_iteration = k
                reason = "stopping-rule"
                break
        elif stopping.kind == "optimality-gap":
            if true_phi - problem.optimal_value <= stopping.threshold:
                trace.hit = True
                trace.stop_iteration = k
                reason = "stopping-rule"
                break
        if state.samples >= config.max_samples:
            reason = "sample-budget"
            break
        rec = qsass_step(problem, config, oracle, state, k,
                         true_g=true_g if instrument else None,
                         true_phi=true_phi if instrument else None)
        trace.records.append(rec)
    else:
        reason = "iteration-budget"

    trace.stop_reason = reason
    trace.iterations = len(trace.records)
    trace.total_samples = state.samples
    trace.final_alpha = state.alpha
    trace.final_x_norm = float(np.linalg.norm(state.x))
    if instrument:
        final_g = problem.gradient(state.x)
        state.gt_evals += 1
        trace.final_true_grad_norm = float(np.linalg.norm(final_g))
        if problem.optimal_value is not None:
            trace.final_gap = problem.objective(state.x) - problem.optimal_value
            state.gt_evals += 1
    trace.ground_truth_evals = state.gt_evals
    return trace
