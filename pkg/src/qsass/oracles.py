"""Stochastic function and gradient oracles with noise-aware sample sizing.

A model owns its own random generator and every estimate consumes fresh
draws from it; nothing is shared across calls or across runs.  Averages of
Gaussian draws are sampled in closed form (the mean of ``N`` i.i.d. normals
is normal with variance ``var / N``, and their sample variance is an
independent scaled chi-square), which is exact in distribution and keeps
the cost of an estimate independent of the sample count -- the adaptive
sample sizes routinely reach 1e10 and beyond.  Measurement-based estimates
aggregate their shots through a multinomial over the Hamiltonian
eigenvalues, which is the same distribution as drawing the shots one by
one.

Estimate objects unpack as ``(value, samples_used)`` tuples and carry the
sample variances needed to size the next iteration's draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedProblemError
from .problems import VqeProblem

ORACLE_KINDS = ("exact", "additive", "multiplicative", "mixed-gaussian",
                "vqe-measurement")

# Per-call ceiling on adaptive sample sizes; hitting it is recorded by the
# caller, never an error.
SAMPLE_CAP_DEFAULT = 10 ** 8

# Floor weight assigned to zero-variance entries before renormalizing.
ALLOCATION_FLOOR = 1e-6

# Additive offset keeping the finite-difference radius positive with
# noiseless estimates.
FD_RADIUS_OFFSET = 1e-8


@dataclass(frozen=True)
class OracleParams:
    """Noise scales for the synthetic oracle models.

    ``function_scale`` and ``gradient_scale`` are the standard deviations
    of a single additive draw; ``relative_percent`` scales multiplicative
    noise as ``(1 + xi * relative_percent / 100)``; the ``mixed_*`` fields
    set the two gradient regimes of the mixed-Gaussian model and the
    probability of the bad one.
    """

    function_scale: float = 1.0
    gradient_scale: float = 1.0
    relative_percent: float = 1.0
    mixed_small: float = 1e-6
    mixed_large: float = 1e6
    mixed_large_prob: float = 0.2


@dataclass
class FunctionEstimate:
    value: float
    samples: int
    variance: float | None = None

    def __iter__(self):
        return iter((self.value, self.samples))


@dataclass
class GradientEstimate:
    vector: np.ndarray
    samples: int
    variance: float | None = None
    coord_variances: np.ndarray | None = None
    point_variances: np.ndarray | None = None
    base_variance: float | None = None

    def __iter__(self):
        return iter((self.vector, self.samples))


@dataclass(frozen=True)
class SampleAllocation:
    weights: np.ndarray
    shots: np.ndarray


class OracleModel:
    """Noisy access to a problem's objective and gradient.

    Parameters
    ----------
    kind : str
        One of ``ORACLE_KINDS``.
    params : OracleParams
        Noise scales; defaults apply when omitted.
    seed : int or numpy SeedSequence or Generator
        Source of the model's private stream.
    gradient_mode : str
        ``"auto"`` (measurement models use the shift rule, everything else
        direct draws), ``"direct"``, ``"shift"``, or ``"fd"``.
    """

    def __init__(self, kind, params=None, seed=None, gradient_mode="auto"):
        if kind not in ORACLE_KINDS:
            raise ValueError(f"unknown oracle kind {kind!r}; known: {ORACLE_KINDS}")
        if gradient_mode not in ("auto", "direct", "shift", "fd"):
            raise ValueError(f"unknown gradient mode {gradient_mode!r}")
        self.kind = kind
        self.params = params if params is not None else OracleParams()
        if isinstance(seed, np.random.Generator):
            self.rng = seed
        else:
            self.rng = np.random.default_rng(seed)
        if gradient_mode == "auto":
            gradient_mode = "shift" if kind == "vqe-measurement" else "direct"
        if kind == "vqe-measurement" and gradient_mode == "direct":
            raise ValueError("measurement models have no direct gradient draws; "
                             "use the shift rule or finite differences")
        self.gradient_mode = gradient_mode

    # -- zeroth order -----------------------------------------------------

    def function_estimate(self, problem, x, n_samples):
        """Average of ``n_samples`` independent objective observations."""
        n_samples = _check_samples(n_samples)
        x = np.asarray(x, dtype=float)
        if self.kind == "vqe-measurement":
            if not isinstance(problem, VqeProblem):
                raise UnsupportedProblemError(
                    "measurement oracles need a VQE problem")
            mean, var = problem.measure_moments(x, n_samples, self.rng)
            return FunctionEstimate(mean, n_samples,
                                    var if n_samples > 1 else None)
        phi = problem.objective(x)
        if self.kind == "exact":
            return FunctionEstimate(phi, 1, 0.0)
        if self.kind == "multiplicative":
            scale = abs(phi) * self.params.relative_percent / 100.0
        else:  # additive and mixed-gaussian share the additive f model
            scale = self.params.function_scale
        value = phi + scale * self.rng.standard_normal() / math.sqrt(n_samples)
        variance = self._sample_variance(scale * scale, n_samples)
        return FunctionEstimate(float(value), n_samples, variance)

    # -- first order ------------------------------------------------------

    def gradient_estimate(self, problem, x, n_samples):
        """Average of ``n_samples`` independent gradient observations."""
        n_samples = _check_samples(n_samples)
        x = np.asarray(x, dtype=float)
        if self.kind == "vqe-measurement":
            raise UnsupportedProblemError(
                "measurement models have no direct gradient draws")
        grad = problem.gradient(x)
        n = grad.shape[0]
        if self.kind == "exact":
            return GradientEstimate(grad, 1, 0.0, np.zeros(n))
        if self.kind == "additive":
            scales = np.full(n, self.params.gradient_scale)
        elif self.kind == "multiplicative":
            scales = np.abs(grad) * self.params.relative_percent / 100.0
        else:  # mixed-gaussian: one regime per call, shared by all samples
            if self.rng.random() < self.params.mixed_large_prob:
                regime = self.params.mixed_large
            else:
                regime = self.params.mixed_small
            scales = np.full(n, regime)
        vector = grad + scales * self.rng.standard_normal(n) / math.sqrt(n_samples)
        coord_var = self._coord_variances(scales ** 2, n_samples)
        total = float(np.sum(coord_var)) if coord_var is not None else None
        return GradientEstimate(vector, n_samples, total, coord_var)

    # -- helpers ----------------------------------------------------------

    def _sample_variance(self, true_var, n_samples):
        if n_samples < 2:
            return None
        if true_var == 0.0:
            return 0.0
        return true_var * self.rng.chisquare(n_samples - 1) / (n_samples - 1)

    def _coord_variances(self, true_vars, n_samples):
        if n_samples < 2:
            return None
        out = np.zeros_like(true_vars)
        nonzero = true_vars > 0.0
        k = int(np.count_nonzero(nonzero))
        if k:
            chis = self.rng.chisquare(n_samples - 1, size=k)
            out[nonzero] = true_vars[nonzero] * chis / (n_samples - 1)
        return out


def _check_samples(n_samples):
    n = int(n_samples)
    if n < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    return n


def draw_function_estimate(model, problem, x, n_samples):
    """Functional alias for :meth:`OracleModel.function_estimate`."""
    return model.function_estimate(problem, x, n_samples)


def draw_gradient_estimate(model, problem, x, n_samples):
    """Functional alias for :meth:`OracleModel.gradient_estimate`."""
    return model.gradient_estimate(problem, x, n_samples)


# ---------------------------------------------------------------------------
# Adaptive accuracy targets and sample sizing
# ---------------------------------------------------------------------------

def adaptive_eps_f(eps_f, alpha, theta, gd_inner):
    """Per-iteration function tolerance: a hundredth of the expected
    decrease, floored at ``eps_f``."""
    if eps_f < 0.0:
        raise ValueError(f"eps_f must be >= 0, got {eps_f}")
    if alpha <= 0.0 or not 0.0 < theta < 1.0:
        raise ValueError("need alpha > 0 and theta in (0, 1)")
    return max(eps_f, 0.01 * alpha * theta * gd_inner)


def adaptive_eps_g(eps_g, tau, kappa, alpha, g_prev_norm):
    """Per-iteration gradient tolerance ``max(eps_g, min(tau, kappa *
    alpha) * |g_prev|)``."""
    if eps_g < 0.0 or tau <= 0.0 or kappa <= 0.0 or alpha <= 0.0:
        raise ValueError("need eps_g >= 0 and tau, kappa, alpha > 0")
    if g_prev_norm < 0.0:
        raise ValueError("g_prev_norm must be >= 0")
    return max(eps_g, min(tau, kappa * alpha) * g_prev_norm)


def compute_sample_sizes(var_f, var_g, eps_f_k, eps_g_k, delta,
                         cap=SAMPLE_CAP_DEFAULT):
    """Chebyshev sample counts ``(n_f, n_g)`` for the two oracles.

    ``n_f = ceil(var_f / eps_f_k^2)`` and ``n_g = ceil(var_g / (delta *
    eps_g_k^2))``, floored at one draw and capped at ``cap``.
    """
    if var_f < 0.0 or var_g < 0.0:
        raise ValueError("variances must be >= 0")
    if eps_f_k <= 0.0 or eps_g_k <= 0.0:
        raise ValueError("tolerances must be > 0")
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    cap = int(cap)
    if cap < 1:
        raise ValueError("cap must be >= 1")
    n_f = math.ceil(var_f / (eps_f_k * eps_f_k))
    n_g = math.ceil(var_g / (delta * eps_g_k * eps_g_k))
    return (min(max(n_f, 1), cap), min(max(n_g, 1), cap))


def fd_sample_size(var_f, l_bar, dim, delta, eps_g_k, cap=SAMPLE_CAP_DEFAULT):
    """Budget for a finite-difference gradient estimate.

    Closed form for equal function-draw variances:
    ``ceil(l_bar^2 n^2 var_f / (4 (n+1) delta^2 eps^4))``, floored at
    ``n + 1`` draws (one per evaluation point) and capped.
    """
    if var_f < 0.0 or l_bar <= 0.0 or dim < 1:
        raise ValueError("need var_f >= 0, l_bar > 0, dim >= 1")
    if eps_g_k <= 0.0 or not 0.0 < delta < 0.5:
        raise ValueError("need eps_g_k > 0 and delta in (0, 1/2)")
    n = int(dim)
    raw = (l_bar * l_bar * n * n * var_f
           / (4.0 * (n + 1) * delta * delta * eps_g_k ** 4))
    return min(max(math.ceil(raw), n + 1), max(int(cap), n + 1))


def allocate_shot_budget(variances, budget):
    """Split ``budget`` draws over estimation points to minimize total
    variance.

    The continuous optimum puts weight proportional to each point's
    standard deviation; zero-variance points get a floor weight of
    ``ALLOCATION_FLOOR`` before renormalizing.  Integer shots come from
    largest-remainder rounding, each point receives at least one shot and
    the shots sum exactly to ``budget``.
    """
    var = np.asarray(variances, dtype=float)
    if var.ndim != 1 or var.size < 1:
        raise ValueError("variances must be a non-empty 1-D array")
    if np.any(var < 0.0) or not np.all(np.isfinite(var)):
        raise ValueError("variances must be finite and >= 0")
    k = var.size
    budget = int(budget)
    if budget < k:
        raise ValueError(f"budget {budget} cannot give each of {k} points a shot")
    std = np.sqrt(var)
    total = std.sum()
    if total == 0.0:
        weights = np.full(k, 1.0 / k)
    else:
        weights = std / total
        floor = weights < ALLOCATION_FLOOR
        if np.any(floor):
            weights = np.where(floor, ALLOCATION_FLOOR, weights)
            weights = weights / weights.sum()
    raw = weights * budget
    shots = np.floor(raw).astype(np.int64)
    remainder = budget - int(shots.sum())
    if remainder > 0:
        order = np.lexsort((np.arange(k), -(raw - shots)))
        shots[order[:remainder]] += 1
    # Largest-remainder rounding can starve a point; steal from the richest.
    while np.any(shots == 0):
        shots[np.argmax(shots)] -= 1
        shots[np.argmin(shots)] += 1
    return SampleAllocation(weights=weights, shots=shots)


# ---------------------------------------------------------------------------
# Derived gradient estimators
# ---------------------------------------------------------------------------

def fd_radius(e_std, l_bar):
    """Forward-difference radius balancing oracle noise against curvature:
    ``2 sqrt(e_std / l_bar)`` plus a small offset keeping it positive for
    noiseless estimates."""
    if e_std < 0.0 or l_bar <= 0.0:
        raise ValueError("need e_std >= 0 and l_bar > 0")
    return 2.0 * math.sqrt(e_std / l_bar) + FD_RADIUS_OFFSET


def fd_gradient_estimate(model, problem, x, budget, l_bar=None, e_std=0.0,
                         coord_variances=None):
    """Forward-difference gradient from noisy function estimates.

    ``budget`` draws are split as ``s0 = budget // (n + 1)`` for the base
    point and the rest over the ``n`` shifted points by
    :func:`allocate_shot_budget`.  ``e_std`` is the caller's standard-error
    estimate for a single averaged evaluation and sets the radius through
    :func:`fd_radius`.  No draws are shared between evaluation points.
    """
    x = np.asarray(x, dtype=float)
    n = problem.dim
    budget = int(budget)
    if budget < n + 1:
        raise ValueError(f"budget {budget} is below the {n + 1} evaluation points")
    if l_bar is None:
        l_bar = problem.hessian_norm_hint
    l_bar = max(float(l_bar), 1e-8)
    s0 = max(budget // (n + 1), 1)
    h = fd_radius(e_std, l_bar)
    if coord_variances is None:
        coord_variances = np.ones(n)
    alloc = allocate_shot_budget(coord_variances, max(budget - s0, n))
    base = model.function_estimate(problem, x, s0)
    used = base.samples
    vector = np.empty(n)
    new_coord_vars = np.empty(n)
    have_vars = base.variance is not None
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        est = model.function_estimate(problem, x + e, int(alloc.shots[i]))
        used += est.samples
        vector[i] = (est.value - base.value) / h
        if est.variance is None:
            have_vars = False
        else:
            new_coord_vars[i] = est.variance
    return GradientEstimate(vector, used,
                            coord_variances=new_coord_vars if have_vars else None,
                            base_variance=base.variance)


def parameter_shift_gradient(model, problem, x, budget, point_variances=None):
    """Two-point shift-rule gradient, exact for frequency-one coordinates.

    Each partial derivative is ``(f(x + (pi/2) e_i) - f(x - (pi/2) e_i)) / 2``.
    For measurement models the ``budget`` is split over the ``2 n``
    evaluation points (ordered ``+e_0, -e_0, +e_1, -e_1, ...``) by
    :func:`allocate_shot_budget` using ``point_variances``; exact models
    spend one evaluation per point.  Returns per-point sample variances for
    the next allocation and a sizing variance ``(sum of point stds)^2 / 4``
    matching the optimal-allocation error model.
    """
    if not isinstance(problem, VqeProblem):
        raise UnsupportedProblemError(
            "the shift rule needs trigonometric coordinate dependence; "
            f"problem {getattr(problem, 'name', problem)!r} does not provide it")
    x = np.asarray(x, dtype=float)
    n = problem.dim
    num_points = 2 * n
    exact = getattr(model, "kind", None) == "exact"
    if exact:
        shots = np.ones(num_points, dtype=np.int64)
    else:
        budget = int(budget)
        if budget < num_points:
            raise ValueError(
                f"budget {budget} is below the {num_points} evaluation points")
        if point_variances is None:
            point_variances = np.ones(num_points)
        else:
            point_variances = np.asarray(point_variances, dtype=float)
            if point_variances.shape != (num_points,):
                raise ValueError(f"point_variances must have shape ({num_points},)")
        shots = allocate_shot_budget(point_variances, budget).shots
    vector = np.empty(n)
    new_point_vars = np.empty(num_points)
    coord_vars = np.empty(n)
    have_vars = True
    used = 0
    for i in range(n):
        e = np.zeros(n)
        e[i] = 0.5 * math.pi
        plus = model.function_estimate(problem, x + e, int(shots[2 * i]))
        minus = model.function_estimate(problem, x - e, int(shots[2 * i + 1]))
        used += plus.samples + minus.samples
        vector[i] = 0.5 * (plus.value - minus.value)
        if plus.variance is None or minus.variance is None:
            have_vars = False
        else:
            new_point_vars[2 * i] = plus.variance
            new_point_vars[2 * i + 1] = minus.variance
            coord_vars[i] = 0.25 * (plus.variance / plus.samples
                                    + minus.variance / minus.samples)
    if not have_vars:
        return GradientEstimate(vector, used)
    sizing = 0.25 * float(np.sum(np.sqrt(new_point_vars))) ** 2
    return GradientEstimate(vector, used, sizing, coord_vars, new_point_vars)
