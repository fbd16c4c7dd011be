"""Exact penalization: penalized objective, thresholds, and exactness verdicts.

The penalized objective adds lambda times the constraint residual.  Above the
threshold (local Lipschitz bound of the objective) / (increase rate - 1) a
constrained local solution also minimizes the penalized objective; verdicts
here come from exhaustive grids with a pattern-search refinement, so they are
oracle-grade at desk scale rather than solver-dependent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import Cone, as_vector
from .mappings import EPS_FEAS, SetValuedMap, as_box, phi
from .sampling import DEFAULT_SEED, sphere_directions

DEFAULT_SAFETY_FACTOR = 1.25
MAX_GRID_POINTS = 4_000_000


@dataclass(eq=False)
class ConstrainedProblem:
    """min objective(x) subject to F(x) inside the cone, over a box."""

    objective: Callable[[np.ndarray], float]
    mapping: SetValuedMap
    cone: Cone
    box: np.ndarray
    x_bar: Optional[np.ndarray] = None

    def __post_init__(self):
        self.box = as_box(self.box, self.mapping.domain_dim)
        if self.x_bar is not None:
            self.x_bar = as_vector(self.x_bar, self.mapping.domain_dim)

    def residual(self, x) -> float:
        return phi(self.mapping, self.cone, x).phi_value


def penalty_value(problem: ConstrainedProblem, lam: float, x) -> float:
    """objective(x) + lam * residual(x)."""
    if lam < 0:
        raise ValueError("penalty parameter must be nonnegative")
    x = as_vector(x, problem.mapping.domain_dim)
    return float(problem.objective(x)) + lam * problem.residual(x)


def lipschitz_estimate(objective: Callable[[np.ndarray], float], x_bar,
                       radius: float, n_pairs: int = 512,
                       seed: int = DEFAULT_SEED) -> float:
    """Sampled lower estimate of the local Lipschitz bound around x_bar.

    Maximum difference quotient over short sampled segments inside the ball;
    a lower estimate of the true bound, so thresholds derived from it should
    carry a safety factor.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    x_bar = np.atleast_1d(np.asarray(x_bar, dtype=float))
    dim = x_bar.size
    rng = np.random.default_rng(seed)
    dirs = sphere_directions(dim, n_pairs, seed=seed)
    step = 1e-4 * radius
    best = 0.0
    for i, d in enumerate(dirs):
        # short segment [a, a + step*d], kept inside the ball
        anchor = x_bar + rng.uniform(0.0, radius - step) * dirs[(i * 7 + 3) % n_pairs]
        a = anchor
        b = anchor + step * d
        gap = float(np.linalg.norm(b - a))
        if gap < 1e-15:
            continue
        best = max(best, abs(float(objective(b)) - float(objective(a))) / gap)
    return best


def penalty_threshold(beta: float, a: float) -> float:
    """Penalty parameters above beta / (a - 1) make the penalty exact."""
    if a <= 1:
        raise ValueError("requires an increase rate a > 1")
    if beta < 0:
        raise ValueError("Lipschitz bound must be nonnegative")
    return beta / (a - 1.0)


# ---------------------------------------------------------------------------
# Grid machinery
# ---------------------------------------------------------------------------

def _grid_axes(box: np.ndarray, resolution: float) -> list[np.ndarray]:
    axes = []
    total = 1
    for lo, hi in box:
        n = max(2, int(round((hi - lo) / resolution)) + 1)
        total *= n
        axes.append(np.linspace(lo, hi, n))
    if total > MAX_GRID_POINTS:
        raise ValueError(
            f"grid of {total} points exceeds the desk-scale cap {MAX_GRID_POINTS}")
    return axes


def grid_points(box, resolution: float) -> np.ndarray:
    """Rectangular grid at the given spacing (inclusive endpoints)."""
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    axes = _grid_axes(box, resolution)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def pattern_search(fn: Callable[[np.ndarray], float], x0: np.ndarray,
                   box: np.ndarray, step: float,
                   min_step: float) -> tuple[np.ndarray, float]:
    """Coordinate pattern descent with halving steps, clipped to the box."""
    x = np.asarray(x0, dtype=float).copy()
    fx = float(fn(x))
    while step > min_step:
        improved = False
        for i in range(x.size):
            for sgn in (1.0, -1.0):
                cand = x.copy()
                cand[i] = np.clip(cand[i] + sgn * step, box[i, 0], box[i, 1])
                fc = float(fn(cand))
                if fc < fx:
                    x, fx = cand, fc
                    improved = True
        if not improved:
            step *= 0.5
    return x, fx


def grid_minimize(fn: Callable[[np.ndarray], float], box, resolution: float,
                  refine: bool = True) -> tuple[np.ndarray, float, np.ndarray]:
    """Exhaustive grid minimum, optionally refined by pattern search.

    Returns (minimizer, value, grid_values); the grid values support
    strictness checks at the declared resolution.
    """
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    pts = grid_points(box, resolution)
    vals = np.array([fn(p) for p in pts])
    k = int(np.argmin(vals))
    x_best, f_best = pts[k], float(vals[k])
    if refine:
        x_best, f_best = pattern_search(fn, x_best, box, resolution, resolution * 1e-3)
    return x_best, f_best, vals


def _grid_slack(reference_value: float) -> float:
    return 1e-9 * (1.0 + abs(reference_value))


# ---------------------------------------------------------------------------
# Exactness experiments
# ---------------------------------------------------------------------------

@dataclass
class PenaltyVerdict:
    """Outcome of a grid search of the penalized objective around x_bar."""

    lam: float
    threshold: Optional[float]
    is_exact_at_x_bar: bool
    minimizer_found: np.ndarray
    margin: float  # grid minimum minus penalized value at x_bar
    resolution: float
    threshold_boundary: bool = False
    n_grid: int = 0


def exactness_experiment(problem: ConstrainedProblem, lam: float,
                         x_bar=None, search_radius: float = 1.0,
                         resolution: float = 1e-2,
                         threshold: Optional[float] = None) -> PenaltyVerdict:
    """Is x_bar a penalized minimizer over the sampled ball at this lambda?

    Exactness holds when the penalized value at x_bar does not exceed the
    grid minimum (up to grid slack).  A lambda exactly at the supplied
    threshold is flagged as a boundary case, where the theory is silent.
    """
    x_bar = problem.x_bar if x_bar is None else as_vector(x_bar, problem.mapping.domain_dim)
    if x_bar is None:
        raise ValueError("x_bar required (none stored on the problem)")
    if problem.residual(x_bar) > EPS_FEAS:
        raise ValueError("x_bar must be feasible")
    local_box = np.stack([
        np.maximum(problem.box[:, 0], x_bar - search_radius),
        np.minimum(problem.box[:, 1], x_bar + search_radius),
    ], axis=1)
    pts = grid_points(local_box, resolution)
    inside = np.linalg.norm(pts - x_bar, axis=1) <= search_radius + 1e-12
    pts = pts[inside]
    vals = np.array([penalty_value(problem, lam, p) for p in pts])
    k = int(np.argmin(vals))
    ref = penalty_value(problem, lam, x_bar)
    slack = _grid_slack(ref)
    minimizer, _ = pattern_search(lambda p: penalty_value(problem, lam, p),
                                  pts[k], local_box, resolution, resolution * 1e-3)
    boundary = threshold is not None and abs(lam - threshold) <= 1e-9 * (1.0 + abs(threshold))
    return PenaltyVerdict(
        lam=lam, threshold=threshold,
        is_exact_at_x_bar=bool(ref <= float(vals[k]) + slack),
        minimizer_found=minimizer,
        margin=float(vals[k]) - ref,
        resolution=resolution,
        threshold_boundary=boundary,
        n_grid=len(pts))


@dataclass
class GlobalPenaltyCheck:
    """Feasibility verdict for a strict global minimizer of the penalized problem."""

    lam_eps: float
    minimizer: np.ndarray
    minimizer_value: float
    strict: bool
    feasible: bool
    objective_at_minimizer: float
    feasible_grid_min: float
    verdict: str  # "solves" | "inconclusive" | "infeasible"
    resolution: float


def strict_global_check(problem: ConstrainedProblem, epsilon: float, beta: float,
                        a: float, minimizer=None,
                        resolution: float = 1e-2,
                        feas_tol: float = EPS_FEAS) -> GlobalPenaltyCheck:
    """Check that the strict global penalized minimizer is feasible and optimal.

    Uses lambda_eps = (1 + epsilon) * beta / (a - 1).  Strictness is judged
    on the grid (a unique cell attains the minimum beyond grid slack); a
    non-strict minimum yields an inconclusive verdict.  The feasible
    minimizer's objective is cross-checked against the grid-restricted
    feasible minimum.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    lam_eps = (1.0 + epsilon) * penalty_threshold(beta, a)
    fn = lambda p: penalty_value(problem, lam_eps, p)
    pts = grid_points(problem.box, resolution)
    vals = np.array([fn(p) for p in pts])
    k = int(np.argmin(vals))
    slack = _grid_slack(float(vals[k]))
    n_at_min = int(np.sum(vals <= vals[k] + slack))
    strict = n_at_min == 1
    if minimizer is None:
        minimizer, min_val = pattern_search(fn, pts[k], problem.box,
                                            resolution, resolution * 1e-3)
    else:
        minimizer = as_vector(minimizer, problem.mapping.domain_dim)
        min_val = fn(minimizer)
    feas = np.array([problem.residual(p) <= feas_tol for p in pts])
    feasible_grid_min = float(np.min([problem.objective(p) for p in pts[feas]])) \
        if np.any(feas) else math.inf
    minimizer_feasible = problem.residual(minimizer) <= feas_tol
    obj_at_min = float(problem.objective(minimizer))
    cross_tol = max(slack, 10.0 * max(1.0, beta) * resolution)
    if not strict:
        verdict = "inconclusive"
    elif minimizer_feasible and obj_at_min <= feasible_grid_min + cross_tol:
        verdict = "solves"
    elif minimizer_feasible:
        verdict = "inconclusive"
    else:
        verdict = "infeasible"
    return GlobalPenaltyCheck(
        lam_eps=lam_eps, minimizer=minimizer, minimizer_value=float(min_val),
        strict=strict, feasible=bool(minimizer_feasible),
        objective_at_minimizer=obj_at_min, feasible_grid_min=feasible_grid_min,
        verdict=verdict, resolution=resolution)
