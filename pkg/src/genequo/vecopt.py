"""Ideal efficient points of vector optimization over a finite feasible sample.

A point is ideally efficient when its objective value dominates every sampled
feasible value in the cone order, i.e. f(R) sits inside f(x) + C.  Detection
reduces to a zero residual of the shifted-image mapping; an increase rate for
-f turns residuals into distance bounds to the ideal set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import Cone, Orthant, NonnegHalfLine, NonposHalfLine, as_point_array, as_vector
from .mappings import EPS_FEAS
from .sampling import DEFAULT_SEED, sphere_directions


@dataclass(eq=False)
class VectorProblem:
    """Objective f into the cone-ordered range, over a finite feasible sample R."""

    f: Callable[[np.ndarray], np.ndarray]
    points: np.ndarray  # feasible sample R, shape (k, n)
    cone: Cone

    def __post_init__(self):
        self.points = as_point_array(self.points)
        if self.points.shape[0] == 0:
            raise ValueError("feasible sample must be nonempty")
        self._images = np.array([
            as_vector(self.f(z), self.cone.dim) for z in self.points
        ])

    @property
    def images(self) -> np.ndarray:
        return self._images


def ideal_residual(problem: VectorProblem, x) -> float:
    """Worst cone distance of any sampled value shift f(z) - f(x).

    Zero exactly when x's value dominates every sampled value in the cone
    order.
    """
    fx = as_vector(problem.f(as_vector(x)), problem.cone.dim)
    return float(np.max(problem.cone.distance_many(problem.images - fx)))


def is_pointed(cone: Cone, n_samples: int = 256, tol: float = EPS_FEAS,
               seed: int = DEFAULT_SEED) -> bool:
    """Whether the cone meets its negative only at the origin.

    Exact for orthants and half-lines; sampled probe (refutation only) for
    polyhedral cones.
    """
    if isinstance(cone, (Orthant, NonnegHalfLine, NonposHalfLine)):
        return True
    dirs = sphere_directions(cone.dim, n_samples, seed=seed)
    for d in dirs:
        p = cone.project(d)
        if np.linalg.norm(p) > 1e-6 and cone.distance(-p) <= tol * np.linalg.norm(p):
            return False
    return True


@dataclass
class IdealBoundCheck:
    index: int
    lhs: float  # distance to the detected ideal set
    rhs: float  # residual / (a - 1)
    satisfied: bool


@dataclass
class IdealReport:
    """Ideal points of the sampled problem with residuals and bound checks.

    The increase hypothesis behind the distance bound concerns -f on the
    discrete sample itself; checks here are therefore statements about the
    supplied data, disclosed as such, not about an underlying continuum.
    """

    ideal_indices: np.ndarray
    ideal_points: np.ndarray
    residuals: np.ndarray
    bound_checks: list[IdealBoundCheck] = field(default_factory=list)
    pointed: bool = True
    note: str = ""

    @property
    def is_empty(self) -> bool:
        return self.ideal_indices.size == 0


def ideal_efficient_set(problem: VectorProblem,
                        increase_bound: Optional[float] = None,
                        tol: float = EPS_FEAS) -> IdealReport:
    """Scan the sample for ideal points; empty is a legitimate outcome.

    With an increase rate for -f supplied, every sample point gets the check
    dist(x, ideal set) <= residual(x) / (rate - 1).
    """
    residuals = np.array([ideal_residual(problem, z) for z in problem.points])
    idx = np.flatnonzero(residuals <= tol)
    ideal_pts = problem.points[idx]
    checks: list[IdealBoundCheck] = []
    if increase_bound is not None:
        if increase_bound <= 1:
            raise ValueError("increase bound must exceed 1")
        for i, z in enumerate(problem.points):
            if idx.size == 0:
                lhs = math.inf
            else:
                lhs = float(np.min(np.linalg.norm(ideal_pts - z, axis=1)))
            rhs = residuals[i] / (increase_bound - 1.0)
            checks.append(IdealBoundCheck(i, lhs, rhs, lhs <= rhs + tol))
    note = ""
    if idx.size == 0:
        note = ("no sampled point dominates all others; the existence "
                "hypotheses fail on this data")
    return IdealReport(idx, ideal_pts, residuals, checks,
                       pointed=is_pointed(problem.cone), note=note)


def pareto_cross_check(problem: VectorProblem, x_bar, tol: float = EPS_FEAS) -> bool:
    """Confirm an ideal point is also Pareto: nothing strictly dominates it.

    A competitor z strictly dominates when f(x_bar) - f(z) lies in the cone
    but not in its negative (the latter exclusion discards order-equivalent
    values).  Ideal points always pass.
    """
    x_bar = as_vector(x_bar)
    if ideal_residual(problem, x_bar) > tol:
        raise ValueError("x_bar is not ideal for this problem")
    f_bar = as_vector(problem.f(x_bar), problem.cone.dim)
    for fz in problem.images:
        d = f_bar - fz
        if problem.cone.distance(d) <= tol and problem.cone.distance(-d) > tol:
            return False
    return True
