"""Descent solver for F(x) inside C, with global and local error-bound checks.

Each step moves by exactly the current residual r = phi(x) to a witness point
whose residual contracts by the factor (2 - a) (clamped at zero for rates
above 2).  Summing the geometric step lengths realizes the error bound
dist(x0, solutions) <= phi(x0) / (a - 1) constructively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .geometry import Cone, as_point_array, as_vector
from .increase import IncreaseCertificate
from .mappings import EPS_FEAS, SetValuedMap, in_domain, phi
from .sampling import DEFAULT_SEED, sphere_directions

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 1000
FALLBACK_DIRECTIONS = 256
FALLBACK_FRACTIONS = (1.0, 0.5, 0.25)


class StallError(RuntimeError):
    """No step meeting the contraction target was found."""

    def __init__(self, message: str, report: Optional["SolveReport"] = None):
        super().__init__(message)
        self.report = report


class LocalityExceededError(RuntimeError):
    """The required step radius reaches beyond the certificate's locality."""

    def __init__(self, message: str, report: Optional["SolveReport"] = None):
        super().__init__(message)
        self.report = report


class MaxIterationsError(RuntimeError):
    """Iteration budget exhausted before reaching the tolerance."""

    def __init__(self, message: str, report: Optional["SolveReport"] = None):
        super().__init__(message)
        self.report = report


@dataclass
class TraceStep:
    x: np.ndarray
    phi_x: float
    u: np.ndarray
    phi_u: float


@dataclass
class SolveReport:
    solution: np.ndarray
    phi_final: float
    iterations: int
    trace: list[TraceStep]
    distance_traveled: float
    bound_ratio: float  # distance * (a - 1) / phi(x0); <= ~1 on certified runs
    status: str = "converged"


def step_slack(phi0: float) -> float:
    return 1e-12 * max(1.0, phi0)


def descent_step(F: SetValuedMap, cone: Cone, x, cert: IncreaseCertificate,
                 r: Optional[float] = None, slack: Optional[float] = None,
                 seed: int = DEFAULT_SEED) -> tuple[np.ndarray, float]:
    """One descent move of radius r = phi(x); returns (u, phi(u)).

    The certificate witness is tried first and validated against the
    contraction target max(0, 2 - a) * phi(x) + slack; on failure a sampled
    sphere search takes over.  Raises StallError when nothing contracts and
    LocalityExceededError when r reaches the certificate's locality radius.
    """
    x = as_vector(x, F.domain_dim)
    if r is None:
        r = phi(F, cone, x).phi_value
    if r <= 0.0:
        raise ValueError("descent requires a positive residual at x")
    if r >= cert.delta:
        raise LocalityExceededError(
            f"step radius {r:.3g} reaches locality radius {cert.delta:.3g}")
    if slack is None:
        slack = step_slack(r)
    target = max(0.0, 2.0 - cert.a) * r + slack

    if cert.witness is not None:
        u = as_vector(cert.witness(x, r), F.domain_dim)
        if np.linalg.norm(u - x) <= r * (1.0 + 1e-9) and in_domain(F, u):
            phi_u = phi(F, cone, u).phi_value
            if phi_u <= target:
                return u, phi_u

    dirs = sphere_directions(F.domain_dim, FALLBACK_DIRECTIONS, seed=seed)
    for frac in FALLBACK_FRACTIONS:
        for d in dirs:
            u = x + r * frac * d
            if not in_domain(F, u):
                continue
            phi_u = phi(F, cone, u).phi_value
            if phi_u <= target:
                return u, phi_u
    raise StallError(f"no step within radius {r:.3g} met the contraction target")


def solve(F: SetValuedMap, cone: Cone, x0, cert: IncreaseCertificate,
          tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
          seed: int = DEFAULT_SEED) -> SolveReport:
    """Iterate descent steps until the residual falls below tol.

    On success the walked distance is bounded by phi(x0) / (a - 1) up to
    floating slack, realizing the error-bound estimate along the iterate
    path.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    x = as_vector(x0, F.domain_dim)
    phi0 = phi(F, cone, x).phi_value
    slack = step_slack(phi0)
    trace: list[TraceStep] = []
    traveled = 0.0
    phi_x = phi0
    for k in range(max_iter):
        if phi_x <= tol:
            ratio = traveled * (cert.a - 1.0) / phi0 if phi0 > 0 else 0.0
            return SolveReport(x, phi_x, k, trace, traveled, ratio)
        if phi_x >= cert.delta:
            raise LocalityExceededError(
                f"residual {phi_x:.3g} reaches locality radius {cert.delta:.3g}",
                report=SolveReport(x, phi_x, k, trace, traveled, math.nan, "locality-exceeded"))
        try:
            u, phi_u = descent_step(F, cone, x, cert, r=phi_x, slack=slack, seed=seed)
        except StallError as err:
            raise StallError(str(err), report=SolveReport(
                x, phi_x, k, trace, traveled, math.nan, "stalled")) from None
        trace.append(TraceStep(x.copy(), phi_x, u.copy(), phi_u))
        traveled += float(np.linalg.norm(u - x))
        x, phi_x = u, phi_u
    if phi_x <= tol:
        ratio = traveled * (cert.a - 1.0) / phi0 if phi0 > 0 else 0.0
        return SolveReport(x, phi_x, max_iter, trace, traveled, ratio)
    raise MaxIterationsError(
        f"residual {phi_x:.3g} above tol after {max_iter} iterations",
        report=SolveReport(x, phi_x, max_iter, trace, traveled, math.nan, "max-iterations"))


# ---------------------------------------------------------------------------
# Error-bound verification
# ---------------------------------------------------------------------------

SolvReference = Union[Callable[[np.ndarray], float], np.ndarray]


def _dist_to_reference(x: np.ndarray, reference: SolvReference) -> float:
    if callable(reference):
        return float(reference(x))
    pts = as_point_array(reference, x.size)
    if pts.shape[0] == 0:
        return math.inf
    return float(np.min(np.linalg.norm(pts - x, axis=1)))


@dataclass
class BoundCheck:
    x: np.ndarray
    lhs: float  # distance to the reference solution set
    rhs: float  # phi(x) / (a - 1)
    satisfied: bool


def _bound_check(F: SetValuedMap, cone: Cone, x: np.ndarray, a: float,
                 reference: SolvReference, tol: float) -> BoundCheck:
    lhs = _dist_to_reference(x, reference)
    rhs = phi(F, cone, x).phi_value / (a - 1.0)
    return BoundCheck(x, lhs, rhs, lhs <= rhs + tol)


def verify_global_error_bound(F: SetValuedMap, cone: Cone, a: float,
                              samples, solv_reference: SolvReference,
                              tol: float = EPS_FEAS,
                              reference_slack: float = 0.0) -> list[BoundCheck]:
    """Check dist(x, solutions) <= phi(x) / (a - 1) at each sample point.

    The reference solution set is an analytic distance function or a cloud of
    feasible points.  A discrete cloud only overestimates the true distance,
    so pass its mesh radius as ``reference_slack`` to avoid spurious
    violations.
    """
    if a <= 1:
        raise ValueError("requires a > 1")
    pts = as_point_array(samples, F.domain_dim)
    return [_bound_check(F, cone, x, a, solv_reference, tol + reference_slack)
            for x in pts]


class RadiusUnderflowError(RuntimeError):
    """Bound not confirmed at any tried radius (diagnostic, not a disproof)."""


def verify_local_error_bound(F: SetValuedMap, cone: Cone, x_bar, a: float,
                             solv_reference: SolvReference,
                             initial_radius: float = 1.0,
                             n_samples: int = 64, shrink: float = 0.5,
                             min_radius: float = 1e-8,
                             tol: float = EPS_FEAS,
                             seed: int = DEFAULT_SEED) -> tuple[float, list[BoundCheck]]:
    """Find a radius around a feasible x_bar where the error bound holds on samples.

    Shrinks the candidate radius geometrically until every sampled check in
    the ball passes; the reported radius is empirical, not the theoretical
    locality radius.
    """
    if a <= 1:
        raise ValueError("requires a > 1")
    x_bar = as_vector(x_bar, F.domain_dim)
    if phi(F, cone, x_bar).phi_value > tol:
        raise ValueError("x_bar must be feasible (zero residual)")
    dirs = sphere_directions(F.domain_dim, n_samples, seed=seed)
    rng = np.random.default_rng(seed)
    fracs = rng.uniform(0.0, 1.0, size=n_samples)
    radius = float(initial_radius)
    while radius >= min_radius:
        checks = [
            _bound_check(F, cone, x_bar + radius * f * d, a, solv_reference, tol)
            for f, d in zip(fracs, dirs)
        ]
        if all(c.satisfied for c in checks):
            return radius, checks
        radius *= shrink
    raise RadiusUnderflowError(
        f"error bound not confirmed above radius {min_radius:.3g}")


@dataclass
class ProbeResult:
    points: np.ndarray  # (k, n) grid points
    mask: np.ndarray    # boolean feasibility per point
    tol: float

    @property
    def feasible_points(self) -> np.ndarray:
        return self.points[self.mask]


def solution_set_probe(F: SetValuedMap, cone: Cone, box,
                       grid: Union[int, Sequence[int]] = 21,
                       tol: float = EPS_FEAS) -> ProbeResult:
    """Feasibility mask of phi <= tol over a rectangular grid.

    Doubles as a fallback solution-set reference for error-bound checks.
    """
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    if isinstance(grid, int):
        grid = [grid] * box.shape[0]
    axes = [np.linspace(lo, hi, int(g)) for (lo, hi), g in zip(box, grid)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    mask = np.array([phi(F, cone, p).phi_value <= tol for p in pts])
    return ProbeResult(pts, mask, tol)
