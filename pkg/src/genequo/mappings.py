"""Set-valued mappings x -> F(x) in R^m and the residual phi(x) = exc(F(x), C)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .geometry import (
    Cone,
    DimensionMismatch,
    FinitePoints,
    PlusCone,
    SetRep,
    as_point_array,
    as_vector,
    excess_to_cone,
    normalize,
    same_cone,
)
from .sampling import DEFAULT_SEED, sphere_directions

EPS_FEAS = 1e-8


class OutOfDomain(ValueError):
    """Evaluation point lies outside the declared domain box."""


def as_box(box, dim: Optional[int] = None) -> np.ndarray:
    b = np.asarray(box, dtype=float)
    if b.ndim != 2 or b.shape[1] != 2:
        raise ValueError("domain box must be a list of (lo, hi) pairs")
    if np.any(b[:, 0] > b[:, 1]):
        raise ValueError("domain box has lo > hi")
    if dim is not None and b.shape[0] != dim:
        raise DimensionMismatch(f"box dimension {b.shape[0]} != {dim}")
    return b


@dataclass(eq=False)
class SetValuedMap:
    """Evaluator x -> SetRep with declared dimensions and optional domain box.

    Evaluators must be pure; the toolkit may evaluate the residual at many
    points concurrently.
    """

    evaluator: Callable[[np.ndarray], SetRep]
    kind: str
    domain_dim: int
    range_dim: int
    domain_box: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.domain_box is not None:
            self.domain_box = as_box(self.domain_box, self.domain_dim)

    def __call__(self, x) -> SetRep:
        return evaluate(self, x)


def in_domain(F: SetValuedMap, x) -> bool:
    """Whether x lies in the declared domain box (always true when unboxed)."""
    if F.domain_box is None:
        return True
    x = as_vector(x, F.domain_dim)
    return bool(np.all(x >= F.domain_box[:, 0]) and np.all(x <= F.domain_box[:, 1]))


def evaluate(F: SetValuedMap, x) -> SetRep:
    """Evaluate the mapping and return the normalized set of values."""
    x = as_vector(x, F.domain_dim)
    if not in_domain(F, x):
        raise OutOfDomain(f"point {x} outside declared domain box")
    value = normalize(F.evaluator(x))
    if value.dim != F.range_dim:
        raise DimensionMismatch(
            f"evaluator returned dimension {value.dim}, declared {F.range_dim}")
    return value


@dataclass
class Residual:
    """Constraint residual phi(x): how far F(x) sticks out of the cone."""

    phi_value: float
    attained_at: Optional[np.ndarray]
    exactness: str  # "exact" | "sampled-lower-bound"

    @property
    def exact(self) -> bool:
        return self.exactness == "exact"


def phi(F: SetValuedMap, cone: Cone, x, n_dirs: int = 1024,
        seed: int = DEFAULT_SEED) -> Residual:
    """Residual phi(x) = excess of F(x) over the cone; zero exactly on solutions.

    An empty value set satisfies the inclusion vacuously and reports zero.
    """
    if F.range_dim != cone.dim:
        raise DimensionMismatch("mapping range and cone dimensions differ")
    exc = excess_to_cone(evaluate(F, x), cone, n_dirs=n_dirs, seed=seed)
    if exc.value == -math.inf:
        return Residual(0.0, None, "exact")
    tag = "exact" if exc.exact else "sampled-lower-bound"
    return Residual(max(0.0, exc.value), exc.attained_at, tag)


def is_feasible(F: SetValuedMap, cone: Cone, x, tol: float = EPS_FEAS) -> bool:
    return phi(F, cone, x).phi_value <= tol


# ---------------------------------------------------------------------------
# Constructors for the worked mapping families
# ---------------------------------------------------------------------------

def affine_plus_cone(matrix, cone: Cone, domain_box=None) -> SetValuedMap:
    """x -> {matrix @ x} + cone."""
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2:
        raise ValueError("matrix must be 2-D")
    if A.shape[0] != cone.dim:
        raise DimensionMismatch("matrix rows must match cone dimension")

    def evaluator(x: np.ndarray) -> SetRep:
        return PlusCone(FinitePoints((A @ x).reshape(1, -1)), cone)

    return SetValuedMap(evaluator, "affine-plus-cone", A.shape[1], A.shape[0],
                        domain_box, {"matrix": A, "cone": cone})


def single_valued(f: Callable[[np.ndarray], np.ndarray], domain_dim: int,
                  range_dim: int, domain_box=None, kind: str = "single-valued",
                  **metadata) -> SetValuedMap:
    """x -> {f(x)} for a point-valued function."""

    def evaluator(x: np.ndarray) -> SetRep:
        return FinitePoints(as_vector(f(x), range_dim).reshape(1, -1))

    return SetValuedMap(evaluator, kind, domain_dim, range_dim, domain_box,
                        dict(metadata, f=f))


def linear_map(matrix, domain_box=None) -> SetValuedMap:
    """x -> {matrix @ x}, the single-valued linear mapping."""
    A = np.asarray(matrix, dtype=float)
    return single_valued(lambda x: A @ x, A.shape[1], A.shape[0], domain_box,
                         kind="linear", matrix=A)


def image_shift(f: Callable[[np.ndarray], np.ndarray], sample_points,
                domain_dim: int, range_dim: int, domain_box=None) -> SetValuedMap:
    """x -> f(R) - f(x) over a finite sample R of the feasible set.

    Zero residual against the ordering cone characterizes points whose value
    dominates every sampled value.
    """
    R = as_point_array(sample_points, domain_dim)
    if R.shape[0] == 0:
        raise ValueError("sample set must be nonempty")
    fR = np.array([as_vector(f(z), range_dim) for z in R])

    def evaluator(x: np.ndarray) -> SetRep:
        return FinitePoints(fR - as_vector(f(x), range_dim))

    return SetValuedMap(evaluator, "image-shift", domain_dim, range_dim,
                        domain_box, {"f": f, "sample_points": R, "images": fR})


def semi_infinite(g: Callable[[float, np.ndarray], float], t_grid,
                  domain_dim: int, domain_box=None) -> SetValuedMap:
    """x -> {g(t, x) : t in grid}, discretizing an infinite constraint family.

    Pair with the nonpositive half-line: the residual is then
    max_t max(g(t, x), 0), the worst sampled constraint violation.
    """
    grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("index grid must be nonempty")

    def evaluator(x: np.ndarray) -> SetRep:
        vals = np.array([[float(g(t, x))] for t in grid])
        return FinitePoints(vals)

    return SetValuedMap(evaluator, "semi-infinite", domain_dim, 1, domain_box,
                        {"g": g, "t_grid": grid})


def vi_residual(gradient: Callable[[np.ndarray], np.ndarray], sample_points,
                domain_dim: int, domain_box=None) -> SetValuedMap:
    """x -> {<grad(x), z - x> : z in R}, the variational-inequality pairing.

    Pair with the nonnegative half-line: zero residual at x means the
    gradient pairing is nonnegative against every sampled competitor.
    """
    R = as_point_array(sample_points, domain_dim)
    if R.shape[0] == 0:
        raise ValueError("sample set must be nonempty")

    def evaluator(x: np.ndarray) -> SetRep:
        grad = as_vector(gradient(x), domain_dim)
        vals = (R - x) @ grad
        return FinitePoints(vals.reshape(-1, 1))

    return SetValuedMap(evaluator, "vi-residual", domain_dim, 1, domain_box,
                        {"gradient": gradient, "sample_points": R})


def sum_map(F: SetValuedMap, G: SetValuedMap) -> SetValuedMap:
    """Pointwise Minkowski sum of two mappings with matching dimensions."""
    if F.domain_dim != G.domain_dim or F.range_dim != G.range_dim:
        raise DimensionMismatch("summands must share domain and range dimensions")

    def evaluator(x: np.ndarray) -> SetRep:
        return _minkowski(evaluate(F, x), evaluate(G, x))

    box = F.domain_box if F.domain_box is not None else G.domain_box
    return SetValuedMap(evaluator, "sum", F.domain_dim, F.range_dim, box,
                        {"left": F, "right": G})


def _minkowski(a: SetRep, b: SetRep) -> SetRep:
    a = normalize(a)
    b = normalize(b)
    if isinstance(b, PlusCone) and not isinstance(a, PlusCone):
        a, b = b, a
    if isinstance(a, FinitePoints) and isinstance(b, FinitePoints):
        pts = (a.points[:, None, :] + b.points[None, :, :]).reshape(-1, a.dim)
        return FinitePoints(pts)
    if isinstance(a, PlusCone) and isinstance(b, FinitePoints):
        return PlusCone(_minkowski(a.base, b), a.cone)
    if isinstance(a, PlusCone) and isinstance(b, PlusCone):
        if same_cone(a.cone, b.cone):
            return PlusCone(_minkowski(a.base, b.base), a.cone)
    raise ValueError(
        f"Minkowski sum of {type(a).__name__} and {type(b).__name__} is not representable")


# ---------------------------------------------------------------------------
# Semicontinuity diagnostics
# ---------------------------------------------------------------------------

@dataclass
class SemicontinuityReport:
    """Sampled one-sided continuity probe of the residual at a point.

    The probe can only refute semicontinuity from finitely many samples; the
    absence of a flag is evidence, not a certificate (in particular upper
    semicontinuity depends on a uniform property no sample can confirm).
    """

    center: np.ndarray
    phi_center: float
    radii: np.ndarray
    per_radius_min: np.ndarray
    per_radius_max: np.ndarray
    liminf_estimate: float
    limsup_estimate: float
    lsc_violation: bool
    usc_violation: bool
    note: str = ("sampled probe: violations are refutations; clean runs do not "
                 "certify semicontinuity")


def semicontinuity_probe(F: SetValuedMap, cone: Cone, x_bar, n_dirs: int = 16,
                         radii: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
                         tol: float = EPS_FEAS,
                         seed: int = DEFAULT_SEED) -> SemicontinuityReport:
    """Probe lower/upper semicontinuity of phi along shrinking sampled rays."""
    x_bar = as_vector(x_bar, F.domain_dim)
    radii_arr = np.asarray(list(radii), dtype=float)
    if radii_arr.size == 0 or np.any(np.diff(radii_arr) >= 0) or np.any(radii_arr <= 0):
        raise ValueError("radii must be a strictly decreasing positive sequence")
    phi_center = phi(F, cone, x_bar).phi_value
    dirs = sphere_directions(F.domain_dim, n_dirs, seed=seed)
    mins, maxs = [], []
    for r in radii_arr:
        vals = [phi(F, cone, x_bar + r * d).phi_value for d in dirs]
        mins.append(min(vals))
        maxs.append(max(vals))
    liminf_est = mins[-1]
    limsup_est = maxs[-1]
    # A violation needs evidence of a genuine jump: the one-sided deviation
    # must exceed the tolerance AND fail to shrink with the radius (a merely
    # continuous residual deviates by O(radius) at every finite radius).
    deficits = np.maximum(phi_center - np.array(mins), 0.0)
    overshoots = np.maximum(np.array(maxs) - phi_center, 0.0)
    lsc_bad = deficits[-1] > tol and deficits[-1] > 0.5 * max(deficits[0], tol)
    usc_bad = overshoots[-1] > tol and overshoots[-1] > 0.5 * max(overshoots[0], tol)
    return SemicontinuityReport(
        center=x_bar,
        phi_center=phi_center,
        radii=radii_arr,
        per_radius_min=np.array(mins),
        per_radius_max=np.array(maxs),
        liminf_estimate=liminf_est,
        limsup_estimate=limsup_est,
        lsc_violation=bool(lsc_bad),
        usc_violation=bool(usc_bad),
    )
