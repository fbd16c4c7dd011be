"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one pass line (visible with ``pytest -s``); a failed assert
is the fail line.  Criteria with runtime budgets assert wall-clock time.
"""

import json
import math
import time

import numpy as np
import pytest

from genequo.cli import main
from genequo.geometry import (
    Ball,
    Enlargement,
    FinitePoints,
    NonnegHalfLine,
    NonposHalfLine,
    Orthant,
    dist_to_cone,
    excess_to_cone,
    project_to_cone,
    refute_enlargement_inclusion,
)
from genequo.increase import (
    CERTIFIED,
    REFUTED,
    CertificationRefused,
    certify_linear_orthant,
    check_increase_inclusion,
    estimate_increase_bound,
    perturbation_bound,
)
from genequo.mappings import affine_plus_cone, phi, single_valued
from genequo.penalty import (
    ConstrainedProblem,
    exactness_experiment,
    strict_global_check,
)
from genequo.solver import solve, verify_local_error_bound
from genequo.vecopt import VectorProblem, ideal_efficient_set, pareto_cross_check


def _passline(n, text):
    print(f"[criterion {n}] PASS: {text}")


def test_criterion_1_excess_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    checked = 0
    for m in (1, 2, 3, 5):
        cone = Orthant(m)
        while checked < 125 * (1, 2, 3, 5).index(m) + 125:
            y = rng.uniform(-5.0, 5.0, size=m)
            d = dist_to_cone(y, cone)
            if d <= 1e-9:
                continue
            r = rng.uniform(1e-3, 10.0)
            closed = excess_to_cone(Ball(y, r), cone)
            assert closed.method == "closed-form"
            assert abs(closed.value - (d + r)) <= 1e-12 * max(1.0, d + r)
            p = project_to_cone(y, cone)
            v = r * (y - p) / np.linalg.norm(y - p)
            attained = dist_to_cone(y + v, cone)
            assert abs(attained - closed.value) <= 1e-9
            checked += 1
    assert checked == 500
    enl_checked = 0
    while enl_checked < 200:
        m = int(rng.choice([1, 2, 3, 5]))
        cone = Orthant(m)
        pts = rng.uniform(-4.0, 4.0, size=(int(rng.integers(1, 9)), m))
        base = excess_to_cone(FinitePoints(pts), cone)
        if base.value <= 1e-9:
            continue
        r = rng.uniform(1e-3, 10.0)
        enl = excess_to_cone(Enlargement(FinitePoints(pts), r), cone)
        assert abs(enl.value - (base.value + r)) <= 1e-12 * max(1.0, enl.value)
        enl_checked += 1
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    _passline(1, f"500 ball + 200 enlargement identities to 1e-12, "
                 f"oracle to 1e-9, {elapsed:.2f}s")


def test_criterion_2_scaling_and_refutation():
    rng = np.random.default_rng(2)
    cone = Orthant(3)
    done = 0
    while done < 1000:
        y = rng.uniform(-5.0, 5.0, size=3)
        d = dist_to_cone(y, cone)
        if d <= 1e-9:
            continue
        c = project_to_cone(rng.uniform(-5.0, 5.0, size=3), cone)
        alpha = rng.uniform(1e-3, 5.0)
        lhs = dist_to_cone(y + alpha * (y - c), cone)
        rhs = (1.0 + alpha) * d
        assert lhs >= rhs - 1e-10 * max(1.0, rhs)
        done += 1
    refuted = 0
    rates = [1.5, 2.0, 4.0]
    for k in range(100):
        pts = rng.uniform(-4.0, 4.0, size=(4, 2))
        pts[0, 0] = -abs(pts[0, 0]) - 0.1  # keep the cloud partly outside
        r = rng.uniform(0.05, 2.0)
        out = refute_enlargement_inclusion(FinitePoints(pts), Orthant(2),
                                           rates[k % 3], r)
        assert out.refuted
        refuted += 1
    assert refuted == 100
    _passline(2, "scaling inequality on 1000 triples, inclusion refuted on "
                 "100 instances at rates 1.5/2/4")


def test_criterion_3_absolute_value_rate():
    F = single_valued(lambda x: np.abs(x), 1, 1)
    cone = NonnegHalfLine()
    est = estimate_increase_bound(F, cone, np.array([[-2.0, 2.0]]))
    assert est.a_low <= 2.0 <= est.a_high
    assert est.a_high - est.a_low <= 0.2
    rng = np.random.default_rng(3)
    for _ in range(25):
        x = rng.uniform(-2.0, 2.0)
        r = rng.uniform(0.2, 1.5)
        low = check_increase_inclusion(F, cone, [x], r, 1.9)
        high = check_increase_inclusion(F, cone, [x], r, 2.1)
        assert low.verdict == CERTIFIED
        assert high.verdict == REFUTED
    _passline(3, f"bracket [{est.a_low:.3f}, {est.a_high:.3f}] contains the "
                 f"known rate 2; certified at 1.9, refuted at 2.1")


def test_criterion_4_linear_certificates_and_perturbation():
    cone = Orthant(2)
    cert = certify_linear_orthant(3 * np.eye(2), cone)
    assert cert.a == pytest.approx(math.sqrt(2))
    F = affine_plus_cone(3 * np.eye(2), cone)
    rng = np.random.default_rng(4)
    for _ in range(100):
        x = rng.uniform(-5.0, 5.0, size=2)
        r = rng.uniform(0.05, 3.0)
        chk = check_increase_inclusion(F, cone, x, r, cert.a,
                                       candidates=[cert.witness(x, r)])
        assert chk.verdict == CERTIFIED
    with pytest.raises(CertificationRefused):
        certify_linear_orthant(np.eye(2), cone)
    assert perturbation_bound(2.0, 0.25).a == pytest.approx(1.5)
    for a in (1.25, 1.5, 2.0, 3.0, 5.0):
        for beta in (0.0, 0.1, 0.2, 0.4, 0.6, 0.9):
            if beta < 1.0 - 1.0 / a:
                assert perturbation_bound(a, beta).a == pytest.approx((1 - beta) * a)
            else:
                with pytest.raises(CertificationRefused):
                    perturbation_bound(a, beta)
    _passline(4, "rate sqrt(2) certificate passes 100 exact inclusion checks; "
                 "identity refused; perturbation arithmetic exact on the grid")


def test_criterion_5_descent_solver_constructive_bound():
    t0 = time.perf_counter()
    cone = Orthant(2)
    F = affine_plus_cone(3 * np.eye(2), cone)
    cert = certify_linear_orthant(3 * np.eye(2), cone)
    a = cert.a
    rng = np.random.default_rng(5)
    worst_iter = 0
    for _ in range(1000):
        x0 = rng.uniform(-5.0, 5.0, size=2)
        phi0 = phi(F, cone, x0).phi_value
        rep = solve(F, cone, x0, cert, tol=1e-8, max_iter=60)
        assert rep.phi_final <= 1e-8
        assert rep.iterations <= 60
        worst_iter = max(worst_iter, rep.iterations)
        if phi0 > 0:
            assert rep.distance_traveled <= phi0 / (a - 1.0) * (1 + 1e-6)
        assert dist_to_cone(x0, cone) <= phi0 / (a - 1.0) + 1e-12
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    _passline(5, f"1000 solves feasible within {worst_iter} iterations, distance "
                 f"and independent bounds hold, {elapsed:.2f}s")


def test_criterion_6_local_error_bound_abs():
    F = single_valued(lambda x: np.abs(x), 1, 1)
    cone = NonposHalfLine()
    radius, checks = verify_local_error_bound(
        F, cone, [0.0], 1.5, np.array([[0.0]]), initial_radius=1.0, n_samples=128)
    assert radius > 0
    for c in checks:
        assert c.lhs <= c.rhs + 1e-9
    _passline(6, f"local bound holds on all {len(checks)} samples within "
                 f"radius {radius:g}")


def test_criterion_7_penalty_threshold_and_global():
    F = single_valued(lambda x: -x, 1, 1)
    P = ConstrainedProblem(lambda x: float(x[0]), F, NonposHalfLine(),
                           [[-5.0, 5.0]], x_bar=[0.0])
    for lam in (1.1, 1.5, 4.0):
        v = exactness_experiment(P, lam, search_radius=5.0, resolution=1e-3)
        assert v.is_exact_at_x_bar
    for lam in (0.25, 0.5, 0.9):
        v = exactness_experiment(P, lam, search_radius=5.0, resolution=1e-3)
        assert not v.is_exact_at_x_bar
    chk = strict_global_check(P, 0.5, 1.0, 2.0, resolution=1e-3)
    assert chk.lam_eps == pytest.approx(1.5)
    assert chk.strict and chk.feasible
    assert chk.verdict == "solves"
    _passline(7, "exactness true above the threshold 1 and false below at grid "
                 "1e-3; strict global minimizer solves the constrained problem")


def test_criterion_8_ideal_points_random_instances():
    rng = np.random.default_rng(8)
    A = 3 * np.eye(2)
    rate = certify_linear_orthant(-A, Orthant(2)).a
    for trial in range(50):
        m = 2 if trial % 2 == 0 else 3
        k = int(rng.integers(5, 200))
        planted = rng.uniform(-2.0, 0.0, size=m)
        R = np.vstack([planted, planted + rng.uniform(0.05, 4.0, size=(k, m))])
        P = VectorProblem(lambda x: x, R, Orthant(m))
        rep = ideal_efficient_set(P)
        # brute-force dominance oracle
        oracle = [i for i, fi in enumerate(P.images)
                  if all(np.all(fj >= fi - 1e-12) for fj in P.images)]
        assert list(rep.ideal_indices) == oracle == [0]
        for p in rep.ideal_points:
            assert pareto_cross_check(P, p)
        if m == 2:
            P_cert = VectorProblem(lambda x: A @ x, R, Orthant(2))
            rep_cert = ideal_efficient_set(P_cert, increase_bound=rate)
            assert all(c.satisfied for c in rep_cert.bound_checks)
    _passline(8, "50 planted instances recovered exactly, ideal implies Pareto, "
                 "distance bound holds on certified instances")


ACCEPTANCE_SPECS = {
    "solve": {
        "format_version": 1, "seed": 42,
        "domain": {"dimension": 2, "box": [[-5, 5], [-5, 5]]},
        "cone": {"variant": "orthant", "dimension": 2},
        "mapping": {"constructor": "affine_plus_cone", "matrix": [[3, 0], [0, 3]]},
        "certificate": {"kind": "linear_orthant"},
        "solve": {"x0": [-1, -1], "tol": 1e-8},
    },
    "certify": {
        "format_version": 1, "seed": 42,
        "domain": {"dimension": 1, "box": [[-2, 2]]},
        "cone": {"variant": "nonneg_half_line"},
        "mapping": {"constructor": "single_valued", "expressions": ["abs(x1)"]},
        "certificate": {"kind": "estimate", "n_trials": 60},
    },
    "bounds": {
        "format_version": 1, "seed": 42,
        "domain": {"dimension": 2, "box": [[-3, 3], [-3, 3]]},
        "cone": {"variant": "orthant", "dimension": 2},
        "mapping": {"constructor": "affine_plus_cone", "matrix": [[3, 0], [0, 3]]},
        "certificate": {"kind": "linear_orthant"},
        "bounds": {"scope": "global", "samples": 50, "reference_grid": 41},
    },
    "penalty": {
        "format_version": 1, "seed": 42,
        "domain": {"dimension": 1, "box": [[-5, 5]]},
        "cone": {"variant": "nonpos_half_line"},
        "mapping": {"constructor": "single_valued", "expressions": ["-x1"]},
        "objective": {"expression": "x1"},
        "penalty": {"x_bar": [0], "lambdas": [0.5, 1.5], "search_radius": 5.0,
                     "resolution": 0.001, "a": 2.0, "beta": 1.0, "epsilon": 0.5},
    },
    "ideal": {
        "format_version": 1, "seed": 42,
        "domain": {"dimension": 2},
        "cone": {"variant": "orthant", "dimension": 2},
        "mapping": {"constructor": "linear", "matrix": [[3, 0], [0, 3]]},
        "ideal": {"points": [[0, 0], [1, 2], [2, 1], [0.5, 3]],
                   "increase_bound": 1.4142135623730951},
    },
}


def test_criterion_9_cli_determinism(tmp_path):
    for command, spec in ACCEPTANCE_SPECS.items():
        spec_path = tmp_path / f"{command}.json"
        spec_path.write_text(json.dumps(spec))
        outs = []
        for rerun in range(2):
            out_path = tmp_path / f"{command}.{rerun}.json"
            code = main([command, "--spec", str(spec_path),
                         "--out", str(out_path), "--format", "machine"])
            assert code == 0, f"{command} exited {code}"
            outs.append(out_path.read_bytes())
        assert outs[0] == outs[1], f"{command} report not byte-identical"
    _passline(9, "all five command reports byte-identical across reruns")
