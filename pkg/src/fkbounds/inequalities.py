"""Verification of the two diamagnetic statements.

Both checks run at two levels.  The pathwise level asserts the exact
mechanism behind each proof on every sampled path: the modulus of a
phase-weighted path summand equals the phase-free summand, and the
discrete profile variance built from the smaller field never exceeds the
one built from the larger field (an algebraic consequence of rewriting
the variance difference as a double sum over node pairs).  The estimate
level compares Monte Carlo kernel values computed on a common path sample,
so the inequality between estimates inherits the pathwise mechanism and
the quoted standard errors are pure safety margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import HypothesisError
from .kernel import (
    CHUNK,
    FkConfig,
    KernelEstimate,
    _actions,
    _chunk_ranges,
    _phases,
    estimate_kernels,
)
from .paths import BridgePath, WienerPath, bridge_nodes, wiener_block
from .potentials import (
    BFieldProfile,
    ScalarPotential,
    VectorPotential,
    ZeroVector,
)

__all__ = [
    "MODULUS_TOL",
    "VARIANCE_TOL",
    "PathStats",
    "VerificationReport",
    "path_mean_variance",
    "diamagnetic_check",
    "variance_comparison_check",
    "effective_kernel_1d",
    "monotonicity_check",
    "check_profile_hypothesis",
]

# Pathwise assertions are algebraic identities; these tolerances only
# absorb floating-point rounding.
MODULUS_TOL = 1e-12
VARIANCE_TOL = 1e-12

HYPOTHESIS_GRID_POINTS = 10_000
HYPOTHESIS_SPAN_SIGMAS = 6.0


@dataclass(frozen=True)
class PathStats:
    """Uniform node average and variance of a profile along one path."""

    mean: float
    variance: float


@dataclass(frozen=True)
class VerificationReport:
    check: str
    n_items: int
    violations: int
    worst_margin: float
    tolerance: float
    passed: bool
    config: dict
    details: tuple = ()

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "n_items": self.n_items,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "config": self.config,
            "details": list(self.details),
        }


def _profile_stats(vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Node mean and variance along the last axis, equal weights."""
    m = vals.mean(axis=-1)
    s2 = (vals * vals).mean(axis=-1) - m * m
    return m, np.maximum(s2, 0.0)


def path_mean_variance(path: BridgePath | WienerPath, profile: Callable) -> PathStats:
    """Equal-weight node average of profile(x) and its variance, 1-D paths.

    Equal node weights keep the variance-comparison identity an exact
    finite-sum statement, so the pathwise checks can assert it at
    rounding tolerance.
    """
    if path.grid.dim != 1:
        raise ValueError("profile statistics are defined for 1-D paths")
    vals = np.asarray(profile(path.nodes[:, 0]), dtype=float)
    m, s2 = _profile_stats(vals)
    return PathStats(float(m), float(s2))


def _endpoint_pairs(cfg: FkConfig, endpoints: Sequence) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    for q, qp in endpoints:
        q = np.atleast_1d(np.asarray(q, dtype=float))
        qp = np.atleast_1d(np.asarray(qp, dtype=float))
        if q.shape != (cfg.dim,) or qp.shape != (cfg.dim,):
            raise ValueError(f"endpoint pair ({q}, {qp}) does not match dim {cfg.dim}")
        out.append((q, qp))
    return out


def diamagnetic_check(
    cfg: FkConfig,
    v: ScalarPotential,
    a: VectorPotential,
    endpoints: Sequence,
    workers: int = 1,
) -> VerificationReport:
    """|K(a, v)| <= K(0, v), pathwise and at the estimate level.

    Pathwise: |exp(-S + i Phi)| must equal exp(-S) on every sampled path
    (relative tolerance MODULUS_TOL).  Estimates: |K(a,v)| <= K(0,v) plus
    three combined standard errors at every endpoint pair, both sides
    sharing one path sample.
    """
    pairs = _endpoint_pairs(cfg, endpoints)
    grid = cfg.grid()

    path_violations = 0
    worst_path_dev = 0.0
    for first, count in _chunk_ranges(cfg.n_paths):
        w = wiener_block(grid, cfg.seed, first, count)
        for q, qp in pairs:
            x = bridge_nodes(w, grid, qp, q)
            s = _actions(x, v, cfg)
            phi = _phases(x, a, cfg)
            weight = np.exp(-s)
            modulus = np.abs(np.exp(-s + 1j * phi))
            dev = np.abs(modulus - weight) / np.maximum(weight, np.finfo(float).tiny)
            path_violations += int(np.count_nonzero(dev > MODULUS_TOL))
            worst_path_dev = max(worst_path_dev, float(dev.max()))

    est_a = estimate_kernels(cfg, v, a, pairs, workers=workers)
    est_0 = estimate_kernels(cfg, v, ZeroVector(), pairs, workers=workers)

    details = []
    est_violations = 0
    worst_slack = math.inf
    for (q, qp), ea, e0 in zip(pairs, est_a, est_0):
        se = math.hypot(ea.std_error, e0.std_error)
        slack = e0.value.real + 3.0 * se - abs(ea.value)
        est_violations += int(slack < 0)
        worst_slack = min(worst_slack, slack)
        details.append(
            {
                "q": list(q),
                "qprime": list(qp),
                "abs_k_magnetic": abs(ea.value),
                "k_free_potential": e0.value.real,
                "combined_se": se,
                "slack": slack,
            }
        )

    violations = path_violations + est_violations
    return VerificationReport(
        check="diamagnetic",
        n_items=cfg.n_paths * len(pairs) + len(pairs),
        violations=violations,
        worst_margin=min(MODULUS_TOL - worst_path_dev, worst_slack),
        tolerance=MODULUS_TOL,
        passed=violations == 0,
        config={
            **cfg.to_dict(),
            "potential": v.spec_string(),
            "vector_potential": a.spec_string(),
            "pathwise_worst_modulus_deviation": worst_path_dev,
        },
        details=tuple(details),
    )


def check_profile_hypothesis(
    b: BFieldProfile, big: BFieldProfile, lo: float, hi: float
) -> None:
    """Require |b| <= B (or |b| <= -B) on a dense probe grid.

    The monotonicity statement is conditional; a violated hypothesis must
    surface as HypothesisError rather than as a counterexample.
    """
    grid = np.linspace(lo, hi, HYPOTHESIS_GRID_POINTS)
    abs_b = np.abs(b.field(grid))
    big_vals = big.field(grid)
    slack = 1e-12
    if np.all(abs_b <= big_vals + slack) or np.all(abs_b <= -big_vals + slack):
        return
    worst = int(np.argmax(abs_b - np.maximum(big_vals, -big_vals)))
    raise HypothesisError(
        f"|b| <= B fails near r = {grid[worst]:.6g}: "
        f"|b| = {abs_b[worst]:.6g}, B = {big_vals[worst]:.6g}"
    )


def variance_comparison_check(
    b: BFieldProfile,
    big: BFieldProfile,
    n_paths: int,
    cfg: FkConfig,
    q1prime: float = 0.0,
) -> VerificationReport:
    """Pathwise s^2(a) <= s^2(A) for a, A the running integrals of b, B.

    Exact up to rounding: with |b| <= B both A + a and A - a have
    non-decreasing integrals, which makes the double-sum form of the
    variance difference termwise non-negative.
    """
    T = cfg.total_time
    check_profile_hypothesis(
        b, big,
        q1prime - HYPOTHESIS_SPAN_SIGMAS * math.sqrt(T),
        q1prime + HYPOTHESIS_SPAN_SIGMAS * math.sqrt(T),
    )
    grid = cfg.grid()
    if grid.dim != 1:
        raise ValueError("variance comparison runs on 1-D paths")

    violations = 0
    worst = math.inf
    done = 0
    while done < n_paths:
        count = min(CHUNK, n_paths - done)
        w = wiener_block(grid, cfg.seed, done, count)
        pos = w[:, :, 0] + q1prime
        _, s2_small = _profile_stats(np.asarray(b.integral(pos)))
        _, s2_large = _profile_stats(np.asarray(big.integral(pos)))
        margin = s2_large - s2_small
        violations += int(np.count_nonzero(margin < -VARIANCE_TOL))
        worst = min(worst, float(margin.min()))
        done += count

    return VerificationReport(
        check="variance-comparison",
        n_items=n_paths,
        violations=violations,
        worst_margin=worst,
        tolerance=VARIANCE_TOL,
        passed=violations == 0,
        config={
            **cfg.to_dict(),
            "n_paths": n_paths,
            "b": b.spec_string(),
            "B": big.spec_string(),
            "q1prime": q1prime,
        },
    )


def _planar_point(x) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.shape != (2,):
        raise ValueError(f"expected a planar point, got {x!r}")
    return p


def effective_kernel_1d(
    a_profile: Callable,
    beta: float,
    q,
    qprime,
    mc: FkConfig,
) -> KernelEstimate:
    """Planar kernel for a q1-dependent gauge, via its 1-D reduction.

    Separating the second coordinate leaves a one-parameter family of 1-D
    problems; integrating the momentum parameter turns the planar kernel
    into a 1-D bridge average of exp(-beta s^2 / 2 + i dq2 m), where m and
    s^2 are the node mean and variance of the gauge profile along the
    path.  Fixed to hbar = 1 units.
    """
    if mc.hbar != 1.0:
        raise ValueError("the 1-D reduction is implemented in hbar = 1 units")
    if mc.dim != 1:
        raise ValueError("mc config must be one-dimensional")
    if abs(mc.beta - beta) > 1e-12 * max(1.0, beta):
        raise ValueError("mc.beta must equal beta")
    q = _planar_point(q)
    qp = _planar_point(qprime)
    dq2 = q[1] - qp[1]

    grid = mc.grid()
    total = 0.0 + 0.0j
    total_sq = 0.0
    chunk_sums = []
    for first, count in _chunk_ranges(mc.n_paths):
        w = wiener_block(grid, mc.seed, first, count)
        x = bridge_nodes(w, grid, qp[:1], q[:1])
        vals = np.asarray(a_profile(x[:, :, 0]), dtype=float)
        m, s2 = _profile_stats(vals)
        z = np.exp(-0.5 * beta * s2 + 1j * dq2 * m)
        csum = complex(z.sum())
        chunk_sums.append(csum)
        total += csum
        total_sq += float(np.vdot(z, z).real)

    n = mc.n_paths
    mean = total / n
    var = max(0.0, total_sq - abs(total) ** 2 / n) / max(1, n - 1)
    pref = (2.0 * math.pi * beta) ** -1.0 * math.exp(
        -((q[0] - qp[0]) ** 2 + dq2**2) / (2.0 * beta)
    )
    return KernelEstimate(
        value=pref * mean,
        std_error=pref * math.sqrt(var / n),
        n_paths=n,
        prefactor=pref,
        q=tuple(q),
        qprime=tuple(qp),
        config=mc,
        potential="zero",
        vector_potential="effective-1d",
        chunk_sums=tuple(chunk_sums),
    )


def monotonicity_check(
    b: BFieldProfile,
    big: BFieldProfile,
    endpoints: Sequence,
    beta: float,
    mc: FkConfig,
) -> VerificationReport:
    """|K^B(q, q')| <= |K^b((q1,0), (q1',0))| exp(-dq2^2 / 2 beta).

    Both sides are evaluated on the same 1-D bridges (the first
    coordinates of the endpoint pair agree), so the pathwise layer
    s^2(a) <= s^2(A) forces the estimate-level inequality up to rounding;
    the three-sigma allowance is reported for context.
    """
    pairs = [( _planar_point(q), _planar_point(qp)) for q, qp in endpoints]
    T = beta  # hbar = 1
    q1s = [p[0][0] for p in pairs] + [p[1][0] for p in pairs]
    check_profile_hypothesis(
        b, big,
        min(q1s) - HYPOTHESIS_SPAN_SIGMAS * math.sqrt(T),
        max(q1s) + HYPOTHESIS_SPAN_SIGMAS * math.sqrt(T),
    )

    details = []
    est_violations = 0
    path_violations = 0
    worst_slack = math.inf
    worst_pathwise = math.inf
    grid = mc.grid()
    for q, qp in pairs:
        lhs = effective_kernel_1d(big.integral, beta, q, qp, mc)
        rhs = effective_kernel_1d(b.integral, beta, (q[0], 0.0), (qp[0], 0.0), mc)
        damp = math.exp(-((q[1] - qp[1]) ** 2) / (2.0 * beta))
        se = math.hypot(lhs.std_error, rhs.std_error * damp)
        slack = abs(rhs.value) * damp + 3.0 * se - abs(lhs.value)
        est_violations += int(slack < 0)
        worst_slack = min(worst_slack, slack)

        for first, count in _chunk_ranges(mc.n_paths):
            w = wiener_block(grid, mc.seed, first, count)
            x = bridge_nodes(w, grid, qp[:1], q[:1])
            pos = x[:, :, 0]
            _, s2_small = _profile_stats(np.asarray(b.integral(pos)))
            _, s2_large = _profile_stats(np.asarray(big.integral(pos)))
            margin = s2_large - s2_small
            path_violations += int(np.count_nonzero(margin < -VARIANCE_TOL))
            worst_pathwise = min(worst_pathwise, float(margin.min()))

        details.append(
            {
                "q": list(q),
                "qprime": list(qp),
                "lhs_abs": abs(lhs.value),
                "rhs_abs_damped": abs(rhs.value) * damp,
                "combined_se": se,
                "slack": slack,
            }
        )

    violations = est_violations + path_violations
    return VerificationReport(
        check="monotonicity",
        n_items=len(pairs) * (1 + mc.n_paths),
        violations=violations,
        worst_margin=min(worst_slack, worst_pathwise),
        tolerance=VARIANCE_TOL,
        passed=violations == 0,
        config={
            **mc.to_dict(),
            "beta": beta,
            "b": b.spec_string(),
            "B": big.spec_string(),
            "pathwise_worst_margin": worst_pathwise,
        },
        details=tuple(details),
    )
