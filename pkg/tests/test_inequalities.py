import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fkbounds.errors import HypothesisError
from fkbounds.inequalities import (
    MODULUS_TOL,
    VARIANCE_TOL,
    check_profile_hypothesis,
    diamagnetic_check,
    effective_kernel_1d,
    monotonicity_check,
    path_mean_variance,
    variance_comparison_check,
)
from fkbounds.kernel import FkConfig, landau_abs_kernel
from fkbounds.paths import BridgePath, make_grid, path_stream, sample_wiener, to_bridge
from fkbounds.potentials import (
    ConstantField,
    HarmonicPotential,
    QuadraticGaugeVector,
    SinusoidalField,
    ZeroPotential,
    ZeroVector,
    landau_vector_from_b,
)

FREE_2D = 0.15915494309189535
LANDAU_B1 = 0.15271193332004124


def straight_line_bridge(n: int, start: float, end: float) -> BridgePath:
    grid = make_grid(1.0, n, 1)
    nodes = np.linspace(start, end, n + 1)[:, None]
    return BridgePath(grid, np.array([start]), np.array([end]), nodes)


def exact_constant_profile_kernel(n: int, beta: float, b0: float) -> float:
    """Independent oracle: Gaussian expectation of exp(-(beta b0^2/2) * s^2)
    over the discrete bridge via the determinant identity, times (2 pi beta)^-1."""
    t = np.linspace(0.0, beta, n + 1)
    sigma = np.minimum.outer(t, t) - np.outer(t, t) / beta
    m = n + 1
    var_form = (np.eye(m) - np.ones((m, m)) / m) / m
    a = beta * b0**2 * (sigma @ var_form)
    return float(np.linalg.det(np.eye(m) + a) ** -0.5) / (2.0 * math.pi * beta)


# --- path statistics -------------------------------------------------------------


def test_constant_profile_stats():
    path = straight_line_bridge(16, 0.0, 1.0)
    stats = path_mean_variance(path, lambda r: np.full_like(r, 2.5))
    assert stats.mean == 2.5
    assert stats.variance == 0.0


def test_linear_profile_on_straight_line_exact_finite_n():
    # nodes k/n: mean is 1/2 exactly, variance is (2n+1)/(6n) - 1/4
    for n in (4, 32, 256):
        stats = path_mean_variance(straight_line_bridge(n, 0.0, 1.0), lambda r: r)
        assert stats.mean == pytest.approx(0.5, rel=1e-14)
        assert stats.variance == pytest.approx((2 * n + 1) / (6 * n) - 0.25, rel=1e-12)


def test_linear_profile_riemann_limit():
    stats = path_mean_variance(straight_line_bridge(4096, 0.0, 1.0), lambda r: r)
    assert stats.mean == pytest.approx(0.5, abs=1e-12)
    assert stats.variance == pytest.approx(1.0 / 12.0, rel=1e-3)


def test_profile_shift_leaves_variance():
    grid = make_grid(1.0, 32, 1)
    path = to_bridge(sample_wiener(grid, path_stream(6, 0)), [0.0], [1.0])
    base = path_mean_variance(path, lambda r: np.sin(r))
    shifted = path_mean_variance(path, lambda r: np.sin(r) + 7.0)
    assert shifted.mean == pytest.approx(base.mean + 7.0, rel=1e-12)
    assert shifted.variance == pytest.approx(base.variance, abs=1e-12)


# --- doubling identity -------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), n=st.integers(min_value=1, max_value=12))
def test_doubling_identity_brute_force(seed, n):
    # 2 (n+1)^2 [s2(A) - s2(a)] equals the double sum of squared-difference
    # gaps, equals the double sum of (A+a) and (A-a) difference products
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n + 1)
    b_small = SinusoidalField(0.0, 1.0, 1.3)
    b_large = ConstantField(1.0)
    a = np.asarray(b_small.integral(x))
    big = np.asarray(b_large.integral(x))

    def s2(vals):
        return np.mean(vals**2) - np.mean(vals) ** 2

    lhs = 2.0 * (n + 1) ** 2 * (s2(big) - s2(a))
    mid = sum(
        (big[i] - big[j]) ** 2 - (a[i] - a[j]) ** 2
        for i in range(n + 1)
        for j in range(n + 1)
    )
    plus = big + a
    minus = big - a
    rhs = sum(
        (plus[i] - plus[j]) * (minus[i] - minus[j])
        for i in range(n + 1)
        for j in range(n + 1)
    )
    assert lhs == pytest.approx(mid, rel=1e-9, abs=1e-9)
    assert mid == pytest.approx(rhs, rel=1e-9, abs=1e-9)
    assert rhs >= -1e-12


# --- diamagnetic check -------------------------------------------------------------


def test_diamagnetic_zero_field_is_identity():
    cfg = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=32, n_paths=2000, seed=1)
    rep = diamagnetic_check(cfg, HarmonicPotential(1.0), ZeroVector(), [([0.0], [0.0])])
    assert rep.passed
    assert rep.violations == 0
    d = rep.details[0]
    assert d["abs_k_magnetic"] == pytest.approx(d["k_free_potential"], rel=1e-14)


def test_diamagnetic_landau_case():
    cfg = FkConfig(beta=1.0, hbar=1.0, dim=2, n_steps=96, n_paths=10_000, seed=2)
    a = landau_vector_from_b(ConstantField(1.0))
    rep = diamagnetic_check(cfg, ZeroPotential(), a, [([0.0, 0.0], [0.0, 0.0])])
    assert rep.passed
    d = rep.details[0]
    # the analytic pair: 0.152711 <= 0.159155
    assert d["k_free_potential"] == pytest.approx(FREE_2D, rel=1e-12)
    assert d["abs_k_magnetic"] == pytest.approx(LANDAU_B1, rel=0.01)
    assert d["abs_k_magnetic"] <= d["k_free_potential"]


def test_diamagnetic_pure_gauge_equality():
    # pure gauge: the phase is an endpoint factor, |K| equals K(0, v) exactly
    cfg = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=64, n_paths=4000, seed=3)
    rep = diamagnetic_check(
        cfg, HarmonicPotential(1.0), QuadraticGaugeVector(0.9), [([1.0], [0.0])]
    )
    assert rep.passed
    d = rep.details[0]
    assert d["abs_k_magnetic"] == pytest.approx(d["k_free_potential"], rel=1e-12)


def test_diamagnetic_multiple_endpoints_and_harmonic_field():
    cfg = FkConfig(beta=1.0, hbar=1.0, dim=2, n_steps=64, n_paths=5000, seed=4)
    a = landau_vector_from_b(SinusoidalField(1.0, 0.5, 1.0))
    endpoints = [
        ([0.0, 0.0], [0.0, 0.0]),
        ([1.0, 0.0], [0.0, 0.0]),
        ([0.5, -0.5], [-0.5, 0.5]),
    ]
    rep = diamagnetic_check(cfg, HarmonicPotential(1.0), a, endpoints)
    assert rep.passed
    assert rep.violations == 0
    assert rep.config["pathwise_worst_modulus_deviation"] <= MODULUS_TOL


# --- variance comparison -----------------------------------------------------------


def test_variance_comparison_zero_vs_constant():
    cfg = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=64, n_paths=1, seed=5)
    rep = variance_comparison_check(ConstantField(0.0), ConstantField(1.0), 2000, cfg)
    assert rep.passed
    assert rep.violations == 0


def test_variance_comparison_sin_vs_one():
    cfg = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=256, n_paths=1, seed=6)
    rep = variance_comparison_check(
        SinusoidalField(0.0, 1.0, 1.0), ConstantField(1.0), 10_000, cfg
    )
    assert rep.passed
    assert rep.violations == 0
    assert rep.worst_margin >= -VARIANCE_TOL


def test_variance_comparison_equal_profiles_zero_margin():
    cfg = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=32, n_paths=1, seed=7)
    rep = variance_comparison_check(ConstantField(1.0), ConstantField(1.0), 500, cfg)
    assert rep.passed
    assert rep.worst_margin == 0.0


def test_variance_comparison_hypothesis_violation():
    cfg = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=32, n_paths=1, seed=8)
    with pytest.raises(HypothesisError):
        variance_comparison_check(ConstantField(1.0), SinusoidalField(0.0, 1.0, 1.0), 100, cfg)


def test_hypothesis_accepts_negative_dominating_field():
    check_profile_hypothesis(SinusoidalField(0.0, 0.5, 1.0), ConstantField(-1.0), -5.0, 5.0)


# --- effective 1-D kernel -----------------------------------------------------------


def test_effective_kernel_free_factorization():
    # a = 0: s^2 = 0 and m = 0, so the estimate is the planar free kernel exactly
    mc = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=32, n_paths=500, seed=9)
    est = effective_kernel_1d(lambda r: np.zeros_like(r), 1.0, (0.7, -0.3), (0.0, 0.2), mc)
    expected = (2 * math.pi) ** -1 * math.exp(-((0.7) ** 2 + (-0.5) ** 2) / 2.0)
    assert est.value == pytest.approx(expected, rel=1e-12)
    assert est.std_error == 0.0


def test_effective_kernel_constant_field_vs_determinant_oracle():
    # discrete-exact reference, no discretization allowance needed
    mc = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=256, n_paths=20_000, seed=3)
    est = effective_kernel_1d(lambda r: r, 1.0, (0.0, 0.0), (0.0, 0.0), mc)
    oracle = exact_constant_profile_kernel(256, 1.0, 1.0)
    assert abs(abs(est.value) - oracle) < 3.0 * est.std_error


def test_determinant_oracle_converges_to_constant_field_formula():
    errs = [abs(exact_constant_profile_kernel(n, 1.0, 1.0) - LANDAU_B1) for n in (64, 256)]
    assert errs[1] < errs[0]
    assert errs[1] < 1e-6


def test_effective_kernel_matches_continuum_constant_field():
    mc = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=256, n_paths=20_000, seed=12)
    est = effective_kernel_1d(lambda r: r, 1.0, (0.0, 0.0), (0.0, 0.0), mc)
    assert abs(est.value) == pytest.approx(LANDAU_B1, rel=0.005)


def test_effective_kernel_profile_shift_invariance():
    mc = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=64, n_paths=2000, seed=10)
    base = effective_kernel_1d(lambda r: r, 1.0, (0.3, 0.8), (0.0, 0.0), mc)
    shifted = effective_kernel_1d(lambda r: r + 5.0, 1.0, (0.3, 0.8), (0.0, 0.0), mc)
    assert abs(shifted.value) == pytest.approx(abs(base.value), rel=1e-12)


def test_effective_kernel_requires_unit_hbar():
    mc = FkConfig(beta=1.0, hbar=0.5, dim=1, n_steps=16, n_paths=100, seed=0)
    with pytest.raises(ValueError):
        effective_kernel_1d(lambda r: r, 4.0, (0.0, 0.0), (0.0, 0.0), mc)


# --- monotonicity check --------------------------------------------------------------


def test_monotonicity_equal_fields_equality():
    mc = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=64, n_paths=4000, seed=11)
    rep = monotonicity_check(
        ConstantField(1.0), ConstantField(1.0), [((0.0, 0.0), (0.0, 0.0))], 1.0, mc
    )
    assert rep.passed
    d = rep.details[0]
    assert d["lhs_abs"] == pytest.approx(d["rhs_abs_damped"], rel=1e-12)


def test_monotonicity_zero_vs_one_reproduces_closed_values():
    mc = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=256, n_paths=20_000, seed=12)
    rep = monotonicity_check(
        ConstantField(0.0), ConstantField(1.0), [((0.0, 0.0), (0.0, 0.0))], 1.0, mc
    )
    assert rep.passed
    d = rep.details[0]
    assert d["rhs_abs_damped"] == pytest.approx(FREE_2D, rel=1e-12)  # b = 0: exact
    assert d["lhs_abs"] == pytest.approx(LANDAU_B1, rel=0.005)
    assert d["lhs_abs"] <= d["rhs_abs_damped"]


def test_monotonicity_nonconstant_pair_five_endpoints():
    mc = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=128, n_paths=5000, seed=13)
    endpoints = [
        ((0.0, 0.0), (0.0, 0.0)),
        ((1.0, 0.0), (0.0, 0.0)),
        ((0.0, 1.0), (0.0, 0.0)),
        ((0.5, 0.5), (-0.5, 0.0)),
        ((2.0, -1.0), (1.0, 1.0)),
    ]
    rep = monotonicity_check(
        ConstantField(0.5), SinusoidalField(1.0, 0.5, 1.0), endpoints, 1.0, mc
    )
    assert rep.passed
    assert rep.violations == 0


def test_monotonicity_global_sign_flip_invariance():
    mc = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=64, n_paths=3000, seed=14)
    pos = effective_kernel_1d(ConstantField(1.0).integral, 1.0, (0.4, 0.6), (0.0, 0.0), mc)
    neg = effective_kernel_1d(ConstantField(-1.0).integral, 1.0, (0.4, 0.6), (0.0, 0.0), mc)
    assert abs(neg.value) == pytest.approx(abs(pos.value), rel=1e-12)


def test_monotonicity_estimator_level_repeated_seeds():
    # common random numbers make the estimate inequality inherit the exact
    # pathwise one, so repeated seeds give zero violations
    endpoints = [((0.0, 0.0), (0.0, 0.0)), ((1.0, 0.5), (0.0, 0.0))]
    violations = 0
    for seed in range(10):
        mc = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=48, n_paths=2000, seed=300 + seed)
        rep = monotonicity_check(
            ConstantField(0.5), SinusoidalField(1.0, 0.5, 1.0), endpoints, 1.0, mc
        )
        violations += rep.violations
    assert violations == 0


def test_monotonicity_hypothesis_violation_is_an_error():
    mc = FkConfig(beta=1.0, hbar=1.0, dim=1, n_steps=32, n_paths=200, seed=15)
    with pytest.raises(HypothesisError):
        monotonicity_check(
            ConstantField(1.0), SinusoidalField(0.0, 1.0, 1.0),
            [((0.0, 0.0), (0.0, 0.0))], 1.0, mc,
        )
