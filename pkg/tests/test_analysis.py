import math

import numpy as np
import pytest

from ballmax.analysis import (
    AnalysisWarning,
    ConstantEstimate,
    default_t_grid,
    level_set_radius_bound,
    radial_scan,
    sharpness_experiment,
    superlevel_measure,
    sweep,
    weak_constant_estimate,
)
from ballmax.maximal import OptimizerSettings, RegionKind, UsageError
from ballmax.profiles import OperatorConfig, StepProfile, profile_digest, random_profile

UNIT_BALL = StepProfile(((1.0, 1.0),))


# ---------------------------------------------------------------------------
# radial_scan
# ---------------------------------------------------------------------------

def test_radial_scan_closed_form_uncentered():
    scan = radial_scan(UNIT_BALL, OperatorConfig(1, 1.0), [1.5, 2.0, 3.0])
    values = [m for _, m in scan.entries]
    assert values == pytest.approx([0.8, 2.0 / 3.0, 0.5], rel=1e-9)


def test_radial_scan_inside_support_is_top_level():
    scan = radial_scan(UNIT_BALL, OperatorConfig(2, 0.5), [0.2, 0.5, 0.9])
    assert [m for _, m in scan.entries] == pytest.approx([1.0, 1.0, 1.0], rel=1e-12)


def test_radial_scan_empty_grid():
    scan = radial_scan(UNIT_BALL, OperatorConfig(1, 0.0), [])
    assert scan.entries == ()


def test_radial_scan_requires_increasing_grid():
    with pytest.raises(UsageError):
        radial_scan(UNIT_BALL, OperatorConfig(1, 0.0), [2.0, 1.0])
    with pytest.raises(UsageError):
        radial_scan(UNIT_BALL, OperatorConfig(1, 0.0), [-1.0, 1.0])


def test_radial_scan_records_provenance():
    opt = OptimizerSettings(alpha_grid=9, beta_grid=9, refine_rounds=4, rel_tol=1e-4)
    cfg = OperatorConfig(1, 1.0)
    scan = radial_scan(UNIT_BALL, cfg, [1.0, 2.0], RegionKind.FULL, opt)
    assert scan.config == cfg
    assert scan.region is RegionKind.FULL
    assert scan.settings == opt


# ---------------------------------------------------------------------------
# superlevel_measure
# ---------------------------------------------------------------------------

def test_superlevel_above_top_level_is_zero():
    assert superlevel_measure(UNIT_BALL, OperatorConfig(1, 1.0), 1.0) == 0.0
    assert superlevel_measure(UNIT_BALL, OperatorConfig(1, 1.0), 2.5) == 0.0


def test_superlevel_closed_forms_one_dimension():
    # uncentered: mu(t) = 4/t - 2; centered: 2/t - 2 capped at the support
    assert superlevel_measure(UNIT_BALL, OperatorConfig(1, 1.0), 0.5) == pytest.approx(
        6.0, rel=1e-4
    )
    assert superlevel_measure(UNIT_BALL, OperatorConfig(1, 0.0), 0.5) == pytest.approx(
        2.0, rel=1e-4
    )
    assert superlevel_measure(UNIT_BALL, OperatorConfig(1, 0.5), 0.25) == pytest.approx(
        10.0, rel=1e-4
    )


def test_superlevel_rejects_bad_threshold():
    with pytest.raises(UsageError):
        superlevel_measure(UNIT_BALL, OperatorConfig(1, 1.0), 0.0)
    with pytest.raises(UsageError):
        superlevel_measure(UNIT_BALL, OperatorConfig(1, 1.0), -1.0)


def test_level_set_radius_bound_value():
    cfg = OperatorConfig(1, 1.0)
    # (1+1) * 2 / (2 * t) = 2/t
    assert level_set_radius_bound(cfg, 2.0, 0.1) == pytest.approx(20.0, rel=1e-12)


# ---------------------------------------------------------------------------
# weak_constant_estimate
# ---------------------------------------------------------------------------

def test_weak_constant_uncentered_ratios():
    est = weak_constant_estimate(UNIT_BALL, OperatorConfig(1, 1.0), [0.1, 0.2, 0.5])
    ratios = [r for _, _, r in est.per_t]
    assert ratios == pytest.approx([1.9, 1.8, 1.5], abs=1e-4)
    assert est.ratio_sup == pytest.approx(1.9, abs=1e-4)
    assert est.argmax_t == pytest.approx(0.1)
    assert est.profile_digest == profile_digest(UNIT_BALL)


def test_weak_constant_centered_ratios():
    est = weak_constant_estimate(UNIT_BALL, OperatorConfig(1, 0.0), [0.1, 0.5])
    ratios = [r for _, _, r in est.per_t]
    assert ratios == pytest.approx([0.9, 0.5], abs=1e-4)
    assert est.ratio_sup <= 1.0 + 1e-9


def test_weak_constant_mu_nonincreasing():
    g = random_profile(4, 5, 2)
    est = weak_constant_estimate(g, OperatorConfig(2, 0.75), default_t_grid(g, 10))
    mus = [mu for _, mu, _ in est.per_t]
    for a, b in zip(mus, mus[1:]):
        assert b <= a * (1 + 1e-5) + 1e-12


def test_weak_constant_requires_increasing_grid():
    with pytest.raises(UsageError):
        weak_constant_estimate(UNIT_BALL, OperatorConfig(1, 1.0), [0.5, 0.2])
    with pytest.raises(UsageError):
        weak_constant_estimate(UNIT_BALL, OperatorConfig(1, 1.0), [])


def test_constant_estimate_validates_ratio_sup():
    with pytest.raises(UsageError):
        ConstantEstimate(0.5, 0.1, ((0.1, 1.0, 0.9),), "x" * 12)


# ---------------------------------------------------------------------------
# sharpness_experiment
# ---------------------------------------------------------------------------

def test_sharpness_one_dimensional_closed_form():
    # normalized unit-interval indicator: ratio(t) = (1 + lam) - 2 t
    rows = sharpness_experiment(OperatorConfig(1, 1.0), [1.0], [0.1, 0.05])
    assert [row["ratio"] for row in rows] == pytest.approx([1.8, 1.9], abs=1e-4)
    rows = sharpness_experiment(OperatorConfig(1, 0.5), [1.0], [0.1])
    assert rows[0]["ratio"] == pytest.approx(1.3, abs=1e-4)


def test_sharpness_scale_equivariance_in_threshold():
    # the ratio of an indicator family depends on t only through t * |B(0,r)|
    d = 1
    rows_r1 = sharpness_experiment(OperatorConfig(d, 1.0), [1.0], [0.2])
    rows_r2 = sharpness_experiment(OperatorConfig(d, 1.0), [2.0], [0.1])
    assert rows_r1[0]["ratio"] == pytest.approx(rows_r2[0]["ratio"], rel=1e-6)


def test_sharpness_respects_bound():
    rows = sharpness_experiment(OperatorConfig(2, 0.5), [1.0], [1e-2, 1e-3])
    for row in rows:
        assert row["ratio"] <= 2.25 + 1e-9
        assert row["bound"] == 2.25


def test_sharpness_keeps_caller_order():
    rows = sharpness_experiment(OperatorConfig(1, 1.0), [1.0], [0.2, 0.1, 0.05])
    assert [row["t"] for row in rows] == [0.2, 0.1, 0.05]


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def test_sweep_indicator_bounds():
    result = sweep([1], [0.0, 1.0], [UNIT_BALL], t_points=6)
    assert {cell["bound"] for cell in result.cells} == {1.0, 2.0}
    for cell in result.cells:
        assert cell["ratio_sup"] <= cell["bound"] + 1e-9
        assert cell["margin"] >= -1e-9
    assert len(result.rows) == 2 * 6
    assert set(result.rows[0]) == {
        "d", "lambda", "profile_digest", "t", "mu", "ratio", "bound", "margin",
    }


def test_sweep_empty_suite():
    result = sweep([1, 2], [0.5], [])
    assert result.cells == ()
    assert result.rows == ()


def test_sweep_bound_arithmetic():
    result = sweep([2], [0.5], [UNIT_BALL], t_points=4)
    assert result.cells[0]["bound"] == pytest.approx(2.25)


def test_sweep_callable_suite():
    result = sweep([1, 2], [1.0], lambda d: [random_profile(d, 3, d)], t_points=4)
    assert len(result.cells) == 2


def test_default_t_grid_range():
    grid = default_t_grid(UNIT_BALL, 9)
    assert len(grid) == 9
    assert grid[0] == pytest.approx(1e-4)
    assert grid[-1] == pytest.approx(1 - 1e-3)
    assert all(b > a for a, b in zip(grid, grid[1:]))
