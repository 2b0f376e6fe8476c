import math

import numpy as np
import pytest

from ballmax.geometry import unit_ball_volume
from ballmax.maximal import (
    BallParams,
    OptimizerSettings,
    RegionKind,
    UsageError,
    average_over_ball,
    beta_cutoff,
    feasible,
    maximal_value,
    maximal_value_batch,
    maximal_value_detailed,
    pointwise_reference,
)
from ballmax.profiles import OperatorConfig, StepProfile, evaluate, random_profile

UNIT_BALL = StepProfile(((1.0, 1.0),))


# ---------------------------------------------------------------------------
# independent one-dimensional oracle: dense grid search over intervals
# ---------------------------------------------------------------------------

def _integral_1d(g, lo, hi):
    """Integral of the radial step function over the interval [lo, hi]."""
    total = 0.0
    prev = 0.0
    for r, v in g.breakpoints:
        for a, b in ((prev, r), (-r, -prev)):
            total += v * max(0.0, min(hi, b) - max(lo, a))
        prev = r
    return total


def brute_force_m_1d(g, lam, R, n_beta=1200, n_alpha=60, rounds=3):
    """Independent supremum search in one dimension using only interval
    arithmetic; never touches the package's lens or optimizer code."""
    best = evaluate(g, R)  # shrinking centered-at-x limit
    b_lo, b_hi = 1e-7, (g.support_radius + R) / R * 3.0

    def value(alpha, beta):
        c, rad = alpha * R, beta * R
        return _integral_1d(g, c - rad, c + rad) / (2.0 * rad)

    best_ab = None
    for _ in range(rounds):
        betas = np.geomspace(b_lo, b_hi, n_beta)
        for beta in betas:
            a_lo = max(0.0, 1.0 - lam * beta)
            for alpha in np.linspace(a_lo, 1.0, n_alpha):
                v = value(alpha, beta)
                if v > best:
                    best = v
                    best_ab = (alpha, beta)
        if best_ab is None:
            break
        b_lo = max(1e-9, best_ab[1] * 0.8)
        b_hi = best_ab[1] * 1.25
    return best


# ---------------------------------------------------------------------------
# feasibility predicates
# ---------------------------------------------------------------------------

def test_feasible_full_region():
    assert feasible(RegionKind.FULL, 0.0, BallParams(1.0, 5.0))
    assert not feasible(RegionKind.FULL, 0.0, BallParams(0.9, 5.0))
    assert feasible(RegionKind.FULL, 0.5, BallParams(0.5, 1.0))
    assert not feasible(RegionKind.FULL, 0.5, BallParams(0.4, 1.0))


def test_feasible_band_regions():
    assert feasible(RegionKind.LOWER_BAND, 1.0, BallParams(0.5, 0.5))
    assert not feasible(RegionKind.UPPER_BAND, 0.0, BallParams(1.0, 1.5))
    assert feasible(RegionKind.UPPER_BAND, 0.0, BallParams(1.0, 0.7))
    assert not feasible(RegionKind.LOWER_BAND, 0.0, BallParams(1.0, 2.5))


def test_feasible_centered_shell():
    assert feasible(RegionKind.CENTERED_SHELL, 0.0, BallParams(1.0, 1.5))
    assert not feasible(RegionKind.CENTERED_SHELL, 0.0, BallParams(0.99, 1.5))
    assert not feasible(RegionKind.CENTERED_SHELL, 0.0, BallParams(1.0, 2.5))
    with pytest.raises(UsageError):
        feasible(RegionKind.CENTERED_SHELL, 0.5, BallParams(1.0, 1.5))


def test_ball_params_validation():
    with pytest.raises(UsageError):
        BallParams(-0.1, 1.0)
    with pytest.raises(UsageError):
        BallParams(0.5, 0.0)


# ---------------------------------------------------------------------------
# average_over_ball
# ---------------------------------------------------------------------------

def test_average_containment_gives_level():
    # ball strictly inside the support of the indicator
    for d in (1, 2, 3):
        v = average_over_ball(UNIT_BALL, d, 0.5, BallParams(1.0, 0.5))
        assert v == pytest.approx(1.0, rel=1e-12)


def test_average_planar_lens_value():
    v = average_over_ball(UNIT_BALL, 2, 1.0, BallParams(1.0, 1.0))
    # planar lens area over the disc area: 2/3 - sqrt(3)/(2*pi)
    want = (2 * math.pi / 3 - math.sqrt(3) / 2) / math.pi
    assert v == pytest.approx(want, abs=1e-12)
    assert want == pytest.approx(0.391002, abs=1e-6)


def test_average_interval_arithmetic():
    v = average_over_ball(UNIT_BALL, 1, 2.0, BallParams(0.25, 0.75))
    assert v == pytest.approx(2.0 / 3.0, rel=1e-12)
    # matches the independent integral oracle
    assert v == pytest.approx(_integral_1d(UNIT_BALL, -1.0, 2.0) / 3.0, rel=1e-12)


# ---------------------------------------------------------------------------
# beta_cutoff
# ---------------------------------------------------------------------------

def test_beta_cutoff_solves_mass_bound():
    assert beta_cutoff(2.0, 1, 2.0, 2.0 / 3.0) == pytest.approx(0.75, rel=1e-12)


def test_beta_cutoff_monotonicity_and_scaling():
    norm, d, R = 3.0, 2, 1.5
    base = beta_cutoff(norm, d, R, norm / (unit_ball_volume(d) * R ** d))
    assert base <= 1.0 + 1e-12
    b1 = beta_cutoff(norm, d, R, 0.4)
    b2 = beta_cutoff(norm, d, R, 0.8)
    assert b2 ** d == pytest.approx(b1 ** d / 2.0, rel=1e-12)


# ---------------------------------------------------------------------------
# maximal_value: frozen closed forms (verified against the 1-D oracle)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "lam, R, region, want",
    [
        (1.0, 2.0, RegionKind.FULL, 2.0 / 3.0),
        (0.0, 2.0, RegionKind.FULL, 1.0 / 3.0),
        (0.0, 0.9, RegionKind.FULL, 1.0),
        (0.0, 0.9, RegionKind.CENTERED_SHELL, 5.0 / 9.0),
        (0.5, 2.0, RegionKind.FULL, 0.5),
    ],
)
def test_maximal_value_unit_ball_closed_forms(lam, R, region, want):
    cfg = OperatorConfig(1, lam)
    got = maximal_value(UNIT_BALL, cfg, R, region)
    assert got == pytest.approx(want, abs=1e-9)
    if region is RegionKind.FULL:
        oracle = brute_force_m_1d(UNIT_BALL, lam, R)
        assert oracle == pytest.approx(want, abs=2e-3)


def test_maximal_value_outside_support_closed_form():
    # m(R) = (1 + lam) / (R + 1) for the unit interval indicator, R > 1
    for lam in (0.0, 0.25, 0.5, 1.0):
        cfg = OperatorConfig(1, lam)
        for R in (1.5, 2.0, 4.0):
            assert maximal_value(UNIT_BALL, cfg, R) == pytest.approx(
                (1 + lam) / (R + 1), rel=1e-9
            )


def test_maximal_value_matches_brute_force_on_random_profiles():
    for seed in (5, 11, 27):
        g = random_profile(seed, 5, 1)
        for lam in (0.0, 0.6, 1.0):
            cfg = OperatorConfig(1, lam)
            for R in (0.3 * g.support_radius, 1.4 * g.support_radius, 3.0 * g.support_radius):
                got = maximal_value(g, cfg, R)
                oracle = brute_force_m_1d(g, lam, R)
                assert got >= oracle - 1e-4 * max(oracle, 1e-12)
                assert got <= max(oracle * (1 + 2e-3), oracle + 1e-6)


def test_maximal_value_detailed_reports_argmax():
    cfg = OperatorConfig(1, 1.0)
    res = maximal_value_detailed(UNIT_BALL, cfg, 2.0)
    assert res.value == pytest.approx(2.0 / 3.0, abs=1e-9)
    # optimal ball [-1, 2]: alpha = 0.25, beta = 0.75
    assert res.alpha == pytest.approx(0.25, abs=1e-4)
    assert res.beta == pytest.approx(0.75, abs=1e-4)
    assert res.converged
    assert not res.empty_region


def test_maximal_value_batch_matches_scalar():
    cfg = OperatorConfig(2, 0.5)
    g = random_profile(3, 4, 2)
    Rs = [0.5, 1.0, 2.5]
    batch = maximal_value_batch(g, cfg, Rs)
    for R, v in zip(Rs, batch):
        assert v == pytest.approx(maximal_value(g, cfg, R), rel=1e-12)


def test_maximal_value_rejects_bad_radius():
    cfg = OperatorConfig(1, 0.5)
    with pytest.raises(UsageError):
        maximal_value(UNIT_BALL, cfg, 0.0)
    with pytest.raises(UsageError):
        maximal_value(UNIT_BALL, cfg, -1.0)
    with pytest.raises(UsageError):
        maximal_value(UNIT_BALL, OperatorConfig(1, 0.5), 1.0, RegionKind.CENTERED_SHELL)


# ---------------------------------------------------------------------------
# pointwise reference
# ---------------------------------------------------------------------------

def test_pointwise_reference_values():
    assert pointwise_reference(OperatorConfig(1, 1.0), 2.0, 2.0) == pytest.approx(1.0)
    assert pointwise_reference(OperatorConfig(3, 0.0), 1.7, 0.9) == pytest.approx(
        0.9 / (unit_ball_volume(3) * 1.7 ** 3)
    )
    assert pointwise_reference(OperatorConfig(2, 0.5), 3.0, 1.0) == pytest.approx(
        2.25 / (9 * math.pi)
    )


# ---------------------------------------------------------------------------
# structural invariants
# ---------------------------------------------------------------------------

def test_monotone_in_lambda():
    g = random_profile(8, 5, 2)
    cfgs = [OperatorConfig(2, lam) for lam in (0.0, 0.25, 0.5, 0.75, 1.0)]
    opt = OptimizerSettings()
    for R in (0.5 * g.support_radius, 2.0 * g.support_radius):
        vals = [maximal_value(g, cfg, R, RegionKind.FULL, opt) for cfg in cfgs]
        for a, b in zip(vals, vals[1:]):
            assert b >= a - 2 * opt.rel_tol * max(a, 1e-12)


def test_region_dominance():
    g = random_profile(17, 4, 2)
    opt = OptimizerSettings()
    for lam in (0.0, 0.5, 1.0):
        cfg = OperatorConfig(2, lam)
        regions = [RegionKind.UPPER_BAND, RegionKind.LOWER_BAND]
        if lam == 0.0:
            regions.append(RegionKind.CENTERED_SHELL)
        for R in (0.7, 1.8, 4.0):
            full = maximal_value(g, cfg, R, RegionKind.FULL, opt)
            for region in regions:
                sub = maximal_value(g, cfg, R, region, opt)
                assert sub <= full + 2 * opt.rel_tol * max(full, 1e-12)


def test_dilation_invariance():
    g = random_profile(21, 4, 2)
    cfg = OperatorConfig(2, 0.75)
    for s in (0.25, 3.0):
        gs = StepProfile(tuple((r * s, v) for r, v in g.breakpoints))
        for R in (0.6, 2.2):
            assert maximal_value(gs, cfg, s * R) == pytest.approx(
                maximal_value(g, cfg, R), rel=1e-9
            )


def test_vertical_scaling_is_exact():
    g = random_profile(33, 4, 3)
    cfg = OperatorConfig(3, 0.5)
    c = 3.7
    gc = StepProfile(tuple((r, v * c) for r, v in g.breakpoints))
    for R in (0.4, 1.9):
        assert maximal_value(gc, cfg, R) == pytest.approx(
            c * maximal_value(g, cfg, R), rel=1e-12
        )


def test_dominates_profile_level_inside_support():
    g = random_profile(2, 6, 2)
    cfg = OperatorConfig(2, 0.25)
    for R in np.linspace(0.1 * g.support_radius, 0.95 * g.support_radius, 7):
        assert maximal_value(g, cfg, float(R)) >= evaluate(g, float(R))


def test_optimizer_settings_validation():
    with pytest.raises(UsageError):
        OptimizerSettings(alpha_grid=7)
    with pytest.raises(UsageError):
        OptimizerSettings(refine_rounds=0)
    with pytest.raises(UsageError):
        OptimizerSettings(rel_tol=0.1)
    with pytest.raises(UsageError):
        OptimizerSettings(beta_floor=0.0)
