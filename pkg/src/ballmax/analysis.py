"""Radial scans, superlevel-set measures and weak-(1,1) ratio estimation.

The distribution function mu(t) = |{ operator value > t }| is computed by
scanning the operator along a radial grid, bisecting every threshold
crossing, and summing the measures of the resulting radial shells.  The
weak-type ratio t * mu(t) / ||g||_1 is then maximized over a threshold grid;
for radial nonincreasing profiles its supremum over all t is (1 + lam)^d,
which the sharpness experiment approaches with normalized ball indicators.

Because the operator values are lower bounds of the true suprema and the
crossing radii are refined to relative width 1e-6, every reported ratio is a
lower estimate of the true ratio up to that refinement error.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass

import numpy as np

from .geometry import unit_ball_volume
from .maximal import (
    OptimizerSettings,
    RegionKind,
    UsageError,
    maximal_value_batch,
)
from .profiles import (
    OperatorConfig,
    StepProfile,
    l1_norm,
    normalized_indicator,
    profile_digest,
)

__all__ = [
    "AnalysisWarning",
    "RadialScan",
    "ConstantEstimate",
    "SweepResult",
    "level_set_radius_bound",
    "default_t_grid",
    "radial_scan",
    "superlevel_measure",
    "weak_constant_estimate",
    "sharpness_experiment",
    "sweep",
]

_CROSSING_REL_WIDTH = 1e-6
_CROSSING_MAX_STEPS = 80
_DOMAIN_MARGIN = 1.1
_INNER_SCAN_POINTS = 16
_OUTER_SCAN_POINTS = 48
_MU_MONOTONE_SLACK = 1e-5


class AnalysisWarning(UserWarning):
    """Resolution or search-domain warnings from the level-set machinery."""


@dataclass(frozen=True)
class RadialScan:
    """Sampled operator values R -> m(R) with the provenance that produced
    them."""

    entries: tuple[tuple[float, float], ...]
    config: OperatorConfig
    region: RegionKind
    settings: OptimizerSettings
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        prev = 0.0
        for R, m in self.entries:
            if R <= prev:
                raise UsageError("scan radii must be positive and strictly increasing")
            if m < 0.0:
                raise UsageError("scan values must be nonnegative")
            prev = R


@dataclass(frozen=True)
class ConstantEstimate:
    """Weak-type ratio table for one profile and configuration."""

    ratio_sup: float
    argmax_t: float
    per_t: tuple[tuple[float, float, float], ...]  # (t, mu, ratio)
    profile_digest: str

    def __post_init__(self):
        if self.per_t:
            ratios = [row[2] for row in self.per_t]
            if abs(self.ratio_sup - max(ratios)) > 1e-12 * max(1.0, abs(self.ratio_sup)):
                raise UsageError("ratio_sup must equal the largest per-threshold ratio")
            mus = [row[1] for row in self.per_t]
            for lo, hi in zip(mus[1:], mus[:-1]):
                if lo > hi * (1.0 + _MU_MONOTONE_SLACK) + 1e-12:
                    raise UsageError("mu(t) must be nonincreasing in t")


@dataclass(frozen=True)
class SweepResult:
    """Per-cell summaries plus the flat per-threshold rows for emission."""

    cells: tuple[dict, ...]
    rows: tuple[dict, ...]
    warnings: tuple[str, ...] = ()


def level_set_radius_bound(cfg: OperatorConfig, norm: float, t: float) -> float:
    """Radius beyond which the mass bound forces operator values below t:
    ((1+lam)^d * norm / (omega_d * t))^(1/d)."""
    if not (t > 0.0 and norm > 0.0):
        raise UsageError("t and norm must be positive")
    omega = unit_ball_volume(cfg.d)
    return ((1.0 + cfg.lam) ** cfg.d * norm / (omega * t)) ** (1.0 / cfg.d)


def default_t_grid(g: StepProfile, n: int = 12) -> tuple[float, ...]:
    """Geometric threshold grid between 1e-4 and (1 - 1e-3) of the profile's
    top level.  Ratios peak as t -> 0, so the grid is log-spaced."""
    if n < 2:
        raise UsageError("threshold grid needs at least 2 points")
    v1 = g.top_level
    return tuple(np.geomspace(1e-4 * v1, (1.0 - 1e-3) * v1, n).tolist())


def radial_scan(
    g: StepProfile,
    cfg: OperatorConfig,
    R_grid,
    region: RegionKind = RegionKind.FULL,
    opt: OptimizerSettings | None = None,
) -> RadialScan:
    """Evaluate the operator on a strictly increasing radius grid."""
    opt = opt or OptimizerSettings()
    R = np.asarray(list(R_grid), dtype=float)
    if R.size == 0:
        return RadialScan((), cfg, region, opt)
    if np.any(R <= 0.0) or np.any(np.diff(R) <= 0.0):
        raise UsageError("R_grid must be positive and strictly increasing")
    from .maximal import _supremum_batch

    vals, _, _, _, warns = _supremum_batch(g, cfg, R, region, opt)
    entries = tuple((float(r), float(m)) for r, m in zip(R, vals))
    return RadialScan(entries, cfg, region, opt, warnings=warns)


def _scan_grid(g: StepProfile, hi: float) -> np.ndarray:
    """Radius grid for level-set scans: breakpoints and their midpoints, a
    geometric fill of the support, and a geometric tail out to hi."""
    radii = np.array(g.radii)
    r1, rK = radii[0], radii[-1]
    pieces = [radii]
    mids = 0.5 * (np.concatenate([[0.0], radii[:-1]]) + radii)
    pieces.append(mids)
    pieces.append(np.geomspace(r1 * 0.02, rK, _INNER_SCAN_POINTS))
    if hi > rK * (1.0 + 1e-12):
        pieces.append(np.geomspace(rK, hi, _OUTER_SCAN_POINTS))
    else:
        hi = rK
    grid = np.unique(np.concatenate(pieces))
    grid = grid[(grid > 0.0) & (grid <= hi)]
    if grid[-1] < hi:
        grid = np.append(grid, hi)
    return grid


def _refine_crossings(mval, lo, hi, thr, lo_above):
    """Bisect m(R) - thr sign changes; each bracket keeps the state of its
    left edge.  Returns crossing radii at relative width 1e-6."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    thr = np.array(thr, dtype=float)
    lo_above = np.array(lo_above, dtype=bool)
    for _ in range(_CROSSING_MAX_STEPS):
        if np.all(hi - lo <= _CROSSING_REL_WIDTH * hi):
            break
        mid = 0.5 * (lo + hi)
        above = mval(mid) > thr
        take_lo = above == lo_above
        lo = np.where(take_lo, mid, lo)
        hi = np.where(take_lo, hi, mid)
    return 0.5 * (lo + hi)


def _measure_for_thresholds(g, cfg, ts, opt, scan):
    """mu(t) for each threshold from one shared scan; crossings for all
    thresholds are bisected in a single batch."""
    v1 = g.top_level
    omega = unit_ball_volume(cfg.d)
    norm = l1_norm(g, cfg.d)
    Rs = np.concatenate([[0.0], [e[0] for e in scan.entries]])
    ms = np.concatenate([[v1], [e[1] for e in scan.entries]])

    def mval(R):
        return maximal_value_batch(g, cfg, R, RegionKind.FULL, opt)

    # Collect every bracket (threshold, left grid point, right grid point).
    brackets = []  # (t_index, lo, hi, lo_above)
    per_t_layout = []  # per threshold: list of ("edge0"|"cross"|"end",...)
    warn_list = []
    for ti, t in enumerate(ts):
        if t >= v1:
            per_t_layout.append(None)
            continue
        above = ms > t
        r_out = level_set_radius_bound(cfg, norm, t)
        beyond = above & (Rs > _DOMAIN_MARGIN * r_out)
        if np.any(beyond):
            warn_list.append(
                f"t={t:g}: operator exceeds the threshold beyond {_DOMAIN_MARGIN:g} x "
                f"the mass-bound radius {r_out:g}; level set measured from the full scan"
            )
        layout = []
        for i in range(len(Rs) - 1):
            if above[i] != above[i + 1]:
                layout.append(len(brackets))
                brackets.append((Rs[i], Rs[i + 1], bool(above[i])))
        if above[-1]:
            warn_list.append(
                f"t={t:g}: level set reaches the scan boundary R={Rs[-1]:g}; "
                "measure truncated there"
            )
        per_t_layout.append((above, layout, bool(above[-1])))

    if brackets:
        lo = np.array([b[0] for b in brackets])
        hi = np.array([b[1] for b in brackets])
        la = np.array([b[2] for b in brackets])
        thr = np.empty(len(brackets))
        pos = 0
        for ti, t in enumerate(ts):
            if per_t_layout[ti] is None:
                continue
            k = len(per_t_layout[ti][1])
            thr[pos : pos + k] = t
            pos += k
        crossings = _refine_crossings(mval, lo, hi, thr, la)
    else:
        crossings = np.zeros(0)

    mus = []
    for ti, t in enumerate(ts):
        if per_t_layout[ti] is None:
            mus.append(0.0)
            continue
        above, layout, open_end = per_t_layout[ti]
        edges = []
        left = 0.0 if above[0] else None
        for bracket_idx in layout:
            x = float(crossings[bracket_idx])
            if left is None:
                left = x
            else:
                edges.append((left, x))
                left = None
        if left is not None:
            edges.append((left, float(Rs[-1])))
        mu = omega * sum(b ** cfg.d - a ** cfg.d for a, b in edges)
        mus.append(mu)
    for w in warn_list:
        _warnings.warn(w, AnalysisWarning, stacklevel=3)
    return mus


def superlevel_measure(
    g: StepProfile,
    cfg: OperatorConfig,
    t: float,
    opt: OptimizerSettings | None = None,
    *,
    scan: RadialScan | None = None,
) -> float:
    """Lebesgue measure of the superlevel set { operator value > t }.

    The search domain is the mass-bound radius for t plus a 10% margin
    (values beyond it are warned about, never silently dropped).  A
    precomputed scan covering the domain may be supplied to share work
    across thresholds.
    """
    if not (t > 0.0 and math.isfinite(t)):
        raise UsageError(f"threshold must be positive, got {t}")
    opt = opt or OptimizerSettings()
    if t >= g.top_level:
        return 0.0
    if scan is None:
        norm = l1_norm(g, cfg.d)
        hi = max(
            _DOMAIN_MARGIN * level_set_radius_bound(cfg, norm, t),
            2.5 * g.support_radius,
        )
        scan = radial_scan(g, cfg, _scan_grid(g, hi), RegionKind.FULL, opt)
    return _measure_for_thresholds(g, cfg, [t], opt, scan)[0]


def weak_constant_estimate(
    g: StepProfile,
    cfg: OperatorConfig,
    t_grid,
    opt: OptimizerSettings | None = None,
) -> ConstantEstimate:
    """Ratios t * mu(t) / ||g||_1 over a threshold grid and their maximum."""
    opt = opt or OptimizerSettings()
    ts = [float(t) for t in t_grid]
    if not ts or any(t <= 0.0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
        raise UsageError("t_grid must be positive and strictly increasing")
    norm = l1_norm(g, cfg.d)
    live = [t for t in ts if t < g.top_level]
    if live:
        hi = max(
            _DOMAIN_MARGIN * level_set_radius_bound(cfg, norm, min(live)),
            2.5 * g.support_radius,
        )
        scan = radial_scan(g, cfg, _scan_grid(g, hi), RegionKind.FULL, opt)
        mus = _measure_for_thresholds(g, cfg, ts, opt, scan)
    else:
        mus = [0.0 for _ in ts]
    per_t = tuple((t, mu, t * mu / norm) for t, mu in zip(ts, mus))
    best = max(per_t, key=lambda row: row[2])
    return ConstantEstimate(
        ratio_sup=best[2],
        argmax_t=best[0],
        per_t=per_t,
        profile_digest=profile_digest(g),
    )


def sharpness_experiment(
    cfg: OperatorConfig,
    r_seq,
    t_seq,
    opt: OptimizerSettings | None = None,
) -> list[dict]:
    """Weak-type ratios for the normalized ball indicators of radii r_seq at
    thresholds t_seq.  Rows keep the caller's ordering."""
    opt = opt or OptimizerSettings()
    rs = [float(r) for r in r_seq]
    ts = [float(t) for t in t_seq]
    if any(r <= 0.0 for r in rs) or any(t <= 0.0 for t in ts):
        raise UsageError("radii and thresholds must be positive")
    bound = (1.0 + cfg.lam) ** cfg.d
    rows = []
    for r in rs:
        g = normalized_indicator(r, cfg.d)
        est = weak_constant_estimate(g, cfg, sorted(set(ts)), opt)
        ratio_at = {t: ratio for t, _, ratio in est.per_t}
        for t in ts:
            rows.append({"r": r, "t": t, "ratio": ratio_at[t], "bound": bound})
    return rows


def sweep(
    d_set,
    lambda_set,
    suite,
    opt: OptimizerSettings | None = None,
    t_points: int = 12,
) -> SweepResult:
    """Weak-constant estimates for every (d, lambda, profile) cell.

    suite is either an iterable of StepProfile (reused across dimensions) or
    a callable d -> iterable of StepProfile.  Cell failures are reported in
    the warnings, never aborting the sweep.
    """
    opt = opt or OptimizerSettings()
    d_list = [int(d) for d in d_set]
    lam_list = [float(lam) for lam in lambda_set]
    cells = []
    rows = []
    warn_list = []
    for d in d_list:
        profiles = list(suite(d)) if callable(suite) else list(suite)
        for lam in lam_list:
            cfg = OperatorConfig(d, lam)
            bound = (1.0 + lam) ** d
            for g in profiles:
                digest = profile_digest(g)
                try:
                    est = weak_constant_estimate(g, cfg, default_t_grid(g, t_points), opt)
                except Exception as exc:  # cell-level isolation
                    warn_list.append(f"cell d={d} lambda={lam:g} profile={digest}: {exc}")
                    continue
                cells.append(
                    {
                        "d": d,
                        "lambda": lam,
                        "profile_digest": digest,
                        "ratio_sup": est.ratio_sup,
                        "bound": bound,
                        "margin": bound - est.ratio_sup,
                    }
                )
                for t, mu, ratio in est.per_t:
                    rows.append(
                        {
                            "d": d,
                            "lambda": lam,
                            "profile_digest": digest,
                            "t": t,
                            "mu": mu,
                            "ratio": ratio,
                            "bound": bound,
                            "margin": bound - ratio,
                        }
                    )
    return SweepResult(tuple(cells), tuple(rows), tuple(warn_list))
