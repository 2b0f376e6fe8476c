"""Radial nonincreasing step profiles.

A step profile is a finite positive combination of indicators of
origin-centered balls; on this class every ball average reduces to a finite
sum of exact lens volumes, and the class is dense in L^1 among radial
nonincreasing functions.  Annuli are half open, [r_{k-1}, r_k), so point
evaluation is fixed at breakpoints; the convention is irrelevant to any
integral.

Profiles are immutable after construction; all operations are pure.
"""

from __future__ import annotations

import functools
import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import MAX_DIMENSION, _check_dimension, unit_ball_volume

__all__ = [
    "ProfileError",
    "StepProfile",
    "OperatorConfig",
    "parse_profile",
    "serialize_profile",
    "profile_digest",
    "l1_norm",
    "indicator_decomposition",
    "evaluate",
    "levels_at",
    "normalized_indicator",
    "random_profile",
]


class ProfileError(ValueError):
    """Invalid profile document or profile field."""


def _as_number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProfileError(f"{field}: expected a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ProfileError(f"{field}: expected a finite number, got {value!r}")
    return out


@dataclass(frozen=True)
class StepProfile:
    """Radial step function: level v_k on the annulus r_{k-1} <= |x| < r_k
    (r_0 = 0), zero beyond the last radius.

    Radii must increase strictly; levels must be positive and nonincreasing.
    """

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple(
            (_as_number(r, f"breakpoints[{k}].r"), _as_number(v, f"breakpoints[{k}].v"))
            for k, (r, v) in enumerate(self.breakpoints)
        )
        if not pts:
            raise ProfileError("breakpoints: profile needs at least one level")
        prev_r = 0.0
        prev_v = math.inf
        for k, (r, v) in enumerate(pts):
            if r <= prev_r:
                raise ProfileError(
                    f"breakpoints[{k}].r: radii must be positive and strictly increasing"
                )
            if v <= 0.0:
                raise ProfileError(f"breakpoints[{k}].v: levels must be positive")
            if v > prev_v:
                raise ProfileError(f"breakpoints[{k}].v: levels must be nonincreasing")
            prev_r, prev_v = r, v
        object.__setattr__(self, "breakpoints", pts)

    @property
    def radii(self) -> tuple[float, ...]:
        return tuple(r for r, _ in self.breakpoints)

    @property
    def levels(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.breakpoints)

    @property
    def support_radius(self) -> float:
        return self.breakpoints[-1][0]

    @property
    def top_level(self) -> float:
        return self.breakpoints[0][1]


def parse_profile(text: str) -> StepProfile:
    """Parse the JSON profile document {"levels": [{"r": ..., "v": ...}, ...]}.

    Unknown fields are rejected; validation errors name the offending field.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileError(f"document: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ProfileError("document: top level must be a JSON object")
    unknown = set(doc) - {"levels"}
    if unknown:
        raise ProfileError(f"document: unknown field(s) {sorted(unknown)}")
    if "levels" not in doc:
        raise ProfileError("levels: field is required")
    levels = doc["levels"]
    if not isinstance(levels, list) or not levels:
        raise ProfileError("levels: expected a nonempty array")
    pairs = []
    for k, item in enumerate(levels):
        if not isinstance(item, dict):
            raise ProfileError(f"levels[{k}]: expected an object with fields r, v")
        extra = set(item) - {"r", "v"}
        if extra:
            raise ProfileError(f"levels[{k}]: unknown field(s) {sorted(extra)}")
        if "r" not in item or "v" not in item:
            raise ProfileError(f"levels[{k}]: fields r and v are required")
        pairs.append(
            (_as_number(item["r"], f"levels[{k}].r"), _as_number(item["v"], f"levels[{k}].v"))
        )
    try:
        return StepProfile(tuple(pairs))
    except ProfileError as exc:
        # re-map the internal field name onto the document schema
        raise ProfileError(str(exc).replace("breakpoints[", "levels[")) from None


def serialize_profile(g: StepProfile) -> str:
    """Canonical JSON for a profile; parse_profile inverts it field-exactly."""
    return json.dumps({"levels": [{"r": r, "v": v} for r, v in g.breakpoints]})


def profile_digest(g: StepProfile) -> str:
    """Short stable identifier derived from the canonical serialization."""
    return hashlib.sha256(serialize_profile(g).encode("utf-8")).hexdigest()[:12]


@functools.lru_cache(maxsize=4096)
def _decomposition_cached(breakpoints: tuple[tuple[float, float], ...]):
    out = []
    for k, (r, v) in enumerate(breakpoints):
        v_next = breakpoints[k + 1][1] if k + 1 < len(breakpoints) else 0.0
        a = v - v_next
        if a > 0.0:
            out.append((r, a))
    return tuple(out)


def indicator_decomposition(g: StepProfile) -> tuple[tuple[float, float], ...]:
    """Write g as sum of a_k * (indicator of the ball of radius r_k).

    Coefficients are the level drops v_k - v_{k+1}; zero drops (flat runs)
    are collapsed away.
    """
    return _decomposition_cached(g.breakpoints)


def l1_norm(g: StepProfile, d: int) -> float:
    """Integral of g over R^d: sum of v_k * omega_d * (r_k^d - r_{k-1}^d)."""
    d = _check_dimension(d)
    omega = unit_ball_volume(d)
    total = 0.0
    prev = 0.0
    for r, v in g.breakpoints:
        total += v * omega * (r ** d - prev ** d)
        prev = r
    return total


def evaluate(g: StepProfile, radius: float) -> float:
    """Level of g at the given radius (half-open annuli; 0 beyond support)."""
    if not (radius >= 0.0 and math.isfinite(radius)):
        raise ProfileError(f"radius must be nonnegative and finite, got {radius}")
    for r, v in g.breakpoints:
        if radius < r:
            return v
    return 0.0


def levels_at(g: StepProfile, radii) -> np.ndarray:
    """Vectorized evaluate over an array of radii."""
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < 0.0) or not np.all(np.isfinite(radii)):
        raise ProfileError("radii must be nonnegative and finite")
    edges = np.array(g.radii)
    vals = np.append(np.array(g.levels), 0.0)
    idx = np.searchsorted(edges, radii, side="right")
    return vals[idx]


def normalized_indicator(r: float, d: int) -> StepProfile:
    """Indicator of the ball of radius r scaled to unit integral in R^d."""
    d = _check_dimension(d)
    if not (r > 0.0 and math.isfinite(r)):
        raise ProfileError(f"indicator radius must be positive, got {r}")
    return StepProfile(((r, 1.0 / (unit_ball_volume(d) * r ** d)),))


def random_profile(seed: int, k_max: int, d: int) -> StepProfile:
    """Deterministic random profile for test suites.

    The result always satisfies the StepProfile invariants; flat runs of
    equal levels occur with small probability so downstream code sees them.
    The total integral in dimension d is normalized to a moderate random
    value so scales stay comparable across seeds.
    """
    d = _check_dimension(d)
    if k_max < 1:
        raise ProfileError(f"k_max must be at least 1, got {k_max}")
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, k_max + 1))
    widths = rng.uniform(0.15, 1.0, size=k)
    radii = np.cumsum(widths) * rng.uniform(0.3, 1.5)
    base = rng.uniform(0.5, 2.0)
    factors = np.where(rng.random(k - 1) < 0.15, 1.0, rng.uniform(0.3, 0.95, size=k - 1))
    values = base * np.concatenate([[1.0], np.cumprod(factors)])
    g = StepProfile(tuple(zip(radii.tolist(), values.tolist())))
    mass_target = rng.uniform(0.5, 4.0)
    scale = mass_target / l1_norm(g, d)
    return StepProfile(tuple((r, v * scale) for r, v in g.breakpoints))


@dataclass(frozen=True)
class OperatorConfig:
    """Dimension d and centering relaxation lam (lambda: 0 centered balls
    only, 1 fully uncentered)."""

    d: int
    lam: float

    def __post_init__(self):
        if isinstance(self.d, bool) or not isinstance(self.d, (int, np.integer)):
            raise ProfileError(f"d must be an integer, got {self.d!r}")
        if not 1 <= self.d <= MAX_DIMENSION:
            raise ProfileError(f"d must lie in [1, {MAX_DIMENSION}], got {self.d}")
        lam = float(self.lam)
        if not (0.0 <= lam <= 1.0):
            raise ProfileError(f"lambda must lie in [0, 1], got {self.lam}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "lam", lam)
