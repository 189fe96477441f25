"""Zero-velocity detection and the sliding-window feasibility filter."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NonMonotonicTimestamp
from .types import EstimateStatus, RadarScan, VelocityEstimate


@dataclass(frozen=True)
class ZeroVelocityConfig:
    doppler_threshold: float = 0.05
    max_exceed_fraction: float = 0.25
    min_detections: int = 5

    def __post_init__(self):
        if not self.doppler_threshold > 0:
            raise ValueError("doppler_threshold must be positive")
        if not 0 <= self.max_exceed_fraction <= 1:
            raise ValueError("max_exceed_fraction must lie in [0, 1]")


def detect_zero_velocity(scan: RadarScan, cfg: ZeroVelocityConfig = ZeroVelocityConfig()) -> bool:
    """True when the sensor looks stationary.

    Requires the median absolute Doppler below the threshold and at most
    ``max_exceed_fraction`` of detections at or above it. Scans smaller than
    ``min_detections`` are never declared stationary.
    """
    if len(scan) == 0 or len(scan) < cfg.min_detections:
        return False
    a = np.abs(scan.dopplers)
    exceed = np.count_nonzero(a >= cfg.doppler_threshold) / a.size
    return bool(np.median(a) < cfg.doppler_threshold and exceed <= cfg.max_exceed_fraction)


class Combination(str, enum.Enum):
    # accept only if both the norm and acceleration checks pass
    REJECT_ON_EITHER = "reject_on_either"
    # reject only if both checks fail
    REQUIRE_BOTH = "require_both"


class Decision(str, enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass(frozen=True)
class FilterConfig:
    window_size: int = 5
    norm_threshold: float = 7.5
    max_acceleration: float = 10.0
    combination: Combination = Combination.REJECT_ON_EITHER

    def __post_init__(self):
        object.__setattr__(self, "combination", Combination(self.combination))
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        if not (self.norm_threshold > 0 and self.max_acceleration > 0):
            raise ValueError("thresholds must be positive")


@dataclass(frozen=True)
class FilterState:
    """Accepted ``(timestamp, velocity)`` pairs, oldest first.

    Holds up to ``window_size + 1`` entries so the previous estimate stays
    available for the acceleration check.
    """

    window: tuple = ()

    def warm(self, cfg: FilterConfig) -> bool:
        return len(self.window) >= cfg.window_size

    @property
    def last(self):
        return self.window[-1] if self.window else None


def _append(state, cfg, t, v):
    window = state.window + ((t, v),)
    return FilterState(window[-(cfg.window_size + 1):])


def filter_step(state: FilterState, cfg: FilterConfig, candidate: VelocityEstimate):
    """Decide whether ``candidate`` is feasible given the accepted history.

    Returns ``(Decision, new_state)``. Rejections return ``state`` itself.
    Raises NonMonotonicTimestamp when the candidate is not newer than the
    last accepted entry.
    """
    if candidate.status not in (EstimateStatus.ESTIMATED, EstimateStatus.ZERO_VELOCITY):
        raise ValueError(f"cannot filter a {candidate.status} estimate")
    t = candidate.timestamp
    v = np.array(candidate.velocity, dtype=float)
    v.setflags(write=False)
    last = state.last
    if last is not None and not t > last[0]:
        raise NonMonotonicTimestamp(f"candidate time {t} is not after {last[0]}")

    if candidate.status is EstimateStatus.ZERO_VELOCITY:
        return Decision.ACCEPT, _append(state, cfg, t, np.zeros(3))
    if last is None:
        return Decision.ACCEPT, _append(state, cfg, t, v)

    accel = np.linalg.norm(v - last[1]) / (t - last[0])
    accel_ok = accel < cfg.max_acceleration
    if state.warm(cfg):
        recent = state.window[-cfg.window_size:]
        n_avg = np.mean([np.linalg.norm(w) for _, w in recent])
        norm_ok = abs(n_avg - np.linalg.norm(v)) < cfg.norm_threshold
        if cfg.combination is Combination.REJECT_ON_EITHER:
            ok = norm_ok and accel_ok
        else:
            ok = norm_ok or accel_ok
    else:
        ok = accel_ok

    if ok:
        return Decision.ACCEPT, _append(state, cfg, t, v)
    return Decision.REJECT, state
