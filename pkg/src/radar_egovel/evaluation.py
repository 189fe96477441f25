"""Ground-truth alignment and per-axis AVE / RMSE scoring."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NoPairs, OutOfSpan

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroundTruthSample:
    timestamp: float
    velocity: np.ndarray
    angular_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    frame: str = "body"

    def __post_init__(self):
        v = np.array(self.velocity, dtype=float).reshape(3)
        w = np.array(self.angular_velocity, dtype=float).reshape(3)
        if not (np.isfinite(self.timestamp) and np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
            raise ValueError("ground-truth sample must be finite")
        object.__setattr__(self, "timestamp", float(self.timestamp))
        object.__setattr__(self, "velocity", v)
        object.__setattr__(self, "angular_velocity", w)


@dataclass(frozen=True)
class ExtrinsicSpec:
    """Lever arm from the GT body point to the radar [m], rotation body->radar."""

    lever_arm: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        p = np.array(self.lever_arm, dtype=float).reshape(3)
        R = np.array(self.rotation, dtype=float).reshape(3, 3)
        if not np.allclose(R @ R.T, np.eye(3), atol=1e-9, rtol=0):
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise ValueError("rotation must have determinant +1")
        object.__setattr__(self, "lever_arm", p)
        object.__setattr__(self, "rotation", R)


@dataclass(frozen=True)
class ErrorReport:
    ave: np.ndarray
    rmse: np.ndarray
    n_pairs: int
    n_excluded: int

    def to_dict(self) -> dict:
        return {
            "ave": [float(x) for x in self.ave],
            "rmse": [float(x) for x in self.rmse],
            "n_pairs": self.n_pairs,
            "n_excluded": self.n_excluded,
        }

    def format_table(self) -> str:
        lines = [
            f"{'':6}{'v_x':>8}{'v_y':>8}{'v_z':>8}",
            "AVE   " + "".join(f"{x:8.3f}" for x in self.ave),
            "RMSE  " + "".join(f"{x:8.3f}" for x in self.rmse),
            f"pairs: {self.n_pairs}  excluded: {self.n_excluded}",
        ]
        return "\n".join(lines)


def transfer_velocity(sample: GroundTruthSample, ext: ExtrinsicSpec = ExtrinsicSpec()) -> np.ndarray:
    """Rigid-body velocity of the radar origin, expressed in the radar frame."""
    v_point = sample.velocity + np.cross(sample.angular_velocity, ext.lever_arm)
    return ext.rotation @ v_point


class GroundTruth:
    """Time-sorted ground truth with vectorized linear interpolation."""

    def __init__(self, samples):
        samples = list(samples)
        if not samples:
            raise ValueError("ground truth is empty")
        self.samples = samples
        self.t = np.array([s.timestamp for s in samples])
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("ground-truth timestamps must be strictly increasing")
        self.v = np.array([s.velocity for s in samples])
        self.w = np.array([s.angular_velocity for s in samples])

    def covers(self, t) -> bool:
        return bool(self.t[0] <= t <= self.t[-1])

    def at(self, t: float) -> GroundTruthSample:
        if not self.covers(t):
            raise OutOfSpan(f"t={t} outside [{self.t[0]}, {self.t[-1]}]")
        i = int(np.searchsorted(self.t, t, side="right")) - 1
        if i >= len(self.t) - 1 or self.t[i] == t:
            s = self.samples[i]
            return GroundTruthSample(t, s.velocity, s.angular_velocity, s.frame)
        a = (t - self.t[i]) / (self.t[i + 1] - self.t[i])
        v = (1 - a) * self.v[i] + a * self.v[i + 1]
        w = (1 - a) * self.w[i] + a * self.w[i + 1]
        return GroundTruthSample(t, v, w, self.samples[i].frame)


def interpolate_gt(samples, t: float) -> GroundTruthSample:
    """Component-wise linear interpolation; raises OutOfSpan outside the span."""
    gt = samples if isinstance(samples, GroundTruth) else GroundTruth(samples)
    return gt.at(t)


def score(estimates, gt, ext: ExtrinsicSpec = ExtrinsicSpec()) -> ErrorReport:
    """Per-axis AVE and RMSE of valid estimates against interpolated GT.

    Estimates that are Rejected/Degenerate or fall outside the GT span are
    excluded. Pairs are accumulated in timestamp order, so the result does
    not depend on the order of ``estimates``.
    """
    gt = gt if isinstance(gt, GroundTruth) else GroundTruth(gt)
    estimates = list(estimates)
    valid = [e for e in estimates if e.is_valid and gt.covers(e.timestamp)]
    valid.sort(key=lambda e: (e.timestamp, tuple(e.velocity)))
    if not valid:
        raise NoPairs(f"none of {len(estimates)} estimates could be paired with ground truth")
    errors = np.array([e.velocity - transfer_velocity(gt.at(e.timestamp), ext) for e in valid])
    ave = np.mean(np.abs(errors), axis=0)
    # scale by the largest error so tiny or huge values neither underflow nor overflow
    peak = np.max(np.abs(errors), axis=0)
    safe = np.where(peak > 0, peak, 1.0)
    rmse = safe * np.sqrt(np.mean((errors / safe) ** 2, axis=0))
    return ErrorReport(ave, rmse, len(valid), len(estimates) - len(valid))
