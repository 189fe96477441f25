"""Core data model: detections, scans and velocity estimates.

Doppler sign convention: a static target seen along unit direction ``u`` by a
sensor moving with velocity ``v`` reports ``doppler = -u . v``. Approaching
targets under forward motion therefore read negative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ZeroRangeDetection

#: Minimum range [m] for which a detection has a usable direction.
MIN_RANGE = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Detection:
    """One radar return.

    Args:
        position: (x, y, z) in the radar frame [m].
        doppler: signed radial velocity [m/s].
        snr: intensity or SNR, nonnegative. Missing SNR is stored as 1.0.
    """

    position: tuple[float, float, float]
    doppler: float
    snr: float = 1.0

    def __post_init__(self):
        pos = tuple(float(p) for p in self.position)
        if len(pos) != 3:
            raise ValueError(f"position must have 3 components, got {len(pos)}")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "doppler", float(self.doppler))
        object.__setattr__(self, "snr", float(self.snr))
        if not all(math.isfinite(x) for x in (*pos, self.doppler, self.snr)):
            raise ValueError(f"non-finite detection field in {self!r}")
        if self.snr < 0:
            raise ValueError(f"snr must be nonnegative, got {self.snr}")

    @property
    def range(self) -> float:
        return math.sqrt(sum(p * p for p in self.position))


@dataclass(frozen=True)
class RadarScan:
    """Timestamped, ordered collection of detections from one sensor frame.

    Detection order is preserved; consensus sampling indexes into it.
    """

    timestamp: float
    detections: tuple[Detection, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "timestamp", float(self.timestamp))
        object.__setattr__(self, "detections", tuple(self.detections))
        if not math.isfinite(self.timestamp):
            raise ValueError("scan timestamp must be finite")

    @classmethod
    def from_arrays(cls, timestamp, positions, dopplers, snrs=None) -> "RadarScan":
        positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        dopplers = np.asarray(dopplers, dtype=float).reshape(-1)
        if len(positions) != len(dopplers):
            raise ValueError("positions and dopplers differ in length")
        if snrs is None:
            snrs = np.ones(len(dopplers))
        snrs = np.asarray(snrs, dtype=float).reshape(-1)
        dets = tuple(
            Detection(tuple(p), d, s) for p, d, s in zip(positions.tolist(), dopplers.tolist(), snrs.tolist())
        )
        return cls(timestamp, dets)

    def __len__(self) -> int:
        return len(self.detections)

    @cached_property
    def positions(self) -> np.ndarray:
        """(M, 3) array of detection positions."""
        if not self.detections:
            return _readonly(np.zeros((0, 3)))
        return _readonly(np.array([d.position for d in self.detections], dtype=float))

    @cached_property
    def dopplers(self) -> np.ndarray:
        return _readonly(np.array([d.doppler for d in self.detections], dtype=float))

    @cached_property
    def snrs(self) -> np.ndarray:
        return _readonly(np.array([d.snr for d in self.detections], dtype=float))

    @cached_property
    def directions(self) -> np.ndarray:
        """(M, 3) unit line-of-sight vectors. Raises ZeroRangeDetection."""
        return _readonly(unit_directions(self.positions))

    def with_doppler_sign(self, sign: float) -> "RadarScan":
        if sign == 1:
            return self
        return RadarScan(
            self.timestamp,
            tuple(Detection(d.position, sign * d.doppler, d.snr) for d in self.detections),
        )


class EstimateStatus(str, enum.Enum):
    ESTIMATED = "Estimated"
    ZERO_VELOCITY = "ZeroVelocity"
    REJECTED = "Rejected"
    DEGENERATE = "Degenerate"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class VelocityEstimate:
    timestamp: float
    velocity: np.ndarray
    status: EstimateStatus
    inlier_count: int = 0
    total_count: int = 0
    residual_rms: float = float("nan")

    def __post_init__(self):
        v = np.array(self.velocity, dtype=float).reshape(3)
        object.__setattr__(self, "velocity", _readonly(v))
        object.__setattr__(self, "status", EstimateStatus(self.status))
        if not 0 <= self.inlier_count <= self.total_count:
            raise ValueError(
                f"inlier_count {self.inlier_count} outside [0, {self.total_count}]"
            )
        if self.status is EstimateStatus.ZERO_VELOCITY and np.any(v != 0):
            raise ValueError("ZeroVelocity estimates must carry a zero velocity")
        if self.status in (EstimateStatus.ESTIMATED, EstimateStatus.ZERO_VELOCITY) and not np.all(
            np.isfinite(v)
        ):
            raise ValueError(f"{self.status} estimate has non-finite velocity")

    @property
    def is_valid(self) -> bool:
        """True for statuses that downstream consumers should use."""
        return self.status in (EstimateStatus.ESTIMATED, EstimateStatus.ZERO_VELOCITY)

    def __eq__(self, other):
        if not isinstance(other, VelocityEstimate):
            return NotImplemented
        return (
            self.timestamp == other.timestamp
            and np.array_equal(self.velocity, other.velocity, equal_nan=True)
            and self.status == other.status
            and self.inlier_count == other.inlier_count
            and self.total_count == other.total_count
            and (
                self.residual_rms == other.residual_rms
                or (math.isnan(self.residual_rms) and math.isnan(other.residual_rms))
            )
        )

    __hash__ = None


def unit_directions(positions) -> np.ndarray:
    """Row-normalize an (M, 3) array of positions."""
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    ranges = np.linalg.norm(positions, axis=1)
    if np.any(ranges < MIN_RANGE):
        bad = int(np.argmax(ranges < MIN_RANGE))
        raise ZeroRangeDetection(f"detection {bad} is closer than {MIN_RANGE} m to the sensor")
    return positions / ranges[:, None]


def direction_of(d) -> np.ndarray:
    """Unit line-of-sight vector of a detection (or a raw 3-vector position)."""
    pos = d.position if isinstance(d, Detection) else d
    p = np.asarray(pos, dtype=float).reshape(3)
    r = np.linalg.norm(p)
    if r < MIN_RANGE:
        raise ZeroRangeDetection(f"position {tuple(p)} has range below {MIN_RANGE} m")
    return p / r


def predict_doppler(u, v) -> float | np.ndarray:
    """Doppler that a static target along ``u`` shows for ego-velocity ``v``.

    ``u`` may be a single direction or an (M, 3) stack.
    """
    return -(np.asarray(u, dtype=float) @ np.asarray(v, dtype=float))


def residual(d: Detection, v) -> float:
    """Signed violation of the static-target Doppler constraint."""
    return d.doppler - float(predict_doppler(direction_of(d), v))


def scan_residuals(scan: RadarScan, v) -> np.ndarray:
    """Vectorized ``residual`` over every detection of a scan."""
    return scan.dopplers + scan.directions @ np.asarray(v, dtype=float)
