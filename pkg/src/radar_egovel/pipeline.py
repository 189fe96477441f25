"""Per-scan orchestration: zero-velocity check, rejection, solve, filter."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteObjective, NonMonotonicTimestamp, NotEnoughDetections, RadarError
from .gating import (
    Decision,
    FilterConfig,
    FilterState,
    ZeroVelocityConfig,
    detect_zero_velocity,
    filter_step,
)
from .losses import LossSpec, snr_weights
from .optimize import SolverConfig, solve_linear_ls, solve_robust
from .rejection import RejectorConfig, run_rejector
from .types import EstimateStatus, RadarScan, VelocityEstimate

log = logging.getLogger(__name__)

MIN_DETECTIONS = 3


class DopplerSign(str, enum.Enum):
    AS_IS = "as_is"
    FLIPPED = "flipped"

    @property
    def factor(self) -> float:
        return -1.0 if self is DopplerSign.FLIPPED else 1.0


@dataclass(frozen=True)
class EstimatorConfig:
    rejector: RejectorConfig = field(default_factory=RejectorConfig)
    loss: LossSpec = field(default_factory=LossSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)
    zero_velocity: ZeroVelocityConfig = field(default_factory=ZeroVelocityConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    filter_enabled: bool = True
    doppler_sign: DopplerSign = DopplerSign.AS_IS

    def __post_init__(self):
        object.__setattr__(self, "doppler_sign", DopplerSign(self.doppler_sign))


class EgoVelocityEstimator:
    """Stateful estimator for a single radar stream.

    Keeps the feasibility-filter window and the last accepted velocity, which
    seeds the robust solve when no sampling hypothesis is available.
    """

    def __init__(self, config: EstimatorConfig | None = None):
        self.config = config or EstimatorConfig()
        self.reset()

    def reset(self):
        self.filter_state = FilterState()
        self.last_accepted = None

    def process_scan(self, scan: RadarScan) -> VelocityEstimate:
        cfg = self.config
        scan = scan.with_doppler_sign(cfg.doppler_sign.factor)
        t, n = scan.timestamp, len(scan)

        if detect_zero_velocity(scan, cfg.zero_velocity):
            a = np.abs(scan.dopplers)
            est = VelocityEstimate(
                t,
                np.zeros(3),
                EstimateStatus.ZERO_VELOCITY,
                inlier_count=int(np.count_nonzero(a < cfg.zero_velocity.doppler_threshold)),
                total_count=n,
                residual_rms=float(np.sqrt(np.mean(a * a))),
            )
            return self._gate(est)

        try:
            v, inliers, rms = self._estimate(scan)
        except NonFiniteObjective as exc:
            log.debug("scan at t=%s rejected: %s", t, exc)
            return VelocityEstimate(t, np.full(3, np.nan), EstimateStatus.REJECTED, 0, n)
        except RadarError as exc:
            log.debug("scan at t=%s degenerate: %s", t, exc)
            return VelocityEstimate(t, np.full(3, np.nan), EstimateStatus.DEGENERATE, 0, n)
        if not np.all(np.isfinite(v)):
            return VelocityEstimate(t, v, EstimateStatus.REJECTED, inliers, n, rms)
        return self._gate(VelocityEstimate(t, v, EstimateStatus.ESTIMATED, inliers, n, rms))

    def _estimate(self, scan: RadarScan):
        cfg = self.config
        n = len(scan)
        if n < MIN_DETECTIONS:
            raise NotEnoughDetections(f"{n} detections")
        weights = snr_weights(scan.snrs, cfg.loss)
        report = run_rejector(scan, cfg.rejector, initial=self.last_accepted)
        if report is None:
            mask = np.ones(n, dtype=bool)
            hypothesis = self.last_accepted
        else:
            mask = report.inlier_mask
            hypothesis = report.hypothesis

        if cfg.loss.is_quadratic:
            result = solve_linear_ls(scan, mask, weights)
        else:
            result = solve_robust(scan, mask, cfg.loss, cfg.solver, initial=hypothesis, weights=weights)
        return result.velocity, int(np.count_nonzero(mask)), result.residual_rms

    def _gate(self, est: VelocityEstimate) -> VelocityEstimate:
        cfg = self.config
        if not cfg.filter_enabled:
            self._accept(est)
            return est
        try:
            decision, self.filter_state = filter_step(self.filter_state, cfg.filter, est)
        except NonMonotonicTimestamp as exc:
            log.warning("%s", exc)
            decision = Decision.REJECT
        if decision is Decision.ACCEPT:
            self._accept(est)
            return est
        return VelocityEstimate(
            est.timestamp,
            est.velocity,
            EstimateStatus.REJECTED,
            est.inlier_count,
            est.total_count,
            est.residual_rms,
        )

    def _accept(self, est):
        self.last_accepted = np.array(est.velocity)


def process_scan(estimator: EgoVelocityEstimator, scan: RadarScan) -> VelocityEstimate:
    return estimator.process_scan(scan)


def process_sequence(config: EstimatorConfig, scans) -> list[VelocityEstimate]:
    """Run a fresh estimator over ``scans``; one estimate per scan, in order."""
    est = EgoVelocityEstimator(config)
    return [est.process_scan(s) for s in scans]
