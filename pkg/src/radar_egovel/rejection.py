"""Static-target inlier selection: RANSAC, MLESAC and GNC-TLS.

All methods work on the residual ``r_i = doppler_i + u_i . v``. The sampling
methods draw 3 distinct indices per iteration from a generator seeded with
``RejectorConfig.seed`` so results depend only on (scan, config).
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSample, NoValidHypothesis, NotEnoughDetections, RankDeficient
from .optimize import weighted_lstsq
from .types import Detection, RadarScan, direction_of

log = logging.getLogger(__name__)

#: GNC is slow and unreliable beyond this many observations.
GNC_RECOMMENDED_MAX = 100


class RejectionMethod(str, enum.Enum):
    RANSAC = "ransac"
    MLESAC = "mlesac"
    GNC = "gnc"
    NONE = "none"


@dataclass(frozen=True)
class RejectorConfig:
    """Outlier rejection settings.

    ``gnc_mu_init=None`` derives the start of the GNC schedule from the largest
    initial residual.
    """

    method: RejectionMethod = RejectionMethod.RANSAC
    inlier_threshold: float = 0.15
    max_iterations: int = 200
    confidence: float = 0.99
    seed: int = 0
    mlesac_sigma: float = 0.05
    mlesac_outlier_span: float = 20.0
    mlesac_em_steps: int = 5
    gnc_mu_init: float | None = None
    gnc_mu_divisor: float = 1.4
    gnc_max_outer: int = 100
    min_coplanarity: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "method", RejectionMethod(self.method))
        positive = dict(
            inlier_threshold=self.inlier_threshold,
            mlesac_sigma=self.mlesac_sigma,
            mlesac_outlier_span=self.mlesac_outlier_span,
            min_coplanarity=self.min_coplanarity,
        )
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if not 0 < self.confidence < 1:
            raise ValueError(f"confidence must lie in (0, 1), got {self.confidence}")
        if self.max_iterations < 1 or self.gnc_max_outer < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.mlesac_em_steps < 0:
            raise ValueError("mlesac_em_steps must be >= 0")
        if not self.gnc_mu_divisor > 1:
            raise ValueError("gnc_mu_divisor must exceed 1")
        if self.gnc_mu_init is not None and not self.gnc_mu_init > 1:
            raise ValueError("gnc_mu_init must exceed 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class InlierReport:
    """Outcome of a rejector.

    ``score`` is the inlier count (RANSAC), the negative log-likelihood
    (MLESAC) or the final truncated-quadratic cost (GNC).
    """

    inlier_mask: np.ndarray
    hypothesis: np.ndarray
    score: float
    iterations_used: int
    converged: bool = True
    above_recommended_size: bool = False
    degenerate: bool = False

    @property
    def inlier_count(self) -> int:
        return int(np.count_nonzero(self.inlier_mask))


def _solve_triple(U3, d3, min_coplanarity):
    det = np.linalg.det(U3)
    if abs(det) < min_coplanarity:
        raise DegenerateSample(f"|det| = {abs(det):.3g} below {min_coplanarity}")
    return np.linalg.solve(U3, -d3)


def solve_three_point(d1: Detection, d2: Detection, d3: Detection, min_coplanarity: float = 1e-3):
    """Exact velocity from three detections with non-coplanar directions."""
    U = np.array([direction_of(d) for d in (d1, d2, d3)])
    dop = np.array([d1.doppler, d2.doppler, d3.doppler])
    return _solve_triple(U, dop, min_coplanarity)


def _required_iterations(inlier_ratio, confidence, cap):
    if inlier_ratio >= 1.0:
        return 1
    good = inlier_ratio**3
    if good <= 0:
        return cap
    n = math.log(1 - confidence) / math.log1p(-good)
    return min(cap, max(1, math.ceil(n)))


def _check_size(scan):
    if len(scan) < 3:
        raise NotEnoughDetections(f"scan has {len(scan)} detections, need at least 3")


def _sample_consensus(scan, cfg, score_fn):
    """Shared sampling loop. ``score_fn(r) -> (score, inlier_ratio, extra)``; lower is better."""
    U, dop = scan.directions, scan.dopplers
    n = len(scan)
    rng = np.random.default_rng(int(cfg.seed))
    best = None
    needed = cfg.max_iterations
    it = 0
    while it < needed:
        idx = rng.choice(n, size=3, replace=False)
        it += 1
        try:
            v = _solve_triple(U[idx], dop[idx], cfg.min_coplanarity)
        except DegenerateSample:
            continue
        r = dop + U @ v
        score, ratio, extra = score_fn(r)
        # strict improvement keeps the earliest hypothesis on ties
        if best is None or score < best[0]:
            best = (score, v, r, extra)
            needed = _required_iterations(ratio, cfg.confidence, cfg.max_iterations)
    return best, it


def _degenerate_fallback(scan, cfg, iterations):
    """All samples degenerate: accept a minimum-norm solution only if it explains every detection."""
    U, dop = scan.directions, scan.dopplers
    v, *_ = np.linalg.lstsq(U, -dop, rcond=None)
    r = dop + U @ v
    if np.all(np.isfinite(v)) and np.all(np.abs(r) < cfg.inlier_threshold):
        return v, r
    raise NoValidHypothesis(f"all {iterations} minimal samples were degenerate")


def run_ransac(scan: RadarScan, cfg: RejectorConfig = RejectorConfig()) -> InlierReport:
    """3-point RANSAC scored by inlier count."""
    _check_size(scan)
    n = len(scan)
    thr = cfg.inlier_threshold

    def score_fn(r):
        count = int(np.count_nonzero(np.abs(r) < thr))
        return -count, count / n, None

    best, iterations = _sample_consensus(scan, cfg, score_fn)
    if best is None:
        v, r = _degenerate_fallback(scan, cfg, iterations)
        mask = np.abs(r) < thr
        return InlierReport(mask, v, float(mask.sum()), iterations, degenerate=True)
    _, v, r, _ = best
    mask = np.abs(r) < thr
    return InlierReport(mask, v, float(np.count_nonzero(mask)), iterations)


def _mlesac_fit(r, sigma, span, em_steps):
    """EM over the inlier fraction; returns (nll, gamma, inlier posterior)."""
    norm = 1.0 / (sigma * math.sqrt(2 * math.pi))
    p_in = norm * np.exp(-0.5 * (r / sigma) ** 2)
    p_out = 1.0 / span
    gamma = 0.5
    for _ in range(em_steps):
        a = gamma * p_in
        z = a / (a + (1 - gamma) * p_out)
        gamma = float(np.mean(z))
    a = gamma * p_in
    mix = a + (1 - gamma) * p_out
    nll = float(-np.sum(np.log(mix)))
    return nll, gamma, a / mix


def run_mlesac(scan: RadarScan, cfg: RejectorConfig = RejectorConfig()) -> InlierReport:
    """3-point sampling scored by the Gaussian-uniform mixture likelihood."""
    _check_size(scan)
    sigma, span, steps = cfg.mlesac_sigma, cfg.mlesac_outlier_span, cfg.mlesac_em_steps

    def score_fn(r):
        nll, gamma, post = _mlesac_fit(r, sigma, span, steps)
        return nll, gamma, post

    best, iterations = _sample_consensus(scan, cfg, score_fn)
    if best is None:
        v, r = _degenerate_fallback(scan, cfg, iterations)
        nll, _, post = _mlesac_fit(r, sigma, span, steps)
        return InlierReport(post > 0.5, v, nll, iterations, degenerate=True)
    nll, v, _, post = best
    return InlierReport(post > 0.5, v, nll, iterations)


def _tls_weights(r, cbar, mu):
    """Closed-form GNC-TLS weights for surrogate parameter ``mu >= 1``.

    ``mu`` is ``(m + 1) / m`` for the usual GNC-TLS parameter ``m``; it
    decreases toward 1 where the surrogate becomes the truncated quadratic.
    Residuals with ``r^2 <= cbar^2 / mu`` get weight 1, those with
    ``r^2 >= mu cbar^2`` get 0, and the band in between interpolates.
    """
    r2 = r * r
    c2 = cbar * cbar
    w = np.zeros_like(r)
    inner = r2 <= c2 / mu
    w[inner] = 1.0
    if mu > 1:
        band = ~inner & (r2 < mu * c2)
        w[band] = (cbar * math.sqrt(mu) / np.abs(r[band]) - 1.0) / (mu - 1.0)
    return w


def _tls_cost(r, cbar):
    return float(np.sum(np.minimum(r * r, cbar * cbar)))


def run_gnc(scan: RadarScan, cfg: RejectorConfig = RejectorConfig(), initial=None) -> InlierReport:
    """Graduated non-convexity with the truncated-least-squares surrogate.

    Alternates a weighted linear solve with the closed-form weight update
    while the surrogate parameter shrinks by ``gnc_mu_divisor`` per round.
    ``initial=None`` starts from least squares over every detection.
    """
    _check_size(scan)
    U, dop = scan.directions, scan.dopplers
    n = len(scan)
    oversize = n > GNC_RECOMMENDED_MAX
    if oversize:
        log.warning("GNC on %d detections; above the recommended %d", n, GNC_RECOMMENDED_MAX)
    cbar = cfg.inlier_threshold

    if initial is None:
        v = weighted_lstsq(U, dop, np.ones(n))
    else:
        v = np.asarray(initial, dtype=float).reshape(3)
    r = dop + U @ v
    if cfg.gnc_mu_init is not None:
        mu = float(cfg.gnc_mu_init)
    else:
        mu = max(1.0, 2.0 * float(np.max(r * r)) / (cbar * cbar))
    w = _tls_weights(r, cbar, mu)

    converged = False
    rounds = 0
    prev_mask = None
    for rounds in range(1, cfg.gnc_max_outer + 1):
        try:
            v = weighted_lstsq(U, dop, w)
        except RankDeficient:
            break
        r = dop + U @ v
        w = _tls_weights(r, cbar, mu)
        mask = w > 0.5
        if mu <= 1.0:
            if prev_mask is not None and np.array_equal(mask, prev_mask):
                converged = True
                break
            prev_mask = mask
        mu = max(1.0, mu / cfg.gnc_mu_divisor)

    mask = w > 0.5
    if mask.sum() >= 3:
        try:
            v = weighted_lstsq(U, dop, w)
            r = dop + U @ v
        except RankDeficient:
            pass
    if not converged:
        log.warning("GNC stopped after %d rounds without settling", rounds)
    return InlierReport(
        inlier_mask=mask,
        hypothesis=v,
        score=_tls_cost(r, cbar),
        iterations_used=rounds,
        converged=converged,
        above_recommended_size=oversize,
    )


def run_rejector(scan: RadarScan, cfg: RejectorConfig, initial=None) -> InlierReport | None:
    """Dispatch on ``cfg.method``; ``None`` for the pass-through method."""
    method = cfg.method
    if method is RejectionMethod.RANSAC:
        return run_ransac(scan, cfg)
    if method is RejectionMethod.MLESAC:
        return run_mlesac(scan, cfg)
    if method is RejectionMethod.GNC:
        return run_gnc(scan, cfg, initial)
    return None
