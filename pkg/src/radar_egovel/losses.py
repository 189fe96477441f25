"""Per-residual robust loss kernels and their analytic derivatives.

Every kernel ``rho`` satisfies ``rho(0) = 0``, is even, and is nondecreasing
in ``|x|``. All functions broadcast over numpy arrays.

The general (Barron) kernel is

    rho(x; alpha, c) = |alpha - 2| / alpha * (((x/c)^2 / |alpha - 2| + 1)^(alpha/2) - 1)

with removable singularities at alpha = 2 (quadratic), alpha = 0 (log) and
alpha = -inf (Welsch). Named members of the family:

    alpha = 2     L2
    alpha = 1     L1-L2 / Charbonnier
    alpha = 0     Cauchy / Lorentzian
    alpha = -2    Geman-McClure
    alpha = -inf  Welsch / Leclerc

The standalone Cauchy kernel uses ``(c^2 / 2) log(1 + (x/c)^2)`` so that its
scale ``c`` marks the same knee as the Huber kernel. It relates to the
general kernel by ``cauchy(x, c) = (c^2 / 2) * barron(x, alpha=0, c / sqrt(2))``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidLossSpec


class LossKind(str, enum.Enum):
    L2 = "l2"
    TRUNCATED_L2 = "truncated_l2"
    HUBER = "huber"
    CAUCHY = "cauchy"
    BARRON = "barron"


DEFAULT_SCALE = {
    LossKind.L2: 1.0,
    LossKind.TRUNCATED_L2: 1.0,
    LossKind.HUBER: 0.1,
    LossKind.CAUCHY: 0.2,
    LossKind.BARRON: 0.2,
}

DEFAULT_TRUNCATION = 0.3

# name -> constructor kwargs
ALIASES = {
    "l2": dict(kind=LossKind.L2),
    "ls": dict(kind=LossKind.L2),
    "wls": dict(kind=LossKind.L2, snr_weighting=True),
    "truncated_l2": dict(kind=LossKind.TRUNCATED_L2),
    "tls": dict(kind=LossKind.TRUNCATED_L2),
    "wtls": dict(kind=LossKind.TRUNCATED_L2, snr_weighting=True),
    "huber": dict(kind=LossKind.HUBER),
    "cauchy": dict(kind=LossKind.CAUCHY),
    "barron": dict(kind=LossKind.BARRON),
    "general": dict(kind=LossKind.BARRON),
    "l1_l2": dict(kind=LossKind.BARRON, alpha=1.0),
    "charbonnier": dict(kind=LossKind.BARRON, alpha=1.0),
    "geman_mcclure": dict(kind=LossKind.BARRON, alpha=-2.0),
    "welsch": dict(kind=LossKind.BARRON, alpha=-math.inf),
    "leclerc": dict(kind=LossKind.BARRON, alpha=-math.inf),
}


@dataclass(frozen=True)
class LossSpec:
    """Selects a kernel and its parameters.

    ``c`` defaults per kernel (Huber 0.1, Cauchy 0.2, Barron 0.2 m/s).
    ``truncation`` only affects the truncated quadratic, ``alpha`` only the
    general kernel. ``snr_weighting`` turns L2 into WLS and the truncated
    quadratic into WTLS.
    """

    kind: LossKind = LossKind.L2
    c: float | None = None
    alpha: float = 1.0
    truncation: float = DEFAULT_TRUNCATION
    snr_weighting: bool = False

    def __post_init__(self):
        try:
            kind = LossKind(self.kind)
        except ValueError:
            raise InvalidLossSpec(f"unknown loss kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        c = DEFAULT_SCALE[kind] if self.c is None else float(self.c)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "truncation", float(self.truncation))
        if not (math.isfinite(c) and c > 0):
            raise InvalidLossSpec(f"scale c must be positive and finite, got {c}")
        if not (math.isfinite(self.truncation) and self.truncation > 0):
            raise InvalidLossSpec(f"truncation must be positive, got {self.truncation}")
        if math.isnan(self.alpha):
            raise InvalidLossSpec("alpha must not be NaN")

    @classmethod
    def from_name(cls, name: str, **overrides) -> "LossSpec":
        key = name.strip().lower().replace("-", "_")
        if key not in ALIASES:
            raise InvalidLossSpec(f"unknown loss name {name!r}; expected one of {sorted(ALIASES)}")
        kwargs = dict(ALIASES[key])
        kwargs.update(overrides)
        return cls(**kwargs)

    @property
    def is_quadratic(self) -> bool:
        """True when the loss is plain (weighted) least squares."""
        return self.kind is LossKind.L2

    def rho(self, x):
        return evaluate(self, x)

    def grad(self, x):
        return evaluate_grad(self, x)


def _barron(x, alpha, c):
    s = (x / c) ** 2
    if alpha == 2:
        return 0.5 * s
    if alpha == 0:
        return np.log1p(0.5 * s)
    if alpha == -math.inf:
        return -np.expm1(-0.5 * s)
    if alpha == math.inf:
        return np.expm1(0.5 * s)
    b = abs(alpha - 2)
    return (b / alpha) * np.expm1(0.5 * alpha * np.log1p(s / b))


def _barron_grad(x, alpha, c):
    s = (x / c) ** 2
    xc = x / (c * c)
    if alpha == 2:
        return xc
    if alpha == 0:
        return xc / (0.5 * s + 1)
    if alpha == -math.inf:
        return xc * np.exp(-0.5 * s)
    if alpha == math.inf:
        return xc * np.exp(0.5 * s)
    b = abs(alpha - 2)
    return xc * np.exp((0.5 * alpha - 1) * np.log1p(s / b))


def _rho(spec: LossSpec, x):
    kind = spec.kind
    if kind is LossKind.L2:
        return 0.5 * x * x
    if kind is LossKind.TRUNCATED_L2:
        t = spec.truncation
        return 0.5 * np.minimum(x * x, t * t)
    if kind is LossKind.HUBER:
        c = spec.c
        ax = np.abs(x)
        return np.where(ax <= c, 0.5 * x * x, c * (ax - 0.5 * c))
    if kind is LossKind.CAUCHY:
        c = spec.c
        return 0.5 * c * c * np.log1p((x / c) ** 2)
    return _barron(x, spec.alpha, spec.c)


def _drho(spec: LossSpec, x):
    kind = spec.kind
    if kind is LossKind.L2:
        return x
    if kind is LossKind.TRUNCATED_L2:
        # zero on the plateau and at its boundary
        return np.where(np.abs(x) < spec.truncation, x, 0.0)
    if kind is LossKind.HUBER:
        return np.clip(x, -spec.c, spec.c)
    if kind is LossKind.CAUCHY:
        c = spec.c
        return x / (1 + (x / c) ** 2)
    return _barron_grad(x, spec.alpha, spec.c)


def _check(spec):
    if not isinstance(spec, LossSpec):
        raise InvalidLossSpec(f"expected LossSpec, got {type(spec).__name__}")


def evaluate(spec: LossSpec, x, w=1.0):
    """Weighted loss ``w * rho(x)``; scalar in, scalar out."""
    _check(spec)
    x = np.asarray(x, dtype=float)
    out = np.asarray(w, dtype=float) * _rho(spec, x)
    return float(out) if out.ndim == 0 else out


def evaluate_grad(spec: LossSpec, x, w=1.0):
    """Derivative of ``evaluate`` with respect to the residual ``x``."""
    _check(spec)
    x = np.asarray(x, dtype=float)
    out = np.asarray(w, dtype=float) * _drho(spec, x)
    return float(out) if out.ndim == 0 else out


def snr_weights(snrs, spec: LossSpec) -> np.ndarray:
    """Per-detection weights: SNR over the scan maximum, or all ones.

    A scan whose SNRs are all zero falls back to uniform weights.
    """
    snrs = np.asarray(snrs, dtype=float)
    if not spec.snr_weighting or snrs.size == 0:
        return np.ones_like(snrs)
    top = snrs.max()
    if top <= 0:
        return np.ones_like(snrs)
    return snrs / top


def weight_of(d, spec: LossSpec, max_snr: float) -> float:
    """Weight of a single detection given its scan's maximum SNR."""
    if not spec.snr_weighting or max_snr <= 0:
        return 1.0
    return d.snr / max_snr
