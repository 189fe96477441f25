"""Synthetic scans with known ego-velocity, used as a test oracle.

Static detections obey ``doppler = -u . v_ego + noise`` exactly. Dynamic
detections add the target's own radial velocity; ghost detections add a
fixed Doppler bias.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np

from .types import Detection, RadarScan


@dataclass(frozen=True)
class SceneSpec:
    """Scene parameters.

    ``cone_half_angle`` (radians) restricts directions to a cone around +x;
    ``None`` samples the full sphere. When ``dynamic_offset_interval`` is set,
    dynamic detections get a radial offset with magnitude drawn uniformly from
    that interval and a random sign, instead of a random world velocity of
    magnitude up to ``dynamic_velocity_range``.
    """

    n_static: int = 50
    n_dynamic: int = 0
    ego_velocity: tuple = (1.0, 0.0, 0.0)
    dynamic_velocity_range: float = 5.0
    doppler_noise_sigma: float = 0.0
    cone_half_angle: float | None = None
    range_interval: tuple = (1.0, 50.0)
    snr_interval: tuple = (5.0, 30.0)
    seed: int = 0
    n_ghost: int = 0
    ghost_bias: float = 2.0
    dynamic_offset_interval: tuple | None = None
    shuffle: bool = True

    def __post_init__(self):
        if min(self.n_static, self.n_dynamic, self.n_ghost) < 0:
            raise ValueError("detection counts must be nonnegative")
        if self.doppler_noise_sigma < 0:
            raise ValueError("doppler_noise_sigma must be nonnegative")
        lo, hi = self.range_interval
        if not 0 < lo <= hi:
            raise ValueError(f"invalid range interval {self.range_interval}")
        object.__setattr__(self, "ego_velocity", tuple(float(x) for x in self.ego_velocity))


def sample_directions(rng: np.random.Generator, n: int, cone_half_angle=None) -> np.ndarray:
    """Uniform unit vectors on the sphere, or on a cap around +x."""
    if cone_half_angle is None:
        v = rng.standard_normal((n, 3))
        norms = np.linalg.norm(v, axis=1)
        # a zero draw is practically impossible; redraw to be safe
        while np.any(norms < 1e-12):
            bad = norms < 1e-12
            v[bad] = rng.standard_normal((int(bad.sum()), 3))
            norms = np.linalg.norm(v, axis=1)
        return v / norms[:, None]
    cos_min = np.cos(cone_half_angle)
    cos_t = rng.uniform(cos_min, 1.0, n)
    phi = rng.uniform(0.0, 2 * np.pi, n)
    sin_t = np.sqrt(1 - cos_t**2)
    return np.column_stack([cos_t, sin_t * np.cos(phi), sin_t * np.sin(phi)])


def generate_scan(spec: SceneSpec, timestamp: float = 0.0, rng: np.random.Generator | None = None):
    """Return ``(scan, labels)``; labels are True for static detections.

    With ``rng=None`` a generator seeded from ``spec.seed`` is used, so the
    same spec always yields the same scan.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    v_ego = np.asarray(spec.ego_velocity, dtype=float)
    ns, nd, ng = spec.n_static, spec.n_dynamic, spec.n_ghost
    n = ns + nd + ng
    u = sample_directions(rng, n, spec.cone_half_angle)
    ranges = rng.uniform(*spec.range_interval, n)
    snr = rng.uniform(*spec.snr_interval, n)
    doppler = -(u @ v_ego)

    dyn = slice(ns, ns + nd)
    if nd:
        if spec.dynamic_offset_interval is not None:
            mag = rng.uniform(*spec.dynamic_offset_interval, nd)
            sign = rng.choice([-1.0, 1.0], nd)
            doppler[dyn] += sign * mag
        else:
            # target moving with world velocity vt: doppler = -u . (v_ego - vt)
            vt = sample_directions(rng, nd) * rng.uniform(0, spec.dynamic_velocity_range, nd)[:, None]
            doppler[dyn] += np.einsum("ij,ij->i", u[dyn], vt)
    if ng:
        doppler[ns + nd:] += spec.ghost_bias
    if spec.doppler_noise_sigma > 0:
        doppler += rng.normal(0.0, spec.doppler_noise_sigma, n)

    labels = np.zeros(n, dtype=bool)
    labels[:ns] = True
    order = rng.permutation(n) if spec.shuffle else np.arange(n)
    pos = u * ranges[:, None]
    dets = tuple(
        Detection(tuple(pos[i]), doppler[i], snr[i]) for i in order
    )
    return RadarScan(timestamp, dets), labels[order]


def constant_profile(v) -> Callable[[float], np.ndarray]:
    v = np.asarray(v, dtype=float)
    return lambda t: v.copy()


def sinusoidal_profile(mean, amplitude, frequency, phase=0.0) -> Callable[[float], np.ndarray]:
    """``mean + amplitude * sin(2 pi f t + phase)`` per axis."""
    mean = np.asarray(mean, dtype=float)
    amplitude = np.asarray(amplitude, dtype=float)
    return lambda t: mean + amplitude * np.sin(2 * np.pi * frequency * t + phase)


def generate_trajectory_stream(
    profile: Callable[[float], np.ndarray],
    rate: float,
    duration: float,
    spec: SceneSpec = SceneSpec(),
    wild_indices: Iterable[int] = (),
    wild_offset=(10.0, 0.0, 0.0),
    t0: float = 0.0,
):
    """One scan per tick at ``rate`` Hz over ``duration`` seconds.

    Returns a list of ``(scan, true_velocity)``. At ``wild_indices`` the static
    field is generated for ``v_true + wild_offset`` so that any estimator
    trusting the static assumption outputs a wild velocity. Tick ``i`` uses
    the generator seeded with ``(spec.seed, i)``.
    """
    n = int(round(rate * duration))
    wild = set(int(i) for i in wild_indices)
    wild_offset = np.asarray(wild_offset, dtype=float)
    out = []
    for i in range(n):
        t = t0 + i / rate
        v = np.asarray(profile(t), dtype=float)
        v_scene = v + wild_offset if i in wild else v
        s = replace(spec, ego_velocity=tuple(v_scene))
        scan, _ = generate_scan(s, t, np.random.default_rng([spec.seed, i]))
        out.append((scan, v))
    return out
