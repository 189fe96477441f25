import numpy as np
import pytest

from radar_egovel import RadarScan


def scan_from(directions, v, timestamp=0.0, ranges=None, offsets=None, snrs=None):
    """Noise-free scan of static targets along ``directions`` for ego-velocity ``v``."""
    u = np.asarray(directions, dtype=float)
    u = u / np.linalg.norm(u, axis=1)[:, None]
    r = np.full(len(u), 10.0) if ranges is None else np.asarray(ranges, dtype=float)
    dop = -(u @ np.asarray(v, dtype=float))
    if offsets is not None:
        dop = dop + np.asarray(offsets, dtype=float)
    return RadarScan.from_arrays(timestamp, u * r[:, None], dop, snrs)


def random_directions(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


WILD = (150, 400, 650)


def wild_stream(n_scans=789, rate=10.0, noise=0.05, seed=7):
    """Smooth trajectory at ``rate`` Hz with three scans whose static field is offset by 10 m/s."""
    from radar_egovel.synth import SceneSpec, generate_trajectory_stream, sinusoidal_profile

    profile = sinusoidal_profile((5.0, 0.5, 0.0), (2.0, 1.0, 0.2), 0.05)
    spec = SceneSpec(n_static=60, n_dynamic=10, doppler_noise_sigma=noise, seed=seed)
    return generate_trajectory_stream(profile, rate, n_scans / rate, spec, wild_indices=WILD)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
