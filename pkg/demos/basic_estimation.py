"""
Ego-velocity from a single radar scan
=====================================

A radar sees static targets move past it with radial speed equal to minus the
projection of its own velocity on the line of sight. Three non-coplanar
targets pin the velocity down; more of them average out noise.
"""

import numpy as np

from radar_egovel import EgoVelocityEstimator, solve_linear_ls
from radar_egovel.synth import SceneSpec, generate_scan

# a scan with 60 static targets and 15 moving ones, 5 cm/s Doppler noise
v_true = np.array([8.0, 0.5, -0.2])
spec = SceneSpec(n_static=60, n_dynamic=15, ego_velocity=tuple(v_true), doppler_noise_sigma=0.05, seed=1)
scan, is_static = generate_scan(spec)
print(f"{len(scan)} detections, {is_static.sum()} static")

# plain least squares over every detection is pulled off by the movers
ls = solve_linear_ls(scan).velocity
print("LS, all points      ", np.round(ls, 3), " error", np.round(np.linalg.norm(ls - v_true), 3))

# least squares over the static ones only is what we are after
ls_static = solve_linear_ls(scan, is_static).velocity
print("LS, static oracle   ", np.round(ls_static, 3))

# the default estimator: 3-point RANSAC picks the inliers, then LS refits
est = EgoVelocityEstimator().process_scan(scan)
print("RANSAC + LS         ", np.round(est.velocity, 3), est.status.value, f"{est.inlier_count}/{est.total_count} inliers")
