"""
Anchor geometry and the position error bound
============================================

Bearings from the target to its anchors fully determine the ranging bound
``S`` up to the scale ``sigma_r``.  Here we compute ``S`` three ways and look
at the best and worst placements.
"""

import numpy as np

from netcrlb.geometry import (compute_d_internodal, compute_d_proposition1, compute_s_from_angles,
                              d_max, internodal_from_angles)
from netcrlb.errors import SingularGeometry

sigma_r = 20.0

# Four anchors on a cross: the most favourable placement for L = 4
cross = [0, np.pi / 2, np.pi, 3 * np.pi / 2]
print("cross:", compute_s_from_angles(cross, sigma_r))
print("lower bound sigma_r*sqrt(4/L):", sigma_r * np.sqrt(4 / 4))

# Same bound from the internodal angles, by two different summations
rng = np.random.default_rng(0)
theta = rng.uniform(0, 2 * np.pi, 6)
gaps = internodal_from_angles(theta)
print("\nrandom six-anchor geometry, gaps (deg):", np.round(np.degrees(gaps.gaps), 1))
print("D, pairwise sum   :", compute_d_internodal(gaps))
print("D, diagonal sums  :", compute_d_proposition1(gaps))
print("D, closed form    :", compute_s_from_angles(theta, sigma_r).d)
print("D never exceeds L^2/4 =", d_max(6))

# Anchors bunched on one line give no cross-range information at all
try:
    compute_s_from_angles([0.1, 0.1 + np.pi, 0.1], sigma_r)
except SingularGeometry as exc:
    print("\ncollinear anchors:", exc)
