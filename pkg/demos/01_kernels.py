"""Pointwise elastodynamic kernels in the plane and their wavefronts.

The displacement response at distance r switches on when the P front (speed c_P)
arrives, changes form when the S front (c_S) passes, and then decays slowly.
"""
from __future__ import annotations

import numpy as np

from elastobem.kernels import MaterialParams, fundamental_solution, time_integrated_kernel, wavefront_case

mat = MaterialParams(c_P=2.0, c_S=1.0)
x, y = (1.0, 0.0), (0.0, 0.0)  # r = 1: P front at t = 0.5, S front at t = 1.0

for t in (0.25, 0.75, 1.5, 10.0):
    G = fundamental_solution(mat, t, x, y)
    print(f"t = {t:5.2f}  fronts passed: {wavefront_case(mat, t, 1.0):6s}  G_xx = {G[0, 0]: .6e}  G_yy = {G[1, 1]: .6e}")

# The Galerkin system needs kernels already integrated against the time basis;
# these vanish at lags the P front has not reached yet.
dt = 0.1
for lag in range(3, 8):
    V = time_integrated_kernel("V", mat, lag, dt, x, y)
    print(f"lag {lag}: V block = {np.round(V, 8).tolist()}")
