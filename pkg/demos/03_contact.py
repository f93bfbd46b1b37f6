"""Frictional contact of an elastic square pressed onto a rigid foundation.

The contact multipliers (normal pressure and tangential friction traction on the
contact elements) are found by Uzawa iteration: each sweep solves the linear
elastodynamic problem and projects the multipliers back onto the friction cone.
The coarse grid h = dt = 0.1 keeps the run short.
"""
from __future__ import annotations

import numpy as np

from elastobem.contact import UzawaConfig, kkt_check
from elastobem.diagnostics import energy_history, trace_at_point
from elastobem.pipeline import run_scenario
from elastobem.scenario_io import builtin_example

for variant in ("none", "tresca", "coulomb"):
    sc = builtin_example(1, variant).refined(0.1, 0.1)
    sc = sc.with_overrides(uzawa=UzawaConfig(50.0, sc.uzawa.eps, sc.uzawa.max_iters))
    run = run_scenario(sc)
    E = energy_history(run.history, run.mesh, run.bases, run.grid)
    rep = kkt_check(run.problem, run.result, sc.friction, sc.uzawa)
    bottom = trace_at_point(run.history, run.mesh, run.bases, "b")
    print(f"{variant:8s} iterations {run.result.iterations:6d}  E(T) = {E.E[-1]:.5e}  "
          f"KKT ok {rep.ok}  bottom-midpoint u_x(T) = {bottom[-1, 0]: .3e}")
    print(f"         max normal pressure {run.multipliers.normal.max():.3e}, "
          f"max |friction| {np.abs(run.multipliers.tangential).max():.3e}")
