"""Symmetric and nonsymmetric boundary integral formulations side by side.

Both solve the same contact problem; the symmetric one couples the boundary
traction and displacement through all four boundary operators, the nonsymmetric
one through the single- and double-layer operators only. Their displacement
histories should agree better as the mesh is refined.
"""
from __future__ import annotations

from elastobem.contact import UzawaConfig
from elastobem.diagnostics import compare_formulations
from elastobem.scenario_io import builtin_example

for h in (0.2, 0.1):
    sc = builtin_example(1, "none").refined(h, h)
    sc = sc.with_overrides(uzawa=UzawaConfig(50.0, sc.uzawa.eps, sc.uzawa.max_iters))
    rep = compare_formulations(sc)
    print(f"h = dt = {h}: relative history difference {rep['relative_difference']:.4f}")
