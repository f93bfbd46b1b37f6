"""Energy convergence under uniform refinement.

Each level halves h and dt together. The error measure is the relative difference
of the final energy to the finest level; the fitted log-log slope estimates the
convergence rate. The levels here are coarse so the script finishes in about a minute.
"""
from __future__ import annotations

from elastobem.diagnostics import convergence_sweep
from elastobem.scenario_io import builtin_example

sc = builtin_example(2)  # concrete block on a rigid foundation, Coulomb friction
tab = convergence_sweep(sc, [0.5, 0.25, 0.125],
                        on_level=lambda lvl, run, E: print(f"h = {lvl.h:<6g} N = {lvl.N:3d}  E(T) = {E.E[-1]:.6e}"))
for h, e in zip(tab.h, tab.err2):
    print(f"h = {h:<6g} relative energy error {e:.3e}")
print(f"fitted slope {tab.slope:.3f}")
