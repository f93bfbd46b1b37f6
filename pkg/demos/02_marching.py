"""Marching in time on a lower block-Toeplitz system.

A space-time Galerkin discretization couples step j only to earlier steps, so the
whole history is solved one step at a time with a single factorized diagonal block.
Here the marching result is checked against one dense solve of the full matrix.
"""
from __future__ import annotations

import numpy as np

from elastobem.mot_solver import dense_solve, mot_solve
from elastobem.pipeline import prepare
from elastobem.scenario_io import builtin_example

# Example 1 (square on a rigid foundation) cut down to 4 time steps.
sc = builtin_example(1).with_overrides(T=0.2, N=4)
mesh, bases, grid, op, problem, gap, timings = prepare(sc)
print(f"{mesh.n_elements} elements, {op.D} unknowns per step, {op.N} steps")
print(f"assembly {timings['assembly']:.1f} s")

F = np.random.default_rng(0).normal(size=(op.N, op.D))
march, dense = mot_solve(op, F).X, dense_solve(op, F).X
print("max relative difference:", np.abs(march - dense).max() / np.abs(dense).max())
