"""Command-line entry point: run, sweep and compare scenarios.

Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.
Errors are also reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (AssemblyError, ConfigError, ElastoBemError, GeometryError, NonConvergenceError,
                     ScenarioError, SingularPointError, SolverError)

NUMERIC_ERRORS = (NonConvergenceError, SolverError, SingularPointError, AssemblyError)
USAGE_ERRORS = (ConfigError, ScenarioError, GeometryError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunManifest:
    scenario_hash: str
    config: dict
    timings: dict = field(default_factory=dict)
    iterations: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    def write(self, out_dir) -> str:
        path = os.path.join(out_dir, "manifest.json")
        self.outputs = sorted(set(self.outputs) | {"manifest.json"})
        with open(path, "w") as fh:
            json.dump(self.__dict__, fh, indent=1, sort_keys=True)
        return path


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="elastobem", description="Space-time boundary elements for dynamic contact")
    sub = p.add_subparsers(dest="command")
    for name in ("run", "sweep", "compare"):
        s = sub.add_parser(name)
        s.add_argument("scenario", nargs="?", help="scenario file")
        s.add_argument("--builtin", type=int, choices=(1, 2, 3, 4))
        s.add_argument("--variant", choices=("none", "tresca", "coulomb"))
        s.add_argument("--formulation", choices=("sym", "nonsym"))
        s.add_argument("--out", default="out")
        s.add_argument("--threads", type=int, default=None)
        s.add_argument("--deterministic", action="store_true")
        s.add_argument("--h", type=float, default=None, help="override mesh size (dt scales with h)")
        if name == "sweep":
            s.add_argument("--levels", type=int, default=3)
    return p


def _scenario(args):
    from .scenario_io import builtin_example, load_scenario
    if (args.scenario is None) == (args.builtin is None):
        raise UsageError("give exactly one of a scenario file or --builtin N")
    if args.builtin is not None:
        sc = builtin_example(args.builtin, args.variant)
    else:
        if args.variant is not None:
            raise UsageError("--variant applies to --builtin scenarios only")
        sc = load_scenario(args.scenario)
    if args.formulation:
        sc = sc.with_overrides(formulation="symmetric" if args.formulation == "sym" else "nonsymmetric")
    if args.h is not None:
        if not args.h > 0:
            raise UsageError("--h must be positive")
        sc = sc.refined(args.h, args.h * (sc.T / sc.N) / sc.h)
    return sc


def _csv_name(name):
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def cmd_run(args) -> int:
    from .contact import write_trace_csv as write_uzawa_csv
    from .diagnostics import (deformation_snapshot, energy_history, snapshot_svg, trace_at_point,
                              write_multiplier_csv, write_trace_csv)
    from .expr import Expression
    from .pipeline import run_scenario

    sc = _scenario(args)
    os.makedirs(args.out, exist_ok=True)
    man = RunManifest(sc.digest(), sc.to_dict())
    _write(args.out, "scenario.json", sc.to_json() + "\n", man)
    run = run_scenario(sc)
    t0 = time.perf_counter()
    E = energy_history(run.history, run.mesh, run.bases, run.grid)
    E.write_csv(os.path.join(args.out, "energy.csv"))
    man.outputs.append("energy.csv")
    for name in sc.trace_points:
        pt = name
        if ":" in name:
            pt = tuple(float(v) for v in name.split(":"))
        series = trace_at_point(run.history, run.mesh, run.bases, pt)
        fn = f"trace_{_csv_name(name)}.csv"
        write_trace_csv(run.grid.nodes, series, os.path.join(args.out, fn))
        man.outputs.append(fn)
    if run.bases.n_lam:
        write_multiplier_csv(run, os.path.join(args.out, "multipliers.csv"))
        write_uzawa_csv(run.result.trace, os.path.join(args.out, "uzawa_trace.csv"))
        man.outputs += ["multipliers.csv", "uzawa_trace.csv"]
    for k, ts in enumerate(sc.snapshot_times):
        step = int(round(ts / run.grid.dt))
        step = min(max(step, 0), run.grid.N)
        polys = deformation_snapshot(run.history, run.mesh, run.bases, step, sc.magnification)
        obstacle = None
        if sc.mesh.type == "circle" and "y" in sc.gap:
            # flat obstacle height: gap expression evaluated with y = 0 and |n_y| = 1
            obstacle = float(Expression(sc.gap)(t=run.grid.t(step), x=0.0, y=0.0, nx=0.0, ny=-1.0))
        fn = f"snapshot_{k:02d}.svg"
        snapshot_svg(run.mesh, polys, os.path.join(args.out, fn), obstacle)
        man.outputs.append(fn)
    run.timings["post"] = time.perf_counter() - t0
    man.timings = {k: round(v, 6) if not args.deterministic else None for k, v in run.timings.items()}
    man.iterations = {"uzawa": run.result.iterations}
    man.write(args.out)
    print(json.dumps({"status": "ok", "energy_T": float(E.E[-1]), "uzawa_iterations": run.result.iterations,
                      "out": args.out}))
    return 0


def _write(out, name, text, man):
    with open(os.path.join(out, name), "w") as fh:
        fh.write(text)
    man.outputs.append(name)


def cmd_sweep(args) -> int:
    from .diagnostics import convergence_sweep
    if args.levels < 3:
        raise UsageError("--levels must be >= 3")
    sc = _scenario(args)
    os.makedirs(args.out, exist_ok=True)
    man = RunManifest(sc.digest(), sc.to_dict())
    hs = [sc.h * 2.0 ** (1 - i) for i in range(args.levels)]
    iters = {}

    def on_level(lvl, run, E):
        iters[f"h={lvl.h:.6g}"] = run.result.iterations

    tab = convergence_sweep(sc, hs, on_level=on_level)
    tab.write_csv(os.path.join(args.out, "sweep.csv"))
    man.outputs.append("sweep.csv")
    man.iterations = iters
    man.write(args.out)
    slope = None if not np.isfinite(tab.slope) else tab.slope
    print(json.dumps({"status": "ok", "h": list(map(float, tab.h)), "err2": list(map(float, tab.err2)),
                      "slope": slope, "slope_defined": slope is not None,
                      "monotone": tab.monotone}))
    return 0


def cmd_compare(args) -> int:
    from .diagnostics import compare_formulations
    sc = _scenario(args)
    os.makedirs(args.out, exist_ok=True)
    man = RunManifest(sc.digest(), sc.to_dict())
    rep = compare_formulations(sc)
    d = {"relative_difference": rep["relative_difference"],
         "iterations_symmetric": rep["symmetric"].result.iterations,
         "iterations_nonsymmetric": rep["nonsymmetric"].result.iterations}
    _write(args.out, "compare.json", json.dumps(d, indent=1, sort_keys=True) + "\n", man)
    man.write(args.out)
    print(json.dumps({"status": "ok", **d}))
    return 0


def _fail(code: int, kind: str, exc: Exception) -> int:
    payload = {"status": "error", "exit_code": code, "type": kind, "message": str(exc)}
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: run, sweep or compare")
        threads = 1 if args.deterministic else args.threads
        if threads is not None and threads < 1:
            raise UsageError("--threads must be >= 1")
        handler = {"run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare}[args.command]
        if threads is not None:
            from threadpoolctl import threadpool_limits
            with threadpool_limits(limits=threads):
                return handler(args)
        return handler(args)
    except UsageError as exc:
        return _fail(2, "usage", exc)
    except USAGE_ERRORS as exc:
        return _fail(2, type(exc).__name__, exc)
    except NUMERIC_ERRORS as exc:
        return _fail(1, type(exc).__name__, exc)
    except ElastoBemError as exc:
        return _fail(1, type(exc).__name__, exc)
    except OSError as exc:
        return _fail(2, "io", exc)


if __name__ == "__main__":
    sys.exit(main())
