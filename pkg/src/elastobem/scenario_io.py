"""Scenario files and the built-in example setups.

Format (version 1): `[section]` headers followed by `key = value` lines; `#`
starts a comment. Sections: problem, mesh, material, material2 (bilateral),
time, load, gap, friction, uzawa, output.

    [problem]   kind = unilateral|bilateral, formulation = symmetric|nonsymmetric,
                psi_basis = linear|constant
    [mesh]      type = square|circle; square: half_side, n_per_side,
                parts = b:contact, r:neumann, ...; circle: center = x, y, radius,
                n_elements, contact_filter = <expr in x, y, nx, ny>, other_part
    [material]  c_P, c_S, rho
    [time]      T, N
    [load]      <side or part>.<x|y> = <expr in t, x, y>
    [gap]       g = <expr in t, x, y, nx, ny>
    [friction]  law = none|tresca|coulomb, F (Tresca), F_c (Coulomb), coulomb_timing
    [uzawa]     rho, eps, max_iters, rho_t (optional tangential step)
    [output]    trace_points = side names or x:y pairs, snapshot_times, magnification
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .contact import FrictionLaw, UzawaConfig
from .errors import ConfigError, ElastoBemError, ScenarioError
from .expr import Expression
from .kernels import MaterialParams
from .mesh import BoundaryMesh, Part, build_circle_mesh, build_square_mesh
from .timebasis import TimeGrid

FORMAT_VERSION = 1
SECTIONS = ("problem", "mesh", "material", "material2", "time", "load", "gap", "friction",
            "uzawa", "output")
REQUIRED = ("problem", "mesh", "material", "time")


@dataclass(frozen=True)
class MeshSpec:
    type: str = "square"
    half_side: float = 0.5
    n_per_side: int = 10
    parts: tuple = (("b", "neumann"), ("r", "neumann"), ("t", "neumann"), ("l", "neumann"))
    center: tuple = (0.0, 0.0)
    radius: float = 1.0
    n_elements: int = 80
    contact_filter: str = "1"
    other_part: str = "neumann"

    def build(self) -> BoundaryMesh:
        if self.type == "square":
            return build_square_mesh(self.half_side, self.n_per_side, dict(self.parts))
        if self.type == "circle":
            base = build_circle_mesh(self.center, self.radius, self.n_elements, Part.CONTACT)
            mid = base.midpoints()
            keep = Expression(self.contact_filter)(x=mid[:, 0], y=mid[:, 1], nx=base.normal[:, 0],
                                                    ny=base.normal[:, 1])
            parts = [Part.CONTACT if k != 0 else Part.parse(self.other_part) for k in keep]
            return base.with_parts(parts)
        raise ScenarioError(f"mesh.type: unknown mesh type {self.type!r}")


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    kind: str = "unilateral"
    formulation: str = "symmetric"
    psi_basis: str = "linear"
    mesh: MeshSpec = field(default_factory=MeshSpec)
    material: MaterialParams = field(default_factory=lambda: MaterialParams(1.0, 0.5))
    material2: MaterialParams | None = None
    T: float = 1.0
    N: int = 10
    load: tuple = ()
    gap: str = "0"
    friction: FrictionLaw = field(default_factory=FrictionLaw)
    uzawa: UzawaConfig = field(default_factory=lambda: UzawaConfig(100.0, 1e-4))
    trace_points: tuple = ()
    snapshot_times: tuple = ()
    magnification: float = 1.0

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.T, self.N)

    @property
    def materials(self) -> tuple:
        return (self.material,) if self.kind == "unilateral" else (self.material, self.material2)

    def build_mesh(self) -> BoundaryMesh:
        return self.mesh.build()

    def load_function(self, mesh: BoundaryMesh):
        """load(e, t, x, y) -> (fx, fy) or None, from the per-side/part expressions."""
        entries = {}
        for target, comp, text in self.load:
            entries.setdefault(target, {})[comp] = Expression(text)
        if not entries:
            return None
        names = {str(p.value) for p in mesh.part} | set(mesh.side)
        for target in entries:
            if target not in names:
                raise ScenarioError(f"load: boundary part or side {target!r} not in the mesh")
        per_elem = []
        for e in range(mesh.n_elements):
            d = entries.get(mesh.side[e]) or entries.get(mesh.part[e].value)
            if d is not None and mesh.part[e] == Part.DIRICHLET:
                raise ScenarioError(f"load: element {e} is a Dirichlet element")
            per_elem.append(d)

        def load(e, t, x, y):
            d = per_elem[e]
            if d is None:
                return None
            zero = np.zeros(np.broadcast(t, x, y).shape)
            fx = d["x"](t=t, x=x, y=y) if "x" in d else zero
            fy = d["y"](t=t, x=x, y=y) if "y" in d else zero
            return fx, fy

        return load

    def gap_function(self):
        ex = Expression(self.gap)
        if ex.is_zero():
            return None
        return lambda t, x, y, nx, ny: ex(t=t, x=x, y=y, nx=nx, ny=ny)

    def with_overrides(self, **kw) -> "Scenario":
        return dataclasses.replace(self, **kw)

    def refined(self, h: float, dt: float) -> "Scenario":
        """Same setup at mesh size h and time step dt (square meshes use n_per_side = 2a/h)."""
        if self.mesh.type == "square":
            n = max(1, int(round(2 * self.mesh.half_side / h)))
            ms = dataclasses.replace(self.mesh, n_per_side=n)
        else:
            n = max(3, int(round(2 * np.pi * self.mesh.radius / h)))
            ms = dataclasses.replace(self.mesh, n_elements=n)
        return dataclasses.replace(self, mesh=ms, N=max(1, int(round(self.T / dt))))

    @property
    def h(self) -> float:
        if self.mesh.type == "square":
            return 2 * self.mesh.half_side / self.mesh.n_per_side
        return 2 * self.mesh.radius * np.sin(np.pi / self.mesh.n_elements)

    def validate(self) -> "Scenario":
        if self.kind not in ("unilateral", "bilateral"):
            raise ScenarioError(f"problem.kind: unknown kind {self.kind!r}")
        if self.formulation not in ("symmetric", "nonsymmetric"):
            raise ScenarioError(f"problem.formulation: unknown formulation {self.formulation!r}")
        if self.psi_basis not in ("linear", "constant"):
            raise ScenarioError(f"problem.psi_basis: unknown basis {self.psi_basis!r}")
        if self.kind == "bilateral" and self.material2 is None:
            raise ScenarioError("material2: required for bilateral problems")
        try:
            mesh = self.build_mesh()
            self.grid
        except ElastoBemError as exc:
            raise ScenarioError(f"mesh/time: {exc}") from None
        self.load_function(mesh)
        # expressions must be finite on a space-time sample
        ts = np.linspace(0.0, self.T, 7)[:, None]
        pts = mesh.nodes
        for target, comp, text in self.load:
            v = Expression(text)(t=ts, x=pts[None, :, 0], y=pts[None, :, 1])
            if not np.all(np.isfinite(v)):
                raise ScenarioError(f"load.{target}.{comp}: expression is not finite")
        nn = mesh.node_normals()
        v = Expression(self.gap)(t=ts, x=pts[None, :, 0], y=pts[None, :, 1], nx=nn[None, :, 0],
                                 ny=nn[None, :, 1])
        if not np.all(np.isfinite(v)):
            raise ScenarioError("gap.g: expression is not finite")
        if self.kind == "bilateral" and not any(p == Part.CONTACT_BILATERAL for p in mesh.part):
            raise ScenarioError("mesh.parts: bilateral problems need a contact_bilateral part")
        return self

    # ------------------------------------------------------------ serialization

    def to_text(self) -> str:
        m = self.mesh
        lines = [f"# scenario format {FORMAT_VERSION}", f"# name: {self.name}", "[problem]",
                 f"name = {self.name}", f"kind = {self.kind}", f"formulation = {self.formulation}",
                 f"psi_basis = {self.psi_basis}", "", "[mesh]", f"type = {m.type}"]
        if m.type == "square":
            lines += [f"half_side = {m.half_side!r}", f"n_per_side = {m.n_per_side}",
                      "parts = " + ", ".join(f"{k}:{v}" for k, v in m.parts)]
        else:
            lines += [f"center = {m.center[0]!r}, {m.center[1]!r}", f"radius = {m.radius!r}",
                      f"n_elements = {m.n_elements}", f"contact_filter = {m.contact_filter}",
                      f"other_part = {m.other_part}"]
        for sec, mat in (("material", self.material), ("material2", self.material2)):
            if mat is not None:
                lines += ["", f"[{sec}]", f"c_P = {mat.c_P!r}", f"c_S = {mat.c_S!r}",
                          f"rho = {mat.rho!r}"]
        lines += ["", "[time]", f"T = {self.T!r}", f"N = {self.N}", "", "[load]"]
        lines += [f"{t}.{c} = {e}" for t, c, e in self.load]
        lines += ["", "[gap]", f"g = {self.gap}", "", "[friction]", f"law = {self.friction.variant}"]
        if self.friction.variant == "tresca":
            lines.append(f"F = {float(self.friction.value)!r}")
        elif self.friction.variant == "coulomb":
            lines += [f"F_c = {float(self.friction.value)!r}",
                      f"coulomb_timing = {self.friction.coulomb_timing}"]
        u = self.uzawa
        lines += ["", "[uzawa]", f"rho = {u.rho!r}", f"eps = {u.eps!r}", f"max_iters = {u.max_iters}"]
        if u.rho_tangential is not None:
            lines.append(f"rho_t = {float(u.rho_tangential)!r}")
        lines += ["", "[output]", "trace_points = " + ", ".join(self.trace_points),
                  "snapshot_times = " + ", ".join(repr(float(s)) for s in self.snapshot_times),
                  f"magnification = {self.magnification!r}", ""]
        return "\n".join(lines)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["friction"] = {"variant": self.friction.variant, "value": float(self.friction.value),
                         "coulomb_timing": self.friction.coulomb_timing}
        d["format_version"] = FORMAT_VERSION
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


# ---------------------------------------------------------------- parsing

_KEYS = {
    "problem": {"name", "kind", "formulation", "psi_basis"},
    "mesh": {"type", "half_side", "n_per_side", "parts", "center", "radius", "n_elements",
             "contact_filter", "other_part"},
    "material": {"c_P", "c_S", "rho"},
    "material2": {"c_P", "c_S", "rho"},
    "time": {"T", "N"},
    "gap": {"g"},
    "friction": {"law", "F", "F_c", "coulomb_timing"},
    "uzawa": {"rho", "eps", "max_iters", "rho_t"},
    "output": {"trace_points", "snapshot_times", "magnification"},
}


def _num(sec, key, text, cast=float):
    try:
        v = float(text)
    except ValueError:
        raise ScenarioError(f"{sec}.{key}: expected a number, got {text!r}") from None
    if cast is int:
        if not np.isfinite(v) or v != int(v):
            raise ScenarioError(f"{sec}.{key}: expected an integer, got {text!r}")
        return int(v)
    return v


def _split(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def parse_scenario(text: str) -> Scenario:
    sections: dict = {}
    where: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in SECTIONS:
                raise ScenarioError(f"line {lineno}: unknown section [{current}]")
            if current in sections:
                raise ScenarioError(f"line {lineno}: duplicate section [{current}]")
            sections[current] = {}
            continue
        if current is None:
            raise ScenarioError(f"line {lineno}: key outside of any section")
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if current == "load":
            if key.count(".") != 1 or key.rsplit(".", 1)[1] not in ("x", "y"):
                raise ScenarioError(f"line {lineno}: load key must be <side>.<x|y>, got {key!r}")
        elif key not in _KEYS[current]:
            raise ScenarioError(f"line {lineno}: unknown key {key!r} in [{current}]")
        if key in sections[current]:
            raise ScenarioError(f"line {lineno}: duplicate key {key!r} in [{current}]")
        sections[current][key] = value
        where[(current, key)] = lineno
    for sec in REQUIRED:
        if sec not in sections:
            raise ScenarioError(f"missing required section [{sec}]")

    def ctx(sec, key, fn):
        try:
            return fn()
        except ScenarioError as exc:
            raise ScenarioError(f"line {where.get((sec, key), '?')}: {exc}") from None
        except ConfigError as exc:
            raise ScenarioError(f"line {where.get((sec, key), '?')}: {sec}.{key}: {exc}") from None

    p = sections["problem"]
    ms = sections["mesh"]
    mkw = {"type": ms.get("type", "square")}
    if "half_side" in ms:
        mkw["half_side"] = ctx("mesh", "half_side", lambda: _num("mesh", "half_side", ms["half_side"]))
    if "n_per_side" in ms:
        mkw["n_per_side"] = ctx("mesh", "n_per_side",
                                lambda: _num("mesh", "n_per_side", ms["n_per_side"], int))
    if "parts" in ms:
        pairs = []
        for item in _split(ms["parts"]):
            if ":" not in item:
                raise ScenarioError(f"line {where[('mesh', 'parts')]}: mesh.parts entries are side:part")
            side, part = (s.strip() for s in item.split(":", 1))
            ctx("mesh", "parts", lambda: Part.parse(part))
            pairs.append((side, Part.parse(part).value))
        mkw["parts"] = tuple(pairs)
    if "center" in ms:
        c = _split(ms["center"])
        mkw["center"] = tuple(ctx("mesh", "center", lambda: _num("mesh", "center", v)) for v in c)
    if "radius" in ms:
        mkw["radius"] = ctx("mesh", "radius", lambda: _num("mesh", "radius", ms["radius"]))
    if "n_elements" in ms:
        mkw["n_elements"] = ctx("mesh", "n_elements",
                                lambda: _num("mesh", "n_elements", ms["n_elements"], int))
    if "contact_filter" in ms:
        ctx("mesh", "contact_filter", lambda: Expression(ms["contact_filter"]))
        mkw["contact_filter"] = ms["contact_filter"]
    if "other_part" in ms:
        mkw["other_part"] = ctx("mesh", "other_part", lambda: Part.parse(ms["other_part"])).value

    def material(sec):
        d = sections[sec]
        vals = {k: ctx(sec, k, lambda k=k: _num(sec, k, d[k])) for k in d}
        for k in ("c_P", "c_S"):
            if k not in vals:
                raise ScenarioError(f"{sec}.{k}: required")
        return ctx(sec, "c_P", lambda: MaterialParams(vals["c_P"], vals["c_S"], vals.get("rho", 1.0)))

    t = sections["time"]
    for k in ("T", "N"):
        if k not in t:
            raise ScenarioError(f"time.{k}: required")
    T = ctx("time", "T", lambda: _num("time", "T", t["T"]))
    N = ctx("time", "N", lambda: _num("time", "N", t["N"], int))
    load = []
    for key, value in sections.get("load", {}).items():
        ctx("load", key, lambda: Expression(value))
        target, comp = key.rsplit(".", 1)
        load.append((target, comp, value))
    gap = sections.get("gap", {}).get("g", "0")
    ctx("gap", "g", lambda: Expression(gap))
    f = sections.get("friction", {})
    law = f.get("law", "none")
    if law == "tresca":
        val = ctx("friction", "F", lambda: _num("friction", "F", f.get("F", "0")))
        fl = ctx("friction", "F", lambda: FrictionLaw("tresca", val))
    elif law == "coulomb":
        val = ctx("friction", "F_c", lambda: _num("friction", "F_c", f.get("F_c", "0")))
        fl = ctx("friction", "F_c",
                 lambda: FrictionLaw("coulomb", val, f.get("coulomb_timing", "same_sweep")))
    else:
        fl = ctx("friction", "law", lambda: FrictionLaw(law, 0.0))
    uz = sections.get("uzawa", {})
    ucfg = ctx("uzawa", "rho", lambda: UzawaConfig(
        _num("uzawa", "rho", uz.get("rho", "100")), _num("uzawa", "eps", uz.get("eps", "1e-4")),
        _num("uzawa", "max_iters", uz.get("max_iters", "20000"), int),
        _num("uzawa", "rho_t", uz["rho_t"]) if "rho_t" in uz else None))
    out = sections.get("output", {})
    snaps = tuple(_num("output", "snapshot_times", v) for v in _split(out.get("snapshot_times", "")))
    sc = Scenario(
        name=p.get("name", "scenario"), kind=p.get("kind", "unilateral"),
        formulation=p.get("formulation", "symmetric"), psi_basis=p.get("psi_basis", "linear"),
        mesh=MeshSpec(**mkw), material=material("material"),
        material2=material("material2") if "material2" in sections else None,
        T=T, N=N, load=tuple(load), gap=gap, friction=fl, uzawa=ucfg,
        trace_points=_split(out.get("trace_points", "")), snapshot_times=snaps,
        magnification=_num("output", "magnification", out.get("magnification", "1")))
    return sc.validate()


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return parse_scenario(fh.read())


# ---------------------------------------------------------------- built-in examples

SQUARE_SIDES = ("b", "r", "t", "l")
# concrete, m/ms units
CONCRETE = dict(c_P=3.253, c_S=1.992)
CONCRETE_RHO = 2400.0
EXAMPLE4_GAP = ("(4*(sqrt(1-1.5*(t/2-0.2)^2)-1)*H[1-t/2] - 3.2*H[t/2-1] - 0.12 - y)*abs(ny)")


def builtin_example(n: int, variant: str | None = None) -> Scenario:
    """The four published setups at their published discretizations."""
    if n == 1:
        variant = variant or "none"
        laws = {"none": FrictionLaw(), "tresca": FrictionLaw.tresca(0.05),
                "coulomb": FrictionLaw.coulomb(0.5)}
        if variant not in laws:
            raise ConfigError(f"example 1 variant must be one of {sorted(laws)}")
        return Scenario(
            name=f"example1-{variant}", kind="unilateral", formulation="nonsymmetric",
            mesh=MeshSpec("square", 0.5, 20, (("b", "contact"), ("r", "neumann"), ("t", "neumann"),
                                              ("l", "contact"))),
            material=MaterialParams(1.0, 0.5), T=2.0, N=40,
            load=(("t", "y", "-0.1*H[t]"),), gap="0", friction=laws[variant],
            uzawa=UzawaConfig(1e2, 1e-4, 100000), trace_points=SQUARE_SIDES,
            snapshot_times=(0.5, 1.0, 1.5, 2.0), magnification=1.0).validate()
    if n in (2, 3):
        bil = n == 3
        fc = 0.75 if bil else 0.3
        if variant not in (None, "coulomb"):
            raise ConfigError(f"example {n} has only the coulomb variant")
        parts = ((("b", "contact_bilateral"), ("r", "interface"), ("t", "interface"),
                  ("l", "contact_bilateral")) if bil else
                 (("b", "contact"), ("r", "neumann"), ("t", "neumann"), ("l", "contact")))
        mat = MaterialParams(CONCRETE["c_P"], CONCRETE["c_S"], CONCRETE_RHO)
        return Scenario(
            name=f"example{n}", kind="bilateral" if bil else "unilateral", formulation="nonsymmetric",
            mesh=MeshSpec("square", 0.5, 10, parts), material=mat,
            material2=mat if bil else None, T=0.6, N=20,
            load=(("t", "y", "-4*tanh((t/15)^2)"),), gap="0", friction=FrictionLaw.coulomb(fc),
            uzawa=UzawaConfig(1e5, 1e-6, 100000), trace_points=SQUARE_SIDES,
            snapshot_times=(0.3, 0.6), magnification=1e6).validate()
    if n == 4:
        variant = variant or "coulomb"
        fcs = {"coulomb": 2.0, "none": 0.0}
        if variant not in fcs:
            raise ConfigError("example 4 variant must be 'coulomb' (F_c=2) or 'none' (F_c=0)")
        return Scenario(
            name=f"example4-{variant}", kind="unilateral", formulation="symmetric",
            mesh=MeshSpec("circle", radius=float(np.sqrt(0.2)), n_elements=80,
                          contact_filter="ny < 0", other_part="neumann"),
            material=MaterialParams(2.0, 1.0), T=2.5, N=253, load=(), gap=EXAMPLE4_GAP,
            friction=FrictionLaw.coulomb(fcs[variant]), uzawa=UzawaConfig(1e5, 1e-6, 100000, 3e3),
            trace_points=(), snapshot_times=(0.2, 0.4, 0.8, 1.2, 2.0, 2.5),
            magnification=1.0).validate()
    raise ConfigError(f"no built-in example {n!r}; choose 1-4")
