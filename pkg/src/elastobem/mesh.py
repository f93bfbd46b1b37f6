"""Straight-segment boundary meshes with part tags and element frames.

Orientation: boundary loops run counterclockwise around the body, so the
outward normal is the element direction rotated by -90 degrees and the
tangent (normal rotated by -90 degrees) points against the traversal.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import GeometryError


class Part(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    CONTACT = "contact"
    INTERFACE = "interface"
    CONTACT_BILATERAL = "contact_bilateral"

    @classmethod
    def parse(cls, value) -> "Part":
        if isinstance(value, Part):
            return value
        key = str(value).strip().lower()
        aliases = {"d": "dirichlet", "n": "neumann", "c": "contact",
                   "contact_unilateral": "contact", "i": "interface",
                   "cb": "contact_bilateral"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise GeometryError(f"unknown boundary part {value!r}") from None


@dataclass(frozen=True)
class BoundaryMesh:
    nodes: np.ndarray
    elements: np.ndarray
    part: tuple
    side: tuple = field(default=())
    normal: np.ndarray = field(default=None)
    tangent: np.ndarray = field(default=None)
    length: np.ndarray = field(default=None)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        elements = np.asarray(self.elements, dtype=np.int64)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise GeometryError("nodes must have shape (n, 2)")
        if elements.ndim != 2 or elements.shape[1] != 2:
            raise GeometryError("elements must have shape (m, 2)")
        if len(self.part) != len(elements):
            raise GeometryError("one part tag per element required")
        vec = nodes[elements[:, 1]] - nodes[elements[:, 0]]
        length = np.hypot(vec[:, 0], vec[:, 1])
        if np.any(length <= 0.0):
            raise GeometryError("zero-length element")
        direction = vec / length[:, None]
        normal = np.column_stack([direction[:, 1], -direction[:, 0]])
        tangent = np.column_stack([normal[:, 1], -normal[:, 0]])
        for arr in (nodes, elements, normal, tangent, length):
            arr.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "part", tuple(Part.parse(p) for p in self.part))
        side = tuple(self.side) if self.side else tuple("" for _ in self.part)
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "tangent", tangent)
        object.__setattr__(self, "length", length)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def h_max(self) -> float:
        return float(self.length.max())

    @property
    def diameter(self) -> float:
        d = self.nodes[:, None, :] - self.nodes[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    def elements_with(self, parts) -> np.ndarray:
        parts = {Part.parse(p) for p in parts}
        return np.array([i for i, p in enumerate(self.part) if p in parts], dtype=np.int64)

    def elements_on_side(self, name: str) -> np.ndarray:
        return np.array([i for i, s in enumerate(self.side) if s == name], dtype=np.int64)

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[self.elements[:, 0]] + self.nodes[self.elements[:, 1]])

    def node_normals(self, elements=None) -> np.ndarray:
        """Length-weighted average of adjacent element normals (unit), per node."""
        acc = np.zeros_like(self.nodes)
        ids = range(self.n_elements) if elements is None else elements
        for e in ids:
            for k in self.elements[e]:
                acc[k] += self.normal[e]
        nrm = np.hypot(acc[:, 0], acc[:, 1])
        out = np.zeros_like(acc)
        ok = nrm > 0
        out[ok] = acc[ok] / nrm[ok, None]
        return out

    def with_parts(self, parts) -> "BoundaryMesh":
        return BoundaryMesh(self.nodes, self.elements, tuple(parts), self.side)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["element_id", "x0", "y0", "x1", "y1", "part", "nx", "ny"])
            for e, (a, b) in enumerate(self.elements):
                coords = [*self.nodes[a], *self.nodes[b]]
                w.writerow([e, *(repr(float(v)) for v in coords), self.part[e].value,
                            *(repr(float(v)) for v in self.normal[e])])


def _segments_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if abs(v) < 1e-14 else (1 if v > 0 else -1)

    def on_seg(a, b, c):
        return (min(a[0], b[0]) - 1e-14 <= c[0] <= max(a[0], b[0]) + 1e-14
                and min(a[1], b[1]) - 1e-14 <= c[1] <= max(a[1], b[1]) + 1e-14)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and on_seg(p1, p2, q1)) or (o2 == 0 and on_seg(p1, p2, q2))
            or (o3 == 0 and on_seg(q1, q2, p1)) or (o4 == 0 and on_seg(q1, q2, p2)))


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def build_polygon_mesh(vertices: Sequence, n_per_side: int, parts, side_names=None) -> BoundaryMesh:
    """Uniformly subdivided closed polygon; side k runs from vertex k to vertex k+1.

    parts: one tag per side (or a single tag for all sides). Clockwise input is
    reoriented counterclockwise with the side tags carried along.
    """
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise GeometryError("need at least 3 vertices in 2D")
    if int(n_per_side) < 1:
        raise GeometryError("n_per_side must be >= 1")
    n_per_side = int(n_per_side)
    ns = len(v)
    if isinstance(parts, (str, Part)):
        parts = [parts] * ns
    parts = list(parts)
    if len(parts) != ns:
        raise GeometryError(f"need {ns} side tags, got {len(parts)}")
    names = list(side_names) if side_names is not None else [str(k) for k in range(ns)]
    for k in range(ns):
        if np.hypot(*(v[(k + 1) % ns] - v[k])) <= 0.0:
            raise GeometryError(f"side {k} has zero length")
    for i in range(ns):
        for j in range(i + 1, ns):
            if j == i + 1 or (i == 0 and j == ns - 1):
                continue
            if _segments_intersect(v[i], v[(i + 1) % ns], v[j], v[(j + 1) % ns]):
                raise GeometryError(f"polygon is self-intersecting (sides {i} and {j})")
    area = _signed_area(v)
    if abs(area) <= 0.0:
        raise GeometryError("degenerate polygon")
    if area < 0:
        # reverse traversal; side k (v_k -> v_k+1) becomes side between reversed vertices
        v = v[::-1].copy()
        parts = parts[::-1]
        names = names[::-1]
        parts = parts[1:] + parts[:1]
        names = names[1:] + names[:1]
    nodes = []
    elements = []
    tags = []
    sides = []
    for k in range(ns):
        a, b = v[k], v[(k + 1) % ns]
        for j in range(n_per_side):
            s = j / n_per_side
            nodes.append(a + s * (b - a))
    total = len(nodes)
    for k in range(ns):
        for j in range(n_per_side):
            i0 = k * n_per_side + j
            elements.append((i0, (i0 + 1) % total))
            tags.append(parts[k])
            sides.append(names[k])
    return BoundaryMesh(np.array(nodes), np.array(elements), tuple(tags), tuple(sides))


def build_square_mesh(half_side: float, n_per_side: int, parts) -> BoundaryMesh:
    """Axis-aligned square [-a, a]^2 with sides named b, r, t, l (counterclockwise from the bottom).

    parts: dict side name -> tag, or one tag for all sides.
    """
    a = float(half_side)
    verts = [(-a, -a), (a, -a), (a, a), (-a, a)]
    names = ["b", "r", "t", "l"]
    if isinstance(parts, dict):
        tags = [parts[n] for n in names]
    else:
        tags = parts
    return build_polygon_mesh(verts, n_per_side, tags, names)


def build_circle_mesh(center, radius: float, n_elements: int, part=Part.CONTACT) -> BoundaryMesh:
    """Regular inscribed polygon with nodes at angles 2 pi k / n."""
    if not radius > 0:
        raise GeometryError("radius must be positive")
    if int(n_elements) < 3:
        raise GeometryError("need at least 3 elements")
    n = int(n_elements)
    c = np.asarray(center, dtype=float)
    ang = 2.0 * math.pi * np.arange(n) / n
    nodes = c + radius * np.column_stack([np.cos(ang), np.sin(ang)])
    elements = np.column_stack([np.arange(n), (np.arange(n) + 1) % n])
    return BoundaryMesh(nodes, elements, tuple([part] * n), tuple(["circle"] * n))


def element_frame(mesh: BoundaryMesh, i: int):
    """(midpoint, outward normal, tangent, length) of element i."""
    if not (0 <= int(i) < mesh.n_elements):
        raise IndexError(f"element index {i} out of range")
    a, b = mesh.elements[i]
    mid = 0.5 * (mesh.nodes[a] + mesh.nodes[b])
    return mid, mesh.normal[i].copy(), mesh.tangent[i].copy(), float(mesh.length[i])
