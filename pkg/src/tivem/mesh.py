"""Polygonal meshes on the unit square and their mapping to problem domains.

All generators build meshes on [0, 1]^2 whose density ``d`` is the square
root of the number of cells (approximately, for the hexagonal tiling).  A
mesh is mapped to the physical domain afterwards with :func:`map_to_domain`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from .errors import DegenerateCell, InvertedCell, MeshError, ZeroArea

TAGS = ("Left", "Right", "Top", "Bottom")

_MERGE_TOL = 1e-10
_MIN_CELL_AREA = 1e-12
_MAX_REDRAWS = 10


@dataclass
class PolyMesh:
    """Vertices, counter-clockwise cells and tagged boundary edges.

    Attributes:
        vertices: (n, 2) float array.
        cells: list of int arrays, each a counter-clockwise vertex ring.
        boundary_edges: list of ``(v0, v1, tag)``, oriented as in the
            owning cell.
    """

    vertices: np.ndarray
    cells: list
    boundary_edges: list = field(default_factory=list)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def cell_coords(self, c: int) -> np.ndarray:
        return self.vertices[self.cells[c]]

    def is_all_quad(self) -> bool:
        return all(len(c) == 4 for c in self.cells)

    def tagged_vertices(self, tag: str) -> np.ndarray:
        ids = {v for a, b, t in self.boundary_edges if t == tag for v in (a, b)}
        return np.array(sorted(ids), dtype=int)


@dataclass
class ElementGeometry:
    area: float
    centroid: np.ndarray
    diameter: float
    normals: np.ndarray  # (N, 2), edge i runs from vertex i to vertex i+1
    edge_lengths: np.ndarray


@dataclass(frozen=True)
class DomainSpec:
    """Image of the unit-square corners (0,0), (1,0), (1,1), (0,1).

    The map is bilinear; for a parallelogram it reduces to an affine map.
    """

    corners: tuple = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
    name: str = "unit"

    @classmethod
    def unit(cls) -> "DomainSpec":
        return cls()

    @classmethod
    def cook(cls) -> "DomainSpec":
        return cls(((0.0, 0.0), (48.0, 44.0), (48.0, 60.0), (0.0, 44.0)), "cook")

    @classmethod
    def beam(cls, width: float = 10.0, height: float = 2.0) -> "DomainSpec":
        h2 = 0.5 * height
        return cls(((0.0, -h2), (width, -h2), (width, h2), (0.0, h2)), "beam")

    @classmethod
    def from_name(cls, name: str) -> "DomainSpec":
        try:
            return {"unit": cls.unit, "cook": cls.cook, "beam": cls.beam}[name]()
        except KeyError:
            raise ValueError(f"unknown domain {name!r}") from None

    def area(self) -> float:
        return polygon_area(np.asarray(self.corners, dtype=float))

    def map_points(self, pts: np.ndarray) -> np.ndarray:
        P = np.asarray(self.corners, dtype=float)
        s = pts[:, 0:1]
        t = pts[:, 1:2]
        # nested lerps keep points on a straight side exactly on it
        bottom = P[0] + s * (P[1] - P[0])
        top = P[3] + s * (P[2] - P[3])
        return bottom + t * (top - bottom)


# ---------------------------------------------------------------------------
# polygon geometry


def polygon_area(xy: np.ndarray) -> float:
    """Signed shoelace area; positive for counter-clockwise rings."""
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_centroid(xy: np.ndarray) -> np.ndarray:
    x, y = xy[:, 0], xy[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6.0 * a)


def polygon_geometry(xy: np.ndarray) -> ElementGeometry:
    xy = np.asarray(xy, dtype=float)
    area = polygon_area(xy)
    if abs(area) < 1e-14:
        raise ZeroArea(f"polygon area {area!r}")
    edges = np.roll(xy, -1, axis=0) - xy
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    normals = np.column_stack([edges[:, 1], -edges[:, 0]]) / lengths[:, None]
    diff = xy[:, None, :] - xy[None, :, :]
    diameter = float(np.sqrt((diff**2).sum(-1)).max())
    return ElementGeometry(
        area=area,
        centroid=polygon_centroid(xy),
        diameter=diameter,
        normals=normals,
        edge_lengths=lengths,
    )


def element_geometry(mesh: PolyMesh, cell: int) -> ElementGeometry:
    return polygon_geometry(mesh.cell_coords(cell))


# ---------------------------------------------------------------------------
# generators


def gen_quad(d: int) -> PolyMesh:
    """Structured d x d grid of quadrilaterals."""
    if d < 1:
        raise ValueError(f"density must be >= 1, got {d}")
    g = np.linspace(0.0, 1.0, d + 1)
    X, Y = np.meshgrid(g, g)  # row j holds y = g[j]
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (d + 1) + i

    cells = [
        np.array([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)])
        for j in range(d)
        for i in range(d)
    ]
    bnd = []
    for i in range(d):
        bnd.append((vid(i, 0), vid(i + 1, 0), "Bottom"))
    for j in range(d):
        bnd.append((vid(d, j), vid(d, j + 1), "Right"))
    for i in range(d):
        bnd.append((vid(i + 1, d), vid(i, d), "Top"))
    for j in range(d):
        bnd.append((vid(0, j + 1), vid(0, j), "Left"))
    return PolyMesh(vertices, cells, bnd)


def gen_hex(d: int) -> PolyMesh:
    """Hexagon-dominant tiling with exactly d^2 cells.

    Cells are the Voronoi regions of a brick-offset lattice (rows alternately
    shifted by half a spacing), clipped to the unit square; boundary cells
    are truncated hexagons.
    """
    if d < 2:
        raise ValueError(f"hex density must be >= 2, got {d}")
    seeds = []
    for j in range(d):
        off = 0.25 if j % 2 == 0 else 0.75
        for i in range(d):
            seeds.append(((i + off) / d, (j + 0.5) / d))
    polys = _clipped_voronoi(np.array(seeds))
    return _build_mesh(polys)


def gen_voronoi(d: int, seed: int = 42, lloyd_iters: int = 10) -> PolyMesh:
    """Voronoi mesh of d^2 random seeds after ``lloyd_iters`` Lloyd sweeps."""
    if d < 2:
        raise ValueError(f"voronoi density must be >= 2, got {d}")
    if lloyd_iters < 0:
        raise ValueError(f"lloyd_iters must be >= 0, got {lloyd_iters}")
    rng = np.random.default_rng(seed)
    # a degenerate draw is replaced by the next one from the same stream,
    # so the result still depends on the seed alone
    for attempt in range(_MAX_REDRAWS):
        pts = rng.random((d * d, 2))
        try:
            polys = _clipped_voronoi(pts)
            break
        except DegenerateCell:
            if attempt == _MAX_REDRAWS - 1:
                raise
    for _ in range(lloyd_iters):
        pts = np.array([polygon_centroid(p) for p in polys])
        polys = _clipped_voronoi(pts)
    return _build_mesh(polys)


def _clip_halfplane(poly: list, nx: float, ny: float, c: float) -> list:
    """Sutherland-Hodgman clip of ``poly`` to {x : n.x <= c}."""
    out = []
    m = len(poly)
    for k in range(m):
        px, py = poly[k]
        qx, qy = poly[(k + 1) % m]
        fp = nx * px + ny * py - c
        fq = nx * qx + ny * qy - c
        if fp <= 0.0:
            out.append((px, py))
        if (fp < 0.0 < fq) or (fq < 0.0 < fp):
            t = fp / (fp - fq)
            out.append((px + t * (qx - px), py + t * (qy - py)))
    return out


def _clipped_voronoi(pts: np.ndarray) -> list:
    """Voronoi cells of ``pts`` intersected with the unit square."""
    n = len(pts)
    nbrs = [set() for _ in range(n)]
    if n >= 4:
        tri = Delaunay(pts)
        indptr, indices = tri.vertex_neighbor_vertices
        for i in range(n):
            nbrs[i].update(indices[indptr[i] : indptr[i + 1]].tolist())
    # nearest neighbours guard against degenerate (cocircular) triangulations
    k = min(n, 9)
    _, near = cKDTree(pts).query(pts, k=k)
    for i in range(n):
        nbrs[i].update(int(j) for j in np.atleast_1d(near[i]) if j != i)

    square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    polys = []
    for i in range(n):
        p = pts[i]
        poly = square
        for j in sorted(nbrs[i]):
            q = pts[j]
            nx, ny = q[0] - p[0], q[1] - p[1]
            c = 0.5 * (q[0] ** 2 + q[1] ** 2 - p[0] ** 2 - p[1] ** 2)
            poly = _clip_halfplane(poly, nx, ny, c)
            if len(poly) < 3:
                break
        poly = _dedupe_ring(poly)
        if len(poly) < 3 or polygon_area(np.array(poly)) < _MIN_CELL_AREA:
            raise DegenerateCell(f"clipped cell {i} is degenerate; try another seed")
        polys.append(np.array(poly))
    return polys


def _dedupe_ring(poly: list, tol: float = _MERGE_TOL) -> list:
    out = []
    for pt in poly:
        if not out or math.dist(pt, out[-1]) > tol:
            out.append(pt)
    while len(out) > 1 and math.dist(out[0], out[-1]) <= tol:
        out.pop()
    return out


def _build_mesh(polys: list) -> PolyMesh:
    """Merge coincident polygon corners into a conforming unit-square mesh."""
    allpts = np.vstack(polys)
    # snap to the square's sides so boundary tagging is exact
    allpts[np.abs(allpts) < _MERGE_TOL] = 0.0
    allpts[np.abs(allpts - 1.0) < _MERGE_TOL] = 1.0

    parent = np.arange(len(allpts))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in sorted(cKDTree(allpts).query_pairs(_MERGE_TOL)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(allpts))])
    uniq, newid = np.unique(roots, return_inverse=True)
    vertices = allpts[uniq]

    cells = []
    offset = 0
    for poly in polys:
        ids = newid[offset : offset + len(poly)]
        offset += len(poly)
        ring = [int(v) for k, v in enumerate(ids) if v != ids[k - 1]]
        if len(ring) < 3:
            raise DegenerateCell("cell collapsed while merging vertices")
        cells.append(np.array(ring))
    mesh = PolyMesh(vertices, cells, [])
    mesh.boundary_edges = _tag_unit_boundary(mesh)
    return mesh


def _edge_uses(cells: list) -> dict:
    uses = {}
    for c, ring in enumerate(cells):
        m = len(ring)
        for k in range(m):
            a, b = int(ring[k]), int(ring[(k + 1) % m])
            uses.setdefault((min(a, b), max(a, b)), []).append((c, a, b))
    return uses


def _tag_unit_boundary(mesh: PolyMesh) -> list:
    V = mesh.vertices
    out = []
    for key, owners in _edge_uses(mesh.cells).items():
        if len(owners) != 1:
            continue
        _, a, b = owners[0]
        pa, pb = V[a], V[b]
        if pa[0] == 0.0 and pb[0] == 0.0:
            tag = "Left"
        elif pa[0] == 1.0 and pb[0] == 1.0:
            tag = "Right"
        elif pa[1] == 0.0 and pb[1] == 0.0:
            tag = "Bottom"
        elif pa[1] == 1.0 and pb[1] == 1.0:
            tag = "Top"
        else:
            raise MeshError(f"open edge {key} does not lie on the square boundary")
        out.append((a, b, tag))
    out.sort(key=lambda e: (TAGS.index(e[2]), e[0], e[1]))
    return out


# ---------------------------------------------------------------------------
# mapping and validation


def map_to_domain(mesh: PolyMesh, domain: DomainSpec) -> PolyMesh:
    """Map a unit-square mesh onto ``domain``; connectivity is shared."""
    V = mesh.vertices
    if V.min() < -1e-12 or V.max() > 1.0 + 1e-12:
        raise ValueError("mesh does not live in the unit square")
    mapped = PolyMesh(domain.map_points(V), mesh.cells, list(mesh.boundary_edges))
    for c in range(mapped.n_cells):
        if polygon_area(mapped.cell_coords(c)) <= 0.0:
            raise InvertedCell(f"cell {c} is inverted by the domain map")
    validate(mapped, domain.area())
    return mapped


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def validate(mesh: PolyMesh, domain_area: float | None = 1.0) -> None:
    """Check ring validity, orientation, watertightness and total area.

    Raises:
        MeshError: naming the first violated invariant.
    """
    total = 0.0
    for c, ring in enumerate(mesh.cells):
        if len(ring) < 3 or len(set(int(v) for v in ring)) != len(ring):
            raise MeshError(f"cell {c} needs >= 3 distinct vertices")
        xy = mesh.vertices[ring]
        a = polygon_area(xy)
        if a <= 0.0:
            raise MeshError(f"cell {c} is not counter-clockwise (area {a!r})")
        m = len(ring)
        for i in range(m):
            for j in range(i + 2, m):
                if i == 0 and j == m - 1:
                    continue
                if _segments_cross(xy[i], xy[(i + 1) % m], xy[j], xy[(j + 1) % m]):
                    raise MeshError(f"cell {c} is self-intersecting")
        total += a

    uses = _edge_uses(mesh.cells)
    bset = {(min(a, b), max(a, b)) for a, b, _ in mesh.boundary_edges}
    for key, owners in uses.items():
        n = len(owners)
        if n > 2:
            raise MeshError(f"edge {key} shared by {n} cells")
        if n == 2 and owners[0][1] == owners[1][1]:
            raise MeshError(f"edge {key} has inconsistent orientation")
        if n == 1 and key not in bset:
            raise MeshError(f"open edge {key} is not a tagged boundary edge")
        if n == 2 and key in bset:
            raise MeshError(f"interior edge {key} is tagged as boundary")
    if len(bset) != len(mesh.boundary_edges):
        raise MeshError("duplicate boundary edges")
    for key in bset:
        if key not in uses:
            raise MeshError(f"boundary edge {key} is not a cell edge")
    for _, _, tag in mesh.boundary_edges:
        if tag not in TAGS:
            raise MeshError(f"unknown boundary tag {tag!r}")

    if domain_area is not None and abs(total - domain_area) > 1e-10 * abs(domain_area):
        raise MeshError(f"cell areas sum to {total!r}, expected {domain_area!r}")


# ---------------------------------------------------------------------------
# file format


def format_mesh(mesh: PolyMesh) -> str:
    lines = ["polymesh 1", f"V {mesh.n_vertices}"]
    lines += [f"{float(x)!r} {float(y)!r}" for x, y in mesh.vertices]
    lines.append(f"C {mesh.n_cells}")
    lines += [" ".join(str(int(v)) for v in ring) for ring in mesh.cells]
    lines.append(f"B {len(mesh.boundary_edges)}")
    lines += [f"{a} {b} {t}" for a, b, t in mesh.boundary_edges]
    return "\n".join(lines) + "\n"


def parse_mesh(text: str) -> PolyMesh:
    lines = iter(text.splitlines())
    if next(lines).strip() != "polymesh 1":
        raise MeshError("missing 'polymesh 1' header")

    def section(key):
        head = next(lines).split()
        if len(head) != 2 or head[0] != key:
            raise MeshError(f"expected '{key} <count>' section header")
        return int(head[1])

    nv = section("V")
    vertices = np.array(
        [[float(t) for t in next(lines).split()] for _ in range(nv)], dtype=float
    ).reshape(nv, 2)
    nc = section("C")
    cells = [np.array([int(t) for t in next(lines).split()]) for _ in range(nc)]
    nb = section("B")
    bnd = []
    for _ in range(nb):
        a, b, tag = next(lines).split()
        bnd.append((int(a), int(b), tag))
    return PolyMesh(vertices, cells, bnd)


def write_mesh(mesh: PolyMesh, path) -> None:
    Path(path).write_text(format_mesh(mesh))


def read_mesh(path) -> PolyMesh:
    return parse_mesh(Path(path).read_text())


def generate(kind: str, d: int, seed: int = 42, lloyd_iters: int = 10) -> PolyMesh:
    """Dispatch on mesh family name: ``quad``, ``hex`` or ``voronoi``."""
    if kind == "quad":
        return gen_quad(d)
    if kind == "hex":
        return gen_hex(d)
    if kind == "voronoi":
        return gen_voronoi(d, seed, lloyd_iters)
    raise ValueError(f"unknown mesh kind {kind!r}")
