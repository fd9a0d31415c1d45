"""Global assembly, Dirichlet elimination, sparse solve and probing."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import fem, vem
from .constitutive import (
    EngineeringParams,
    TIConstants,
    build_stiffness,
    engineering_to_ti,
)
from .errors import (
    IncompatibleElementKind,
    SolverBreakdown,
    UnconstrainedSystem,
)
from .fibre import FibreField, Strategy, element_direction
from .mesh import PolyMesh, polygon_geometry

log = logging.getLogger(__name__)

VEM_KINDS = ("quad", "hex", "voronoi")
FEM_KINDS = ("q1", "q2")
ELEMENT_KINDS = VEM_KINDS + FEM_KINDS

PointFn = Callable[[np.ndarray], np.ndarray]


@dataclass
class Dirichlet:
    """Prescribed displacement on a tagged boundary or at a single node.

    Attributes:
        target: boundary tag, or an (x, y) point that must coincide with a node.
        components: constrained components, 0 for u and 1 for v.
        value: callable mapping (n, 2) points to (n, 2) displacements;
            ``None`` means homogeneous data.
    """

    target: Union[str, tuple]
    components: tuple = (0, 1)
    value: Optional[PointFn] = None


@dataclass
class Neumann:
    tag: str
    traction: PointFn


@dataclass
class BVPSpec:
    mesh: PolyMesh
    material: EngineeringParams
    fibre: FibreField = field(default_factory=FibreField)
    strategy: Strategy = Strategy.CENTROID
    dirichlet: list = field(default_factory=list)
    neumann: list = field(default_factory=list)
    body_force: Optional[PointFn] = None
    density: Optional[float] = None  # defaults to sqrt(n_cells)
    fibre_mode: str = "element"  # "gauss" evaluates fibres per FEM Gauss point
    consts: Optional[TIConstants] = None  # overrides the engineering conversion


@dataclass
class Discretization:
    """Nodes and element connectivity for one element kind.

    ``corners[e]`` lists the polygon vertices (node ids) of element e;
    ``elements[e]`` its full node list (equal to the corners except for Q2).
    ``boundary`` holds ``(node ids along the segment, tag)``.
    """

    kind: str
    nodes: np.ndarray
    elements: list
    corners: list
    boundary: list

    @property
    def n_dofs(self) -> int:
        return 2 * len(self.nodes)


@dataclass
class ProbeRecord:
    point: tuple
    node: int
    distance: float
    u: float
    v: float


@dataclass
class SystemState:
    disc: Discretization
    K: sp.csr_matrix
    F: np.ndarray
    fixed_dofs: np.ndarray
    fixed_values: np.ndarray
    u: Optional[np.ndarray] = None
    residual: Optional[float] = None
    probes: list = field(default_factory=list)


def _canonical(mesh: PolyMesh):
    """Renumber vertices by coordinates and sort cells and boundary edges.

    Assembly then sees the same sequence of floating-point operations for
    any numbering of the same mesh, so results are bitwise invariant.
    """
    V = mesh.vertices
    order = np.lexsort((V[:, 1], V[:, 0]))
    new_id = np.empty(len(V), dtype=int)
    new_id[order] = np.arange(len(V))
    cells = []
    for c in mesh.cells:
        ring = new_id[np.asarray(c, dtype=int)]
        cells.append(np.roll(ring, -int(np.argmin(ring))))
    cells.sort(key=lambda r: tuple(r))
    bnd = sorted((int(new_id[a]), int(new_id[b]), t) for a, b, t in mesh.boundary_edges)
    return V[order], cells, bnd


def discretize(mesh: PolyMesh, kind: str) -> Discretization:
    """Nodes and connectivity for ``kind``, numbered canonically."""
    if kind not in ELEMENT_KINDS:
        raise IncompatibleElementKind(f"unknown element kind {kind!r}")
    verts, cells, edges = _canonical(mesh)
    mesh = PolyMesh(verts, cells, edges)
    bnd = [((a, b), t) for a, b, t in edges]
    if kind in VEM_KINDS or kind == "q1":
        if kind == "q1" and not mesh.is_all_quad():
            raise IncompatibleElementKind("Q1 needs an all-quadrilateral mesh")
        return Discretization(kind, mesh.vertices, cells, cells, bnd)

    if not mesh.is_all_quad():
        raise IncompatibleElementKind("Q2 needs an all-quadrilateral mesh")
    nodes = [p for p in mesh.vertices]
    mid = {}

    def midnode(a, b):
        key = (min(a, b), max(a, b))
        if key not in mid:
            mid[key] = len(nodes)
            nodes.append(0.5 * (mesh.vertices[a] + mesh.vertices[b]))
        return mid[key]

    elements = []
    for c in cells:
        m = [midnode(int(c[k]), int(c[(k + 1) % 4])) for k in range(4)]
        centre = len(nodes)
        nodes.append(mesh.vertices[c].mean(axis=0))
        elements.append(np.array(list(c) + m + [centre]))
    bnd = [((a, midnode(a, b), b), t) for (a, b), t in bnd]
    return Discretization(kind, np.array(nodes), elements, cells, bnd)


def _element_dofs(nodes: np.ndarray) -> np.ndarray:
    return np.column_stack([2 * nodes, 2 * nodes + 1]).ravel()


def _edge_loads(disc: Discretization, F: np.ndarray, tag: str, traction: PointFn) -> None:
    X = disc.nodes
    for seg, t in disc.boundary:
        if t != tag:
            continue
        if len(seg) == 2:
            a, b = seg
            L = math.dist(X[a], X[b])
            ta, tb = np.asarray(traction(X[[a, b]]), dtype=float)
            # exact for tractions varying linearly along the edge
            F[2 * a : 2 * a + 2] += L * (2.0 * ta + tb) / 6.0
            F[2 * b : 2 * b + 2] += L * (ta + 2.0 * tb) / 6.0
        else:
            a, m, b = seg
            L = math.dist(X[a], X[b])
            g, w = np.polynomial.legendre.leggauss(3)
            Ns = np.array([0.5 * g * (g - 1.0), 1.0 - g * g, 0.5 * g * (g + 1.0)])
            pts = np.outer(Ns[0], X[a]) + np.outer(Ns[1], X[m]) + np.outer(Ns[2], X[b])
            tq = np.asarray(traction(pts), dtype=float)
            for k, node in enumerate((a, m, b)):
                F[2 * node : 2 * node + 2] += (0.5 * L) * (w * Ns[k]) @ tq


def _resolve_dirichlet(disc: Discretization, bcs: Sequence[Dirichlet]):
    X = disc.nodes
    fixed = {}
    scale = float(np.ptp(X, axis=0).max()) or 1.0
    for bc in bcs:
        if isinstance(bc.target, str):
            ids = sorted({n for seg, t in disc.boundary if t == bc.target for n in seg})
            if not ids:
                raise ValueError(f"no boundary edges tagged {bc.target!r}")
        else:
            p = np.asarray(bc.target, dtype=float)
            dist = np.hypot(*(X - p).T)
            k = int(np.argmin(dist))
            if dist[k] > 1e-9 * scale:
                raise ValueError(f"no node at Dirichlet point {tuple(p)}")
            ids = [k]
        ids = np.array(ids, dtype=int)
        vals = np.zeros((len(ids), 2)) if bc.value is None else np.asarray(bc.value(X[ids]), dtype=float)
        for n, g in zip(ids, vals):
            for comp in bc.components:
                fixed[2 * int(n) + comp] = float(g[comp])
    dofs = np.array(sorted(fixed), dtype=int)
    return dofs, np.array([fixed[k] for k in dofs])


def element_constants(spec: BVPSpec) -> TIConstants:
    return spec.consts if spec.consts is not None else engineering_to_ti(spec.material)


def assemble(spec: BVPSpec, element_kind: str) -> SystemState:
    """Assemble stiffness and load vector; constraints are stored, not applied."""
    if not spec.dirichlet:
        raise UnconstrainedSystem("no Dirichlet conditions given")
    disc = discretize(spec.mesh, element_kind)
    consts = element_constants(spec)
    d = spec.density if spec.density is not None else math.sqrt(spec.mesh.n_cells)
    X = disc.nodes
    ndof = disc.n_dofs
    F = np.zeros(ndof)

    rows, cols, vals = [], [], []
    for e, (enodes, corners) in enumerate(zip(disc.elements, disc.corners)):
        verts = X[corners]
        geom = polygon_geometry(verts)
        direction = element_direction(spec.fibre, spec.strategy, geom.centroid, verts, d)
        C = build_stiffness(consts, direction)
        if element_kind in VEM_KINDS:
            Ke = vem.element_stiffness(verts, C, consts.mu_T, geom)
        else:
            C_at = None
            if spec.fibre_mode == "gauss":
                C_at = lambda x: build_stiffness(consts, spec.fibre.direction_at(x))
            kfun = fem.q1_stiffness if element_kind == "q1" else fem.q2_stiffness
            Ke = kfun(X[enodes], C, C_at)
        dofs = _element_dofs(enodes)
        rows.append(np.repeat(dofs, len(dofs)))
        cols.append(np.tile(dofs, len(dofs)))
        vals.append(Ke.ravel())
        if spec.body_force is not None:
            _body_load(F, element_kind, X[enodes], enodes, geom, spec.body_force)

    K = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ndof, ndof),
    ).tocsr()
    for nm in spec.neumann:
        _edge_loads(disc, F, nm.tag, nm.traction)
    fixed, values = _resolve_dirichlet(disc, spec.dirichlet)
    return SystemState(disc, K, F, fixed, values)


def _body_load(F, kind, coords, enodes, geom, f):
    if kind in VEM_KINDS:
        # centroid value lumped equally to the vertices
        fc = np.asarray(f(geom.centroid[None, :]), dtype=float)[0]
        for n in enodes:
            F[2 * n : 2 * n + 2] += fc * geom.area / len(enodes)
        return
    shape, order = (fem.shape_q1, 2) if kind == "q1" else (fem.shape_q2, 3)
    g, w = np.polynomial.legendre.leggauss(order)
    for j, eta in enumerate(g):
        for i, xi in enumerate(g):
            N, dN = shape(xi, eta)
            detJ = np.linalg.det(dN.T @ coords)
            fq = np.asarray(f((N @ coords)[None, :]), dtype=float)[0]
            for k, n in enumerate(enodes):
                F[2 * n : 2 * n + 2] += N[k] * fq * detJ * w[i] * w[j]


def solve(state: SystemState, method: str = "direct", rtol: float = 1e-10) -> SystemState:
    """Eliminate Dirichlet dofs (with lifting) and solve the SPD system.

    Args:
        method: ``"direct"`` (sparse LU) or ``"cg"`` (Jacobi-preconditioned CG).

    Raises:
        SolverBreakdown: if the reduced system is singular or not positive.
    """
    n = state.K.shape[0]
    fixed = state.fixed_dofs
    free = np.setdiff1d(np.arange(n), fixed)
    K = state.K.tocsr()
    Kff = K[free][:, free].tocsc()
    Kfc = K[free][:, fixed]
    rhs = state.F[free] - Kfc @ state.fixed_values

    if method == "direct":
        try:
            lu = spla.splu(Kff, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0)
        except RuntimeError as exc:
            raise SolverBreakdown(f"factorisation failed: {exc}") from exc
        uf = lu.solve(rhs)
    elif method == "cg":
        dinv = 1.0 / Kff.diagonal()
        if not np.all(np.isfinite(dinv)) or np.any(dinv <= 0):
            raise SolverBreakdown("non-positive diagonal in reduced stiffness")
        M = spla.LinearOperator(Kff.shape, matvec=lambda x: dinv * x)
        uf, info = spla.cg(Kff, rhs, rtol=rtol, atol=0.0, M=M, maxiter=50 * len(free))
        if info != 0:
            raise SolverBreakdown(f"CG did not converge (info={info})")
    else:
        raise ValueError(f"unknown solver {method!r}")

    if not np.all(np.isfinite(uf)):
        raise SolverBreakdown("non-finite solution")
    energy = float(uf @ (Kff @ uf))
    if np.linalg.norm(rhs) > 0 and energy <= 0.0:
        raise SolverBreakdown(f"reduced stiffness is not positive (u.Ku = {energy!r})")

    r = Kff @ uf - rhs
    bn = np.linalg.norm(rhs)
    residual = float(np.linalg.norm(r) / bn) if bn > 0 else float(np.linalg.norm(r))
    u = np.zeros(n)
    u[free] = uf
    u[fixed] = state.fixed_values
    log.debug("solved %d dofs (%s), residual %.3e", len(free), method, residual)
    return dataclasses.replace(state, u=u, residual=residual, probes=list(state.probes))


def probe(state: SystemState, point) -> ProbeRecord:
    """Displacement at the node nearest to ``point``; the snap distance is kept."""
    if state.u is None:
        raise ValueError("state has not been solved")
    p = np.asarray(point, dtype=float)
    dist = np.hypot(*(state.disc.nodes - p).T)
    k = int(np.argmin(dist))
    rec = ProbeRecord(tuple(p.tolist()), k, float(dist[k]), float(state.u[2 * k]), float(state.u[2 * k + 1]))
    state.probes.append(rec)
    return rec


def reactions(state: SystemState) -> np.ndarray:
    """Full-length vector K u - F; nonzero only at constrained dofs."""
    return state.K @ state.u - state.F
