"""Cook's membrane and the bending beam, plus parameter sweep drivers."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from .assembly import BVPSpec, Dirichlet, Neumann, ProbeRecord, assemble, probe, solve
from .constitutive import (
    EngineeringParams,
    FibreDirection,
    TIConstants,
    reduced_compliance,
)
from .fibre import FibreField, Strategy
from .mesh import DomainSpec, PolyMesh, generate, map_to_domain


@dataclass(frozen=True)
class CookSpec:
    corners: tuple = ((0.0, 0.0), (48.0, 44.0), (48.0, 60.0), (0.0, 44.0))
    load: float = 100.0
    E_T: float = 250.0
    probe: tuple = (48.0, 52.0)

    @property
    def edge_length(self) -> float:
        return math.dist(self.corners[1], self.corners[2])


@dataclass(frozen=True)
class BeamSpec:
    """Beam [0, w] x [-h/2, h/2] with a linear bending traction at x = w.

    Variant ``"a"`` pins both left corners.  Variant ``"b"`` fixes u along
    the left edge and pins the bottom-left corner.
    """

    width: float = 10.0
    height: float = 2.0
    E_T: float = 1500.0
    F_max: float = 30.0
    probe: tuple = (10.0, 0.0)
    # applies the matching bending traction -sigma_xx on the left edge so the
    # closed-form solution is exact (see README)
    balance_left: bool = True

    def traction_x(self, y):
        return (2.0 * self.F_max / self.height) * y


@dataclass
class RunResult:
    probe: ProbeRecord
    residual: float
    wall_ms: float


@lru_cache(maxsize=64)
def _unit_mesh(kind: str, d: int, seed: int, lloyd_iters: int) -> PolyMesh:
    family = kind if kind in ("hex", "voronoi") else "quad"
    return generate(family, d, seed, lloyd_iters)


def build_mesh(kind: str, d: int, domain: DomainSpec, seed: int = 42, lloyd_iters: int = 10) -> PolyMesh:
    """Mesh for an element kind: Q1/Q2 and VEM-quad share the structured grid."""
    return map_to_domain(_unit_mesh(kind, d, seed, lloyd_iters), domain)


def _run(spec: BVPSpec, kind: str, point, solver: str) -> RunResult:
    t0 = time.perf_counter()
    state = solve(assemble(spec, kind), method=solver)
    rec = probe(state, point)
    return RunResult(rec, state.residual, 1e3 * (time.perf_counter() - t0))


def cook_bvp(
    mesh: PolyMesh,
    material: EngineeringParams,
    fibre: FibreField,
    strategy=Strategy.CENTROID,
    spec: CookSpec = CookSpec(),
    density: Optional[float] = None,
) -> BVPSpec:
    t = spec.load / spec.edge_length
    return BVPSpec(
        mesh=mesh,
        material=material,
        fibre=fibre,
        strategy=Strategy(strategy),
        dirichlet=[Dirichlet("Left")],
        neumann=[Neumann("Right", lambda x: np.column_stack([0.0 * x[:, 0], t + 0.0 * x[:, 0]]))],
        density=density,
    )


def beam_bvp(
    mesh: PolyMesh,
    material: EngineeringParams,
    fibre: FibreField,
    variant: str = "a",
    strategy=Strategy.CENTROID,
    spec: BeamSpec = BeamSpec(),
    density: Optional[float] = None,
) -> BVPSpec:
    h2 = 0.5 * spec.height
    if variant == "a":
        bcs = [Dirichlet((0.0, -h2)), Dirichlet((0.0, h2))]
    elif variant == "b":
        bcs = [Dirichlet("Left", (0,)), Dirichlet((0.0, -h2))]
    else:
        raise ValueError(f"unknown beam variant {variant!r}")

    def right(x):
        return np.column_stack([spec.traction_x(x[:, 1]), 0.0 * x[:, 1]])

    loads = [Neumann("Right", right)]
    if variant == "a" and spec.balance_left:
        loads.append(Neumann("Left", lambda x: -right(x)))
    return BVPSpec(
        mesh=mesh,
        material=material,
        fibre=fibre,
        strategy=Strategy(strategy),
        dirichlet=bcs,
        neumann=loads,
        density=density,
    )


def run_cook(
    kind: str,
    d: int,
    material: EngineeringParams,
    fibre: FibreField,
    strategy=Strategy.CENTROID,
    spec: CookSpec = CookSpec(),
    seed: int = 42,
    solver: str = "direct",
    lloyd_iters: int = 10,
) -> RunResult:
    """Vertical displacement of Cook's membrane at the probe point."""
    mesh = build_mesh(kind, d, DomainSpec(spec.corners, "cook"), seed, lloyd_iters)
    bvp = cook_bvp(mesh, material, fibre, strategy, spec, density=d)
    return _run(bvp, kind, spec.probe, solver)


def run_beam(
    kind: str,
    d: int,
    material: EngineeringParams,
    fibre: FibreField,
    variant: str = "a",
    strategy=Strategy.CENTROID,
    spec: BeamSpec = BeamSpec(),
    seed: int = 42,
    solver: str = "direct",
    lloyd_iters: int = 10,
) -> RunResult:
    mesh = build_mesh(kind, d, DomainSpec.beam(spec.width, spec.height), seed, lloyd_iters)
    bvp = beam_bvp(mesh, material, fibre, variant, strategy, spec, density=d)
    return _run(bvp, kind, spec.probe, solver)


def analytical_beam_displacement(
    x: float,
    y: float,
    consts: TIConstants,
    direction: FibreDirection,
    F_max: float = 30.0,
    h: float = 2.0,
) -> tuple:
    """Closed-form pure-bending displacement (u, v) of the beam.

    The compliance coefficients are the first column of the inverse
    plane-strain stiffness.
    """
    S = reduced_compliance(consts, direction)
    S11, S21, S31 = S[0, 0], S[1, 0], S[2, 0]
    q = y * y - 0.25 * h * h
    u = (2.0 * F_max / h) * (S11 * x * y + 0.5 * S31 * q)
    v = (F_max / h) * (S21 * q - S11 * x * x)
    return u, v


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepSpec:
    """Parameter sweep over ``axis`` in {"density", "p", "angle"}.

    ``base`` supplies the fixed parameters; see :func:`run_case`.
    """

    axis: str
    values: list
    kinds: list = field(default_factory=lambda: ["quad", "hex", "voronoi", "q1", "q2"])
    base: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.axis not in ("density", "p", "angle"):
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        self.values = sorted(self.values)


@dataclass
class SweepRow:
    value: float
    kind: str
    probe_u: float
    probe_v: float
    snap_dist: float
    residual: float
    wall_ms: float
    status: int = 0
    error: str = ""


def run_case(
    problem: str,
    kind: str,
    density: int,
    nu: float,
    p: float,
    fibre: FibreField,
    strategy="centroid",
    E_T: Optional[float] = None,
    seed: int = 42,
    solver: str = "direct",
    lloyd_iters: int = 10,
) -> RunResult:
    """Single benchmark run; ``problem`` is ``cook``, ``beam-a`` or ``beam-b``."""
    if problem == "cook":
        cs = CookSpec() if E_T is None else CookSpec(E_T=E_T)
        mat = EngineeringParams(cs.E_T, nu, p)
        return run_cook(kind, density, mat, fibre, strategy, cs, seed, solver, lloyd_iters)
    if problem in ("beam-a", "beam-b"):
        bs = BeamSpec() if E_T is None else BeamSpec(E_T=E_T)
        mat = EngineeringParams(bs.E_T, nu, p)
        return run_beam(kind, density, mat, fibre, problem[-1], strategy, bs, seed, solver, lloyd_iters)
    raise ValueError(f"unknown problem {problem!r}")


def _sweep_row(args) -> SweepRow:
    axis, value, kind, base = args
    params = dict(base)
    if axis == "density":
        params["density"] = int(value)
    elif axis == "p":
        params["p"] = float(value)
    else:
        params["fibre"] = replace(params["fibre"], kind="constant", angle=float(value))
    try:
        res = run_case(kind=kind, **params)
        return SweepRow(value, kind, res.probe.u, res.probe.v, res.probe.distance, res.residual, res.wall_ms)
    except Exception as exc:  # recorded per row; the sweep continues
        nan = float("nan")
        return SweepRow(value, kind, nan, nan, nan, nan, nan, status=1, error=f"{type(exc).__name__}: {exc}")


def sweep(spec: SweepSpec, jobs: int = 1) -> list:
    """Run every (value, kind) pair; rows are ordered by value then kind."""
    tasks = [(spec.axis, v, k, spec.base) for v in spec.values for k in spec.kinds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_row, tasks))
    return [_sweep_row(t) for t in tasks]
