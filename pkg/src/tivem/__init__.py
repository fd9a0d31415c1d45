"""Virtual element solver for transversely isotropic plane-strain elasticity."""

from .assembly import (
    BVPSpec,
    Dirichlet,
    Neumann,
    SystemState,
    assemble,
    discretize,
    probe,
    reactions,
    solve,
)
from .benchmarks import (
    BeamSpec,
    CookSpec,
    SweepSpec,
    analytical_beam_displacement,
    run_beam,
    run_case,
    run_cook,
    sweep,
)
from .constitutive import (
    EngineeringParams,
    FibreDirection,
    TIConstants,
    build_stiffness,
    engineering_to_ti,
    pointwise_stability,
)
from .fibre import FibreField, Strategy, element_direction, weight
from .mesh import DomainSpec, PolyMesh, generate, map_to_domain, read_mesh, validate, write_mesh

__version__ = "0.1.0"
