import math

import numpy as np
import pytest

from tivem.assembly import (
    BVPSpec,
    Dirichlet,
    Neumann,
    assemble,
    discretize,
    probe,
    reactions,
    solve,
)
from tivem.benchmarks import BeamSpec, beam_bvp, build_mesh
from tivem.constitutive import EngineeringParams
from tivem.errors import IncompatibleElementKind, UnconstrainedSystem
from tivem.fibre import FibreField
from tivem.mesh import DomainSpec, PolyMesh, gen_quad, generate

KINDS = ["quad", "hex", "voronoi", "q1", "q2"]
MAT = EngineeringParams(1.0, 0.3, 5.0)
FIBRE = FibreField.constant(math.pi / 4)


def linear_field(X):
    return np.column_stack([2 * X[:, 0] + X[:, 1], X[:, 0] - 3 * X[:, 1]])


def unit_mesh(kind, d=5):
    return generate("quad" if kind in ("q1", "q2") else kind, d)


def patch_spec(kind, d=5):
    bcs = [Dirichlet(tag, value=linear_field) for tag in ("Left", "Right", "Top", "Bottom")]
    return BVPSpec(unit_mesh(kind, d), MAT, FIBRE, dirichlet=bcs)


@pytest.mark.parametrize("kind", KINDS)
def test_patch_test(kind):
    st = solve(assemble(patch_spec(kind), kind))
    exact = linear_field(st.disc.nodes).ravel()
    assert np.abs(st.u - exact).max() <= 1e-9 * np.abs(exact).max()


@pytest.mark.parametrize("kind", KINDS)
def test_patch_test_with_traction_data(kind):
    # same field, but Neumann data on Right/Top; traction = sigma n
    from tivem.constitutive import FibreDirection, build_stiffness, engineering_to_ti

    C = build_stiffness(engineering_to_ti(MAT), FibreDirection.from_angle(math.pi / 4))
    s = C @ np.array([2.0, -3.0, 2.0])
    sig = np.array([[s[0], s[2]], [s[2], s[1]]])
    spec = BVPSpec(
        unit_mesh(kind),
        MAT,
        FIBRE,
        dirichlet=[Dirichlet("Left", value=linear_field), Dirichlet("Bottom", value=linear_field)],
        neumann=[
            Neumann("Right", lambda x: np.tile(sig @ [1.0, 0.0], (len(x), 1))),
            Neumann("Top", lambda x: np.tile(sig @ [0.0, 1.0], (len(x), 1))),
        ],
    )
    st = solve(assemble(spec, kind))
    exact = linear_field(st.disc.nodes).ravel()
    assert np.abs(st.u - exact).max() <= 1e-9 * np.abs(exact).max()


def test_single_element_counts():
    spec = BVPSpec(
        gen_quad(1),
        MAT,
        FIBRE,
        dirichlet=[Dirichlet("Left")],
        neumann=[Neumann("Right", lambda x: np.tile([1.0, 0.0], (len(x), 1)))],
    )
    st = assemble(spec, "quad")
    assert st.K.shape == (8, 8) and len(st.fixed_dofs) == 4
    # uniform unit traction on a unit edge: half to each endpoint
    assert st.F.sum() == pytest.approx(1.0)
    assert sorted(st.F[st.F != 0]) == [0.5, 0.5]


def test_unconstrained_system_rejected():
    with pytest.raises(UnconstrainedSystem):
        assemble(BVPSpec(gen_quad(2), MAT, FIBRE), "quad")


def test_incompatible_element_kind():
    with pytest.raises(IncompatibleElementKind):
        discretize(generate("hex", 3), "q1")
    with pytest.raises(IncompatibleElementKind):
        discretize(generate("voronoi", 3), "q2")
    with pytest.raises(IncompatibleElementKind):
        discretize(gen_quad(2), "p3")


def test_q2_node_count():
    disc = discretize(gen_quad(3), "q2")
    assert len(disc.nodes) == 7 * 7


def test_dirichlet_point_must_be_node():
    spec = BVPSpec(gen_quad(2), MAT, FIBRE, dirichlet=[Dirichlet((0.3, 0.3))])
    with pytest.raises(ValueError):
        assemble(spec, "quad")


def _beam_state(kind, d=10, method="direct"):
    mesh = build_mesh(kind, d, DomainSpec.beam())
    return solve(assemble(beam_bvp(mesh, MAT, FIBRE, "b"), kind), method=method)


@pytest.mark.parametrize("kind", KINDS)
def test_equilibrium_of_reactions(kind):
    st = _beam_state(kind)
    r = reactions(st)
    free = np.setdiff1d(np.arange(len(r)), st.fixed_dofs)
    assert np.abs(r[free]).max() < 1e-9 * np.abs(st.F).max()
    # reactions balance applied loads: net force and moment vanish
    X = st.disc.nodes
    fx, fy = (st.F + r)[0::2], (st.F + r)[1::2]
    assert abs(fx.sum()) < 1e-9 and abs(fy.sum()) < 1e-9
    assert abs((X[:, 0] * fy - X[:, 1] * fx).sum()) < 1e-8


def test_direct_and_cg_agree():
    a = _beam_state("voronoi", 20)
    b = _beam_state("voronoi", 20, "cg")
    assert np.abs(a.u - b.u).max() <= 1e-8 * np.abs(a.u).max()


def test_renumbering_invariance():
    mesh = build_mesh("voronoi", 8, DomainSpec.beam())
    rng = np.random.default_rng(3)
    perm = rng.permutation(mesh.n_vertices)  # new id of old vertex i is perm[i]
    inv = np.argsort(perm)
    shuffled = PolyMesh(
        mesh.vertices[inv],
        [perm[c] for c in mesh.cells[::-1]],
        [(int(perm[a]), int(perm[b]), t) for a, b, t in mesh.boundary_edges],
    )
    pts = [(10.0, 0.0), (5.0, 1.0), (0.0, -1.0)]
    res = []
    for m in (mesh, shuffled):
        st = solve(assemble(beam_bvp(m, MAT, FIBRE, "a"), "voronoi"))
        res.append([(r.u, r.v) for r in (probe(st, p) for p in pts)])
    # canonical numbering makes the pipeline bitwise invariant, well inside 1e-12
    np.testing.assert_array_equal(res[0], res[1])


@pytest.mark.parametrize("kind", KINDS)
def test_isotropic_material_ignores_fibre_angle(kind):
    iso = EngineeringParams(1.0, 0.3, 1.0)
    mesh = build_mesh(kind, 6, DomainSpec.beam())
    vals = []
    for th in (0.0, 0.6, 2.0):
        st = solve(assemble(beam_bvp(mesh, iso, FibreField.constant(th), "a"), kind))
        vals.append(st.u)
    np.testing.assert_allclose(vals[1], vals[0], atol=1e-12 * np.abs(vals[0]).max())
    np.testing.assert_allclose(vals[2], vals[0], atol=1e-12 * np.abs(vals[0]).max())


def test_probe_at_vertex_is_exact():
    st = _beam_state("quad", 4)
    k = 7
    rec = probe(st, tuple(st.disc.nodes[k]))
    assert rec.node == k and rec.distance == 0.0
    assert (rec.u, rec.v) == (st.u[2 * k], st.u[2 * k + 1])
    assert st.probes == [rec]
    with pytest.raises(ValueError):
        probe(assemble(beam_bvp(build_mesh("quad", 2, DomainSpec.beam()), MAT, FIBRE), "quad"), (0, 0))


@pytest.mark.parametrize("kind", KINDS)
def test_body_force_total(kind):
    spec = BVPSpec(unit_mesh(kind, 4), MAT, FIBRE, dirichlet=[Dirichlet("Left")], body_force=lambda x: np.tile([0.0, -2.0], (len(x), 1)))
    st = assemble(spec, kind)
    assert st.F[1::2].sum() == pytest.approx(-2.0, rel=1e-12)
    assert st.F[0::2].sum() == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("kind", ["quad", "q2"])
def test_linear_traction_resultants(kind):
    bs = BeamSpec()
    mesh = build_mesh(kind, 7, DomainSpec.beam())
    spec = BVPSpec(mesh, MAT, FIBRE, dirichlet=[Dirichlet("Left")], neumann=[Neumann("Right", lambda x: np.column_stack([bs.traction_x(x[:, 1]), 0 * x[:, 1]]))])
    st = assemble(spec, kind)
    X = st.disc.nodes
    # zero net force; moment is the integral of (2F/h) y^2 over [-h/2, h/2]
    assert st.F[0::2].sum() == pytest.approx(0.0, abs=1e-12)
    assert (X[:, 1] * st.F[0::2]).sum() == pytest.approx(2 * 30.0 / 2.0 * 2.0 / 3.0, rel=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_p1_equals_direct_isotropic_assembly(kind):
    from tivem.constitutive import TIConstants, engineering_to_ti

    iso = EngineeringParams(1.0, 0.3, 1.0)
    c = engineering_to_ti(iso)
    mesh = build_mesh(kind, 5, DomainSpec.beam())
    K_ti = assemble(beam_bvp(mesh, iso, FibreField.constant(0.9), "a"), kind).K.toarray()
    lam, mu = 0.3 / (1.3 * 0.4), 1.0 / 2.6
    spec = beam_bvp(mesh, iso, FibreField.constant(0.9), "a")
    spec.consts = TIConstants.isotropic(lam, mu)
    K_iso = assemble(spec, kind).K.toarray()
    assert c.alpha == 0.0
    np.testing.assert_allclose(K_ti, K_iso, atol=1e-12 * np.abs(K_iso).max())
