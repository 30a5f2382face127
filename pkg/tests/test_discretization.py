"""Meshes, element matrices, assembly, and the energy Gram matrix."""

import numpy as np
import pytest
import sympy

import passivebeam as pb
from passivebeam.discretization import displacement_gram, element_matrices
from passivebeam.dynamics import pack
from passivebeam.errors import InvalidElementCount, NotPositiveDefinite

from conftest import linear_config, make_system, white_state


def test_build_mesh_examples(beam):
    assert np.allclose(pb.build_mesh(beam, 1).nodes, [0.0, 1.0])
    assert np.allclose(pb.build_mesh(beam, 4).nodes, [0.0, 0.25, 0.5, 0.75, 1.0])
    long_beam = pb.BeamParams(rho=1.0, lambda_rigidity=1.0, length=2.0, tip_inertia=0.1, tip_mass=0.1)
    assert np.allclose(pb.build_mesh(long_beam, 2).nodes, [0.0, 1.0, 2.0])


def test_build_mesh_rejects_zero_elements(beam):
    with pytest.raises(InvalidElementCount):
        pb.build_mesh(beam, 0)


def test_unit_element_stiffness_matrix():
    _, ke = element_matrices(1.0, rho=1.0, rigidity=1.0)
    expected = np.array(
        [
            [12.0, 6.0, -12.0, 6.0],
            [6.0, 4.0, -6.0, 2.0],
            [-12.0, -6.0, 12.0, -6.0],
            [6.0, 2.0, -6.0, 4.0],
        ]
    )
    assert np.allclose(ke, expected, atol=1e-12)


def test_unit_element_mass_matrix():
    me, _ = element_matrices(1.0, rho=1.0, rigidity=1.0)
    expected = (
        np.array(
            [
                [156.0, 22.0, 54.0, -13.0],
                [22.0, 4.0, 13.0, -3.0],
                [54.0, 13.0, 156.0, -22.0],
                [-13.0, -3.0, -22.0, 4.0],
            ]
        )
        / 420.0
    )
    assert np.allclose(me, expected, atol=1e-14)


def test_element_matrices_match_symbolic_integration():
    # independent oracle: exact symbolic integration at a non-unit element size
    h, rho, lam = 0.5, 2.0, 3.0
    x = sympy.Symbol("x")
    xi = x / h
    shapes = [
        1 - 3 * xi**2 + 2 * xi**3,
        h * xi * (1 - xi) ** 2,
        xi**2 * (3 - 2 * xi),
        h * xi**2 * (xi - 1),
    ]
    me_exact = np.array(
        [
            [float(rho * sympy.integrate(a * b, (x, 0, h))) for b in shapes]
            for a in shapes
        ]
    )
    ke_exact = np.array(
        [
            [
                float(lam * sympy.integrate(sympy.diff(a, x, 2) * sympy.diff(b, x, 2), (x, 0, h)))
                for b in shapes
            ]
            for a in shapes
        ]
    )
    me, ke = element_matrices(h, rho=rho, rigidity=lam)
    assert np.allclose(me, me_exact, rtol=1e-13, atol=1e-15)
    assert np.allclose(ke, ke_exact, rtol=1e-13, atol=1e-12)


def test_unclamped_stiffness_annihilates_rigid_modes(beam):
    sys_free = make_system(beam, 5, clamp_left=False)
    constant = pb.interpolate(sys_free, lambda x: 1.0, lambda x: 0.0)
    affine = pb.interpolate(sys_free, lambda x: x, lambda x: 1.0)
    scale = np.abs(sys_free.stiffness_beam).max()
    assert np.abs(sys_free.stiffness_beam @ constant).max() <= 1e-12 * scale
    assert np.abs(sys_free.stiffness_beam @ affine).max() <= 1e-12 * scale


def test_clamped_matrices_symmetric_positive_definite(sys8):
    assert np.array_equal(sys8.mass_beam, sys8.mass_beam.T)
    assert np.array_equal(sys8.stiffness_beam, sys8.stiffness_beam.T)
    assert np.linalg.eigvalsh(sys8.mass_beam).min() > 0.0
    assert np.linalg.eigvalsh(sys8.stiffness_beam).min() > 0.0


def test_tip_terms_added_to_mass(sys8, beam):
    diff = sys8.mass_tip - sys8.mass_beam
    expected = np.zeros_like(diff)
    expected[sys8.tip_value_index, sys8.tip_value_index] = beam.tip_mass
    expected[sys8.tip_slope_index, sys8.tip_slope_index] = beam.tip_inertia
    assert np.array_equal(diff, expected)


def test_quadratic_interpolant_curvature_energy_exact(sys8, beam):
    # x^2 lies in the cubic space; its curvature energy is rigidity * 4 * L
    u = pb.interpolate(sys8, lambda x: x**2, lambda x: 2.0 * x)
    energy = float(u @ (sys8.stiffness_beam @ u))
    exact = beam.lambda_rigidity * 4.0 * beam.length
    assert energy == pytest.approx(exact, rel=1e-13)


def test_gram_zero_state_and_velocity_only_state(sys8, beam):
    config = linear_config(beam)
    lin1 = pb.linearize_block(config.block_rotational)
    lin2 = pb.linearize_block(config.block_translational)
    gram = pb.assemble_gram(sys8, config, lin1, lin2)
    assert np.array_equal(gram, gram.T)
    zero = pb.zero_state(sys8, config)
    assert float(pack(zero) @ (gram @ pack(zero))) == 0.0
    # velocity-only state: norm is the rho-mass energy plus the payload terms
    v = pb.interpolate(sys8, lambda x: np.sin(np.pi * x / 2), lambda x: np.pi / 2 * np.cos(np.pi * x / 2))
    state = pb.StateVector(u_dofs=np.zeros(sys8.n_dof), v_dofs=v, z1=np.zeros(1), z2=np.zeros(1))
    qn2 = float(pack(state) @ (gram @ pack(state)))
    expected = float(v @ (sys8.mass_beam @ v))
    expected += beam.tip_inertia * v[sys8.tip_slope_index] ** 2
    expected += beam.tip_mass * v[sys8.tip_value_index] ** 2
    assert qn2 == pytest.approx(expected, rel=1e-14)


def test_gram_norm_doubles_energy_for_linear_loop(sys8, beam):
    config = linear_config(beam)
    lin1 = pb.linearize_block(config.block_rotational)
    lin2 = pb.linearize_block(config.block_translational)
    gram = pb.assemble_gram(sys8, config, lin1, lin2)
    rng = np.random.default_rng(2)
    for _ in range(10):
        state = white_state(sys8, config, rng)
        qn2 = float(pack(state) @ (gram @ pack(state)))
        assert qn2 == pytest.approx(2.0 * pb.eval_H(state, sys8, config).total, rel=1e-12)


def test_gram_rejects_indefinite_spring(sys8, beam):
    sd = pb.SpringDamperLaw(
        damper=pb.make_law("linear"), spring=pb.make_law("linear", slope=-1e5)
    )
    config = pb.ClosedLoopConfig(
        beam=beam,
        sd_rotational=sd,
        sd_translational=sd,
        block_rotational=pb.make_block("linear"),
        block_translational=pb.make_block("linear"),
    )
    lin1 = pb.linearize_block(config.block_rotational)
    lin2 = pb.linearize_block(config.block_translational)
    with pytest.raises(NotPositiveDefinite):
        pb.assemble_gram(sys8, config, lin1, lin2)


def test_displacement_gram_adds_spring_slopes(sys4):
    q = displacement_gram(sys4, 2.5, 1.5)
    base = sys4.stiffness_beam
    assert q[sys4.tip_slope_index, sys4.tip_slope_index] == pytest.approx(
        base[sys4.tip_slope_index, sys4.tip_slope_index] + 2.5
    )
    assert q[sys4.tip_value_index, sys4.tip_value_index] == pytest.approx(
        base[sys4.tip_value_index, sys4.tip_value_index] + 1.5
    )


def test_export_matrix_roundtrip(tmp_path, sys4):
    import scipy.io

    path = tmp_path / "mass.mtx"
    pb.export_matrix(path, sys4.mass_beam)
    back = np.asarray(scipy.io.mmread(str(path)))
    assert np.allclose(back, sys4.mass_beam, rtol=0, atol=1e-12)
