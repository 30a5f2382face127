"""Shared fixtures: reference beam, canonical configurations, state samplers."""

import numpy as np
import pytest

import passivebeam as pb

DEFAULT_BEAM = dict(rho=1.0, lambda_rigidity=1.0, length=1.0, tip_inertia=0.1, tip_mass=0.1)


@pytest.fixture(scope="session")
def beam():
    return pb.BeamParams(**DEFAULT_BEAM)


def make_system(beam, n_elements, clamp_left=True):
    mesh = pb.build_mesh(beam, n_elements)
    return pb.assemble(beam, mesh, clamp_left=clamp_left)


@pytest.fixture(scope="session")
def sys4(beam):
    return make_system(beam, 4)


@pytest.fixture(scope="session")
def sys8(beam):
    return make_system(beam, 8)


def default_config(beam):
    """Cubic springs, saturating dampers, cubic-drift blocks."""
    sd = lambda: pb.SpringDamperLaw(
        damper=pb.make_law("tanh", gain=2.0), spring=pb.make_law("cubic")
    )
    return pb.ClosedLoopConfig(
        beam=beam,
        sd_rotational=sd(),
        sd_translational=sd(),
        block_rotational=pb.make_block("cubic-drift"),
        block_translational=pb.make_block("cubic-drift"),
    )


def linear_config(beam, damper_slope=1.0, spring_slope=1.0):
    sd = lambda: pb.SpringDamperLaw(
        damper=pb.make_law("linear", slope=damper_slope),
        spring=pb.make_law("linear", slope=spring_slope),
    )
    return pb.ClosedLoopConfig(
        beam=beam,
        sd_rotational=sd(),
        sd_translational=sd(),
        block_rotational=pb.make_block("linear"),
        block_translational=pb.make_block("linear"),
    )


def undamped_config(beam, spring_slope=1.0):
    """Zero dampers, linear springs, input-decoupled blocks: the projected flow."""
    sd = lambda: pb.SpringDamperLaw(
        damper=pb.make_law("zero"), spring=pb.make_law("linear", slope=spring_slope)
    )
    return pb.ClosedLoopConfig(
        beam=beam,
        sd_rotational=sd(),
        sd_translational=sd(),
        block_rotational=pb.make_block("linear", gain=0.0),
        block_translational=pb.make_block("linear", gain=0.0),
    )


def kappa_zero_config(beam):
    """Linear springs, saturating dampers, cubic-drift blocks."""
    sd = lambda: pb.SpringDamperLaw(
        damper=pb.make_law("tanh", gain=2.0), spring=pb.make_law("linear")
    )
    return pb.ClosedLoopConfig(
        beam=beam,
        sd_rotational=sd(),
        sd_translational=sd(),
        block_rotational=pb.make_block("cubic-drift"),
        block_translational=pb.make_block("cubic-drift"),
    )


def white_state(sys, config, rng, scale=1.0):
    """Rough random state: independent normal DOFs."""
    return pb.StateVector(
        u_dofs=scale * rng.standard_normal(sys.n_dof),
        v_dofs=scale * rng.standard_normal(sys.n_dof),
        z1=scale * rng.standard_normal(config.block_rotational.dim),
        z2=scale * rng.standard_normal(config.block_translational.dim),
    )


def smooth_state(sys, config, rng, scale=0.5):
    """Random state interpolating low-order polynomials (clamped at x=0)."""
    length = sys.beam.length

    def poly_pair(coeffs):
        def value(x):
            return sum(c * (x / length) ** (k + 2) for k, c in enumerate(coeffs))

        def slope(x):
            return sum(
                c * (k + 2) * x ** (k + 1) / length ** (k + 2) for k, c in enumerate(coeffs)
            )

        return value, slope

    u = pb.interpolate(sys, *poly_pair(scale * rng.standard_normal(4)))
    v = pb.interpolate(sys, *poly_pair(scale * rng.standard_normal(4)))
    return pb.StateVector(
        u_dofs=u,
        v_dofs=v,
        z1=scale * rng.standard_normal(config.block_rotational.dim),
        z2=scale * rng.standard_normal(config.block_translational.dim),
    )
