"""The discrete closed-loop generator, its linear/nonlinear split, and the
Lyapunov functional with its closed-form rate.

The state keeps (u, v, z1, z2); the tip momenta are derived quantities,
xi = J v'(L) and psi = M v(L), so every state satisfies the domain coupling
by construction. Boundary feedback enters through virtual work at the tip
DOFs of the velocity equation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beam_model import BlockLinearization, ClosedLoopConfig, ScalarLaw
from .discretization import DiscreteSystem
from .errors import DimensionMismatch

#: per-step energy increase budget, as a fraction of H(y0)
ENERGY_INCREASE_ETA = 1e-8


@dataclass(frozen=True)
class StateVector:
    """Discrete state (u, v, z1, z2) with clamped DOFs removed.

    The tip momenta are accessors, never stored: xi = J * v'(L) and
    psi = M * v(L) read the tip DOFs of the velocity field.
    """

    u_dofs: np.ndarray
    v_dofs: np.ndarray
    z1: np.ndarray
    z2: np.ndarray

    def __post_init__(self):
        for name in ("u_dofs", "v_dofs", "z1", "z2"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def xi(self, sys: DiscreteSystem) -> float:
        return sys.beam.tip_inertia * self.v_dofs[sys.tip_slope_index]

    def psi(self, sys: DiscreteSystem) -> float:
        return sys.beam.tip_mass * self.v_dofs[sys.tip_value_index]


@dataclass(frozen=True)
class Tangent:
    """Time-derivative of a state.

    ``v_load`` keeps the pre-solve load of the velocity equation
    (mass_tip @ v_dot); energy-rate pairings use it to avoid the mass solve.
    """

    u_dot: np.ndarray
    v_dot: np.ndarray
    z1_dot: np.ndarray
    z2_dot: np.ndarray
    v_load: np.ndarray | None = None


@dataclass(frozen=True)
class EnergyBreakdown:
    """Additive pieces of the Lyapunov functional H."""

    beam_strain: float
    beam_kinetic: float
    tip_kinetic: float
    spring_potential_rot: float
    spring_potential_tr: float
    storage_z1: float
    storage_z2: float
    total: float

    CSV_COLUMNS = (
        "t",
        "total",
        "beam_strain",
        "beam_kinetic",
        "tip_kinetic",
        "spring_rot",
        "spring_tr",
        "storage_z1",
        "storage_z2",
    )

    def csv_row(self, t: float) -> tuple[float, ...]:
        return (
            t,
            self.total,
            self.beam_strain,
            self.beam_kinetic,
            self.tip_kinetic,
            self.spring_potential_rot,
            self.spring_potential_tr,
            self.storage_z1,
            self.storage_z2,
        )


def _check_dims(state: StateVector, sys: DiscreteSystem, config: ClosedLoopConfig):
    if len(state.u_dofs) != sys.n_dof or len(state.v_dofs) != sys.n_dof:
        raise DimensionMismatch(
            f"state has {len(state.u_dofs)}/{len(state.v_dofs)} beam DOFs, system has {sys.n_dof}"
        )
    if len(state.z1) != config.block_rotational.dim:
        raise DimensionMismatch("z1 dimension does not match the rotational block")
    if len(state.z2) != config.block_translational.dim:
        raise DimensionMismatch("z2 dimension does not match the translational block")


def tip_traces(state: StateVector, sys: DiscreteSystem) -> tuple[float, float, float, float]:
    """(u(L), u'(L), v(L), v'(L)) read off the Hermite tip DOFs."""
    iv, isl = sys.tip_value_index, sys.tip_slope_index
    return (
        float(state.u_dofs[iv]),
        float(state.u_dofs[isl]),
        float(state.v_dofs[iv]),
        float(state.v_dofs[isl]),
    )


def zero_state(sys: DiscreteSystem, config: ClosedLoopConfig) -> StateVector:
    return StateVector(
        u_dofs=np.zeros(sys.n_dof),
        v_dofs=np.zeros(sys.n_dof),
        z1=np.zeros(config.block_rotational.dim),
        z2=np.zeros(config.block_translational.dim),
    )


def pack(state: StateVector) -> np.ndarray:
    return np.concatenate([state.u_dofs, state.v_dofs, state.z1, state.z2])


def pack_tangent(tangent: Tangent) -> np.ndarray:
    return np.concatenate([tangent.u_dot, tangent.v_dot, tangent.z1_dot, tangent.z2_dot])


def unpack(vec: np.ndarray, sys: DiscreteSystem, config: ClosedLoopConfig) -> StateVector:
    n = sys.n_dof
    n1 = config.block_rotational.dim
    return StateVector(
        u_dofs=vec[:n],
        v_dofs=vec[n : 2 * n],
        z1=vec[2 * n : 2 * n + n1],
        z2=vec[2 * n + n1 :],
    )


# ---------------------------------------------------------------------------
# Spring potential quadrature
# ---------------------------------------------------------------------------

def _eval_array(f, x: np.ndarray) -> np.ndarray:
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape == x.shape:
            return y
    except Exception:
        pass
    return np.array([float(f(v)) for v in x])


def _simpson(f, a: float, b: float, intervals: int) -> float:
    x = np.linspace(a, b, intervals + 1)
    y = _eval_array(f, x)
    h = (b - a) / intervals
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def spring_potential(law: ScalarLaw, s: float, tol: float = 1e-12) -> float:
    """Integral of the spring law from 0 to s.

    Composite Simpson, doubled with Richardson extrapolation until the
    absolute update drops below ``tol``.
    """
    if s == 0.0:
        return 0.0
    intervals = 16
    coarse = _simpson(law.eval, 0.0, s, intervals)
    for _ in range(20):
        intervals *= 2
        fine = _simpson(law.eval, 0.0, s, intervals)
        err = (fine - coarse) / 15.0
        if abs(err) <= tol:
            return fine + err
        coarse = fine
    return coarse


# ---------------------------------------------------------------------------
# Lyapunov functional and its rate
# ---------------------------------------------------------------------------

def eval_H(state: StateVector, sys: DiscreteSystem, config: ClosedLoopConfig) -> EnergyBreakdown:
    """Total closed-loop energy, split into its additive parts."""
    _check_dims(state, sys, config)
    u, v = state.u_dofs, state.v_dofs
    u_l, up_l, v_l, vp_l = tip_traces(state, sys)
    beam = sys.beam

    strain = 0.5 * float(u @ (sys.stiffness_beam @ u))
    kinetic = 0.5 * float(v @ (sys.mass_beam @ v))
    xi = beam.tip_inertia * vp_l
    psi = beam.tip_mass * v_l
    tip = xi**2 / (2.0 * beam.tip_inertia) + psi**2 / (2.0 * beam.tip_mass)
    v_rot = spring_potential(config.sd_rotational.spring, up_l)
    v_tr = spring_potential(config.sd_translational.spring, u_l)
    s1 = float(config.block_rotational.storage(state.z1))
    s2 = float(config.block_translational.storage(state.z2))
    total = strain + kinetic + tip + v_rot + v_tr + s1 + s2
    return EnergyBreakdown(
        beam_strain=strain,
        beam_kinetic=kinetic,
        tip_kinetic=tip,
        spring_potential_rot=v_rot,
        spring_potential_tr=v_tr,
        storage_z1=s1,
        storage_z2=s2,
        total=total,
    )


def eval_Hdot(state: StateVector, sys: DiscreteSystem, config: ClosedLoopConfig) -> float:
    """Closed-form energy rate: block dissipation minus damper power at the tip."""
    _check_dims(state, sys, config)
    _, _, v_l, vp_l = tip_traces(state, sys)
    b1, b2 = config.block_rotational, config.block_translational
    d1, d2 = config.sd_rotational.damper, config.sd_translational.damper
    rate = float(np.asarray(b1.drift(state.z1)) @ np.asarray(b1.storage_grad(state.z1)))
    rate += float(np.asarray(b2.drift(state.z2)) @ np.asarray(b2.storage_grad(state.z2)))
    rate -= float(d1.eval(vp_l)) * vp_l
    rate -= float(d2.eval(v_l)) * v_l
    return rate


# ---------------------------------------------------------------------------
# Generator and its split
# ---------------------------------------------------------------------------

def _tangent_from_load(state, sys, load, z1_dot, z2_dot) -> Tangent:
    return Tangent(
        u_dot=state.v_dofs.copy(),
        v_dot=sys.mass_tip_inv @ load,
        z1_dot=np.asarray(z1_dot, dtype=float),
        z2_dot=np.asarray(z2_dot, dtype=float),
        v_load=load,
    )


def apply_generator(state: StateVector, sys: DiscreteSystem, config: ClosedLoopConfig) -> Tangent:
    """Full nonlinear generator applied to a state."""
    _check_dims(state, sys, config)
    u_l, up_l, v_l, vp_l = tip_traces(state, sys)
    blk1, blk2 = config.block_rotational, config.block_translational
    sd1, sd2 = config.sd_rotational, config.sd_translational

    torque = float(blk1.output(state.z1)) + float(sd1.damper.eval(vp_l)) + float(sd1.spring.eval(up_l))
    force = float(blk2.output(state.z2)) + float(sd2.damper.eval(v_l)) + float(sd2.spring.eval(u_l))

    load = -(sys.stiffness_beam @ state.u_dofs)
    load[sys.tip_slope_index] -= torque
    load[sys.tip_value_index] -= force

    z1_dot = np.asarray(blk1.drift(state.z1)) + np.asarray(blk1.input_gain(state.z1)) * vp_l
    z2_dot = np.asarray(blk2.drift(state.z2)) + np.asarray(blk2.input_gain(state.z2)) * v_l
    return _tangent_from_load(state, sys, load, z1_dot, z2_dot)


def apply_linear_part(
    state: StateVector,
    sys: DiscreteSystem,
    config: ClosedLoopConfig,
    lin1: BlockLinearization,
    lin2: BlockLinearization,
) -> Tangent:
    """Linearized generator: laws and blocks replaced by their origin slopes."""
    _check_dims(state, sys, config)
    u_l, up_l, v_l, vp_l = tip_traces(state, sys)
    d1 = config.sd_rotational.damper_slope
    k1 = config.sd_rotational.spring_slope
    d2 = config.sd_translational.damper_slope
    k2 = config.sd_translational.spring_slope

    torque = float(lin1.C @ state.z1) + d1 * vp_l + k1 * up_l
    force = float(lin2.C @ state.z2) + d2 * v_l + k2 * u_l

    load = -(sys.stiffness_beam @ state.u_dofs)
    load[sys.tip_slope_index] -= torque
    load[sys.tip_value_index] -= force

    z1_dot = lin1.A @ state.z1 + lin1.B * vp_l
    z2_dot = lin2.A @ state.z2 + lin2.B * v_l
    return _tangent_from_load(state, sys, load, z1_dot, z2_dot)


def remainder_forces(
    state: StateVector,
    sys: DiscreteSystem,
    config: ClosedLoopConfig,
    lin1: BlockLinearization,
    lin2: BlockLinearization,
) -> tuple[float, float]:
    """Nonlinear remainder of the tip torque and force (gamma + delta + kappa)."""
    u_l, up_l, v_l, vp_l = tip_traces(state, sys)
    blk1, blk2 = config.block_rotational, config.block_translational
    sd1, sd2 = config.sd_rotational, config.sd_translational
    gamma1 = float(blk1.output(state.z1)) - float(lin1.C @ state.z1)
    gamma2 = float(blk2.output(state.z2)) - float(lin2.C @ state.z2)
    delta1 = float(sd1.damper.eval(vp_l)) - sd1.damper_slope * vp_l
    delta2 = float(sd2.damper.eval(v_l)) - sd2.damper_slope * v_l
    kappa1 = float(sd1.spring.eval(up_l)) - sd1.spring_slope * up_l
    kappa2 = float(sd2.spring.eval(u_l)) - sd2.spring_slope * u_l
    return gamma1 + delta1 + kappa1, gamma2 + delta2 + kappa2


def apply_nonlinear_part(
    state: StateVector,
    sys: DiscreteSystem,
    config: ClosedLoopConfig,
    lin1: BlockLinearization,
    lin2: BlockLinearization,
) -> Tangent:
    """Remainder part of the generator.

    Only the remainder loads at the two tip DOFs and the remainder block
    drifts are nonzero; the displacement row vanishes identically.
    """
    _check_dims(state, sys, config)
    _, _, v_l, vp_l = tip_traces(state, sys)
    blk1, blk2 = config.block_rotational, config.block_translational
    torque_rem, force_rem = remainder_forces(state, sys, config, lin1, lin2)

    load = np.zeros(sys.n_dof)
    load[sys.tip_slope_index] = -torque_rem
    load[sys.tip_value_index] = -force_rem

    z1_dot = (np.asarray(blk1.drift(state.z1)) - lin1.A @ state.z1) + (
        np.asarray(blk1.input_gain(state.z1)) - lin1.B
    ) * vp_l
    z2_dot = (np.asarray(blk2.drift(state.z2)) - lin2.A @ state.z2) + (
        np.asarray(blk2.input_gain(state.z2)) - lin2.B
    ) * v_l
    return Tangent(
        u_dot=np.zeros(sys.n_dof),
        v_dot=sys.mass_tip_inv @ load,
        z1_dot=z1_dot,
        z2_dot=z2_dot,
        v_load=load,
    )


def add_tangents(a: Tangent, b: Tangent) -> Tangent:
    load = None
    if a.v_load is not None and b.v_load is not None:
        load = a.v_load + b.v_load
    return Tangent(
        u_dot=a.u_dot + b.u_dot,
        v_dot=a.v_dot + b.v_dot,
        z1_dot=a.z1_dot + b.z1_dot,
        z2_dot=a.z2_dot + b.z2_dot,
        v_load=load,
    )


# ---------------------------------------------------------------------------
# Energy inner product helpers
# ---------------------------------------------------------------------------

def _spring_slopes(config: ClosedLoopConfig) -> tuple[float, float]:
    return config.sd_rotational.spring_slope, config.sd_translational.spring_slope


def state_qnorm2(
    state: StateVector,
    sys: DiscreteSystem,
    config: ClosedLoopConfig,
    lin1: BlockLinearization,
    lin2: BlockLinearization,
) -> float:
    """Squared energy norm of a state (the Gram quadratic form)."""
    k1, k2 = _spring_slopes(config)
    u, v = state.u_dofs, state.v_dofs
    u_l, up_l = u[sys.tip_value_index], u[sys.tip_slope_index]
    val = float(u @ (sys.stiffness_beam @ u)) + k1 * up_l**2 + k2 * u_l**2
    val += float(v @ (sys.mass_tip @ v))
    val += float(state.z1 @ (lin1.P @ state.z1))
    val += float(state.z2 @ (lin2.P @ state.z2))
    return val


def tangent_qnorm(
    tangent: Tangent,
    sys: DiscreteSystem,
    config: ClosedLoopConfig,
    lin1: BlockLinearization,
    lin2: BlockLinearization,
) -> float:
    """Energy norm of a tangent vector."""
    k1, k2 = _spring_slopes(config)
    ud, vd = tangent.u_dot, tangent.v_dot
    val = float(ud @ (sys.stiffness_beam @ ud))
    val += k1 * ud[sys.tip_slope_index] ** 2 + k2 * ud[sys.tip_value_index] ** 2
    val += float(vd @ (sys.mass_tip @ vd))
    val += float(tangent.z1_dot @ (lin1.P @ tangent.z1_dot))
    val += float(tangent.z2_dot @ (lin2.P @ tangent.z2_dot))
    return float(np.sqrt(max(val, 0.0)))


def pair_with_state(
    tangent: Tangent,
    state: StateVector,
    sys: DiscreteSystem,
    config: ClosedLoopConfig,
    lin1: BlockLinearization,
    lin2: BlockLinearization,
) -> float:
    """Energy inner product of a tangent with a state.

    The velocity term is evaluated in load form, v_load . v, which equals
    (mass v_dot) . v without re-applying the mass matrix; this keeps the
    dissipation identity sharp to roundoff.
    """
    k1, k2 = _spring_slopes(config)
    u, v = state.u_dofs, state.v_dofs
    iv, isl = sys.tip_value_index, sys.tip_slope_index
    val = float(tangent.u_dot @ (sys.stiffness_beam @ u))
    val += k1 * tangent.u_dot[isl] * u[isl] + k2 * tangent.u_dot[iv] * u[iv]
    if tangent.v_load is not None:
        val += float(tangent.v_load @ v)
    else:
        val += float(tangent.v_dot @ (sys.mass_tip @ v))
    val += float(tangent.z1_dot @ (lin1.P @ state.z1))
    val += float(tangent.z2_dot @ (lin2.P @ state.z2))
    return val


# ---------------------------------------------------------------------------
# Low-dimensional view of the nonlinearity, shared by the Newton Jacobian and
# the time-differentiated system
# ---------------------------------------------------------------------------

class RemainderMap:
    """The nonlinear remainder as a map of the few coordinates it touches.

    q = (u'(L), u(L), v'(L), v(L), z1, z2) determines the remainder tip loads
    and block drifts F(q) = (g_s, g_v, h1, h2); the full remainder tangent is
    a constant placement of F. The placement matrix spreads the two tip loads
    through the inverse tip mass and injects the block rows directly.
    """

    def __init__(self, sys: DiscreteSystem, config: ClosedLoopConfig,
                 lin1: BlockLinearization, lin2: BlockLinearization):
        self.sys = sys
        self.config = config
        self.lin1 = lin1
        self.lin2 = lin2
        n = sys.n_dof
        n1 = config.block_rotational.dim
        n2 = config.block_translational.dim
        self.n1, self.n2 = n1, n2
        self.m = 4 + n1 + n2
        self.p = 2 + n1 + n2
        total = 2 * n + n1 + n2
        # flat indices of q inside the packed state
        self.q_indices = np.concatenate(
            [
                [sys.tip_slope_index, sys.tip_value_index,
                 n + sys.tip_slope_index, n + sys.tip_value_index],
                np.arange(2 * n, 2 * n + n1),
                np.arange(2 * n + n1, total),
            ]
        ).astype(int)
        placement = np.zeros((total, self.p))
        placement[n : 2 * n, 0] = sys.mass_tip_inv[:, sys.tip_slope_index]
        placement[n : 2 * n, 1] = sys.mass_tip_inv[:, sys.tip_value_index]
        placement[2 * n : 2 * n + n1, 2 : 2 + n1] = np.eye(n1)
        placement[2 * n + n1 :, 2 + n1 :] = np.eye(n2)
        self.placement = placement

    def split_q(self, q: np.ndarray):
        up_l, u_l, vp_l, v_l = q[0], q[1], q[2], q[3]
        z1 = q[4 : 4 + self.n1]
        z2 = q[4 + self.n1 :]
        return up_l, u_l, vp_l, v_l, z1, z2

    def value(self, q: np.ndarray) -> np.ndarray:
        """F(q): remainder tip loads followed by remainder block drifts."""
        up_l, u_l, vp_l, v_l, z1, z2 = self.split_q(q)
        c = self.config
        blk1, blk2 = c.block_rotational, c.block_translational
        sd1, sd2 = c.sd_rotational, c.sd_translational
        g_s = -(
            (float(blk1.output(z1)) - float(self.lin1.C @ z1))
            + (float(sd1.damper.eval(vp_l)) - sd1.damper_slope * vp_l)
            + (float(sd1.spring.eval(up_l)) - sd1.spring_slope * up_l)
        )
        g_v = -(
            (float(blk2.output(z2)) - float(self.lin2.C @ z2))
            + (float(sd2.damper.eval(v_l)) - sd2.damper_slope * v_l)
            + (float(sd2.spring.eval(u_l)) - sd2.spring_slope * u_l)
        )
        h1 = (np.asarray(blk1.drift(z1)) - self.lin1.A @ z1) + (
            np.asarray(blk1.input_gain(z1)) - self.lin1.B
        ) * vp_l
        h2 = (np.asarray(blk2.drift(z2)) - self.lin2.A @ z2) + (
            np.asarray(blk2.input_gain(z2)) - self.lin2.B
        ) * v_l
        return np.concatenate([[g_s], [g_v], h1, h2])

    def jacobian_fd(self, q: np.ndarray, scale: float) -> np.ndarray:
        """Forward-difference Jacobian of F with step 1e-7 * (1 + scale).

        Exploits the separable structure: each output piece depends on one
        trace or one block state, so only the coupled pieces are re-evaluated
        (the omitted differences vanish identically).
        """
        h = 1e-7 * (1.0 + scale)
        up_l, u_l, vp_l, v_l, z1, z2 = self.split_q(q)
        c = self.config
        blk1, blk2 = c.block_rotational, c.block_translational
        sd1, sd2 = c.sd_rotational, c.sd_translational
        n1, n2 = self.n1, self.n2
        jac = np.zeros((self.p, self.m))

        def law_fd(law: ScalarLaw, slope: float, s: float) -> float:
            return (float(law.eval(s + h)) - float(law.eval(s))) / h - slope

        # trace columns: spring/damper remainders and the input-gain remainder
        jac[0, 0] = -law_fd(sd1.spring, sd1.spring_slope, up_l)
        jac[0, 2] = -law_fd(sd1.damper, sd1.damper_slope, vp_l)
        jac[1, 1] = -law_fd(sd2.spring, sd2.spring_slope, u_l)
        jac[1, 3] = -law_fd(sd2.damper, sd2.damper_slope, v_l)
        jac[2 : 2 + n1, 2] = np.asarray(blk1.input_gain(z1)) - self.lin1.B
        jac[2 + n1 :, 3] = np.asarray(blk2.input_gain(z2)) - self.lin2.B

        # rotational block columns
        out0 = float(blk1.output(z1))
        drift0 = np.asarray(blk1.drift(z1))
        gain0 = np.asarray(blk1.input_gain(z1))
        for j in range(n1):
            zj = z1.copy()
            zj[j] += h
            jac[0, 4 + j] = -((float(blk1.output(zj)) - out0) / h - self.lin1.C[j])
            jac[2 : 2 + n1, 4 + j] = (
                (np.asarray(blk1.drift(zj)) - drift0) / h - self.lin1.A[:, j]
                + vp_l * (np.asarray(blk1.input_gain(zj)) - gain0) / h
            )
        # translational block columns
        out0 = float(blk2.output(z2))
        drift0 = np.asarray(blk2.drift(z2))
        gain0 = np.asarray(blk2.input_gain(z2))
        for j in range(n2):
            zj = z2.copy()
            zj[j] += h
            jac[1, 4 + n1 + j] = -((float(blk2.output(zj)) - out0) / h - self.lin2.C[j])
            jac[2 + n1 :, 4 + n1 + j] = (
                (np.asarray(blk2.drift(zj)) - drift0) / h - self.lin2.A[:, j]
                + v_l * (np.asarray(blk2.input_gain(zj)) - gain0) / h
            )
        return jac

    def jacobian_analytic(self, q: np.ndarray) -> np.ndarray:
        """Exact Jacobian of F from the supplied law and block derivatives."""
        up_l, u_l, vp_l, v_l, z1, z2 = self.split_q(q)
        c = self.config
        blk1, blk2 = c.block_rotational, c.block_translational
        sd1, sd2 = c.sd_rotational, c.sd_translational
        n1, n2 = self.n1, self.n2
        jac = np.zeros((self.p, self.m))
        # g_s row
        jac[0, 0] = -(float(sd1.spring.deriv(up_l)) - sd1.spring_slope)
        jac[0, 2] = -(float(sd1.damper.deriv(vp_l)) - sd1.damper_slope)
        jac[0, 4 : 4 + n1] = -(np.asarray(blk1.output_grad(z1)) - self.lin1.C)
        # g_v row
        jac[1, 1] = -(float(sd2.spring.deriv(u_l)) - sd2.spring_slope)
        jac[1, 3] = -(float(sd2.damper.deriv(v_l)) - sd2.damper_slope)
        jac[1, 4 + n1 :] = -(np.asarray(blk2.output_grad(z2)) - self.lin2.C)
        # h1 rows
        jac[2 : 2 + n1, 2] = np.asarray(blk1.input_gain(z1)) - self.lin1.B
        jac[2 : 2 + n1, 4 : 4 + n1] = (
            np.asarray(blk1.drift_jac(z1)) - self.lin1.A
        ) + vp_l * np.asarray(blk1.input_jac(z1))
        # h2 rows
        jac[2 + n1 :, 3] = np.asarray(blk2.input_gain(z2)) - self.lin2.B
        jac[2 + n1 :, 4 + n1 :] = (
            np.asarray(blk2.drift_jac(z2)) - self.lin2.A
        ) + v_l * np.asarray(blk2.input_jac(z2))
        return jac

    def q_of(self, flat_state: np.ndarray) -> np.ndarray:
        return flat_state[self.q_indices]


def linear_generator_matrix(
    sys: DiscreteSystem,
    config: ClosedLoopConfig,
    lin1: BlockLinearization,
    lin2: BlockLinearization,
) -> np.ndarray:
    """Dense matrix realizing apply_linear_part on packed states."""
    from .discretization import displacement_gram

    n = sys.n_dof
    n1, n2 = lin1.A.shape[0], lin2.A.shape[0]
    total = 2 * n + n1 + n2
    iv, isl = sys.tip_value_index, sys.tip_slope_index
    d1 = config.sd_rotational.damper_slope
    d2 = config.sd_translational.damper_slope
    k1, k2 = _spring_slopes(config)
    minv = sys.mass_tip_inv
    col_s = minv[:, isl]
    col_v = minv[:, iv]

    g = np.zeros((total, total))
    g[:n, n : 2 * n] = np.eye(n)
    g[n : 2 * n, :n] = -minv @ displacement_gram(sys, k1, k2)
    g[n : 2 * n, n + isl] -= d1 * col_s
    g[n : 2 * n, n + iv] -= d2 * col_v
    g[n : 2 * n, 2 * n : 2 * n + n1] = -np.outer(col_s, lin1.C)
    g[n : 2 * n, 2 * n + n1 :] = -np.outer(col_v, lin2.C)
    g[2 * n : 2 * n + n1, n + isl] = lin1.B
    g[2 * n : 2 * n + n1, 2 * n : 2 * n + n1] = lin1.A
    g[2 * n + n1 :, n + iv] = lin2.B
    g[2 * n + n1 :, 2 * n + n1 :] = lin2.A
    return g
