"""
Reduction of the Ostrogradski phase space to the (q, qdot) sector.

The two Ostrogradski momenta are evaluated on the sector with the
bracket, which turns the second class constraints into a symplectic
form omegaFactor * dqdot ^ dq and the Ostrogradski Hamiltonian into
an ordinary function [H](q, qdot).
"""

import logging
from dataclasses import dataclass

from .algebra import (
    GSeries,
    IdentityCheck,
    jet_q,
    jet_qddot,
    jet_qdot,
    omega,
    q,
    qdot,
    rational,
)
from .constraint import (
    FSeries,
    bracket,
    bracket_graded,
    d_apply,
    solve_constraint,
)
from .model import (
    lagrangian_value,
    ostrogradski_momenta,
    total_derivative,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReducedSector:
    """
    Momenta, symplectic factor and Hamiltonian on the sector.

    omega_factor is the coefficient of dqdot ^ dq in the reduced
    symplectic form.
    """

    f: FSeries
    p1: GSeries
    p2: GSeries
    omega_factor: GSeries
    hamiltonian: GSeries

    @property
    def order(self):
        return self.f.order


def reduce(spec, f=None):
    if f is None:
        f = solve_constraint(spec)
    if f.order != spec.order:
        raise ValueError(
            f"f is solved through g^{f.order} but the model asks for "
            f"g^{spec.order}"
        )
    p1, p2 = ostrogradski_momenta(spec)
    p1 = bracket_graded(p1, f)
    p2 = bracket_graded(p2, f)
    omega_factor = p1.diff("qdot") - p2.diff("q")
    lagrangian = bracket_graded(lagrangian_value(spec), f)
    hamiltonian = p1 * qdot + p2 * f.series - lagrangian
    logger.info("Reduced sector built through g^%d", f.order)
    return ReducedSector(f, p1, p2, omega_factor, hamiltonian)


def dirac_bracket_qqdot(sector):
    """
    {q, qdot}_D as the inverse of the reduced symplectic factor.
    """
    return sector.omega_factor.inverse()


def phi_poisson_bracket(spec, f):
    """
    {phi_1, phi_2} of phi_1 = p1 - P1(q1, q2, qddot) and
    phi_2 = p2 + g dV/dqddot, evaluated on the sector.

    Computed from V directly rather than from the reduced momenta.
    """
    V = spec.potential.terms
    dV_dqddot = V.diff(jet_qddot)
    inner = -V.diff(jet_qdot) + total_derivative(dV_dqddot)
    coupled = -bracket(dV_dqddot, f).diff("q") - bracket(
        inner, f
    ).diff("qdot")
    return coupled.shift(1) - 1


def dirac_bracket_from_constraints(spec, f):
    """
    {q, qdot}_D = -{phi_1, phi_2}^-1.
    """
    return (-phi_poisson_bracket(spec, f)).inverse()


def hamilton_check(sector):
    """
    Hamilton's equations on the sector as exact series identities.

    The Hamiltonian generates q' = qdot and qdot' = f through the
    Dirac bracket {A, B}_D = {q, qdot}_D (A_q B_qdot - A_qdot B_q).
    """
    H, W, F = sector.hamiltonian, sector.omega_factor, sector.f.series
    B = dirac_bracket_qqdot(sector)
    v = GSeries.constant(qdot, sector.order)
    return [
        IdentityCheck("dH/dq = -f Omega", H.diff("q") + F * W),
        IdentityCheck(
            "dH/dqdot = qdot Omega", H.diff("qdot") - v * W
        ),
        IdentityCheck("qdot = {q, H}_D", B * H.diff("qdot") - v),
        IdentityCheck("f = {qdot, H}_D", -(B * H.diff("q")) - F),
    ]


def secondary_constraints(spec, sector):
    """
    Time derivatives of the primary constraints on the sector.

    With p1' = dL/dq and p2' = dL/dqdot - p1 from the Ostrogradski
    equations, d phi_1/dt = [dL/dq] - D[p1] and
    d phi_2/dt = [dL/dqdot] - [p1] - D[p2].
    """
    f = sector.f
    L = lagrangian_value(spec)
    dL_dq = bracket_graded(L.map(lambda p: p.diff(jet_q)), f)
    dL_dqdot = bracket_graded(L.map(lambda p: p.diff(jet_qdot)), f)
    return [
        IdentityCheck("dphi_1/dt", dL_dq - d_apply(sector.p1, f)),
        IdentityCheck(
            "dphi_2/dt",
            dL_dqdot - sector.p1 - d_apply(sector.p2, f),
        ),
    ]


def energy_check(sector):
    return IdentityCheck(
        "D[H] = 0", d_apply(sector.hamiltonian, sector.f)
    )


def structural_checks(spec, sector):
    """
    Every exact identity of the reduction, in report order.
    """
    inverse = dirac_bracket_qqdot(sector)
    return [
        IdentityCheck(
            "Omega {q, qdot}_D = 1",
            sector.omega_factor * inverse - 1,
        ),
        IdentityCheck(
            "{phi_1, phi_2} = -Omega",
            phi_poisson_bracket(spec, sector.f) + sector.omega_factor,
        ),
        IdentityCheck(
            "constraint Dirac bracket",
            dirac_bracket_from_constraints(spec, sector.f) - inverse,
        ),
        *hamilton_check(sector),
        *secondary_constraints(spec, sector),
        energy_check(sector),
    ]


def _partials(f):
    F = f.series
    fq, fv = F.diff("q"), F.diff("qdot")
    return F, fq, fv


def explicit_example_factor(f):
    """
    Reduced symplectic factor of V = q qddot^2 written out in f.
    """
    F, fq, fv = _partials(f)
    x = GSeries.constant(q, f.order)
    v = GSeries.constant(qdot, f.order)
    coupled = (
        4 * F
        + 4 * x * fq
        + 2 * v * fv
        + 2 * x * v * fq.diff("qdot")
        + 2 * x * fv * fv
        + 2 * x * F * fv.diff("qdot")
    )
    return coupled.shift(1) + 1


def explicit_example_hamiltonian(f):
    """
    Reduced Hamiltonian of V = q qddot^2 written out in f.
    """
    F, fq, fv = _partials(f)
    x = GSeries.constant(q, f.order)
    v = GSeries.constant(qdot, f.order)
    coupled = (
        -x * F * F
        + 2 * v * v * F
        + 2 * x * v * v * fq
        + 2 * x * v * F * fv
    )
    half = rational(1, 2)
    free = half * qdot**2 + half * omega**2 * q**2
    return coupled.shift(1) + free

