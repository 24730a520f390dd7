"""
Lagrangians L = qdot^2/2 - omega^2 q^2/2 - g V(q, qdot, qddot).
"""

from dataclasses import dataclass

from .algebra import (
    JET,
    jet_omega,
    jet_q,
    jet_q3,
    jet_q4,
    jet_qddot,
    jet_qdot,
    rational,
    rational_from_str,
)
from .errors import JetOrderError, PotentialError

_JET_GENS = (jet_q, jet_qdot, jet_qddot, jet_q3, jet_q4)


@dataclass(frozen=True)
class GradedJet:
    """
    Jet polynomial split as free + g * coupled.
    """

    free: object
    coupled: object

    def __add__(self, other):
        return GradedJet(
            self.free + other.free, self.coupled + other.coupled
        )

    def __neg__(self):
        return GradedJet(-self.free, -self.coupled)

    def __sub__(self, other):
        return self + (-other)

    def map(self, fn):
        return GradedJet(fn(self.free), fn(self.coupled))


@dataclass(frozen=True)
class Potential:
    """
    Interaction V(q, qdot, qddot) multiplied by g in the Lagrangian.

    monomial is (k, l, m) when V = c q^k qdot^l qddot^m with no
    explicit omega; the homogeneity grading only applies then.
    """

    terms: object
    monomial: tuple = None

    def __post_init__(self):
        if self.terms.degree(jet_q3) or self.terms.degree(jet_q4):
            raise PotentialError(
                "The potential may depend on q, qdot and qddot only"
            )
        if not self.terms.diff(jet_qddot).diff(jet_qddot):
            raise PotentialError(
                "d^2V/dqddot^2 vanishes identically: the potential "
                "must be at least quadratic in qddot"
            )

    @classmethod
    def from_monomial(cls, k, l, m):
        if min(k, l, m) < 0:
            raise PotentialError("Exponents must be non-negative")
        if m < 2:
            raise PotentialError(
                f"Monomial potentials need m >= 2, got m={m}: "
                "d^2V/dqddot^2 would vanish"
            )
        terms = jet_q**k * jet_qdot**l * jet_qddot**m
        return cls(terms, (k, l, m))

    @classmethod
    def from_terms(cls, terms):
        """
        Build from dicts {coeff, q, qdot, qddot, omega}.
        """
        poly = JET.zero
        for t in terms:
            poly += (
                rational_from_str(t.get("coeff", "1"))
                * jet_q ** t.get("q", 0)
                * jet_qdot ** t.get("qdot", 0)
                * jet_qddot ** t.get("qddot", 0)
                * jet_omega ** t.get("omega", 0)
            )
        monomial = None
        if len(poly) == 1:
            (i, j, a, _, _, k), = poly.keys()
            if k == 0:
                monomial = (i, j, a)
        return cls(poly, monomial)

    @property
    def degree(self):
        """
        Total degree a = k + l + m, or None for non-monomial V.
        """
        return sum(self.monomial) if self.monomial else None


@dataclass(frozen=True)
class ModelSpec:
    potential: Potential
    order: int

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("Truncation order must be non-negative")

    @property
    def a(self):
        return self.potential.degree


def total_derivative(p):
    """
    Formal time derivative on jet space, shifting each variable up.
    """
    if p.degree(jet_q4) > 0:
        raise JetOrderError(
            "Total derivative of an expression containing q4 would "
            "need q5"
        )
    result = JET.zero
    pairs = zip(_JET_GENS[:-1], _JET_GENS[1:], strict=True)
    for lower, upper in pairs:
        result += upper * p.diff(lower)
    return result


def variational_derivative(lagrangian):
    """
    dL/dq - d/dt dL/dqdot + d^2/dt^2 dL/dqddot.
    """
    return (
        lagrangian.diff(jet_q)
        - total_derivative(lagrangian.diff(jet_qdot))
        + total_derivative(
            total_derivative(lagrangian.diff(jet_qddot))
        )
    )


def lagrangian_value(spec):
    half = rational(1, 2)
    return GradedJet(
        half * jet_qdot**2 - half * jet_omega**2 * jet_q**2,
        -spec.potential.terms,
    )


def euler_lagrange(spec):
    """
    Left-hand side of the equation of motion.

    free is qddot + omega^2 q; coupled is
    dV/dq - d/dt dV/dqdot + d^2/dt^2 dV/dqddot.
    """
    return GradedJet(
        jet_qddot + jet_omega**2 * jet_q,
        variational_derivative(spec.potential.terms),
    )


def ostrogradski_momenta(spec):
    """
    Canonical momenta (p1, p2) of the Ostrogradski construction.
    """
    V = spec.potential.terms
    dV_dqddot = V.diff(jet_qddot)
    p1 = GradedJet(
        jet_qdot, -V.diff(jet_qdot) + total_derivative(dV_dqddot)
    )
    p2 = GradedJet(JET.zero, -dV_dqddot)
    return p1, p2


def momenta_from_lagrangian(lagrangian):
    """
    Recompute (p1, p2) from L: p1 = dL/dqdot - d/dt dL/dqddot and
    p2 = dL/dqddot.
    """

    def p1(L):
        return L.diff(jet_qdot) - total_derivative(L.diff(jet_qddot))

    def p2(L):
        return L.diff(jet_qddot)

    return lagrangian.map(p1), lagrangian.map(p2)
