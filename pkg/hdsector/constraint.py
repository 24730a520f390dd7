"""
Perturbative solution of the equation of motion for qddot.

On the perturbative sector qddot is a function of (q, qdot):
f = f_0 + g f_1 + g^2 f_2 + ... with f_0 = -omega^2 q. The bracket
[F] evaluates a jet polynomial on this sector by replacing qddot by
f, q3 by Df and q4 by D^2 f, where D = qdot d/dq + f d/dqdot is the
time derivative along the sector.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

from .algebra import (
    GSeries,
    IdentityCheck,
    homogeneous_component,
    omega,
    q,
    qdot,
    substitute,
)
from .model import euler_lagrange

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FSeries:
    """
    Solution f of the constraint, truncated after g^order.
    """

    series: GSeries

    def __post_init__(self):
        if self.series[0] != -(omega**2) * q:
            raise ValueError("f must start with -omega^2 q")

    @property
    def order(self):
        return self.series.order

    def __getitem__(self, n):
        return self.series[n]

    def truncate(self, order):
        return FSeries(self.series.truncate(order))


def harmonic_f(order):
    return FSeries(GSeries.constant(-(omega**2) * q, order))


def d_apply(p, f):
    """
    Time derivative D p = qdot dp/dq + f dp/dqdot of a series.
    """
    if not isinstance(p, GSeries):
        p = GSeries.constant(p, f.order)
    return p.diff("q") * qdot + p.diff("qdot") * f.series


@lru_cache(maxsize=64)
def _jet_images(f):
    df = d_apply(f.series, f)
    return {"qddot": f.series, "q3": df, "q4": d_apply(df, f)}


def bracket(p, f):
    """
    Evaluate a jet polynomial on the sector defined by f.
    """
    return substitute(p, _jet_images(f), f.order)


def bracket_graded(jet, f):
    """
    [free] + g [coupled] for a GradedJet.
    """
    return bracket(jet.free, f) + bracket(jet.coupled, f).shift(1)


def expected_degree(spec, n):
    """
    Phase degree of f_n for a monomial potential of degree a.
    """
    return n * (spec.a - 2) + 1


def solve_constraint(spec):
    """
    Solve the Euler-Lagrange equation order by order for f.

    At order n the free part contributes f_n and the coupled part
    only involves f_0 .. f_{n-1}, so
    f_n = -[coupled EL]_{n-1}.
    """
    el = euler_lagrange(spec)
    coeffs = [-(omega**2) * q]
    for n in range(1, spec.order + 1):
        known = FSeries(GSeries.of(coeffs, n - 1))
        fn = -bracket(el.coupled, known)[n - 1]
        if spec.a is not None:
            degree = expected_degree(spec, n)
            if fn != homogeneous_component(fn, degree):
                logger.warning(
                    "f_%d is not homogeneous of degree %d", n, degree
                )
        logger.debug("f_%d = %s", n, fn.as_expr())
        coeffs.append(fn)
    return FSeries(GSeries.of(coeffs, spec.order))


def residual(spec, f):
    """
    The Euler-Lagrange expression evaluated on f; zero for the
    solution through order f.order.
    """
    return bracket_graded(euler_lagrange(spec), f)


def constraint_check(spec, f):
    return IdentityCheck("euler-lagrange", residual(spec, f))


def example_consistency(f):
    """
    Equation of motion of V = q qddot^2 written out in terms of f and
    its partial derivatives, independent of the jet machinery.
    """
    F = f.series
    fq, fv = F.diff("q"), F.diff("qdot")
    fqq, fqv, fvv = fq.diff("q"), fq.diff("qdot"), fv.diff("qdot")
    v = GSeries.constant(qdot, f.order)
    x = GSeries.constant(q, f.order)
    q4 = (
        v * v * fqq
        + v * fq * fv
        + F * fq
        + 2 * v * F * fqv
        + F * fv * fv
        + F * F * fvv
    )
    coupled = 3 * F * F + 4 * v * (v * fq + F * fv) + 2 * x * q4
    return F + x * omega**2 + coupled.shift(1)

