"""
Exact graded polynomial arithmetic over phase space and jet space.

Polynomials are elements of sparse sympy rings over QQ. The phase
ring has generators (q, qdot, omega) and the jet ring has generators
(q, qdot, qddot, q3, q4, omega); omega is carried as an ordinary
generator so its exponent is tracked per monomial. That exponent may
be negative (a Laurent monomial, as in sympy.polys.ring_series); ring
arithmetic and differentiation in q and qdot handle it unchanged.
The coupling g never appears inside a polynomial: it is the grading
variable of GSeries.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from math import factorial

from sympy.polys.domains import QQ
from sympy.polys.rings import ring

from .errors import (
    MissingAssignmentError,
    SeriesInversionError,
    TruncationMismatchError,
)

logger = logging.getLogger(__name__)

PHASE, q, qdot, omega = ring("q, qdot, omega", QQ)
JET, jet_q, jet_qdot, jet_qddot, jet_q3, jet_q4, jet_omega = ring(
    "q, qdot, qddot, q3, q4, omega", QQ
)

PHASE_VARIABLES = ("q", "qdot")

# Jet slots that substitute() replaces; q, qdot and omega map to
# themselves.
SUBSTITUTED = ("qddot", "q3", "q4")
_FIXED = {"q": q, "qdot": qdot}


def rational(numerator, denominator=1):
    """
    Exact rational number numerator/denominator in lowest terms.
    """
    return QQ(numerator, denominator)


def rational_to_str(c):
    """
    Serialize a rational as "num/den", omitting the denominator 1.
    """
    num, den = int(QQ.numer(c)), int(QQ.denom(c))
    return str(num) if den == 1 else f"{num}/{den}"


def rational_from_str(text):
    num, _, den = str(text).strip().partition("/")
    return QQ(int(num), int(den) if den else 1)


def phase_monomial(coeff, q_pow=0, qdot_pow=0, omega_pow=0):
    return PHASE.from_dict({(q_pow, qdot_pow, omega_pow): coeff})


def multiply(a, b):
    """
    Exact product of two polynomials or two series of the same kind.
    """
    if isinstance(a, GSeries) != isinstance(b, GSeries):
        raise TypeError("Cannot multiply a series by a polynomial")
    if not isinstance(a, GSeries) and a.ring != b.ring:
        raise TypeError("Cannot multiply phase and jet polynomials")
    return a * b


def differentiate(p, var):
    """
    Formal partial derivative of a phase polynomial.

    var is "q" or "qdot".
    """
    if var not in PHASE_VARIABLES:
        raise ValueError(f"Unknown phase variable {var!r}")
    return p.diff(PHASE.gens[PHASE_VARIABLES.index(var)])


def antiderive_qdot(p, times=1):
    """
    Return P with d^times P / dqdot^times = p.

    All integration constants (terms of qdot degree below times) are
    zero.
    """
    if times not in (1, 2):
        raise ValueError("times must be 1 or 2")
    return PHASE.from_dict(
        {
            (i, j + times, k): c
            * QQ(factorial(j), factorial(j + times))
            for (i, j, k), c in p.items()
        }
    )


def homogeneous_component(p, d):
    """
    Sum of the terms of p whose phase degree qPow + qdotPow is d.
    """
    if d < 0:
        raise ValueError("Degree must be non-negative")
    return p.ring.from_dict(
        {m: c for m, c in p.items() if m[0] + m[1] == d}
    )


def phase_degrees(p):
    return sorted({i + j for i, j, _ in p})


def dimensions(p):
    """
    Return the set of (length power, inverse-time power) of the terms.

    A term omega^k q^i qdot^j has the dimension of
    length^(i+j) time^-(k+j). A dimensionally consistent polynomial
    has at most one entry.
    """
    return {(i + j, k + j) for i, j, k in p}


def is_graded(p):
    return len(dimensions(p)) <= 1


def odd_part(p):
    """
    Terms of odd phase degree.
    """
    return p.ring.from_dict(
        {m: c for m, c in p.items() if (m[0] + m[1]) % 2}
    )


@dataclass(frozen=True)
class GSeries:
    """
    Power series in g truncated after g^order.

    coeffs[n] is the phase polynomial multiplying g^n.
    """

    coeffs: tuple

    @property
    def order(self):
        return len(self.coeffs) - 1

    @classmethod
    def of(cls, coeffs, order):
        """
        Series from a coefficient list, padded or cut to order.
        """
        coeffs = list(coeffs)[: order + 1]
        coeffs += [PHASE.zero] * (order + 1 - len(coeffs))
        return cls(tuple(coeffs))

    @classmethod
    def zero(cls, order):
        return cls.of([], order)

    @classmethod
    def constant(cls, p, order):
        if not hasattr(p, "ring"):
            p = PHASE(p)
        return cls.of([p], order)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __iter__(self):
        return iter(self.coeffs)

    def _check(self, other):
        if self.order != other.order:
            raise TruncationMismatchError(self.order, other.order)

    def __add__(self, other):
        if not isinstance(other, GSeries):
            other = GSeries.constant(other, self.order)
        self._check(other)
        return GSeries(
            tuple(a + b for a, b in zip(self, other, strict=True))
        )

    __radd__ = __add__

    def __neg__(self):
        return GSeries(tuple(-a for a in self))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, GSeries):
            return GSeries(tuple(a * other for a in self))
        self._check(other)
        n = self.order
        coeffs = [PHASE.zero] * (n + 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j in range(n + 1 - i):
                b = other.coeffs[j]
                if b:
                    coeffs[i + j] += a * b
        return GSeries(tuple(coeffs))

    __rmul__ = __mul__

    def shift(self, k=1):
        """
        Multiply by g^k and truncate.
        """
        return GSeries.of([PHASE.zero] * k + list(self), self.order)

    def truncate(self, order):
        return GSeries.of(self.coeffs, order)

    def diff(self, var):
        return GSeries(tuple(differentiate(a, var) for a in self))

    def map(self, fn):
        return GSeries(tuple(fn(a) for a in self))

    def is_zero(self):
        return not any(self.coeffs)

    def inverse(self):
        """
        Multiplicative inverse of a series with constant term 1.
        """
        if self.coeffs[0] != PHASE.one:
            raise SeriesInversionError(
                "Series inversion needs constant term 1, got "
                f"{self.coeffs[0].as_expr()}"
            )
        inv = [PHASE.one]
        for k in range(1, self.order + 1):
            inv.append(
                -sum(
                    (
                        self.coeffs[i] * inv[k - i]
                        for i in range(1, k + 1)
                    ),
                    PHASE.zero,
                )
            )
        return GSeries(tuple(inv))

    def compose(self, q_series, qdot_series):
        """
        Substitute q and qdot by series; the g-grading is kept.
        """
        self._check(q_series)
        self._check(qdot_series)
        powers = _PowerCache(
            {"q": q_series, "qdot": qdot_series}, self.order
        )
        result = GSeries.zero(self.order)
        for n, coeff in enumerate(self.coeffs):
            if coeff:
                result += _compose_phase(coeff, powers).shift(n)
        return result


class _PowerCache:
    def __init__(self, images, order):
        self.images = images
        self.order = order
        self._powers = {}

    def __call__(self, name, k):
        key = (name, k)
        if key not in self._powers:
            if k == 0:
                self._powers[key] = GSeries.constant(1, self.order)
            else:
                previous = self(name, k - 1)
                self._powers[key] = previous * self.images[name]
        return self._powers[key]


def _compose_phase(p, powers):
    groups = defaultdict(dict)
    for (i, j, k), c in p.items():
        groups[(i, j)][(0, 0, k)] = c
    result = GSeries.zero(powers.order)
    for (i, j), terms in groups.items():
        series = powers("q", i) * powers("qdot", j)
        result += series * PHASE.from_dict(terms)
    return result


def substitute(p, assignments, order):
    """
    Replace qddot, q3 and q4 in a jet polynomial by series.

    q, qdot and omega map to themselves; q and qdot may be given
    their identity assignment. Every substituted variable that p
    actually uses must have an assignment.
    """
    unknown = set(assignments) - set(SUBSTITUTED) - set(_FIXED)
    if unknown:
        raise ValueError(f"Cannot assign {sorted(unknown)}")
    for series in assignments.values():
        if series.order != order:
            raise TruncationMismatchError(series.order, order)
    for name, gen in _FIXED.items():
        if name not in assignments:
            continue
        if assignments[name] != GSeries.constant(gen, order):
            raise ValueError(
                f"{name} maps to itself; only its identity "
                "assignment is accepted"
            )
    assignments = {
        k: v for k, v in assignments.items() if k in SUBSTITUTED
    }
    powers = _PowerCache(assignments, order)
    groups = defaultdict(dict)
    for (i, j, a, b, c, k), coeff in p.items():
        groups[(a, b, c)][(i, j, k)] = coeff
    result = GSeries.zero(order)
    for exps, terms in groups.items():
        series = GSeries.constant(PHASE.from_dict(terms), order)
        for name, e in zip(SUBSTITUTED, exps, strict=True):
            if e:
                if name not in assignments:
                    raise MissingAssignmentError(name)
                series = series * powers(name, e)
        result += series
    return result


def _phase_key(monom):
    i, j, k = monom
    return (i + j, -i, k)


def phase_to_json(p):
    """
    Phase polynomial as a list of terms in graded lexicographic order.
    """
    return [
        {
            "qPow": i,
            "qdotPow": j,
            "omegaPow": k,
            "coeff": rational_to_str(p[(i, j, k)]),
        }
        for i, j, k in sorted(p.keys(), key=_phase_key)
    ]


def phase_from_json(items):
    return PHASE.from_dict(
        {
            (t["qPow"], t["qdotPow"], t["omegaPow"]): (
                rational_from_str(t["coeff"])
            )
            for t in items
        }
    )


def jet_to_json(p):
    keys = sorted(
        p.keys(),
        key=lambda m: (sum(m[:5]), [-e for e in m[:5]], m[5]),
    )
    return [
        {
            "powers": list(m[:5]),
            "omegaPow": m[5],
            "coeff": rational_to_str(p[m]),
        }
        for m in keys
    ]


def jet_from_json(items):
    return JET.from_dict(
        {
            (*t["powers"], t["omegaPow"]): rational_from_str(
                t["coeff"]
            )
            for t in items
        }
    )


def series_to_json(s):
    return [phase_to_json(c) for c in s]


def series_from_json(items):
    coeffs = [phase_from_json(c) for c in items]
    return GSeries.of(coeffs, len(coeffs) - 1)


def format_phase(p, names=("q", "qdot")):
    """
    Human readable rendering in the canonical term order.

    The x-variables of the normal form are rendered by passing
    names=("x", "xdot").
    """
    if not p:
        return "0"
    parts = []
    for i, j, k in sorted(p.keys(), key=_phase_key):
        c = p[(i, j, k)]
        factors = [
            f"{name}^{e}" if e != 1 else name
            for name, e in (("w", k), (names[0], i), (names[1], j))
            if e
        ]
        mag = rational_to_str(abs(c))
        if factors and mag == "1":
            body = "*".join(factors)
        else:
            body = "*".join([mag] + factors)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first = parts[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


@dataclass(frozen=True)
class IdentityCheck:
    """
    An exact series identity, stored as the residual that must vanish.
    """

    name: str
    residual: GSeries

    @property
    def failing_orders(self):
        return [n for n, c in enumerate(self.residual) if c]

    @property
    def passed(self):
        return not self.failing_orders

    def summary(self):
        if self.passed:
            return {"name": self.name, "passed": True}
        n = self.failing_orders[0]
        return {
            "name": self.name,
            "passed": False,
            "order": n,
            "residual": phase_to_json(self.residual[n]),
        }
