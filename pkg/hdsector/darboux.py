"""
Darboux coordinates (x, xdot) of the reduced sector.

The map q = x + g m_1 + g^2 m_2 + ..., built order by order, pulls the
reduced symplectic form back to dxdot ^ dx and brings the reduced
Hamiltonian to xdot^2/2 + omega^2 x^2/2 + Vt(x). At each order the
unknown enters through the harmonic time derivative
D0 = qdot d/dq - omega^2 q d/dqdot, which is diagonal on the
monomials z^a zbar^b of z = omega q + i qdot.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from math import comb

from sympy.polys.domains import QQ, QQ_I
from sympy.polys.rings import ring

from .algebra import (
    PHASE,
    GSeries,
    IdentityCheck,
    antiderive_qdot,
    homogeneous_component,
    odd_part,
    omega,
    phase_monomial,
    q,
    qdot,
    rational,
    rational_from_str,
    rational_to_str,
)
from .constraint import d_apply
from .errors import GaugeError, IntegrabilityError, VerificationError
from .reduction import reduce

logger = logging.getLogger(__name__)

_Z, z, zbar = ring("z, zbar", QQ_I)
_XY, X, Y = ring("X, Y", QQ_I)

_I = QQ_I(0, 1)
_X_IN_Z = (z + zbar) * QQ_I(QQ(1, 2))
_Y_IN_Z = (z - zbar) * QQ_I(0, QQ(-1, 2))
_Z_IN_XY = X + Y * _I
_ZBAR_IN_XY = X - Y * _I


def _powers(base, n):
    table = [base.ring.one]
    for _ in range(n):
        table.append(table[-1] * base)
    return table


def d0_apply(p):
    return qdot * p.diff(q) - omega**2 * q * p.diff(qdot)


def _to_eigenbasis(terms):
    """
    sum c X^i Y^j (X = omega q, Y = qdot) rewritten in z, zbar.
    """
    top = max(i + j for i, j in terms)
    xs, ys = _powers(_X_IN_Z, top), _powers(_Y_IN_Z, top)
    result = _Z.zero
    for (i, j), c in terms.items():
        result += xs[i] * ys[j] * QQ_I(c)
    return result


def _from_eigenbasis(terms):
    if not terms:
        return {}
    top = max(a + b for a, b in terms)
    zs, zbars = _powers(_Z_IN_XY, top), _powers(_ZBAR_IN_XY, top)
    result = _XY.zero
    for (a, b), c in terms.items():
        result += zs[a] * zbars[b] * c
    real = {}
    for monom, c in result.items():
        if c.y:
            raise VerificationError(
                "Eigenbasis combination is not real; the conjugate "
                "pair of a z^a zbar^b term is missing"
            )
        real[monom] = c.x
    return real


def _to_phase(terms, offset):
    """
    omega^offset X^i Y^j as omega^(offset+i) q^i qdot^j.

    The omega exponent may come out negative.
    """
    return PHASE.from_dict(
        {(i, j, offset + i): c for (i, j), c in terms.items()}
    )


def d0_solve(rhs):
    """
    Split rhs into D0 phi + zero mode.

    Terms are grouped by omega offset k - i of omega^k q^i qdot^j,
    which D0 raises by one. In the z basis
    D0 z^a zbar^b = -i omega (a - b) z^a zbar^b, so every a != b term
    is divided by its eigenvalue and the a = b terms form the zero
    mode. phi has no zero mode component.
    """
    groups = defaultdict(dict)
    for (i, j, k), c in rhs.items():
        groups[k - i][(i, j)] = c
    phi, zero_mode = PHASE.zero, PHASE.zero
    for offset, terms in sorted(groups.items()):
        rotating, invariant = {}, {}
        for (a, b), c in _to_eigenbasis(terms).items():
            if a == b:
                invariant[(a, b)] = c
            else:
                rotating[(a, b)] = c * QQ_I(0, QQ(1, a - b))
        phi += _to_phase(_from_eigenbasis(rotating), offset - 1)
        zero_mode += _to_phase(_from_eigenbasis(invariant), offset)
    return phi, zero_mode


def zero_mode_cancellation(zero_mode):
    """
    The function S(q) whose zero mode is -zero_mode.

    The zero mode of (omega q)^(2k) is C(2k, k) / 4^k times
    (omega^2 q^2 + qdot^2)^k, so only the pure q part of zero_mode
    is needed.
    """
    terms = {}
    for (i, j, k), c in zero_mode.items():
        if j == 0:
            half = i // 2
            terms[(i, 0, k)] = -c * QQ(4**half, comb(i, half))
    return PHASE.from_dict(terms)


@dataclass(frozen=True)
class Gauge:
    """
    Choice of the q-only function S_n at each order.

    minimal cancels zero modes only; parity also removes the odd terms
    of Vt; beta sets the g^1 term of Vt to (1 + beta) times its
    minimal value.
    """

    kind: str = "minimal"
    beta: object = None

    def __post_init__(self):
        if self.kind not in ("minimal", "parity", "beta"):
            raise ValueError(f"Unknown gauge {self.kind!r}")
        if (self.kind == "beta") != (self.beta is not None):
            raise ValueError("beta is set exactly for the beta gauge")

    @classmethod
    def parse(cls, text):
        text = str(text).strip()
        if text in ("minimal", "parity"):
            return cls(text)
        name, sep, value = text.partition("=")
        if name.strip() == "beta" and sep:
            try:
                return cls("beta", rational_from_str(value))
            except ValueError:
                pass
        raise ValueError(
            f"Cannot parse gauge {text!r}: expected 'minimal', "
            "'parity' or 'beta=<rational>' such as 'beta=-1/2'"
        )

    def __str__(self):
        if self.kind == "beta":
            return f"beta={rational_to_str(self.beta)}"
        return self.kind

    def validate(self, spec):
        if self.kind == "minimal":
            return
        a = spec.a
        if a is None or a % 2 == 0:
            raise GaugeError(
                f"The {self.kind} gauge needs a monomial potential "
                f"of odd total degree, got degree {a}"
            )
        if self.kind == "beta" and spec.order > 2:
            raise GaugeError(
                "The beta family is defined through g^2 only; use "
                f"order <= 2, got {spec.order}"
            )


def default_gauge(spec):
    a = spec.a
    if a is not None and a % 2:
        return Gauge("parity")
    return Gauge("minimal")


@dataclass(frozen=True)
class DarbouxMap:
    """
    q = x + M(q, qdot) with M = sum g^n m_n, read as the forward map
    x = q - M, xdot = qdot - DM.

    alpha[n - 1] is the coefficient added to S_n by the gauge, or None
    where the minimal choice was kept.
    """

    f: object
    gauge: Gauge
    m: tuple
    phi: tuple
    s: tuple
    alpha: tuple

    @property
    def order(self):
        return self.f.order

    @property
    def generator(self):
        return GSeries.of([PHASE.zero, *self.m], self.order)

    def forward(self):
        M = self.generator
        return (
            GSeries.constant(q, self.order) - M,
            GSeries.constant(qdot, self.order) - d_apply(M, self.f),
        )


@dataclass(frozen=True)
class NormalFormTerm:
    order: int
    coeff: object
    omega_pow: int
    x_pow: int


@dataclass(frozen=True)
class NormalForm:
    """
    Vt(x) as a series in g. The polynomials are read with q as x.
    """

    potential: GSeries

    @property
    def order(self):
        return self.potential.order

    @property
    def v_table(self):
        return tuple(
            NormalFormTerm(n, c, k, i)
            for n, coeff in enumerate(self.potential)
            for (i, _, k), c in sorted(coeff.items())
        )

    def coefficient(self, order, x_pow):
        """
        The g^order x^x_pow term of Vt, omega power included.
        """
        return homogeneous_component(self.potential[order], x_pow)

    def hamiltonian(self):
        half = rational(1, 2)
        free = half * qdot**2 + half * omega**2 * q**2
        return self.potential + free

    def force(self):
        return -self.potential.diff("q")


def symplectic_density(M, f):
    """
    det d(x, xdot)/d(q, qdot) for x = q - M, xdot = qdot - DM.
    """
    N = d_apply(M, f)
    return (
        1
        - N.diff("qdot")
        - M.diff("q")
        + N.diff("qdot") * M.diff("q")
        - N.diff("q") * M.diff("qdot")
    )


def _invert(M, f):
    """
    Solve q = x + M(q, qdot), qdot = xdot + DM(q, qdot) by fixed point
    iteration; each pass fixes one more order.
    """
    DM = d_apply(M, f)
    x = GSeries.constant(q, M.order)
    v = GSeries.constant(qdot, M.order)
    Q, V = x, v
    for _ in range(M.order):
        Q, V = x + M.compose(Q, V), v + DM.compose(Q, V)
    return Q, V


def invert_map(darboux_map):
    """
    (q(x, xdot), qdot(x, xdot)), written with q and qdot standing for
    x and xdot.
    """
    return _invert(darboux_map.generator, darboux_map.f)


def _transport(hamiltonian, M, f):
    Q, V = _invert(M, f)
    half = rational(1, 2)
    free = half * qdot**2 + half * omega**2 * q**2
    return hamiltonian.compose(Q, V) - free


class _MapBuilder:
    def __init__(self, spec, sector, gauge):
        self.spec = spec
        self.sector = sector
        self.gauge = gauge
        self.f = sector.f
        self.m, self.phi, self.s, self.alpha = [], [], [], []

    def generator(self, order):
        return GSeries.of([PHASE.zero, *self.m], order)

    def potential(self, order):
        """
        Vt through g^order from the m_n built so far.
        """
        return _transport(
            self.sector.hamiltonian.truncate(order),
            self.generator(order),
            self.f.truncate(order),
        )

    def target(self, n):
        """
        The twice qdot-integrated right hand side R_n.
        """
        known = symplectic_density(
            self.generator(n), self.f.truncate(n)
        )[n]
        rhs = known - self.sector.omega_factor[n]
        R = antiderive_qdot(rhs, 2)
        if R.diff(qdot).diff(qdot) != rhs:
            raise IntegrabilityError(
                f"Order {n}: the known terms are not a second qdot "
                "derivative of a polynomial"
            )
        return R

    def solve(self, R, S):
        phi, rest = d0_solve(R + S)
        if rest:
            raise GaugeError(
                "A zero mode survives the choice of S: "
                f"{rest.as_expr()}"
            )
        self.m.append(phi.diff(qdot))
        self.phi.append(phi)
        self.s.append(S)

    def retract(self):
        self.m.pop()
        self.phi.pop()
        self.s.pop()

    def step(self, n):
        R = self.target(n)
        S = zero_mode_cancellation(d0_solve(R)[1])
        alpha = None
        if self.gauge.kind == "parity" and n % 2:
            alpha = parity_tune(self, n, R, S)
        elif self.gauge.kind == "beta" and n == 1:
            alpha = beta_shift(self, R, S)
        if alpha is not None:
            S += self.shift_term(n, alpha)
        self.solve(R, S)
        self.alpha.append(alpha)
        logger.debug(
            "m_%d = %s (alpha=%s)", n, self.m[-1].as_expr(), alpha
        )

    def shift_term(self, n, alpha):
        k, l, m = self.spec.potential.monomial
        a = k + l + m
        return phase_monomial(
            alpha, n * (a - 2) + 2, 0, (l + 2 * m - 2) * n + 2
        )

    def trial_potential(self, n, R, S):
        self.solve(R, S)
        try:
            return self.potential(n)[n]
        finally:
            self.retract()

    def build(self):
        for n in range(1, self.sector.order + 1):
            self.step(n)
        return DarbouxMap(
            self.f,
            self.gauge,
            tuple(self.m),
            tuple(self.phi),
            tuple(self.s),
            tuple(self.alpha),
        )


def parity_tune(builder, n, R, S):
    """
    alpha_n such that S_n + alpha_n omega^p q^d removes the odd
    term of Vt at order n.

    Adding alpha omega^p q^d to S_n changes Vt_n by
    -alpha omega^p x^d.
    """
    if builder.spec.a is None or builder.spec.a % 2 == 0:
        raise GaugeError("Parity tuning needs odd total degree")
    if n % 2 == 0:
        raise ValueError(f"Parity tuning acts on odd orders, got {n}")
    odd = odd_part(builder.trial_potential(n, R, S))
    expected = builder.shift_term(n, 1)
    if not odd:
        return QQ(0)
    if len(odd) > 1 or set(odd.keys()) != set(expected.keys()):
        raise GaugeError(
            f"Order {n}: the odd part of Vt is {odd.as_expr()}, "
            "which a single power of q cannot cancel"
        )
    (alpha,) = odd.values()
    return alpha


def beta_shift(builder, R, S):
    """
    Coefficient that turns the g^1 term of Vt into (1 + beta) times
    its minimal value.
    """
    trial = builder.trial_potential(1, R, S)
    expected = builder.shift_term(1, 1)
    if set(trial.keys()) - set(expected.keys()):
        raise GaugeError(
            f"First order Vt is {trial.as_expr()}, not a single "
            "power of q"
        )
    (key,) = expected.keys()
    return -builder.gauge.beta * trial.get(key, QQ.zero)


def transport_hamiltonian(darboux_map, sector):
    return NormalForm(
        _transport(
            sector.hamiltonian, darboux_map.generator, darboux_map.f
        )
    )


def map_checks(darboux_map, sector, normal_form):
    M, f = darboux_map.generator, darboux_map.f
    Q, V = invert_map(darboux_map)
    x, xdot = darboux_map.forward()
    kinetic = normal_form.potential.map(
        lambda p: PHASE.from_dict(
            {mon: c for mon, c in p.items() if mon[1]}
        )
    )
    return [
        IdentityCheck(
            "symplectic pullback",
            symplectic_density(M, f) - sector.omega_factor,
        ),
        IdentityCheck(
            "round trip x",
            x.compose(Q, V) - GSeries.constant(q, f.order),
        ),
        IdentityCheck(
            "round trip xdot",
            xdot.compose(Q, V) - GSeries.constant(qdot, f.order),
        ),
        IdentityCheck("Vt free of xdot", kinetic),
    ]


def build_checked_map(spec, f=None, gauge=None, sector=None):
    """
    Darboux map, normal form and the map_checks of the result.

    Failed checks are returned, not raised.
    """
    gauge = gauge or default_gauge(spec)
    gauge.validate(spec)
    if sector is None:
        sector = reduce(spec, f)
    darboux_map = _MapBuilder(spec, sector, gauge).build()
    normal_form = transport_hamiltonian(darboux_map, sector)
    checks = map_checks(darboux_map, sector, normal_form)
    logger.info(
        "Darboux map built through g^%d in the %s gauge",
        spec.order,
        gauge,
    )
    return darboux_map, normal_form, checks


def build_map(spec, f=None, gauge=None, sector=None):
    """
    Darboux map and normal form of spec through spec.order.

    Raises VerificationError when the finished map fails one of its
    exact self checks.
    """
    darboux_map, normal_form, checks = build_checked_map(
        spec, f, gauge, sector
    )
    for check in checks:
        if not check.passed:
            raise VerificationError(
                f"Darboux map fails {check.name!r} at order "
                f"{check.failing_orders[0]}"
            )
    return darboux_map, normal_form


def grading_violations(spec, darboux_map, normal_form):
    """
    Terms that break the homogeneity of a monomial potential.
    """
    k, l, m = spec.potential.monomial
    a = k + l + m
    problems = []
    for n, mn in enumerate(darboux_map.m, start=1):
        if mn != homogeneous_component(mn, n * (a - 2) + 1):
            degree = n * (a - 2) + 1
            problems.append(f"m_{n} is not of degree {degree}")
    for term in normal_form.v_table:
        n = term.order
        if term.x_pow != (a - 2) * n + 2:
            problems.append(f"Vt_{n} has x^{term.x_pow}")
        if term.omega_pow != (l + 2 * m - 2) * n + 2:
            problems.append(f"Vt_{n} has omega^{term.omega_pow}")
    return problems


@dataclass(frozen=True)
class PositivityEntry:
    order: int
    x_pow: int
    coeff: object
    asserted: bool

    @property
    def positive(self):
        return self.coeff > 0


def positivity_report(normal_form, asserted_through=4):
    """
    Sign of every Vt coefficient; only orders up to asserted_through
    count towards passed().
    """
    return [
        PositivityEntry(
            t.order, t.x_pow, t.coeff, t.order <= asserted_through
        )
        for t in normal_form.v_table
    ]


def positivity_passed(entries):
    return all(e.positive for e in entries if e.asserted)
