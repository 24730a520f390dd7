"""
Floating point checks of the perturbative sector.

The exact series are compiled once per (omega, g) into numpy
functions. Trajectories integrate qddot = f(q, qdot) with an explicit
8th order Runge-Kutta method; the fourth order equation of motion is
only evaluated along them, with q3 and q4 obtained by applying D to f.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import newton
from sympy import lambdify
from sympy.polys.domains import QQ
from sympy.polys.rings import ring

from .algebra import JET, jet_qddot
from .constraint import solve_constraint
from .darboux import build_map, invert_map
from .errors import DomainError, IntegrationError
from .model import ModelSpec, euler_lagrange, lagrangian_value
from .reduction import reduce

logger = logging.getLogger(__name__)

# Phase ring with g as a generator, for series evaluated at a fixed g.
NUMERIC, n_q, n_qdot, n_omega, n_g = ring("q, qdot, omega, g", QQ)


def series_in_g(series):
    terms = {}
    for n, coeff in enumerate(series):
        for (i, j, k), c in coeff.items():
            terms[(i, j, k, n)] = c
    return NUMERIC.from_dict(terms)


def _d_numeric(p, F):
    return p.diff(n_q) * n_qdot + p.diff(n_qdot) * F


def compile_poly(p, omega, g):
    """
    Float evaluator (q, qdot) -> value of a polynomial in q, qdot,
    omega and g.
    """
    fn = lambdify(NUMERIC.symbols, p.as_expr(), "numpy")

    def evaluate(x, v):
        return fn(x, v, omega, g) + np.zeros_like(x, dtype=float)

    return evaluate


def compile_series(series, omega, g):
    return compile_poly(series_in_g(series), omega, g)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    omega: float
    g: float
    order: int
    rtol: float
    atol: float

    @property
    def q(self):
        return self.states[:, 0]

    @property
    def qdot(self):
        return self.states[:, 1]


def _integrate(rhs, y0, times, rtol, atol):
    sol = solve_ivp(
        rhs,
        (times[0], times[-1]),
        y0,
        method="DOP853",
        t_eval=times,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise IntegrationError(
            f"Integration stopped at t={sol.t[-1]:.6g}: {sol.message}"
        )
    return sol.y.T


def integrate_constrained(
    f,
    q0,
    qdot0,
    t_end,
    g,
    omega=1.0,
    rtol=1e-12,
    atol=1e-12,
    samples=2001,
):
    """
    Solve qddot = f(q, qdot) on [0, t_end].
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("Tolerances must be positive")
    F = compile_series(f.series, omega, g)

    def rhs(t, y):
        return [y[1], F(y[0], y[1])]

    times = np.linspace(0.0, t_end, samples)
    states = _integrate(rhs, [q0, qdot0], times, rtol, atol)
    return Trajectory(times, states, omega, g, f.order, rtol, atol)


@dataclass
class _SectorFunctions:
    """
    f, Df and D^2 f at fixed omega and g.
    """

    f: object
    g: float
    omega: float
    jets: tuple = field(init=False)

    def __post_init__(self):
        F = series_in_g(self.f.series)
        DF = _d_numeric(F, F)
        D2F = _d_numeric(DF, F)
        self.jets = tuple(
            compile_poly(p, self.omega, self.g) for p in (F, DF, D2F)
        )

    def __call__(self, x, v):
        return [fn(x, v) for fn in self.jets]


def el_residual(spec, f, traj):
    """
    Largest |qddot + omega^2 q + g E| along the trajectory, with
    qddot, q3 and q4 replaced by f, Df and D^2 f.
    """
    coupled = euler_lagrange(spec).coupled
    E = lambdify(JET.symbols, coupled.as_expr(), "numpy")
    F, DF, D2F = _SectorFunctions(f, traj.g, traj.omega)(
        traj.q, traj.qdot
    )
    res = (
        F
        + traj.omega**2 * traj.q
        + traj.g * E(traj.q, traj.qdot, F, DF, D2F, traj.omega)
    )
    return float(np.max(np.abs(res)))


@dataclass(frozen=True)
class EnergyDrift:
    initial: float
    maximum: float


def energy_drift(sector, traj):
    H = compile_series(sector.hamiltonian, traj.omega, traj.g)
    values = H(traj.q, traj.qdot)
    return EnergyDrift(
        float(values[0]), float(np.max(np.abs(values - values[0])))
    )


def normal_form_compare(darboux_map, normal_form, traj):
    """
    Largest deviation between traj and the same motion computed in
    Darboux coordinates, where xddot = -omega^2 x - Vt'(x).
    """
    w, g = traj.omega, traj.g
    x_of, xdot_of = (
        compile_series(s, w, g) for s in darboux_map.forward()
    )
    force = compile_series(normal_form.potential.diff("q"), w, g)

    def rhs(t, y):
        return [y[1], -(w**2) * y[0] - force(y[0], y[1])]

    start = [
        float(x_of(traj.q[0], traj.qdot[0])),
        float(xdot_of(traj.q[0], traj.qdot[0])),
    ]
    xs = _integrate(rhs, start, traj.times, traj.rtol, traj.atol)
    Q, V = (compile_series(s, w, g) for s in invert_map(darboux_map))
    q = Q(xs[:, 0], xs[:, 1])
    qdot = V(xs[:, 0], xs[:, 1])
    return float(
        max(
            np.max(np.abs(q - traj.q)),
            np.max(np.abs(qdot - traj.qdot)),
        )
    )


@dataclass(frozen=True)
class _NewtonParams:
    tol: float = 1e-14
    maxiter: int = 50
    singular: float = 1e-12


def numeric_ostrogradski_h(spec, q1, q2, p1, p2, g, omega=1.0):
    """
    Ostrogradski Hamiltonian H = p1 q2 + p2 qddot - L off the sector.

    qddot solves p2 = -g dV/dqddot(q1, q2, qddot); Newton's method
    starts from the harmonic value -omega^2 q1.
    """
    params = _NewtonParams()
    V = spec.potential.terms
    dV = lambdify(JET.symbols, V.diff(jet_qddot).as_expr(), "numpy")
    d2V = lambdify(
        JET.symbols,
        V.diff(jet_qddot).diff(jet_qddot).as_expr(),
        "numpy",
    )

    def args(a):
        return (q1, q2, a, 0.0, 0.0, omega)

    def curvature(a):
        return g * d2V(*args(a))

    if abs(curvature(-(omega**2) * q1)) < params.singular:
        raise DomainError(
            f"p2 = -g dV/dqddot cannot be solved for qddot at "
            f"q1={q1}, q2={q2}: d^2V/dqddot^2 vanishes"
        )
    root, info = newton(
        lambda a: p2 + g * dV(*args(a)),
        -(omega**2) * q1,
        fprime=curvature,
        tol=params.tol,
        maxiter=params.maxiter,
        full_output=True,
        disp=False,
    )
    if not info.converged or abs(curvature(root)) < params.singular:
        raise DomainError(
            f"Newton iteration for qddot failed at q1={q1}, q2={q2}, "
            f"p2={p2}: {info.flag}"
        )
    L = lagrangian_value(spec)
    lagrangian = lambdify(
        JET.symbols, L.free.as_expr(), "numpy"
    )(*args(root)) + g * lambdify(
        JET.symbols, L.coupled.as_expr(), "numpy"
    )(*args(root))
    return float(p1 * q2 + p2 * root - lagrangian)


def scaling_exponent(g_values, values):
    """
    Slope of log(values) against log(g).
    """
    g_values, values = np.asarray(g_values), np.asarray(values)
    if len(g_values) < 2 or np.any(values <= 0):
        raise ValueError(
            "Need at least two g values and positive measurements"
        )
    slope, _ = np.polyfit(np.log(g_values), np.log(values), 1)
    return float(slope)


@dataclass(frozen=True)
class InstabilitySignature:
    q: float
    value: float

    @property
    def negative(self):
        return self.value < 0


def instability_signature(sector, g, omega=1.0):
    """
    First order [H] at q = 1/g, qdot = 0.
    """
    H = compile_series(sector.hamiltonian.truncate(1), omega, g)
    x = 1.0 / g
    return InstabilitySignature(x, float(H(x, 0.0)))


@dataclass(frozen=True)
class ScalingRow:
    order: int
    g: float
    residual: float
    drift: float
    deviation: float


@dataclass(frozen=True)
class ScalingReport:
    rows: tuple
    exponents: dict

    def passed(self, slack=0.5):
        return all(
            abs(exponent - (order + 1)) <= slack
            for (order, _), exponent in self.exponents.items()
        )


def scaling_study(
    potential,
    g_values,
    orders,
    q0=0.5,
    qdot0=0.0,
    omega=1.0,
    horizon=20.0,
    tol=1e-12,
    gauge=None,
):
    """
    Residual, energy drift and normal form deviation for every
    (order, g), with the fitted power of g per order and quantity.
    """
    rows, exponents = [], {}
    for order in orders:
        spec = ModelSpec(potential, order)
        f = solve_constraint(spec)
        sector = reduce(spec, f)
        darboux_map, normal_form = build_map(spec, f, gauge, sector)
        per_order = []
        for g in g_values:
            traj = integrate_constrained(
                f, q0, qdot0, horizon / omega, g, omega, tol, tol
            )
            row = ScalingRow(
                order,
                g,
                el_residual(spec, f, traj),
                energy_drift(sector, traj).maximum,
                normal_form_compare(darboux_map, normal_form, traj),
            )
            logger.info("Scaling %s", row)
            per_order.append(row)
        rows += per_order
        for name in ("residual", "drift", "deviation"):
            exponents[(order, name)] = scaling_exponent(
                [r.g for r in per_order],
                [getattr(r, name) for r in per_order],
            )
    return ScalingReport(tuple(rows), exponents)
