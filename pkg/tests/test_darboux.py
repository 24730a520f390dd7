import numpy as np
import pytest
from sympy.polys.domains import QQ

from hdsector import example_spec, fixtures
from hdsector.algebra import (
    PHASE,
    GSeries,
    IdentityCheck,
    omega,
    phase_monomial,
    q,
    qdot,
    rational,
)
from hdsector.darboux import (
    Gauge,
    build_checked_map,
    build_map,
    d0_apply,
    d0_solve,
    default_gauge,
    grading_violations,
    invert_map,
    map_checks,
    positivity_passed,
    positivity_report,
    zero_mode_cancellation,
)
from hdsector.errors import GaugeError, VerificationError
from hdsector.model import ModelSpec, Potential
from hdsector.reduction import reduce

BETAS = ["-1", "-1/2", "0", "1", "3/2"]


def test_d0_solve_quadratic():
    phi, zero_mode = d0_solve(omega**2 * q**2)
    half = rational(1, 2)
    assert zero_mode == half * (omega**2 * q**2 + qdot**2)
    assert phi == -half * q * qdot
    assert d0_apply(phi) + zero_mode == omega**2 * q**2


def test_d0_solve_random():
    rng = np.random.default_rng(7)
    for _ in range(100):
        degree = int(rng.integers(1, 6))
        offset = int(rng.integers(-3, 4))
        terms = {}
        for i in range(degree + 1):
            if rng.random() < 0.7:
                num = int(rng.integers(-20, 21))
                c = QQ(num, int(rng.integers(1, 7)))
                terms[(i, degree - i, offset + i)] = c
        rhs = PHASE.from_dict(terms)
        phi, zero_mode = d0_solve(rhs)
        assert d0_apply(phi) + zero_mode == rhs
        assert not d0_apply(zero_mode)


def test_d0_solve_without_omega():
    phi, zero_mode = d0_solve(q**2)
    half = rational(1, 2)
    inverse_square = phase_monomial(1, 0, 0, -2)
    assert zero_mode == half * (q**2 + inverse_square * qdot**2)
    assert phi == -half * inverse_square * q * qdot
    assert d0_apply(phi) + zero_mode == q**2
    phi, zero_mode = d0_solve(q)
    assert phi == -inverse_square * qdot
    assert not zero_mode
    phi, zero_mode = d0_solve(q**2 * qdot)
    assert phi == rational(1, 3) * q**3
    assert not zero_mode


def test_zero_mode_cancellation():
    rhs = omega**2 * q**2 + 3 * omega**4 * q**2 * qdot**2
    S = zero_mode_cancellation(d0_solve(rhs)[1])
    assert not d0_solve(rhs + S)[1]
    assert S.degree(qdot) == 0


def test_gauge_parse():
    assert Gauge.parse("parity") == Gauge("parity")
    gauge = Gauge.parse("beta=-1/2")
    assert gauge.beta == QQ(-1, 2)
    assert str(gauge) == "beta=-1/2"
    for text in ["beta=x", "beta", "gauge"]:
        with pytest.raises(ValueError):
            Gauge.parse(text)


def test_gauge_validation():
    even = ModelSpec(Potential.from_monomial(2, 0, 2), 2)
    with pytest.raises(GaugeError):
        Gauge("parity").validate(even)
    with pytest.raises(GaugeError):
        Gauge.parse("beta=0").validate(example_spec(3))
    assert default_gauge(even) == Gauge("minimal")
    assert default_gauge(example_spec()) == Gauge("parity")


def test_example_map():
    spec = example_spec(4)
    darboux_map, normal_form = build_map(spec)
    Q, _ = invert_map(darboux_map)
    assert Q == fixtures.series(fixtures.INVERSE_MAP_TERMS)
    assert normal_form.potential == fixtures.series(
        fixtures.NORMAL_FORM_TERMS
    )
    assert darboux_map.m[0] == omega**2 * q**2 - 2 * qdot**2
    assert grading_violations(spec, darboux_map, normal_form) == []


def test_example_normal_form_positive():
    _, normal_form = build_map(example_spec(4))
    entries = positivity_report(normal_form)
    assert [(e.order, e.x_pow) for e in entries] == [(2, 4), (4, 6)]
    assert positivity_passed(entries)
    assert normal_form.coefficient(2, 4) == (
        rational(25, 6) * omega**6 * q**4
    )


def test_minimal_first_order_map():
    darboux_map, _ = build_map(
        example_spec(1), gauge=Gauge("minimal")
    )
    assert darboux_map.m[0] == -4 * qdot**2


def test_beta_family():
    for text in BETAS:
        gauge = Gauge.parse(f"beta={text}")
        darboux_map, normal_form = build_map(
            example_spec(2), gauge=gauge
        )
        x, xdot = darboux_map.forward()
        fx, fxdot = fixtures.beta_forward_map(gauge.beta)
        assert x == fx
        assert xdot == fxdot
        assert normal_form.potential == fixtures.beta_normal_form(
            gauge.beta
        )


def test_map_checks_other_potentials():
    cases = [((0, 0, 2), 3), ((2, 0, 2), 2), ((0, 1, 2), 2)]
    for monomial, order in cases:
        spec = ModelSpec(Potential.from_monomial(*monomial), order)
        sector = reduce(spec)
        darboux_map, normal_form = build_map(
            spec, gauge=Gauge("minimal"), sector=sector
        )
        checks = map_checks(darboux_map, sector, normal_form)
        assert all(c.passed for c in checks)
        assert not grading_violations(spec, darboux_map, normal_form)


def test_normal_form_hamiltonian():
    _, normal_form = build_map(example_spec(2))
    half = rational(1, 2)
    H = normal_form.hamiltonian()
    assert H[0] == half * qdot**2 + half * omega**2 * q**2
    assert normal_form.force()[2] == (
        -rational(50, 3) * omega**6 * q**3
    )


def test_map_with_inverse_omega_powers():
    spec = ModelSpec(Potential.from_monomial(3, 0, 2), 3)
    darboux_map, normal_form, checks = build_checked_map(
        spec, gauge=Gauge("parity")
    )
    assert [c.name for c in checks if not c.passed] == []
    assert not grading_violations(spec, darboux_map, normal_form)
    assert not [t for t in normal_form.v_table if t.order % 2]


def test_failed_checks(monkeypatch):
    def failing(darboux_map, sector, normal_form):
        residual = GSeries.of([PHASE.zero, q], darboux_map.order)
        return [IdentityCheck("symplectic pullback", residual)]

    monkeypatch.setattr("hdsector.darboux.map_checks", failing)
    spec = example_spec(2)
    darboux_map, _, checks = build_checked_map(spec)
    assert darboux_map.order == 2
    assert checks[0].failing_orders == [1]
    with pytest.raises(VerificationError):
        build_map(spec)
