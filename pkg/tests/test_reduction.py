import pytest

from hdsector import example_spec, fixtures
from hdsector.algebra import PHASE, GSeries, omega, q, qdot, rational
from hdsector.constraint import FSeries, solve_constraint
from hdsector.model import ModelSpec, Potential
from hdsector.reduction import (
    dirac_bracket_from_constraints,
    dirac_bracket_qqdot,
    energy_check,
    explicit_example_factor,
    explicit_example_hamiltonian,
    hamilton_check,
    phi_poisson_bracket,
    reduce,
    structural_checks,
)


def test_structural_checks_example():
    spec = example_spec(4)
    sector = reduce(spec)
    checks = structural_checks(spec, sector)
    failed = [c.summary() for c in checks if not c.passed]
    assert failed == []


def test_structural_checks_other_potentials():
    cases = [((0, 0, 2), 3), ((2, 0, 2), 2), ((0, 1, 2), 2)]
    for monomial, order in cases:
        spec = ModelSpec(Potential.from_monomial(*monomial), order)
        sector = reduce(spec)
        assert all(c.passed for c in structural_checks(spec, sector))


def test_first_order_values():
    sector = reduce(example_spec(1))
    assert sector.omega_factor[0] == 1
    assert sector.omega_factor[1] == -8 * omega**2 * q
    assert sector.hamiltonian == fixtures.series(
        fixtures.FIRST_ORDER_HAMILTONIAN_TERMS
    )


def test_explicit_example_formulas():
    spec = example_spec(4)
    f = solve_constraint(spec)
    sector = reduce(spec, f)
    assert explicit_example_factor(f) == sector.omega_factor
    assert explicit_example_hamiltonian(f) == sector.hamiltonian


def test_dirac_bracket():
    spec = example_spec(3)
    sector = reduce(spec)
    bracket = dirac_bracket_qqdot(sector)
    assert (bracket * sector.omega_factor) == GSeries.constant(1, 3)
    assert dirac_bracket_from_constraints(spec, sector.f) == bracket
    assert bracket[1] == 8 * omega**2 * q


def test_phi_bracket():
    spec = example_spec(2)
    f = solve_constraint(spec)
    phi = phi_poisson_bracket(spec, f)
    assert phi[0] == -1
    assert phi == -reduce(spec, f).omega_factor


def test_energy_conserved():
    sector = reduce(example_spec(4))
    assert energy_check(sector).passed
    half = rational(1, 2)
    assert sector.hamiltonian[0] == half * (qdot**2 + omega**2 * q**2)


def test_order_mismatch():
    f = solve_constraint(example_spec(2))
    with pytest.raises(ValueError):
        reduce(example_spec(3), f)


def test_hamilton_check_detects_wrong_f():
    spec = example_spec(3)
    f = solve_constraint(spec)
    assert all(c.passed for c in hamilton_check(reduce(spec, f)))
    coeffs = list(f.series)
    coeffs[2] = PHASE.zero
    broken = FSeries(GSeries(tuple(coeffs)))
    checks = hamilton_check(reduce(spec, broken))
    failing = [c.failing_orders[0] for c in checks if not c.passed]
    assert failing
    assert min(failing) == 2
