import numpy as np
import pytest

from hdsector import (
    Gauge,
    build_map,
    example_spec,
    reduce,
    solve_constraint,
)
from hdsector.errors import DomainError
from hdsector.verify import (
    compile_series,
    el_residual,
    energy_drift,
    instability_signature,
    integrate_constrained,
    normal_form_compare,
    numeric_ostrogradski_h,
    scaling_exponent,
    scaling_study,
)


def test_ostrogradski_h():
    g = 0.01
    for w in [1.0, 2.0]:
        h = numeric_ostrogradski_h(
            example_spec(1), 1.0, 0.0, 0.0, 2 * g * w**2, g, w
        )
        assert abs(h - (0.5 * w**2 - g * w**4)) < 10**-12


def test_ostrogradski_h_singular():
    with pytest.raises(DomainError):
        numeric_ostrogradski_h(
            example_spec(1), 0.0, 1.0, 0.0, 0.1, 0.01
        )


def test_ostrogradski_h_on_sector():
    g = 0.001
    sector = reduce(example_spec(4))
    x, v = 0.5, 0.25
    p1, p2, h = (
        float(compile_series(s, 1.0, g)(x, v))
        for s in (sector.p1, sector.p2, sector.hamiltonian)
    )
    full = numeric_ostrogradski_h(example_spec(4), x, v, p1, p2, g)
    assert abs(full - h) < 10**-10


def test_scaling_exponent():
    g = np.array([0.1, 0.05, 0.01])
    assert abs(scaling_exponent(g, 3 * g**2) - 2) < 10**-9
    with pytest.raises(ValueError):
        scaling_exponent([0.1], [1.0])
    with pytest.raises(ValueError):
        scaling_exponent([0.1, 0.2], [1.0, 0.0])


def test_instability_signature():
    g = 0.01
    signature = instability_signature(reduce(example_spec(2)), g)
    assert signature.negative
    assert abs(signature.value + 0.5 / g**2) < 10**-6


def test_time_reversal():
    f = solve_constraint(example_spec(3))
    g, t_end = 0.01, 5.0
    traj = integrate_constrained(f, 0.4, 0.1, t_end, g)
    back = integrate_constrained(
        f, traj.q[-1], -traj.qdot[-1], t_end, g
    )
    assert abs(back.q[-1] - 0.4) < 10**-8
    assert abs(back.qdot[-1] + 0.1) < 10**-8


def test_energy_drift_bound():
    spec = example_spec(3)
    f = solve_constraint(spec)
    traj = integrate_constrained(f, 0.1, 0.0, 20.0, 0.01)
    drift = energy_drift(reduce(spec, f), traj)
    assert drift.maximum < 10**-6
    assert abs(drift.initial - 0.005) < 10**-4


def test_residual_and_normal_form_are_small():
    spec = example_spec(2)
    f = solve_constraint(spec)
    darboux_map, normal_form = build_map(spec, f)
    traj = integrate_constrained(f, 0.3, 0.0, 10.0, 0.01)
    assert el_residual(spec, f, traj) < 10**-4
    deviation = normal_form_compare(darboux_map, normal_form, traj)
    assert deviation < 10**-3


def test_tolerances():
    f = solve_constraint(example_spec(1))
    with pytest.raises(ValueError):
        integrate_constrained(f, 0.1, 0.0, 1.0, 0.01, rtol=0.0)


@pytest.mark.slow
def test_scaling_study():
    spec = example_spec()
    report = scaling_study(
        spec.potential, [0.01, 0.005], [1, 2], horizon=10.0
    )
    assert len(report.rows) == 4
    assert set(report.exponents) == {
        (n, name)
        for n in [1, 2]
        for name in ["residual", "drift", "deviation"]
    }
    assert report.passed()


def test_harmonic_limit():
    spec = example_spec(2)
    f = solve_constraint(spec)
    w = 1.3
    traj = integrate_constrained(f, 1.0, 0.0, 20.0, 0.0, w)
    assert np.max(np.abs(traj.q - np.cos(w * traj.times))) < 10**-8
    assert energy_drift(reduce(spec, f), traj).maximum < 10**-10
    darboux_map, normal_form = build_map(spec, f)
    deviation = normal_form_compare(darboux_map, normal_form, traj)
    assert deviation < 10**-8


def test_drift_falls_with_order():
    drifts = []
    for order in [1, 3]:
        spec = example_spec(order)
        f = solve_constraint(spec)
        traj = integrate_constrained(f, 0.5, 0.0, 10.0, 0.01)
        drifts.append(energy_drift(reduce(spec, f), traj).maximum)
    assert drifts[0] > drifts[1]


def test_beta_maps_track_the_motion():
    spec = example_spec(2)
    f = solve_constraint(spec)
    traj = integrate_constrained(f, 0.3, 0.0, 10.0, 0.01)
    for text in ["0", "-1"]:
        darboux_map, normal_form = build_map(
            spec, f, Gauge.parse(f"beta={text}")
        )
        assert (
            normal_form_compare(darboux_map, normal_form, traj)
            < 10**-3
        )
