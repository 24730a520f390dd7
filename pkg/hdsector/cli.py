"""
Perturbative Hamiltonian analysis of second derivative Lagrangians.
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import fixtures
from .algebra import (
    IdentityCheck,
    format_phase,
    homogeneous_component,
    jet_to_json,
    phase_to_json,
    rational_to_str,
    series_to_json,
)
from .config import FORMATS, load_config, published_config
from .constraint import (
    constraint_check,
    example_consistency,
    expected_degree,
    solve_constraint,
)
from .darboux import (
    Gauge,
    build_checked_map,
    build_map,
    default_gauge,
    grading_violations,
    invert_map,
    positivity_passed,
    positivity_report,
)
from .errors import ConfigError, HDSectorError
from .model import ModelSpec
from .reduction import (
    dirac_bracket_qqdot,
    explicit_example_factor,
    explicit_example_hamiltonian,
    reduce,
    structural_checks,
)
from .report import RunReport
from .spectrum import (
    CubicQuarticModel,
    beta_family_energy,
    fock_diagonalize,
    rs_energies,
)
from .verify import (
    compile_series,
    energy_drift,
    instability_signature,
    integrate_constrained,
    numeric_ostrogradski_h,
    scaling_study,
)

logger = logging.getLogger(__name__)

PIPELINES = {
    "solve-f": ("solve-f",),
    "reduce": ("solve-f", "reduce"),
    "darboux": ("solve-f", "reduce", "darboux"),
    "spectrum": ("solve-f", "reduce", "darboux", "spectrum"),
    "verify": ("solve-f", "reduce", "verify"),
    "reproduce-paper": (
        "solve-f",
        "reduce",
        "darboux",
        "spectrum",
        "verify",
        "published",
    ),
}

PUBLISHED_BETAS = ("-1", "-1/2", "0", "1")

GAUGE_HELP = "minimal, parity or beta=<rational>"


class _Pipeline:
    def __init__(self, config, report):
        self.config = config
        self.spec = config.spec
        self.report = report
        self.f = None
        self.sector = None
        self.map = None
        self.normal_form = None

    @property
    def gauge(self):
        return self.config.gauge or default_gauge(self.spec)

    def inputs(self):
        return {
            "potential": jet_to_json(self.spec.potential.terms),
            "order": self.spec.order,
            "gauge": str(self.gauge),
        }

    def identity(self, stage, name, residual):
        self.report.add_identity(stage, IdentityCheck(name, residual))

    def solve_f(self):
        self.f = solve_constraint(self.spec)
        self.report.add_identity(
            "solve-f", constraint_check(self.spec, self.f)
        )
        if self.spec.a is not None:
            graded = all(
                c
                == homogeneous_component(
                    c, expected_degree(self.spec, n)
                )
                for n, c in enumerate(self.f.series)
                if n
            )
            self.report.add_check(
                "solve-f", "f_n homogeneous", graded
            )
        return {
            "f": series_to_json(self.f.series),
            "table": [
                (f"g^{n}", format_phase(c))
                for n, c in enumerate(self.f.series)
            ],
        }

    def reduce(self):
        self.sector = reduce(self.spec, self.f)
        for check in structural_checks(self.spec, self.sector):
            self.report.add_identity("reduce", check)
        s = self.sector
        return {
            "omegaFactor": series_to_json(s.omega_factor),
            "diracBracket": series_to_json(dirac_bracket_qqdot(s)),
            "hRed": series_to_json(s.hamiltonian),
            "table": [
                (f"g^{n}", format_phase(h))
                for n, h in enumerate(s.hamiltonian)
            ],
        }

    def darboux(self):
        self.map, self.normal_form, checks = build_checked_map(
            self.spec, self.f, self.gauge, self.sector
        )
        for check in checks:
            self.report.add_identity("darboux", check)
        if self.spec.a is not None:
            problems = grading_violations(
                self.spec, self.map, self.normal_form
            )
            self.report.add_check(
                "darboux",
                "homogeneity",
                not problems,
                problems=problems,
            )
        entries = positivity_report(self.normal_form)
        if self.gauge.kind == "parity":
            odd = [t for t in self.normal_form.v_table if t.order % 2]
            self.report.add_check(
                "darboux", "Vt parity invariant", not odd
            )
        if self.gauge.kind != "beta":
            self.report.add_check(
                "darboux",
                "Vt positive through g^4",
                positivity_passed(entries),
            )
        x, xdot = self.map.forward()
        q, qdot = invert_map(self.map)
        m = self.map
        return {
            "gauge": str(m.gauge),
            "mList": [phase_to_json(p) for p in m.m],
            "phiList": [phase_to_json(p) for p in m.phi],
            "sList": [phase_to_json(p) for p in m.s],
            "alpha": [
                None if a is None else rational_to_str(a)
                for a in m.alpha
            ],
            "vTable": [
                {
                    "order": t.order,
                    "coeff": rational_to_str(t.coeff),
                    "omegaPow": t.omega_pow,
                    "xPow": t.x_pow,
                }
                for t in self.normal_form.v_table
            ],
            "positivity": [
                {
                    "order": e.order,
                    "xPow": e.x_pow,
                    "positive": e.positive,
                    "asserted": e.asserted,
                }
                for e in entries
            ],
            "forward": {
                "x": series_to_json(x),
                "xdot": series_to_json(xdot),
            },
            "inverse": {
                "q": series_to_json(q),
                "qdot": series_to_json(qdot),
            },
            "table": [
                (f"g^{n}", format_phase(p, ("x", "xdot")))
                for n, p in enumerate(self.normal_form.potential)
            ],
        }

    def spectrum(self):
        cfg = self.config.spectrum
        if cfg.beta is not None:
            model = CubicQuarticModel.from_beta(cfg.beta)
        else:
            model = CubicQuarticModel.from_normal_form(
                self.normal_form
            )
        table = rs_energies(model, cfg.levels - 1)
        rs = table.evaluate(cfg.g, cfg.omega, cfg.hbar)
        fock = fock_diagonalize(
            model,
            cfg.g,
            cfg.basis_size,
            cfg.levels,
            cfg.omega,
            cfg.hbar,
        )
        self.report.add_check(
            "spectrum",
            "Fock ground state matches second order",
            abs(fock.energies[0] - rs[0]) <= cfg.tol,
            difference=float(abs(fock.energies[0] - rs[0])),
        )
        self.report.add_check(
            "spectrum",
            "Fock basis converged",
            fock.converged,
            change=fock.change,
        )
        if cfg.beta is not None:
            closed = all(
                lvl.correction
                == ((4, beta_family_energy(lvl.n, cfg.beta)),)
                for lvl in table
            )
            self.report.add_check(
                "spectrum", "beta family closed form", closed
            )
        levels = [
            {
                "n": lvl.n,
                "correction": [
                    {"omegaPow": k, "coeff": rational_to_str(c)}
                    for k, c in lvl.correction
                ],
                "rs": float(rs[lvl.n]),
                "fock": float(fock.energies[lvl.n]),
            }
            for lvl in table
        ]
        return {
            "c3": rational_to_str(model.c3),
            "c4": rational_to_str(model.c4),
            "levels": levels,
            "table": [("n", "RS", "Fock")]
            + [
                (e["n"], f"{e['rs']:.10f}", f"{e['fock']:.10f}")
                for e in levels
            ],
        }

    def verify(self):
        cfg = self.config.verify
        study = scaling_study(
            self.spec.potential,
            cfg.g_values,
            cfg.orders,
            cfg.q0,
            cfg.qdot0,
            cfg.omega,
            cfg.horizon,
            cfg.tol,
            self.config.gauge,
        )
        exponents = sorted(study.exponents.items())
        for (order, name), exponent in exponents:
            self.report.add_check(
                "verify",
                f"{name} scales as g^{order + 1}",
                abs(exponent - (order + 1)) <= 0.5,
                exponent=exponent,
            )
        drift = self._drift(max(cfg.orders), max(cfg.g_values))
        self.report.add_check(
            "verify",
            "energy drift bound",
            drift <= cfg.drift_bound,
            drift=drift,
        )
        return {
            "rows": [dataclasses.asdict(r) for r in study.rows],
            "exponents": {
                f"order={n}/{name}": e
                for (n, name), e in sorted(study.exponents.items())
            },
            "drift": drift,
            "table": [
                ("order", "g", "residual", "drift", "deviation")
            ]
            + [
                (
                    r.order,
                    r.g,
                    f"{r.residual:.3e}",
                    f"{r.drift:.3e}",
                    f"{r.deviation:.3e}",
                )
                for r in study.rows
            ],
        }

    def _drift(self, order, g):
        cfg = self.config.verify
        spec = ModelSpec(self.spec.potential, order)
        f = solve_constraint(spec)
        traj = integrate_constrained(
            f,
            cfg.drift_q0,
            0.0,
            cfg.horizon / cfg.omega,
            g,
            cfg.omega,
            cfg.tol,
            cfg.tol,
        )
        return energy_drift(reduce(spec, f), traj).maximum

    def published(self):
        f, s = self.f, self.sector
        self.identity(
            "published",
            "f through g^3",
            f.series.truncate(3) - fixtures.series(fixtures.F_TERMS),
        )
        self.identity(
            "published",
            "[H] through g^1",
            s.hamiltonian.truncate(1)
            - fixtures.series(fixtures.FIRST_ORDER_HAMILTONIAN_TERMS),
        )
        self.identity(
            "published", "explicit constraint", example_consistency(f)
        )
        self.identity(
            "published",
            "explicit symplectic factor",
            explicit_example_factor(f) - s.omega_factor,
        )
        self.identity(
            "published",
            "explicit Hamiltonian",
            explicit_example_hamiltonian(f) - s.hamiltonian,
        )
        q, _ = invert_map(self.map)
        self.identity(
            "published",
            "inverse map through g^4",
            q - fixtures.series(fixtures.INVERSE_MAP_TERMS),
        )
        self.identity(
            "published",
            "normal form through g^4",
            self.normal_form.potential
            - fixtures.series(fixtures.NORMAL_FORM_TERMS),
        )
        for text in PUBLISHED_BETAS:
            self._beta_family(Gauge.parse(f"beta={text}"))
        g = self.config.spectrum.g
        self._beta_gap(g)
        signature = instability_signature(s, g)
        self.report.add_check(
            "published",
            "first order [H] negative at q = 1/g",
            signature.negative,
            value=signature.value,
        )
        return self._ostrogradski(g)

    def _beta_family(self, gauge):
        spec = ModelSpec(self.spec.potential, 2)
        f = solve_constraint(spec)
        darboux_map, normal_form = build_map(spec, f, gauge)
        x, xdot = darboux_map.forward()
        fx, fxdot = fixtures.beta_forward_map(gauge.beta)
        self.identity("published", f"{gauge} forward map", x - fx)
        self.identity(
            "published", f"{gauge} forward velocity", xdot - fxdot
        )
        self.identity(
            "published",
            f"{gauge} normal form",
            normal_form.potential
            - fixtures.beta_normal_form(gauge.beta),
        )

    def _beta_gap(self, g):
        """
        Ground state gap between beta = 0 and beta = -1, in the Fock
        basis and at second order.
        """
        cfg = self.config.spectrum
        fock, rs = [], []
        for beta in (0, -1):
            model = CubicQuarticModel.from_beta(beta)
            fock.append(
                fock_diagonalize(
                    model, g, cfg.basis_size, 1, cfg.omega, cfg.hbar
                ).energies[0]
            )
            table = rs_energies(model, 0)
            rs.append(table.evaluate(g, cfg.omega, cfg.hbar)[0])
        gap, expected = fock[0] - fock[1], rs[0] - rs[1]
        self.report.add_check(
            "published",
            "Fock ground state gap of the beta family",
            abs(gap - expected) <= 1e-6,
            gap=float(gap),
            expected=float(expected),
        )

    def _ostrogradski(self, g):
        """
        Ostrogradski H evaluated on the sector against [H].
        """
        s = self.sector
        x, v = 0.5, 0.25
        p1, p2, h = (
            float(compile_series(series, 1.0, g)(x, v))
            for series in (s.p1, s.p2, s.hamiltonian)
        )
        full = numeric_ostrogradski_h(self.spec, x, v, p1, p2, g)
        self.report.add_check(
            "published",
            "Ostrogradski H on the sector",
            abs(full - h) <= 1e-6,
            difference=abs(full - h),
        )
        return {"ostrogradskiH": full, "reducedH": h}


def run(config, command):
    """
    Execute the stages of command and collect them in a RunReport.

    A stage that raises is recorded and stops the pipeline; the
    stages before it stay in the report. Failed checks do not stop it.
    """
    if command == "reproduce-paper":
        config = published_config(config)
    report = RunReport(command, config.digest())
    pipeline = _Pipeline(config, report)
    stages = PIPELINES[command]
    if command == "spectrum" and config.spectrum.beta is not None:
        stages = ("spectrum",)
    for stage in stages:
        logger.info("Stage %s", stage)
        try:
            method = getattr(pipeline, stage.replace("-", "_"))
            report.stages[stage] = method()
        except (HDSectorError, ValueError) as e:
            report.add_error(stage, e, pipeline.inputs())
            break
        except Exception as e:
            logger.exception("Unexpected failure in stage %s", stage)
            report.add_error(stage, e, pipeline.inputs())
            break
    return report


def _parse_monomial(text):
    try:
        k, l, m = (int(part) for part in text.split(","))
    except ValueError:
        raise ConfigError(
            [
                "--monomial expects 'k,l,m' such as '1,0,2', "
                f"got {text!r}"
            ]
        ) from None
    return {"k": k, "l": l, "m": m, "terms": []}


def _overrides(args):
    overrides = {}

    def put(section, key, value):
        if value is not None:
            overrides.setdefault(section, {})[key] = value

    put("model", "order", args.order)
    if args.monomial is not None:
        overrides.setdefault("model", {}).update(
            _parse_monomial(args.monomial)
        )
    if args.output_dir is not None:
        put("output", "directory", str(args.output_dir))
    put("darboux", "gauge", getattr(args, "gauge", None))
    put("spectrum", "beta", getattr(args, "beta", None))
    put("spectrum", "g", getattr(args, "g", None))
    put("spectrum", "levels", getattr(args, "levels", None))
    put("spectrum", "basis_size", getattr(args, "basis_size", None))
    for key in ("g_values", "orders"):
        value = getattr(args, key, None)
        put("verify", key, None if value is None else list(value))
    for key in ("horizon", "tol", "q0"):
        put("verify", key, getattr(args, f"verify_{key}", None))
    return overrides


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-c", "--config", type=Path, help="YAML configuration file"
    )
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="-v for progress, -vv for every order step",
    )
    common.add_argument(
        "--output-dir", type=Path, help="Directory for report files"
    )
    common.add_argument(
        "--format",
        choices=FORMATS,
        default="text",
        help="Format written to stdout",
    )
    common.add_argument(
        "--order", type=int, help="Truncation order N"
    )
    common.add_argument(
        "--monomial",
        help="V = q^k qdot^l qddot^m given as 'k,l,m'",
    )

    parser = argparse.ArgumentParser(
        prog="hdsector", description=__doc__
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser(
        "solve-f", parents=[common], help="Solve the constraint for f"
    )
    sub.add_parser(
        "reduce",
        parents=[common],
        help="Reduced symplectic form and [H]",
    )
    p = sub.add_parser(
        "darboux",
        parents=[common],
        help="Darboux map and normal form",
    )
    p.add_argument("--gauge", help=GAUGE_HELP)
    p = sub.add_parser(
        "spectrum", parents=[common], help="Quantum energy levels"
    )
    p.add_argument("--gauge", help=GAUGE_HELP)
    p.add_argument("--beta", help="Use the beta family, e.g. -1/2")
    p.add_argument("--g", type=float, help="Coupling")
    p.add_argument("--levels", type=int, help="Number of levels")
    p.add_argument("--basis-size", type=int, help="Fock basis size")
    p = sub.add_parser(
        "verify", parents=[common], help="Numeric scaling checks"
    )
    p.add_argument("--g-values", type=float, nargs="+")
    p.add_argument("--orders", type=int, nargs="+")
    p.add_argument("--horizon", dest="verify_horizon", type=float)
    p.add_argument("--tol", dest="verify_tol", type=float)
    p.add_argument("--q0", dest="verify_q0", type=float)
    sub.add_parser(
        "reproduce-paper",
        parents=[common],
        help="Regenerate and check the published example",
    )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(
        args.verbose, logging.DEBUG
    )
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config, _overrides(args))
    except ConfigError as e:
        print(e, file=sys.stderr)
        return 2
    report = run(config, args.command)
    if args.format == "json":
        out = report.to_json()
    else:
        out = report.to_text()
    sys.stdout.write(out)
    if config.output.directory is not None:
        try:
            report.write(
                config.output.directory, config.output.formats
            )
        except OSError as e:
            print(f"Cannot write reports: {e}", file=sys.stderr)
            return 2
    return report.exit_code()


if __name__ == "__main__":
    raise SystemExit(main())
