"""
Run configuration: a YAML file with model, darboux, spectrum, verify
and output sections, overridden by command line flags.
"""

import copy
import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import yaml

from .algebra import rational_from_str
from .darboux import Gauge
from .errors import ConfigError, HDSectorError
from .model import ModelSpec, Potential

logger = logging.getLogger(__name__)

REPORT_DIR_ENV = "HDSECTOR_REPORT_DIR"

DEFAULTS = {
    "model": {"k": 1, "l": 0, "m": 2, "terms": [], "order": 4},
    "darboux": {"gauge": ""},
    "spectrum": {
        "beta": "",
        "g": 0.01,
        "levels": 5,
        "hbar": 1.0,
        "omega": 1.0,
        "basis_size": 200,
        "tol": 1e-5,
    },
    "verify": {
        "g_values": [0.01, 0.005],
        "orders": [1, 3],
        "omega": 1.0,
        "q0": 0.5,
        "qdot0": 0.0,
        "horizon": 20.0,
        "tol": 1e-12,
        "drift_q0": 0.1,
        "drift_bound": 1e-6,
    },
    "output": {"directory": "", "formats": ["json", "text"]},
}

FORMATS = ("json", "text")


@dataclass(frozen=True)
class SpectrumConfig:
    beta: object
    g: float
    levels: int
    hbar: float
    omega: float
    basis_size: int
    tol: float


@dataclass(frozen=True)
class VerifyConfig:
    g_values: tuple
    orders: tuple
    omega: float
    q0: float
    qdot0: float
    horizon: float
    tol: float
    drift_q0: float
    drift_bound: float


@dataclass(frozen=True)
class OutputConfig:
    directory: object
    formats: tuple


@dataclass(frozen=True)
class RunConfig:
    spec: ModelSpec
    gauge: object
    spectrum: SpectrumConfig
    verify: VerifyConfig
    output: OutputConfig
    raw: dict

    def digest(self):
        """
        sha256 of the canonical JSON form of the merged settings,
        leaving out where reports are written.
        """
        settings = {
            k: v for k, v in self.raw.items() if k != "output"
        }
        text = json.dumps(
            settings, sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(text.encode()).hexdigest()


def _merge(settings, source, origin, problems):
    for section, values in source.items():
        if section not in DEFAULTS:
            problems.append(f"{origin}: unknown section [{section}]")
            continue
        if not isinstance(values, dict):
            problems.append(f"{origin}: [{section}] must be a table")
            continue
        for key, value in values.items():
            if key not in DEFAULTS[section]:
                problems.append(
                    f"{origin}: unknown key {section}.{key}"
                )
            else:
                settings[section][key] = value


def _number(section, key, value, problems, positive=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(
            f"{section}.{key} must be a number, got {value!r}"
        )
        return None
    if positive and value <= 0:
        problems.append(
            f"{section}.{key} must be positive, got {value}"
        )
    return float(value)


def _integer(section, key, value, problems, minimum=0):
    if isinstance(value, bool) or not isinstance(value, int):
        problems.append(
            f"{section}.{key} must be an integer, got {value!r}"
        )
        return None
    if value < minimum:
        problems.append(
            f"{section}.{key} must be >= {minimum}, got {value}"
        )
    return value


def _model(values, problems):
    order = _integer("model", "order", values["order"], problems)
    try:
        if values["terms"]:
            potential = Potential.from_terms(values["terms"])
        else:
            potential = Potential.from_monomial(
                values["k"], values["l"], values["m"]
            )
    except (HDSectorError, ValueError, TypeError, KeyError) as e:
        problems.append(f"model: {e}")
        return None
    if order is None or order < 0:
        return None
    return ModelSpec(potential, order)


def _gauge(value, problems):
    if not value:
        return None
    try:
        return Gauge.parse(value)
    except ValueError as e:
        problems.append(f"darboux.gauge: {e}")
        return None


def _spectrum(values, problems):
    beta = None
    if values["beta"] not in ("", None):
        try:
            beta = rational_from_str(values["beta"])
        except ValueError:
            problems.append(
                f"spectrum.beta must be a rational such as '-1/2', "
                f"got {values['beta']!r}"
            )
    g = _number(
        "spectrum", "g", values["g"], problems, positive=False
    )
    if g is not None and g < 0:
        problems.append(f"spectrum.g must be non-negative, got {g}")
    levels = _integer(
        "spectrum", "levels", values["levels"], problems, 1
    )
    basis = _integer(
        "spectrum", "basis_size", values["basis_size"], problems, 1
    )
    if levels and basis and basis < levels:
        problems.append(
            "spectrum.basis_size must be >= spectrum.levels"
        )
    return SpectrumConfig(
        beta,
        g,
        levels,
        _number("spectrum", "hbar", values["hbar"], problems),
        _number("spectrum", "omega", values["omega"], problems),
        basis,
        _number("spectrum", "tol", values["tol"], problems),
    )


def _verify(values, problems):
    g_values = values["g_values"]
    if not isinstance(g_values, list) or len(g_values) < 2:
        problems.append(
            "verify.g_values must list at least two values"
        )
        g_values = []
    g_values = tuple(
        _number("verify", "g_values", g, problems) for g in g_values
    )
    orders = values["orders"]
    if not isinstance(orders, list) or not orders:
        problems.append("verify.orders must be a non-empty list")
        orders = []
    orders = tuple(
        _integer("verify", "orders", n, problems, 1) for n in orders
    )
    return VerifyConfig(
        g_values,
        orders,
        _number("verify", "omega", values["omega"], problems),
        _number(
            "verify", "q0", values["q0"], problems, positive=False
        ),
        _number(
            "verify",
            "qdot0",
            values["qdot0"],
            problems,
            positive=False,
        ),
        _number("verify", "horizon", values["horizon"], problems),
        _number("verify", "tol", values["tol"], problems),
        _number("verify", "drift_q0", values["drift_q0"], problems),
        _number(
            "verify", "drift_bound", values["drift_bound"], problems
        ),
    )


def _output(values, problems):
    formats = values["formats"]
    if isinstance(formats, str):
        formats = [formats]
    unknown = [f for f in formats if f not in FORMATS]
    if unknown:
        problems.append(
            f"output.formats: unknown format(s) {unknown}, "
            f"expected {list(FORMATS)}"
        )
    directory = values["directory"] or os.environ.get(REPORT_DIR_ENV)
    return OutputConfig(
        Path(directory) if directory else None, tuple(formats)
    )


def load_config(path=None, overrides=None):
    """
    Merge defaults, the YAML file at path and overrides, then
    validate.

    overrides maps section names to dicts of values, like the file.
    Every problem found is reported in a single ConfigError.
    """
    settings = copy.deepcopy(DEFAULTS)
    problems = []
    if path is not None:
        try:
            with open(path) as fp:
                data = yaml.safe_load(fp) or {}
            if isinstance(data, dict):
                _merge(settings, data, str(path), problems)
            else:
                problems.append(f"{path}: expected sections")
        except OSError as e:
            problems.append(f"cannot read {path}: {e.strerror}")
        except yaml.YAMLError as e:
            problems.append(f"{path}: {e}")
    if overrides:
        _merge(settings, overrides, "flags", problems)
    if settings["model"]["terms"]:
        for key in ("k", "l", "m"):
            settings["model"][key] = None
    spec = _model(settings["model"], problems)
    gauge = _gauge(settings["darboux"]["gauge"], problems)
    if spec is not None and gauge is not None:
        try:
            gauge.validate(spec)
        except HDSectorError as e:
            problems.append(f"darboux.gauge: {e}")
    config = RunConfig(
        spec,
        gauge,
        _spectrum(settings["spectrum"], problems),
        _verify(settings["verify"], problems),
        _output(settings["output"], problems),
        settings,
    )
    if problems:
        raise ConfigError(problems)
    logger.debug("Configuration %s", config.digest())
    return config


def published_config(config):
    """
    config switched to the published q qddot^2 example through g^4 in
    the parity gauge, with raw rewritten so digest() describes it.
    """
    raw = copy.deepcopy(config.raw)
    raw["model"] = copy.deepcopy(DEFAULTS["model"])
    raw["model"]["order"] = 4
    raw["darboux"] = {"gauge": "parity"}
    return dataclasses.replace(
        config,
        spec=_model(raw["model"], []),
        gauge=Gauge("parity"),
        raw=raw,
    )
