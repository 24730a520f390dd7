from pathlib import Path

import pytest
from sympy.polys.domains import QQ

from hdsector.config import (
    REPORT_DIR_ENV,
    load_config,
    published_config,
)
from hdsector.darboux import Gauge
from hdsector.errors import ConfigError


@pytest.fixture(autouse=True)
def no_report_dir(monkeypatch):
    monkeypatch.delenv(REPORT_DIR_ENV, raising=False)


def test_defaults():
    config = load_config()
    assert config.spec.order == 4
    assert config.spec.potential.monomial == (1, 0, 2)
    assert config.gauge is None
    assert config.spectrum.beta is None
    assert config.verify.orders == (1, 3)
    assert config.output.directory is None
    assert config.output.formats == ("json", "text")


def test_file_and_overrides(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(
        "model:\n  order: 2\n"
        "darboux:\n  gauge: beta=-1/2\n"
        "spectrum:\n  g: 0.02\n"
    )
    config = load_config(path, {"spectrum": {"g": 0.03}})
    assert config.spec.order == 2
    assert config.gauge == Gauge("beta", QQ(-1, 2))
    assert config.spectrum.g == 0.03


def test_problems_are_collected():
    with pytest.raises(ConfigError) as info:
        load_config(
            overrides={
                "model": {"order": -1},
                "spectrum": {"levels": 0, "beta": "half"},
                "verify": {"g_values": [0.01]},
            }
        )
    assert len(info.value.problems) == 4


def test_unknown_keys(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("model:\n  degree: 3\nplots:\n  show: true\n")
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert any("model.degree" in p for p in info.value.problems)
    assert any("[plots]" in p for p in info.value.problems)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.yaml")


def test_malformed_file(tmp_path):
    path = tmp_path / "run.yaml"
    for text in ["model: [order\n", "- 1\n- 2\n"]:
        path.write_text(text)
        with pytest.raises(ConfigError):
            load_config(path)


def test_gauge_needs_odd_degree():
    with pytest.raises(ConfigError):
        load_config(
            overrides={
                "model": {"k": 2, "l": 0, "m": 2},
                "darboux": {"gauge": "parity"},
            }
        )


def test_potential_problems():
    with pytest.raises(ConfigError):
        load_config(overrides={"model": {"m": 1}})


def test_terms():
    config = load_config(
        overrides={"model": {"terms": [{"q": 2, "qddot": 2}]}}
    )
    assert config.spec.potential.monomial == (2, 0, 2)


def test_report_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(REPORT_DIR_ENV, str(tmp_path))
    assert load_config().output.directory == Path(tmp_path)
    flagged = load_config(overrides={"output": {"directory": "out"}})
    assert flagged.output.directory == Path("out")


def test_digest():
    a = load_config(overrides={"model": {"order": 2}})
    b = load_config(overrides={"model": {"order": 2}})
    c = load_config(overrides={"model": {"order": 3}})
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()


def test_published_config():
    user = load_config(
        overrides={
            "model": {"k": 0, "m": 3, "order": 1},
            "darboux": {"gauge": "minimal"},
        }
    )
    published = published_config(user)
    default = published_config(load_config())
    assert published.spec == default.spec
    assert published.spec.order == 4
    assert published.gauge == Gauge("parity")
    assert published.digest() == default.digest()
    assert published.digest() != user.digest()
