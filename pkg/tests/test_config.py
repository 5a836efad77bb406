from __future__ import annotations

import pytest

from maserthermo.config import DEFAULT_TOLERANCES, Tolerances, load_config
from maserthermo.errors import ConfigError


def test_yaml_config_with_env_interpolation(tmp_path, monkeypatch):
    monkeypatch.setenv("MASER_TEST_NU", "2.5")
    path = tmp_path / "run.yaml"
    path.write_text(
        "omega_u: 10\n"
        "n_u: ${MASER_TEST_NU}\n"
        "sweep:\n  - delta:-2:2:5\n"
        "tolerances:\n  quadrature: 1.0e-6\n",
        encoding="utf-8",
    )
    cfg = load_config(path)
    assert cfg["omega_u"] == 10
    assert cfg["n_u"] == 2.5
    assert cfg["sweep"] == ["delta:-2:2:5"]
    assert cfg["tolerances"] == {"quadrature": 1e-6}


def test_unset_variable_expands_to_none(tmp_path, monkeypatch):
    monkeypatch.delenv("MASER_TEST_MISSING", raising=False)
    path = tmp_path / "run.yml"
    path.write_text("n_l: ${MASER_TEST_MISSING}\n", encoding="utf-8")
    assert load_config(path) == {"n_l": None}


def test_flat_config_grammar(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text(
        "# benchmark\n"
        "omega_u = 10   # upper level\n"
        "\n"
        "verify = true\n"
        "sweep = delta:-2:2:81\n"
        "sweep = epsilon:0.001:10:40:log\n"
        "tolerances.identity = 1e-11\n",
        encoding="utf-8",
    )
    cfg = load_config(path)
    assert cfg["omega_u"] == 10
    assert cfg["verify"] is True
    assert cfg["sweep"] == ["delta:-2:2:81", "epsilon:0.001:10:40:log"]
    assert cfg["tolerances"]["identity"] == pytest.approx(1e-11)


def test_flat_config_rejects_lines_without_equals(tmp_path):
    path = tmp_path / "bad.conf"
    path.write_text("omega_u 10\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="line 1"):
        load_config(path)


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.yaml")


def test_tolerances_from_mapping():
    tol = Tolerances.from_mapping({"quadrature": "1e-6"})
    assert tol.quadrature == pytest.approx(1e-6)
    assert tol.identity == DEFAULT_TOLERANCES.identity
    assert Tolerances.from_mapping(None) == DEFAULT_TOLERANCES
    assert tol.replace(trace=1e-9).trace == pytest.approx(1e-9)
    with pytest.raises(ConfigError, match="unknown tolerance"):
        Tolerances.from_mapping({"quadratur": 1e-6})
