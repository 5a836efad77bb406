from __future__ import annotations
import os
import re
from dataclasses import dataclass, fields, replace as dc_replace
from pathlib import Path
from dotenv import load_dotenv
import yaml

from maserthermo.errors import ConfigError

load_dotenv()

_ENV_PATTERN = re.compile(r"\$\{([A-Z0-9_]+)\}")

PARAM_KEYS = ("omega_u", "omega_l", "omega_d", "epsilon", "gamma_u", "gamma_l", "n_u", "n_l")


def _env_expand(value: str) -> str:
    # supports ${VAR} interpolation for config strings
    def repl(m):
        return os.getenv(m.group(1), "")
    return _ENV_PATTERN.sub(repl, value)


def _walk(obj):
    if isinstance(obj, dict):
        return {k: _walk(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_walk(x) for x in obj]
    if isinstance(obj, str):
        expanded = _env_expand(obj)
        if expanded != obj:
            # re-type values that came from the environment ("2.5" -> 2.5)
            return _scalar(expanded.strip())
        return obj
    return obj


def _scalar(value: str):
    if not value:
        return None
    parsed = yaml.safe_load(value)
    if isinstance(parsed, str):
        # YAML 1.1 reads 1e-8 as a string
        try:
            return float(parsed)
        except ValueError:
            return parsed
    return parsed


def _parse_flat(text: str) -> dict:
    cfg: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        parsed = _scalar(value)
        if key.startswith("tolerances."):
            cfg.setdefault("tolerances", {})[key.split(".", 1)[1]] = parsed
        elif key == "sweep":
            cfg.setdefault("sweep", []).append(str(value))
        else:
            cfg[key] = parsed
    return cfg


def load_config(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix.lower() in {".yaml", ".yml"}:
        try:
            cfg = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    else:
        cfg = _parse_flat(text)
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return _walk(cfg)


@dataclass(frozen=True)
class Tolerances:
    hermiticity: float = 1e-12
    trace: float = 1e-10
    psd: float = 1e-10
    steady_state: float = 1e-8
    conservation: float = 1e-10
    identity: float = 1e-12
    quadrature: float = 1e-8
    evolve: float = 1e-8
    integrator_atol: float = 1e-10
    integrator_rtol: float = 1e-8
    transient: float = 1e-8
    transient_convergence: float = 1e-6

    @classmethod
    def from_mapping(cls, mapping: dict | None) -> "Tolerances":
        if not mapping:
            return cls()
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {', '.join(unknown)}")
        try:
            return cls(**{k: float(v) for k, v in mapping.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"tolerances must be numeric: {exc}") from exc

    def replace(self, **changes) -> "Tolerances":
        return dc_replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()
