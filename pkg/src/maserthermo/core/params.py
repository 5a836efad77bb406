"""Parameter record, density-matrix value type and basis conventions.

Basis ordering is fixed as (g, u, l) everywhere: index 0 is the ground level |g>,
index 1 the upper maser level |u>, index 2 the lower maser level |l>. The ground
energy is pinned at zero. Units: hbar = k_B = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Iterable

import numpy as np

from maserthermo.config import DEFAULT_TOLERANCES, Tolerances
from maserthermo.errors import BathLabelError, ParameterError

BASIS = ("g", "u", "l")
BATHS = ("u", "l")


def basis_index(label: str) -> int:
    try:
        return BASIS.index(label)
    except ValueError:
        raise BathLabelError(f"unknown basis label {label!r}; expected one of {BASIS}") from None


def sigma(i: str, j: str) -> np.ndarray:
    """Transition operator |i><j| in the fixed basis."""
    op = np.zeros((3, 3), dtype=complex)
    op[basis_index(i), basis_index(j)] = 1.0
    return op


def check_bath(alpha: str) -> str:
    if alpha not in BATHS:
        raise BathLabelError(f"invalid bath label {alpha!r}; expected 'u' or 'l'")
    return alpha


@dataclass(frozen=True)
class EngineParams:
    omega_u: float
    omega_l: float
    omega_d: float
    epsilon: float
    gamma_u: float
    gamma_l: float
    n_u: float
    n_l: float

    @property
    def delta(self) -> float:
        return detuning(self)

    def gamma(self, alpha: str) -> float:
        return self.gamma_u if check_bath(alpha) == "u" else self.gamma_l

    def n(self, alpha: str) -> float:
        return self.n_u if check_bath(alpha) == "u" else self.n_l

    def omega(self, alpha: str) -> float:
        return self.omega_u if check_bath(alpha) == "u" else self.omega_l

    def decay_width(self, alpha: str) -> float:
        """gamma_alpha (n_alpha + 1): total decay rate of level alpha."""
        return self.gamma(alpha) * (self.n(alpha) + 1.0)

    def with_changes(self, **changes: float) -> "EngineParams":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        unknown = set(changes) - set(values)
        if unknown:
            raise ParameterError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        values.update({k: float(v) for k, v in changes.items()})
        return EngineParams(**values)

    def with_detuning(self, delta: float) -> "EngineParams":
        return self.with_changes(omega_d=self.omega_u - self.omega_l + delta)

    def swapped(self) -> "EngineParams":
        """Mirror image with the two baths exchanged.

        Energies, rates and occupations swap labels and the drive is conjugated
        (omega_d -> -omega_d) so that the detuning flips sign. The result lies outside
        the validated domain; only the closed-form flow functions accept it.
        """
        return EngineParams(
            omega_u=self.omega_l,
            omega_l=self.omega_u,
            omega_d=-self.omega_d,
            epsilon=self.epsilon,
            gamma_u=self.gamma_l,
            gamma_l=self.gamma_u,
            n_u=self.n_l,
            n_l=self.n_u,
        )

    def as_dict(self) -> dict[str, float]:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_mapping(cls, mapping: dict) -> "EngineParams":
        names = [f.name for f in fields(cls)]
        missing = [k for k in names if mapping.get(k) is None]
        if missing:
            raise ParameterError(f"missing parameter(s): {', '.join(missing)}")
        try:
            return cls(**{k: float(mapping[k]) for k in names})
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"parameters must be numeric: {exc}") from exc


BENCHMARK_PARAMS = EngineParams(
    omega_u=10.0, omega_l=5.0, omega_d=5.5, epsilon=0.5,
    gamma_u=1.0, gamma_l=1.0, n_u=2.0, n_l=1.0,
)


def validate(params: EngineParams) -> EngineParams:
    for f in fields(params):
        value = getattr(params, f.name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ParameterError(f"{f.name} must be a finite real number, got {value!r}")
    if params.omega_l <= 0:
        raise ParameterError("omega_l must be strictly positive")
    if params.omega_u <= params.omega_l:
        raise ParameterError("omega_u must exceed omega_l")
    if params.omega_d <= 0:
        raise ParameterError("omega_d must be strictly positive")
    if params.epsilon < 0:
        raise ParameterError("epsilon must be nonnegative")
    if params.gamma_u <= 0:
        raise ParameterError("gamma_u must be strictly positive")
    if params.gamma_l <= 0:
        raise ParameterError("gamma_l must be strictly positive")
    if params.n_u < 0:
        raise ParameterError("n_u must be nonnegative")
    if params.n_l < 0:
        raise ParameterError("n_l must be nonnegative")
    return params


def detuning(params: EngineParams) -> float:
    return params.omega_d - (params.omega_u - params.omega_l)


def bare_hamiltonian(params: EngineParams) -> np.ndarray:
    return params.omega_u * sigma("u", "u") + params.omega_l * sigma("l", "l")


@dataclass(frozen=True)
class DensityMatrix3:
    data: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=complex, copy=True)
        if arr.shape != (3, 3):
            raise ParameterError(f"density matrix must be 3x3, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, array) -> "DensityMatrix3":
        return cls(np.asarray(array))

    @classmethod
    def pure(cls, vector: Iterable[complex]) -> "DensityMatrix3":
        psi = np.asarray(list(vector), dtype=complex)
        norm = np.linalg.norm(psi)
        if psi.shape != (3,) or norm == 0:
            raise ParameterError("pure state needs a nonzero 3-vector")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def projector(cls, label: str) -> "DensityMatrix3":
        return cls(sigma(label, label))

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix3":
        return cls(np.eye(3) / 3.0)

    def entry(self, i: str, j: str) -> complex:
        return complex(self.data[basis_index(i), basis_index(j)])

    @property
    def populations(self) -> tuple[float, float, float]:
        d = self.data.diagonal().real
        return float(d[0]), float(d[1]), float(d[2])

    @property
    def coherence_ul(self) -> complex:
        return self.entry("u", "l")

    def __repr__(self) -> str:
        gg, uu, ll = self.populations
        return f"DensityMatrix3(gg={gg:.6g}, uu={uu:.6g}, ll={ll:.6g}, ul={self.coherence_ul:.6g})"


def relative_difference(a: float, b: float) -> float:
    """|a - b| relative to the larger magnitude; inf when only one side is zero."""
    if a == b:
        return 0.0
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0 else math.inf


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""
    skipped: bool = False

    @classmethod
    def skip(cls, name: str, reason: str) -> "CheckResult":
        return cls(name, True, 0.0, 0.0, detail=reason, skipped=True)

    def line(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        extra = f" ({self.detail})" if self.detail else ""
        return f"{status} {self.name}: residual={self.residual:.3e} tol={self.tolerance:.1e}{extra}"


@dataclass(frozen=True)
class PhysicalityReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


def assert_physical(rho: DensityMatrix3 | np.ndarray, tolerances: Tolerances = DEFAULT_TOLERANCES) -> PhysicalityReport:
    a = rho.data if isinstance(rho, DensityMatrix3) else np.asarray(rho, dtype=complex)
    herm = float(np.max(np.abs(a - a.conj().T)))
    trace = float(abs(np.trace(a) - 1.0))
    lowest = float(np.linalg.eigvalsh(0.5 * (a + a.conj().T)).min())
    psd = max(0.0, -lowest)
    return PhysicalityReport(checks=(
        CheckResult("hermitian", herm <= tolerances.hermiticity, herm, tolerances.hermiticity),
        CheckResult("trace", trace <= tolerances.trace, trace, tolerances.trace),
        CheckResult("psd", psd <= tolerances.psd, psd, tolerances.psd, detail=f"min eigenvalue {lowest:.3e}"),
    ))
