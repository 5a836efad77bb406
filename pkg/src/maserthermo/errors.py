from __future__ import annotations


class MaserError(Exception):
    """Base class for every error raised by maserthermo."""


class ParameterError(MaserError, ValueError):
    pass


class BathLabelError(ParameterError):
    pass


class ConfigError(MaserError, ValueError):
    pass


class IntegrationError(MaserError, RuntimeError):
    pass


class SteadyStateError(MaserError, RuntimeError):
    def __init__(self, message: str, singular_values: tuple[float, float] | None = None) -> None:
        super().__init__(message)
        self.singular_values = singular_values


class QuadratureError(MaserError, RuntimeError):
    pass


class TemperatureConventionError(MaserError, ValueError):
    pass


class RegimeError(MaserError, ValueError):
    pass


class TrajectoryError(MaserError, ValueError):
    pass


class PointEvaluationError(MaserError):
    def __init__(self, message: str, params=None) -> None:
        super().__init__(f"{message} params={params}" if params is not None else message)
        self.params = params
