"""Adaptive quadrature for integrands built from Lorentzian peaks.

The real line is cut into a finite window of +-window_factor * max(FWHM) around the
peaks, subdivided at every peak and at peak +- w * 10**k, and each piece goes through
QUADPACK. Beyond the window the integrand decays as |w|**-p; the tails are added from
the edge values as h(edge) * |edge - c| / (p - 1).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt, wait_none

from maserthermo.errors import QuadratureError

log = logging.getLogger("spectral")

DEFAULT_WINDOW_FACTOR = 1e4
DEFAULT_EPSREL = 1e-12
DEFAULT_LIMIT = 200


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abserr: float
    tail: float
    intervals: int


def breakpoints(peaks: Sequence[float], widths: Sequence[float], window_factor: float = DEFAULT_WINDOW_FACTOR) -> np.ndarray:
    peaks = np.asarray(peaks, dtype=float)
    widths = np.asarray(widths, dtype=float)
    reach = window_factor * 2.0 * widths.max()
    lo, hi = peaks.min() - reach, peaks.max() + reach
    points = [lo, hi, *peaks]
    for p, w in zip(peaks, widths):
        step = w
        while step < reach:
            points.extend((p - step, p + step))
            step *= 10.0
    points = np.unique(np.array(points))
    return points[(points >= lo) & (points <= hi)]


def _integrate_once(func, points: np.ndarray, epsabs: float, epsrel: float, limit: int) -> tuple[float, float]:
    total, error = 0.0, 0.0
    for a, b in zip(points[:-1], points[1:]):
        result = quad(func, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
        if len(result) == 4:
            raise QuadratureError(f"quadrature did not converge on [{a:.6g}, {b:.6g}]: {result[3]}")
        total += result[0]
        error += result[1]
    return total, error


def integrate_peaked(
    func: Callable[[float], float],
    peaks: Sequence[float],
    widths: Sequence[float],
    decay_order: int,
    *,
    window_factor: float = DEFAULT_WINDOW_FACTOR,
    epsrel: float = DEFAULT_EPSREL,
    limit: int = DEFAULT_LIMIT,
    attempts: int = 3,
) -> QuadratureResult:
    """Integrate func over the real line; widths are half widths at half maximum."""
    if decay_order < 2:
        raise QuadratureError(f"tail decay order must be at least 2, got {decay_order}")
    points = breakpoints(peaks, widths, window_factor)
    scale = max(abs(func(p)) * w for p, w in zip(peaks, widths))
    epsabs = 1e-15 * scale if scale > 0 else 1e-300

    value, abserr = math.nan, math.nan
    for attempt in Retrying(
        stop=stop_after_attempt(attempts),
        retry=retry_if_exception_type(QuadratureError),
        wait=wait_none(),
        before_sleep=before_sleep_log(log, logging.WARNING),
        reraise=True,
    ):
        with attempt:
            sublimit = limit * 4 ** (attempt.retry_state.attempt_number - 1)
            value, abserr = _integrate_once(func, points, epsabs, epsrel, sublimit)

    center = float(np.mean(peaks))
    lo, hi = points[0], points[-1]
    tail = (func(lo) * abs(lo - center) + func(hi) * abs(hi - center)) / (decay_order - 1)
    return QuadratureResult(value=value + tail, abserr=abserr, tail=tail, intervals=len(points) - 1)
