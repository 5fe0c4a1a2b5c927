"""Weibull sleep-time sampling and hazard-rate based probe-rate updates.

Reserve nodes draw their sleep durations from a Weibull distribution with
rate-like scale ``lam`` (1/seconds) and shape ``beta``; the hazard function
of the same distribution is used to refresh the scale as the network ages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class WeibullParams:
    """Scale/shape pair; scale is a rate (1/s), both strictly positive."""

    scale: float
    shape: float

    def __post_init__(self):
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")
        if not (self.shape > 0.0 and math.isfinite(self.shape)):
            raise ValueError(f"shape must be positive and finite, got {self.shape}")


def sample_sleep_time(params: WeibullParams, u: float) -> float:
    """Inverse-CDF Weibull sample: t = (1/scale) * ln(1/u)^(1/shape).

    ``u`` must lie strictly inside (0, 1); the caller's RNG wrapper is
    responsible for re-drawing exact endpoint values.
    """
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must be in the open interval (0, 1), got {u}")
    return (1.0 / params.scale) * math.log(1.0 / u) ** (1.0 / params.shape)


def hazard_rate(params: WeibullParams, t: float) -> float:
    """Instantaneous event rate (shape*scale) * (t*scale)^(shape-1) at age t."""
    if t < 0.0:
        raise ValueError(f"t must be non-negative, got {t}")
    if params.shape < 1.0 and t == 0.0:
        raise ValueError("hazard rate is singular at t=0 for shape < 1")
    return (params.shape * params.scale) * (t * params.scale) ** (params.shape - 1.0)


def update_probe_rate(params: WeibullParams, t: float) -> WeibullParams:
    """Return params with the scale replaced by the hazard rate at age t.

    The shape never changes; the caller feeds the returned record to the
    next sample_sleep_time call.
    """
    return WeibullParams(scale=hazard_rate(params, t), shape=params.shape)
