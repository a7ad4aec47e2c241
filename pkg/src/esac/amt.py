"""Automatic Mutation Tuning: clipped, gradient-free growth of the mutation rate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def smooth_l1(x: float, y: float) -> float:
    """Huber loss with unit threshold."""
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"smooth_l1 needs finite inputs, got {x!r}, {y!r}")
    d = abs(x - y)
    return 0.5 * d * d if d < 1.0 else d - 0.5


@dataclass(frozen=True)
class AMTRecord:
    r_max: float
    r_avg: float
    sigma: float  # sigma before the update
    increment: float  # clipped amount added to sigma


@dataclass
class MutationState:
    sigma: float
    sigma_initial: float
    zeta: float
    alpha_es: float
    n: int
    history: list[AMTRecord] = field(default_factory=list)

    @classmethod
    def create(cls, sigma: float, zeta: float, alpha_es: float, n: int) -> "MutationState":
        if sigma <= 0 or zeta < 0 or alpha_es <= 0 or n < 1:
            raise ValueError("need sigma > 0, zeta >= 0, alpha_es > 0, n >= 1")
        return cls(sigma, sigma, zeta, alpha_es, n)


def raw_increment(sigma: float, alpha_es: float, n: int, r_max: float, r_avg: float) -> float:
    return alpha_es / (n * sigma) * smooth_l1(r_max, r_avg)


def amt_update(state: MutationState, r_max: float, r_avg: float) -> MutationState:
    """Grow sigma by the SmoothL1 gap between winner and mean return, clipped to [0, zeta].

    ``r_max`` and ``r_avg`` are raw (unnormalized) returns of the current generation.
    Mutates and returns ``state``.
    """
    inc = raw_increment(state.sigma, state.alpha_es, state.n, r_max, r_avg)
    inc = min(max(inc, 0.0), state.zeta)
    state.history.append(AMTRecord(r_max, r_avg, state.sigma, inc))
    state.sigma += inc
    return state


def tuning_multiplier(history, sigma_initial: float, alpha_es: float, n: int) -> float:
    """Product of per-step factors 1 + alpha_es / (n sigma_t^2) * SmoothL1(R_max, R_avg).

    The sigma_t inside each factor follows the unclipped recurrence started at
    ``sigma_initial``, so ``sigma_initial * tuning_multiplier(...)`` is the sigma
    reached after replaying ``history`` without clipping.  ``history`` holds
    ``AMTRecord`` entries or plain ``(r_max, r_avg)`` pairs.
    """
    product = 1.0
    for entry in history:
        r_max, r_avg = (entry.r_max, entry.r_avg) if isinstance(entry, AMTRecord) else entry[:2]
        sigma_t = sigma_initial * product
        product *= 1.0 + alpha_es / (n * sigma_t * sigma_t) * smooth_l1(r_max, r_avg)
    return product
