"""Per-epoch coefficient schedules for the accelerated doubly stochastic solver.

Two regimes: a constant schedule driven by the condition number when the
penalty is strongly convex, and an epoch-decaying one when it is not
(mu = 0, snapshot sampling becomes uniform).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .problems import ProblemConstants


def schedule_strongly_convex(n: int, B: int, kappa: float) -> tuple[float, float, float]:
    """Constant mixing weights (alpha1, alpha2, alpha3) for mu > 0."""
    if not kappa > 0 or not math.isfinite(kappa):
        raise ValueError(f"condition number must be positive and finite, got {kappa}")
    if B < 1 or n < 1:
        raise ValueError("need B >= 1 and n >= 1")
    alpha2 = min(1.0, math.sqrt(n / kappa)) / (2.0 * B)
    alpha3 = 1.0 / (2.0 * B)
    alpha1 = 1.0 - alpha2 - alpha3
    return alpha1, alpha2, alpha3


def schedule_general_convex(s: int, B: int) -> tuple[float, float, float]:
    """Epoch-s mixing weights for the mu = 0 regime; alpha2 decays as 2/(s + 4B)."""
    if s < 0 or B < 1:
        raise ValueError("need s >= 0 and B >= 1")
    alpha2 = 2.0 / (s + 4.0 * B)
    alpha3 = 1.0 / (2.0 * B)
    alpha1 = 1.0 - alpha2 - alpha3
    return alpha1, alpha2, alpha3


@dataclass(frozen=True)
class EpochSchedule:
    """All coefficients one epoch needs, derived from (alpha_i, L, L_B, mu, B).

    eta is defined as the exact reciprocal of Lbar * alpha2 * B, and theta
    exceeds 1 only when mu > 0.
    """

    alpha1: float
    alpha2: float
    alpha3: float
    Lbar: float
    eta: float
    theta: float
    m: int

    @property
    def gamma(self) -> float:
        return self.alpha2 / (self.alpha2 + self.alpha3)


def epoch_schedule(
    consts: ProblemConstants, n: int, B: int, s: int = 0, mu: float | None = None
) -> EpochSchedule:
    """Build the epoch-s schedule; picks the regime from mu (default from consts)."""
    mu = consts.mu if mu is None else mu
    if mu > 0:
        kappa = (consts.L + consts.L_B) / mu
        a1, a2, a3 = schedule_strongly_convex(n, B, kappa)
    else:
        a1, a2, a3 = schedule_general_convex(s, B)
    Lbar = consts.L / (B * a3) + consts.L_B
    if Lbar <= 0:
        raise ValueError("smoothness constants are zero; cannot form a step size")
    q = Lbar * a2 * B
    eta = 1.0 / q
    theta = 1.0 + mu / (Lbar * B * B * a2 + (B - 1) * mu) if mu > 0 else 1.0
    return EpochSchedule(alpha1=a1, alpha2=a2, alpha3=a3, Lbar=Lbar, eta=eta, theta=theta, m=B * n)
