"""Scalar loss families phi_i(z) for linear-predictor risk minimization.

Four families: logistic, squared, absolute deviation, hinge. The last two
are non-differentiable at a kink; they carry an optional smoothing level
`lam` that replaces them with their (1/lam)-smooth envelope, with a
uniform gap of at most lam/2 (both have unit Lipschitz constant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOGISTIC = "logistic"
SQUARED = "squared"
ABSOLUTE_DEVIATION = "absolute_deviation"
HINGE = "hinge"

KINDS = (LOGISTIC, SQUARED, ABSOLUTE_DEVIATION, HINGE)
SMOOTHABLE = (ABSOLUTE_DEVIATION, HINGE)
# CLI spellings
ALIASES = {"lad": ABSOLUTE_DEVIATION, "l1": ABSOLUTE_DEVIATION, "svm": HINGE}


@dataclass(frozen=True)
class LossFamily:
    """A per-sample scalar loss phi(z; y) with its derivative.

    `lam` is the smoothing level for the absolute-deviation and hinge
    families; lam = 0 keeps them non-smooth (derivatives then return a
    fixed subgradient choice, the limit taken from the flat branch).
    """

    kind: str
    lam: float = 0.0

    def __post_init__(self):
        kind = ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.lam < 0:
            raise ValueError("smoothing level must be >= 0")
        if self.lam > 0 and kind not in SMOOTHABLE:
            raise ValueError(f"{kind} loss takes no smoothing level")

    @property
    def smooth(self) -> bool:
        return self.kind in (LOGISTIC, SQUARED) or self.lam > 0

    @property
    def needs_binary_labels(self) -> bool:
        return self.kind in (LOGISTIC, HINGE)

    @property
    def curvature(self) -> float:
        """Upper bound on phi'' in z: 1/4 logistic, 1 squared, 1/lam smoothed."""
        if self.kind == LOGISTIC:
            return 0.25
        if self.kind == SQUARED:
            return 1.0
        if self.lam > 0:
            return 1.0 / self.lam
        return math.inf

    @property
    def lipschitz(self) -> float:
        """Lipschitz constant of the unsmoothed loss (defined for LAD/hinge)."""
        if self.kind not in SMOOTHABLE:
            raise ValueError(f"{self.kind} has no global Lipschitz constant")
        return 1.0

    def smoothed(self, lam: float) -> "LossFamily":
        return LossFamily(self.kind, lam)

    # Vectorized value/derivative over margins z with labels y.

    def value(self, z, y):
        z = np.asarray(z, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.kind == LOGISTIC:
            return np.logaddexp(0.0, -y * z)
        if self.kind == SQUARED:
            return 0.5 * (z - y) ** 2
        if self.kind == ABSOLUTE_DEVIATION:
            r = z - y
            if self.lam == 0.0:
                return np.abs(r)
            a = np.abs(r)
            return np.where(a <= self.lam, r * r / (2.0 * self.lam), a - self.lam / 2.0)
        # hinge: margin t = y * z, zero for t > 1
        t = y * z
        if self.lam == 0.0:
            return np.maximum(0.0, 1.0 - t)
        g = t - 1.0
        return np.where(
            t > 1.0,
            0.0,
            np.where(t >= 1.0 - self.lam, g * g / (2.0 * self.lam), 1.0 - t - self.lam / 2.0),
        )

    def deriv(self, z, y):
        z = np.asarray(z, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.kind == LOGISTIC:
            # -y * sigmoid(-y z), written with tanh for overflow safety
            return -y * 0.5 * (1.0 - np.tanh(0.5 * y * z))
        if self.kind == SQUARED:
            return z - y
        if self.kind == ABSOLUTE_DEVIATION:
            r = z - y
            if self.lam == 0.0:
                return np.sign(r)
            return np.clip(r / self.lam, -1.0, 1.0)
        t = y * z
        if self.lam == 0.0:
            return np.where(t < 1.0, -y, 0.0)
        return np.where(
            t > 1.0,
            0.0,
            np.where(t >= 1.0 - self.lam, y * (t - 1.0) / self.lam, -y),
        )

    # Scalar fast path for the solvers' inner loops.

    def deriv_scalar(self, z: float, y: float) -> float:
        if self.kind == LOGISTIC:
            return -y * 0.5 * (1.0 - math.tanh(0.5 * y * z))
        if self.kind == SQUARED:
            return z - y
        if self.kind == ABSOLUTE_DEVIATION:
            r = z - y
            if self.lam == 0.0:
                return float(np.sign(r))
            if r > self.lam:
                return 1.0
            if r < -self.lam:
                return -1.0
            return r / self.lam
        t = y * z
        if self.lam == 0.0:
            return -y if t < 1.0 else 0.0
        if t > 1.0:
            return 0.0
        if t >= 1.0 - self.lam:
            return y * (t - 1.0) / self.lam
        return -y


def loss_value_grad(family: LossFamily, y: float, z: float) -> tuple[float, float]:
    """phi(z; y) and phi'(z; y) for a single sample."""
    return float(family.value(z, y)), float(family.deriv(z, y))


def smooth_gap_bound(family: LossFamily, lam: float) -> float:
    """Uniform bound lam * G^2 / 2 on phi - phi_smoothed (G = 1 here).

    Only the absolute-deviation and hinge families have a smoothed form;
    asking for any other family is an error.
    """
    if family.kind not in SMOOTHABLE:
        raise ValueError(f"{family.kind} loss has no smoothing gap")
    if lam < 0:
        raise ValueError("smoothing level must be >= 0")
    g = family.lipschitz
    return lam * g * g / 2.0
