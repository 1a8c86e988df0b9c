"""Composite objective: average linear-predictor loss plus an l1/l2 penalty.

The penalty is coordinate-separable, so its proximal map factors over any
coordinate block; the solvers rely on that to update one block at a time.
An optional dense linear term can be folded into the smooth part, which is
how the regularization-halving reduction re-centers its added quadratic
without touching the penalty's prox.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import BlockPartition, Dataset
from .losses import LossFamily


@dataclass(frozen=True)
class Regularizer:
    """P(x) = l1 * ||x||_1 + (l2 / 2) * ||x||^2, strongly convex with modulus l2."""

    l1: float = 0.0
    l2: float = 0.0

    def __post_init__(self):
        if self.l1 < 0 or self.l2 < 0:
            raise ValueError("penalty weights must be >= 0")

    @property
    def mu(self) -> float:
        return self.l2

    def value(self, x) -> float:
        x = np.asarray(x)
        out = 0.0
        if self.l1:
            out += self.l1 * float(np.abs(x).sum())
        if self.l2:
            out += 0.5 * self.l2 * float(x @ x)
        return out

    def prox(self, v, eta: float):
        """argmin_x eta*P(x) + 0.5*||x - v||^2, coordinatewise closed form."""
        if eta <= 0:
            raise ValueError("step must be > 0")
        v = np.asarray(v, dtype=np.float64)
        if self.l1:
            out = np.sign(v) * np.maximum(np.abs(v) - eta * self.l1, 0.0)
        else:
            out = v.copy()
        if self.l2:
            out /= 1.0 + eta * self.l2
        return out


def prox_block(reg: Regularizer, y_block, eta: float):
    """Proximal map of the penalty restricted to one coordinate block."""
    return reg.prox(y_block, eta)


@dataclass(frozen=True)
class ProblemConstants:
    """Smoothness/strong-convexity constants the step schedules consume.

    L bounds each component's full-vector smoothness, L_B the block
    restriction (never larger), mu the strong convexity in play.
    """

    L: float
    L_B: float
    mu: float

    @property
    def kappa(self) -> float:
        if self.mu <= 0:
            return math.inf
        return (self.L + self.L_B) / self.mu


class ErmProblem:
    """F(x) = (1/n) sum_i phi(a_i.x; y_i) [+ <q, x>] + P(x)."""

    def __init__(
        self,
        data: Dataset,
        loss: LossFamily,
        reg: Regularizer,
        mu_override: float | None = None,
        linear: np.ndarray | None = None,
    ):
        if loss.needs_binary_labels:
            labs = np.unique(data.labels)
            if not np.all(np.isin(labs, (-1.0, 1.0))):
                raise ValueError(f"{loss.kind} loss needs labels in {{-1, +1}}, got {labs[:8]}")
        if mu_override is not None and mu_override < 0:
            raise ValueError("mu override must be >= 0")
        if linear is not None:
            linear = np.asarray(linear, dtype=np.float64)
            if linear.shape != (data.d,):
                raise ValueError("linear term length mismatch")
        self.data = data
        self.loss = loss
        self.reg = reg
        self.mu_override = mu_override
        self.linear = linear

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def d(self) -> int:
        return self.data.d

    @property
    def mu(self) -> float:
        return self.reg.mu if self.mu_override is None else self.mu_override

    def margins(self, x):
        return self.data.dot(x)

    def smooth_value(self, x) -> float:
        """The averaged loss plus the linear term, penalty excluded."""
        t = self.margins(x)
        val = float(self.loss.value(t, self.data.labels).mean())
        if self.linear is not None:
            val += float(self.linear @ x)
        return val

    def objective(self, x) -> float:
        return self.smooth_value(x) + self.reg.value(x)

    def gradient(self, x):
        """Gradient of the smooth part; the penalty is handled by its prox."""
        if not self.loss.smooth:
            raise ValueError("loss is non-differentiable; set a smoothing level")
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.d:
            raise ValueError("dimension mismatch")
        t = self.margins(x)
        g = self.loss.deriv(t, self.data.labels)
        grad = self.data.tdot(g) / self.n
        if self.linear is not None:
            grad = grad + self.linear
        return grad

    def constants(self, part: BlockPartition) -> ProblemConstants:
        return estimate_constants(self.data, part, self.loss, self.reg, self.mu_override)

    def with_loss(self, loss: LossFamily) -> "ErmProblem":
        return ErmProblem(self.data, loss, self.reg, self.mu_override, self.linear)


def full_objective(problem: ErmProblem, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != problem.d:
        raise ValueError("dimension mismatch")
    return problem.objective(x)


def full_gradient(problem: ErmProblem, x):
    return problem.gradient(x)


def estimate_constants(
    ds: Dataset,
    part: BlockPartition,
    family: LossFamily,
    reg: Regularizer,
    mu_override: float | None = None,
) -> ProblemConstants:
    """Data-driven smoothness bounds from row norms.

    A scalar loss with curvature c gives each component Hessian
    c * a_i a_i^T, so L = c * max_i ||a_i||^2 and the block variant uses
    the largest per-block row norm instead.
    """
    c = family.curvature
    if not math.isfinite(c):
        raise ValueError("non-smooth loss has no finite smoothness constant")
    sq = ds.row_norms_sq()
    L = c * float(sq.max()) if sq.size else 0.0
    blk = ds.block_row_norms_sq(part)
    L_B = c * float(blk.max()) if blk.size else 0.0
    mu = reg.mu if mu_override is None else mu_override
    return ProblemConstants(L=L, L_B=L_B, mu=mu)
