"""Comparison solvers sharing the trace, randomness, and guard contracts.

All three keep the usual snapshot/full-gradient outer loop:

  * svrg     - proximal full-vector steps, step 1/L, 2n inner iterations.
  * mrbcd    - like svrg but one sampled coordinate block per step with a
    per-block prox; B*n inner iterations. With B = 1 it reproduces svrg
    step for step.
  * katyusha - accelerated full-vector method with the snapshot pinned
    into the gradient point at weight 1/2; the next snapshot is a
    geometrically weighted average of the inner iterates.
"""

from __future__ import annotations

import math

import numpy as np

from .core import CostLog, SolverConfig, SolverResult, _EpochClock, _record_epoch, _snapshot_pass, _block_segment
from .data import make_partition
from .problems import ErmProblem
from .rng import RngStreams
from .trace import TraceRecord


def _baseline_start(problem: ErmProblem, config: SolverConfig, need_blocks: bool):
    if not problem.loss.smooth:
        raise ValueError("loss is non-differentiable; smooth it or use a reduction")
    B = config.blocks if need_blocks else 1
    part = make_partition(problem.d, B)
    consts = problem.constants(part)
    if consts.L <= 0:
        raise ValueError("all-zero design matrix: smoothness constants vanish")
    x0 = np.zeros(problem.d) if config.x0 is None else np.asarray(config.x0, dtype=np.float64).copy()
    if x0.shape != (problem.d,):
        raise ValueError("x0 length mismatch")
    return part, consts, x0


def _vr_full_gradient(problem, grad_snap, dsnap, x, batch, b):
    """Full-vector variance-reduced estimate at x."""
    v = grad_snap.copy()
    data, loss = problem.data, problem.loss
    for i in batch:
        i = int(i)
        ridx, rvals = data.row(i)
        zx = float(rvals @ x[ridx]) if ridx.size else 0.0
        coeff = (loss.deriv_scalar(zx, data.labels[i]) - dsnap[i]) / b
        v[ridx] += coeff * rvals
    return v


def run_svrg(problem: ErmProblem, config: SolverConfig, rng: RngStreams) -> SolverResult:
    part, consts, x0 = _baseline_start(problem, config, need_blocks=False)
    n, b = problem.n, config.batch
    m = config.inner if config.inner is not None else 2 * n
    eta = config.step_mult / consts.L
    reg = problem.reg

    x = x0.copy()
    snap = x0.copy()
    snapshots = [snap.copy()]
    records: list[TraceRecord] = []
    epg = 0
    clock = _EpochClock()
    clock.pause()
    obj0 = problem.objective(x0)
    clock.resume()

    for s in range(config.epochs):
        t_snap, dsnap, grad_snap = _snapshot_pass(problem, snap)
        epg += n
        idxs = rng.samples.integers(0, n, size=(m, b))
        for j in range(m):
            v = _vr_full_gradient(problem, grad_snap, dsnap, x, idxs[j], b)
            x = reg.prox(x - eta * v, eta)
            epg += 2 * b
        snap = x.copy()
        snapshots.append(snap.copy())
        _, stop = _record_epoch(
            "svrg", s + 1, epg, clock, problem, snap, records, obj0, config
        )
        if stop:
            break
    clock.pause()
    return SolverResult(x=snap, records=records, epg=epg, snapshots=snapshots)


def run_mrbcd(problem: ErmProblem, config: SolverConfig, rng: RngStreams) -> SolverResult:
    part, consts, x0 = _baseline_start(problem, config, need_blocks=True)
    n, B, b = problem.n, part.B, config.batch
    m = config.inner if config.inner is not None else B * n
    eta = config.step_mult / consts.L
    data, loss, reg = problem.data, problem.loss, problem.reg

    x = x0.copy()
    snap = x0.copy()
    snapshots = [snap.copy()]
    records: list[TraceRecord] = []
    epg = 0
    costs = CostLog() if config.record_costs else None
    clock = _EpochClock()
    clock.pause()
    obj0 = problem.objective(x0)
    clock.resume()

    for s in range(config.epochs):
        t_snap, dsnap, grad_snap = _snapshot_pass(problem, snap)
        epg += n
        idxs = rng.samples.integers(0, n, size=(m, b))
        blks = rng.blocks.integers(0, B, size=m)
        for j in range(m):
            l = int(blks[j])
            lo, hi = part.bounds(l)
            vblk = grad_snap[lo:hi].copy()
            nnz_batch = 0
            for i in idxs[j]:
                i = int(i)
                ridx, rvals = data.row(i)
                nnz_batch += ridx.size
                zx = float(rvals @ x[ridx]) if ridx.size else 0.0
                coeff = (loss.deriv_scalar(zx, data.labels[i]) - dsnap[i]) / b
                rs, re = _block_segment(ridx, lo, hi)
                if rs < re:
                    vblk[ridx[rs:re] - lo] += coeff * rvals[rs:re]
            x[lo:hi] = reg.prox(x[lo:hi] - eta * vblk, eta)
            epg += 2 * b
            if costs is not None:
                costs.iter_touches.append(2 * nnz_batch + 3 * (hi - lo))
                costs.iter_nnz.append(nnz_batch)
        snap = x.copy()
        snapshots.append(snap.copy())
        _, stop = _record_epoch(
            "mrbcd", s + 1, epg, clock, problem, snap, records, obj0, config
        )
        if stop:
            break
    clock.pause()
    return SolverResult(x=snap, records=records, epg=epg, snapshots=snapshots, costs=costs)


def run_katyusha(problem: ErmProblem, config: SolverConfig, rng: RngStreams) -> SolverResult:
    part, consts, x0 = _baseline_start(problem, config, need_blocks=False)
    n, b = problem.n, config.batch
    m = config.inner if config.inner is not None else 2 * n
    L = consts.L / config.step_mult
    mu = problem.mu if config.mu is None else config.mu
    reg = problem.reg
    tau2 = 0.5

    y = x0.copy()
    z = x0.copy()
    snap = x0.copy()
    snapshots = [snap.copy()]
    records: list[TraceRecord] = []
    epg = 0
    clock = _EpochClock()
    clock.pause()
    obj0 = problem.objective(x0)
    clock.resume()

    for s in range(config.epochs):
        if mu > 0:
            tau1 = min(math.sqrt(n * mu / (3.0 * L)), 0.5)
        else:
            tau1 = 2.0 / (s + 4.0)
        alpha = 1.0 / (3.0 * tau1 * L)
        wfac = 1.0 + alpha * mu if mu > 0 else 1.0  # inner-iterate averaging weights
        t_snap, dsnap, grad_snap = _snapshot_pass(problem, snap)
        epg += n
        idxs = rng.samples.integers(0, n, size=(m, b))
        wsum = 0.0
        wcur = 1.0
        acc = np.zeros(problem.d)
        for j in range(m):
            xk = tau1 * z + tau2 * snap + (1.0 - tau1 - tau2) * y
            v = _vr_full_gradient(problem, grad_snap, dsnap, xk, idxs[j], b)
            z = reg.prox(z - alpha * v, alpha)
            y = reg.prox(xk - v / (3.0 * L), 1.0 / (3.0 * L))
            acc += wcur * y
            wsum += wcur
            wcur *= wfac
            if wsum > 1e250:  # keep the running average well-scaled
                acc /= wsum
                wcur /= wsum
                wsum = 1.0
            epg += 2 * b
        snap = acc / wsum
        snapshots.append(snap.copy())
        _, stop = _record_epoch(
            "katyusha", s + 1, epg, clock, problem, snap, records, obj0, config
        )
        if stop:
            break
    clock.pause()
    return SolverResult(x=snap, records=records, epg=epg, snapshots=snapshots)


BASELINES = {"svrg": run_svrg, "mrbcd": run_mrbcd, "katyusha": run_katyusha}
