"""Accelerated doubly stochastic gradient solver in three equivalent forms.

Each inner iteration samples a mini-batch of rows and one coordinate
block, forms a variance-reduced block gradient at a coupled point y, and
takes a proximal step on the selected block of an auxiliary iterate z.
Two convex-combination steps inject the momenta:

    y_k = a1 * x_{k-1} + a2 * z_{k-1} + a3 * snapshot
    x_k = y_k + a2 * B * (z_k - z_{k-1})

The three runners share one randomness contract and produce the same
iterate sequence for the same seed:

  * reference  - stores x, y, z densely; O(d) per inner iteration.
  * efficient  - re-parametrizes x and y through a scaled direction u and
    a shifted iterate z - snapshot, so an iteration touches one block
    plus the sampled rows; the scaling beta decays geometrically.
  * stable     - replaces (u, beta) by a masked accumulator and per-block
    staleness counters, deferring the geometric decay until a block is
    touched, which keeps every stored number well-scaled.

The snapshot for the next epoch is a single inner iterate drawn with
probability proportional to theta^(j-1); its index is drawn at the start
of the epoch (the draw is independent of the iterates) so no history has
to be kept.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .data import BlockPartition, make_partition
from .problems import ErmProblem
from .rng import RngStreams
from .schedules import epoch_schedule
from .trace import TraceRecord, check_divergence


@dataclass
class SolverConfig:
    """Run shape shared by every solver in the package."""

    blocks: int = 1
    batch: int = 1
    epochs: int = 10
    x0: np.ndarray | None = None
    mu: float | None = None  # schedule override; default is the problem's
    step_mult: float = 1.0  # consumed by the baselines only
    inner: int | None = None  # baseline inner-loop count override
    target_objective: float | None = None  # stop once the epoch objective reaches this
    epoch_hook: object | None = None  # hook(record) after each epoch's trace row
    iterate_hook: object | None = None  # hook(k, x_k, z_k) per inner step; copy before storing
    state_hook: object | None = None  # stable solver only: hook(k, xi, omega), test probe
    record_costs: bool = False  # stable solver: log per-iteration touch counts


@dataclass
class CostLog:
    """Coordinate-touch accounting for the lazily-updated solver.

    `iter_touches[t]` counts distinct state-vector elements read or
    written by inner iteration t; `iter_nnz[t]` is the stored-nonzero
    count of that iteration's sampled rows. Full-vector work that happens
    once per epoch (gradient pass, snapshot materialization, handoff)
    accumulates separately in `epoch_touches`.
    """

    iter_touches: list = field(default_factory=list)
    iter_nnz: list = field(default_factory=list)
    epoch_touches: int = 0


@dataclass
class SolverResult:
    x: np.ndarray  # final snapshot
    records: list
    epg: int
    snapshots: list  # snapshot sequence, index s = start of epoch s
    costs: CostLog | None = None


def snapshot_index(theta: float, m: int, u) -> int | np.ndarray:
    """Closed-form inverse CDF of P(j) ~ theta^(j-1) on {1..m}.

    Works on a scalar u or an array of uniforms; never builds the
    m-point weight vector.
    """
    if theta < 1.0:
        raise ValueError("theta must be >= 1")
    if m < 1:
        raise ValueError("m must be >= 1")
    scalar = np.isscalar(u)
    u = np.asarray(u, dtype=np.float64)
    if m == 1:
        out = np.ones_like(u, dtype=np.int64)
    elif theta == 1.0:
        out = np.minimum(np.floor(u * m).astype(np.int64) + 1, m)
    else:
        t = math.log(theta)
        a = math.expm1(m * t) * u
        out = np.ceil(np.log1p(a) / t).astype(np.int64)
        out = np.clip(out, 1, m)
    return int(out) if scalar else out


def snapshot_draw(theta: float, m: int, rng, size=None):
    """Draw the snapshot iterate index sigma in {1..m} with weight theta^(sigma-1)."""
    u = rng.random() if size is None else rng.random(size)
    return snapshot_index(theta, m, u)


def stochastic_block_gradient(
    problem: ErmProblem, part: BlockPartition, y, snap, grad_snap, batch, l: int
):
    """Variance-reduced gradient estimate restricted to block l.

    grad_snap must be the full smooth gradient at snap. Averaged over the
    sample draw (block fixed) this equals the true block gradient at y,
    and it collapses to grad_snap's block exactly when y == snap.
    """
    batch = np.atleast_1d(np.asarray(batch, dtype=np.int64))
    if batch.size == 0:
        raise ValueError("empty mini-batch")
    lo, hi = part.bounds(l)
    out = np.array(grad_snap[lo:hi], dtype=np.float64)
    data = problem.data
    loss = problem.loss
    inv_b = 1.0 / batch.size
    for i in batch:
        idx, vals = data.row(int(i))
        zy = float(vals @ y[idx]) if idx.size else 0.0
        zs = float(vals @ snap[idx]) if idx.size else 0.0
        label = data.labels[i]
        coeff = (loss.deriv_scalar(zy, label) - loss.deriv_scalar(zs, label)) * inv_b
        s = np.searchsorted(idx, lo, side="left")
        e = np.searchsorted(idx, hi, side="left")
        if s < e:
            out[idx[s:e] - lo] += coeff * vals[s:e]
    return out


# ---------------------------------------------------------------------------
# shared epoch plumbing


class _EpochClock:
    """Wall clock that can be paused while the objective is measured."""

    def __init__(self):
        self.elapsed = 0.0
        self._t0 = time.perf_counter()

    def pause(self):
        self.elapsed += time.perf_counter() - self._t0

    def resume(self):
        self._t0 = time.perf_counter()


def _start(problem: ErmProblem, config: SolverConfig):
    if not problem.loss.smooth:
        raise ValueError("loss is non-differentiable; smooth it or use a reduction")
    part = make_partition(problem.d, config.blocks)
    consts = problem.constants(part)
    if consts.L <= 0:
        raise ValueError("all-zero design matrix: smoothness constants vanish")
    if config.batch < 1:
        raise ValueError("mini-batch size must be >= 1")
    mu = problem.mu if config.mu is None else config.mu
    x0 = np.zeros(problem.d) if config.x0 is None else np.asarray(config.x0, dtype=np.float64).copy()
    if x0.shape != (problem.d,):
        raise ValueError("x0 length mismatch")
    return part, consts, mu, x0


def _snapshot_pass(problem: ErmProblem, snap):
    """Margins, scalar loss slopes, and the full smooth gradient at the snapshot."""
    t = problem.margins(snap)
    dsnap = problem.loss.deriv(t, problem.data.labels)
    grad = problem.data.tdot(dsnap) / problem.n
    if problem.linear is not None:
        grad = grad + problem.linear
    return t, dsnap, grad


def _record_epoch(
    algo, epoch, epg, clock, problem, snap, records, obj0, config
) -> tuple[float, bool]:
    clock.pause()
    obj = problem.objective(snap)
    record = TraceRecord(algo, epoch, epg, clock.elapsed, obj)
    records.append(record)
    if config.epoch_hook is not None:
        config.epoch_hook(record)
    check_divergence(epoch, obj, obj0)
    target = config.target_objective
    stop = target is not None and obj <= target
    clock.resume()
    return obj, stop


def _block_segment(idx, lo, hi):
    s = np.searchsorted(idx, lo, side="left")
    e = np.searchsorted(idx, hi, side="left")
    return s, e


# ---------------------------------------------------------------------------
# reference form: dense x, y, z


def run_adsg_reference(
    problem: ErmProblem, config: SolverConfig, rng: RngStreams, algo: str = "adsg"
) -> SolverResult:
    part, consts, mu, x0 = _start(problem, config)
    data, loss, reg = problem.data, problem.loss, problem.reg
    n, B, b = problem.n, part.B, config.batch

    x = x0.copy()
    z = x0.copy()
    snap = x0.copy()
    snapshots = [snap.copy()]
    records: list[TraceRecord] = []
    epg = 0
    hook = config.iterate_hook

    clock = _EpochClock()
    clock.pause()
    obj0 = problem.objective(x0)
    clock.resume()

    for s in range(config.epochs):
        sched = epoch_schedule(consts, n, B, s, mu)
        a1, a2, a3, eta = sched.alpha1, sched.alpha2, sched.alpha3, sched.eta
        m = sched.m
        _, dsnap, grad_snap = _snapshot_pass(problem, snap)
        epg += n
        idxs, blks, u = rng.epoch_draws(m, n, b, B)
        sigma = snapshot_index(sched.theta, m, u)
        snap_next = None
        a2B = a2 * B
        for j in range(1, m + 1):
            y = a1 * x + a2 * z + a3 * snap
            l = int(blks[j - 1])
            lo, hi = part.bounds(l)
            vblk = grad_snap[lo:hi].copy()
            for i in idxs[j - 1]:
                i = int(i)
                ridx, rvals = data.row(i)
                zy = float(rvals @ y[ridx]) if ridx.size else 0.0
                coeff = (loss.deriv_scalar(zy, data.labels[i]) - dsnap[i]) / b
                rs, re = _block_segment(ridx, lo, hi)
                if rs < re:
                    vblk[ridx[rs:re] - lo] += coeff * rvals[rs:re]
            zblk = z[lo:hi].copy()
            znew = reg.prox(zblk - eta * vblk, eta)
            x = y
            x[lo:hi] += a2B * (znew - zblk)
            z[lo:hi] = znew
            epg += 2 * b
            if hook is not None:
                hook(s * m + j, x, z)
            if j == sigma:
                snap_next = x.copy()
        snap = snap_next
        snapshots.append(snap.copy())
        _, stop = _record_epoch(
            algo, s + 1, epg, clock, problem, snap, records, obj0, config
        )
        if stop:
            break
    clock.pause()
    return SolverResult(x=snap, records=records, epg=epg, snapshots=snapshots)


# ---------------------------------------------------------------------------
# efficient form: shifted z and scaled direction u


def run_adsg_efficient(
    problem: ErmProblem, config: SolverConfig, rng: RngStreams, algo: str = "adsg"
) -> SolverResult:
    part, consts, mu, x0 = _start(problem, config)
    data, loss, reg = problem.data, problem.loss, problem.reg
    n, B, b = problem.n, part.B, config.batch

    zhat = np.zeros(problem.d)  # z - snapshot
    xdot = x0.copy()  # snapshot
    xbar_carry = x0.copy()  # last reconstructed x iterate
    snapshots = [xdot.copy()]
    records: list[TraceRecord] = []
    epg = 0
    hook = config.iterate_hook

    clock = _EpochClock()
    clock.pause()
    obj0 = problem.objective(x0)
    clock.resume()

    for s in range(config.epochs):
        sched = epoch_schedule(consts, n, B, s, mu)
        a1, a2, a3, eta = sched.alpha1, sched.alpha2, sched.alpha3, sched.eta
        gamma = sched.gamma
        m = sched.m
        t_snap, dsnap, grad_snap = _snapshot_pass(problem, xdot)
        epg += n
        u = xbar_carry - gamma * zhat - xdot
        beta = a1  # beta_{j-1} for the upcoming j = 1
        idxs, blks, u_draw = rng.epoch_draws(m, n, b, B)
        sigma = snapshot_index(sched.theta, m, u_draw)
        snap_next = None
        xbar_end = None
        c2 = a2 * B - gamma
        for j in range(1, m + 1):
            l = int(blks[j - 1])
            lo, hi = part.bounds(l)
            vblk = grad_snap[lo:hi].copy()
            for i in idxs[j - 1]:
                i = int(i)
                ridx, rvals = data.row(i)
                if ridx.size:
                    a_u = float(rvals @ u[ridx])
                    a_z = float(rvals @ zhat[ridx])
                else:
                    a_u = a_z = 0.0
                zy = beta * a_u + gamma * a_z + t_snap[i]
                coeff = (loss.deriv_scalar(zy, data.labels[i]) - dsnap[i]) / b
                rs, re = _block_segment(ridx, lo, hi)
                if rs < re:
                    vblk[ridx[rs:re] - lo] += coeff * rvals[rs:re]
            zblk = zhat[lo:hi].copy()
            znew = reg.prox(zblk + xdot[lo:hi] - eta * vblk, eta) - xdot[lo:hi]
            delta = znew - zblk
            zhat[lo:hi] = znew
            if c2 != 0.0:
                # beta == 0 forces c2 == 0 for every valid schedule (B = 1);
                # a decayed-to-zero beta elsewhere is this form's known failure mode
                scale = c2 / beta
                if not math.isfinite(scale):
                    raise FloatingPointError(
                        "direction scaling underflowed; use the stable variant"
                    )
                u[lo:hi] += scale * delta
            epg += 2 * b
            if hook is not None or j == sigma or j == m:
                xbar = beta * u + gamma * zhat + xdot
                if hook is not None:
                    hook(s * m + j, xbar, zhat + xdot)
                if j == sigma:
                    snap_next = xbar.copy()
                if j == m:
                    xbar_end = xbar
            beta *= a1
        xdot_next = snap_next
        zhat += xdot - xdot_next  # re-shift z against the new snapshot
        xbar_carry = xbar_end
        xdot = xdot_next
        snapshots.append(xdot.copy())
        _, stop = _record_epoch(
            algo, s + 1, epg, clock, problem, xdot, records, obj0, config
        )
        if stop:
            break
    clock.pause()
    return SolverResult(x=xdot, records=records, epg=epg, snapshots=snapshots)


# ---------------------------------------------------------------------------
# stable form: masked accumulator xi with staleness counters omega


def _flush_masked(a1, xi, omega, part):
    """Materialize the masked accumulator: block l scales by a1^omega[l]."""
    w = np.repeat(a1 ** omega.astype(np.float64), part.omega)[: part.d]
    return w * xi


def run_adsg_stable(
    problem: ErmProblem, config: SolverConfig, rng: RngStreams, algo: str = "adsg"
) -> SolverResult:
    part, consts, mu, x0 = _start(problem, config)
    data, loss, reg = problem.data, problem.loss, problem.reg
    n, B, b = problem.n, part.B, config.batch
    block_ids = data.indices // part.omega  # per-nonzero block id, shared across epochs

    zhat = np.zeros(problem.d)
    xdot = x0.copy()
    xbar_carry = x0.copy()
    snapshots = [xdot.copy()]
    records: list[TraceRecord] = []
    epg = 0
    hook = config.iterate_hook
    costs = CostLog() if config.record_costs else None

    clock = _EpochClock()
    clock.pause()
    obj0 = problem.objective(x0)
    clock.resume()

    for s in range(config.epochs):
        sched = epoch_schedule(consts, n, B, s, mu)
        a1, a2, a3, eta = sched.alpha1, sched.alpha2, sched.alpha3, sched.eta
        gamma = sched.gamma
        m = sched.m
        t_snap, dsnap, grad_snap = _snapshot_pass(problem, xdot)
        epg += n
        xi = xbar_carry - gamma * zhat - xdot
        omega = np.zeros(B, dtype=np.int64)
        idxs, blks, u_draw = rng.epoch_draws(m, n, b, B)
        sigma = snapshot_index(sched.theta, m, u_draw)
        snap_next = None
        xbar_end = None
        c2 = a2 * B - gamma
        if costs is not None:
            costs.epoch_touches += 3 * problem.d + 2 * data.nnz + 2 * n
        for j in range(1, m + 1):
            l = int(blks[j - 1])
            lo, hi = part.bounds(l)
            width = hi - lo
            vblk = grad_snap[lo:hi].copy()
            nnz_batch = 0
            w = a1 ** omega.astype(np.float64)  # a1^omega, one weight per block
            for i in idxs[j - 1]:
                i = int(i)
                s0, e0 = data.indptr[i], data.indptr[i + 1]
                ridx = data.indices[s0:e0]
                rvals = data.data[s0:e0]
                nnz_batch += ridx.size
                if ridx.size:
                    psi = np.bincount(
                        block_ids[s0:e0], weights=rvals * xi[ridx], minlength=B
                    )
                    a_xi = float(w @ psi)
                    a_z = float(rvals @ zhat[ridx])
                else:
                    a_xi = a_z = 0.0
                zy = a1 * a_xi + gamma * a_z + t_snap[i]
                coeff = (loss.deriv_scalar(zy, data.labels[i]) - dsnap[i]) / b
                rs, re = _block_segment(ridx, lo, hi)
                if rs < re:
                    vblk[ridx[rs:re] - lo] += coeff * rvals[rs:re]
            zblk = zhat[lo:hi].copy()
            znew = reg.prox(zblk + xdot[lo:hi] - eta * vblk, eta) - xdot[lo:hi]
            delta = znew - zblk
            zhat[lo:hi] = znew
            # decay deferred since this block was last touched, then applied at once
            xi[lo:hi] = (a1 ** float(omega[l] + 1)) * xi[lo:hi] + c2 * delta
            omega += 1
            omega[l] = 0
            epg += 2 * b
            if costs is not None:
                # touched: rows (3x: row pass, zhat gather, xi gather),
                # blocks of zhat/xdot/grad_snap/xi, psi + omega vectors
                costs.iter_touches.append(3 * nnz_batch + 4 * width + (1 + b) * B)
                costs.iter_nnz.append(nnz_batch)
            if config.state_hook is not None:
                config.state_hook(s * m + j, xi.copy(), omega.copy())
            if hook is not None or j == sigma or j == m:
                xbar = _flush_masked(a1, xi, omega, part) + gamma * zhat + xdot
                if costs is not None:
                    costs.epoch_touches += 3 * problem.d
                if hook is not None:
                    hook(s * m + j, xbar, zhat + xdot)
                if j == sigma:
                    snap_next = xbar.copy()
                if j == m:
                    xbar_end = xbar
        xdot_next = snap_next
        zhat += xdot - xdot_next
        xbar_carry = xbar_end
        xdot = xdot_next
        snapshots.append(xdot.copy())
        if costs is not None:
            costs.epoch_touches += 2 * problem.d
        _, stop = _record_epoch(
            algo, s + 1, epg, clock, problem, xdot, records, obj0, config
        )
        if stop:
            break
    clock.pause()
    return SolverResult(x=xdot, records=records, epg=epg, snapshots=snapshots, costs=costs)


ADSG_VARIANTS = {
    "ref": run_adsg_reference,
    "efficient": run_adsg_efficient,
    "stable": run_adsg_stable,
}


# ---------------------------------------------------------------------------
# convex-combination weight oracle


@dataclass
class CombinationWeights:
    """Expansion of x_k over the recorded snapshots and the z iterates.

    snapshot_weights[i] multiplies snapshot i (0 = the starting point),
    z_weights[l] multiplies z_l. Weights always sum to one; they are all
    nonnegative whenever every epoch has a1 >= (B-1)/B.
    """

    snapshot_weights: list
    z_weights: list

    def total(self) -> float:
        return sum(self.snapshot_weights) + sum(self.z_weights)

    @property
    def current_snapshot_weight(self) -> float:
        return self.snapshot_weights[-1]

    def reconstruct(self, snapshots, z_iterates):
        out = np.zeros_like(np.asarray(snapshots[0], dtype=np.float64))
        for wgt, vec in zip(self.snapshot_weights, snapshots):
            out += wgt * np.asarray(vec)
        for wgt, vec in zip(self.z_weights, z_iterates):
            out += wgt * np.asarray(vec)
        return out


def lemma1_weights(alphas, B: int, n: int, k: int) -> CombinationWeights:
    """Run the weight recursion for k inner iterations.

    `alphas` gives (a1, a2, a3) per epoch; epoch boundaries fall every
    m = B*n iterations, where a new snapshot (the basis gains one entry)
    is recorded. Mirrors the x-update exactly:

        x_{k+1} = a1*x_k + (a2 - a2*B)*z_k + a2*B*z_{k+1} + a3*snapshot_s
    """
    m = B * n
    snap_w = [0.0]
    z_w = [1.0]  # x_0 = z_0
    for step in range(k):
        s, j = divmod(step, m)
        if j == 0 and step > 0:
            snap_w.append(0.0)  # snapshot s enters the basis with zero weight
        a1, a2, a3 = alphas[min(s, len(alphas) - 1)]
        snap_w = [a1 * wgt for wgt in snap_w]
        z_w = [a1 * wgt for wgt in z_w]
        z_w[-1] += a2 - a2 * B
        z_w.append(a2 * B)
        snap_w[-1] += a3
    return CombinationWeights(snapshot_weights=snap_w, z_weights=z_w)
