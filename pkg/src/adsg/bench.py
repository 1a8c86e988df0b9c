"""Benchmark harness: configure a problem and a solver, run, emit CSV traces.

The cost axis is the evaluated-partial-gradient (EPG) count: one unit per
component-gradient evaluation, so a full snapshot pass costs n and every
inner iteration costs 2b (one evaluation at the coupled point, one at the
snapshot), whether or not the result is block-restricted. The per-epoch
objective evaluation is excluded from both EPG and wall time.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import BASELINES
from .core import ADSG_VARIANTS, SolverConfig
from .data import load_libsvm
from .losses import ALIASES, KINDS, LossFamily
from .problems import ErmProblem, Regularizer
from .reductions import REDUCTIONS, TraceAggregator, make_adsg_hood
from .rng import RngStreams
from .synth import SyntheticSpec, gen_synthetic
from .trace import DivergenceError, write_trace_csv

ALGORITHMS = ("adsg", "svrg", "mrbcd", "katyusha")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Everything one run needs; exactly one of data_path/synth is set."""

    algo: str
    seed: int
    out: str | None = None
    data_path: str | None = None
    synth: tuple | None = None  # (n, d, kappa)
    loss: str = "logistic"
    smoothing: float = 0.0
    l1: float = 0.0
    l2: float | None = None  # None: kappa-shaped value for synthetic data, else 0
    mu: float | None = None
    variant: str = "stable"
    blocks: int = 8
    batch: int = 1
    epochs: int = 10
    step_mult: float = 1.0
    reduce: str = "none"
    epsilon: float = 1e-3

    def validate(self):
        if (self.data_path is None) == (self.synth is None):
            raise ConfigError("exactly one data source: --data or --synth")
        if self.algo not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algo!r}")
        if ALIASES.get(self.loss, self.loss) not in KINDS:
            raise ConfigError(f"unknown loss {self.loss!r}")
        if self.variant not in ADSG_VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.reduce not in ("none", *REDUCTIONS):
            raise ConfigError(f"unknown reduction {self.reduce!r}")
        if self.reduce != "none" and self.algo != "adsg":
            raise ConfigError("reductions wrap the adsg solver; use --algo adsg")
        for name in ("blocks", "batch", "epochs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be > 0")


def epg_count(events) -> int:
    """Fold an event stream into a cumulative count.

    Events are ("full_pass", n) for a snapshot gradient and ("inner", b)
    for one variance-reduced inner step (two component evaluations per
    sampled row).
    """
    total = 0
    for kind, size in events:
        if kind == "full_pass":
            total += size
        elif kind == "inner":
            total += 2 * size
        else:
            raise ValueError(f"unknown event {kind!r}")
    return total


def predicted_epg(algo: str, n: int, B: int, b: int, epochs: int, inner: int | None = None) -> int:
    """Closed-form EPG for a run: epochs * (n + 2 * b * m)."""
    if inner is not None:
        m = inner
    elif algo in ("svrg", "katyusha"):
        m = 2 * n
    else:
        m = B * n
    return epochs * (n + 2 * b * m)


def build_problem(cfg: ExperimentConfig):
    """Dataset + problem from the config; raises ConfigError before any compute."""
    cfg.validate()
    loss_kind = ALIASES.get(cfg.loss, cfg.loss)
    needs_smoothing = loss_kind in ("absolute_deviation", "hinge")
    lam = cfg.smoothing
    if needs_smoothing and lam == 0.0 and cfg.reduce in ("none", "reg"):
        raise ConfigError(
            f"{cfg.loss} is non-smooth: set --smooth or use --reduce smooth/joint"
        )
    loss = LossFamily(loss_kind, lam if needs_smoothing else 0.0)

    if cfg.data_path is not None:
        try:
            ds = load_libsvm(cfg.data_path)
        except OSError as exc:
            raise ConfigError(f"cannot read {cfg.data_path}: {exc}") from exc
        reg = Regularizer(l1=cfg.l1, l2=cfg.l2 if cfg.l2 is not None else 0.0)
        problem = ErmProblem(ds, loss, reg, mu_override=cfg.mu)
    else:
        n, d, kappa = cfg.synth
        if cfg.blocks > int(d):
            raise ConfigError(f"blocks={cfg.blocks} exceeds dimension {d}")
        if loss.smooth:
            gen_loss = loss_kind
        else:  # labels must suit the loss attached below
            gen_loss = "logistic" if loss.needs_binary_labels else "squared"
        spec = SyntheticSpec(
            n=int(n), d=int(d), kappa=float(kappa), loss=gen_loss,
            l1=cfg.l1, seed=cfg.seed, blocks=cfg.blocks,
        )
        inst = gen_synthetic(spec)
        l2 = cfg.l2 if cfg.l2 is not None else inst.l2
        reg = Regularizer(l1=cfg.l1, l2=l2)
        problem = ErmProblem(inst.dataset, loss, reg, mu_override=cfg.mu)
    if cfg.blocks > problem.d:
        raise ConfigError(f"blocks={cfg.blocks} exceeds dimension {problem.d}")
    return problem


def run_experiment(cfg: ExperimentConfig):
    """Execute one configured run and (optionally) write its CSV trace."""
    problem = build_problem(cfg)
    streams = RngStreams(cfg.seed)
    solver_cfg = SolverConfig(
        blocks=cfg.blocks,
        batch=cfg.batch,
        epochs=cfg.epochs,
        mu=cfg.mu,
        step_mult=cfg.step_mult,
    )
    if cfg.batch > 1:
        print("note: batch > 1 runs outside the analyzed b=1 schedule", file=sys.stderr)

    if cfg.reduce == "smooth" and problem.mu <= 0:
        raise ConfigError("--reduce smooth needs a strongly convex penalty (--l2 or --mu)")

    if cfg.reduce != "none":
        collector = TraceAggregator(problem, cfg.algo)
        hood = make_adsg_hood(blocks=cfg.blocks, batch=cfg.batch, collector=collector)
        reducer = REDUCTIONS[cfg.reduce]
        reducer(hood, problem, np.zeros(problem.d), cfg.epsilon, streams)
        records = collector.records
    elif cfg.algo == "adsg":
        result = ADSG_VARIANTS[cfg.variant](problem, solver_cfg, streams)
        records = result.records
    else:
        result = BASELINES[cfg.algo](problem, solver_cfg, streams)
        records = result.records

    if cfg.out is not None:
        write_trace_csv(cfg.out, records)
    return records


def run_many(configs) -> list:
    """Run independent experiments on a small worker pool (BENCH_THREADS caps it)."""
    cap = os.environ.get("BENCH_THREADS")
    workers = max(1, int(cap)) if cap else min(4, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_experiment, configs))


def _parse_synth(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--synth needs n,d,kappa")
    try:
        return int(parts[0]), int(parts[1]), float(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment and write a CSV trace")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="LibSVM file (.gz accepted)")
    src.add_argument("--synth", type=_parse_synth, metavar="n,d,kappa")
    run.add_argument("--loss", default="logistic", choices=("logistic", "squared", "lad", "hinge"))
    run.add_argument("--smooth", type=float, default=0.0, help="smoothing level for lad/hinge")
    run.add_argument("--l1", type=float, default=0.0)
    run.add_argument("--l2", type=float, default=None,
                     help="l2 weight; defaults to the kappa-shaped value for --synth")
    run.add_argument("--mu", type=float, default=None, help="strong convexity override")
    run.add_argument("--algo", required=True, choices=ALGORITHMS)
    run.add_argument("--variant", default="stable", choices=tuple(ADSG_VARIANTS))
    run.add_argument("--blocks", type=int, default=8)
    run.add_argument("--batch", type=int, default=1)
    run.add_argument("--epochs", type=int, default=10)
    run.add_argument("--step-mult", type=float, default=1.0)
    run.add_argument("--reduce", default="none", choices=("none", "reg", "smooth", "joint"),
                     help="halving wrapper; round count follows --epsilon, --epochs is ignored")
    run.add_argument("--epsilon", type=float, default=1e-3,
                     help="target accuracy for --reduce modes")
    run.add_argument("--seed", type=int, required=True)
    run.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = ExperimentConfig(
        algo=args.algo,
        seed=args.seed,
        out=args.out,
        data_path=args.data,
        synth=args.synth,
        loss=args.loss,
        smoothing=args.smooth,
        l1=args.l1,
        l2=args.l2,
        mu=args.mu,
        variant=args.variant,
        blocks=args.blocks,
        batch=args.batch,
        epochs=args.epochs,
        step_mult=args.step_mult,
        reduce=args.reduce,
        epsilon=args.epsilon,
    )
    try:
        run_experiment(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DivergenceError, FloatingPointError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
