#!/usr/bin/env python3
"""Render solver trace CSVs as the usual convergence figure pair.

Input files follow the benchmark harness schema
`algo,epoch,epg,seconds,objective`. The figure shows suboptimality
(objective minus a reference optimum) against evaluated partial
gradients on the left and against wall seconds on the right, log-scale
y, one curve per algorithm. The only data transformations are the
reference subtraction and clipping exact zeros to a plot floor.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass, field

GAP_FLOOR = 1e-16
SCHEMA = ("algo", "epoch", "epg", "seconds", "objective")


class TraceError(ValueError):
    """Bad input file; message names the offending path."""


@dataclass
class PlotSpec:
    traces: list
    fstar: float
    out: str
    title: str | None = None


@dataclass
class Series:
    algo: str
    epg: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    gap: list = field(default_factory=list)


def read_trace(path: str) -> dict:
    """Parse one CSV into {algo: [(epoch, epg, seconds, objective)]}."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise TraceError(f"{path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise TraceError(f"{path}: empty file")
        missing = [c for c in SCHEMA if c not in reader.fieldnames]
        if missing:
            raise TraceError(f"{path}: missing column(s) {', '.join(missing)}")
        out: dict = {}
        rows = 0
        for row in reader:
            try:
                rec = (
                    int(row["epoch"]),
                    float(row["epg"]),
                    float(row["seconds"]),
                    float(row["objective"]),
                )
            except (TypeError, ValueError) as exc:
                raise TraceError(f"{path}: bad row {row!r}") from exc
            out.setdefault(row["algo"], []).append(rec)
            rows += 1
        if rows == 0:
            raise TraceError(f"{path}: no data rows")
    return out


def build_series(spec: PlotSpec) -> list[Series]:
    """Gap series per algorithm, in first-seen order across the input files."""
    series: dict[str, Series] = {}
    for path in spec.traces:
        for algo, rows in read_trace(path).items():
            low = min(r[3] for r in rows)
            if spec.fstar > low + 1e-12:
                raise TraceError(
                    f"{path}: reference optimum {spec.fstar!r} exceeds observed minimum {low!r}"
                )
            s = series.setdefault(algo, Series(algo=algo))
            for epoch, epg, seconds, objective in sorted(rows):
                s.epg.append(epg)
                s.seconds.append(seconds)
                s.gap.append(max(objective - spec.fstar, GAP_FLOOR))
    return list(series.values())


def render(spec: PlotSpec) -> list[Series]:
    """Write the two-panel figure; returns the plotted series."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    all_series = build_series(spec)
    fig, (ax_epg, ax_time) = plt.subplots(1, 2, figsize=(9.6, 3.8))
    for s in all_series:
        ax_epg.plot(s.epg, s.gap, label=s.algo)
        ax_time.plot(s.seconds, s.gap, label=s.algo)
    for ax, xlabel in ((ax_epg, "evaluated partial gradients"), (ax_time, "seconds")):
        ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("objective - reference")
        ax.legend()
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    fig.savefig(spec.out)
    plt.close(fig)
    return all_series


def _parse_fstar(text: str) -> float:
    """A literal value, or a path to a file holding one."""
    try:
        return float(text)
    except ValueError:
        pass
    if os.path.exists(text):
        with open(text) as fh:
            return float(fh.read().strip())
    raise argparse.ArgumentTypeError(f"--fstar: neither a number nor a file: {text!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plotkit.py", description=__doc__)
    parser.add_argument("--traces", nargs="+", required=True, help="trace CSV files")
    parser.add_argument("--fstar", type=_parse_fstar, required=True,
                        help="reference optimum (value or file containing one)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    spec = PlotSpec(traces=args.traces, fstar=args.fstar, out=args.out, title=args.title)
    try:
        render(spec)
    except TraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
