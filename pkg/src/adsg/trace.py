"""Per-epoch trace records shared by every solver, and CSV emission."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

CSV_HEADER = ("algo", "epoch", "epg", "seconds", "objective")


class DivergenceError(RuntimeError):
    """Objective blew up or turned non-finite; names the offending epoch."""

    def __init__(self, epoch: int, value: float):
        self.epoch = epoch
        self.value = value
        super().__init__(f"objective diverged at epoch {epoch}: {value!r}")


@dataclass
class TraceRecord:
    algo: str
    epoch: int
    epg: int
    seconds: float
    objective: float

    def row(self) -> tuple:
        return (self.algo, self.epoch, self.epg, repr(self.seconds), repr(self.objective))


def write_trace_csv(path: str, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for rec in records:
            w.writerow(rec.row())


def check_divergence(epoch: int, value: float, initial: float) -> None:
    """Guard against silent blowup: error out past 1e6 x the starting objective."""
    if not math.isfinite(value):
        raise DivergenceError(epoch, value)
    if initial > 0 and value > 1e6 * initial:
        raise DivergenceError(epoch, value)
