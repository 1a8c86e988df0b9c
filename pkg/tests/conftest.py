"""Shared fixtures and independent oracles for the test suite.

Oracles here deliberately avoid the library's own code paths: dense
matrices instead of the CSR layout, scalar golden-section search instead
of the closed-form prox, central differences instead of analytic
derivatives.
"""

import math

import numpy as np
import pytest
from hypothesis import settings

from adsg.data import Dataset

settings.register_profile("repo", derandomize=True)
settings.load_profile("repo")


def dense_matrix(ds: Dataset) -> np.ndarray:
    A = np.zeros((ds.n, ds.d))
    for i in range(ds.n):
        idx, vals = ds.row(i)
        A[i, idx] = vals
    return A


def random_sparse_dataset(n, d, nnz_per_row, rng, labels=None) -> Dataset:
    indptr = [0]
    indices = []
    data = []
    for _ in range(n):
        k = min(nnz_per_row, d)
        cols = np.sort(rng.choice(d, size=k, replace=False))
        indices.append(cols)
        data.append(rng.standard_normal(k))
        indptr.append(indptr[-1] + k)
    if labels is None:
        labels = rng.standard_normal(n)
    return Dataset(
        np.asarray(indptr), np.concatenate(indices), np.concatenate(data), labels, d
    )


def golden_section(fn, lo, hi, iters=200):
    """Scalar minimizer of a unimodal function on [lo, hi]."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def prox_oracle(l1, l2, y, eta, span=None):
    """Coordinatewise numeric minimizer of eta*P(x) + 0.5*(x - y)^2.

    Bisection on the sign of the (monotone) one-sided slope; value-based
    search cannot localize a smooth minimum below sqrt(machine eps), but
    the slope sign stays informative all the way down.
    """
    y = np.asarray(y, dtype=np.float64)
    span = 1.0 + np.abs(y).max() if span is None else span
    out = np.empty_like(y)
    for k, v in enumerate(y):

        def slope(x, v=v):
            s = 1.0 if x >= 0 else -1.0  # right-continuous subgradient choice
            return eta * (l1 * s + l2 * x) + (x - v)

        lo, hi = -span, span
        if slope(lo) >= 0:
            out[k] = lo
            continue
        if slope(hi) <= 0:
            out[k] = hi
            continue
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if slope(mid) < 0:
                lo = mid
            else:
                hi = mid
        out[k] = 0.5 * (lo + hi)
        # the slope jumps at zero; a sign change inside the jump means the
        # kink itself is the minimizer
        if abs(out[k]) < 1e-13 and slope(-1e-13) < 0 < slope(1e-13):
            out[k] = 0.0
    return out


def central_diff(fn, z, h=1e-6):
    return (fn(z + h) - fn(z - h)) / (2.0 * h)


def central_diff_vec(fn, x, h=1e-6):
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (fn(x + e) - fn(x - e)) / (2.0 * h)
    return g


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(1234)))


ACCEPTANCE_RESULTS: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
