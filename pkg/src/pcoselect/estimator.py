"""The weighted kernel estimator and its empirical L2 geometry.

Given a sample (X_1, Y_1), ..., (X_n, Y_n) and a loss map ell, the
estimator studied throughout this package is

    shat_K(x) = (1/n) sum_i K(X_i, x) ell(Y_i),

whose expectation is the section average s_K = E(K(X_1, .) ell(Y_1)); the
target of the whole construction is s(x) = E(ell(Y) | X = x) f(x), with
f the design density.  The three shipped loss maps turn one estimator
into three: ell = 1 estimates f itself, ell = identity estimates b f in a
regression model Y = b(X) + noise, and ell = square estimates the second
conditional moment times f (the noise-variance component when b = 0).

Empirical inner products <shat_a, shat_b>_2 reduce to double sums over the
Gram entries <K_a(X_i, .), K_b(X_j, .)>_2, which :class:`GramTables`
evaluates in closed form, caches, and reduces in a fixed pairwise order so
repeated and thread-pooled runs agree bit for bit.
"""

from __future__ import annotations

import csv
import enum
import logging
from collections import OrderedDict
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import DataError
from .kernels import (
    kernel_matrix,
    section_inner_matrix,
    section_inner_pointwise,
    section_sq_norm_points,
    spec_id,
)
from .numerics import GRAM_BLOCK_ROWS, combine_partials, pairwise_sum, weighted_gram_total

log = logging.getLogger(__name__)

NEGATIVE_DISTANCE_TOL = 1e-10


class LossKind(enum.Enum):
    """The loss map ell applied to responses before averaging."""

    ONE = "one"
    IDENTITY = "identity"
    SQUARE = "square"

    def apply(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if self is LossKind.ONE:
            return np.ones_like(y)
        if self is LossKind.IDENTITY:
            return y.copy()
        return y * y


@dataclass(frozen=True)
class Sample:
    """Design points x (n, d), responses y (n,), and the attached loss map."""

    x: np.ndarray
    y: np.ndarray
    loss: LossKind = LossKind.ONE

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.float64).ravel()
        if x.shape[0] != y.shape[0]:
            raise DataError("x and y row counts differ")
        if x.shape[0] < 1:
            raise DataError("empty sample")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("sample contains non-finite values")
        object.__setattr__(self, "x", np.ascontiguousarray(x))
        object.__setattr__(self, "y", np.ascontiguousarray(y))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @cached_property
    def loss_values(self) -> np.ndarray:
        return self.loss.apply(self.y)

    def with_loss(self, loss: LossKind) -> "Sample":
        return replace(self, loss=loss)


def read_sample_csv(path, loss: LossKind = LossKind.ONE) -> Sample:
    """Load a sample from CSV with header x1,...,xd,y.

    Rows containing non-finite or unparseable values are dropped with one
    counted warning; a missing, empty, or headerless file raises DataError.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"{path}: cannot read data file ({exc.strerror})") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [c.strip() for c in header]
        d = len(header) - 1
        if d < 1 or header[-1] != "y" or header[:-1] != [f"x{q + 1}" for q in range(d)]:
            raise DataError(f"{path}: header must be x1,...,xd,y (got {','.join(header)})")
        rows, rejected = [], 0
        for line in reader:
            if not line:
                continue
            if len(line) != d + 1:
                rejected += 1
                continue
            try:
                vals = [float(v) for v in line]
            except ValueError:
                rejected += 1
                continue
            if not all(np.isfinite(v) for v in vals):
                rejected += 1
                continue
            rows.append(vals)
    if rejected:
        log.warning("%s: dropped %d malformed or non-finite rows", path, rejected)
    if not rows:
        raise DataError(f"{path}: no usable data rows")
    arr = np.asarray(rows, dtype=np.float64)
    return Sample(arr[:, :d], arr[:, d], loss)


def write_sample_csv(path, x: np.ndarray, y: np.ndarray):
    """Write a sample in the x1,...,xd,y layout with full-precision floats."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{q + 1}" for q in range(x.shape[1])] + ["y"])
        for row, yv in zip(x, y):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(yv))])


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------

_EVAL_BLOCK = 1024


def estimate_on_grid(spec, sample: Sample, points: np.ndarray) -> np.ndarray:
    """shat_K at row-stacked evaluation points; shape (P,)."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    ell = sample.loss_values
    out = np.empty(points.shape[0])
    for start in range(0, points.shape[0], _EVAL_BLOCK):
        block = points[start : start + _EVAL_BLOCK]
        kmat = kernel_matrix(spec, sample.x, block)
        out[start : start + _EVAL_BLOCK] = ell @ kmat / sample.n
    return out


def estimate(spec, sample: Sample, x) -> float:
    """shat_K(x) = (1/n) sum_i K(X_i, x) ell(Y_i) at one point."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    col = kernel_matrix(spec, sample.x, x[None, :])[:, 0]
    return pairwise_sum(col * sample.loss_values) / sample.n


# ---------------------------------------------------------------------------
# Gram tables
# ---------------------------------------------------------------------------


class GramTables:
    """Cached pairwise section inner products over one sample.

    For an ordered spec pair (a, b) the full table is the n x n matrix
    G[i, j] = <K_a(X_i, .), K_b(X_j, .)>_2.  Matrices are cached with LRU
    eviction and only materialized up to ``matrix_max_n`` rows; beyond
    that the loss-weighted totals are streamed over fixed-size row blocks,
    which keeps memory flat without changing the reduction order.
    Transposition symmetry G_ab = G_ba^T is exploited so each unordered
    pair is computed once.
    """

    def __init__(self, sample: Sample, max_matrices: int = 48, matrix_max_n: int = 4096):
        self.sample = sample
        self.max_matrices = int(max_matrices)
        self.matrix_max_n = int(matrix_max_n)
        self._matrices: OrderedDict = OrderedDict()
        self._totals: dict = {}
        self._diags: dict = {}

    def _canonical(self, a, b):
        if spec_id(a) <= spec_id(b):
            return (a, b), False
        return (b, a), True

    def matrix(self, a, b) -> np.ndarray:
        """The n x n table for (a, b); raises for samples above the matrix cap."""
        n = self.sample.n
        if n > self.matrix_max_n:
            raise ValueError(
                f"n = {n} exceeds the dense-table cap {self.matrix_max_n}; use weighted_total"
            )
        key, transposed = self._canonical(a, b)
        if key not in self._matrices:
            gram = section_inner_matrix(key[0], self.sample.x, key[1], self.sample.x)
            self._matrices[key] = gram
            if len(self._matrices) > self.max_matrices:
                self._matrices.popitem(last=False)
        else:
            self._matrices.move_to_end(key)
        gram = self._matrices[key]
        return gram.T if transposed else gram

    def diag(self, a, b) -> np.ndarray:
        """G[i, i] only: <K_a(X_i, .), K_b(X_i, .)>_2 as an n-vector."""
        key, _ = self._canonical(a, b)
        if key not in self._diags:
            self._diags[key] = section_inner_pointwise(key[0], self.sample.x, key[1], self.sample.x)
        return self._diags[key]

    def weighted_total(self, a, b) -> float:
        """sum_{i,j} ell_i ell_j G_ab[i, j], reduced in a fixed pairwise order."""
        key, _ = self._canonical(a, b)
        if key in self._totals:
            return self._totals[key]
        ell = self.sample.loss_values
        if self.sample.n <= self.matrix_max_n:
            total = weighted_gram_total(self.matrix(key[0], key[1]), ell, ell)
        else:
            partials = []
            x = self.sample.x
            for start in range(0, self.sample.n, GRAM_BLOCK_ROWS):
                stop = start + GRAM_BLOCK_ROWS
                block = section_inner_matrix(key[0], x[start:stop], key[1], x)
                partials.append(weighted_gram_total(block, ell[start:stop], ell))
            total = combine_partials(partials)
        self._totals[key] = total
        return total


def estimator_inner(a, b, sample: Sample, tables: GramTables | None = None) -> float:
    """<shat_a, shat_b>_2 = (1/n^2) sum_{i,j} ell_i ell_j G_ab[i, j]."""
    if tables is None:
        tables = GramTables(sample)
    return tables.weighted_total(a, b) / sample.n**2


def criterion_distance(a, k0, sample: Sample, tables: GramTables | None = None) -> float:
    """||shat_a - shat_k0||_2^2 expanded through the Gram tables.

    Exact arithmetic gives a nonnegative number; floating point can land a
    few ulp below zero, which is clamped to zero.  A drop beyond 1e-10 is
    clamped too but logged, since it would indicate an inconsistent table.
    """
    if tables is None:
        tables = GramTables(sample)
    value = (
        estimator_inner(a, a, sample, tables)
        - 2.0 * estimator_inner(a, k0, sample, tables)
        + estimator_inner(k0, k0, sample, tables)
    )
    if value < 0.0:
        if value < -NEGATIVE_DISTANCE_TOL:
            log.warning("criterion distance %.3e clamped to 0 beyond tolerance", value)
        value = 0.0
    return value


def sbar_empirical(spec, sample: Sample) -> float:
    """(1/n) sum_i ||K(X_i, .)||_2^2 ell(Y_i)^2, the variance-scale proxy."""
    norms = section_sq_norm_points(spec, sample.x)
    ell = sample.loss_values
    return pairwise_sum(norms * ell * ell) / sample.n


# ---------------------------------------------------------------------------
# centered second-order statistics
# ---------------------------------------------------------------------------


def _cross_with_function(spec, sample: Sample, values: np.ndarray, grid) -> np.ndarray:
    """<K_spec(X_i, .), g>_2 for each i, with g given by its grid values."""
    weighted = grid.weights * values
    out = np.empty(sample.n)
    for start in range(0, sample.n, _EVAL_BLOCK):
        block = sample.x[start : start + _EVAL_BLOCK]
        kmat = kernel_matrix(spec, block, grid.points)
        out[start : start + _EVAL_BLOCK] = kmat @ weighted
    return out


def u_statistic(a, b, sample: Sample, s_mean_a=None, s_mean_b=None, grid=None) -> float:
    """Degenerate second-order statistic of the centered section sums.

    U = sum_{i != j} <K_a(X_i, .) ell_i - s_a, K_b(X_j, .) ell_j - s_b>_2,
    where s_a, s_b are the section averages E(K(X_1, .) ell(Y_1)) supplied
    as vectorized callables (None means the zero function).  Cross terms
    against s_a, s_b are integrated on ``grid``, which is required as soon
    as either function is present.  Centering makes E(U) = 0.
    """
    if sample.n < 2:
        raise ValueError("the pair statistic needs at least two observations")
    ell = sample.loss_values
    gram = section_inner_matrix(a, sample.x, b, sample.x)
    weighted = (ell[:, None] * gram) * ell[None, :]
    total = pairwise_sum(weighted) - pairwise_sum(np.diagonal(weighted).copy())
    if s_mean_a is None and s_mean_b is None:
        return total
    if grid is None:
        raise ValueError("an integration grid is required with nonzero section averages")
    sa = np.zeros(grid.points.shape[0]) if s_mean_a is None else np.asarray(s_mean_a(grid.points))
    sb = np.zeros(grid.points.shape[0]) if s_mean_b is None else np.asarray(s_mean_b(grid.points))
    n = sample.n
    cross_a = _cross_with_function(a, sample, sb, grid)
    cross_b = _cross_with_function(b, sample, sa, grid)
    total -= (n - 1) * pairwise_sum(ell * cross_a)
    total -= (n - 1) * pairwise_sum(ell * cross_b)
    total += n * (n - 1) * grid.integrate(sa * sb)
    return total


def v_statistic(spec, sample: Sample, s_mean=None, grid=None) -> float:
    """V = (1/n) sum_i ||K(X_i, .) ell_i - s_K||_2^2.

    With s_mean = None this is exactly :func:`sbar_empirical`; with the
    section average supplied, E(V) = sbar - ||s_K||_2^2.
    """
    base = sbar_empirical(spec, sample)
    if s_mean is None:
        return base
    if grid is None:
        raise ValueError("an integration grid is required with a nonzero section average")
    s_vals = np.asarray(s_mean(grid.points))
    ell = sample.loss_values
    cross = _cross_with_function(spec, sample, s_vals, grid)
    norm_sq = grid.integrate(s_vals * s_vals)
    return base - 2.0 * pairwise_sum(ell * cross) / sample.n + norm_sq


def w_statistic(a, b, sample: Sample, s_mean_a, s_mean_b, s_true, grid) -> float:
    """W = <shat_a - s_a, s_b - s>_2, integrated on the supplied grid.

    All three functions are vectorized callables on row-stacked points.
    E(W) = 0 because shat_a is unbiased for its own section average s_a.
    """
    shat = estimate_on_grid(a, sample, grid.points)
    sa = np.asarray(s_mean_a(grid.points))
    sb = np.asarray(s_mean_b(grid.points))
    st = np.asarray(s_true(grid.points))
    return grid.integrate((shat - sa) * (sb - st))
