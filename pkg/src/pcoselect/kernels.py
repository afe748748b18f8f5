"""Kernel specifications, families, and closed-form L2 section geometry.

Two kinds of product kernels are supported on R^d:

* bandwidth kernels  K(x', x) = prod_q (1/h_q) k((x'_q - x_q)/h_q) built
  from a Gaussian or Epanechnikov base density k, and
* projection kernels K(x', x) = prod_q sum_j w_j phi_j(x_q) phi_j(x'_q)
  built from an orthonormal family truncated at order m_q per dimension,
  optionally downweighted by w_j in [0, 1] (w omitted means w_j = 1).

The selection machinery never integrates kernel products numerically on
its hot path: inner products between kernel sections <K_a(xa,.), K_b(xb,.)>
are evaluated in closed form (Gaussian pairs convolve to a Gaussian;
projection pairs reduce to basis cross-Gram sums).  The one exception is
the Epanechnikov convolution, which is evaluated by exact Gauss-Legendre
quadrature on the support overlap at every call: the integrand there is a
polynomial of degree four, so the rule is exact, and no table or
interpolation enters the result.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .bases import BasisFamily, BasisKind, basis_matrix, breakpoints, cross_gram
from .quadrature import composite_rule

DIAG_SCAN_POINTS = 10_000


class BaseKind(enum.Enum):
    GAUSSIAN = "gaussian"
    EPANECHNIKOV = "epanechnikov"


@dataclass(frozen=True)
class BaseKernel:
    """A symmetric base density k with its exact norm constants."""

    kind: BaseKind

    @property
    def l1_norm(self) -> float:
        return 1.0

    @property
    def l2_norm_sq(self) -> float:
        if self.kind is BaseKind.GAUSSIAN:
            return 1.0 / (2.0 * math.sqrt(math.pi))
        return 3.0 / 5.0

    @property
    def at_zero(self) -> float:
        if self.kind is BaseKind.GAUSSIAN:
            return 1.0 / math.sqrt(2.0 * math.pi)
        return 3.0 / 4.0

    @property
    def tail_halfwidth(self) -> float:
        """Half-width outside which k is (numerically) zero, in k's own scale."""
        if self.kind is BaseKind.GAUSSIAN:
            from .quadrature import GAUSSIAN_TAIL_WIDTH

            return GAUSSIAN_TAIL_WIDTH
        return 1.0

    def eval(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        if self.kind is BaseKind.GAUSSIAN:
            return np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
        return 0.75 * np.clip(1.0 - u * u, 0.0, None) * (np.abs(u) <= 1.0)


GAUSSIAN = BaseKernel(BaseKind.GAUSSIAN)
EPANECHNIKOV = BaseKernel(BaseKind.EPANECHNIKOV)


@dataclass(frozen=True)
class BandwidthSpec:
    base: BaseKernel
    h: tuple

    def __post_init__(self):
        h = tuple(float(v) for v in self.h)
        object.__setattr__(self, "h", h)
        if not h:
            raise ValueError("bandwidth tuple is empty")
        if any(v <= 0 for v in h):
            raise ValueError("bandwidths must be positive")

    @property
    def d(self) -> int:
        return len(self.h)


@dataclass(frozen=True)
class ProjectionSpec:
    basis: BasisFamily
    m: tuple
    w: tuple | None = None

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        object.__setattr__(self, "m", m)
        if not m:
            raise ValueError("dimension tuple is empty")
        for mq in m:
            self.basis.check_order(mq)
        if self.w is not None:
            w = tuple(float(v) for v in self.w)
            object.__setattr__(self, "w", w)
            if len(w) < max(m):
                raise ValueError("weight vector shorter than the largest order")
            if any(not 0.0 <= v <= 1.0 for v in w):
                raise ValueError("weights must lie in [0, 1]")

    @property
    def d(self) -> int:
        return len(self.m)

    def weights_for(self, mq: int) -> np.ndarray:
        if self.w is None:
            return np.ones(mq)
        return np.asarray(self.w[:mq], dtype=np.float64)


# Either variant; functions below dispatch on the concrete type.
KernelSpec = (BandwidthSpec, ProjectionSpec)


def spec_dim(spec) -> int:
    return spec.d


def spec_id(spec) -> str:
    """Short deterministic identifier used in reports."""
    if isinstance(spec, BandwidthSpec):
        hs = ",".join(repr(v) for v in spec.h)
        return f"bandwidth:{spec.base.kind.value}:h={hs}"
    ms = ",".join(str(v) for v in spec.m)
    out = f"projection:{spec.basis.kind.value}:m={ms}"
    if spec.w is not None:
        out += ":w=" + ",".join(repr(v) for v in spec.w)
    return out


def spec_to_config(spec) -> dict:
    if isinstance(spec, BandwidthSpec):
        return {"variant": "bandwidth", "base": spec.base.kind.value, "h": list(spec.h)}
    cfg = {
        "variant": "projection",
        "basis": spec.basis.kind.value,
        "m": list(spec.m),
        "m_cap": spec.basis.m_cap,
    }
    if spec.w is not None:
        cfg["w"] = list(spec.w)
    return cfg


def spec_from_config(cfg: dict):
    variant = cfg.get("variant")
    if variant == "bandwidth":
        base = BaseKernel(BaseKind(cfg["base"]))
        return BandwidthSpec(base, tuple(cfg["h"]))
    if variant == "projection":
        basis = BasisFamily(BasisKind(cfg["basis"]), int(cfg.get("m_cap", 64)))
        w = tuple(cfg["w"]) if "w" in cfg else None
        return ProjectionSpec(basis, tuple(cfg["m"]), w)
    raise ValueError(f"unknown kernel variant {variant!r}")


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------


def kernel_matrix(spec, xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    """K(xa_i, xb_j) for row-stacked points; shape (len(xa), len(xb))."""
    xa = np.atleast_2d(np.asarray(xa, dtype=np.float64))
    xb = np.atleast_2d(np.asarray(xb, dtype=np.float64))
    if xa.shape[1] != spec.d or xb.shape[1] != spec.d:
        raise ValueError("point dimension does not match the kernel")
    out = np.ones((xa.shape[0], xb.shape[0]))
    if isinstance(spec, BandwidthSpec):
        for q, hq in enumerate(spec.h):
            delta = (xa[:, q][:, None] - xb[None, :, q]) / hq
            out *= spec.base.eval(delta) / hq
        return out
    for q, mq in enumerate(spec.m):
        wq = spec.weights_for(mq)
        va = basis_matrix(spec.basis, mq, xa[:, q]) * wq[None, :]
        vb = basis_matrix(spec.basis, mq, xb[:, q])
        out *= va @ vb.T
    return out


def kernel_eval(spec, x_prime, x) -> float:
    """K(x', x) at a single pair of d-vectors."""
    a = np.atleast_1d(np.asarray(x_prime, dtype=np.float64))[None, :]
    b = np.atleast_1d(np.asarray(x, dtype=np.float64))[None, :]
    return float(kernel_matrix(spec, a, b)[0, 0])


# ---------------------------------------------------------------------------
# closed-form section inner products
# ---------------------------------------------------------------------------


def _conv_quadrature(eval_a, lo_a, hi_a, eval_b, lo_b, hi_b, delta: np.ndarray, nodes: int) -> np.ndarray:
    """integral of f_a(u) f_b(u - delta) over the support overlap, per delta."""
    delta = np.asarray(delta, dtype=np.float64)
    lo = np.maximum(lo_a, delta + lo_b)
    hi = np.minimum(hi_a, delta + hi_b)
    width = np.clip(hi - lo, 0.0, None)
    x_std, w_std = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * width
    mid = 0.5 * (lo + hi)
    u = mid[..., None] + half[..., None] * x_std  # (..., nodes)
    vals = eval_a(u) * eval_b(u - delta[..., None])
    return np.einsum("...n,n->...", vals, w_std) * half


def _bandwidth_conv_1d(base_a: BaseKernel, h_a: float, base_b: BaseKernel, h_b: float, delta) -> np.ndarray:
    """integral of (1/h_a) k_a(u/h_a) (1/h_b) k_b((u - delta)/h_b) du, vectorized.

    A Gaussian pair convolves in closed form to a centered Gaussian of
    variance h_a^2 + h_b^2.  Any pair involving an Epanechnikov factor is a
    piecewise polynomial of degree four on the support overlap and is
    integrated exactly by a 64-node Gauss-Legendre rule on that overlap.
    """
    delta = np.asarray(delta, dtype=np.float64)
    if base_a.kind is BaseKind.GAUSSIAN and base_b.kind is BaseKind.GAUSSIAN:
        v = h_a * h_a + h_b * h_b
        return np.exp(-delta * delta / (2.0 * v)) / math.sqrt(2.0 * math.pi * v)

    def scaled(base, h):
        return lambda u: base.eval(u / h) / h

    wa = base_a.tail_halfwidth * h_a
    wb = base_b.tail_halfwidth * h_b
    nodes = 64 if (base_a.kind is BaseKind.EPANECHNIKOV and base_b.kind is BaseKind.EPANECHNIKOV) else 128
    return _conv_quadrature(scaled(base_a, h_a), -wa, wa, scaled(base_b, h_b), -wb, wb, delta, nodes)


def section_inner_matrix(a, xa: np.ndarray, b, xb: np.ndarray) -> np.ndarray:
    """Gram block <K_a(xa_i, .), K_b(xb_j, .)>_2, shape (len(xa), len(xb)).

    Both specs must share the variant (bandwidth with bandwidth, projection
    with projection on the same basis family kind); mixing variants has no
    closed form here and raises ValueError.
    """
    xa = np.atleast_2d(np.asarray(xa, dtype=np.float64))
    xb = np.atleast_2d(np.asarray(xb, dtype=np.float64))
    if a.d != b.d:
        raise ValueError("kernel dimensions differ")
    if xa.shape[1] != a.d or xb.shape[1] != b.d:
        raise ValueError("point dimension does not match the kernels")
    if isinstance(a, BandwidthSpec) and isinstance(b, BandwidthSpec):
        out = np.ones((xa.shape[0], xb.shape[0]))
        for q in range(a.d):
            delta = xa[:, q][:, None] - xb[None, :, q]
            out *= _bandwidth_conv_1d(a.base, a.h[q], b.base, b.h[q], delta)
        return out
    if isinstance(a, ProjectionSpec) and isinstance(b, ProjectionSpec):
        if a.basis.kind is not b.basis.kind:
            raise ValueError("projection kernels use different basis families")
        out = np.ones((xa.shape[0], xb.shape[0]))
        for q in range(a.d):
            ma, mb = a.m[q], b.m[q]
            va = basis_matrix(a.basis, ma, xa[:, q]) * a.weights_for(ma)[None, :]
            vb = basis_matrix(b.basis, mb, xb[:, q]) * b.weights_for(mb)[None, :]
            if a.basis.nested:
                k = min(ma, mb)
                out *= va[:, :k] @ vb[:, :k].T
            else:
                gram = cross_gram(a.basis, ma, mb)
                out *= va @ gram @ vb.T
        return out
    raise ValueError("no closed form for mixed bandwidth/projection sections")


def section_inner(a, xa, b, xb) -> float:
    """<K_a(xa, .), K_b(xb, .)>_2 at single points."""
    pa = np.atleast_1d(np.asarray(xa, dtype=np.float64))[None, :]
    pb = np.atleast_1d(np.asarray(xb, dtype=np.float64))[None, :]
    return float(section_inner_matrix(a, pa, b, pb)[0, 0])


def section_inner_pointwise(a, xa: np.ndarray, b, xb: np.ndarray) -> np.ndarray:
    """<K_a(xa_i, .), K_b(xb_i, .)>_2 row by row (no cross terms); shape (n,)."""
    xa = np.atleast_2d(np.asarray(xa, dtype=np.float64))
    xb = np.atleast_2d(np.asarray(xb, dtype=np.float64))
    if xa.shape != xb.shape:
        raise ValueError("paired point arrays must share a shape")
    out = np.ones(xa.shape[0])
    if isinstance(a, BandwidthSpec) and isinstance(b, BandwidthSpec):
        for q in range(a.d):
            out *= _bandwidth_conv_1d(a.base, a.h[q], b.base, b.h[q], xa[:, q] - xb[:, q])
        return out
    if isinstance(a, ProjectionSpec) and isinstance(b, ProjectionSpec):
        if a.basis.kind is not b.basis.kind:
            raise ValueError("projection kernels use different basis families")
        for q in range(a.d):
            ma, mb = a.m[q], b.m[q]
            if a.basis.kind is BasisKind.REGULAR_HISTOGRAM:
                # Closed cell form: the section of x is w_c * m * 1_cell(x), so the
                # inner product is w_c w'_c' m m' |cell intersect cell'|.
                ua, ub = xa[:, q], xb[:, q]
                ca = np.floor(ua * ma).astype(np.int64)
                cb = np.floor(ub * mb).astype(np.int64)
                ok = (ua >= 0) & (ua < 1) & (ub >= 0) & (ub < 1)
                ca = np.clip(ca, 0, ma - 1)
                cb = np.clip(cb, 0, mb - 1)
                overlap = np.clip(
                    np.minimum((ca + 1) / ma, (cb + 1) / mb) - np.maximum(ca / ma, cb / mb),
                    0.0,
                    None,
                )
                wa = a.weights_for(ma)[ca]
                wb = b.weights_for(mb)[cb]
                out *= wa * wb * ma * mb * overlap * ok
            else:
                k = min(ma, mb)
                va = basis_matrix(a.basis, ma, xa[:, q])[:, :k] * a.weights_for(ma)[None, :k]
                vb = basis_matrix(b.basis, mb, xb[:, q])[:, :k] * b.weights_for(mb)[None, :k]
                out *= np.sum(va * vb, axis=1)
        return out
    raise ValueError("no closed form for mixed bandwidth/projection sections")


def section_sq_norm(spec, x_prime) -> float:
    """||K(x', .)||_2^2.

    Bandwidth kernels: prod_q ||k||_2^2 / h_q, independent of x'.
    Projection kernels: prod_q sum_j (w_j phi_j(x'_q))^2.
    """
    if isinstance(spec, BandwidthSpec):
        out = 1.0
        for hq in spec.h:
            out *= spec.base.l2_norm_sq / hq
        return out
    xp = np.atleast_1d(np.asarray(x_prime, dtype=np.float64))
    out = 1.0
    for q, mq in enumerate(spec.m):
        row = basis_matrix(spec.basis, mq, xp[q : q + 1])[0] * spec.weights_for(mq)
        out *= float(np.sum(row * row))
    return out


def section_sq_norm_points(spec, pts: np.ndarray) -> np.ndarray:
    """||K(x', .)||_2^2 for row-stacked points x'; vectorized form."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    if isinstance(spec, BandwidthSpec):
        return np.full(pts.shape[0], section_sq_norm(spec, pts[0]))
    out = np.ones(pts.shape[0])
    for q, mq in enumerate(spec.m):
        mat = basis_matrix(spec.basis, mq, pts[:, q]) * spec.weights_for(mq)[None, :]
        out *= np.sum(mat * mat, axis=1)
    return out


def section_l1_norm(spec, x_prime) -> float:
    """||K(x', .)||_1.

    Bandwidth kernels factor into base L1 norms: ||k||_1^d = 1 exactly.
    Projection kernels are integrated per dimension by a composite rule
    whose panels are refined beyond the oscillation scale of the members.
    """
    if isinstance(spec, BandwidthSpec):
        return spec.base.l1_norm ** spec.d
    xp = np.atleast_1d(np.asarray(x_prime, dtype=np.float64))
    lo, hi = spec.basis.support
    out = 1.0
    for q, mq in enumerate(spec.m):
        anchor = basis_matrix(spec.basis, mq, xp[q : q + 1])[0] * spec.weights_for(mq)
        brk = breakpoints(spec.basis, mq)
        if spec.basis.kind is not BasisKind.REGULAR_HISTOGRAM:
            brk = list(np.linspace(lo, hi, 4 * mq + 1)[1:-1])
        nodes, weights = composite_rule(lo, hi, brk)
        vals = basis_matrix(spec.basis, mq, nodes) @ anchor
        out *= float(np.sum(weights * np.abs(vals)))
    return out


def diag_sup(spec) -> float:
    """sup_x K(x, x), the overfitting score of a kernel.

    Bandwidth: prod_q k(0)/h_q exactly.  Histogram projection:
    prod_q m_q max_j w_j exactly.  Other projection kernels scan a
    10^4-point grid per dimension (their diagonal maxima sit at grid
    endpoints, so the scan is exact for the shipped bases).
    """
    if isinstance(spec, BandwidthSpec):
        out = 1.0
        for hq in spec.h:
            out *= spec.base.at_zero / hq
        return out
    if spec.basis.kind is BasisKind.REGULAR_HISTOGRAM:
        out = 1.0
        for mq in spec.m:
            out *= mq * float(np.max(spec.weights_for(mq)))
        return out
    lo, hi = spec.basis.support
    grid = np.linspace(lo, hi, DIAG_SCAN_POINTS)
    out = 1.0
    for mq in spec.m:
        mat = basis_matrix(spec.basis, mq, grid)
        out *= float(np.max((mat * mat) @ spec.weights_for(mq)))
    return out


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelFamily:
    """An ordered collection of candidate kernels plus its overfitting member.

    ``k0_index`` points at the member maximizing sup_x K(x, x); ties go to
    the lowest index.  ``sample_cap`` is the sample size n the family was
    sized against (the family never holds more than n members).
    """

    specs: tuple
    sample_cap: int
    k0_index: int

    def __len__(self):
        return len(self.specs)

    @property
    def d(self) -> int:
        return self.specs[0].d

    @property
    def k0(self):
        return self.specs[self.k0_index]


def find_overfitting_k0(specs) -> int:
    """Index of the member with the largest diagonal supremum (first on ties)."""
    specs = list(specs)
    if not specs:
        raise ValueError("empty kernel collection")
    values = [diag_sup(s) for s in specs]
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


def make_bandwidth_family(base: BaseKernel, h_min: float, grid, d: int, n: int) -> KernelFamily:
    """Family of bandwidth kernels over a per-dimension bandwidth grid.

    Every coordinate of every member ranges over ``grid``, which must sit
    inside [h_min, 1] with h_min in [n^(-1/d), 1].  When the full product
    grid exceeds n members, the n smoothest members (largest bandwidth
    product) are kept along with the overfitting member, so the selection
    anchor is never truncated away.
    """
    grid = sorted(float(v) for v in grid)
    if not grid:
        raise ValueError("empty bandwidth grid")
    if n < 1:
        raise ValueError("sample cap must be positive")
    if not (n ** (-1.0 / d) - 1e-12 <= h_min <= 1.0):
        raise ValueError(f"h_min {h_min} outside [n^(-1/d), 1] = [{n ** (-1.0 / d)}, 1]")
    for v in grid:
        if not (h_min - 1e-12 <= v <= 1.0):
            raise ValueError(f"grid value {v} outside [h_min, 1]")
    tuples = list(itertools.product(grid, repeat=d))
    if len(tuples) > n:
        products = [float(np.prod(t)) for t in tuples]
        k0_cand = min(range(len(tuples)), key=lambda i: (products[i], i))
        order = sorted(range(len(tuples)), key=lambda i: (-products[i], i))
        keep = set(order[: n - 1]) | {k0_cand}
        tuples = [tuples[i] for i in sorted(keep)]
    specs = tuple(BandwidthSpec(base, t) for t in tuples)
    return KernelFamily(specs, n, find_overfitting_k0(specs))


def make_projection_family(basis: BasisFamily, m_max: int, d: int, n: int, w=None) -> KernelFamily:
    """Family of projection kernels over all order tuples in {1..m_max}^d.

    Requires m_max^d <= n so the family respects the sample-size cap;
    larger requests raise ValueError rather than silently truncating.
    """
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    basis.check_order(m_max)
    if m_max**d > n:
        raise ValueError(f"m_max^d = {m_max**d} exceeds the sample cap {n}")
    w = tuple(float(v) for v in w) if w is not None else None
    tuples = list(itertools.product(range(1, m_max + 1), repeat=d))
    specs = tuple(ProjectionSpec(basis, t, w) for t in tuples)
    return KernelFamily(specs, n, find_overfitting_k0(specs))
