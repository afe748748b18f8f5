"""Brute-force oracles shared across test modules.

Everything here recomputes quantities the library gets in closed form,
by direct quadrature with panel boundaries at every point where an
integrand can lose smoothness.  Slow and dumb on purpose.
"""

import numpy as np

from pcoselect import BandwidthSpec, ProjectionSpec, composite_rule, kernel_matrix
from pcoselect.bases import breakpoints as basis_breakpoints


def section_box(spec, anchor):
    """Per-dimension integration bounds covering the section's support."""
    anchor = np.atleast_1d(np.asarray(anchor, dtype=np.float64))
    if isinstance(spec, BandwidthSpec):
        reach = [spec.base.tail_halfwidth * h for h in spec.h]
        return (
            [anchor[q] - reach[q] for q in range(spec.d)],
            [anchor[q] + reach[q] for q in range(spec.d)],
        )
    lo, hi = spec.basis.support
    return [lo] * spec.d, [hi] * spec.d


def section_breakpoints(spec, anchor):
    """Kink locations of the section along each dimension."""
    anchor = np.atleast_1d(np.asarray(anchor, dtype=np.float64))
    out = []
    for q in range(spec.d):
        if isinstance(spec, BandwidthSpec):
            h = spec.h[q]
            out.append([anchor[q] - h, anchor[q] + h])
        else:
            out.append(list(basis_breakpoints(spec.basis, spec.m[q])))
    return out


def quad_section_inner(a, xa, b, xb, nodes_per_unit=64):
    """Quadrature oracle for <K_a(xa, .), K_b(xb, .)>_2 over R^d.

    Integrates the product of the two sections on the union box of their
    supports, with panel edges at every kink of either factor.
    """
    xa = np.atleast_1d(np.asarray(xa, dtype=np.float64))
    xb = np.atleast_1d(np.asarray(xb, dtype=np.float64))
    lo_a, hi_a = section_box(a, xa)
    lo_b, hi_b = section_box(b, xb)
    brk_a = section_breakpoints(a, xa)
    brk_b = section_breakpoints(b, xb)
    total = 1.0
    for q in range(len(xa)):
        lo = min(lo_a[q], lo_b[q])
        hi = max(hi_a[q], hi_b[q])
        nodes, weights = composite_rule(lo, hi, brk_a[q] + brk_b[q], nodes_per_unit)
        ka = kernel_matrix(_axis_spec(a, q), xa[q : q + 1].reshape(1, 1), nodes.reshape(-1, 1))[0]
        kb = kernel_matrix(_axis_spec(b, q), xb[q : q + 1].reshape(1, 1), nodes.reshape(-1, 1))[0]
        total *= float(np.sum(weights * ka * kb))
    return total


def _axis_spec(spec, q):
    """The 1-d factor of a product kernel along dimension q."""
    if isinstance(spec, BandwidthSpec):
        return BandwidthSpec(spec.base, (spec.h[q],))
    return ProjectionSpec(spec.basis, (spec.m[q],), spec.w)
