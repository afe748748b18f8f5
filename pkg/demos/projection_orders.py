"""How many basis coefficients does the criterion keep?

Repeats selection over nested trigonometric and histogram projection
families on a smooth regression target and tallies the chosen orders.
The polynomial mean 4u(1-u) has fast-decaying spectral coefficients, so
small trigonometric orders should dominate, while the histogram family
needs more cells to fight its piecewise-constant bias.
"""

import collections

from pcoselect import (
    BasisFamily,
    BasisKind,
    LossKind,
    make_projection_family,
    pco_select,
    scenario_from_config,
)

scn = scenario_from_config(
    {
        "d": 1,
        "f": "uniform",
        "b": {"kind": "polynomial"},
        "sigma": {"kind": "constant", "c": 0.25},
        "noise": "gaussian",
        "n": 600,
        "replications": 10,
        "seed": 31,
    }
)

for kind, m_max in ((BasisKind.TRIGONOMETRIC, 16), (BasisKind.REGULAR_HISTOGRAM, 12)):
    family = make_projection_family(BasisFamily(kind, m_cap=m_max), m_max, d=1, n=scn.n)
    counts = collections.Counter()
    for r in range(scn.replications):
        sample = scn.generate(r, LossKind.IDENTITY)
        sel = pco_select(family, sample)
        counts[family.specs[sel.chosen_index].m[0]] += 1
    picked = ", ".join(f"m={m} x{c}" for m, c in sorted(counts.items()))
    print(f"{kind.value:>18} (orders 1..{m_max}): {picked}")
