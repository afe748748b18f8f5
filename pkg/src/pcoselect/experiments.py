"""Monte Carlo experiments: risk curves, oracle comparisons, concentration.

All experiments share the same discipline: replication r of a scenario is
regenerated from its own counter-based stream, per-replication work is a
pure function of r, and aggregation happens in replication order with a
fixed pairwise reduction.  Thread pools only distribute whole
replications, so ``threads=8`` and ``threads=1`` produce byte-identical
reports.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .estimator import GramTables, LossKind, Sample, estimate_on_grid, sbar_empirical
from .kernels import BandwidthSpec, KernelFamily, spec_id, spec_to_config
from .numerics import pairwise_sum, parallel_map
from .quadrature import IntegrationGrid, composite_grid
from .selection import pco_select
from .simulation import Scenario, make_s_mean, sbar_analytic

SCHEMA_VERSION = 1


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=np.float64)
    r = values.size
    mean = pairwise_sum(values) / r
    if r < 2:
        return mean, 0.0
    var = pairwise_sum((values - mean) ** 2) / (r - 1)
    return mean, math.sqrt(var / r)


@dataclass(frozen=True)
class MCRisk:
    """Monte Carlo L2 risk of one kernel under one scenario and loss."""

    mean: float
    se: float
    per_replication: np.ndarray


def mc_risk(spec, scn: Scenario, loss: LossKind, grid: IntegrationGrid | None = None, threads: int = 1) -> MCRisk:
    """MC estimate of E ||shat_K - s||_2^2 over the scenario support."""
    if grid is None:
        grid = scn.risk_grid()
    target = scn.true_s(loss, grid.points)

    def one(rep: int) -> float:
        sample = scn.generate(rep, loss)
        shat = estimate_on_grid(spec, sample, grid.points)
        return grid.integrate((shat - target) ** 2)

    risks = np.asarray(parallel_map(one, range(scn.replications), threads))
    mean, se = _mean_se(risks)
    return MCRisk(mean, se, risks)


@dataclass(frozen=True)
class RiskReport:
    """Risk landscape of a family: every member, the oracle, and PCO.

    ``ratio`` compares the PCO risk with the oracle (best in-family) risk.
    ``bound_remainder`` is the coarse log(n)^5 / n slack term and
    ``bound_ok`` records whether the PCO risk stays below
    2 * oracle + 5 * remainder, the sanity form of the selection
    guarantee at desk scale.
    """

    family_ids: tuple
    loss: LossKind
    n: int
    replications: int
    risks: np.ndarray
    risk_ses: np.ndarray
    oracle_index: int
    oracle_risk: float
    pco_risk: float
    pco_se: float
    ratio: float
    k0_index: int
    k0_selected_fraction: float
    chosen_indices: np.ndarray
    bound_remainder: float
    bound_ok: bool

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "loss": self.loss.value,
            "n": self.n,
            "replications": self.replications,
            "kernels": [
                {"index": i, "id": kid, "risk": float(r), "se": float(s)}
                for i, (kid, r, s) in enumerate(zip(self.family_ids, self.risks, self.risk_ses))
            ],
            "oracle_index": self.oracle_index,
            "oracle_risk": self.oracle_risk,
            "pco_risk": self.pco_risk,
            "pco_se": self.pco_se,
            "ratio": self.ratio,
            "k0_index": self.k0_index,
            "k0_selected_fraction": self.k0_selected_fraction,
            "selection_counts": {
                str(i): int(np.sum(self.chosen_indices == i)) for i in range(len(self.family_ids))
            },
            "bound_remainder": self.bound_remainder,
            "bound_ok": self.bound_ok,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "id", "risk", "se", "is_oracle", "is_k0", "times_selected"])
        for i, kid in enumerate(self.family_ids):
            writer.writerow(
                [
                    i,
                    kid,
                    repr(float(self.risks[i])),
                    repr(float(self.risk_ses[i])),
                    int(i == self.oracle_index),
                    int(i == self.k0_index),
                    int(np.sum(self.chosen_indices == i)),
                ]
            )
        return buf.getvalue()


def oracle_experiment(family: KernelFamily, scn: Scenario, loss: LossKind, threads: int = 1) -> RiskReport:
    """Risk of every family member plus the PCO-selected kernel, jointly.

    Each replication reuses one sample for all members: the per-member
    risks, the selection run, and the risk of the selected member are all
    computed on the same data, so the PCO column is directly comparable
    with the in-family oracle column.
    """
    grid = scn.risk_grid()
    target = scn.true_s(loss, grid.points)
    n_k = len(family)

    def one(rep: int):
        sample = scn.generate(rep, loss)
        tables = GramTables(sample)
        report = pco_select(family, sample, tables)
        risks = np.empty(n_k)
        for i, spec in enumerate(family.specs):
            shat = estimate_on_grid(spec, sample, grid.points)
            risks[i] = grid.integrate((shat - target) ** 2)
        return risks, report.chosen_index

    results = parallel_map(one, range(scn.replications), threads)
    risk_rows = np.stack([r for r, _ in results])
    chosen = np.asarray([c for _, c in results], dtype=np.int64)
    means = np.empty(n_k)
    ses = np.empty(n_k)
    for i in range(n_k):
        means[i], ses[i] = _mean_se(risk_rows[:, i])
    pco_per_rep = risk_rows[np.arange(len(chosen)), chosen]
    pco_mean, pco_se = _mean_se(pco_per_rep)
    oracle_index = int(np.argmin(means))
    oracle_risk = float(means[oracle_index])
    remainder = math.log(scn.n) ** 5 / scn.n
    return RiskReport(
        family_ids=tuple(spec_id(s) for s in family.specs),
        loss=loss,
        n=scn.n,
        replications=scn.replications,
        risks=means,
        risk_ses=ses,
        oracle_index=oracle_index,
        oracle_risk=oracle_risk,
        pco_risk=pco_mean,
        pco_se=pco_se,
        ratio=pco_mean / oracle_risk if oracle_risk > 0 else math.inf,
        k0_index=family.k0_index,
        k0_selected_fraction=float(np.mean(chosen == family.k0_index)),
        chosen_indices=chosen,
        bound_remainder=remainder,
        bound_ok=pco_mean <= 2.0 * oracle_risk + 5.0 * remainder,
    )


# ---------------------------------------------------------------------------
# concentration of the centered second-order statistics
# ---------------------------------------------------------------------------


def _section_pad(spec) -> float:
    """How far kernel sections reach beyond an anchor inside the support."""
    if isinstance(spec, BandwidthSpec):
        return spec.base.tail_halfwidth * max(spec.h)
    return 0.0


def statistic_grid(a, b, scn: Scenario, refine: int = 4, breakpoints_per_dim=None) -> IntegrationGrid:
    """Integration grid covering the full reach of both kernels' sections.

    Bandwidth sections anchored inside the support extend past it by the
    base kernel's tail half-width times the bandwidth; inner products of
    sections and section averages must be integrated over that enlarged
    box or the pair statistic picks up a positive boundary bias.
    Projection sections vanish off the basis support, so no padding.
    Support edges and any supplied breakpoints become panel boundaries.
    """
    pad = max(_section_pad(a), _section_pad(b))
    lo, hi = scn.support
    cuts = set(np.linspace(lo, hi, refine + 1))
    per_dim = []
    for q in range(scn.d):
        extra = [] if breakpoints_per_dim is None else list(breakpoints_per_dim[q])
        per_dim.append(sorted(cuts | set(extra)))
    return composite_grid([lo - pad] * scn.d, [hi + pad] * scn.d, per_dim)


@dataclass(frozen=True)
class StatisticSummary:
    name: str
    mean: float
    se: float
    target: float

    @property
    def z(self) -> float:
        return (self.mean - self.target) / self.se if self.se > 0 else 0.0

    @property
    def within_3se(self) -> bool:
        return abs(self.mean - self.target) <= 3.0 * self.se


@dataclass(frozen=True)
class ConcentrationReport:
    """MC means of the centered pair/variance/bias statistics vs targets.

    The pair statistic U and the cross term W are exactly centered, so
    their targets are zero; the variance statistic V targets
    sbar - ||s_K||_2^2, both terms evaluated by quadrature.
    """

    loss: LossKind
    n: int
    replications: int
    u: StatisticSummary
    v: StatisticSummary
    w: StatisticSummary

    def to_json_dict(self) -> dict:
        def enc(s: StatisticSummary) -> dict:
            return {
                "name": s.name,
                "mean": s.mean,
                "se": s.se,
                "target": s.target,
                "z": s.z,
                "within_3se": s.within_3se,
            }

        return {
            "schema_version": SCHEMA_VERSION,
            "loss": self.loss.value,
            "n": self.n,
            "replications": self.replications,
            "statistics": [enc(self.u), enc(self.v), enc(self.w)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def concentration_experiment(
    a,
    b,
    scn: Scenario,
    loss: LossKind,
    threads: int = 1,
    grid: IntegrationGrid | None = None,
) -> ConcentrationReport:
    """Replicate the centered statistics for a kernel pair (a, b).

    Per replication this draws a fresh sample and evaluates the centered
    pair statistic U(a, b), the variance statistic V(a), and the centered
    cross term W(a, b); the section averages and the target are fixed
    functions of the scenario, computed once on the quadrature grid.
    The default grid pads the support by the kernels' section reach (see
    :func:`statistic_grid`); pass a grid with kernel-aware breakpoints
    for piecewise kernels so the cross terms stay quadrature-exact.
    """
    if grid is None:
        grid = statistic_grid(a, b, scn)
    s_mean_a = make_s_mean(a, scn, loss, grid)
    s_mean_b = make_s_mean(b, scn, loss, grid)
    sa_grid = s_mean_a(grid.points)
    sb_grid = s_mean_b(grid.points)
    s_grid = scn.true_s(loss, grid.points)
    gw = grid.weights
    n = scn.n

    def one(rep: int):
        sample = scn.generate(rep, loss)
        ell = sample.loss_values
        from .kernels import kernel_matrix, section_inner_matrix

        ka_grid = kernel_matrix(a, sample.x, grid.points)  # (n, P)
        kb_grid = kernel_matrix(b, sample.x, grid.points)
        gram = section_inner_matrix(a, sample.x, b, sample.x)
        weighted = (ell[:, None] * gram) * ell[None, :]
        off = pairwise_sum(weighted) - pairwise_sum(np.diagonal(weighted).copy())
        cross_a = ka_grid @ (gw * sb_grid)  # <K_a(X_i,.), s_b>
        cross_b = kb_grid @ (gw * sa_grid)
        u_val = (
            off
            - (n - 1) * pairwise_sum(ell * cross_a)
            - (n - 1) * pairwise_sum(ell * cross_b)
            + n * (n - 1) * pairwise_sum(gw * sa_grid * sb_grid)
        )
        cross_aa = ka_grid @ (gw * sa_grid)
        v_val = (
            sbar_empirical(a, sample)
            - 2.0 * pairwise_sum(ell * cross_aa) / n
            + pairwise_sum(gw * sa_grid * sa_grid)
        )
        shat_a = ell @ ka_grid / n
        w_val = pairwise_sum(gw * (shat_a - sa_grid) * (sb_grid - s_grid))
        return u_val, v_val, w_val

    results = parallel_map(one, range(scn.replications), threads)
    u_vals = np.asarray([r[0] for r in results])
    v_vals = np.asarray([r[1] for r in results])
    w_vals = np.asarray([r[2] for r in results])
    sbar_target = sbar_analytic(a, scn, loss)
    v_target = sbar_target - pairwise_sum(gw * sa_grid * sa_grid)
    u_mean, u_se = _mean_se(u_vals)
    v_mean, v_se = _mean_se(v_vals)
    w_mean, w_se = _mean_se(w_vals)
    return ConcentrationReport(
        loss=loss,
        n=scn.n,
        replications=scn.replications,
        u=StatisticSummary("pair", u_mean, u_se, 0.0),
        v=StatisticSummary("variance", v_mean, v_se, v_target),
        w=StatisticSummary("cross", w_mean, w_se, 0.0),
    )
