"""Batch entry points: simulate, select, estimate, verify, report.

Every command reads a JSON config, writes files with fixed names into
``--out``, and is byte-deterministic given its config (seeds included).

Exit codes: 0 success, 2 config error, 3 data error, 4 dimension error,
5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bases import BasisFamily, BasisKind
from .diagnostics import (
    check_kernel_moment_conditions,
    check_l1_section_bound,
    check_legendre_boundedness,
    check_sine_tail_bound,
    check_trig_spectral_boundedness,
)
from .errors import ConfigError, DataError, DimensionError, VerificationFailure
from .estimator import LossKind, estimate_on_grid, read_sample_csv, write_sample_csv
from .experiments import oracle_experiment
from .kernels import (
    EPANECHNIKOV,
    GAUSSIAN,
    KernelFamily,
    make_bandwidth_family,
    make_projection_family,
    spec_from_config,
    spec_id,
)
from .selection import SCHEMA_VERSION, pco_select
from .simulation import Density, DensityKind, Scenario, scenario_from_config

_BASES = {"gaussian": GAUSSIAN, "epanechnikov": EPANECHNIKOV}


def _load_json(path: str, role: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{role} file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{role} is not valid JSON ({path}, line {exc.lineno}): {exc.msg}") from exc


def _dump_json(obj: dict, path: Path) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _loss_from_flag(flag: str) -> LossKind:
    try:
        return LossKind(flag)
    except ValueError as exc:
        raise ConfigError(f"unknown loss {flag!r}; expected one|identity|square") from exc


def _family_from_config(cfg: dict, n: int) -> KernelFamily:
    if not isinstance(cfg, dict):
        raise ConfigError("family config must be an object")
    variant = cfg.get("variant")
    if variant == "bandwidth":
        base_name = cfg.get("base", "gaussian")
        if base_name not in _BASES:
            raise ConfigError(f"family config: unknown base kernel {base_name!r}")
        for field in ("h_min", "grid", "d"):
            if field not in cfg:
                raise ConfigError(f"family config: missing field {field!r}")
        return make_bandwidth_family(
            _BASES[base_name], float(cfg["h_min"]), [float(h) for h in cfg["grid"]], int(cfg["d"]), n
        )
    if variant == "projection":
        for field in ("basis", "m_max", "d"):
            if field not in cfg:
                raise ConfigError(f"family config: missing field {field!r}")
        try:
            kind = BasisKind(cfg["basis"])
        except ValueError as exc:
            raise ConfigError(f"family config: unknown basis {cfg['basis']!r}") from exc
        basis = BasisFamily(kind, m_cap=int(cfg.get("m_cap", 64)))
        w = cfg.get("w")
        weights = None if w is None else np.asarray(w, dtype=np.float64)
        return make_projection_family(basis, int(cfg["m_max"]), int(cfg["d"]), n, weights)
    raise ConfigError(f"family config: unknown variant {variant!r}")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = _load_json(args.config, "config")
    scn = scenario_from_config(cfg)
    if args.seed is not None:
        scn = scenario_from_config({**scn.to_config(), "seed": args.seed})
    replication = int(cfg.get("replication", 0))
    if replication < 0:
        raise ConfigError("scenario config: field 'replication' must be nonnegative")
    sample = scn.generate(replication)
    out = _out_dir(args)
    write_sample_csv(out / "data.csv", sample.x, sample.y)
    echo = {"schema_version": SCHEMA_VERSION, "scenario": scn.to_config(), "replication": replication}
    _dump_json(echo, out / "scenario.json")
    print(f"wrote {sample.n} rows (d={sample.d}) to {out / 'data.csv'}")
    return 0


def cmd_select(args) -> int:
    cfg = _load_json(args.config, "config")
    loss = _loss_from_flag(args.loss)
    sample = read_sample_csv(args.data, loss)
    family = _family_from_config(cfg.get("family", cfg), sample.n)
    report = pco_select(family, sample)
    out = _out_dir(args)
    (out / "selection.json").write_text(report.to_json(), encoding="utf-8")
    (out / "selection.csv").write_text(report.to_csv(), encoding="utf-8")
    chosen = report.rows[report.chosen_index]
    print(f"selected kernel {chosen.index}: {spec_id(chosen.spec)}")
    return 0


def cmd_estimate(args) -> int:
    cfg = _load_json(args.config, "config")
    spec_cfg = _load_json(args.spec, "spec")
    if "spec" in spec_cfg:
        spec_cfg = spec_cfg["spec"]
    spec = spec_from_config(spec_cfg)
    loss = _loss_from_flag(args.loss)
    sample = read_sample_csv(args.data, loss)
    grid_cfg = cfg.get("grid", cfg)
    for field in ("lo", "hi", "points"):
        if field not in grid_cfg:
            raise ConfigError(f"grid config: missing field {field!r}")
    lo = np.atleast_1d(np.asarray(grid_cfg["lo"], dtype=np.float64))
    hi = np.atleast_1d(np.asarray(grid_cfg["hi"], dtype=np.float64))
    if lo.size != sample.d or hi.size != sample.d:
        raise DimensionError(
            f"grid bounds have dimension {lo.size}, data has dimension {sample.d}"
        )
    counts = grid_cfg["points"]
    counts = [int(counts)] * sample.d if np.isscalar(counts) else [int(c) for c in counts]
    if len(counts) != sample.d or any(c < 1 for c in counts):
        raise ConfigError("grid config: 'points' must give a positive count per dimension")
    axes = [np.linspace(lo[q], hi[q], counts[q]) for q in range(sample.d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.column_stack([m.ravel() for m in mesh])
    values = estimate_on_grid(spec, sample, points)
    out = _out_dir(args)
    lines = [",".join([f"x{q + 1}" for q in range(sample.d)] + ["estimate"])]
    for row, val in zip(points, values):
        lines.append(",".join([repr(float(v)) for v in row] + [repr(float(val))]))
    (out / "estimate.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(values)} estimates to {out / 'estimate.csv'}")
    return 0


_SUITES = ("sine-tail", "moment-conditions", "l1-bound", "trig-bound", "legendre-bound")


def cmd_verify(args) -> int:
    cfg = _load_json(args.config, "config") if args.config else {}
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    suite = args.suite
    if suite == "sine-tail":
        report = check_sine_tail_bound(
            p_max=int(cfg.get("p_max", 200)), grid_points=int(cfg.get("grid_points", 10_000))
        )
    elif suite == "moment-conditions":
        scn = scenario_from_config(_require(cfg, "scenario", suite))
        family = _family_from_config(_require(cfg, "family", suite), scn.n)
        loss = _loss_from_flag(cfg.get("loss", "one"))
        report = check_kernel_moment_conditions(
            family, scn, loss, draws=int(cfg.get("draws", 100_000)), seed=seed
        )
    elif suite == "l1-bound":
        n = int(_require(cfg, "n", suite))
        family = _family_from_config(_require(cfg, "family", suite), n)
        report = check_l1_section_bound(family, points=int(cfg.get("points", 1000)), seed=seed)
    elif suite == "trig-bound":
        scn = scenario_from_config(_require(cfg, "scenario", suite))
        loss = _loss_from_flag(cfg.get("loss", "one"))
        m_values = tuple(int(m) for m in cfg.get("m_values", (4, 8, 16, 32)))
        report = check_trig_spectral_boundedness(
            scn, loss, m_values=m_values, draws=int(cfg.get("draws", 10_000)), seed=seed
        )
    elif suite == "legendre-bound":
        if "scenario" in cfg:
            source = scenario_from_config(cfg["scenario"])
        else:
            den_cfg = _require(cfg, "density", suite)
            try:
                kind = DensityKind(den_cfg.get("kind"))
            except ValueError as exc:
                raise ConfigError(f"unknown density kind {den_cfg.get('kind')!r}") from exc
            source = Density(kind, float(den_cfg.get("lo", -1.0)), float(den_cfg.get("hi", 1.0)))
        report = check_legendre_boundedness(source, m_max=int(cfg.get("m_max", 50)))
    else:  # pragma: no cover - argparse already restricts choices
        raise ConfigError(f"unknown suite {suite!r}")
    out = _out_dir(args)
    _dump_json(report.to_json_dict(), out / f"verify_{suite}.json")
    status = "passed" if report.passed else ("not applicable" if not report.applicable else "FAILED")
    print(f"{report.name}: {status} (margin {report.margin:.6g})")
    if report.applicable and not report.passed:
        raise VerificationFailure(f"suite {suite} failed with margin {report.margin:.6g}")
    return 0


def _require(cfg: dict, field: str, suite: str):
    if field not in cfg:
        raise ConfigError(f"verify config for suite {suite!r}: missing field {field!r}")
    return cfg[field]


def cmd_report(args) -> int:
    cfg = _load_json(args.config, "config")
    loss = _loss_from_flag(cfg.get("loss", args.loss or "one"))
    scn_cfg = _require(cfg, "scenario", "report")
    threads = args.threads
    out = _out_dir(args)
    n_values = cfg.get("n_values")
    if n_values:
        rows = []
        for n in [int(v) for v in n_values]:
            scn = scenario_from_config({**scn_cfg, "n": n, "seed": int(scn_cfg.get("seed", 0)) + n})
            family = _family_from_config(_require(cfg, "family", "report"), n)
            rep = oracle_experiment(family, scn, loss, threads=threads)
            rows.append(
                {
                    "n": n,
                    "oracle_risk": rep.oracle_risk,
                    "pco_risk": rep.pco_risk,
                    "pco_se": rep.pco_se,
                    "ratio": rep.ratio,
                }
            )
        _dump_json({"schema_version": SCHEMA_VERSION, "loss": loss.value, "by_n": rows}, out / "risk.json")
        lines = ["n,oracle_risk,pco_risk,pco_se,ratio"]
        for r in rows:
            lines.append(
                ",".join(
                    [str(r["n"])]
                    + [repr(float(r[k])) for k in ("oracle_risk", "pco_risk", "pco_se", "ratio")]
                )
            )
        (out / "risk_vs_n.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote risk-vs-n report for {len(rows)} sample sizes to {out}")
        return 0
    scn = scenario_from_config(scn_cfg)
    family = _family_from_config(_require(cfg, "family", "report"), scn.n)
    rep = oracle_experiment(family, scn, loss, threads=threads)
    _dump_json(rep.to_json_dict(), out / "risk.json")
    (out / "risk_by_kernel.csv").write_text(rep.to_csv(), encoding="utf-8")
    print(
        f"oracle risk {rep.oracle_risk:.6g}, selected-kernel risk {rep.pco_risk:.6g}, "
        f"ratio {rep.ratio:.3f}"
    )
    return 0


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcoselect",
        description="Kernel estimation with data-driven kernel selection by comparison to overfitting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a dataset from a scenario config")
    p.add_argument("--config", required=True, help="scenario config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("select", help="run kernel selection on a dataset")
    p.add_argument("--config", required=True, help="family config JSON")
    p.add_argument("--data", required=True, help="dataset CSV (header x1..xd,y)")
    p.add_argument("--loss", default="one", choices=[k.value for k in LossKind])
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("estimate", help="evaluate one kernel estimator on a grid")
    p.add_argument("--config", required=True, help="grid config JSON")
    p.add_argument("--data", required=True, help="dataset CSV (header x1..xd,y)")
    p.add_argument("--spec", required=True, help="kernel spec JSON")
    p.add_argument("--loss", default="one", choices=[k.value for k in LossKind])
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", required=True, choices=_SUITES)
    p.add_argument("--config", default=None, help="suite config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="Monte Carlo risk and selection report")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--loss", default=None, choices=[k.value for k in LossKind])
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except DimensionError as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return 4
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
