"""Batch front-end: classical, quantum, comparison, and benchmark modes.

Subcommands
-----------
classical     classical LOF report (JSON + CSV) for a CSV dataset
quantum       quantum pipeline report for a CSV dataset
compare       run both pipelines and write the comparison manifest
scale         ledger-backend query-count sweep over synthetic datasets
calibrate-ae  amplitude-estimation confidence sweep

Exit codes: 0 ok, 1 contract violation (flag sets differ outside the error
margin), 2 configuration error, 3 I/O or parse error, 4 degenerate data,
5 simulator capacity exceeded, 6 near-threshold mismatch (tolerated).

Every run is deterministic under (--seed, config): repeated invocations emit
byte-identical artifacts.  Output files are written atomically
(write-temp-then-rename).  LOG_LEVEL in the environment controls verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .dataset import ConfigError, DataParseError, DegenerateDataError, RunConfig, load_csv
from .lof import LofReport, flag as classical_flag
from .ledger import QueryLedger
from .pipeline import QuantumLofPipeline
from .primitives import amplitude_estimate
from .qsim import CapacityError
from .synthetic import gaussian_clusters

EXIT_OK = 0
EXIT_CONTRACT = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DEGENERATE = 4
EXIT_CAPACITY = 5
EXIT_NEAR_THRESHOLD = 6

log = logging.getLogger("qlof")

SCALE_STEPS = ("step1.o_x", "step1.raw_queries", "step2.ops", "step3.pred")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_json(path: Path, obj) -> None:
    _write_text(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _add_config_flags(sp: argparse.ArgumentParser, scale_defaults: bool = False) -> None:
    sp.add_argument("--k", type=int, default=3, help="neighborhood parameter")
    sp.add_argument("--delta", type=float, default=1.5, help="anomaly threshold")
    sp.add_argument(
        "--backend",
        choices=["exact", "ledger"],
        default="ledger" if scale_defaults else "exact",
    )
    sp.add_argument("--ae-qubits-dist", type=int, default=9 if scale_defaults else 10)
    sp.add_argument("--ae-qubits-count", type=int, default=5 if scale_defaults else 8)
    sp.add_argument("--ae-qubits-lof", type=int, default=6 if scale_defaults else 10)
    sp.add_argument("--ae-repeats", type=int, default=3 if scale_defaults else 5)
    sp.add_argument("--fp-width", type=int, default=20 if scale_defaults else 16)
    sp.add_argument("--fp-frac", type=int, default=12)
    sp.add_argument("--shots", type=int, default=64)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--min-boost", type=int, default=1 if scale_defaults else 5)
    sp.add_argument("--ratio-safety", type=float, default=2.0)
    sp.add_argument("--budget-multiplier", type=float, default=22.5)
    sp.add_argument("--out", type=Path, default=Path("."), help="output directory")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        k=args.k,
        delta=args.delta,
        fp_width=args.fp_width,
        fp_frac=args.fp_frac,
        ae_qubits_dist=args.ae_qubits_dist,
        ae_qubits_count=args.ae_qubits_count,
        ae_qubits_lof=args.ae_qubits_lof,
        ae_repeats=args.ae_repeats,
        shots=args.shots,
        seed=args.seed,
        backend=args.backend,
        min_boost=args.min_boost,
        ratio_safety=args.ratio_safety,
        budget_multiplier=args.budget_multiplier,
    )


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qlof",
        description="Quantum LOF anomaly detection on simulable backends.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("classical", help="classical LOF report")
    sp.add_argument("input", type=Path, help="headerless CSV, one point per row")
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--delta", type=float, default=1.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", type=Path, default=Path("."))

    sp = sub.add_parser("quantum", help="quantum pipeline report")
    sp.add_argument("input", type=Path)
    _add_config_flags(sp)

    sp = sub.add_parser("compare", help="classical vs quantum manifest")
    sp.add_argument("input", type=Path)
    _add_config_flags(sp)

    sp = sub.add_parser("scale", help="query-count scaling sweep (ledger backend)")
    sp.add_argument("--grid", default="8,16,32,64", help="comma-separated m values")
    sp.add_argument("--trials", type=int, default=3, help="seeds per grid point")
    sp.add_argument("--n-dims", type=int, default=2)
    sp.add_argument("--contamination", type=float, default=0.01)
    _add_config_flags(sp, scale_defaults=True)

    sp = sub.add_parser("calibrate-ae", help="amplitude-estimation confidence sweep")
    sp.add_argument("--t-list", default="4,6,8", help="comma-separated precision qubits")
    sp.add_argument("--amplitudes", type=int, default=200, help="random amplitudes per t")
    sp.add_argument("--trials", type=int, default=32, help="estimates per amplitude")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", type=Path, default=Path("."))
    return p


def _report_csv(report: LofReport) -> str:
    lines = ["index,kdist,count,lrd,lof,flagged"]
    for row in report.point_dicts():
        lines.append(
            f"{row['index']},{row['kdist']!r},{row['count']},"
            f"{row['lrd']!r},{row['lof']!r},{int(row['flagged'])}"
        )
    return "\n".join(lines) + "\n"


def cmd_classical(args: argparse.Namespace) -> int:
    if args.k < 1:
        raise ConfigError(f"k={args.k} must be >= 1")
    if args.delta <= 0:
        raise ConfigError("delta must be positive")
    ds = load_csv(str(args.input))
    if args.k > ds.m - 1:
        raise ConfigError(f"k={args.k} outside [1, m-1={ds.m - 1}]")
    report = classical_flag(ds, args.k, args.delta)
    payload = {
        "schema": 1,
        "mode": "classical",
        "dataset": ds.summary(),
        **report.to_dict(),
    }
    _write_json(args.out / "report.json", payload)
    _write_text(args.out / "report.csv", _report_csv(report))
    log.info("classical: %d of %d points flagged", report.n_flagged, ds.m)
    return EXIT_OK


def cmd_quantum(args: argparse.Namespace) -> int:
    ds = load_csv(str(args.input))
    config = _config_from_args(args)
    manifest = QuantumLofPipeline(ds, config).run()
    payload = {
        "schema": 1,
        "mode": "quantum",
        "config": manifest["config"],
        "dataset": manifest["dataset"],
        "error_budget": manifest["error_budget"],
        "points": [
            {
                "index": pt["index"],
                "lof": pt["lof_quantum"],
                "flagged": pt["flagged_quantum"],
            }
            for pt in manifest["points"]
        ],
        "flagged": manifest["flagged_quantum"],
        "warnings": manifest["warnings"],
        "ledger": manifest["ledger"],
    }
    _write_json(args.out / "quantum.json", payload)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    ds = load_csv(str(args.input))
    config = _config_from_args(args)
    manifest = QuantumLofPipeline(ds, config).run()
    _write_json(args.out / "manifest.json", manifest)
    if manifest["flags_match"]:
        return EXIT_OK
    if not manifest["delta_margin_ok"]:
        log.warning("flag sets differ inside the error margin (tolerated)")
        return EXIT_NEAR_THRESHOLD
    log.error("flag sets differ although delta clears the error margin")
    return EXIT_CONTRACT


def _fit_exponent(ms: list[int], qs: list[float]) -> float | None:
    if len(set(ms)) < 2 or any(q <= 0 for q in qs):
        return None
    slope = np.polyfit(np.log(np.asarray(ms, float)), np.log(np.asarray(qs, float)), 1)[0]
    return float(slope)


def cmd_scale(args: argparse.Namespace) -> int:
    try:
        grid = [int(x) for x in args.grid.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad --grid {args.grid!r}") from None
    if not grid or any(m < 4 for m in grid):
        raise ConfigError("grid must contain m values >= 4")
    if args.backend != "ledger":
        raise ConfigError("scale requires the ledger backend")
    if args.trials < 1:
        raise ConfigError("trials must be >= 1")

    medians: dict[str, list[float]] = {s: [] for s in SCALE_STEPS}
    rows = []
    for m in grid:
        per_step: dict[str, list[int]] = {s: [] for s in SCALE_STEPS}
        for trial in range(args.trials):
            rng = np.random.default_rng(
                np.random.SeedSequence([args.seed & 0xFFFFFFFFFFFFFFFF, m, trial])
            )
            ds = gaussian_clusters(m, args.n_dims, rng, contamination=args.contamination)
            config = _config_from_args(args)
            config = RunConfig(**{**config.as_dict(), "seed": args.seed + 7919 * m + trial})
            ledger = QueryLedger()
            QuantumLofPipeline(ds, config, ledger=ledger).run()
            counts = {
                "step1.o_x": ledger.get("step1.o_x"),
                "step1.raw_queries": (
                    ledger.get("step1.value_query")
                    + ledger.get("step1.pred_query")
                    + ledger.get("step1.count_pred")
                ),
                "step2.ops": ledger.total("step2."),
                "step3.pred": ledger.get("step3.pred"),
            }
            for s in SCALE_STEPS:
                per_step[s].append(counts[s])
        for s in SCALE_STEPS:
            med = float(np.median(per_step[s]))
            medians[s].append(med)
            rows.append((m, s, med))

    csv_lines = ["m,step,median_queries"]
    for m, s, med in rows:
        csv_lines.append(f"{m},{s},{med!r}")
    _write_text(args.out / "scale.csv", "\n".join(csv_lines) + "\n")
    exponents = {s: _fit_exponent(grid, medians[s]) for s in SCALE_STEPS}
    _write_json(
        args.out / "scale.json",
        {
            "schema": 1,
            "mode": "scale",
            "grid": grid,
            "trials": args.trials,
            "exponents": exponents,
        },
    )
    for s, e in exponents.items():
        log.info("scale: %s exponent %s", s, "refused (need >= 2 m values)" if e is None else f"{e:.3f}")
    return EXIT_OK


def cmd_calibrate_ae(args: argparse.Namespace) -> int:
    try:
        t_list = [int(x) for x in args.t_list.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad --t-list {args.t_list!r}") from None
    if not t_list or any(t < 1 for t in t_list):
        raise ConfigError("t values must be >= 1")
    if args.amplitudes < 1 or args.trials < 1:
        raise ConfigError("amplitudes and trials must be >= 1")
    lines = ["a_true,t,fraction_within_bound"]
    for t in t_list:
        bound = math.pi / (1 << t)
        rng = np.random.default_rng(
            np.random.SeedSequence([args.seed & 0xFFFFFFFFFFFFFFFF, t])
        )
        amps = [0.0, 1.0] + [float(a) for a in rng.random(args.amplitudes)]
        for a in amps:
            theta = math.asin(math.sqrt(a))
            hits = 0
            for _ in range(args.trials):
                est = amplitude_estimate(a, t, rng, repeats=1)
                hits += abs(est.theta_hat - theta) <= bound + 1e-15
            lines.append(f"{a!r},{t},{hits / args.trials!r}")
    _write_text(args.out / "calibrate.csv", "\n".join(lines) + "\n")
    return EXIT_OK


_COMMANDS = {
    "classical": cmd_classical,
    "quantum": cmd_quantum,
    "compare": cmd_compare,
    "scale": cmd_scale,
    "calibrate-ae": cmd_calibrate_ae,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("LOG_LEVEL", "WARNING").upper())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors, 0 for --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateDataError as exc:
        print(f"degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DataParseError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CapacityError as exc:
        print(
            f"capacity exceeded: {exc}\nhint: retry with --backend ledger",
            file=sys.stderr,
        )
        return EXIT_CAPACITY


def console_main() -> None:  # console-script entry point
    sys.exit(main())


if __name__ == "__main__":
    console_main()
