"""Command-line front end: ``beamopt <command> [options]``.

Every command writes a results table (CSV, JSON or both). When ``--out`` is
given a ``<out>.manifest.json`` sidecar records how the table was produced.
Exit status: 0 on success, 2 on a configuration error, 3 when ``--strict``
is set and the result is infeasible.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .analysis import analytic_theta_bar, mc_theta_bar, recommend_config, sweep_feasibility
from .antenna import MAX_ANTENNAS, DomainError
from .scenario import (
    BURST_PERIOD_CHOICES_S,
    SSB_PER_BURST_CHOICES,
    ConfigError,
    ScenarioConfig,
    load_config,
)
from .solver import DEFAULT_EPS_FEAS, default_threads, solve

log = logging.getLogger("beamopt")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_digest: str
    master_seed: int
    tool_version: str
    wall_time_s: float
    worker_count: int


# -- argument parsing helpers ----------------------------------------------


def _int_list(text: str) -> list[int]:
    """``"1,2,5"`` or ranges such as ``"1..64"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _float_list(text: str) -> list[float]:
    try:
        out = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _assignment(text: str) -> tuple[str, list]:
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected KEY=V1,V2,...")
    key, values = text.split("=", 1)
    parsed = []
    for raw in values.split(","):
        try:
            parsed.append(json.loads(raw))
        except json.JSONDecodeError:
            parsed.append(raw.strip())
    return key.strip(), parsed


def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("common options")
    g.add_argument("--config", type=Path, help="JSON scenario file (missing keys take defaults)")
    g.add_argument("--seed", type=_seed, help="master seed (unsigned 64-bit)")
    g.add_argument("--iterations", type=int, help="Monte Carlo iterations")
    g.add_argument("--threads", type=int, help="worker threads (default: $BEAMOPT_THREADS or CPU count)")
    g.add_argument("--out", type=Path, help="output path; stdout when omitted")
    g.add_argument("--format", choices=("csv", "json", "both"), default="csv")
    g.add_argument("--strict", action="store_true", help="exit 3 when the result is infeasible")
    g.add_argument("--eps-feas", type=float, default=DEFAULT_EPS_FEAS,
                   help="tolerated share of iterations with no valid antenna count")
    g.add_argument("-q", "--quiet", action="store_true", help="suppress progress messages")


def _scenario_overrides(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("scenario overrides")
    g.add_argument("--v", dest="ue_speed_mps", type=float)
    g.add_argument("--t-ss", dest="t_ss_s", type=float, help="burst period in seconds")
    g.add_argument("--n-ss", dest="n_ss", type=int)
    g.add_argument("--k", dest="num_ues", type=int)
    g.add_argument("--p-md", dest="misdetection_prob", type=float)
    g.add_argument("--p-t-dbm", dest="max_tx_power_dbm", type=float)
    g.add_argument("--tau-db", dest="snr_threshold_db", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beamopt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="minimal antenna count and power for one configuration")
    _common(p)
    _scenario_overrides(p)

    p = sub.add_parser("sweep", help="solve over the Cartesian product of config values")
    _common(p)
    p.add_argument("--set", dest="assignments", type=_assignment, action="append", required=True,
                   metavar="KEY=V1,V2", help="config key and values; repeatable")

    p = sub.add_parser("offset", help="analytic and Monte Carlo average angular offset")
    _common(p)
    p.add_argument("--n-gnb", type=_int_list, default=list(range(1, MAX_ANTENNAS + 1)))
    p.add_argument("--v", type=_float_list, default=[2.0, 4.0])
    p.add_argument("--t-ss", type=_float_list, default=[20e-3, 40e-3, 80e-3])
    p.add_argument("--n-ss", type=_int_list, default=[8])
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--include-seam", action="store_true", help="also sample the beams at the 2*pi seam")

    p = sub.add_parser("feasibility", help="feasibility-region sweep and upper-bound table")
    _common(p)
    p.add_argument("--k", type=_int_list, default=[50])
    p.add_argument("--v", type=_float_list, default=[float(v) for v in range(1, 31)])
    p.add_argument("--t-ss", type=_float_list, default=list(BURST_PERIOD_CHOICES_S))
    p.add_argument("--n-ss", type=_int_list, default=list(SSB_PER_BURST_CHOICES))
    p.add_argument("--p-md", type=_float_list, default=[0.0])
    p.add_argument("--strategy", choices=("exhaustive", "frontier"), default="exhaustive")
    p.add_argument("--d-min", type=float, help="d_min in metres for the analytic bound overlay")
    p.add_argument("--cells", action="store_true", help="emit one row per grid cell instead of the table")

    p = sub.add_parser("recommend", help="fewest SSBs per burst, then longest burst period")
    _common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p-md", type=float, default=0.0)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--t-ss", type=_float_list, default=list(BURST_PERIOD_CHOICES_S))
    p.add_argument("--n-ss", type=_int_list, default=list(SSB_PER_BURST_CHOICES))

    p = sub.add_parser("print-default-config", help="print the default scenario as JSON")
    p.add_argument("--out", type=Path)
    return parser


# -- config resolution -------------------------------------------------------


def _resolve(args, extra: dict | None = None) -> ScenarioConfig:
    base = load_config(args.config) if args.config else ScenarioConfig()
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.iterations is not None:
        if args.iterations < 1:
            raise ConfigError("mc_iterations", "must be a positive integer")
        changes["mc_iterations"] = args.iterations
    changes.update({k: v for k, v in (extra or {}).items() if v is not None})
    return base.replace(**changes) if changes else base


def _check_eps(args) -> None:
    if not 0.0 <= args.eps_feas < 1.0:
        raise ConfigError("eps_feas", "must lie in [0, 1)")


def _threads(args) -> int:
    return default_threads() if args.threads is None else max(1, args.threads)


# -- output ----------------------------------------------------------------


def _cell(value):
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    if value is None:
        return "NF"
    return value


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(v) for k, v in row.items()})
    return buf.getvalue()


def _json_text(rows: list[dict], extra: dict | None = None) -> str:
    def clean(v):
        return None if isinstance(v, float) and math.isnan(v) else v

    doc = {"rows": [{k: clean(v) for k, v in r.items()} for r in rows]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _emit(args, rows: list[dict], config: ScenarioConfig | None, started: float, extra: dict | None = None):
    outputs = []
    if args.format in ("csv", "both"):
        outputs.append((".csv", _csv_text(rows)))
    if args.format in ("json", "both"):
        outputs.append((".json", _json_text(rows, extra)))
    if args.out is None:
        for _, text in outputs:
            sys.stdout.write(text)
        return
    paths = []
    for suffix, text in outputs:
        path = args.out if args.format != "both" else args.out.with_suffix(suffix)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        paths.append(path)
        log.info("wrote %s", path)
    manifest = RunManifest(
        command=args.command,
        config_digest=config.digest() if config else "",
        master_seed=config.master_seed if config else 0,
        tool_version=__version__,
        wall_time_s=time.perf_counter() - started,
        worker_count=_threads(args),
    )
    sidecar = Path(str(args.out) + ".manifest.json")
    sidecar.write_text(json.dumps(asdict(manifest), indent=2) + "\n", encoding="utf-8")


def _progress(label):
    def report(done, total):
        log.info("%s: %d/%d iterations", label, done, total)

    return report


# -- commands ----------------------------------------------------------------


def _solve_row(config: ScenarioConfig, args, label: str) -> dict:
    res = solve(config, eps_feas=args.eps_feas, threads=_threads(args), progress=_progress(label))
    row = {
        "n_ss": config.n_ss,
        "t_ss_ms": config.t_ss_s * 1e3,
        "v_mps": config.ue_speed_mps,
        "num_ues": config.num_ues,
        "misdetection_prob": config.misdetection_prob,
        "max_tx_power_dbm": config.max_tx_power_dbm,
        "snr_threshold_db": config.snr_threshold_db,
    }
    row.update(res.to_row())
    row["p_t_star_w"] = res.p_t_star_w
    row["e_c_j"] = res.e_c_j
    row["p_c_w"] = res.p_c_w
    return row


def cmd_solve(args, started) -> int:
    _check_eps(args)
    keys = ("ue_speed_mps", "t_ss_s", "n_ss", "num_ues", "misdetection_prob", "max_tx_power_dbm", "snr_threshold_db")
    config = _resolve(args, {k: getattr(args, k) for k in keys})
    row = _solve_row(config, args, "solve")
    _emit(args, [row], config, started)
    return EXIT_INFEASIBLE if args.strict and row["status"] != "FEASIBLE" else EXIT_OK


def cmd_sweep(args, started) -> int:
    _check_eps(args)
    config = _resolve(args)
    known = set(config.to_dict())
    for key, _ in args.assignments:
        if key not in known:
            raise ConfigError(key, "unknown key")
    keys = [k for k, _ in args.assignments]
    rows, any_infeasible = [], False
    for values in itertools.product(*(v for _, v in args.assignments)):
        point = ScenarioConfig.from_dict({**config.to_dict(), **dict(zip(keys, values))})
        row = {k: v for k, v in zip(keys, values)}
        row.update(_solve_row(point, args, " ".join(f"{k}={v}" for k, v in zip(keys, values))))
        any_infeasible |= row["status"] != "FEASIBLE"
        rows.append(row)
    _emit(args, rows, config, started)
    return EXIT_INFEASIBLE if args.strict and any_infeasible else EXIT_OK


def cmd_offset(args, started) -> int:
    config = _resolve(args)
    if args.samples < 2:
        raise ConfigError("samples", "must be >= 2")
    rows = []
    for n_ss, t_ss, v, n in itertools.product(args.n_ss, args.t_ss, args.v, args.n_gnb):
        if n_ss not in SSB_PER_BURST_CHOICES:
            raise ConfigError("n_ss", f"{n_ss} is not one of {list(SSB_PER_BURST_CHOICES)}")
        if not 1 <= n <= MAX_ANTENNAS:
            raise ConfigError("n_gnb", f"{n} outside [1, {MAX_ANTENNAS}]")
        an = analytic_theta_bar(n, n_ss, t_ss, v, config.cell_radius_m, config.numerology)
        mc = mc_theta_bar(n, n_ss, t_ss, v, config, args.samples, include_seam=args.include_seam)
        rows.append({
            "n_gnb": n,
            "n_ss": n_ss,
            "t_ss_ms": t_ss * 1e3,
            "v_mps": v,
            "theta_bar_rad": an.theta_bar,
            "theta_bar_i_rad": an.theta_bar_i,
            "theta_bar_v_rad": an.theta_bar_v,
            "theta_bar_mc_rad": mc.theta_bar,
            "theta_bar_mc_se_rad": mc.std_error,
        })
    _emit(args, rows, config, started)
    return EXIT_OK


def cmd_feasibility(args, started) -> int:
    _check_eps(args)
    config = _resolve(args)
    for n in args.n_ss:
        if n not in SSB_PER_BURST_CHOICES:
            raise ConfigError("n_ss", f"{n} is not one of {list(SSB_PER_BURST_CHOICES)}")

    def progress(key, best):
        shown = "NF" if best is None else f"{best:.3f} m"
        log.info("slice N_SS=%d K=%d P_MD=%g: max vT_SS %s", key.n_ss, key.num_ues, key.misdetection_prob, shown)

    grid = sweep_feasibility(config, n_ss=args.n_ss, t_ss_s=args.t_ss, speeds_mps=args.v, num_ues=args.k,
                             misdetection_probs=args.p_md, eps_feas=args.eps_feas, strategy=args.strategy,
                             d_min_m=args.d_min, threads=_threads(args), progress=progress)
    if args.cells:
        rows = grid.rows()
    else:
        rows = []
        for n_ss in grid.n_ss:
            for p_md in grid.misdetection_probs:
                row = {"n_ss": n_ss, "misdetection_prob": p_md}
                for k in grid.num_ues:
                    key = next(s for s in grid.slice_keys() if (s.n_ss, s.num_ues, s.misdetection_prob) == (n_ss, k, p_md))
                    best = grid.max_product_m[key]
                    row[f"k{k}_max_v_t_ss_m"] = None if best is None else round(best, 6)
                    if args.d_min is not None:
                        row[f"k{k}_analytic_bound_m"] = grid.analytic_bound_m.get(key, math.nan)
                rows.append(row)
    _emit(args, rows, config, started)
    nothing = all(b is None for b in grid.max_product_m.values())
    return EXIT_INFEASIBLE if args.strict and nothing else EXIT_OK


def cmd_recommend(args, started) -> int:
    _check_eps(args)
    config = _resolve(args)
    grid = sweep_feasibility(config, n_ss=args.n_ss, t_ss_s=args.t_ss, speeds_mps=[args.v], num_ues=[args.k],
                             misdetection_probs=[args.p_md], eps_feas=args.eps_feas, threads=_threads(args))
    rec = recommend_config(grid, args.k, args.p_md, args.v)
    row = {
        "num_ues": args.k,
        "misdetection_prob": args.p_md,
        "v_mps": args.v,
        "recommendation": str(rec) if not rec.found else "OK",
        "n_ss": rec.n_ss if rec.found else "",
        "t_ss_ms": rec.t_ss_s * 1e3 if rec.found else "",
    }
    _emit(args, [row], config, started)
    return EXIT_INFEASIBLE if args.strict and not rec.found else EXIT_OK


def cmd_print_default_config(args, started) -> int:
    text = ScenarioConfig().to_json() + "\n"
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "offset": cmd_offset,
    "feasibility": cmd_feasibility,
    "recommend": cmd_recommend,
    "print-default-config": cmd_print_default_config,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    if not logging.getLogger().handlers and not log.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("[beamopt] %(message)s"))
        log.addHandler(handler)
    log.setLevel(logging.WARNING if getattr(args, "quiet", False) else logging.INFO)
    started = time.perf_counter()
    try:
        return COMMANDS[args.command](args, started)
    except (ConfigError, DomainError) as exc:
        print(f"beamopt: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())
