"""Command-line front end: size, sweep-units, validate, plot and export-mps.

Exit codes: 0 success, 1 validation failure or infeasible instance,
2 configuration or parse error, 3 solver limit reached without a solution.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import HeliosError, ParseError
from .milp import export_mps
from .oracle import compute_efficiency, validate
from .plot import write_svg
from .profile import SYNTH_DAYS, SolarProfile, load_csv, synth
from .sizing import (Phase, ProblemSpec, Solution, encode, pad_units, read_solution, solve,
                     write_solution)
from .solver import SolverOptions

EXIT_OK, EXIT_INVALID, EXIT_CONFIG, EXIT_LIMIT = 0, 1, 2, 3

log = logging.getLogger("helios")


class ConfigError(HeliosError):
    pass


@dataclass
class RunConfig:
    profile: SolarProfile
    spec: ProblemSpec
    options: SolverOptions
    out: Path
    epsilon: float | None = None


# -- argument parsing ---------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _add_problem_args(p: argparse.ArgumentParser, units: bool = True) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--profile", type=Path, help="CSV with header time,power")
    src.add_argument("--synth", choices=sorted(SYNTH_DAYS), help="synthetic day instead of a file")
    p.add_argument("--steps", type=int, default=32, help="steps of a synthetic day (default 32)")
    p.add_argument("--dt", type=int, default=15, help="minutes per synthetic step (default 15)")
    p.add_argument("--seed", type=int, default=1, help="seed of a synthetic day (default 1)")
    if units:
        p.add_argument("--units", type=int, default=2, help="number of units n (default 2)")
    p.add_argument("--min-up", type=_int_list, default=[1], help="a or a,b,... steps")
    p.add_argument("--min-down", type=_int_list, default=[1], help="a or a,b,... steps")
    p.add_argument("--strategy", choices=("static", "quasi"), default="static")
    p.add_argument("--storage", action="store_true", help="size a battery (two-phase solve)")
    p.add_argument("--battery-hours", type=float, default=1.0,
                   help="energy capacity per unit of rated power, hours (default 1)")
    p.add_argument("--x-max", type=float, default=1.0, help="largest unit size, pu")
    p.add_argument("--big-m", type=float, default=None, help="big-M constant (default x_max)")
    p.add_argument("--no-symmetry", action="store_true", help="drop the X1 >= X2 >= ... rows")
    p.add_argument("--gap", type=float, default=1e-6, help="relative optimality gap")
    p.add_argument("--time-limit", type=float, default=None, help="seconds per solve phase")
    p.add_argument("--node-limit", type=int, default=None, help="nodes per solve phase")
    p.add_argument("--branching", choices=("pseudo_cost", "most_fractional"),
                   default="pseudo_cost")
    p.add_argument("--epsilon", type=float, default=None,
                   help="spill slack for battery sizing (default 1e-6 * sum(S))")
    p.add_argument("--node-log", type=Path, default=None, help="CSV node log of the last phase")
    p.add_argument("--out", type=Path, default=Path("helios-out"), help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="helios", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("size", help="solve one sizing problem")
    _add_problem_args(p)

    p = sub.add_parser("sweep-units", help="solve for several unit counts")
    _add_problem_args(p, units=False)
    p.add_argument("--n-list", type=_int_list, required=True, help="ascending list, e.g. 2,3,4,5")

    p = sub.add_parser("validate", help="re-check a solution file")
    p.add_argument("solution", type=Path)
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = sub.add_parser("plot", help="stacked-area SVG of a solution file")
    p.add_argument("solution", type=Path)
    p.add_argument("output", type=Path)

    p = sub.add_parser("export-mps", help="write the encoded model as fixed-format MPS")
    _add_problem_args(p)
    p.add_argument("--phase", choices=[ph.value for ph in Phase], default=Phase.MIN_SPILL.value)
    p.add_argument("--spill-star", type=float, default=None)
    return parser


def _profile(args) -> SolarProfile:
    if args.profile is not None:
        if not args.profile.is_file():
            raise ConfigError(f"profile file {args.profile} not found")
        return load_csv(args.profile)
    return synth(args.synth or "clear", args.steps, args.dt, args.seed)


def _spec(args, n: int) -> ProblemSpec:
    def per_unit(vals: list[int]) -> list[int]:
        if len(vals) == 1:
            return vals * n
        if len(vals) < n:
            raise ConfigError(f"need 1 or {n} minimum times, got {len(vals)}")
        return vals[:n]

    return ProblemSpec(
        n_units=n, min_up=per_unit(args.min_up), min_down=per_unit(args.min_down),
        strategy="quasi_dynamic" if args.strategy == "quasi" else "static",
        storage="sized" if args.storage else "none", x_max=args.x_max, big_m=args.big_m,
        battery_hours_ratio=args.battery_hours, symmetry_breaking=not args.no_symmetry)


def config_from_args(args, n: int | None = None) -> RunConfig:
    options = SolverOptions(rel_gap=args.gap, node_limit=args.node_limit,
                            time_limit_seconds=args.time_limit, branching=args.branching)
    return RunConfig(_profile(args), _spec(args, n if n is not None else args.units), options,
                     args.out, args.epsilon)


# -- outputs --------------------------------------------------------------------

def summary_line(sol: Solution) -> str:
    # enough digits that the printed efficiency reproduces the file to 1e-9
    xs = ",".join(f"{x:.12g}" for x in sol.X)
    gap = f"{sol.gap:.6g}" if np.isfinite(sol.gap) else "inf"
    return (f"x={xs} eff={sol.efficiency:.12g} pb={sol.battery_size:.12g} "
            f"gap={gap} status={sol.status}")


def _r4(v: float) -> str:
    s = f"{v:.4f}"
    return "0.0000" if s == "-0.0000" else s


def write_schedule_csv(path: Path, sol: Solution, spec: ProblemSpec,
                       profile: SolarProfile) -> None:
    soc = sol.soc(spec, profile)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "S", "Ps", *[f"Y_{i + 1}" for i in range(sol.n_units)], "SOC"])
        for t in range(profile.steps):
            w.writerow([t + 1, _r4(profile.array[t]), _r4(sol.Ps[t]),
                        *[_r4(sol.Y[i, t]) for i in range(sol.n_units)], _r4(soc[t])])


def _solve(cfg: RunConfig, seeds=()) -> Solution:
    return solve(cfg.spec, cfg.profile, cfg.options, seeds, cfg.epsilon)


# -- commands -------------------------------------------------------------------

def cmd_size(args) -> int:
    cfg = config_from_args(args)
    if args.node_log is not None:
        cfg.options.node_log = open(args.node_log, "w")
    try:
        sol = _solve(cfg)
    finally:
        if cfg.options.node_log is not None:
            cfg.options.node_log.close()
    print(summary_line(sol))
    if sol.status in ("infeasible", "time_limit"):
        return EXIT_LIMIT if sol.status == "time_limit" else EXIT_INVALID
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_solution(cfg.out / "solution.json", sol, cfg.spec, cfg.profile)
    write_schedule_csv(cfg.out / "schedule.csv", sol, cfg.spec, cfg.profile)
    report = validate(sol, cfg.spec, cfg.profile)
    print(f"validation {'pass' if report.passed else 'FAIL ' + ','.join(report.failures())}")
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_sweep_units(args) -> int:
    n_list = args.n_list
    if n_list != sorted(n_list) or len(set(n_list)) != len(n_list):
        raise ConfigError("--n-list must be strictly ascending")
    args.out.mkdir(parents=True, exist_ok=True)
    rows, failed = [], False
    plain_prev = stored_prev = None
    for n in n_list:
        base = config_from_args(args, n)
        row = {"n": n}
        # each row is seeded with the previous one padded by an idle unit
        plain_cfg = RunConfig(base.profile, _with_storage(base.spec, False), base.options,
                              base.out, base.epsilon)
        stored_cfg = RunConfig(base.profile, _with_storage(base.spec, True), base.options,
                               base.out, base.epsilon)
        try:
            seeds = [pad_units(plain_prev, n, base.profile)] if plain_prev is not None else []
            plain = _solve(plain_cfg, seeds)
            row.update(sizes=";".join(_r4(x) for x in plain.X), eff=_r4(plain.efficiency),
                       status=plain.status)
            plain_prev = plain if plain.status in ("optimal", "feasible_gap") else None
            seeds = [pad_units(stored_prev, n, base.profile)] if stored_prev is not None else []
            stored = _solve(stored_cfg, seeds)
            row.update(battery=_r4(stored.battery_size), eff_storage=_r4(stored.efficiency),
                       status_storage=stored.status)
            stored_prev = stored if stored.status in ("optimal", "feasible_gap") else None
        except HeliosError as exc:
            log.error("n=%d failed: %s", n, exc)
            row.setdefault("status", f"error: {exc}")
            failed = True
        rows.append(row)
    fields = ["n", "sizes", "eff", "status", "battery", "eff_storage", "status_storage"]
    with open(args.out / "sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(",".join(fields))
    for r in rows:
        print(",".join(str(r.get(f, "")) for f in fields))
    return EXIT_INVALID if failed else EXIT_OK


def _with_storage(spec: ProblemSpec, on: bool) -> ProblemSpec:
    return replace(spec, storage="sized" if on else "none")


def _load(path: Path) -> tuple[Solution, ProblemSpec, SolarProfile]:
    if not path.is_file():
        raise ConfigError(f"solution file {path} not found")
    sol, spec, profile = read_solution(path)
    if spec is None or profile is None:
        raise ParseError(f"{path} lacks the embedded spec/profile needed here")
    return sol, spec, profile


def cmd_validate(args) -> int:
    sol, spec, profile = _load(args.solution)
    report = validate(sol, spec, profile)
    if args.json:
        sys.stdout.write(report.to_json())
    else:
        for line in report.lines():
            print(line)
        if profile.total > 0:
            print(f"efficiency {compute_efficiency(sol, profile):.12g}")
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_plot(args) -> int:
    sol, spec, profile = _load(args.solution)
    write_svg(args.output, sol, profile, spec)
    return EXIT_OK


def cmd_export_mps(args) -> int:
    cfg = config_from_args(args)
    enc = encode(cfg.spec, cfg.profile, args.phase, spill_star=args.spill_star,
                 epsilon=cfg.epsilon)
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / "model.mps"
    export_mps(enc.model, path)
    print(path)
    return EXIT_OK


COMMANDS = {"size": cmd_size, "sweep-units": cmd_sweep_units, "validate": cmd_validate,
            "plot": cmd_plot, "export-mps": cmd_export_mps}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ParseError, ValueError, OSError) as exc:
        # domain errors are ValueErrors: bad flags, bad files, inconsistent specs
        print(f"helios: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
