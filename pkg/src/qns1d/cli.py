"""Command-line entry point: ``qns1d <subcommand> <config> [options]``.

Exit codes: 0 success, 1 configuration/usage error, 2 numerical failure.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import Grid
from .diagnostics import germain_lefloch, trajectory_records
from .discretization import ScalarField, bohm_residual
from .errors import ConfigError, QNSError, RegimeError, StepError, StudyError
from .experiments import LimitStudyConfig, cross_check, decay_study, limit_study
from .integrator import SimConfig, advance, initial_data
from .io import (RunManifest, config_echo, parse_config, write_diagnostics_csv, write_limit_study,
                 write_state_json)

log = logging.getLogger("qns1d")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser():
    p = _Parser(prog="qns1d", description="1-D quantum Navier-Stokes simulator (Lagrangian coordinates)")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", help="key=value configuration file")
        sp.add_argument("--out", default=None, help="output directory (default: <config stem>_out)")
        return sp

    add("simulate", "run one trajectory, write diagnostics CSV and final-state JSON")
    sp = add("study-limit", "vanishing-dispersion study against the eps=0 Navier-Stokes run")
    sp.add_argument("--workers", type=int, default=None)
    sp = add("cross-check", "compare formulations on the same initial data")
    sp.add_argument("--formulations", default="primitive,omega")
    sp.add_argument("--no-refine", action="store_true")
    sp = add("check-identities", "Bohm identity refinement table and Germain-LeFloch sweep")
    sp.add_argument("--levels", type=int, default=4)
    sp = add("decay", "decay norms at sample times")
    sp.add_argument("--times", required=True, help="comma-separated sample times")
    return p


def _outdir(args):
    out = Path(args.out) if args.out else Path(Path(args.config).stem + "_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sim_config(cfg):
    if isinstance(cfg, LimitStudyConfig):
        return cfg.base
    return cfg


def cmd_simulate(args, cfg, out, manifest):
    cfg = _sim_config(cfg)
    try:
        traj = advance(cfg)
    except StepError as err:
        partial = getattr(err, "trajectory", None)
        report = {"error": str(err), "node": err.node, "time": err.time, "v_min": err.v_min,
                  "last_snapshot_t": partial.times[-1] if partial else None}
        path = out / "positivity_report.json"
        path.write_text(json.dumps(report, indent=2))
        manifest.outputs.append(str(path))
        print(f"positivity failure: {err}", file=sys.stderr)
        raise
    manifest.warnings.extend(traj.warnings)
    csv_path = out / "diagnostics.csv"
    write_diagnostics_csv(trajectory_records(traj), csv_path)
    state_path = out / "final_state.json"
    write_state_json(traj.final, traj.times[-1], traj.grid, state_path)
    manifest.outputs += [str(csv_path), str(state_path)]
    manifest.config["run"] = {**traj.dt_summary(), "v_min_seen": traj.v_min_seen, "v_max_seen": traj.v_max_seen}
    print(f"t={traj.times[-1]:g} steps={traj.step_count} v in [{traj.v_min_seen:.6g}, {traj.v_max_seen:.6g}]")


def cmd_study_limit(args, cfg, out, manifest):
    if not isinstance(cfg, LimitStudyConfig):
        raise ConfigError("study-limit needs eps_list and t_star in the config")
    res = limit_study(cfg, workers=args.workers)
    csv_path, json_path = out / "limit_study.csv", out / "limit_study.json"
    write_limit_study(res, csv_path, json_path)
    manifest.outputs += [str(csv_path), str(json_path)]
    for k, f in res.fits.items():
        if f is None:
            print(f"k={k}: fit rejected ({res.flags.get(k)})")
        else:
            print(f"k={k}: slope={f.slope:.4f} residual={f.residual:.2e}")


def cmd_cross_check(args, cfg, out, manifest):
    cfg = _sim_config(cfg)
    forms = [f.strip() for f in args.formulations.split(",") if f.strip()]
    rep = cross_check(cfg, forms, refine=not args.no_refine)
    doc = {"N": rep.N, "pairs": []}
    for pair, d in rep.discrepancy.items():
        entry = {"pair": list(pair), "discrepancy": d, "refined": rep.refined.get(pair),
                 "ratio": rep.ratio.get(pair), "shrinks": rep.shrinks.get(pair)}
        doc["pairs"].append(entry)
        print(f"{pair[0]} vs {pair[1]}: {d:.3e}" + (f" -> {rep.refined[pair]:.3e} (x{rep.ratio[pair]:.2f})"
                                                      if pair in rep.refined else ""))
    path = out / "cross_check.json"
    path.write_text(json.dumps(doc, indent=2))
    manifest.outputs.append(str(path))


def cmd_check_identities(args, cfg, out, manifest):
    cfg = _sim_config(cfg)
    ini = cfg.initial
    pars = {"A": ini.A, "B": ini.B, "sigma": ini.sigma, "center": ini.center}
    table = []
    prev = None
    for level in range(args.levels):
        grid = Grid(cfg.L, cfg.N * 2**level)
        rho = 1.0 / initial_data(ini.family, pars, grid).v
        r = bohm_residual(ScalarField(rho, 1.0), grid)
        order = float(np.log2(prev / r)) if prev and r > 0 else None
        table.append({"N": grid.N, "residual": r, "order": order})
        print(f"bohm N={grid.N:6d} residual={r:.3e}" + (f" order={order:.2f}" if order else ""))
        prev = r
    grid = cfg.grid
    v0 = initial_data(ini.family, pars, grid).v
    sweep = []
    for a in (1.5, 2, 3, 4, 6):
        lhs, rhs = germain_lefloch(ScalarField(v0, 1.0), a, grid)
        sweep.append({"a": a, "lhs": lhs, "rhs": rhs, "holds": lhs >= rhs - 1e-10 * (1 + lhs)})
        print(f"germain-lefloch a={a}: lhs={lhs:.6e} rhs={rhs:.6e}")
    path = out / "identities.json"
    path.write_text(json.dumps({"bohm": table, "germain_lefloch": sweep}, indent=2))
    manifest.outputs.append(str(path))


def cmd_decay(args, cfg, out, manifest):
    cfg = _sim_config(cfg)
    try:
        times = [float(t) for t in args.times.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"bad --times value {args.times!r}") from None
    if times and times[-1] > cfg.t_final:
        cfg = cfg.replace(t_final=times[-1])
    res = decay_study(cfg, times)
    path = out / "decay.csv"
    with open(path, "w") as fh:
        fh.write("t,decay_sup,decay_grad\n")
        for t, s, g in zip(res.times, res.sup, res.grad):
            fh.write(f"{t!r},{s!r},{g!r}\n")
            print(f"t={t:g} sup={s:.6e} grad={g:.6e}")
    if res.non_monotone_tail:
        manifest.warnings.append("non-monotone decay tail")
    manifest.outputs.append(str(path))


COMMANDS = {
    "simulate": cmd_simulate,
    "study-limit": cmd_study_limit,
    "cross-check": cmd_cross_check,
    "check-identities": cmd_check_identities,
    "decay": cmd_decay,
}


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = parse_config(args.config)
    except (ConfigError, RegimeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    out = _outdir(args)
    manifest = RunManifest(config_echo(cfg), __version__, 0.0)
    start = time.perf_counter()
    code = 0
    try:
        COMMANDS[args.command](args, cfg, out, manifest)
    except (ConfigError, RegimeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        manifest.status, code = "config-error", 1
    except (StepError, StudyError, QNSError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        manifest.status, code = "numerical-failure", 2
    manifest.wall_clock_s = time.perf_counter() - start
    manifest_path = out / "manifest.json"
    manifest.outputs.append(str(manifest_path))
    manifest.write(manifest_path)
    return code


if __name__ == "__main__":
    sys.exit(main())
