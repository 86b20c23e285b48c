"""Config parsing and deterministic serialization of results.

Config files are plain ``key = value`` lines with ``#`` comments.  Floats
are written with ``repr`` so every number survives a write/read cycle
bitwise.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .core import PhysicalParams, State
from .diagnostics import GL_EXPONENTS, DiagnosticsRecord
from .errors import ConfigError, QNSError
from .experiments import LimitStudyConfig
from .integrator import FAMILIES, FORMULATIONS, InitialData, SimConfig

CSV_HEADER = [
    "t", "energy", "dissipation_rate", "dissipation_cum", "bd_entropy", "v_min", "v_max",
    "sup_eff_pressure", "decay_sup", "decay_grad", "gl_ratio_a2", "gl_ratio_a3", "gl_ratio_a4",
]


def _float(s):
    return float(s)


def _int(s):
    f = float(s)
    if f != int(f):
        raise ValueError(f"{s!r} is not an integer")
    return int(f)


def _float_list(s):
    return tuple(float(p) for p in s.replace(";", ",").split(",") if p.strip())


def _int_list(s):
    return tuple(_int(p) for p in s.replace(";", ",").split(",") if p.strip())


def _bool(s):
    low = s.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{s!r} is not a boolean")


# key -> (converter, check or None, message)
KEYS = {
    "nu": (_float, lambda x: x > 0, "nu must be > 0"),
    "eps": (_float, lambda x: x >= 0, "eps must be >= 0"),
    "gamma": (_float, lambda x: x >= 1, "gamma must be >= 1 (pressure rho**gamma with gamma >= 1)"),
    "L": (_float, lambda x: x > 0, "L must be > 0"),
    "N": (_int, lambda x: x >= 16 and x % 2 == 0, "N must be an even integer >= 16"),
    "t_final": (_float, lambda x: x >= 0, "t_final must be >= 0"),
    "cfl": (_float, lambda x: 0 < x <= 1, "cfl must lie in (0, 1]"),
    "snapshot_interval": (_float, lambda x: x > 0, "snapshot_interval must be > 0"),
    "formulation": (str, lambda x: x in FORMULATIONS, f"formulation must be one of {FORMULATIONS}"),
    "family": (str, lambda x: x in FAMILIES, f"family must be one of {FAMILIES}"),
    "A": (_float, lambda x: x > -1, "A must be > -1 so that v0 > 0"),
    "B": (_float, None, ""),
    "sigma": (_float, lambda x: x > 0, "sigma must be > 0"),
    "center": (_float, None, ""),
    "positivity_floor": (_float, lambda x: x > 0, "positivity_floor must be > 0"),
    "boundary_tol": (_float, lambda x: x > 0, "boundary_tol must be > 0"),
    "dt": (_float, lambda x: x > 0, "dt must be > 0"),
    "sponge_fraction": (_float, lambda x: 0 <= x < 1, "sponge_fraction must lie in [0, 1)"),
    "sponge_rate": (_float, lambda x: x >= 0, "sponge_rate must be >= 0"),
    "eps_list": (_float_list, lambda x: len(x) > 0, "eps_list must not be empty"),
    "t_star": (_float, lambda x: x > 0, "t_star must be > 0"),
    "derivative_orders": (_int_list, lambda x: set(x) <= {0, 1, 2, 3}, "derivative_orders must be within 0..3"),
    "refine_check": (_bool, None, ""),
}

REQUIRED = ("nu", "gamma", "L", "N")


def read_key_values(path):
    """``{key: (raw_value, line_number)}``; raises ConfigError on malformed lines."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"malformed line {raw.strip()!r}; expected key=value", lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in out:
            raise ConfigError(f"duplicate key {key!r} (first on line {out[key][1]})", lineno)
        if not value:
            raise ConfigError(f"empty value for {key!r}", lineno)
        out[key] = (value, lineno)
    return out


def parse_config(path):
    """Build a SimConfig, or a LimitStudyConfig when ``eps_list`` is present."""
    raw = read_key_values(path)
    vals, lines = {}, {}
    for key, (text, lineno) in raw.items():
        conv, check, msg = KEYS[key]
        try:
            val = conv(text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
        if isinstance(val, float) and not math.isfinite(val):
            raise ConfigError(f"{key} must be finite", lineno)
        if check is not None and not check(val):
            raise ConfigError(f"{msg}, got {text!r}", lineno)
        vals[key], lines[key] = val, lineno

    study = "eps_list" in vals
    required = REQUIRED + (("t_star",) if study else ("eps", "t_final"))
    missing = [k for k in required if k not in vals]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")

    eps = vals.get("eps", 0.0)
    nu = vals["nu"]
    if vals.get("formulation") == "xi" and eps > nu:
        raise ConfigError(
            f"formulation=xi with eps={eps} > nu={nu}: in the dispersive regime c_plus, c_minus "
            "are complex and the xi system is not real; use primitive or omega",
            lines["formulation"],
        )
    if study:
        bad = [e for e in vals["eps_list"] if e > nu]
        if bad:
            raise ConfigError(f"eps_list entries {bad} exceed nu={nu}", lines["eps_list"])

    ini_keys = {k: vals[k] for k in ("family", "A", "B", "sigma", "center") if k in vals}
    sim_keys = {k: vals[k] for k in ("L", "N", "formulation", "cfl", "snapshot_interval",
                                     "positivity_floor", "boundary_tol", "dt", "sponge_fraction", "sponge_rate")
                if k in vals}
    t_final = vals.get("t_final", vals.get("t_star"))
    try:
        base = SimConfig(
            params=PhysicalParams(nu, eps, vals["gamma"]),
            initial=InitialData(**ini_keys),
            t_final=t_final,
            **sim_keys,
        )
        if not study:
            return base
        extra = {k: vals[k] for k in ("derivative_orders", "refine_check") if k in vals}
        return LimitStudyConfig(base, vals["eps_list"], vals["t_star"], **extra)
    except ConfigError:
        raise
    except QNSError as exc:
        raise ConfigError(str(exc)) from exc


def config_echo(config):
    """JSON-friendly dict of a SimConfig or LimitStudyConfig."""
    d = asdict(config)
    return json.loads(json.dumps(d, default=str))


def _fmt(x):
    return repr(float(x))


def write_diagnostics_csv(records, path):
    if not records:
        raise ValueError("no diagnostics records to write")
    records = sorted(records, key=lambda r: r.t)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            row = [r.t, r.energy, r.dissipation_rate, r.dissipation_cum, r.bd_entropy, r.v_min, r.v_max,
                   r.sup_eff_pressure, r.decay_sup, r.decay_grad]
            row += [r.gl_ratios.get(a, float("nan")) for a in GL_EXPONENTS]
            w.writerow([_fmt(x) for x in row])


def read_diagnostics_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError(f"{path}: unexpected header")
    out = []
    for row in rows[1:]:
        x = [float(s) for s in row]
        out.append(DiagnosticsRecord(*x[:10], gl_ratios=dict(zip(GL_EXPONENTS, x[10:]))))
    return out


def write_state_json(state, t, grid, path):
    doc = {"t": float(t), "L": float(grid.L), "N": int(grid.N), "v": state.v.tolist(), "u": state.u.tolist()}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def read_state_json(path):
    with open(path) as fh:
        doc = json.load(fh)
    return doc["t"], State(np.array(doc["v"]), np.array(doc["u"])), (doc["L"], doc["N"])


def write_limit_study(result, csv_path, json_path):
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eps", "k", "error"])
        for e, k, err in result.rows:
            w.writerow([_fmt(e), k, _fmt(err)])
    summary = {
        "t_star": result.t_star,
        "N": result.N,
        "dt": result.dt,
        "fits": {str(k): (asdict(f) if f is not None else None) for k, f in result.fits.items()},
        "flags": {str(k): v for k, v in result.flags.items()},
        "precondition": result.precondition,
    }
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2)


@dataclass
class RunManifest:
    config: dict
    version: str
    wall_clock_s: float
    status: str = "ok"
    warnings: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, default=str)
