"""Batch experiment runner.

One config (a flat JSON object, or the ``.meta.json`` sidecar of an earlier
run) selects an experiment kind and its parameters; command line flags
override config keys.  Each run writes one table (CSV or JSON) and a
``<out>.meta.json`` sidecar with the resolved config, the seed, the library
version and the convergence flags.

Exit codes: 0 success (convergence problems are flagged in the sidecar),
2 config parse error, 3 precondition violation.  Errors are reported as one
JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .averaging import certify_theorem_conditions, one_parameter_averaged_density
from .checks import identity_battery
from .core import JacobiError, JacobiSpec, tail_from_dict
from .green import beta_averaged_density
from .pruefer import carmona_density
from .wegner import (
    RandomModelSpec,
    averaged_density_mc,
    choose_N,
    expansion_residual,
    phase_pushforward_histogram,
    sample_potentials,
)

EXIT_CONFIG = 2
EXIT_PRECONDITION = 3

DENSITY_COLUMNS = ("energy", "value", "stderr", "method")
IDENTITY_COLUMNS = ("name", "max_residual", "tolerance", "pass")

_COMMON = {"kind": None, "out": None, "format": "csv", "seed": 0, "threads": 1}
_MODEL = {"potentials": None, "hoppings": None, "free_sites": 1, "alpha": 0.0,
          "beta": math.pi / 2, "tail": {"kind": "free"}}
_GRID = {"emin": -2.2, "emax": 2.2, "grid": 401}

DEFAULTS = {
    "carmona": {**_MODEL, **_GRID, "length": 2000, "windows": None},
    "beta-average": {**_MODEL, **_GRID},
    "identities": {"cases": 100},
    "birman-schwinger": {**_MODEL, "free_sites": 2, "weights": [1.0, 1.0], "mu0": -1.5,
                         "mu1": 1.5, "emin": 0.0, "emax": 0.0, "grid": 1, "nodes": 512},
    "one-param-average": {**_MODEL, **_GRID, "free_sites": 2, "weights": [1.0, 1.0],
                          "mu0": -1.5, "mu1": 1.5, "length": 400, "nodes": 64},
    "wegner-mc": {"lambda": 1.0, "n_sites": None, "length": None, "samples": 2000,
                  "emin": -1.0, "emax": 1.0, "grid": 21, "monitor": True},
    "wegner-scaling": {"lambdas": [0.1, 0.05, 0.025], "energy": 0.3, "samples": 100},
    "phase-histogram": {"lambda": 0.1, "n_sites": None, "energy": 0.3, "samples": 10000,
                        "bins": 50},
}
KINDS = tuple(DEFAULTS)

# command line flag -> config key
_FLAG_KEYS = {"out": "out", "seed": "seed", "threads": "threads", "format": "format",
              "lam": "lambda", "n_sites": "n_sites", "length": "length",
              "samples": "samples", "emin": "emin", "emax": "emax", "grid": "grid",
              "kind": "kind"}


class ConfigError(Exception):
    pass


class PreconditionError(Exception):
    pass


# ---------------------------------------------------------------------------
# config


def load_config(path):
    """Read a config file; a sidecar is recognised by its ``config`` entry."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if isinstance(data, dict) and "config" in data and "library_version" in data:
        data = data["config"]
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def resolve_config(raw: dict, overrides: dict) -> dict:
    """Merge defaults, file values and flag overrides; reject unknown keys."""
    merged = dict(raw)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    kind = merged.get("kind")
    if kind not in DEFAULTS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}; got {kind!r}")
    allowed = {**_COMMON, **DEFAULTS[kind]}
    unknown = sorted(set(merged) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys for kind {kind!r}: {', '.join(unknown)}")
    cfg = {**allowed, **merged}
    if not cfg["out"]:
        raise ConfigError("no output path: set 'out' or pass --out")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg['format']!r}")
    seed = cfg["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    if isinstance(cfg["threads"], bool) or not isinstance(cfg["threads"], int) \
            or cfg["threads"] < 1:
        raise ConfigError("threads must be a positive integer")
    return cfg


def _energies(cfg):
    n = cfg["grid"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise PreconditionError(f"grid must be a positive integer, got {n!r}")
    if n == 1:
        return np.array([float(cfg["emin"])])
    if not cfg["emin"] < cfg["emax"]:
        raise PreconditionError("need emin < emax")
    return np.linspace(cfg["emin"], cfg["emax"], n)


def _spec(cfg) -> JacobiSpec:
    tail = tail_from_dict(cfg["tail"])
    if cfg["potentials"] is None:
        v = np.zeros(int(cfg["free_sites"]))
    else:
        v = np.asarray(cfg["potentials"], dtype=float)
    return JacobiSpec(v, cfg["hoppings"], alpha=cfg["alpha"], beta=cfg["beta"], tail=tail)


def _positive_int(cfg, key):
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, int) or val < 1:
        raise PreconditionError(f"{key} must be a positive integer, got {val!r}")
    return val


# ---------------------------------------------------------------------------
# experiments; each returns (columns, rows, flags, diagnostics)


def _density_table(est):
    return DENSITY_COLUMNS, list(est.rows())


def run_carmona(cfg):
    spec = _spec(cfg)
    est = carmona_density(spec, _energies(cfg), _positive_int(cfg, "length"),
                          windows=cfg["windows"])
    flags = {"window_stable": est.meta.get("stable")}
    return (*_density_table(est), flags, est.meta)


def run_beta_average(cfg):
    spec = _spec(cfg)
    E = _energies(cfg)
    vals = beta_averaged_density(spec, E)
    rows = [(float(e), float(v), 0.0, "beta-average") for e, v in zip(E, vals)]
    return DENSITY_COLUMNS, rows, {}, {"alpha": float(spec.alpha)}


def run_identities(cfg):
    results = identity_battery(cfg["seed"], _positive_int(cfg, "cases"))
    rows = [(r.name, r.max_residual, r.tolerance, "true" if r.passed else "false")
            for r in results]
    return IDENTITY_COLUMNS, rows, {"all_pass": all(r.passed for r in results)}, {}


def _fmt_bool(x):
    return "na" if x is None else ("true" if x else "false")


def run_birman_schwinger(cfg):
    base = _spec(cfg)
    rows, diag = [], []
    for E in _energies(cfg):
        rep = certify_theorem_conditions(base, cfg["weights"], E, cfg["mu0"], cfg["mu1"],
                                         nodes=_positive_int(cfg, "nodes"))
        rows.append((float(E), _fmt_bool(rep.condition_a), _fmt_bool(rep.condition_b),
                     rep.rotation, _fmt_bool(rep.monotone), _fmt_bool(rep.certified)))
        diag.append({"energy": float(E),
                     "k_eigenvalues": None if rep.k_eigenvalues is None
                     else rep.k_eigenvalues.tolist(),
                     "crossings": rep.crossings.tolist(),
                     "branch_crossings": [[n, mu] for n, mu in rep.branch_crossings],
                     "notes": rep.notes})
    cols = ("energy", "condition_a", "condition_b", "rotation", "monotone", "certified")
    return cols, rows, {}, {"energies": diag}


def run_one_param(cfg):
    est = one_parameter_averaged_density(
        _spec(cfg), cfg["weights"], cfg["mu0"], cfg["mu1"], _energies(cfg),
        _positive_int(cfg, "length"), nodes=_positive_int(cfg, "nodes"))
    flags = {"max_ratio_L_2L": est.meta.get("max_ratio_L_2L"),
             "certified": est.meta.get("certified")}
    return (*_density_table(est), flags, est.meta)


def run_wegner_mc(cfg):
    lam = float(cfg["lambda"])
    E = _energies(cfg)
    n = cfg["n_sites"]
    if n is None:
        n = choose_N(lam, (float(E[0]), float(E[-1])))
    L = cfg["length"] if cfg["length"] is not None else 4 * n
    model = RandomModelSpec(lam, int(n), int(L), interval=(float(E[0]), float(E[-1])))
    samples = _positive_int(cfg, "samples")
    est = averaged_density_mc(model, E, samples, cfg["seed"], threads=cfg["threads"])
    flags = {"large_stderr": est.meta["large_stderr"]}
    diag = {"n_sites": int(n), "length": int(L)}
    if cfg["monitor"]:
        est2 = averaged_density_mc(model, E, samples, cfg["seed"], threads=cfg["threads"],
                                   length=2 * L)
        z = np.abs(est.values - est2.values) / np.hypot(est.stderr, est2.stderr)
        diag["values_2L"] = est2.values.tolist()
        diag["stderr_2L"] = est2.stderr.tolist()
        flags["max_z_L_2L"] = float(np.max(z))
        flags["length_stable"] = bool(np.all(z <= 3))
    return (*_density_table(est), flags, diag)


def run_wegner_scaling(cfg):
    E = float(cfg["energy"])
    samples = _positive_int(cfg, "samples")
    rows = []
    for lam in cfg["lambdas"]:
        N = int(round(lam ** -2))
        vs = sample_potentials(cfg["seed"], N, samples)
        med = float(np.median(np.abs(expansion_residual(lam, vs, E))))
        rows.append((float(lam), N, med, med / (N * lam * lam)))
    scaled = [r[3] for r in rows]
    ratio = max(scaled) / min(scaled) if min(scaled) > 0 else math.inf
    cols = ("lambda", "n_sites", "median_abs_residual", "scaled_residual")
    return cols, rows, {"scaled_ratio": ratio, "bounded": ratio <= 10}, {}


def run_phase_histogram(cfg):
    lam = float(cfg["lambda"])
    N = cfg["n_sites"] if cfg["n_sites"] is not None else int(round(lam ** -2))
    h = phase_pushforward_histogram(lam, int(N), float(cfg["energy"]),
                                    _positive_int(cfg, "samples"),
                                    bins=_positive_int(cfg, "bins"), seed=cfg["seed"])
    rows = [(float(a), float(b), int(c)) for a, b, c in zip(h.edges[:-1], h.edges[1:], h.counts)]
    diag = {"n_sites": int(N), "mean": h.mean, "std": h.std, "stderr": h.stderr,
            "center": h.center, "oscillating_std": h.oscillating_std}
    flags = {"mean_within_3_stderr": abs(h.mean) <= 3 * h.stderr}
    return ("bin_left", "bin_right", "count"), rows, flags, diag


RUNNERS = {
    "carmona": run_carmona,
    "beta-average": run_beta_average,
    "identities": run_identities,
    "birman-schwinger": run_birman_schwinger,
    "one-param-average": run_one_param,
    "wegner-mc": run_wegner_mc,
    "wegner-scaling": run_wegner_scaling,
    "phase-histogram": run_phase_histogram,
}


# ---------------------------------------------------------------------------
# output


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _plain(x):
    """Convert numpy scalars and arrays to JSON-native values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def write_table(path, columns, rows, fmt):
    if fmt == "csv":
        lines = [",".join(columns)] + [",".join(_cell(c) for c in r) for r in rows]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps({"columns": list(columns), "rows": _plain(rows)}, indent=1) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def run_experiment(cfg: dict):
    """Run a resolved config and write the table and sidecar; returns the flags."""
    runner = RUNNERS[cfg["kind"]]
    out = Path(cfg["out"])
    if out.parent and not out.parent.is_dir():
        raise PreconditionError(f"output directory {out.parent} does not exist")
    try:
        columns, rows, flags, diag = runner(cfg)
    except (JacobiError, ValueError, TypeError, KeyError) as exc:
        raise PreconditionError(f"{type(exc).__name__}: {exc}") from exc
    try:
        write_table(out, columns, rows, cfg["format"])
        meta = {"kind": cfg["kind"], "config": cfg, "seed": cfg["seed"],
                "library_version": __version__, "convergence": flags,
                "diagnostics": diag, "rows": len(rows)}
        Path(str(out) + ".meta.json").write_text(
            json.dumps(_plain(meta), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise PreconditionError(f"cannot write output: {exc}") from exc
    return flags


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="jacobi-avg", description="Run one spectral-averaging experiment.")
    p.add_argument("kind", nargs="?", choices=KINDS, help="experiment kind (or set 'kind' in the config)")
    p.add_argument("--config", help="JSON config or a previous run's .meta.json sidecar")
    p.add_argument("--out", help="output table path")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--n-sites", type=int)
    p.add_argument("--length", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--emin", type=float)
    p.add_argument("--emax", type=float)
    p.add_argument("--grid", type=int)
    return p


def _fail(code, kind, message):
    record = {"error": kind, "message": message, "exit_code": code}
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        raw = load_config(args.config) if args.config else {}
        overrides = {key: getattr(args, attr) for attr, key in _FLAG_KEYS.items()}
        cfg = resolve_config(raw, overrides)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    try:
        run_experiment(cfg)
    except PreconditionError as exc:
        return _fail(EXIT_PRECONDITION, "precondition", str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
