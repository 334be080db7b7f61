"""Command-line driver for the Manakov benchmark experiments.

Subcommands
-----------
run          one integration; invariants.csv, summary.json, optional field.dat
converge     stepsize ladder; converge.csv (method, h, e_y, rate)
space-study  truncation ladder against a finer basis; space.csv (method, h, N, e_y)
spectral     HBVM(max(20, s+2), s) with the Gamma decay monitor; as ``run`` plus rank.csv

Options may also come from a ``key = value`` file given with ``--config``;
keys are the long option names (``max-iter`` or ``max_iter``), lines starting
with ``#`` are ignored, and command-line flags take precedence.

Exit codes: 0 success, 1 bad configuration, 2 solver failure, 3 I/O failure.
"""

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from .exceptions import ConfigurationError, SolverError
from .fourier_space import basis_values, build_basis
from .hbvm_tableau import build_tableau, spectral_k
from .integrator import (
    IntegrationConfig,
    convergence_study,
    integrate,
    reference_trajectory,
)
from .problems import get_problem

__all__ = [
    "main",
    "build_parser",
    "RunConfig",
    "cmd_run",
    "cmd_converge",
    "cmd_space_study",
    "cmd_spectral",
    "read_csv",
    "INVARIANT_COLUMNS",
    "CONVERGE_COLUMNS",
    "SPACE_COLUMNS",
    "SUMMARY_KEYS",
]

log = logging.getLogger("manakov_hbvm")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3

CONVERGE_COLUMNS = ["method", "h", "e_y", "rate"]
SPACE_COLUMNS = ["method", "h", "N", "e_y"]
RANK_COLUMNS = ["step", "t", "ratio", "flagged"]
SUMMARY_KEYS = ["problem", "N", "k", "s", "h", "T", "e_y", "e_H", "e_K", "e_M",
                "blended_iterations", "wall_seconds", "converged"]

DEFAULT_N = {"manakov1": 70, "manakov2": 400}
DEFAULT_SPECTRAL_S = {"manakov1": 10, "manakov2": 16}


def INVARIANT_COLUMNS(n):
    """Header of invariants.csv for an n-component problem."""
    return (["t"] + [f"M{i}" for i in range(1, n + 1)] + ["M", "K", "H", "eH", "eK", "eM"]
            + [f"e{i}" for i in range(1, n + 1)])


def _fmt(x):
    return "" if x is None else f"{x:.12e}"


# option name -> (type, default, help)
OPTIONS = {
    "problem": (str, "manakov1", "built-in problem: manakov1 | manakov2"),
    "N": (int, None, "truncation index (basis size 2N+1); default 70 / 400 by problem"),
    "k": (int, None, "HBVM stage count; default 2 (spectral: max(20, s+2))"),
    "s": (int, None, "HBVM degree; default 1 (spectral: 10 / 16 by problem)"),
    "h": (float, None, "stepsize; default 0.1 (spectral: 1.0)"),
    "h-ladder": (str, None, "comma-separated stepsizes, e.g. 0.2,0.1,0.05"),
    "methods": (str, None, "methods as k:s pairs, e.g. 2:1,4:2,6:3; default k:s"),
    "N-ladder": (str, None, "comma-separated truncation indices for space-study"),
    "N-ref": (int, 150, "reference truncation index for space-study"),
    "T": (float, None, "time horizon; default from the problem"),
    "solver": (str, "blended", "stage solver: blended | fixed_point"),
    "tol": (float, 1e-13, "stage solver tolerance"),
    "max-iter": (int, 100, "stage solver iteration cap per step"),
    "out": (str, "out", "output directory"),
    "oversample": (int, 1, "quadrature oversampling r: m = 4rN + 1"),
    "store-states": (bool, False, "keep states in memory (needed for field output)"),
    "record-every": (int, 1, "invariant sampling stride in steps"),
    "reference": (bool, False, "run: compute e_y against HBVM(20,10) with h/4"),
    "ref-k": (int, 20, "reference method stage count"),
    "ref-s": (int, 10, "reference method degree"),
    "ref-h": (float, None, "reference stepsize; default min(h)/4"),
    "field-grid": (bool, False, "write |psi_i(x,t)|^2 on an (x,t) lattice to field.dat"),
    "grid-nx": (int, 200, "field lattice points in x"),
    "grid-nt": (int, 200, "field lattice points in t"),
    "x-window": (str, None, "plotting window xmin,xmax; default the domain"),
    "zero-field": (bool, False, "replace the initial field by zero"),
    "seed": (int, 0, "random seed (recorded; runs are deterministic)"),
}

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


class RunConfig(dict):
    """Resolved option values keyed by long option name (``cfg["max-iter"]``)."""


def _convert(key, value):
    typ = OPTIONS[key][0]
    if value is None or not isinstance(value, str):
        return value
    if typ is bool:
        v = value.strip().lower()
        if v in _BOOL_TRUE:
            return True
        if v in _BOOL_FALSE:
            return False
        raise ConfigurationError(f"{key}: expected a boolean, got {value!r}")
    try:
        return typ(value.strip())
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {value!r}") from None


def read_config_file(path):
    values = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("_", "-")
            if key not in OPTIONS:
                raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _convert(key, value)
    return values


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _methods(cfg, default):
    if cfg["methods"]:
        out = []
        for item in cfg["methods"].split(","):
            k, _, s = item.partition(":")
            out.append((int(k), int(s)))
        return out
    return [default]


def resolve(args):
    """Merge defaults, the optional config file, and explicit flags."""
    cfg = RunConfig({key: spec[1] for key, spec in OPTIONS.items()})
    if args.config:
        cfg.update(read_config_file(args.config))
    for key in OPTIONS:
        value = getattr(args, key.replace("-", "_"))
        if value is not None:
            cfg[key] = _convert(key, value)
    cfg["command"] = args.command
    problem = cfg["problem"]
    if problem not in DEFAULT_N:
        raise ConfigurationError(f"unknown problem {problem!r}")
    spectral = args.command == "spectral"
    if cfg["N"] is None:
        cfg["N"] = DEFAULT_N[problem]
    if cfg["s"] is None:
        cfg["s"] = DEFAULT_SPECTRAL_S[problem] if spectral else 1
    if cfg["k"] is None:
        cfg["k"] = spectral_k(cfg["s"]) if spectral else 2 * cfg["s"]
    if cfg["h"] is None:
        cfg["h"] = 1.0 if spectral else 0.1
    if cfg["k"] < cfg["s"]:
        raise ConfigurationError("HBVM needs k >= s")
    if cfg["oversample"] < 1:
        raise ConfigurationError("oversample must be >= 1")
    if cfg["solver"] not in ("blended", "fixed_point"):
        raise ConfigurationError(f"unknown solver {cfg['solver']!r}")
    return cfg


def build_parser():
    parser = argparse.ArgumentParser(
        prog="manakov-bench",
        description="Fourier-Galerkin / HBVM experiments for the Manakov system.",
        epilog="Exit codes: 0 success, 1 bad configuration, 2 solver failure, 3 I/O failure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "run": "single integration with invariant log",
        "converge": "time-convergence study over --h-ladder",
        "space-study": "space truncation study over --N-ladder",
        "spectral": "HBVM used as a spectral method in time",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", help="key = value file with any of the options below")
        for key, (typ, default, help_) in OPTIONS.items():
            flag = "--" + key
            dest = key.replace("-", "_")
            if typ is bool:
                p.add_argument(flag, dest=dest, action="store_const", const="true", default=None,
                               help=f"{help_} (config key: {key})")
            else:
                p.add_argument(flag, dest=dest, default=None,
                               help=f"{help_} (default: {default}; config key: {key})")
    return parser


def _setup(cfg, N=None):
    problem = get_problem(cfg["problem"], T=cfg["T"], zero=cfg["zero-field"])
    N = cfg["N"] if N is None else N
    basis = build_basis(N, problem.a, problem.b, m=4 * cfg["oversample"] * N + 1)
    return problem, basis


def _ensure_out(cfg):
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out!r} is not writable")
    return out


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_csv(path):
    """Read a CSV written by this module; numeric cells become floats, blanks None."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for raw in reader:
            row = {}
            for key, cell in zip(header, raw):
                if cell == "":
                    row[key] = None
                else:
                    try:
                        row[key] = float(cell)
                    except ValueError:
                        row[key] = cell
            rows.append(row)
    return header, rows


def write_invariants(path, traj):
    n = traj.masses.shape[1]
    err = traj.error_series()
    rows = []
    for i, t in enumerate(traj.times):
        rows.append([_fmt(t)] + [_fmt(x) for x in traj.masses[i]]
                    + [_fmt(traj.M[i]), _fmt(traj.K[i]), _fmt(traj.H[i]),
                       _fmt(err["eH"][i]), _fmt(err["eK"][i]), _fmt(err["eM"][i])]
                    + [_fmt(x) for x in err["ei"][i]])
    _write_csv(path, INVARIANT_COLUMNS(n), rows)


def write_summary(path, cfg, traj, k, s, extra=None):
    errs = traj.invariant_errors()
    summary = {
        "problem": cfg["problem"], "N": traj.N, "k": k, "s": s, "h": traj.h,
        "T": float(traj.times[-1]), "e_y": traj.e_y,
        "e_H": errs["e_H"], "e_K": errs["e_K"], "e_M": errs["e_M"],
        "blended_iterations": traj.blended_iterations,
        "wall_seconds": round(traj.wall_seconds, 3), "converged": traj.converged,
        "e_i": errs["e_i"].tolist(),
    }
    if extra:
        summary.update(extra)
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary


def write_field(path, cfg, problem, basis, traj):
    """|psi_i|^2 blocks (one per time sample) for gnuplot ``splot``."""
    if cfg["x-window"]:
        x0, x1 = _floats(cfg["x-window"])
    else:
        x0, x1 = problem.a, problem.b
    xs = np.linspace(x0, x1, cfg["grid-nx"])
    Wx = basis_values(basis.N, basis.a, basis.b, xs)
    n = problem.n
    with open(path, "w") as fh:
        fh.write("# x t " + " ".join(f"abs2_psi{i}" for i in range(1, n + 1)) + " abs2_total\n")
        for t, y in zip(traj.state_times, traj.states):
            z = y @ Wx.T
            dens = z[0::2] ** 2 + z[1::2] ** 2
            for j, x in enumerate(xs):
                vals = " ".join(f"{v:.8e}" for v in dens[:, j])
                fh.write(f"{x:.8e} {t:.8e} {vals} {dens[:, j].sum():.8e}\n")
            fh.write("\n")


def _single_run(cfg, k, s, spectral=False):
    problem, basis = _setup(cfg)
    tab = build_tableau(k, s)
    steps = int(round((problem.T) / cfg["h"]))
    store = cfg["store-states"] or cfg["field-grid"]
    state_every = max(1, steps // max(1, cfg["grid-nt"] - 1)) if cfg["field-grid"] else None
    ref = None
    if cfg["reference"]:
        h_ref = cfg["ref-h"] or cfg["h"] / 4.0
        log.info("reference HBVM(%d,%d), h = %g", cfg["ref-k"], cfg["ref-s"], h_ref)
        ref = reference_trajectory(problem, basis, cfg["h"], h=h_ref, k=cfg["ref-k"], s=cfg["ref-s"],
                                   tol=cfg["tol"], max_iter=cfg["max-iter"])
    config = IntegrationConfig(h=cfg["h"], tol=cfg["tol"], max_iter=cfg["max-iter"],
                               solver=cfg["solver"], record_every=cfg["record-every"],
                               store_states=store, state_every=state_every, spectral_check=spectral)
    log.info("%s on %s, N = %d, h = %g", tab.label, problem.name, basis.N, cfg["h"])
    traj = integrate(problem, basis, tab, config, reference=ref)
    return problem, basis, traj


def cmd_run(cfg):
    out = _ensure_out(cfg)
    problem, basis, traj = _single_run(cfg, cfg["k"], cfg["s"])
    write_invariants(os.path.join(out, "invariants.csv"), traj)
    summary = write_summary(os.path.join(out, "summary.json"), cfg, traj, cfg["k"], cfg["s"])
    if cfg["field-grid"]:
        write_field(os.path.join(out, "field.dat"), cfg, problem, basis, traj)
    return summary


def cmd_spectral(cfg):
    out = _ensure_out(cfg)
    problem, basis, traj = _single_run(cfg, cfg["k"], cfg["s"], spectral=True)
    write_invariants(os.path.join(out, "invariants.csv"), traj)
    rows = [[i + 1, _fmt((i + 1) * traj.h), _fmt(r), int(r > IntegrationConfig.tol_rank)]
            for i, r in enumerate(traj.rank_ratios)]
    _write_csv(os.path.join(out, "rank.csv"), RANK_COLUMNS, rows)
    summary = write_summary(os.path.join(out, "summary.json"), cfg, traj, cfg["k"], cfg["s"],
                            extra={"rank_flags": traj.rank_flags,
                                   "max_rank_ratio": float(np.nanmax(traj.rank_ratios))})
    if cfg["field-grid"]:
        write_field(os.path.join(out, "field.dat"), cfg, problem, basis, traj)
    return summary


def cmd_converge(cfg):
    out = _ensure_out(cfg)
    if not cfg["h-ladder"]:
        raise ConfigurationError("converge needs --h-ladder")
    hs = _floats(cfg["h-ladder"])
    problem, basis = _setup(cfg)
    h_ref = cfg["ref-h"] or min(hs) / 4.0
    log.info("reference HBVM(%d,%d), h = %g", cfg["ref-k"], cfg["ref-s"], h_ref)
    ref = reference_trajectory(problem, basis, min(hs), h=h_ref, k=cfg["ref-k"], s=cfg["ref-s"],
                               tol=cfg["tol"], max_iter=cfg["max-iter"])
    rows = convergence_study(problem, basis, _methods(cfg, (cfg["k"], cfg["s"])), hs, reference=ref,
                             tol=cfg["tol"], max_iter=cfg["max-iter"])
    table = [[r.method, _fmt(r.h), _fmt(r.e_y), "" if r.rate is None else f"{r.rate:.3f}"] for r in rows]
    _write_csv(os.path.join(out, "converge.csv"), CONVERGE_COLUMNS, table)
    return rows


def cmd_space_study(cfg):
    out = _ensure_out(cfg)
    if not cfg["N-ladder"]:
        raise ConfigurationError("space-study needs --N-ladder")
    Ns = _ints(cfg["N-ladder"])
    if Ns != sorted(Ns) or max(Ns) >= cfg["N-ref"]:
        raise ConfigurationError("N-ladder must be increasing and below N-ref")
    hs = _floats(cfg["h-ladder"]) if cfg["h-ladder"] else [cfg["h"]]
    problem, ref_basis = _setup(cfg, N=cfg["N-ref"])
    table = []
    results = []
    for k, s in _methods(cfg, (cfg["k"], cfg["s"])):
        tab = build_tableau(k, s)
        for h in hs:
            base = IntegrationConfig(h=h, tol=cfg["tol"], max_iter=cfg["max-iter"], solver=cfg["solver"])
            log.info("%s, h = %g: reference N = %d", tab.label, h, ref_basis.N)
            ref = integrate(problem, ref_basis, tab, IntegrationConfig(**{**base.__dict__, "store_states": True}))
            for N in Ns:
                _, basis = _setup(cfg, N=N)
                tr = integrate(problem, basis, tab, base, reference=ref)
                table.append([tab.label, _fmt(h), N, _fmt(tr.e_y)])
                results.append((tab.label, h, N, tr.e_y))
    _write_csv(os.path.join(out, "space.csv"), SPACE_COLUMNS, table)
    return results


COMMANDS = {"run": cmd_run, "converge": cmd_converge, "space-study": cmd_space_study, "spectral": cmd_spectral}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        cfg = resolve(args)
        COMMANDS[args.command](cfg)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        if exc.report is not None:
            print(f"  iterations={exc.report.iterations} residual={exc.report.final_residual:.3e}",
                  file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigurationError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
