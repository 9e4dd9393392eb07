"""Command-line front end.

``semiclassica COMMAND [flags]`` runs one experiment from a JSON config plus
flag overrides and writes CSV/JSON (and optionally SVG) files. Every output
carries the fully resolved config, so feeding it back reproduces the run.
"""
import argparse
import copy
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .coherent import PhaseGrid, fitted_phase_grid, husimi
from .errors import GoldenMismatch, SemiclassicaError
from .grid import dump_binary, dump_csv
from .limits import (DEFAULT_HBARS, SweepResult, _jsonable, axiom_suite, cached_ground_state,
                     classical_limit_sweep, eigenvalue_convergence_sweep, grid_dict,
                     localization_sweep, semigroup_sweep, standard_pair)
from .plotting import emit_plot
from .schrodinger import build_hamiltonian, lowest_levels
from .ssb import check_report, default_hbars, render_text, ssb_report

SWEEPS = ("classical-limit", "localization", "eig-convergence", "semigroup", "axioms")
GOLDEN_ENV = "SEMICLASSICA_GOLDEN_DIR"


# -- configuration ------------------------------------------------------------------

def _hbar_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty hbar list")
    return vals


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are config errors (exit 1), not argparse's default 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="semiclassica",
                 description="Semiclassical ground-state experiments.")
    ap.add_argument("command", choices=cfgmod.COMMANDS)
    ap.add_argument("--config", help="JSON experiment config")
    ap.add_argument("--hbar", type=float)
    ap.add_argument("--hbars", type=_hbar_list, help="comma separated, e.g. 0.5,0.1,0.05")
    ap.add_argument("--potential", help="doublewell, mexicanhat or harmonic")
    ap.add_argument("--group", help="trivial, z2 or so2")
    ap.add_argument("--grid-n", type=int, dest="grid_n")
    ap.add_argument("--grid-L", type=float, dest="grid_L")
    ap.add_argument("--grid-N", type=int, dest="grid_N")
    ap.add_argument("--t", type=float)
    ap.add_argument("--mode", choices=["schrodinger", "berezin-gibbs", "comparison"])
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--svg", action="store_true", default=None, help="also write SVG plots")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--binary", action="store_true", default=None,
                    help="write wave functions as little-endian float64")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--eigenpairs", type=int, help="ground: number of levels")
    ap.add_argument("--update-goldens", action="store_true",
                    help="check: rewrite the golden files instead of comparing")
    return ap


def resolve_config(args):
    """Merge the config file with flag overrides, validate, and fill every
    default so the result fully determines the run."""
    cfg = cfgmod.load(args.config) if args.config else {}
    if cfg.get("command", args.command) != args.command:
        raise cfgmod.ConfigError(f"config is for {cfg['command']!r}, not {args.command!r}")
    cfg["command"] = args.command
    for key in ("hbar", "hbars", "potential", "group", "t", "mode", "workers", "seed",
                "eigenpairs"):
        v = getattr(args, key)
        if v is not None:
            cfg[key] = v
    grid = dict(cfg.get("grid", {}))
    for key, v in (("n", args.grid_n), ("L", args.grid_L), ("N", args.grid_N)):
        if v is not None:
            grid[key] = v
    if grid:
        cfg["grid"] = grid
    out = dict(cfg.get("output", {}))
    for key, v in (("dir", args.out), ("svg", args.svg), ("binary", args.binary)):
        if v is not None:
            out[key] = v
    cfg["output"] = out
    cfgmod.validate(cfg)
    return complete(cfg)


def complete(cfg):
    """Fill defaults in a validated config (returns a new dict)."""
    cfg = copy.deepcopy(cfg)
    V = cfgmod.resolve_potential(cfg.get("potential", "doublewell"), cfg.get("grid", {}).get("n"))
    grid = cfgmod.resolve_grid(cfg.get("grid"), V.n)
    G = cfgmod.resolve_group(cfg.get("group"), V)
    cfg.setdefault("potential", V.name)
    cfg["group"] = G.kind.lower()
    cfg["grid"] = grid_dict(grid)
    cfg.setdefault("hbar", 0.1)
    if "hbars" not in cfg:
        cfg["hbars"] = list(default_hbars(V) if cfg["command"] == "ssb-report" else DEFAULT_HBARS)
    cfg.setdefault("t", 1.0)
    cfg.setdefault("eps", 0.2)
    cfg.setdefault("mode", "schrodinger")
    cfg.setdefault("eigenpairs", 3)
    cfg.setdefault("seed", 0)
    cfg.setdefault("workers", 1)
    out = cfg.setdefault("output", {})
    out.setdefault("dir", "semiclassica-out")
    out.setdefault("svg", False)
    out.setdefault("binary", False)
    for o in cfg.get("observables", []):
        cfgmod.resolve_observable(o, V.n)
    return cfg


def _setup(cfg):
    V = cfgmod.resolve_potential(cfg["potential"], cfg["grid"]["n"])
    grid = cfgmod.resolve_grid(cfg["grid"], V.n)
    G = cfgmod.resolve_group(cfg["group"], V)
    obs = [cfgmod.resolve_observable(o, V.n) for o in cfg.get("observables", [])] or None
    return V, grid, G, obs


def _echo(cfg):
    # the output block says where files went; it does not change any result
    return {k: v for k, v in cfg.items() if k != "output"}


# -- experiments --------------------------------------------------------------------

def run_experiment(cfg):
    """Compute the result of a completed config without writing files.

    Returns a :class:`SweepResult` (``ground`` and the sweeps), a report dict
    (``ssb-report``) or ``(GroundState, HusimiField)`` for ``husimi``.
    """
    cmd = cfg["command"]
    V, grid, G, obs = _setup(cfg)
    hb, hbars, t, workers = cfg["hbar"], cfg["hbars"], cfg["t"], cfg["workers"]
    if cmd == "ground":
        H = build_hamiltonian(V, hb, grid)
        res = lowest_levels(H, cfg["eigenpairs"], tol=1e-10)
        rows = [[hb, j, float(e), float(r)] for j, (e, r) in enumerate(zip(res.values, res.residuals))]
        sr = SweepResult("ground", [hb] * len(rows), ["hbar", "level", "energy", "residual"], rows,
                         {"config": _echo(cfg)},
                         {"hbar": "Planck constant", "level": "index j", "energy": "E_j",
                          "residual": "||H psi_j - E_j psi_j||"})
        sr.states = res.vectors
        return sr
    if cmd == "husimi":
        _, gs = cached_ground_state(V, hb, grid)
        pg = PhaseGrid(grid, hb) if grid.n == 1 else fitted_phase_grid(grid, hb, states=[gs.psi])
        return gs, husimi(gs.psi, hb, pg)
    if cmd == "classical-limit":
        sr = classical_limit_sweep(V, G, obs, hbars, cfg["mode"], t, grid, workers)
    elif cmd == "localization":
        sr = localization_sweep(V, hbars, cfg["eps"], t, grid, workers)
    elif cmd == "eig-convergence":
        sr = eigenvalue_convergence_sweep(V, t, hbars, grid, workers)
    elif cmd == "semigroup":
        sr = semigroup_sweep(V, t, hbars, grid, workers=workers)
    elif cmd == "axioms":
        if obs is not None and len(obs) != 2:
            raise cfgmod.ConfigError("axioms needs exactly two observables")
        f, g = obs if obs else standard_pair(V.n)
        sr = axiom_suite(f, g, hbars, grid, workers, seed=cfg["seed"])
    elif cmd == "ssb-report":
        rep = ssb_report(V, G, hbars, grid, obs, workers=workers)
        rep["config"] = _echo(cfg)
        return rep
    else:
        raise cfgmod.ConfigError(f"{cmd} is not an experiment")
    sr.meta["config"] = _echo(cfg)
    return sr


def _dump(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True, default=_jsonable)
        fh.write("\n")


def write_outputs(cfg, result, stream=None):
    stream = stream or sys.stdout
    out = Path(cfg["output"]["dir"])
    out.mkdir(parents=True, exist_ok=True)
    cmd = cfg["command"]
    written = []
    if cmd == "ground":
        result.write_csv(out / "ground.csv")
        written.append(out / "ground.csv")
        for j, psi in enumerate(result.states):
            path = out / (f"psi_{j}.bin" if cfg["output"]["binary"] else f"psi_{j}.csv")
            (dump_binary if cfg["output"]["binary"] else dump_csv)(psi, path)
            written.append(path)
        for r in result.rows:
            stream.write(f"E_{int(r[1])} = {r[2]:.12g}\n")
    elif cmd == "husimi":
        gs, field = result
        field.dump_csv(out / "husimi.csv")
        q, p, v = field.ordered()
        d = np.abs(v) ** 2
        peaks = []
        for half in (q[:, 0] < 0, q[:, 0] >= 0):
            # one peak per half line in q1 (the two wells of a symmetric potential)
            if half.any():
                sub = np.where(half[:, None], d, -1.0)
                a, b = np.unravel_index(np.argmax(sub), sub.shape)
                peaks.append([float(c) for c in list(q[a]) + list(p[b])])
        meta = {"config": _echo(cfg), "mass": field.mass(), "E0": gs.energy,
                "peaks": peaks, "nodes": [int(d.shape[0]), int(d.shape[1])]}
        _dump(meta, out / "husimi.json")
        written += [out / "husimi.csv", out / "husimi.json"]
        if cfg["output"]["svg"]:
            written.append(Path(emit_plot(field, out / "husimi.svg")))
        stream.write(f"Husimi mass {meta['mass']:.12g}, peaks at {meta['peaks']}\n")
    elif cmd == "ssb-report":
        _dump(result, out / "ssb-report.json")
        written.append(out / "ssb-report.json")
        stream.write(render_text(result))
    else:
        name = cmd
        result.write_csv(out / f"{name}.csv")
        with open(out / f"{name}.json", "w") as fh:
            fh.write(result.to_json() + "\n")
        written += [out / f"{name}.csv", out / f"{name}.json"]
        if cfg["output"]["svg"]:
            written.append(Path(emit_plot(result, out / f"{name}.svg")))
        stream.write(result.csv_text())
    return written


# -- golden files ---------------------------------------------------------------------

def golden_dir():
    env = os.environ.get(GOLDEN_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("semiclassica").joinpath("goldens")))


def _as_comparable(result):
    if isinstance(result, SweepResult):
        return json.loads(result.to_json())
    return json.loads(json.dumps(result, default=_jsonable))


def check_goldens(directory=None, update=False, stream=None):
    """Run every entry of ``manifest.json`` and compare with its golden file.

    Returns the list of failing entry names; with ``update`` the golden files
    are rewritten instead.
    """
    directory = Path(directory or golden_dir())
    stream = stream or sys.stdout
    try:
        manifest = json.loads((directory / "manifest.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise cfgmod.ConfigError(f"cannot read golden manifest in {directory}: {exc}") from None
    failed = []
    for entry in manifest["entries"]:
        cfg = complete(cfgmod.validate(dict(entry["config"])))
        result = run_experiment(cfg)
        path = directory / entry["golden"]
        data = _as_comparable(result)
        if update:
            if isinstance(result, SweepResult):
                data["tolerances"] = entry.get("tolerances", {})
            _dump(data, path)
            stream.write(f"WROTE {entry['name']} -> {path.name}\n")
            continue
        try:
            golden = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise cfgmod.ConfigError(f"cannot read golden {path}: {exc}") from None
        if isinstance(result, SweepResult):
            bad = result.compare(golden, entry.get("tolerances") or golden.get("tolerances"))
        else:
            try:
                check_report(result, golden)
                bad = []
            except GoldenMismatch as exc:
                bad = [str(exc)]
        stream.write(f"{'PASS' if not bad else 'FAIL'} {entry['name']}\n")
        for msg in bad[:5]:
            stream.write(f"    {msg}\n")
        if bad:
            failed.append(entry["name"])
    return failed


# -- entry point --------------------------------------------------------------------------

def run(argv=None, stream=None):
    stream = stream or sys.stdout
    args = build_parser().parse_args(argv)
    if args.command == "check":
        failed = check_goldens(update=args.update_goldens, stream=stream)
        if failed:
            raise GoldenMismatch(f"{len(failed)} golden comparison(s) failed: {', '.join(failed)}")
        return 0
    cfg = resolve_config(args)
    result = run_experiment(cfg)
    write_outputs(cfg, result, stream)
    return 0


def main(argv=None):
    try:
        return run(argv)
    except SystemExit as exc:
        # argparse: --help exits 0, usage errors 1
        return exc.code if isinstance(exc.code, int) else 1
    except SemiclassicaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
