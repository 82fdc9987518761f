"""Command-line experiment runner.

Every command reads its parameters from (in increasing priority) built-in
defaults, the ``[command]`` section of an optional ``--config`` INI file, and
command-line flags. The resolved configuration is written back to
``config.ini`` and echoed in ``manifest.json`` in the output directory.

Exit codes: 0 success, 2 invalid input, 3 numerical divergence, 4 contract
violation.
"""
import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, io
from .dynamics import IntegratorConfig, SpinCurrent, simulate, stability_limit, time_derivative_norms
from .energy import ModelParams, energy
from .errors import ThinFilmError, ValidationError
from .grid import GridSpec
from .kernels import BACKEND
from .s1_approx import approx_report, approximate
from .spectral import build_workspace
from .walls import (
    build_workspace_1d, concentration_report, detect_wall_center, concentration_fraction, extrude,
    neel_ansatz, profile_density, relax_field, relax_profile, straight_wall, tanh_profile, vortex_probe,
)

log = logging.getLogger("thinfilm")

THREADS_ENV = "THINFILM_NUM_THREADS"

WALL_COLUMNS = ("delta", "m1inf", "E", "rescaled_E", "x1_star", "frac_w02", "iterations")
TRACE_COLUMNS = ("t", "exchange", "anisotropy", "nonlocal", "total", "ceiling", "max_norm_dev", "l2_h_minus1_rate")
CELL_COLUMNS = ("cell_id", "energy", "eta", "degree", "pohozaev_residual", "iterations")
STATIONARITY_COLUMNS = ("delta", "eps", "lam", "T", "l2", "hminus1", "displacement", "E0", "ET")
CONCENTRATION_COLUMNS = ("x1_star", "rescaled_energy", "frac_w01", "frac_w02", "frac_w05")
VORTEX_COLUMNS = ("eps", "abs_log_eps", "energy", "continuum")


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_str(text):
    return None if text in (None, "") else str(text)


# (type, default, help) per key; keys double as flag names with '-' for '_'
COMMON = {
    "n": (int, 64, "points per unit length (h = 1/n)"),
    "delta": (float, 0.1, "core-width parameter delta in (0, 1/2)"),
    "eps": (float, 0.05, "vortex scale eps in (0, 1/2)"),
    "nu": (float, 1.0, "damping coefficient (alpha = nu eps)"),
    "lam": (float, 0.05, "precession coefficient (beta = lam eps)"),
    "m1inf": (float, 0.0, "boundary parameter m1inf in [0, 1)"),
}

COMMANDS = {
    "relax-wall": {
        "n": (int, 1024, COMMON["n"][2]),
        "delta": COMMON["delta"],
        "m1inf": COMMON["m1inf"],
        "init": (str, "ansatz", "initial profile: ansatz or tanh"),
        "tol": (float, 1e-13, "relative energy decrease stopping threshold"),
    },
    "simulate": {
        **COMMON,
        "T": (float, 1.0, "time horizon"),
        "dt": (float, 0.0, "time step (0: 80% of the stability limit, rounded to divide T)"),
        "scheme": (str, "rk4", "rk4 or midpoint"),
        "init": (str, "ansatz", "ansatz, tanh, straight or constant"),
        "resume": (_opt_str, None, "snapshot to continue from (with its .json sidecar)"),
        "current": (_floats, [0.0, 0.0], "constant spin current vx,vy"),
        "allow_inadmissible_current": (_bool, False, "accept ||v||^2 > alpha beta"),
        "sample_every": (int, 1, "steps between trace rows"),
        "snapshot_every": (int, 0, "trace rows between snapshots (0: final only)"),
        "energy_check_tol": (float, 0.02, "relative slack of the energy monitors"),
    },
    "project-s1": {
        **COMMON,
        "n": (int, 128, COMMON["n"][2]),
        "delta": (float, 0.05, COMMON["delta"][2]),
        "eps": (float, 0.02, COMMON["eps"][2]),
        "beta_grid": (float, 0.5, "net exponent: cell side ~ eps^beta_grid"),
        "input": (_opt_str, None, "snapshot to approximate (default: relaxed wall plus m3 bump)"),
        "bump_amplitude": (float, 0.8, "out-of-plane angle of the bump (rad)"),
        "bump_radius": (float, 0.05, "bump radius"),
        "bump_x1": (float, -0.5, "bump centre x1"),
        "bump_x2": (float, 0.5, "bump centre x2"),
    },
    "sweep": {
        **COMMON,
        "kind": (str, "wall", "wall (1D wall energies) or stationarity (LLG time-derivative norms)"),
        "n": (int, 1024, COMMON["n"][2]),
        "deltas": (_floats, [0.2, 0.1, 0.05, 0.02], "comma-separated delta values"),
        "T": (float, 0.5, "horizon for the stationarity sweep"),
        "tol": (float, 1e-13, "wall relaxation tolerance"),
    },
    "diagnose": {
        **COMMON,
        "input": (_opt_str, None, "snapshot to diagnose"),
        "init": (str, "straight", "field when no input is given: straight, ansatz or tanh"),
        "x1_star": (float, 0.0, "wall position of the generated field"),
        "relax": (_bool, False, "relax the field before diagnosing"),
    },
    "vortex-probe": {
        "n": (int, 512, COMMON["n"][2]),
        "eps_list": (_floats, [0.1, 0.05, 0.02, 0.01], "comma-separated eps values"),
    },
}


def _threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer")


def build_parser():
    parser = argparse.ArgumentParser(prog="thinfilm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, keys in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI file; the section named after the command is used")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("-v", "--verbose", action="store_true")
        for key, (_, default, help_) in keys.items():
            shown = default if not isinstance(default, list) else ",".join(map(str, default))
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                            help=f"{help_} [default: {shown}]")
    return parser


def resolve_config(command, args):
    """Merge defaults, the config file section and explicit flags."""
    keys = COMMANDS[command]
    raw = {k: d for k, (_, d, _) in keys.items()}
    if getattr(args, "config", None):
        section = io.read_config(args.config, command)
        unknown = set(section) - set(keys)
        if unknown:
            raise ValidationError(f"unknown keys in [{command}]: {sorted(unknown)}")
        raw.update(section)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            raw[k] = v
    out = {}
    for k, (conv, default, _) in keys.items():
        v = raw[k]
        try:
            out[k] = conv(v) if v is not None else None
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{command}: {k}={v!r}: {exc}")
    return out


def _params(cfg):
    return ModelParams(cfg["delta"], cfg["eps"], cfg["nu"], cfg["lam"], cfg["m1inf"])


def _manifest(outdir, command, cfg, params=None, extra=None):
    doc = {"command": command, "config": cfg, "version": __version__, "backend": BACKEND}
    if params is not None:
        doc["regime"] = params.flags()
        doc["derived"] = {"alpha": params.alpha, "beta": params.beta, "kappa": params.kappa}
    if extra:
        doc.update(extra)
    io.write_json(os.path.join(outdir, "manifest.json"), doc)
    io.write_config(os.path.join(outdir, "config.ini"), command, cfg)


def _profile(kind, delta, m1inf, n):
    if kind == "ansatz":
        return neel_ansatz(delta, m1inf, n)
    if kind == "tanh":
        return tanh_profile(delta, m1inf, n)
    raise ValidationError(f"unknown profile init {kind!r} (ansatz or tanh)")


def wall_row(delta, m1inf, n, init="ansatz", tol=1e-13):
    """Relax one 1D wall; returns the CSV row and the relaxed profile."""
    ws = build_workspace_1d(n)
    prof = relax_profile(_profile(init, delta, m1inf, n), delta, ws, tol=tol)
    dens = profile_density(prof, delta, ws)
    grid = GridSpec(n)
    x1s = detect_wall_center(dens, grid)
    frac = concentration_fraction(dens, x1s, 0.2, grid)
    rescaled = delta * abs(math.log(delta)) * prof.energy
    return (delta, m1inf, prof.energy, rescaled, x1s, frac, prof.iterations), prof


def run_relax_wall(cfg, outdir):
    if not 0.0 < cfg["delta"] < 0.5:
        raise ValidationError(f"delta={cfg['delta']!r} violates 0 < delta < 1/2")
    if not 0.0 <= cfg["m1inf"] < 1.0:
        raise ValidationError(f"m1inf={cfg['m1inf']!r} violates 0 <= m1inf < 1")
    if cfg["n"] < 2:
        raise ValidationError("n must be >= 2")
    row, prof = wall_row(cfg["delta"], cfg["m1inf"], cfg["n"], cfg["init"], cfg["tol"])
    io.write_csv(os.path.join(outdir, "wall.csv"), WALL_COLUMNS, [row])
    m = np.zeros((2 * cfg["n"] + 1, 1, 3))
    m[:, 0, :2] = prof.values
    io.save_snapshot(os.path.join(outdir, "profile.llgf"), m, cfg["delta"], 0.0, 0.0)
    _manifest(outdir, "relax-wall", cfg, extra={"converged": prof.converged})
    return 0


def _initial_field(kind, p, grid, x1_star=0.0):
    if kind == "constant":
        m = np.zeros(grid.shape + (3,))
        m[...] = p.m_plus
        return m
    if kind == "straight":
        return straight_wall(x1_star, p.m1inf, grid)
    if kind in ("ansatz", "tanh"):
        return extrude(_profile(kind, p.delta, p.m1inf, grid.n), grid)
    raise ValidationError(f"unknown init {kind!r}")


def _grid_for(m):
    n = (m.shape[0] - 1) // 2
    grid = GridSpec(n)
    if m.shape[:2] != grid.shape:
        raise ValidationError(f"snapshot shape {m.shape[:2]} is not a strip grid (2n+1, n)")
    return grid


def run_simulate(cfg, outdir):
    p = _params(cfg)
    t0, E0, vint = 0.0, None, 0.0
    if cfg["resume"]:
        snap = io.load_snapshot(cfg["resume"])
        side = io.load_sidecar(cfg["resume"])
        m0 = snap.m
        grid = _grid_for(m0)
        t0 = snap.t
        E0 = side.get("E0")
        vint = side.get("v_integral", 0.0)
    else:
        grid = GridSpec(cfg["n"])
        m0 = _initial_field(cfg["init"], p, grid)
    ws = build_workspace(grid)
    cur = cfg["current"]
    if len(cur) != 2:
        raise ValidationError("current must have two components vx,vy")
    v = SpinCurrent.zero() if cur == [0.0, 0.0] else SpinCurrent.constant(
        cur, p, allow_violation=cfg["allow_inadmissible_current"])
    dt = cfg["dt"]
    if dt <= 0.0:
        steps = max(1, int(math.ceil(cfg["T"] / (0.8 * stability_limit(p, grid, math.sqrt(v.sup_sq_bound))))))
        dt = cfg["T"] / steps
    config = IntegratorConfig(dt=dt, scheme=cfg["scheme"], sample_every=cfg["sample_every"],
                              energy_check_tol=cfg["energy_check_tol"], store_states=False)
    snaps = []
    every = cfg["snapshot_every"]

    def snapshot_cb(t, m, row):
        k = len(snaps)
        snaps.append(t)
        if every and k % every == 0:
            io.save_snapshot(os.path.join(outdir, f"snapshot_{k:05d}.llgf"), m, p.delta, p.eps, t)

    a3 = {"sup_sq_bound": v.sup_sq_bound, "alpha_beta": p.alpha * p.beta, "admissible": v.admissible}
    _manifest(outdir, "simulate", cfg, p, {"a3_check": a3, "dt_used": dt})
    rows = []
    try:
        traj = simulate(m0, p, v, cfg["T"], config, ws, callbacks=[lambda t, m, r: rows.append(r), snapshot_cb],
                        t0=t0, E0=E0, v_integral0=vint)
    finally:
        io.write_csv(os.path.join(outdir, "trace.csv"), TRACE_COLUMNS, rows)
    final = os.path.join(outdir, "final.llgf")
    io.save_snapshot(final, traj.final, p.delta, p.eps, traj.t_final)
    io.save_sidecar(final, E0=traj.E0, v_integral=traj.v_integral, t=traj.t_final, dt=dt)
    return 0


def _bump_field(cfg, p, grid):
    ws1 = build_workspace_1d(grid.n)
    prof = relax_profile(neel_ansatz(p.delta, p.m1inf, grid.n), p.delta, ws1)
    m = extrude(prof, grid)
    X1, X2 = grid.coords()
    dx2 = np.mod(X2 - cfg["bump_x2"] + 0.5, 1.0) - 0.5
    psi = cfg["bump_amplitude"] * np.exp(-((X1 - cfg["bump_x1"]) ** 2 + dx2**2) / cfg["bump_radius"] ** 2)
    out = np.empty_like(m)
    out[..., :2] = m[..., :2] * np.cos(psi)[..., None]
    out[..., 2] = np.sin(psi)
    out[0], out[-1] = m[0], m[-1]
    return out


def run_project_s1(cfg, outdir):
    p = _params(cfg)
    if cfg["input"]:
        m = io.load_snapshot(cfg["input"]).m
        grid = _grid_for(m)
    else:
        grid = GridSpec(cfg["n"])
        m = _bump_field(cfg, p, grid)
    ws = build_workspace(grid)
    res = approximate(m, p, cfg["beta_grid"], ws, workers=_threads())
    rep = approx_report(m, res.M, p, ws, cfg["beta_grid"])
    io.write_csv(os.path.join(outdir, "cells.csv"), CELL_COLUMNS, res.cell_rows())
    keys = sorted(rep)
    io.write_csv(os.path.join(outdir, "report.csv"), keys, [[rep[k] for k in keys]])
    M3 = np.concatenate([res.M, np.zeros(grid.shape + (1,))], axis=-1)
    io.save_snapshot(os.path.join(outdir, "M.llgf"), M3, p.delta, p.eps, 0.0)
    cg = res.cellgrid
    _manifest(outdir, "project-s1", cfg, p, {
        "net": {"spacing": cg.spacing, "shift_t": cg.shift_t, "shift_s": cg.shift_s,
                "chosen_line_energy": cg.chosen_line_energy, "pigeonhole_bound": cg.pigeonhole_bound},
        "eta": res.eta})
    return 0 if all(s.degree == 0 for s in res.solutions) else 4


def _stationarity_row(delta, cfg):
    p = ModelParams(delta, delta * delta, cfg["nu"], delta, cfg["m1inf"])
    grid = GridSpec(cfg["n"])
    ws = build_workspace(grid)
    m0 = extrude(neel_ansatz(delta, p.m1inf, grid.n), grid)
    steps = max(1, int(math.ceil(cfg["T"] / (0.8 * stability_limit(p, grid)))))
    dt = cfg["T"] / steps
    sample = max(1, steps // 50)
    traj = simulate(m0, p, None, cfg["T"], IntegratorConfig(dt=dt, sample_every=sample), ws)
    r = time_derivative_norms(traj)
    return (delta, p.eps, p.lam, cfg["T"], r["l2"], r["hminus1"], r["displacement"],
            traj.ledger[0][4], traj.ledger[-1][4])


def run_sweep(cfg, outdir):
    deltas = cfg["deltas"]
    if not deltas:
        raise ValidationError("sweep: empty delta list")
    for d in deltas:
        if not 0.0 < d < 0.5:
            raise ValidationError(f"sweep: delta={d!r} violates 0 < delta < 1/2")
    kind = cfg["kind"]
    if kind == "wall":
        job = lambda d: wall_row(d, cfg["m1inf"], cfg["n"], "ansatz", cfg["tol"])[0]  # noqa: E731
        header, name = WALL_COLUMNS, "sweep_wall.csv"
    elif kind == "stationarity":
        job = lambda d: _stationarity_row(d, cfg)  # noqa: E731
        header, name = STATIONARITY_COLUMNS, "sweep_stationarity.csv"
    else:
        raise ValidationError(f"sweep: unknown kind {kind!r}")
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(job, deltas))
    io.write_csv(os.path.join(outdir, name), header, rows)
    _manifest(outdir, "sweep", cfg)
    return 0


def run_diagnose(cfg, outdir):
    p = _params(cfg)
    if cfg["input"]:
        m = io.load_snapshot(cfg["input"]).m
        grid = _grid_for(m)
    else:
        grid = GridSpec(cfg["n"])
        m = _initial_field(cfg["init"], p, grid, cfg["x1_star"])
    ws = build_workspace(grid)
    if cfg["relax"]:
        m, _ = relax_field(m, p, ws)
    rep = concentration_report(m, p, ws)
    row = (rep.x1_star, rep.rescaled_energy, rep.mass_in_strip(0.1), rep.mass_in_strip(0.2), rep.mass_in_strip(0.5))
    io.write_csv(os.path.join(outdir, "concentration.csv"), CONCENTRATION_COLUMNS, [row])
    _manifest(outdir, "diagnose", cfg, p, {"energy": energy(m, p, ws).total})
    return 0


def run_vortex_probe(cfg, outdir):
    res = vortex_probe(cfg["eps_list"], cfg["n"])
    rows = [(e, abs(math.log(e)), E, res.continuum(e)) for e, E in zip(res.eps, res.energy)]
    io.write_csv(os.path.join(outdir, "vortex.csv"), VORTEX_COLUMNS, rows)
    _manifest(outdir, "vortex-probe", cfg, extra={"slope": res.slope, "intercept": res.intercept,
                                                  "slope_over_2pi": res.slope / (2 * math.pi)})
    return 0


RUNNERS = {
    "relax-wall": run_relax_wall,
    "simulate": run_simulate,
    "project-s1": run_project_s1,
    "sweep": run_sweep,
    "diagnose": run_diagnose,
    "vortex-probe": run_vortex_probe,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args.command, args)
        os.makedirs(args.out, exist_ok=True)
        return RUNNERS[args.command](cfg, args.out)
    except ThinFilmError as exc:
        print(f"thinfilm {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
