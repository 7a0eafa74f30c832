"""Command-line entry point: ``thzent <command> --config run.ini --out results/``.

Each command reads one INI file (frequencies in GHz, angles in radians),
writes a data CSV, a JSON manifest and a plain-text summary into ``--out``.
Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 infeasible point.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import math
import os
import platform
import sys
import warnings
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from . import conditions, models, observables, optimize, qcore, tomography

log = logging.getLogger("thzent")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 2, 3, 4
ENV_PREFIX = "THZENT_"


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# configuration schema
# --------------------------------------------------------------------------


def _floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def _ints(text):
    return [int(float(x)) for x in text.replace(",", " ").split()]


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_SYSTEM = {
    "f_thz": (float, 1000.0),
    "delta1": (float, 0.0),
    "delta2": (float, 0.0),
    "omega1": (float, 0.0),
    "omega2": (float, 0.0),
    "omega_sb1": (float, 0.0),
    "omega_sb2": (float, 0.0),
    "chi": (float, 0.0),
    "chi2": (float, None),
    "kappa": (float, 0.0),
    "gamma": (float, 0.03979),
    "gamma2": (float, None),
    "n_fock": (int, 6),
}

SCHEMA = {
    "system": _SYSTEM,
    "spectrum": {
        "model": (str, "adiabatic"),
        "zero_j": (_bool, True),
        "thz_min": (float, None),
        "thz_max": (float, None),
        "thz_points": (int, 2001),
        "vis_min": (float, None),
        "vis_max": (float, None),
        "vis_points": (int, 4001),
    },
    "optimize": {
        "chi": (float, 24.4),
        "kappa": (float, 59.6),
        "f_thz": (float, 1000.0),
        "gamma": (float, 0.03979),
        "omega_max": (float, 500.0),
        "grid_omega": (int, 12),
        "grid_theta": (int, 12),
        "theta_min": (float, optimize.THETA_BOUNDS[0]),
        "theta_max": (float, optimize.THETA_BOUNDS[1]),
        "n_fock": (int, 6),
        "n_fock_verify": (int, 10),
    },
    "map": {
        "f_thz": (float, 1000.0),
        "gamma": (float, 0.03979),
        "omega_max": (float, 500.0),
        "chi_min": (float, 10.0),
        "chi_max": (float, 100.0),
        "chi_points": (int, 6),
        "chi_scale": (str, "log"),
        "kappa_min": (float, 10.0),
        "kappa_max": (float, 100.0),
        "kappa_points": (int, 6),
        "kappa_scale": (str, "log"),
        "grid_omega": (int, 12),
        "grid_theta": (int, 12),
        "n_fock": (int, 6),
    },
    "driveplane": {
        "omega1_min": (float, None),
        "omega1_max": (float, None),
        "omega1_points": (int, 41),
        "omega2_min": (float, None),
        "omega2_max": (float, None),
        "omega2_points": (int, 41),
    },
    "tomography": {
        "state": (str, "system"),
        "n_shot": (_ints, [100, 1000, 10000, 100000, 1000000]),
        "eta_e": (_floats, [0.01, 0.25, 0.5, 0.75, 0.9, 1.0]),
        "eta_g": (float, 0.99),
        "n_ave": (int, 50),
        "mode": (str, "ideal"),
        "preset": (str, "fast"),
        "omega_u": (float, None),
        "duration": (float, None),
    },
    "validate": {
        "n_fock": (int, 4),
        "tol": (float, 1e-6),
    },
    "gap": {
        "purcell": (float, 10.0),
        "omega_r_tilde": (float, 16.0),
        "theta_min": (float, 0.3),
        "theta_max": (float, math.pi / 4 - 0.02),
        "points": (int, 41),
    },
}

COMMAND_SECTIONS = {
    "spectrum": ("system", "spectrum"),
    "optimize": ("optimize",),
    "map": ("map",),
    "driveplane": ("system", "driveplane"),
    "tomography": ("system", "tomography"),
    "validate": ("system", "validate"),
    "gap": ("gap",),
}


def _line_of(path: str | None, section: str, key: str | None = None) -> str:
    if not path:
        return ""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError:
        return ""
    cur = None
    for n, raw in enumerate(lines, 1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            cur = s[1:-1].strip()
            if key is None and cur == section:
                return f"{path}:{n}: "
        elif cur == section and key is not None and s.split("=")[0].split(":")[0].strip() == key:
            return f"{path}:{n}: "
    return f"{path}: "


def load_config(command: str, path: str | None = None, environ=None) -> dict:
    """Parse and validate the INI file for ``command``; unknown sections/keys are errors.

    ``THZENT_<SECTION>_<KEY>`` environment variables override file values.
    """
    environ = os.environ if environ is None else environ
    cp = configparser.ConfigParser(interpolation=None)
    if path:
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (configparser.Error, OSError) as exc:
            raise ConfigError(f"{path}: {exc}") from None
    allowed = COMMAND_SECTIONS[command]
    for sec in cp.sections():
        if sec not in allowed:
            raise ConfigError(f"{_line_of(path, sec)}section [{sec}] not used by '{command}'")
    out = {}
    for sec in allowed:
        schema = SCHEMA[sec]
        vals = {}
        raw = dict(cp[sec]) if cp.has_section(sec) else {}
        for k in raw:
            if k not in schema:
                raise ConfigError(f"{_line_of(path, sec, k)}unknown key '{k}' in [{sec}]")
        for k, (typ, default) in schema.items():
            env = environ.get(f"{ENV_PREFIX}{sec.upper()}_{k.upper()}")
            text = env if env is not None else raw.get(k)
            if text is None:
                vals[k] = default
                continue
            try:
                vals[k] = typ(text)
            except ValueError as exc:
                where = "environment" if env is not None else _line_of(path, sec, k)
                raise ConfigError(f"{where}bad value for [{sec}] {k}: {exc}") from None
        out[sec] = vals
    _validate(command, out)
    return out


def _validate(command, cfg):
    if "system" in cfg:
        s = cfg["system"]
        if s["f_thz"] <= 0 or s["n_fock"] < 2:
            raise ConfigError("[system] needs f_thz > 0 and n_fock >= 2")
        for k in ("kappa", "chi", "gamma"):
            if s[k] < 0:
                raise ConfigError(f"[system] {k} must be non-negative")
    if command == "spectrum" and cfg["spectrum"]["model"] not in ("adiabatic", "grwa"):
        raise ConfigError("[spectrum] model must be 'adiabatic' or 'grwa'")
    if command == "map":
        for ax in ("chi", "kappa"):
            if cfg["map"][f"{ax}_scale"] not in ("linear", "log"):
                raise ConfigError(f"[map] {ax}_scale must be linear or log")
            if cfg["map"][f"{ax}_points"] < 0:
                raise ConfigError(f"[map] {ax}_points must be >= 0")
    if command == "tomography":
        t = cfg["tomography"]
        if t["mode"] not in ("ideal", "pulsed") or t["state"] not in ("system", "bell"):
            raise ConfigError("[tomography] mode must be ideal|pulsed, state system|bell")
        if t["preset"] not in ("fast", "slow", "custom"):
            raise ConfigError("[tomography] preset must be fast|slow|custom")
        if not 0 <= t["eta_g"] <= 1 or any(not 0 <= e <= 1 for e in t["eta_e"]):
            raise ConfigError("[tomography] efficiencies must lie in [0, 1]")
        if t["n_ave"] < 1 or any(n < 0 for n in t["n_shot"]):
            raise ConfigError("[tomography] n_ave >= 1 and n_shot >= 0 required")


def system_params(s: dict) -> models.SystemParams:
    chi2 = s["chi"] if s["chi2"] is None else s["chi2"]
    g2 = s["gamma"] if s["gamma2"] is None else s["gamma2"]
    return models.SystemParams(
        f_thz=s["f_thz"], delta=(s["delta1"], s["delta2"]), omega=(s["omega1"], s["omega2"]),
        omega_sb=(s["omega_sb1"], s["omega_sb2"]), chi=(s["chi"], chi2), kappa=s["kappa"],
        gamma=(s["gamma"], g2), n_fock=s["n_fock"],
    )


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def manifest_hash(command: str, cfg: dict, seed: int) -> str:
    """SHA-256 over the canonical JSON of everything that determines the output."""
    blob = json.dumps({"command": command, "config": _jsonable(cfg), "seed": seed},
                      sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


class Output:
    def __init__(self, out: Path, command: str, cfg: dict, seed: int):
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.hash = manifest_hash(command, cfg, seed)
        self.cfg = cfg
        self.seed = seed
        self.files = []

    def csv(self, name: str, rows, columns):
        text = f"# manifest_sha256={self.hash}\n" + optimize.rows_to_csv(rows, columns)
        (self.out / name).write_text(text)
        self.files.append(name)

    def json(self, name: str, obj):
        obj = dict(obj, manifest_sha256=self.hash)
        (self.out / name).write_text(json.dumps(_jsonable(obj), indent=1, sort_keys=True) + "\n")
        self.files.append(name)

    def finish(self, summary_lines, extra=None):
        (self.out / "summary.txt").write_text(
            f"manifest_sha256={self.hash}\n" + "\n".join(summary_lines) + "\n")
        man = {
            "command": self.command,
            "config": self.cfg,
            "seed": self.seed,
            "manifest_sha256": self.hash,
            "files": self.files + ["summary.txt"],
            "versions": {"thzent": _version(), "numpy": np.__version__,
                         "scipy": scipy.__version__, "python": platform.python_version()},
        }
        if extra:
            man["results"] = extra
        (self.out / "manifest.json").write_text(
            json.dumps(_jsonable(man), indent=1, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

SPECTRUM_COLUMNS = ["regime", "emitter", "frequency", "intensity", "normalized"]


def cmd_spectrum(cfg, out: Output, threads: int, seed: int):
    p = system_params(cfg["system"])
    sc = cfg["spectrum"]
    if sc["model"] == "adiabatic":
        m = models.build_adiabatic_model(p, warn=False, J=0.0 if sc["zero_j"] else None)
    else:
        m = models.build_grwa_model(p, warn=False)
    fr = models.dressed_frame(p)
    span = max(20.0, 4 * max(p.omega_sb))
    lo = sc["thz_min"] if sc["thz_min"] is not None else min(fr.omega_r) - span
    hi = sc["thz_max"] if sc["thz_max"] is not None else max(fr.omega_r) + span
    rows, summary = [], []
    grid = np.linspace(lo, hi, sc["thz_points"])
    for i in range(2):
        op = qcore.embed(qcore.SIGMA_MINUS, i, m.dims)
        sp = observables.emission_spectrum(m, op, grid, shift=p.f_thz, emitter_index=i)
        norm = sp.normalized()
        rows += [{"regime": "thz", "emitter": i + 1, "frequency": f, "intensity": v,
                  "normalized": n} for f, v, n in zip(grid, sp.intensities, norm)]
        summary.append(f"emitter {i + 1} THz peaks (GHz): "
                       + ", ".join(f"{x:.4f}" for x in sp.peaks()))
    vlo = sc["vis_min"] if sc["vis_min"] is not None else -p.f_thz - 3 * span
    vhi = sc["vis_max"] if sc["vis_max"] is not None else p.f_thz + 3 * span
    if sc["model"] == "adiabatic" and sc["vis_points"] > 0:
        vgrid = np.linspace(vlo, vhi, sc["vis_points"])
        for i in range(2):
            sp = observables.visible_spectrum(m, i, vgrid, p.f_thz)
            norm = sp.normalized()
            rows += [{"regime": "visible", "emitter": i + 1, "frequency": f, "intensity": v,
                      "normalized": n} for f, v, n in zip(vgrid, sp.intensities, norm)]
    out.csv("spectrum.csv", rows, SPECTRUM_COLUMNS)
    return summary, {}


OPT_COLUMNS = ["chi", "kappa", "f_thz", "concurrence", "verified", "g2", "omega_r_tilde",
               "theta_tilde", "evaluations", "converged", "adiabatic", "rwa", "delta1", "delta2",
               "omega1", "omega2", "omega_sb1", "omega_sb2"]


def _param_cols(p):
    return {"delta1": p.delta[0], "delta2": p.delta[1], "omega1": p.omega[0],
            "omega2": p.omega[1], "omega_sb1": p.omega_sb[0], "omega_sb2": p.omega_sb[1]}


def cmd_optimize(cfg, out: Output, threads: int, seed: int):
    o = cfg["optimize"]
    cav = optimize.Cavity(o["chi"], o["kappa"], o["f_thz"], o["gamma"], o["omega_max"])
    r = optimize.maximize_concurrence(cav, grid=(o["grid_omega"], o["grid_theta"]),
                                      n_fock=o["n_fock"], theta_bounds=(o["theta_min"], o["theta_max"]),
                                      n_fock_verify=o["n_fock_verify"])
    row = {"chi": cav.chi, "kappa": cav.kappa, "f_thz": cav.f_thz, "concurrence": r.concurrence,
           "verified": r.verified, "g2": r.g2, "omega_r_tilde": r.omega_r_tilde,
           "theta_tilde": r.theta_tilde, "evaluations": r.evaluations, "converged": r.converged,
           **r.validity, **_param_cols(r.params)}
    out.csv("optimize.csv", [row], OPT_COLUMNS)
    return [f"C = {r.concurrence:.6f} (n_fock {o['n_fock_verify']}: {r.verified:.6f}) at "
            f"W~ = {r.omega_r_tilde:.6g} GHz, theta~ = {r.theta_tilde:.6g}",
            f"validity: {r.validity}"], {"concurrence": r.concurrence}


def cmd_map(cfg, out: Output, threads: int, seed: int):
    c = cfg["map"]
    ax = [optimize.Axis(n, c[f"{n}_min"], c[f"{n}_max"], c[f"{n}_points"], c[f"{n}_scale"])
          for n in ("chi", "kappa")]
    g = optimize.sweep_map(ax[0], ax[1], c["f_thz"], c["gamma"], c["omega_max"], threads=threads,
                           grid=(c["grid_omega"], c["grid_theta"]), n_fock=c["n_fock"])
    out.csv("map.csv", g.rows, optimize.MAP_COLUMNS)
    b = g.best()
    if b is None:
        return ["no successful grid points"], {}
    return [f"max C = {b['concurrence']:.6f} at chi = {b['chi']:.6g}, kappa = {b['kappa']:.6g}",
            f"failed points: {sum(r['status'] != 'ok' for r in g.rows)}"], \
        {"max_concurrence": b["concurrence"]}


PLANE_COLUMNS = ["omega1", "omega2", "concurrence", "g2"]
CURVE_COLUMNS = ["condition", "omega1", "omega2"]


def cmd_driveplane(cfg, out: Output, threads: int, seed: int):
    p = system_params(cfg["system"])
    d = cfg["driveplane"]

    def axis(k, centre):
        lo = d[f"omega{k}_min"] if d[f"omega{k}_min"] is not None else centre - 40.0
        hi = d[f"omega{k}_max"] if d[f"omega{k}_max"] is not None else centre + 40.0
        return np.linspace(lo, hi, d[f"omega{k}_points"])

    o1, o2 = axis(1, p.omega[0]), axis(2, p.omega[1])
    dp = optimize.drive_plane(p, o1, o2, threads=threads)
    rows = [{"omega1": a, "omega2": b, "concurrence": dp.concurrence[i, j], "g2": dp.g2[i, j]}
            for i, a in enumerate(o1) for j, b in enumerate(o2)]
    out.csv("driveplane.csv", rows, PLANE_COLUMNS)
    crow = [{"condition": k, "omega1": x, "omega2": y}
            for k, pts in dp.curves.items() for x, y in pts]
    out.csv("condition_curves.csv", crow, CURVE_COLUMNS)
    if not rows:
        return ["empty plane"], {}
    i, j = dp.argmax()
    return [f"max C = {dp.concurrence[i, j]:.6f} at ({o1[i]:.6g}, {o2[j]:.6g}) GHz",
            f"refined maximum: {dp.maximum}",
            f"condition intersection (omega1, omega2, rms residual): {dp.intersection}",
            f"intersection offset from maximum (cells): {dp.cell_offset()}",
            f"Pearson(C, g2) = {dp.pearson():.4f}"], {"intersection": dp.intersection,
                                                     "maximum": dp.maximum}


TOMO_COLUMNS = ["n_shot", "eta_e", "eta_g", "mean_fidelity", "std_fidelity", "singular"]


def _pulses(t, gamma):
    if t["mode"] != "pulsed":
        return None
    if t["preset"] == "custom":
        if t["omega_u"] is None:
            raise ConfigError("[tomography] preset=custom needs omega_u")
        return tomography.PulseSettings(t["omega_u"], t["duration"], gamma)
    return tomography.preset(t["preset"], gamma)


def cmd_tomography(cfg, out: Output, threads: int, seed: int):
    t = cfg["tomography"]
    p = system_params(cfg["system"])
    if t["state"] == "bell":
        phi = np.array([0, 1, -1, 0]) / math.sqrt(2)
        rho = qcore.QMatrix(np.outer(phi, phi).astype(complex), (2, 2))
    else:
        m = models.build_grwa_model(p, warn=False)
        rho = observables.steady_report(m).rho
    fm = tomography.fidelity_study(rho, t["n_shot"], t["eta_e"], t["eta_g"], t["n_ave"], seed,
                                   threads=threads, mode=t["mode"], pulses=_pulses(t, p.gamma[0]))
    rows = [{"n_shot": int(n), "eta_e": e, "eta_g": t["eta_g"], "mean_fidelity": fm.mean[i, j],
             "std_fidelity": fm.std[i, j], "singular": bool(fm.singular[i, j])}
            for i, n in enumerate(fm.n_shot) for j, e in enumerate(fm.eta_e)]
    out.csv("tomography.csv", rows, TOMO_COLUMNS)
    raw = [{"n_shot": int(n), "eta_e": e, "realization": k, "fidelity": fm.raw[i, j, k]}
           for i, n in enumerate(fm.n_shot) for j, e in enumerate(fm.eta_e)
           for k in range(fm.raw.shape[2])]
    out.csv("tomography_raw.csv", raw, ["n_shot", "eta_e", "realization", "fidelity"])
    per, tot = tomography.wall_clock_estimate(max(t["n_shot"], default=0), p.gamma[0])
    return [f"reference concurrence = {observables.concurrence(rho):.6f}",
            f"acquisition time at n_shot={max(t['n_shot'], default=0)}: "
            f"{per:.4g} s per setting, {tot:.4g} s total"], {}


VALIDATE_COLUMNS = ["c_grwa", "c_full", "delta", "oscillation", "periods", "residual"]


def cmd_validate(cfg, out: Output, threads: int, seed: int):
    p = system_params(cfg["system"])
    v = optimize.validate_full(p, n_fock=cfg["validate"]["n_fock"], tol=cfg["validate"]["tol"])
    out.csv("validate.csv", [vars(v)], VALIDATE_COLUMNS)
    return [f"C_grwa = {v.c_grwa:.6f}, C_full = {v.c_full:.6f}, delta = {v.delta:.3e}",
            f"period-averaged oscillation amplitude (trace distance) = {v.oscillation:.3e}"], \
        {"delta": v.delta}


GAP_COLUMNS = ["theta_tilde", "delta", "gap_all", "gap_stationary", "gap_exact", "gap_approx"]


def gap_rows(purcell, omega_r_tilde, thetas):
    rows = []
    for th in thetas:
        d = models.DoublyDressedFrame(
            (th, math.pi / 2 - th), (omega_r_tilde, omega_r_tilde),
            (math.cos(th), math.sin(th)), (math.sin(th), math.cos(th)), (purcell, purcell), 0.0)
        L = qcore.liouvillian(models.build_doubly_dressed_model(ddf=d, J=0.0, warn=False))
        rows.append({
            "theta_tilde": th,
            "delta": 2 * omega_r_tilde * math.cos(2 * th),
            "gap_all": observables.gap_numeric(L),
            "gap_stationary": observables.gap_numeric(L, sector="stationary"),
            "gap_exact": observables.gap_analytic(purcell, th, "exact"),
            "gap_approx": observables.gap_analytic(purcell, th, "approx"),
        })
    return rows


def cmd_gap(cfg, out: Output, threads: int, seed: int):
    g = cfg["gap"]
    th = np.linspace(g["theta_min"], g["theta_max"], g["points"])
    rows = gap_rows(g["purcell"], g["omega_r_tilde"], th)
    out.csv("gap.csv", rows, GAP_COLUMNS)
    if not rows:
        return ["empty theta axis"], {}
    err = max(abs(r["gap_stationary"] - r["gap_exact"]) / r["gap_exact"] for r in rows)
    return [f"max relative deviation (stationary sector vs closed form) = {err:.3e}"], \
        {"max_rel_error": err}


COMMANDS = {
    "spectrum": cmd_spectrum,
    "optimize": cmd_optimize,
    "map": cmd_map,
    "driveplane": cmd_driveplane,
    "tomography": cmd_tomography,
    "validate": cmd_validate,
    "gap": cmd_gap,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thzent", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="INI configuration file")
    ap.add_argument("--seed", type=int, default=None, help="base RNG seed (default 0)")
    ap.add_argument("--threads", type=int, default=None, help="worker processes (default 1)")
    ap.add_argument("--out", default="thzent_out", help="output directory")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None, environ=None) -> int:
    environ = os.environ if environ is None else environ
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        seed = args.seed if args.seed is not None else int(environ.get(ENV_PREFIX + "SEED", 0))
        threads = args.threads if args.threads is not None else int(
            environ.get(ENV_PREFIX + "THREADS", 1))
        if threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = load_config(args.command, args.config, environ)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Output(Path(args.out), args.command, cfg, seed)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", models.ValidityWarning)
            summary, extra = COMMANDS[args.command](cfg, out, threads, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (conditions.InfeasiblePoint, models.DegenerateFrameError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (qcore.SolverError, conditions.RootFindingError, np.linalg.LinAlgError,
            FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out.finish(summary, extra)
    for line in summary:
        print(line)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
