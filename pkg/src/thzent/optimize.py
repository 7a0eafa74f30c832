"""Concurrence optimisation, parameter maps, drive-plane scans and full-model checks."""
from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares, minimize

from .conditions import InfeasiblePoint, condition_residuals, reduce_parameters
from .models import (
    SystemParams,
    ValidityWarning,
    build_full_model,
    build_grwa_model,
    dressed_frame,
    dressed_number_operator,
    emitter_state,
)
from .observables import concurrence, steady_report
from .qcore import SolverError, period_averaged_steady

THETA_BOUNDS = (0.26, math.pi / 4)


@dataclass
class Cavity:
    """Cavity and emitter constants shared by a search (frequencies in GHz)."""

    chi: float
    kappa: float
    f_thz: float
    gamma: float = 0.03979
    omega_max: float = 500.0

    def validity(self, theta: float | None = None) -> dict:
        """Adiabatic (``kappa >= 2 c s chi``) and RWA (``f_thz >= 10 kappa``) flags."""
        if theta is None:
            theta = reference_theta(self)
        cs = 0.5 * math.sin(2 * theta)
        return {
            "adiabatic": self.kappa >= 2 * cs * self.chi,
            "rwa": self.f_thz >= 10 * self.kappa,
        }


def reference_theta(cav: Cavity) -> float:
    """Carrier mixing angle at resonance (``Delta_R = 0``) under the drive cap."""
    rr = cav.f_thz + 8 * cav.chi ** 2 / cav.f_thz
    return 0.5 * math.asin(min(1.0, cav.omega_max / rr))


def reference_purcell(cav: Cavity) -> float:
    th = reference_theta(cav)
    return 4 * (math.sin(2 * th) * cav.chi) ** 2 / cav.kappa


@dataclass
class OptimResult:
    omega_r_tilde: float
    theta_tilde: float
    concurrence: float
    evaluations: int
    converged: bool
    validity: dict
    params: SystemParams | None = None
    g2: float = float("nan")
    message: str = ""
    verified: float = float("nan")  # concurrence re-evaluated with a larger Fock cutoff

    @property
    def best(self):
        return self.omega_r_tilde, self.theta_tilde

    @property
    def valid(self) -> bool:
        return all(self.validity.values())


def _objective(cav: Cavity, n_fock: int):
    cache = {}

    def point(w, th):
        key = (w, th)
        if key not in cache:
            try:
                p = reduce_parameters(w, th, cav.omega_max, cav.chi, cav.kappa, cav.f_thz,
                                      cav.gamma, n_fock)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", ValidityWarning)
                    rep = steady_report(build_grwa_model(p, warn=False))
                cache[key] = (rep.concurrence, rep.g2_cross, p)
            except (InfeasiblePoint, SolverError, ValueError):
                cache[key] = (float("nan"), float("nan"), None)
        return cache[key]

    return point, cache


def maximize_concurrence(cav: Cavity, grid=(12, 12), n_fock: int = 6,
                         theta_bounds=THETA_BOUNDS, omega_span=(1.0, 100.0),
                         xtol: float = 1e-4, max_iter: int = 400,
                         n_fock_verify: int | None = None) -> OptimResult:
    """Largest steady-state concurrence over ``(W~_R,1, theta~_1)``.

    A log-spaced grid over ``W~`` in ``omega_span`` times the reference Purcell
    rate and a linear grid over ``theta_bounds`` seeds a Nelder-Mead
    refinement in ``(log W~, theta~)``. Deterministic. With ``n_fock_verify``
    the optimum is re-evaluated at that Fock cutoff and stored in ``verified``.

    Raises
    ------
    InfeasiblePoint
        If no grid point admits a drive configuration.
    """
    if min(cav.chi, cav.kappa, cav.f_thz) <= 0 or cav.gamma < 0:
        raise ValueError("cavity parameters must be positive")
    point, cache = _objective(cav, n_fock)
    gref = reference_purcell(cav)
    if cav.omega_max <= 0 or gref <= 0:
        raise InfeasiblePoint("no dressing possible without a carrier drive")
    ws = gref * np.logspace(math.log10(omega_span[0]), math.log10(omega_span[1]), grid[0])
    lo, hi = theta_bounds
    # open interval: skip both end points
    ths = np.linspace(lo, hi, grid[1] + 2)[1:-1]
    best = (-1.0, None)
    for w in ws:
        for th in ths:
            c = point(float(w), float(th))[0]
            if np.isfinite(c) and c > best[0]:
                best = (c, (float(w), float(th)))
    if best[1] is None:
        raise InfeasiblePoint("all grid points infeasible")

    def f(x):
        w = math.exp(x[0])
        th = x[1]
        if not lo < th < hi:
            return 1.0
        c = point(w, float(th))[0]
        return -c if np.isfinite(c) else 1.0

    x0 = np.array([math.log(best[1][0]), best[1][1]])
    step = np.array([math.log(ws[1] / ws[0]) / 2, (ths[1] - ths[0]) / 2])
    simplex = np.array([x0, x0 + [step[0], 0], x0 + [0, step[1]]])
    res = minimize(f, x0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": xtol, "fatol": 1e-10,
                            "maxiter": max_iter})
    if -res.fun >= best[0]:
        w, th = math.exp(res.x[0]), float(res.x[1])
    else:
        w, th = best[1]
    c, g2, p = point(w, th)
    fr = dressed_frame(p)
    out = OptimResult(w, th, c, len(cache), bool(res.success), cav.validity(fr.theta[0]), p, g2,
                      str(res.message))
    if n_fock_verify is not None:
        out.verified = steady_report(build_grwa_model(p.replace(n_fock=n_fock_verify),
                                                      warn=False)).concurrence
    return out


# --------------------------------------------------------------------------
# maps over (chi, kappa)
# --------------------------------------------------------------------------


@dataclass
class Axis:
    name: str
    lo: float
    hi: float
    points: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.points <= 0:
            return np.zeros(0)
        if self.scale == "log":
            return np.logspace(math.log10(self.lo), math.log10(self.hi), self.points)
        if self.scale != "linear":
            raise ValueError(f"unknown axis scale {self.scale!r}")
        return np.linspace(self.lo, self.hi, self.points)


@dataclass
class SweepGrid:
    axes: tuple
    base: dict
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([r.get(name, np.nan) for r in self.rows], dtype=float)

    def best(self):
        ok = [r for r in self.rows if r.get("status") == "ok"]
        return max(ok, key=lambda r: r["concurrence"]) if ok else None


MAP_COLUMNS = ["i", "j", "chi", "kappa", "f_thz", "concurrence", "verified", "g2", "omega_r_tilde",
               "theta_tilde", "evaluations", "adiabatic", "rwa", "status", "reason"]


def _map_task(args):
    i, j, chi, kappa, cav_kw, opt_kw = args
    cav = Cavity(chi=chi, kappa=kappa, **cav_kw)
    row = {"i": i, "j": j, "chi": chi, "kappa": kappa, "f_thz": cav.f_thz}
    try:
        r = maximize_concurrence(cav, **opt_kw)
    except (InfeasiblePoint, SolverError, ValueError) as exc:
        row.update(status="failed", reason=str(exc), concurrence=np.nan, verified=np.nan, g2=np.nan,
                   omega_r_tilde=np.nan, theta_tilde=np.nan, evaluations=0,
                   **cav.validity())
        return row
    row.update(status="ok", reason="", concurrence=r.concurrence, verified=r.verified, g2=r.g2,
               omega_r_tilde=r.omega_r_tilde, theta_tilde=r.theta_tilde,
               evaluations=r.evaluations, **r.validity)
    return row


def sweep_map(chi_axis: Axis, kappa_axis: Axis, f_thz: float, gamma: float = 0.03979,
              omega_max: float = 500.0, threads: int = 1, **opt_kw) -> SweepGrid:
    """Optimal concurrence (and optimal ``W~``, ``theta~``) on a ``(chi, kappa)`` grid.

    Each grid point runs :func:`maximize_concurrence` independently; failures
    are recorded per row and the sweep continues. Rows come back in grid order
    whatever the number of worker processes.
    """
    cav_kw = {"f_thz": f_thz, "gamma": gamma, "omega_max": omega_max}
    tasks = [
        (i, j, float(ch), float(ka), cav_kw, opt_kw)
        for i, ch in enumerate(chi_axis.values())
        for j, ka in enumerate(kappa_axis.values())
    ]
    grid = SweepGrid((chi_axis, kappa_axis), dict(cav_kw, **opt_kw))
    if not tasks:
        return grid
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(_map_task, tasks))
    else:
        rows = [_map_task(t) for t in tasks]
    grid.rows = sorted(rows, key=lambda r: (r["i"], r["j"]))
    return grid


# --------------------------------------------------------------------------
# drive plane (Omega_1, Omega_2)
# --------------------------------------------------------------------------


@dataclass
class DrivePlane:
    omega1: np.ndarray
    omega2: np.ndarray
    concurrence: np.ndarray  # shape (len(omega1), len(omega2))
    g2: np.ndarray
    curves: dict  # condition index -> array of (omega1, omega2) zero points
    intersection: tuple | None = None  # (omega1, omega2, residual rms)
    maximum: tuple | None = None  # refined (omega1, omega2, concurrence)

    def cell_offset(self):
        """Offset of the condition intersection from the concurrence maximum, in grid cells."""
        if self.intersection is None or self.maximum is None:
            return None
        d1 = abs(self.intersection[0] - self.maximum[0]) / abs(self.omega1[1] - self.omega1[0])
        d2 = abs(self.intersection[1] - self.maximum[1]) / abs(self.omega2[1] - self.omega2[0])
        return float(d1), float(d2)

    def argmax(self):
        k = np.nanargmax(self.concurrence)
        return np.unravel_index(k, self.concurrence.shape)

    def pearson(self) -> float:
        c = self.concurrence.ravel()
        g = self.g2.ravel()
        ok = np.isfinite(c) & np.isfinite(g)
        return float(np.corrcoef(c[ok], g[ok])[0, 1])


def _plane_task(args):
    p, = args
    try:
        rep = steady_report(build_grwa_model(p, warn=False))
        return rep.concurrence, rep.g2_cross
    except SolverError:
        return np.nan, np.nan


def condition_curve(base: SystemParams, index: int, omega1: np.ndarray, bracket) -> np.ndarray:
    """Points ``(Omega_1, Omega_2)`` where residual ``index`` vanishes.

    For each ``Omega_1`` the residual is tracked along ``Omega_2`` over
    ``bracket`` and every sign change is refined with Brent's method.
    """
    lo, hi = bracket
    probe = np.linspace(lo, hi, 201)
    out = []

    def r(o1, o2):
        rep = condition_residuals(base.replace(omega=(o1, o2)))
        return (rep.residual0, rep.residual1, rep.residual2)[index]

    for o1 in omega1:
        vals = np.array([r(o1, o2) for o2 in probe])
        for k in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
            out.append((o1, brentq(lambda x: r(o1, x), probe[k], probe[k + 1], xtol=1e-10)))
    return np.array(out).reshape(-1, 2)


def _residual_vector(base: SystemParams, o1: float, o2: float) -> np.ndarray:
    rep = condition_residuals(base.replace(omega=(float(o1), float(o2))))
    return np.array([rep.residual0, rep.residual1, rep.residual2])


def curves_intersection(base: SystemParams, omega1: np.ndarray, omega2: np.ndarray):
    """Point of the plane where the three condition residuals are jointly closest to zero.

    The grid node with the smallest residual norm seeds a least-squares solve
    of ``(r0, r1, r2) = 0`` in ``(Omega_1, Omega_2)``; the residuals share the
    frequency unit, so no weighting is applied. Returns ``(Omega_1, Omega_2, rms)``
    or None for an empty plane.
    """
    if not len(omega1) or not len(omega2):
        return None
    norms = np.array([[np.sum(_residual_vector(base, a, b) ** 2) for b in omega2] for a in omega1])
    i, j = np.unravel_index(np.argmin(norms), norms.shape)
    sol = least_squares(lambda x: _residual_vector(base, *x), x0=[omega1[i], omega2[j]],
                        xtol=1e-12, ftol=1e-12, gtol=1e-12)
    rms = float(np.sqrt(np.mean(sol.fun ** 2)))
    return float(sol.x[0]), float(sol.x[1]), rms


def refine_maximum(base: SystemParams, start, scale: float = 1.0):
    """Off-grid concurrence maximum in the drive plane, started from a grid node.

    Returns ``(Omega_1, Omega_2, C)``.
    """
    def negc(x):
        try:
            return -steady_report(build_grwa_model(base.replace(omega=(x[0], x[1])),
                                                   warn=False)).concurrence
        except SolverError:
            return 1.0

    res = minimize(negc, np.asarray(start, float), method="Nelder-Mead",
                   options={"xatol": 1e-3 * scale, "fatol": 1e-9,
                            "initial_simplex": [start, (start[0] + scale, start[1]),
                                                (start[0], start[1] + scale)]})
    return float(res.x[0]), float(res.x[1]), float(-res.fun)


def drive_plane(base: SystemParams, omega1: np.ndarray, omega2: np.ndarray,
                threads: int = 1, refine: bool = True) -> DrivePlane:
    """Concurrence and ``g12`` over the carrier-amplitude plane with the condition curves.

    Besides the sampled zero sets of the three residuals, the result carries
    their joint least-squares root and (with ``refine``) the off-grid
    concurrence maximum seeded from the best grid node.
    """
    omega1 = np.asarray(omega1, float)
    omega2 = np.asarray(omega2, float)
    tasks = [(base.replace(omega=(float(a), float(b))),) for a in omega1 for b in omega2]
    if threads > 1 and tasks:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            vals = list(ex.map(_plane_task, tasks, chunksize=16))
    else:
        vals = [_plane_task(t) for t in tasks]
    arr = np.array(vals, dtype=float).reshape(len(omega1), len(omega2), 2)
    curves = {}
    if len(omega1) and len(omega2):
        br = (omega2[0], omega2[-1])
        for k in range(3):
            curves[k] = condition_curve(base, k, omega1, br)
    dp = DrivePlane(omega1, omega2, arr[..., 0], arr[..., 1], curves,
                    curves_intersection(base, omega1, omega2))
    if refine and len(omega1) > 1 and len(omega2) > 1 and np.isfinite(arr[..., 0]).any():
        i, j = dp.argmax()
        step = min(abs(omega1[1] - omega1[0]), abs(omega2[1] - omega2[0]))
        dp.maximum = refine_maximum(base, (omega1[i], omega2[j]), 0.5 * step)
    return dp


# --------------------------------------------------------------------------
# full-model cross-check
# --------------------------------------------------------------------------


@dataclass
class FullValidation:
    c_grwa: float
    c_full: float
    delta: float
    oscillation: float
    periods: float
    residual: float


def validate_full(p: SystemParams, n_fock: int | None = None, tol: float = 1e-6) -> FullValidation:
    """Compare the GRWA concurrence with the period-averaged full time-periodic model.

    The full model starts in the bare ground state; its long-time state is
    averaged over one drive period in the frame that rotates with the dressed
    excitation number, so that the averages keep the slow coherences.
    """
    if n_fock is not None:
        p = p.replace(n_fock=n_fock)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        c_grwa = steady_report(build_grwa_model(p, warn=False)).concurrence
    if max(p.chi) == 0.0:
        m = build_full_model(p)
        info = period_averaged_steady(m, _ground(m.dim), tol=tol, return_info=True)
    else:
        m = build_full_model(p)
        info = period_averaged_steady(m, _ground(m.dim), tol=tol,
                                      frame=dressed_number_operator(p), return_info=True)
    c_full = concurrence(emitter_state(info.rho, m))
    return FullValidation(c_grwa, c_full, c_grwa - c_full, info.oscillation, info.periods,
                          info.residual)


def _ground(d: int) -> np.ndarray:
    # bare |g g 0>: both emitters in the lower level (index 1), cavity empty
    rho = np.zeros((d, d), complex)
    n = d // 4
    k = (1 * 2 + 1) * n
    rho[k, k] = 1.0
    return rho


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def fmt(x) -> str:
    """Float with 17 significant digits; other values via ``str``."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c, "")) for c in columns])
    return buf.getvalue()


def params_dict(p: SystemParams) -> dict:
    return asdict(p)
