"""Dark-state conditions, the optical tuning strategy and the two-parameter reduction."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .models import (
    DoublyDressedFrame,
    SystemParams,
    build_grwa_model,
    doubly_dressed_frame,
    dressed_frame,
)


class InfeasiblePoint(ValueError):
    """No drive configuration satisfies the requested point within the caps."""


class RootFindingError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# residuals
# --------------------------------------------------------------------------


def epsilon_correction(ddf: DoublyDressedFrame, J: float | None = None) -> float:
    """Frequency offset ``eps`` required between the two doubly-dressed Rabi frequencies.

    ``J sin 2t1 sin 2t2 (R - 1/R)`` with ``R = sqrt(G1) c~1^2 / (sqrt(G2) c~2^2)``;
    reduces to ``4 J cos 2t`` for equal Purcell rates and complementary angles.
    """
    J = ddf.J if J is None else J
    if J == 0.0:
        return 0.0
    g1, g2 = ddf.purcell
    if g1 <= 0 or g2 <= 0:
        g1 = g2 = 1.0
    c1, c2 = ddf.c
    num = math.sqrt(g1) * c1 ** 2
    den = math.sqrt(g2) * c2 ** 2
    if num == 0 or den == 0:
        return math.copysign(math.inf, num - den)
    r = num / den
    return J * math.sin(2 * ddf.theta[0]) * math.sin(2 * ddf.theta[1]) * (r - 1.0 / r)


@dataclass
class ConditionReport:
    residual0: float
    residual1: float
    residual2: float
    epsilon: float
    satisfied: tuple
    tol: tuple = ()
    jump_residual: float = 0.0  # sqrt(G1) c~1 s~1 - sqrt(G2) c~2 s~2

    @property
    def all_satisfied(self) -> bool:
        return all(self.satisfied)


def condition_residuals(p: SystemParams, tol_cond: float | None = None,
                        tol_ratio: float = 1e-4) -> ConditionReport:
    """Signed residuals of Conditions 0, 1 and 2.

    ``residual0 = Omega1/Delta1 - Omega2/Delta2`` (cross-product form
    ``Omega1 Delta2 - Omega2 Delta1`` when a detuning vanishes),
    ``residual1 = Delta_R,1 + Delta_R,2``,
    ``residual2 = W~2 - W~1 - eps``. Frequencies in GHz.
    """
    tol_f = 1e-4 * p.f_thz if tol_cond is None else tol_cond
    fr = dressed_frame(p)
    ddf = doubly_dressed_frame(p, fr)
    if p.delta[0] == 0 or p.delta[1] == 0:
        r0 = p.omega[0] * p.delta[1] - p.omega[1] * p.delta[0]
        tol0 = tol_f
    else:
        r0 = p.omega[0] / p.delta[0] - p.omega[1] / p.delta[1]
        tol0 = tol_ratio
    r1 = fr.delta_r[0] + fr.delta_r[1]
    eps = epsilon_correction(ddf)
    r2 = ddf.omega_r[1] - ddf.omega_r[0] - eps
    g1, g2 = ddf.purcell
    jr = math.sqrt(g1) * ddf.c[0] * ddf.s[0] - math.sqrt(g2) * ddf.c[1] * ddf.s[1]
    sat = (abs(r0) <= tol0, abs(r1) <= tol_f, abs(r2) <= tol_f)
    return ConditionReport(r0, r1, r2, eps, sat, (tol0, tol_f, tol_f), jr)


def appb_eigen_system(ddf: DoublyDressedFrame, J: float | None = None, rates=None):
    """Energy of the dark state from the two eigenvalue equations and their mismatch.

    Returns ``(E, residual)`` where ``residual`` (difference of the two
    expressions for ``E``) vanishes exactly when the Condition-2 relation holds.
    """
    J = ddf.J if J is None else J
    g1, g2 = ddf.purcell if rates is None else rates
    w1, w2 = ddf.omega_r
    b = math.sin(2 * ddf.theta[0]) * math.sin(2 * ddf.theta[1])
    if J == 0.0 or b == 0.0:
        e1 = (w2 - w1) / 2
        e2 = (w1 - w2) / 2
    else:
        r = math.sqrt(g1) * ddf.c[0] ** 2 / (math.sqrt(g2) * ddf.c[1] ** 2)
        e1 = (w2 - w1) / 2 - J * b * r
        e2 = (w1 - w2) / 2 - J * b / r
    return 0.5 * (e1 + e2), e1 - e2


# --------------------------------------------------------------------------
# reduction to (W~_R, theta~)
# --------------------------------------------------------------------------


@dataclass
class ReducedPoint:
    omega_r_tilde: float
    theta_tilde: float
    omega_max: float
    derived: SystemParams | None = None
    theta: float = float("nan")
    flags: dict = field(default_factory=dict)


def solve_primary_angle(delta_r1: float, chi: float, f_thz: float, omega_max: float):
    """Carrier mixing angle ``theta`` with ``Omega_R,1 sin 2 theta = Omega_max``.

    ``Omega_R,1 = f_thz + 8 chi^2 u / f_thz + Delta_R,1`` with ``u = cos 2 theta``.
    The self-consistency ``u = sqrt(1 - (Omega_max / Omega_R,1(u))^2)`` is
    solved by bracketing on ``u`` in ``[0, 1]`` (plain fixed-point iteration
    converges slowly when ``theta`` approaches ``pi/4``). Returns
    ``(theta, Omega_R,1, capped)`` where ``capped`` is False when
    ``Omega_R,1 <= Omega_max`` forces ``theta = pi/4``.
    """
    shift = 8.0 * chi ** 2 / f_thz

    def rabi(u):
        return f_thz + shift * u + delta_r1

    def g(u):
        w = rabi(u)
        return u - (math.sqrt(1.0 - (omega_max / w) ** 2) if w > omega_max else 0.0)

    if rabi(0.0) <= 0 or rabi(1.0) <= 0:
        raise InfeasiblePoint("negative Rabi splitting")
    if g(0.0) >= 0.0:
        u = 0.0
    else:
        u = brentq(g, 0.0, 1.0, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    omega_r1 = rabi(u)
    theta = 0.5 * math.acos(min(1.0, max(0.0, u)))
    return theta, omega_r1, omega_r1 > omega_max


def reduce_parameters(omega_r_tilde: float, theta_tilde: float, omega_max: float, chi: float,
                      kappa: float, f_thz: float, gamma, n_fock: int = 6) -> SystemParams:
    """Full drive configuration from ``(W~_R,1, theta~_1)`` under Conditions 0-2.

    ``Omega_1`` is locked to ``omega_max`` (both emitters share the carrier
    mixing angle), ``Delta_R,1 = -Delta_R,2 = W~ cos 2 theta~`` and the
    sideband amplitudes are chosen so that ``W~_2 = W~_1 + eps``.

    Raises
    ------
    InfeasiblePoint
        If the second carrier would need ``Omega_2 > omega_max``.
    """
    if not 0.0 < theta_tilde < math.pi / 2:
        raise InfeasiblePoint(f"theta~ = {theta_tilde} outside (0, pi/2)")
    if omega_max <= 0 or omega_r_tilde <= 0:
        raise InfeasiblePoint("omega_max and W~_R must be positive")
    c2t = math.cos(2 * theta_tilde)
    dr1 = omega_r_tilde * c2t
    dr2 = -dr1
    theta, omega_r1, capped = solve_primary_angle(dr1, chi, f_thz, omega_max)
    lamb = 8.0 * chi ** 2 * math.cos(2 * theta) / f_thz
    omega_r2 = f_thz + lamb + dr2
    s2, k2 = math.sin(2 * theta), math.cos(2 * theta)
    om1 = omega_max if capped else omega_r1
    om2 = omega_r2 * s2
    if om2 > omega_max * (1 + 1e-12):
        raise InfeasiblePoint(f"Omega_2 = {om2:.6g} exceeds cap {omega_max:.6g}")
    cc = math.cos(theta) ** 2
    drive1 = omega_r_tilde * math.sin(2 * theta_tilde)
    J = 2.0 * chi ** 2 * k2 * k2 / f_thz
    gam = 4.0 * (s2 * chi) ** 2 / kappa if kappa > 0 else 0.0

    def eps_for(w2):
        d2 = math.sqrt(max(w2 * w2 - dr2 * dr2, 0.0))
        th2 = math.atan2(w2 - dr2, d2) if d2 > 0 else (0.0 if dr2 > 0 else math.pi / 2)
        ddf = DoublyDressedFrame(
            (theta_tilde, th2), (omega_r_tilde, w2),
            (math.cos(theta_tilde), math.cos(th2)), (math.sin(theta_tilde), math.sin(th2)),
            (gam, gam), J,
        )
        return epsilon_correction(ddf)

    w2 = omega_r_tilde + 4.0 * J * c2t
    for _ in range(100):
        w2_new = omega_r_tilde + eps_for(w2)
        if abs(w2_new - w2) < 1e-14 * max(1.0, abs(w2)):
            w2 = w2_new
            break
        w2 = w2_new
    if w2 < abs(dr2):
        raise InfeasiblePoint("sideband splitting smaller than detuning")
    drive2 = math.sqrt(w2 * w2 - dr2 * dr2)
    return SystemParams(
        f_thz=f_thz,
        delta=(omega_r1 * k2, omega_r2 * k2),
        omega=(om1, om2),
        omega_sb=(drive1 / cc, drive2 / cc),
        chi=(chi, chi),
        kappa=kappa,
        gamma=gamma,
        n_fock=n_fock,
    )


def reduce_point(omega_r_tilde, theta_tilde, omega_max, chi, kappa, f_thz, gamma,
                 n_fock=6) -> ReducedPoint:
    p = reduce_parameters(omega_r_tilde, theta_tilde, omega_max, chi, kappa, f_thz, gamma, n_fock)
    fr = dressed_frame(p)
    return ReducedPoint(omega_r_tilde, theta_tilde, omega_max, p, fr.theta[0],
                        {"capped": abs(p.omega[0] - omega_max) <= 1e-12 * omega_max})


# --------------------------------------------------------------------------
# practical tuning strategy
# --------------------------------------------------------------------------


@dataclass
class StrategyStep:
    label: str
    params: SystemParams
    report: ConditionReport
    concurrence: float | None = None
    scan: tuple | None = None  # Step 4 only: (splittings, concurrences); failed points are nan


def _on_ray(r: float, theta: float):
    return r * math.cos(2 * theta), r * math.sin(2 * theta)


def _grwa_concurrence(p: SystemParams) -> float:
    from .observables import steady_report

    return steady_report(build_grwa_model(p, warn=False)).concurrence


def _align_sidebands(p: SystemParams, splitting: float, only_omega: bool) -> SystemParams:
    """Shift both Rabi splittings so that ``Delta_R,1 = -Delta_R,2`` with given splitting."""
    fr = dressed_frame(p)
    th = fr.theta
    base = (fr.omega_r[0], fr.omega_r[1])
    # keep the requested splitting between the two dressed detunings
    cur_split = fr.delta_r[0] - fr.delta_r[1]
    offs = (0.5 * (splitting - cur_split), -0.5 * (splitting - cur_split))

    def make(s):
        targets = (base[0] + offs[0] + s, base[1] + offs[1] + s)
        if only_omega:
            om = []
            for t, d in zip(targets, p.delta):
                if t < abs(d):
                    raise RootFindingError("cannot reach splitting by tuning Omega alone")
                om.append(math.sqrt(t * t - d * d))
            return p.replace(omega=tuple(om))
        d0, w0 = _on_ray(targets[0], th[0])
        d1, w1 = _on_ray(targets[1], th[1])
        return p.replace(delta=(d0, d1), omega=(w0, w1))

    def r1(s):
        q = make(s)
        f = dressed_frame(q)
        return f.delta_r[0] + f.delta_r[1]

    if abs(r1(0.0)) == 0.0:
        return make(0.0)
    span = max(1.0, abs(r1(0.0)))
    lo, hi = -span, span
    for _ in range(60):
        try:
            if r1(lo) * r1(hi) <= 0:
                break
        except RootFindingError:
            pass
        lo, hi = 2 * lo, 2 * hi
    else:
        raise RootFindingError("could not bracket Condition 1")
    s = brentq(r1, lo, hi, xtol=1e-13, rtol=1e-15)
    return make(s)


def _set_sidebands(p: SystemParams, omega_r_tilde: float) -> SystemParams:
    """Sideband amplitudes giving ``W~_1 = omega_r_tilde`` and ``W~_2 = W~_1 + eps``."""
    fr = dressed_frame(p)
    if omega_r_tilde < abs(fr.delta_r[0]):
        raise RootFindingError("target W~ below |Delta_R,1|")
    sb1 = math.sqrt(omega_r_tilde ** 2 - fr.delta_r[0] ** 2) / fr.c[0] ** 2

    def r2(sb2):
        return condition_residuals(p.replace(omega_sb=(sb1, sb2))).residual2

    lo = 1e-9
    hi = max(2.0 * sb1, 1.0)
    for _ in range(60):
        if r2(lo) * r2(hi) <= 0:
            break
        hi *= 2
    else:
        raise RootFindingError("could not bracket Condition 2")
    sb2 = brentq(r2, lo, hi, xtol=1e-13, rtol=1e-15)
    return p.replace(omega_sb=(sb1, sb2))


def strategy_trace(p0: SystemParams, targets: dict | None = None, only_omega: bool = False,
                   scan_points: int = 25, evaluate=_grwa_concurrence):
    """Run the four optical tuning steps and return the audit trail.

    ``targets`` may hold ``omega_r_tilde`` (sideband Rabi splitting, GHz) and
    ``splitting`` (``Delta = Delta_R,1 - Delta_R,2``, GHz, initial value for
    Step 2). Step 4 scans ``Delta`` at fixed ``W~`` and keeps the
    concurrence maximum. Returns a list of :class:`StrategyStep`.
    """
    targets = dict(targets or {})
    trail = []
    # Step 1: common carrier mixing angle (Condition 0)
    fr = dressed_frame(p0)
    p1 = p0
    if not condition_residuals(p0).satisfied[0]:
        d2, w2 = _on_ray(fr.omega_r[1], fr.theta[0])
        p1 = p0.replace(delta=(p0.delta[0], d2), omega=(p0.omega[0], w2))
    trail.append(StrategyStep("initial dressing", p1, condition_residuals(p1)))

    # Step 2: symmetric primary-Mollow sidebands (Condition 1)
    fr1 = dressed_frame(p1)
    split = targets.get("splitting", fr1.delta_r[0] - fr1.delta_r[1])
    rep = condition_residuals(p1)
    if rep.satisfied[1] and "splitting" not in targets:
        p2 = p1
    else:
        p2 = _align_sidebands(p1, split, only_omega)
    trail.append(StrategyStep("spectral tuning", p2, condition_residuals(p2)))

    # Step 3: overlapping secondary triplets (Condition 2)
    if "omega_r_tilde" in targets:
        wt = float(targets["omega_r_tilde"])
    elif max(p2.omega_sb) > 0:
        wt = doubly_dressed_frame(p2).omega_r[0]
    else:
        raise ValueError("Step 3 needs targets['omega_r_tilde'] when the sidebands are off")
    rep = condition_residuals(p2)
    fr2 = doubly_dressed_frame(p2)
    if rep.satisfied[2] and abs(fr2.omega_r[0] - wt) <= rep.tol[2]:
        p3 = p2
    else:
        p3 = _set_sidebands(p2, wt)
    trail.append(StrategyStep("sideband activation", p3, condition_residuals(p3), evaluate(p3)))

    # Step 4: scan the splitting at fixed W~ for maximal concurrence
    def point(split):
        q = _align_sidebands(p3, split, only_omega)
        return _set_sidebands(q, wt)

    def negc(split):
        try:
            return -evaluate(point(split))
        except (RootFindingError, ValueError):
            return 1.0

    grid = np.linspace(0.02, 1.98, scan_points) * wt
    vals = np.array([negc(x) for x in grid])
    k = int(np.argmin(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(negc, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-6 * wt})
    best = res.x if res.fun <= vals[k] else grid[k]
    p4 = point(best)
    c4 = evaluate(p4)
    if c4 < trail[-1].concurrence:
        p4, c4 = p3, trail[-1].concurrence
    scanned = np.where(vals > 0.0, np.nan, -vals)
    trail.append(StrategyStep("fine tuning", p4, condition_residuals(p4), c4, (grid, scanned)))
    return trail


def gap_to_gamma_diagnostic(gap: float, gamma: float) -> float:
    """Ratio of Liouvillian gap to emitter decay; optimum lies roughly where it is ~20."""
    return gap / gamma if gamma > 0 else math.inf
