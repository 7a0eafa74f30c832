"""Two-emitter Pauli tomography with ring-down readout and imperfect photodetection.

Single-emitter basis ordering is ``(e, g)`` throughout: index 0 is the bright
(excited) outcome. A measurement setting rotates each emitter so that a
ring-down (population) measurement reads out the chosen Pauli axis.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .observables import fidelity
from .qcore import (
    ID2,
    SIGMA_MINUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    TWO_PI,
    LindbladModel,
    QMatrix,
    as_qmatrix,
    embed,
    liouvillian,
    unvec,
    vec,
)

HADAMARD = (SIGMA_X.data + SIGMA_Z.data) / math.sqrt(2)
S_DAG = np.diag([1.0, -1j])
PAULI = {"X": SIGMA_X.data, "Y": SIGMA_Y.data, "Z": SIGMA_Z.data}
ROTATIONS = {"Z": np.eye(2, dtype=complex), "X": HADAMARD.astype(complex), "Y": HADAMARD @ S_DAG}
OUTCOMES = ("ee", "eg", "ge", "gg")


class SingularDetector(ValueError):
    """Confusion matrix not invertible (``eta_e + eta_g = 1``)."""


@dataclass(frozen=True)
class MeasurementSetting:
    axes: tuple  # e.g. ("X", "Y")
    index: int

    @property
    def unitaries(self):
        return tuple(ROTATIONS[a] for a in self.axes)

    @property
    def unitary(self) -> np.ndarray:
        u1, u2 = self.unitaries
        return np.kron(u1, u2)

    @property
    def label(self) -> str:
        return "".join(self.axes)


def settings():
    """The nine joint Pauli settings in ``XX, XY, ..., ZZ`` order."""
    return [MeasurementSetting(ax, k) for k, ax in enumerate(itertools.product("XYZ", repeat=2))]


@dataclass(frozen=True)
class DetectorModel:
    eta_e: float = 1.0  # p(bright | e)
    eta_g: float = 1.0  # p(dark | g)

    def __post_init__(self):
        for v in (self.eta_e, self.eta_g):
            if not 0.0 <= v <= 1.0:
                raise ValueError("detector efficiencies must lie in [0, 1]")

    @property
    def single(self) -> np.ndarray:
        """Column-stochastic map from true ``(e, g)`` to detected ``(bright, dark)``."""
        return np.array([[self.eta_e, 1 - self.eta_g], [1 - self.eta_e, self.eta_g]])

    @property
    def det(self) -> float:
        return self.eta_e + self.eta_g - 1.0

    @property
    def singular(self) -> bool:
        return abs(self.det) <= 1e-6

    @property
    def confusion(self) -> np.ndarray:
        return np.kron(self.single, self.single)


# --------------------------------------------------------------------------
# rotations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PulseSettings:
    """Rotation pulses: amplitude ``omega_u`` (GHz) held for ``duration`` (ns)."""

    omega_u: float
    duration: float | None = None
    gamma: float = 0.0

    @property
    def t(self) -> float:
        return 1.0 / (4.0 * self.omega_u) if self.duration is None else self.duration


def preset(name: str, gamma: float = 0.03979) -> PulseSettings:
    """Shipped pulse presets.

    ``"fast"``: ``omega_u = 5 pi gamma`` (angular) held for ``1 / (10 gamma)``.
    ``"slow"``: ``omega_u = gamma`` held for a quarter period ``pi / (2 omega_u)``.
    """
    g_ang = TWO_PI * gamma
    if name == "fast":
        return PulseSettings(5 * math.pi * g_ang / TWO_PI, 1.0 / (10 * g_ang), gamma)
    if name == "slow":
        return PulseSettings(gamma, None, gamma)
    raise ValueError(f"unknown preset {name!r}")


def pulse_hamiltonians(omega_u: float) -> dict:
    """Single-emitter generators (GHz) realising the gates in a quarter period."""
    return {
        "H": -omega_u * (SIGMA_X.data + SIGMA_Z.data) / math.sqrt(2),
        "Sdag": -omega_u * SIGMA_Z.data / 2,
    }


PULSE_SEQUENCE = {"Z": (), "X": ("H",), "Y": ("Sdag", "H")}


def _segment_evolve(rho: np.ndarray, h: np.ndarray, t: float, gamma: float) -> np.ndarray:
    jumps = [(embed(SIGMA_MINUS, k, (2, 2)), gamma) for k in range(2)] if gamma > 0 else []
    m = LindbladModel(QMatrix(h, (2, 2)), jumps)
    L = liouvillian(m).data
    return unvec(expm(L * t) @ vec(rho), (2, 2)).data


def apply_rotation(rho, s: MeasurementSetting, mode: str = "ideal",
                   pulses: PulseSettings | None = None) -> QMatrix:
    """Rotate a two-emitter state into the measurement frame of ``s``.

    ``mode="pulsed"`` drives both emitters simultaneously with the gate
    Hamiltonians for ``pulses.t`` per segment while each emitter decays at
    ``pulses.gamma``; emitters with fewer segments idle (and decay) meanwhile.
    """
    r = as_qmatrix(rho).data
    if mode == "ideal":
        u = s.unitary
        return QMatrix(u @ r @ u.conj().T, (2, 2))
    if mode != "pulsed":
        raise ValueError(f"unknown mode {mode!r}")
    if pulses is None or pulses.omega_u <= 0:
        raise ValueError("pulsed rotations need omega_u > 0")
    gens = pulse_hamiltonians(pulses.omega_u)
    seqs = [PULSE_SEQUENCE[a] for a in s.axes]
    n = max(len(q) for q in seqs)
    for k in range(n):
        # right-align so both sequences end together (Hadamard last)
        parts = []
        for q in seqs:
            j = k - (n - len(q))
            parts.append(gens[q[j]] if j >= 0 else np.zeros((2, 2)))
        h = np.kron(parts[0], ID2.data) + np.kron(ID2.data, parts[1])
        r = _segment_evolve(r, h, pulses.t, pulses.gamma)
    return QMatrix(r, (2, 2))


# --------------------------------------------------------------------------
# sampling, mitigation, reconstruction
# --------------------------------------------------------------------------


def born_probabilities(rho, s: MeasurementSetting, mode="ideal", pulses=None) -> np.ndarray:
    r = apply_rotation(rho, s, mode, pulses).data
    p = np.clip(np.real(np.diag(r)), 0.0, None)
    return p / p.sum()


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, *keys)``; independent of call order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *keys])))


def sample_shots(rho, s: MeasurementSetting, n_shot: int, d: DetectorModel, seed=0,
                 rng: np.random.Generator | None = None, mode="ideal", pulses=None) -> np.ndarray:
    """Detected counts over ``(bb, bd, db, dd)`` (bright/dark per emitter)."""
    if n_shot == 0:
        return np.zeros(4, dtype=np.int64)
    p = d.confusion @ born_probabilities(rho, s, mode, pulses)
    p = np.clip(p, 0.0, None)
    rng = rng_for(seed, s.index) if rng is None else rng
    return rng.multinomial(n_shot, p / p.sum())


def mitigate(probs, d: DetectorModel) -> np.ndarray:
    """Invert the detector confusion matrix (no clipping).

    Raises
    ------
    SingularDetector
        At ``eta_e = 1 - eta_g`` where the confusion matrix has zero determinant.
    """
    if d.singular:
        raise SingularDetector(
            f"confusion matrix singular at eta_e + eta_g = 1 (eta_e={d.eta_e}, eta_g={d.eta_g})")
    inv = np.linalg.inv(d.single)
    probs = np.asarray(probs, float)
    return np.kron(inv, inv) @ probs if probs.ndim == 1 else probs @ np.kron(inv, inv).T


def _proj(u: np.ndarray, b: int) -> np.ndarray:
    e = np.zeros(2)
    e[b] = 1.0
    return 3.0 * u.conj().T @ np.outer(e, e) @ u - np.eye(2)


def linear_inversion(probs: dict) -> QMatrix:
    """Estimator ``(1/9) sum_U sum_b p(b|U) (x)_i (3 U_i^+ |b_i><b_i| U_i - 1)``.

    ``probs`` maps setting label (``"XY"``) or index to the four outcome
    probabilities ordered as ``OUTCOMES``.
    """
    ss = settings()
    rho = np.zeros((4, 4), complex)
    for s in ss:
        key = s.label if s.label in probs else s.index
        if key not in probs:
            raise KeyError(f"missing setting {s.label}")
        p = np.asarray(probs[key], float)
        u1, u2 = s.unitaries
        for k, (b1, b2) in enumerate(itertools.product(range(2), repeat=2)):
            rho += p[k] * np.kron(_proj(u1, b1), _proj(u2, b2))
    rho /= len(ss)
    return QMatrix(0.5 * (rho + rho.conj().T), (2, 2))


def project_physical(rho) -> QMatrix:
    """Drop negative eigenvalues and renormalise the trace."""
    r = as_qmatrix(rho)
    w, v = np.linalg.eigh(0.5 * (r.data + r.data.conj().T))
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise ValueError("no positive part left after projection")
    out = (v * (w / w.sum())) @ v.conj().T
    return QMatrix(0.5 * (out + out.conj().T), r.dims)


# --------------------------------------------------------------------------
# pipeline
# --------------------------------------------------------------------------


@dataclass
class TomographyRecord:
    counts: dict
    n_shot: int
    detector: DetectorModel
    mitigated: dict
    rho_bar: QMatrix
    rho_phys: QMatrix
    fidelity: float
    seed: int
    keys: tuple = ()

    def to_json(self) -> dict:
        return {
            "counts": {k: v.tolist() for k, v in self.counts.items()},
            "n_shot": self.n_shot,
            "eta_e": self.detector.eta_e,
            "eta_g": self.detector.eta_g,
            "mitigated": {k: v.tolist() for k, v in self.mitigated.items()},
            "rho_bar_re": self.rho_bar.data.real.tolist(),
            "rho_bar_im": self.rho_bar.data.imag.tolist(),
            "fidelity": self.fidelity,
            "seed": self.seed,
            "keys": list(self.keys),
        }


def run_tomography(rho, n_shot: int, d: DetectorModel, seed: int = 0, keys=(),
                   mode="ideal", pulses=None, reference=None) -> TomographyRecord:
    """Sample all nine settings, mitigate, invert, project and score one realisation."""
    rho = as_qmatrix(rho, (2, 2))
    ref = rho if reference is None else as_qmatrix(reference, (2, 2))
    counts, mit = {}, {}
    for s in settings():
        c = sample_shots(rho, s, n_shot, d, rng=rng_for(seed, *keys, s.index), mode=mode,
                         pulses=pulses)
        counts[s.label] = c
        freq = c / max(n_shot, 1)
        mit[s.label] = mitigate(freq, d)
    rb = linear_inversion(mit)
    rp = project_physical(rb)
    return TomographyRecord(counts, n_shot, d, mit, rb, rp, fidelity(rp, ref), seed, tuple(keys))


@dataclass
class FidelityMap:
    n_shot: np.ndarray
    eta_e: np.ndarray
    eta_g: float
    mean: np.ndarray
    std: np.ndarray
    singular: np.ndarray
    raw: np.ndarray = field(repr=False, default=None)  # (n_shot, eta_e, n_ave)


def _cell(args):
    rho, ns, ee, eta_g, n_ave, seed, i, j, mode, pulses, ref = args
    d = DetectorModel(ee, eta_g)
    sing = d.singular
    vals = np.empty(n_ave)
    for k in range(n_ave):
        if sing:
            # the inverse does not exist; report the unmitigated reconstruction
            rec = _unmitigated(rho, int(ns), d, seed, (i, j, k), mode, pulses, ref)
        else:
            rec = run_tomography(rho, int(ns), d, seed, (i, j, k), mode, pulses, ref).fidelity
        vals[k] = rec
    return i, j, vals, sing


def _unmitigated(rho, n_shot, d, seed, keys, mode, pulses, ref) -> float:
    probs = {}
    for s in settings():
        c = sample_shots(rho, s, n_shot, d, rng=rng_for(seed, *keys, s.index), mode=mode,
                         pulses=pulses)
        probs[s.label] = c / max(n_shot, 1)
    return fidelity(project_physical(linear_inversion(probs)), ref)


def fidelity_study(reference, n_shot_axis, eta_e_axis, eta_g: float = 0.99, n_ave: int = 50,
                   seed: int = 0, threads: int = 1, mode="ideal", pulses=None,
                   state=None) -> FidelityMap:
    """Mean reconstruction fidelity over an ``(n_shot, eta_e)`` grid.

    ``state`` is what gets measured (defaults to ``reference``). Cells on the
    singular line ``eta_e = 1 - eta_g`` are flagged and reconstructed without
    mitigation instead of aborting the study.
    """
    ref = as_qmatrix(reference, (2, 2))
    st = ref if state is None else as_qmatrix(state, (2, 2))
    ns = np.asarray(n_shot_axis)
    ee = np.asarray(eta_e_axis, float)
    tasks = [(st, n, e, eta_g, n_ave, seed, i, j, mode, pulses, ref)
             for i, n in enumerate(ns) for j, e in enumerate(ee)]
    if threads > 1 and tasks:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as ex:
            out = list(ex.map(_cell, tasks))
    else:
        out = [_cell(t) for t in tasks]
    raw = np.zeros((len(ns), len(ee), n_ave))
    sing = np.zeros((len(ns), len(ee)), bool)
    for i, j, vals, sg in out:
        raw[i, j] = vals
        sing[i, j] = sg
    return FidelityMap(ns, ee, eta_g, raw.mean(axis=2) if n_ave else raw.sum(axis=2),
                       raw.std(axis=2) if n_ave else raw.sum(axis=2), sing, raw)


def gaussian_smooth(values: np.ndarray, sigma: float = 1.5) -> np.ndarray:
    """Presentation-only smoothing of a fidelity map (never applied to stored data)."""
    from scipy.ndimage import gaussian_filter

    return gaussian_filter(np.asarray(values, float), sigma=sigma, mode="nearest")


def wall_clock_estimate(n_shot: int, gamma: float, n_settings: int = 9):
    """Acquisition time ``10 n_shot / gamma`` (``gamma`` in GHz, ordinary frequency).

    Returns ``(per_setting, total)`` in seconds.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    per = 10.0 * n_shot / (TWO_PI * gamma * 1e9)
    return per, per * n_settings
