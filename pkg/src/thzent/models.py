"""Hamiltonians and dissipators of the two-emitter + THz-cavity system.

Four levels of description are provided:

* :func:`build_full_model` -- bare emitters in the carrier frame, cavity in the
  lab frame, explicit sideband drive at the cavity frequency (periodic).
* :func:`build_grwa_model` -- dressed emitters and cavity in the frame rotating
  at the cavity frequency, after the polaron-assisted rotating-wave step.
* :func:`build_adiabatic_model` -- cavity eliminated into a collective jump.
* :func:`build_doubly_dressed_model` -- secular jumps in the basis dressed by
  the sideband drive.

Subsystem order is always ``(emitter 1, emitter 2[, cavity])``. Two-level
blocks put the upper state at index 0, so ``sigma_z = diag(+1, -1)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .qcore import (
    ID2,
    SIGMA_MINUS,
    SIGMA_X,
    SIGMA_Z,
    LindbladModel,
    PeriodicTerm,
    QMatrix,
    SolverError,
    destroy,
    embed,
    identity,
    kron,
)


class ValidityWarning(UserWarning):
    """A model is used outside the regime its approximations assume."""


class DegenerateFrameError(ValueError):
    pass


def _pair(x):
    if np.isscalar(x):
        return (float(x), float(x))
    a, b = x
    return (float(a), float(b))


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters; every frequency is ``omega / 2 pi`` in GHz."""

    f_thz: float
    delta: tuple
    omega: tuple
    omega_sb: tuple = (0.0, 0.0)
    chi: tuple = (0.0, 0.0)
    kappa: float = 0.0
    gamma: tuple = (0.0, 0.0)
    n_fock: int = 8

    def __post_init__(self):
        for name in ("delta", "omega", "omega_sb", "chi", "gamma"):
            object.__setattr__(self, name, _pair(getattr(self, name)))
        for name in ("omega", "omega_sb", "chi", "gamma"):
            if min(getattr(self, name)) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.kappa < 0 or self.f_thz <= 0:
            raise ValueError("kappa must be >= 0 and f_thz > 0")
        if int(self.n_fock) < 2:
            raise ValueError("n_fock must be at least 2")
        object.__setattr__(self, "n_fock", int(self.n_fock))

    def replace(self, **kw) -> "SystemParams":
        return replace(self, **kw)

    def scaled(self, factor: float) -> "SystemParams":
        """All frequencies multiplied by ``factor``."""
        s = lambda t: tuple(factor * v for v in t)  # noqa: E731
        return replace(
            self, f_thz=factor * self.f_thz, delta=s(self.delta), omega=s(self.omega),
            omega_sb=s(self.omega_sb), chi=s(self.chi), kappa=factor * self.kappa,
            gamma=s(self.gamma),
        )


@dataclass(frozen=True)
class DressedFrame:
    theta: tuple
    omega_r: tuple
    c: tuple
    s: tuple
    lamb: tuple
    J: float
    delta_r: tuple


@dataclass(frozen=True)
class DoublyDressedFrame:
    theta: tuple
    omega_r: tuple
    c: tuple
    s: tuple
    purcell: tuple
    J: float = 0.0
    drive: tuple = field(default=(0.0, 0.0))
    delta_r: tuple = field(default=(0.0, 0.0))


def mixing_angle(detuning: float, rabi: float) -> float:
    """``arctan((sqrt(D^2 + W^2) - D) / W)`` with its ``W -> 0`` limits."""
    if rabi == 0.0:
        if detuning == 0.0:
            raise DegenerateFrameError("zero drive and zero detuning: dressed frame undefined")
        return 0.0 if detuning > 0 else math.pi / 2
    # numerically stable rewrite of (R - D)/W
    r = math.hypot(detuning, rabi)
    if detuning > 0:
        return math.atan(rabi / (r + detuning))
    return math.atan((r - detuning) / rabi)


def dressed_frame(p: SystemParams) -> DressedFrame:
    thetas, rs, cs, ss = [], [], [], []
    for d, w in zip(p.delta, p.omega):
        th = mixing_angle(d, w)
        thetas.append(th)
        rs.append(math.hypot(d, w))
        cs.append(math.cos(th))
        ss.append(math.sin(th))
    cos2 = [c * c - s * s for c, s in zip(cs, ss)]
    chi2 = [x * x for x in p.chi]
    lamb = tuple(8.0 * x * k / p.f_thz for x, k in zip(chi2, cos2))
    # chi_1 chi_2 reduces to chi^2 for the symmetric coupling used throughout
    J = 2.0 * p.chi[0] * p.chi[1] * cos2[0] * cos2[1] / p.f_thz
    delta_r = tuple(r - p.f_thz - lm for r, lm in zip(rs, lamb))
    return DressedFrame(tuple(thetas), tuple(rs), tuple(cs), tuple(ss), lamb, J, delta_r)


def purcell_rate(c: float, s: float, chi: float, kappa: float) -> float:
    """``4 (2 c s chi)^2 / kappa``."""
    if kappa <= 0:
        raise ValueError("Purcell rate needs kappa > 0")
    return 4.0 * (2.0 * c * s * chi) ** 2 / kappa


def doubly_dressed_frame(p: SystemParams, d: DressedFrame | None = None) -> DoublyDressedFrame:
    d = d or dressed_frame(p)
    thetas, rs, cs, ss, drives = [], [], [], [], []
    for i in range(2):
        drive = d.c[i] ** 2 * p.omega_sb[i]
        th = mixing_angle(d.delta_r[i], drive)
        thetas.append(th)
        rs.append(math.hypot(d.delta_r[i], drive))
        cs.append(math.cos(th))
        ss.append(math.sin(th))
        drives.append(drive)
    gam = tuple(
        purcell_rate(d.c[i], d.s[i], p.chi[i], p.kappa) if p.kappa > 0 else 0.0 for i in range(2)
    )
    return DoublyDressedFrame(tuple(thetas), tuple(rs), tuple(cs), tuple(ss), gam, d.J,
                              tuple(drives), d.delta_r)


# --------------------------------------------------------------------------
# basis changes
# --------------------------------------------------------------------------


def rotation(theta: float) -> np.ndarray:
    """Columns are ``|+> = c|up> + s|down>`` and ``|-> = c|down> - s|up>``.

    Maps dressed-basis coordinates to the coordinates of the basis below it
    (bare for the carrier dressing, dressed for the sideband dressing).
    """
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def dressed_to_bare(frame: DressedFrame) -> np.ndarray:
    """Two-emitter unitary taking dressed-basis coordinates to bare ones."""
    return np.kron(rotation(frame.theta[0]), rotation(frame.theta[1]))


def doubly_to_dressed(ddf: DoublyDressedFrame) -> np.ndarray:
    return np.kron(rotation(ddf.theta[0]), rotation(ddf.theta[1]))


def to_bare_basis(rho, frame: DressedFrame) -> QMatrix:
    """Two-emitter state from the dressed basis to the bare ``{e, g}`` basis."""
    u = dressed_to_bare(frame)
    r = np.asarray(rho.data if isinstance(rho, QMatrix) else rho)
    return QMatrix(u @ r @ u.conj().T, (2, 2))


def sigma_in_dressed(c: float, s: float) -> QMatrix:
    """Bare lowering operator written in the dressed basis: ``c^2 xi - s^2 xi^+ + c s xi_z``."""
    xi = SIGMA_MINUS
    return c * c * xi - s * s * xi.dag() + c * s * SIGMA_Z


# --------------------------------------------------------------------------
# X+ operator
# --------------------------------------------------------------------------


def build_xplus(h_static, a, f_thz: float, cutoff: float = 1e-9) -> QMatrix:
    """Positive-frequency part of ``a + a^+`` in the eigenbasis of ``h_static``.

    Each lowering transition ``|k> -> |j>`` with ``E_k > E_j`` is weighted by
    ``sqrt((E_k - E_j) / f_thz)``. Transitions closer than ``cutoff`` are
    dropped. The ordering of ``omega_jk`` in the weight is taken as the
    (positive) transition frequency.
    """
    h = h_static.data if isinstance(h_static, QMatrix) else np.asarray(h_static)
    dims = h_static.dims if isinstance(h_static, QMatrix) else ()
    x = (a.data if isinstance(a, QMatrix) else np.asarray(a))
    x = x + x.conj().T
    try:
        e, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigensolver failed in build_xplus: {exc}") from exc
    xe = v.conj().T @ x @ v
    w = e[None, :] - e[:, None]  # w[j, k] = E_k - E_j
    mask = w > cutoff
    weight = np.zeros_like(w)
    weight[mask] = np.sqrt(w[mask] / f_thz)
    xp = v @ (weight * xe) @ v.conj().T
    return QMatrix(xp, dims)


# --------------------------------------------------------------------------
# model builders
# --------------------------------------------------------------------------


def _ops(n_fock: int):
    dims = (2, 2, n_fock)
    a = embed(destroy(n_fock), 2, dims)
    s = [embed(SIGMA_MINUS, i, dims) for i in range(2)]
    sz = [embed(SIGMA_Z, i, dims) for i in range(2)]
    sx = [embed(SIGMA_X, i, dims) for i in range(2)]
    return dims, a, s, sz, sx


def full_static_hamiltonian(p: SystemParams) -> QMatrix:
    dims, a, s, sz, sx = _ops(p.n_fock)
    one = identity(math.prod(dims)).data
    x = a + a.dag()
    h = p.f_thz * (a.dag() @ a)
    for i in range(2):
        h = h + 0.5 * p.delta[i] * sz[i] + 0.5 * p.omega[i] * sx[i]
        h = h + p.chi[i] * QMatrix((one + sz[i].data) @ x.data, dims)
    return QMatrix(h.data, dims)


def build_full_model(p: SystemParams) -> LindbladModel:
    """Carrier-frame model with the sideband drive as an explicit periodic term.

    Jumps: bare lowering operators at ``gamma`` and the cavity ``X+`` at
    ``kappa``. The periodic term is ``sum_i (Omega_sb,i/2) sigma_i e^{+i 2 pi f_thz t} + h.c.``
    """
    dims, a, s, sz, sx = _ops(p.n_fock)
    h = full_static_hamiltonian(p)
    xp = build_xplus(h, a, p.f_thz)
    jumps = [(s[0], p.gamma[0]), (s[1], p.gamma[1]), (xp, p.kappa)]
    drive = 0.5 * p.omega_sb[0] * s[0] + 0.5 * p.omega_sb[1] * s[1]
    return LindbladModel(h, jumps, PeriodicTerm(QMatrix(drive.data, dims), p.f_thz),
                         meta={"level": "full", "params": p})


def dressed_number_operator(p: SystemParams) -> QMatrix:
    """Excitation number ``a^+ a + sum_i |+_i><+_i|`` written in the bare basis.

    This is the generator of the frame in which the full model's state
    varies slowly (the frame of the GRWA model).
    """
    fr = dressed_frame(p)
    dims = (2, 2, p.n_fock)
    a = embed(destroy(p.n_fock), 2, dims)
    n = a.dag() @ a
    for i in range(2):
        r = rotation(fr.theta[i])
        proj = np.outer(r[:, 0], r[:, 0].conj())
        n = n + embed(QMatrix(proj), i, dims)
    return n


def _check_grwa(p: SystemParams, tol: float = 0.1):
    if max(p.chi) / p.f_thz > tol or max(p.omega_sb) / p.f_thz > tol:
        warnings.warn(
            "GRWA assumes chi, Omega_sb << f_thz "
            f"(chi/f={max(p.chi) / p.f_thz:.3g}, Omega_sb/f={max(p.omega_sb) / p.f_thz:.3g})",
            ValidityWarning, stacklevel=3,
        )


def _qubit_hamiltonian(p: SystemParams, fr: DressedFrame, dims, idx=(0, 1)) -> QMatrix:
    xz = [embed(SIGMA_Z, i, dims) for i in idx]
    xx = [embed(SIGMA_X, i, dims) for i in idx]
    h = -fr.J * (xz[0] @ xz[1])
    for k in range(2):
        h = h + 0.5 * fr.delta_r[k] * xz[k] + 0.5 * fr.c[k] ** 2 * p.omega_sb[k] * xx[k]
    return h


def build_grwa_model(p: SystemParams, warn: bool = True) -> LindbladModel:
    """Static model in the frame rotating at ``f_thz`` (dressed qubits + cavity).

    ``X+`` is built from the excitation-conserving lab-frame Hamiltonian
    (sideband drive excluded), whose positive-frequency transitions are the
    ones that lower the excitation number by one.
    """
    if warn:
        _check_grwa(p)
    fr = dressed_frame(p)
    dims = (2, 2, p.n_fock)
    a = embed(destroy(p.n_fock), 2, dims)
    xi = [embed(SIGMA_MINUS, i, dims) for i in range(2)]
    hq = _qubit_hamiltonian(p, fr, dims)
    hc = QMatrix(np.zeros((math.prod(dims),) * 2), dims)
    for i in range(2):
        g = -2.0 * p.chi[i] * fr.c[i] * fr.s[i]
        hc = hc + g * (a.dag() @ xi[i] + a @ xi[i].dag())
    h = hq + hc
    # lab-frame, sideband-free Hamiltonian for the X+ construction
    nop = a.dag() @ a + sum((xi[i].dag() @ xi[i] for i in range(2)), start=0 * hq)
    p0 = p.replace(omega_sb=(0.0, 0.0))
    h_lab = p.f_thz * nop + _qubit_hamiltonian(p0, fr, dims) + hc
    xp = build_xplus(h_lab, a, p.f_thz)
    sig = [embed(sigma_in_dressed(fr.c[i], fr.s[i]), i, dims) for i in range(2)]
    jumps = [(sig[0], p.gamma[0]), (sig[1], p.gamma[1]), (xp, p.kappa)]
    return LindbladModel(h, jumps, meta={"level": "grwa", "params": p, "frame": fr})


def build_adiabatic_model(p: SystemParams, warn: bool = True, J: float | None = None) -> LindbladModel:
    """Two dressed qubits with the cavity folded into ``L = sqrt(G1) xi1 + sqrt(G2) xi2``.

    ``J`` overrides the cavity-mediated exchange (e.g. ``J=0`` to isolate the
    single-emitter spectra).
    """
    fr = dressed_frame(p)
    if J is not None:
        fr = replace(fr, J=float(J))
    dims = (2, 2)
    if warn:
        for i in range(2):
            g = 2.0 * fr.c[i] * fr.s[i] * p.chi[i]
            if p.kappa < g or p.kappa < abs(fr.delta_r[i]):
                warnings.warn(
                    f"bad-cavity assumption violated for emitter {i + 1}: "
                    f"kappa={p.kappa:.3g}, 2cs chi={g:.3g}, Delta_R={fr.delta_r[i]:.3g}",
                    ValidityWarning, stacklevel=2,
                )
    hq = _qubit_hamiltonian(p, fr, dims)
    xi = [embed(SIGMA_MINUS, i, dims) for i in range(2)]
    if p.kappa > 0:
        gam = [purcell_rate(fr.c[i], fr.s[i], p.chi[i], p.kappa) for i in range(2)]
    else:
        gam = [0.0, 0.0]
    L = math.sqrt(gam[0]) * xi[0] + math.sqrt(gam[1]) * xi[1]
    sig = [embed(sigma_in_dressed(fr.c[i], fr.s[i]), i, dims) for i in range(2)]
    jumps = [(L, 1.0), (sig[0], p.gamma[0]), (sig[1], p.gamma[1])]
    return LindbladModel(hq, jumps, meta={"level": "adiabatic", "params": p, "frame": fr,
                                          "purcell": tuple(gam)})


def doubly_dressed_hamiltonian(ddf: DoublyDressedFrame, J: float | None = None) -> QMatrix:
    """``sum_i (W_i/2) tau_z,i - J prod_i [(c~^2 - s~^2) tau_z,i - 2 c~ s~ tau_x,i]``.

    The product is the dressed ``xi_z,1 xi_z,2`` rewritten exactly, so the sign
    of ``J`` matches the dressed-basis Hamiltonian.
    """
    J = ddf.J if J is None else J
    dims = (2, 2)
    tz = [embed(SIGMA_Z, i, dims) for i in range(2)]
    tx = [embed(SIGMA_X, i, dims) for i in range(2)]
    h = 0.5 * ddf.omega_r[0] * tz[0] + 0.5 * ddf.omega_r[1] * tz[1]
    f = [(ddf.c[i] ** 2 - ddf.s[i] ** 2) * tz[i] - 2 * ddf.c[i] * ddf.s[i] * tx[i]
         for i in range(2)]
    return h - J * (f[0] @ f[1])


def secular_jumps(ddf: DoublyDressedFrame, gammas=None, uncrossed_lplus: bool = True):
    """The three secular collective jumps ``(L+, L-, Lz)`` in the doubly-dressed basis.

    With ``uncrossed_lplus=False`` the first term of ``L+`` carries emitter
    2's lowering operator with emitter 1's coefficient and vice versa.
    """
    g = ddf.purcell if gammas is None else _pair(gammas)
    dims = (2, 2)
    tau = [embed(SIGMA_MINUS, i, dims) for i in range(2)]
    tz = [embed(SIGMA_Z, i, dims) for i in range(2)]
    rg = [math.sqrt(x) for x in g]
    c, s = ddf.c, ddf.s
    if uncrossed_lplus:
        lp = rg[0] * c[0] ** 2 * tau[0] + rg[1] * c[1] ** 2 * tau[1]
    else:
        lp = rg[0] * c[0] ** 2 * tau[1] + rg[1] * c[1] ** 2 * tau[0]
    lm = rg[0] * s[0] ** 2 * tau[0].dag() + rg[1] * s[1] ** 2 * tau[1].dag()
    lz = rg[0] * c[0] * s[0] * tz[0] + rg[1] * c[1] * s[1] * tz[1]
    return lp, lm, lz


def build_doubly_dressed_model(
    p: SystemParams | None = None,
    ddf: DoublyDressedFrame | None = None,
    *,
    uncrossed_lplus: bool = True,
    include_gamma: bool = True,
    J: float | None = None,
    warn: bool = True,
) -> LindbladModel:
    """Two qubits in the doubly-dressed basis with the three secular jumps.

    Either ``p`` (frames computed from it) or a ready ``ddf`` must be given;
    ``J`` overrides the polaron coupling (``J=0`` for the gap formula).
    """
    if ddf is None:
        if p is None:
            raise ValueError("need SystemParams or a DoublyDressedFrame")
        fr = dressed_frame(p)
        ddf = doubly_dressed_frame(p, fr)
    else:
        fr = None
    if warn:
        for i in range(2):
            if ddf.omega_r[i] < 5 * ddf.purcell[i]:
                warnings.warn(
                    f"strong-driving assumption weak for emitter {i + 1}: "
                    f"W~={ddf.omega_r[i]:.3g} < 5 Gamma={5 * ddf.purcell[i]:.3g}",
                    ValidityWarning, stacklevel=2,
                )
    h = doubly_dressed_hamiltonian(ddf, J)
    jumps = [(op, 1.0) for op in secular_jumps(ddf, uncrossed_lplus=uncrossed_lplus)]
    if include_gamma and p is not None and max(p.gamma) > 0:
        for i in range(2):
            sig_d = sigma_in_dressed(fr.c[i], fr.s[i]).data
            r = rotation(ddf.theta[i])
            sig_dd = r.conj().T @ sig_d @ r
            jumps.append((embed(QMatrix(sig_dd), i, (2, 2)), p.gamma[i]))
    return LindbladModel(h, jumps, meta={"level": "doubly_dressed", "params": p, "ddf": ddf,
                                         "frame": fr})


def emitter_state(rho, model: LindbladModel) -> QMatrix:
    """Two-emitter reduced state in the bare basis, whatever the model level."""
    from .qcore import partial_trace

    level = model.meta.get("level")
    r = rho if isinstance(rho, QMatrix) else QMatrix(rho, model.dims)
    if len(r.dims) == 3:
        r = partial_trace(r, [0, 1])
    if level == "full":
        return QMatrix(r.data, (2, 2))
    if level == "doubly_dressed":
        u = doubly_to_dressed(model.meta["ddf"])
        r = QMatrix(u @ r.data @ u.conj().T, (2, 2))
    fr = model.meta.get("frame")
    if fr is None:
        raise ValueError("model carries no dressed frame; cannot map to bare basis")
    return to_bare_basis(r, fr)
