"""Entanglement, correlation and spectral diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .models import (
    DoublyDressedFrame,
    LindbladModel,
    doubly_to_dressed,
    emitter_state,
    rotation,
)
from .qcore import (
    SIGMA_MINUS,
    SIGMA_Y,
    TWO_PI,
    QMatrix,
    SolverError,
    Superoperator,
    as_qmatrix,
    embed,
    liouvillian,
    liouvillian_spectrum,
    steady_state,
    unvec,
    vec,
)

KERNEL_TOL = 1e-9
_SYSY = np.kron(SIGMA_Y.data, SIGMA_Y.data)


def _dm(rho) -> np.ndarray:
    return rho.data if isinstance(rho, QMatrix) else np.asarray(rho, dtype=complex)


def concurrence(rho, eig_tol: float = 1e-8) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The Wootters numbers ``lambda_i`` (square roots of the eigenvalues of
    ``rho (sy sy) rho* (sy sy)``) are the singular values of ``B^T (sy sy) B``
    for any factor ``rho = B B^+``. Taking them as singular values avoids the
    square roots of round-off-sized eigenvalues, which would otherwise cost
    about eight digits for nearly pure states.
    """
    r = _dm(rho)
    if r.shape != (4, 4):
        raise ValueError(f"concurrence needs a 4x4 matrix, got {r.shape}")
    w, v = np.linalg.eigh(0.5 * (r + r.conj().T))
    if w[0] < -eig_tol:
        raise ValueError(f"non-physical state (eigenvalue {w[0]:.2e})")
    b = v * np.sqrt(np.clip(w, 0.0, None))
    lam = np.linalg.svd(b.T @ _SYSY @ b, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _sqrtm_psd(r):
    w, v = np.linalg.eigh(0.5 * (r + r.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``."""
    a, b = _dm(rho), _dm(sigma)
    sa = _sqrtm_psd(a)
    m = sa @ b @ sa
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)
    return min(1.0, max(0.0, f))


class UndefinedCorrelation(ValueError):
    pass


def g2_cross(rho, pop_tol: float = 1e-12) -> float:
    """``<s1+ s2+ s1 s2> / (<s1+ s1><s2+ s2>)`` on a bare-basis two-emitter state."""
    r = _dm(rho)
    s1 = embed(SIGMA_MINUS, 0, (2, 2)).data
    s2 = embed(SIGMA_MINUS, 1, (2, 2)).data
    n1 = np.trace(s1.conj().T @ s1 @ r).real
    n2 = np.trace(s2.conj().T @ s2 @ r).real
    if n1 <= pop_tol or n2 <= pop_tol:
        raise UndefinedCorrelation(f"emitter populations too small ({n1:.2e}, {n2:.2e})")
    num = np.trace(s1.conj().T @ s2.conj().T @ s1 @ s2 @ r).real
    return float(max(num, 0.0) / (n1 * n2))


# --------------------------------------------------------------------------
# emission spectra
# --------------------------------------------------------------------------


@dataclass
class SpectrumResult:
    frequencies: np.ndarray
    intensities: np.ndarray
    emitter_index: int | None = None
    tag: str = ""
    meta: dict = field(default_factory=dict)
    coherent: float = 0.0  # weight of the delta line |<op>|^2 at the shift frequency

    def normalized(self) -> np.ndarray:
        m = float(np.max(self.intensities)) if len(self.intensities) else 0.0
        return self.intensities / m if m > 0 else self.intensities

    def integral(self, include_coherent: bool = False) -> float:
        """Trapezoid integral of the incoherent part (plus the delta line if asked).

        With both parts and a grid that covers the lines, this equals
        ``<op+ op>`` of the steady state.
        """
        total = float(np.trapezoid(self.intensities, self.frequencies))
        return total + self.coherent if include_coherent else total

    def peaks(self, rel_height: float = 0.05) -> np.ndarray:
        """Frequencies of local maxima above ``rel_height`` of the global maximum."""
        y = self.intensities
        top = float(np.max(y))
        idx = [i for i in range(1, len(y) - 1)
               if y[i] >= y[i - 1] and y[i] > y[i + 1] and y[i] >= rel_height * top]
        return self.frequencies[idx]


def _check_grid(grid):
    f = np.asarray(grid, dtype=float)
    if f.ndim != 1 or (len(f) > 1 and np.any(np.diff(f) <= 0)):
        raise ValueError("frequency grid must be strictly increasing")
    return f


def emission_spectrum(m: LindbladModel, op, grid, shift: float = 0.0,
                      emitter_index=None, tag: str = "", rho_ss=None) -> SpectrumResult:
    """Incoherent emission spectrum ``2 Re int_0^inf e^{i 2 pi f t} <op+(0) op(t)> dt``.

    This is the two-sided transform of the stationary correlation, so the
    spectrum integrates over ``f`` to ``<op+ op> - |<op>|^2``; the removed
    coherent weight ``|<op>|^2`` is returned in ``SpectrumResult.coherent``.
    Evaluated by decomposing the Liouvillian into eigenmodes (quantum
    regression), so the frequency resolution is independent of any time grid.
    The zero mode (coherent part ``|<op>|^2``) is removed. ``shift`` is added
    to the model's frequency axis, e.g. to return from a rotating frame.
    Falls back to :func:`emission_spectrum_fft` for defective Liouvillians.
    """
    f = _check_grid(grid)
    L = liouvillian(m)
    rho = steady_state(L, check_kernel=False) if rho_ss is None else as_qmatrix(rho_ss)
    o = _dm(op)
    d = m.dim
    w, vr = la.eig(L.data)
    cond = np.linalg.cond(vr)
    if not np.isfinite(cond) or cond > 1e12:
        return emission_spectrum_fft(m, op, grid, shift=shift, emitter_index=emitter_index,
                                     tag=tag, rho_ss=rho)
    b = vec(rho.data @ o.conj().T)
    coef = la.solve(vr, b)
    # Tr(op X) for each right eigenvector X
    left = np.array([np.sum(o.T.reshape(-1, order="F") * vr[:, k]) for k in range(len(w))])
    weights = left * coef
    k0 = int(np.argmin(np.abs(w)))
    mask = np.ones(len(w), dtype=bool)
    mask[k0] = False
    ww, wt = w[mask], weights[mask]
    om = TWO_PI * (f - shift)
    s = 2.0 * np.real(-(wt[None, :] / (ww[None, :] + 1j * om[:, None]))).sum(axis=1)
    coh = float(abs(np.trace(o @ rho.data)) ** 2)
    return SpectrumResult(f, np.clip(s, 0.0, None), emitter_index, tag,
                          {"method": "eigen", "rho_ss": rho}, coh)


def emission_spectrum_fft(m: LindbladModel, op, grid, shift: float = 0.0, emitter_index=None,
                          tag: str = "", rho_ss=None, t_max=None, n_t=None) -> SpectrumResult:
    """Time-domain route: propagate the regression state with ``expm`` and integrate.

    Used as an independent check of :func:`emission_spectrum`.
    """
    f = _check_grid(grid)
    L = liouvillian(m)
    rho = steady_state(L, check_kernel=False) if rho_ss is None else as_qmatrix(rho_ss)
    o = _dm(op)
    ev = liouvillian_spectrum(L)
    decay = min(abs(x.real) for x in ev[1:] if abs(x.real) > KERNEL_TOL)
    t_max = t_max or 40.0 / decay
    fmax = max(abs(f - shift).max(), np.abs(ev.imag).max() / TWO_PI)
    n_t = n_t or int(max(4096, 8 * fmax * t_max))
    dt = t_max / n_t
    step = la.expm(L.data * dt)
    x = vec(rho.data @ o.conj().T)
    coh = np.trace(o @ rho.data) * np.trace(o.conj().T @ rho.data)
    g = np.empty(n_t + 1, dtype=complex)
    for k in range(n_t + 1):
        g[k] = np.trace(o @ unvec(x, m.dims).data) - coh
        x = step @ x
    t = np.arange(n_t + 1) * dt
    om = TWO_PI * (f - shift)
    kern = np.exp(1j * om[:, None] * t[None, :])
    s = 2.0 * np.real(np.trapezoid(kern * g[None, :], t, axis=1))
    return SpectrumResult(f, np.clip(s, 0.0, None), emitter_index, tag, {"method": "fft"},
                          float(abs(coh)))


def visible_spectrum(m: LindbladModel, emitter: int, grid, f_thz: float) -> SpectrumResult:
    """Optical (carrier-frame) spectrum of a dressed emitter in a rotating-frame model.

    The bare lowering operator splits into components rotating at
    ``-f_thz, 0, +f_thz`` (``c^2 xi``, ``c s xi_z``, ``-s^2 xi^+``); their spectra
    are added with the corresponding shifts.
    """
    fr = m.meta["frame"]
    c, s = fr.c[emitter], fr.s[emitter]
    dims = m.dims
    xi = embed(SIGMA_MINUS, emitter, dims)
    from .qcore import SIGMA_Z

    xz = embed(SIGMA_Z, emitter, dims)
    rho = steady_state(liouvillian(m), check_kernel=False)
    total = np.zeros(len(grid))
    coh = 0.0
    for op, sh in ((c * c * xi, f_thz), (c * s * xz, 0.0), (-s * s * xi.dag(), -f_thz)):
        sp = emission_spectrum(m, op, grid, shift=sh, rho_ss=rho)
        total += sp.intensities
        coh += sp.coherent
    return SpectrumResult(np.asarray(grid, float), total, emitter, "visible", coherent=coh)


# --------------------------------------------------------------------------
# dark state and Liouvillian gap
# --------------------------------------------------------------------------


def dark_state(ddf: DoublyDressedFrame, convention: str = "derived", gammas=None):
    """Entangled dark state of the secular doubly-dressed dynamics.

    ``convention="derived"`` returns ``sqrt(G2) c~2^2 |+~-~> - sqrt(G1) c~1^2 |-~+~>``,
    the state annihilated by the uncrossed jumps of
    :func:`thzent.models.secular_jumps`. ``convention="printed"`` returns
    ``c~1^2 |+~-~> - c~2^2 |-~+~>``, the label-exchanged form that pairs with
    the crossed ``L+``. Both are normalized.

    Returns ``(psi_doubly_dressed, psi_dressed)``; the dressed-basis vector
    still needs :func:`thzent.models.dressed_to_bare` for the bare basis.
    """
    c1, c2 = ddf.c
    if convention == "printed":
        a, b = c1 ** 2, -(c2 ** 2)
    elif convention == "derived":
        g = ddf.purcell if gammas is None else gammas
        if g[0] <= 0 or g[1] <= 0:
            g = (1.0, 1.0)
        a, b = math.sqrt(g[1]) * c2 ** 2, -math.sqrt(g[0]) * c1 ** 2
    else:
        raise ValueError(f"unknown convention {convention!r}")
    norm = math.hypot(a, b)
    if norm < 1e-15:
        raise ValueError("dark state degenerate (both c~ vanish)")
    psi = np.zeros(4, dtype=complex)
    psi[1] = a / norm  # |+~ -~>
    psi[2] = b / norm  # |-~ +~>
    return psi, doubly_to_dressed(ddf) @ psi


def gap_numeric(L: Superoperator, tol: float = KERNEL_TOL, sector: str = "all",
                im_tol: float = 1e-6) -> float:
    """Liouvillian gap as an ordinary frequency (GHz): ``|Re lambda_1| / 2 pi``.

    Parameters
    ----------
    sector : {"all", "stationary"}
        ``"all"`` takes the slowest nonzero mode of the whole spectrum.
        ``"stationary"`` only looks at non-oscillating modes
        (``|Im lambda| <= im_tol * max|lambda|``), i.e. the population
        relaxation that the closed-form :func:`gap_analytic` describes. In the
        symmetric doubly-dressed problem a coherence pair at ``+-W~_R`` decays
        more slowly than that mode once ``theta~`` drops below about ``pi/8``.
    """
    if sector not in ("all", "stationary"):
        raise ValueError(f"unknown sector {sector!r}")
    if not np.any(L.data):
        return 0.0
    ev = liouvillian_spectrum(L)
    scale = max(1.0, np.abs(ev).max())
    zero = np.abs(ev.real) < tol * scale
    if np.count_nonzero(zero & (np.abs(ev) < 1e-6 * scale)) > 1:
        raise SolverError("degenerate kernel: gap undefined")
    keep = ~zero
    if sector == "stationary":
        keep &= np.abs(ev.imag) <= im_tol * scale
    rest = ev[keep]
    if len(rest) == 0:
        return 0.0
    return float(abs(rest.real.max()) / TWO_PI)


def gap_analytic(gamma1: float, theta_tilde: float, mode: str = "exact") -> float:
    """Liouvillian gap of the symmetric doubly-dressed problem with ``J = 0``."""
    if mode == "approx":
        t = math.tan(2 * theta_tilde)
        if math.isinf(t) or abs(t) > 1e300:
            return 0.0
        return abs(4.0 * gamma1 / 3.0 / (t * t)) if t != 0 else math.inf
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    c4 = math.cos(4 * theta_tilde)
    c8 = math.cos(8 * theta_tilde)
    lam = -(9 + 3 * c4) / 8 * gamma1 + gamma1 / 16 * math.sqrt(max(0.0, -40 * c4 + 18 * c8 + 86))
    return abs(lam)


# --------------------------------------------------------------------------
# steady-state report
# --------------------------------------------------------------------------


@dataclass
class SteadyReport:
    rho: QMatrix
    concurrence: float
    g2_cross: float
    gap: float | None
    dark_overlap: float | None
    flags: dict = field(default_factory=dict)


def steady_report(m: LindbladModel, with_gap: bool = False, dark=None) -> SteadyReport:
    """Solve ``m`` and collect the two-emitter observables (bare basis)."""
    L = liouvillian(m)
    rho_full = steady_state(L, check_kernel=False)
    rho = emitter_state(rho_full, m)
    c = concurrence(rho)
    try:
        g2 = g2_cross(rho)
    except UndefinedCorrelation:
        g2 = float("nan")
    gap = gap_numeric(L) if with_gap else None
    ov = None
    if dark is not None:
        psi = np.asarray(dark)
        ov = float(np.real(psi.conj() @ rho.data @ psi))
    return SteadyReport(rho, c, g2, gap, ov, dict(m.meta.get("flags", {})))


__all__ = [
    "concurrence", "fidelity", "g2_cross", "SpectrumResult", "emission_spectrum",
    "emission_spectrum_fft", "visible_spectrum", "dark_state", "gap_numeric", "gap_analytic",
    "SteadyReport", "steady_report", "rotation",
]
