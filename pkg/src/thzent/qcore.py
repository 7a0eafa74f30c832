"""Dense Lindblad engine.

All public frequencies are ordinary frequencies in GHz (``f = omega / 2 pi``)
and times are in ns. The factor ``2 pi`` is applied exactly once, when a
:class:`LindbladModel` is turned into a :class:`Superoperator`.

Vectorization is column-stacking: ``vec(A rho B) = (B^T kron A) vec(rho)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as la
from scipy.integrate import solve_ivp

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

HERM_TOL = 1e-10
KERNEL_TOL = 1e-9


class SolverError(RuntimeError):
    """A numerical routine failed to produce a trustworthy result."""


class MultistabilityError(SolverError):
    """The Liouvillian kernel is degenerate (more than one steady state)."""


class ConvergenceError(SolverError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


# --------------------------------------------------------------------------
# data types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QMatrix:
    """Dense complex matrix over a composite Hilbert space.

    ``dims`` lists the subsystem dimensions; their product is the side length.
    """

    data: np.ndarray
    dims: tuple = ()

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"QMatrix needs a square matrix, got {data.shape}")
        dims = tuple(int(d) for d in self.dims) if self.dims else (data.shape[0],)
        if math.prod(dims) != data.shape[0]:
            raise ValueError(f"dims {dims} do not factor side length {data.shape[0]}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)

    @property
    def shape(self):
        return self.data.shape

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def dag(self) -> "QMatrix":
        return QMatrix(self.data.conj().T, self.dims)

    def tr(self) -> complex:
        return complex(np.trace(self.data))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T), initial=0.0))

    def is_hermitian(self, tol: float = HERM_TOL) -> bool:
        return self.hermiticity_error() <= tol

    def hermitized(self) -> "QMatrix":
        return QMatrix(0.5 * (self.data + self.data.conj().T), self.dims)

    def expect(self, op) -> complex:
        """``Tr(op rho)`` treating ``self`` as a density matrix."""
        return complex(np.trace(_arr(op) @ self.data))

    def check_density(self, tr_tol=1e-10, herm_tol=1e-10, eig_tol=1e-8) -> "QMatrix":
        """Raise ``ValueError`` unless this is a valid density matrix."""
        if abs(self.tr() - 1.0) > tr_tol:
            raise ValueError(f"trace {self.tr():.3e} != 1")
        if self.hermiticity_error() > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        lmin = np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))[0]
        if lmin < -eig_tol:
            raise ValueError(f"density matrix has negative eigenvalue {lmin:.3e}")
        return self

    def __matmul__(self, other):
        if isinstance(other, QMatrix):
            return QMatrix(self.data @ other.data, self.dims)
        return self.data @ other

    def __add__(self, other):
        return QMatrix(self.data + _arr(other), self.dims)

    __radd__ = __add__

    def __sub__(self, other):
        return QMatrix(self.data - _arr(other), self.dims)

    def __rsub__(self, other):
        return QMatrix(_arr(other) - self.data, self.dims)

    def __mul__(self, c):
        if isinstance(c, QMatrix):
            raise TypeError("use @ for matrix products")
        return QMatrix(self.data * c, self.dims)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return QMatrix(self.data / c, self.dims)

    def __neg__(self):
        return QMatrix(-self.data, self.dims)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


def _arr(x) -> np.ndarray:
    return x.data if isinstance(x, QMatrix) else np.asarray(x, dtype=complex)


def as_qmatrix(x, dims=None) -> QMatrix:
    if isinstance(x, QMatrix):
        return x if dims is None else QMatrix(x.data, dims)
    x = np.asarray(x, dtype=complex)
    if x.ndim == 1:
        x = np.outer(x, x.conj())
    return QMatrix(x, dims or ())


@dataclass(frozen=True)
class PeriodicTerm:
    """``A exp(+i 2 pi f t) + h.c.`` added to the Hamiltonian."""

    op: QMatrix
    freq: float


@dataclass(frozen=True)
class LindbladModel:
    hamiltonian: QMatrix
    jumps: tuple = ()
    periodic: PeriodicTerm | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        jumps = tuple((as_qmatrix(op), float(rate)) for op, rate in self.jumps)
        object.__setattr__(self, "jumps", jumps)
        h = as_qmatrix(self.hamiltonian)
        object.__setattr__(self, "hamiltonian", h)
        for op, rate in jumps:
            if rate < 0:
                raise ValueError(f"negative jump rate {rate}")
            if op.dims != h.dims:
                raise ValueError(f"jump dims {op.dims} != hamiltonian dims {h.dims}")
        if self.periodic is not None and self.periodic.op.dims != h.dims:
            raise ValueError("periodic term dims mismatch")

    @property
    def dims(self):
        return self.hamiltonian.dims

    @property
    def dim(self):
        return self.hamiltonian.dim

    def static_part(self) -> "LindbladModel":
        return LindbladModel(self.hamiltonian, self.jumps, None, dict(self.meta))


@dataclass(frozen=True)
class Superoperator:
    """Generator matrix acting on column-stacked density matrices (angular units, 1/ns)."""

    data: np.ndarray
    dims: tuple

    @property
    def hilbert_dim(self) -> int:
        return math.prod(self.dims)

    def __matmul__(self, vec):
        return self.data @ vec


# --------------------------------------------------------------------------
# operator construction
# --------------------------------------------------------------------------


def kron(*ops) -> QMatrix:
    """Kronecker product that concatenates subsystem dims."""
    if len(ops) == 1 and not isinstance(ops[0], (QMatrix, np.ndarray)):
        ops = tuple(ops[0])
    qs = [as_qmatrix(o) for o in ops]
    data = reduce(np.kron, [q.data for q in qs])
    dims = sum((q.dims for q in qs), ())
    return QMatrix(data, dims)


def identity(n: int) -> QMatrix:
    return QMatrix(np.eye(n), (n,))


def destroy(n: int) -> QMatrix:
    return QMatrix(np.diag(np.sqrt(np.arange(1, n)), 1), (n,))


# Two-level convention: index 0 = upper state (|e>, |+>), index 1 = lower.
SIGMA_Z = QMatrix(np.diag([1.0, -1.0]))
SIGMA_X = QMatrix(np.array([[0, 1], [1, 0]]))
SIGMA_Y = QMatrix(np.array([[0, -1j], [1j, 0]]))
SIGMA_MINUS = QMatrix(np.array([[0, 0], [1, 0]]))  # |lower><upper|
ID2 = identity(2)


def embed(op, index: int, dims: Sequence[int]) -> QMatrix:
    """Place a single-subsystem operator at position ``index`` of ``dims``."""
    dims = tuple(dims)
    if not 0 <= index < len(dims):
        raise IndexError(f"subsystem {index} out of range for dims {dims}")
    parts = [identity(d) for d in dims]
    parts[index] = as_qmatrix(op)
    return kron(*parts)


def ket(index: int, n: int) -> np.ndarray:
    v = np.zeros(n, dtype=complex)
    v[index] = 1.0
    return v


# --------------------------------------------------------------------------
# Liouvillian
# --------------------------------------------------------------------------


def vec(rho) -> np.ndarray:
    return _arr(rho).reshape(-1, order="F")


def unvec(v, dims) -> QMatrix:
    d = math.prod(dims)
    return QMatrix(np.asarray(v).reshape((d, d), order="F"), tuple(dims))


def commutator_super(h) -> np.ndarray:
    """Matrix of ``rho -> -i 2 pi [H, rho]``."""
    h = _arr(h)
    eye = np.eye(h.shape[0])
    return -1j * TWO_PI * (np.kron(eye, h) - np.kron(h.T, eye))


def dissipator_super(op, rate=1.0) -> np.ndarray:
    """Matrix of ``rate * 2 pi * D[op]``; ``D[O] = O rho O^+ - {O^+ O, rho}/2``."""
    o = _arr(op)
    eye = np.eye(o.shape[0])
    od = o.conj().T @ o
    return TWO_PI * rate * (
        np.kron(o.conj(), o) - 0.5 * (np.kron(eye, od) + np.kron(od.T, eye))
    )


def liouvillian(m: LindbladModel, herm_tol: float = HERM_TOL) -> Superoperator:
    """Static generator ``L`` with ``vec(d rho/dt) = L vec(rho)``."""
    if m.periodic is not None:
        raise ValueError("liouvillian() takes static models; use evolve_periodic for periodic ones")
    h = m.hamiltonian
    err = h.hermiticity_error()
    if err > herm_tol * max(1.0, float(np.max(np.abs(h.data), initial=0.0))):
        raise ValueError(f"Hamiltonian is not Hermitian (error {err:.2e})")
    data = commutator_super(h.hermitized())
    for op, rate in m.jumps:
        if rate:
            data = data + dissipator_super(op, rate)
    return Superoperator(data, h.dims)


def _periodic_supers(m: LindbladModel):
    L0 = liouvillian(m.static_part()).data
    if m.periodic is None:
        return L0, None, None, 0.0
    a = m.periodic.op.data
    eye = np.eye(a.shape[0])
    # Hamiltonian piece A e^{+iwt}: -i2pi[A, rho]
    lp = -1j * TWO_PI * (np.kron(eye, a) - np.kron(a.T, eye))
    ad = a.conj().T
    lm = -1j * TWO_PI * (np.kron(eye, ad) - np.kron(ad.T, eye))
    return L0, lp, lm, float(m.periodic.freq)


# --------------------------------------------------------------------------
# steady states and spectra
# --------------------------------------------------------------------------


def _trace_row(d: int) -> np.ndarray:
    row = np.zeros(d * d, dtype=complex)
    row[:: d + 1] = 1.0
    return row


def steady_state(L: Superoperator, check_kernel: bool = True, tol: float = KERNEL_TOL) -> QMatrix:
    """Unique steady state of ``L``.

    Replaces one row of ``L`` by the trace condition and solves the linear
    system; falls back to a dense eigendecomposition when the residual
    ``max|L vec(rho)|`` exceeds ``tol``.

    Raises
    ------
    MultistabilityError
        If ``check_kernel`` and the second-slowest eigenvalue has real part
        above ``-tol``.
    SolverError
        If neither route yields a residual below ``tol``.
    """
    d = L.hilbert_dim
    if check_kernel:
        ev = liouvillian_spectrum(L, 2)
        if len(ev) > 1 and ev[1].real > -tol:
            raise MultistabilityError(
                f"degenerate Liouvillian kernel: second eigenvalue {ev[1]:.3e}"
            )
    A = L.data.copy()
    A[0, :] = _trace_row(d)
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    try:
        x = la.solve(A, b, check_finite=False)
        rho = _finalize(x, d)
        res = _residual(L, rho)
    except (la.LinAlgError, ValueError):
        res = np.inf
    if not res <= tol:
        log.debug("steady_state: direct residual %.2e, using eigensolver", res)
        w, vr = la.eig(L.data)
        k = int(np.argmin(np.abs(w)))
        x = vr[:, k]
        tr = x[:: d + 1].sum()
        if abs(tr) < 1e-14:
            raise SolverError("zero mode has vanishing trace")
        rho = _finalize(x / tr, d)
        res2 = _residual(L, rho)
        if not res2 <= tol:
            raise SolverError(f"steady-state residual {min(res, res2):.2e} > {tol:.0e}")
    return QMatrix(rho, L.dims)


def _finalize(x, d):
    rho = x.reshape((d, d), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _residual(L, rho):
    return float(np.max(np.abs(L.data @ rho.reshape(-1, order="F"))))


def liouvillian_spectrum(L: Superoperator, k: int | None = None) -> np.ndarray:
    """Eigenvalues of ``L`` (angular units, 1/ns) by descending real part."""
    w = la.eigvals(L.data, check_finite=False)
    order = np.lexsort((np.abs(w.imag), -w.real))
    w = w[order]
    return w if k is None else w[:k]


# --------------------------------------------------------------------------
# time evolution
# --------------------------------------------------------------------------


def _rhs(L0, lp, lm, f):
    w = TWO_PI * f
    if lp is None:
        return lambda t, y: L0 @ y
    return lambda t, y: L0 @ y + np.exp(1j * w * t) * (lp @ y) + np.exp(-1j * w * t) * (lm @ y)


def evolve_periodic(
    m: LindbladModel,
    rho0,
    t_end: float,
    dt_hint: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    t_start: float = 0.0,
):
    """Integrate the (possibly time-periodic) master equation.

    Returns a list of ``(t, QMatrix)`` sampled every ``dt_hint`` ns (the
    integrator itself is adaptive, DOP853).
    """
    rho0 = as_qmatrix(rho0, m.dims)
    L0, lp, lm, f = _periodic_supers(m)
    n = max(1, int(round((t_end - t_start) / dt_hint)))
    ts = np.linspace(t_start, t_end, n + 1)
    sol = solve_ivp(
        _rhs(L0, lp, lm, f), (t_start, t_end), vec(rho0), method="DOP853",
        t_eval=ts, rtol=rtol, atol=atol,
    )
    if not sol.success:
        raise SolverError(f"integration failed: {sol.message}")
    return [(t, unvec(sol.y[:, i], m.dims)) for i, t in enumerate(sol.t)]


def period_propagator(m: LindbladModel, t0: float = 0.0, rtol=1e-10, atol=1e-12) -> np.ndarray:
    """Superoperator mapping ``vec(rho(t0))`` to ``vec(rho(t0 + 1/f))``."""
    L0, lp, lm, f = _periodic_supers(m)
    if lp is None:
        raise ValueError("model has no periodic term")
    n = L0.shape[0]
    rhs = _rhs(L0, lp, lm, f)

    def mrhs(t, y):
        return rhs(t, y.reshape(n, n)).ravel()

    sol = solve_ivp(mrhs, (t0, t0 + 1.0 / f), np.eye(n, dtype=complex).ravel(),
                    method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise SolverError(f"propagator integration failed: {sol.message}")
    return sol.y[:, -1].reshape(n, n)


@dataclass
class PeriodAverage:
    rho: QMatrix
    periods: float
    residual: float
    oscillation: float


def trace_distance(a, b) -> float:
    diff = _arr(a) - _arr(b)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def period_averaged_steady(
    m: LindbladModel,
    rho0,
    tol: float = 1e-6,
    max_periods: float = 1e12,
    samples: int = 64,
    frame=None,
    return_info: bool = False,
):
    """Long-time state of a periodically driven model, averaged over one period.

    The state is propagated period by period (with strides that double while
    the state keeps changing) until one further period changes it by less than
    ``tol`` in trace distance. It is then sampled ``samples`` times over one
    final period and averaged.

    ``frame`` is an optional Hermitian generator ``N`` with integer spectrum;
    each sample is first moved to the frame ``exp(+i 2 pi f N t)``, which is
    how slow (rotating-frame) observables are compared with static models.
    """
    rho0 = as_qmatrix(rho0, m.dims)
    if m.periodic is None or not np.any(m.periodic.op.data):
        # amplitude zero: stationary state of the static part
        rho = steady_state(liouvillian(m.static_part()))
        out = PeriodAverage(rho, 0.0, 0.0, 0.0)
        return out if return_info else out.rho

    d = m.dim
    f = float(m.periodic.freq)
    P = period_propagator(m)
    x = vec(rho0)
    stride = P
    periods = 0.0
    step = 1.0
    while True:
        nxt = P @ x
        change = trace_distance(unvec(nxt, m.dims), unvec(x, m.dims))
        if change < tol:
            break
        if periods > max_periods:
            raise ConvergenceError(
                f"no periodic steady state within {max_periods:g} periods", residual=change
            )
        x = stride @ x
        x = x / x[:: d + 1].sum()
        periods += step
        if step < 2**40:
            stride = stride @ stride
            step *= 2

    L0, lp, lm, _ = _periodic_supers(m)
    ts = np.arange(samples) / (samples * f)
    sol = solve_ivp(_rhs(L0, lp, lm, f), (0.0, 1.0 / f), x, method="DOP853",
                    t_eval=ts, rtol=1e-10, atol=1e-12)
    if not sol.success:
        raise SolverError(sol.message)
    if frame is not None:
        nvals, nvecs = np.linalg.eigh(_arr(frame))
    snaps = []
    for i, t in enumerate(sol.t):
        r = sol.y[:, i].reshape((d, d), order="F")
        if frame is not None:
            u = (nvecs * np.exp(1j * TWO_PI * f * nvals * t)) @ nvecs.conj().T
            r = u @ r @ u.conj().T
        snaps.append(r)
    avg = np.mean(snaps, axis=0)
    avg = 0.5 * (avg + avg.conj().T)
    avg /= np.trace(avg).real
    osc = max(trace_distance(s, avg) for s in snaps)
    out = PeriodAverage(QMatrix(avg, m.dims), periods, change, osc)
    return out if return_info else out.rho


# --------------------------------------------------------------------------
# subsystems
# --------------------------------------------------------------------------


def partial_trace(rho, keep: Iterable[int]) -> QMatrix:
    rho = as_qmatrix(rho)
    dims = rho.dims
    keep = sorted(set(int(k) for k in keep))
    for k in keep:
        if not 0 <= k < len(dims):
            raise IndexError(f"subsystem {k} out of range for dims {dims}")
    n = len(dims)
    t = rho.data.reshape(dims + dims)
    drop = [i for i in range(n) if i not in keep]
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in drop:
        col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    red = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    kd = tuple(dims[i] for i in keep)
    side = math.prod(kd) if kd else 1
    return QMatrix(red.reshape(side, side), kd or (1,))
