import math

import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_density
from thzent.qcore import (
    ID2, SIGMA_MINUS, SIGMA_X, SIGMA_Z, TWO_PI, LindbladModel, MultistabilityError,
    PeriodicTerm, QMatrix, destroy, embed, evolve_periodic, identity, ket, kron,
    liouvillian, liouvillian_spectrum, partial_trace, period_averaged_steady,
    steady_state, trace_distance, unvec, vec,
)


def qubit(h, gamma=0.0):
    jumps = [(SIGMA_MINUS, gamma)] if gamma else []
    return LindbladModel(QMatrix(h), jumps)


# ---------------------------------------------------------------- types


def test_qmatrix_rejects_bad_shapes():
    with pytest.raises(ValueError):
        QMatrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        QMatrix(np.eye(4), (2, 3))


def test_check_density():
    QMatrix(np.diag([0.5, 0.5])).check_density()
    with pytest.raises(ValueError):
        QMatrix(np.diag([0.6, 0.6])).check_density()
    with pytest.raises(ValueError):
        QMatrix(np.array([[0.5, 0.1], [0.0, 0.5]])).check_density()
    with pytest.raises(ValueError):
        QMatrix(np.diag([1.1, -0.1])).check_density()


def test_model_validation():
    with pytest.raises(ValueError):
        LindbladModel(SIGMA_Z, [(SIGMA_MINUS, -1.0)])
    with pytest.raises(ValueError):
        LindbladModel(SIGMA_Z, [(kron(ID2, ID2), 1.0)])
    with pytest.raises(ValueError):
        liouvillian(LindbladModel(QMatrix(np.array([[0, 1], [0, 0]])), []))


# ---------------------------------------------------------------- kron


def test_kron_identity():
    k = kron(ID2, ID2)
    assert k.dims == (2, 2)
    assert np.allclose(k.data, np.eye(4))


def test_kron_sigma_z_on_eg():
    # |e g> is index 1 with the upper state first
    eg = np.kron(ket(0, 2), ket(1, 2))
    assert np.allclose(kron(SIGMA_Z, ID2) @ eg, eg)


def test_kron_xx_squares_to_identity():
    xx = kron(SIGMA_X, SIGMA_X)
    assert np.allclose((xx @ xx).data, np.eye(4))


def test_embed_and_destroy():
    a = destroy(4)
    assert np.allclose(a.data @ ket(2, 4), math.sqrt(2) * ket(1, 4))
    op = embed(a, 1, (2, 4))
    assert op.dims == (2, 4)
    assert np.allclose(op.data, np.kron(np.eye(2), a.data))
    with pytest.raises(IndexError):
        embed(a, 2, (2, 4))


# ---------------------------------------------------------------- Liouvillian


def test_pure_decay_spectrum_and_steady_state():
    g = 0.3
    L = liouvillian(qubit(np.zeros((2, 2)), g))
    ev = liouvillian_spectrum(L)
    assert abs(ev[0]) < 1e-12
    assert np.allclose(sorted(ev.real), sorted([0, -math.pi * g, -math.pi * g, -TWO_PI * g]))
    rho = steady_state(L)
    assert np.allclose(rho.data, np.diag([0, 1]))


def test_zero_generator():
    L = liouvillian(qubit(np.zeros((2, 2))))
    assert not np.any(L.data)
    assert np.allclose(liouvillian_spectrum(L), 0)
    with pytest.raises(MultistabilityError):
        steady_state(L)


@pytest.mark.parametrize("omega,delta,gamma", [(1.0, 0.0, 0.5), (0.3, 0.7, 0.2), (2.0, -1.0, 1.0)])
def test_optical_bloch_population(omega, delta, gamma):
    # resonance fluorescence: rho_ee = (W^2/4) / (D^2 + G^2/4 + W^2/2); the common 2 pi cancels
    h = 0.5 * omega * SIGMA_X.data + 0.5 * delta * SIGMA_Z.data
    rho = steady_state(liouvillian(qubit(h, gamma)))
    expected = (omega ** 2 / 4) / (delta ** 2 + gamma ** 2 / 4 + omega ** 2 / 2)
    assert rho.data[0, 0].real == pytest.approx(expected, abs=1e-12)


def test_independent_qubits_factorize():
    h1 = 0.5 * 1.2 * SIGMA_X.data + 0.4 * SIGMA_Z.data
    h2 = 0.5 * 0.5 * SIGMA_X.data - 0.2 * SIGMA_Z.data
    r1 = steady_state(liouvillian(qubit(h1, 0.4))).data
    r2 = steady_state(liouvillian(qubit(h2, 0.9))).data
    dims = (2, 2)
    m = LindbladModel(embed(QMatrix(h1), 0, dims) + embed(QMatrix(h2), 1, dims),
                      [(embed(SIGMA_MINUS, 0, dims), 0.4), (embed(SIGMA_MINUS, 1, dims), 0.9)])
    rho = steady_state(liouvillian(m))
    assert np.allclose(rho.data, np.kron(r1, r2), atol=1e-12)


def _random_model(seed, d=3, n_jumps=2):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = a + a.conj().T
    jumps = [(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)), rng.uniform(0.1, 2.0))
             for _ in range(n_jumps)]
    return LindbladModel(QMatrix(h), jumps), rng


@given(st.integers(0, 2**32 - 1))
def test_liouvillian_preserves_trace_and_hermiticity(seed):
    m, rng = _random_model(seed)
    L = liouvillian(m)
    rho = random_density(rng, 3)
    out = unvec(L @ vec(rho), m.dims).data
    scale = np.max(np.abs(L.data))
    assert abs(np.trace(out)) <= 1e-8 * scale
    assert np.max(np.abs(out - out.conj().T)) <= 1e-8 * scale


@given(st.integers(0, 2**32 - 1))
def test_steady_state_residual(seed):
    m, _ = _random_model(seed, d=4, n_jumps=3)
    L = liouvillian(m)
    rho = steady_state(L)
    rho.check_density()
    assert np.max(np.abs(L @ vec(rho))) <= 1e-9
    assert abs(liouvillian_spectrum(L, 1)[0]) <= 1e-9


def test_spectrum_ordering():
    m, _ = _random_model(5, d=3)
    ev = liouvillian_spectrum(liouvillian(m))
    assert np.all(np.diff(ev.real) <= 1e-12)
    assert len(liouvillian_spectrum(liouvillian(m), 3)) == 3


# ---------------------------------------------------------------- time evolution


def test_evolve_static_matches_expm():
    h = 0.5 * 0.8 * SIGMA_X.data + 0.3 * SIGMA_Z.data
    m = qubit(h, 0.2)
    L = liouvillian(m)
    rho0 = np.diag([0.0, 1.0]).astype(complex)
    traj = evolve_periodic(m, rho0, 3.0, 0.5)
    for t, rho in traj:
        ref = unvec(la.expm(L.data * t) @ vec(rho0), m.dims)
        assert trace_distance(rho, ref) < 1e-7


def test_evolve_zero_generator_is_constant():
    m = qubit(np.zeros((2, 2)))
    rho0 = random_density(np.random.default_rng(1), 2)
    for _, rho in evolve_periodic(m, rho0, 2.0, 0.25):
        assert np.allclose(rho.data, rho0)


def test_rabi_period():
    omega = 0.5  # GHz, so the population period is 1 / omega = 2 ns
    m = qubit(0.5 * omega * SIGMA_X.data)
    traj = evolve_periodic(m, np.diag([0.0, 1.0]), 4.0, 0.05, rtol=1e-10, atol=1e-12)
    t = np.array([x[0] for x in traj])
    pe = np.array([x[1].data[0, 0].real for x in traj])
    assert np.allclose(pe, np.sin(math.pi * omega * t) ** 2, atol=1e-7)
    assert pe[np.argmin(abs(t - 1.0))] == pytest.approx(1.0, abs=1e-7)
    assert pe[np.argmin(abs(t - 2.0))] == pytest.approx(0.0, abs=1e-7)


def _driven(freq, amp):
    h = 0.5 * 0.6 * SIGMA_X.data + 0.2 * SIGMA_Z.data
    per = PeriodicTerm(QMatrix(amp * SIGMA_X.data), freq) if amp else None
    return LindbladModel(QMatrix(h), [(SIGMA_MINUS, 0.5)], per)


def test_period_average_with_zero_amplitude():
    m = _driven(5.0, 0.0)
    rho = period_averaged_steady(m, np.diag([1.0, 0.0]))
    assert np.allclose(rho.data, steady_state(liouvillian(m.static_part())).data)


def test_period_average_fast_oscillation_limit():
    ref = steady_state(liouvillian(_driven(1.0, 0.0)))
    d = [trace_distance(period_averaged_steady(_driven(f, 0.3), np.diag([0.0, 1.0])), ref)
         for f in (3.0, 30.0, 300.0)]
    assert d[0] > d[1] > d[2]
    assert d[2] < 1e-3


def test_period_average_info():
    info = period_averaged_steady(_driven(3.0, 0.3), np.diag([0.0, 1.0]), return_info=True)
    info.rho.check_density()
    assert info.residual < 1e-6
    assert info.oscillation > 0


# ---------------------------------------------------------------- partial trace


def test_partial_trace_product():
    rng = np.random.default_rng(3)
    a, b = random_density(rng, 2), random_density(rng, 3)
    rho = QMatrix(np.kron(a, b), (2, 3))
    assert np.allclose(partial_trace(rho, [0]).data, a)
    assert np.allclose(partial_trace(rho, [1]).data, b)


def test_partial_trace_bell():
    phi = np.array([0, 1, -1, 0]) / math.sqrt(2)
    assert np.allclose(partial_trace(QMatrix(np.outer(phi, phi), (2, 2)), [1]).data, np.eye(2) / 2)


def test_partial_trace_brute_force():
    rng = np.random.default_rng(11)
    dims = (2, 3, 2)
    rho = random_density(rng, 12)
    t = rho.reshape(dims + dims)
    ref = np.zeros((2, 2, 2, 2), complex)
    for i0 in range(2):
        for i2 in range(2):
            for j0 in range(2):
                for j2 in range(2):
                    ref[i0, i2, j0, j2] = sum(t[i0, k, i2, j0, k, j2] for k in range(3))
    out = partial_trace(QMatrix(rho, dims), [0, 2])
    assert out.dims == (2, 2)
    assert np.allclose(out.data, ref.reshape(4, 4))


def test_identity_helper():
    assert np.allclose(identity(3).data, np.eye(3))
