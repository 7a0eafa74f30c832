import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from thzent.models import SystemParams, ValidityWarning

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

GAMMA = 0.03979  # emitter linewidth, GHz


def operating_point(n_fock=4, **kw):
    """Red-circle operating point of the drive-plane study."""
    base = dict(f_thz=1000.0, delta=(874.9, 868.9), omega=(499.7, 496.3),
                omega_sb=(16.7, 17.5), chi=24.4, kappa=59.6, gamma=GAMMA, n_fock=n_fock)
    base.update(kw)
    return SystemParams(**base)


def detuned_pair(omega_sb=0.0, **kw):
    base = dict(f_thz=1000.0, delta=(871.6, 867.4), omega=(499.8, 497.4),
                omega_sb=(omega_sb, omega_sb), chi=0.0, kappa=59.6, gamma=GAMMA, n_fock=4)
    base.update(kw)
    return SystemParams(**base)


@pytest.fixture
def op_point():
    return operating_point()


@pytest.fixture(autouse=True)
def _quiet_validity():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        yield


def random_density(rng, d, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
