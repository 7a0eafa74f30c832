import math

import numpy as np
import pytest

from conftest import GAMMA, detuned_pair, operating_point
from thzent.conditions import InfeasiblePoint
from thzent.models import build_adiabatic_model, build_grwa_model, doubly_dressed_frame
from thzent.observables import steady_report
from thzent.optimize import (
    Axis, Cavity, drive_plane, fmt, maximize_concurrence, reference_theta, rows_to_csv, sweep_map,
    validate_full,
)

# best node of the 6x6 log grid at f_thz = 1000 GHz used by the acceptance suite
MAP_OPTIMUM_1000 = dict(chi=10 * 10 ** 0.8, kappa=10 * 10 ** 0.6, f_thz=1000.0)


@pytest.fixture(scope="module")
def map_optimum():
    return maximize_concurrence(Cavity(**MAP_OPTIMUM_1000))


def test_maximize_at_map_optimum(map_optimum):
    r = map_optimum
    assert r.concurrence == pytest.approx(0.90, abs=0.03)
    assert r.valid and r.converged
    lo, hi = 0.26, math.pi / 4
    assert lo < r.theta_tilde < hi


def test_optimum_reevaluates_exactly(map_optimum):
    rep = steady_report(build_grwa_model(map_optimum.params, warn=False))
    assert abs(rep.concurrence - map_optimum.concurrence) <= 1e-8


def test_optimum_satisfies_conditions(map_optimum):
    from thzent.conditions import condition_residuals

    assert condition_residuals(map_optimum.params).all_satisfied


def test_gamma_zero_limit():
    r = maximize_concurrence(Cavity(gamma=0.0, **MAP_OPTIMUM_1000))
    assert r.concurrence > 0.98


def test_no_carrier_is_infeasible():
    with pytest.raises(InfeasiblePoint):
        maximize_concurrence(Cavity(omega_max=0.0, **MAP_OPTIMUM_1000))


def test_weak_carrier_switches_off_dissipative_mechanism():
    # without dressing the Purcell rates vanish; what is left of the entanglement
    # comes from the coherent cavity-mediated exchange J, not from the dark state
    r = maximize_concurrence(Cavity(omega_max=0.1, **MAP_OPTIMUM_1000), grid=(4, 4))
    ddf = doubly_dressed_frame(r.params)
    assert max(ddf.purcell) < 1e-4 * GAMMA
    c_no_exchange = steady_report(build_adiabatic_model(r.params, J=0.0, warn=False)).concurrence
    assert c_no_exchange < 1e-6


@pytest.mark.parametrize("kw", [dict(chi=-1.0, kappa=10.0, f_thz=1000.0),
                                dict(chi=10.0, kappa=0.0, f_thz=1000.0)])
def test_rejects_nonpositive_cavity(kw):
    with pytest.raises(ValueError):
        maximize_concurrence(Cavity(**kw))


def test_validity_flags():
    cav = Cavity(chi=50.0, kappa=200.0, f_thz=1000.0)
    assert cav.validity() == {"adiabatic": True, "rwa": False}
    th = reference_theta(cav)
    cav = Cavity(chi=50.0, kappa=0.99 * math.sin(2 * th) * 50.0, f_thz=1000.0)
    assert cav.validity() == {"adiabatic": False, "rwa": True}


def test_empty_sweep():
    g = sweep_map(Axis("chi", 10, 20, 0), Axis("kappa", 10, 20, 3), 1000.0)
    assert g.rows == [] and g.best() is None
    text = rows_to_csv(g.rows, ["chi", "kappa", "concurrence"])
    assert text == "chi,kappa,concurrence\n"


def test_sweep_marks_failures():
    g = sweep_map(Axis("chi", 30, 30, 1), Axis("kappa", 20, 20, 1), 1000.0, omega_max=0.0)
    (row,) = g.rows
    assert row["status"] == "failed" and row["reason"]
    assert math.isnan(row["concurrence"])


def test_axis_values():
    assert np.allclose(Axis("x", 1, 100, 3, "log").values(), [1, 10, 100])
    assert np.allclose(Axis("x", 0, 1, 3).values(), [0, 0.5, 1])
    with pytest.raises(ValueError):
        Axis("x", 0, 1, 3, "cubic").values()


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, 1e-300, 12345.678):
        assert float(fmt(x)) == x
    assert fmt(True) == "1"


def test_drive_plane_mirror_symmetry():
    # identical emitters: swapping the carrier amplitudes swaps the qubits,
    # which leaves the concurrence unchanged
    base = operating_point(delta=(870.0, 870.0), omega_sb=(17.0, 17.0))
    o = np.array([495.0, 500.0, 505.0])
    dp = drive_plane(base, o, o, refine=False)
    assert np.allclose(dp.concurrence, dp.concurrence.T, atol=1e-9)
    assert dp.maximum is None and dp.cell_offset() is None


def test_drive_plane_intersection_near_operating_point():
    p = operating_point()
    o1 = np.linspace(495.0, 505.0, 5)
    o2 = np.linspace(491.0, 501.0, 5)
    dp = drive_plane(p, o1, o2, refine=False)
    a, b, rms = dp.intersection
    assert abs(a - 499.7) < 0.5 and abs(b - 496.3) < 0.5
    assert rms < 1e-2


def test_drive_plane_empty():
    dp = drive_plane(operating_point(), np.zeros(0), np.array([1.0]))
    assert dp.concurrence.shape == (0, 1)
    assert dp.intersection is None and dp.curves == {}


def test_validate_full_without_cavity_coupling():
    # chi = 0: both models reduce to independently driven emitters, no entanglement
    v = validate_full(detuned_pair(omega_sb=5.0, n_fock=2), tol=1e-8)
    assert v.c_grwa == pytest.approx(0.0, abs=1e-6)
    assert v.c_full == pytest.approx(0.0, abs=1e-3)
