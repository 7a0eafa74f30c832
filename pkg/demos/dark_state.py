"""Dark-state stabilisation under the reduced drive parameters.

Picks the doubly-dressed angle and Rabi frequency, lets the reduction fix
every drive amplitude and detuning, and compares the steady state of three
model levels with the target dark state.
"""
import warnings

import numpy as np

from thzent import (
    build_adiabatic_model, build_doubly_dressed_model, build_grwa_model, condition_residuals,
    dark_state, doubly_dressed_frame, dressed_frame, fidelity, reduce_parameters, steady_report,
    steady_state, liouvillian,
)
from thzent.models import ValidityWarning, dressed_to_bare

warnings.simplefilter("ignore", ValidityWarning)

chi, kappa, f = 24.4, 59.6, 1000.0
for gamma in (0.0, 0.03979):
    print(f"gamma = {gamma} GHz")
    for w in (16.0, 40.0, 100.0):
        p = reduce_parameters(w, 0.68, 500.0, chi, kappa, f, gamma, n_fock=6)
        rep = condition_residuals(p)
        ddf = doubly_dressed_frame(p)
        psi_dd, psi_d = dark_state(ddf)
        psi_bare = dressed_to_bare(dressed_frame(p)) @ psi_d
        f_dd = fidelity(steady_state(liouvillian(build_doubly_dressed_model(p))),
                        np.outer(psi_dd, psi_dd.conj()))
        f_ad = fidelity(steady_state(liouvillian(build_adiabatic_model(p))),
                        np.outer(psi_d, psi_d.conj()))
        g = steady_report(build_grwa_model(p))
        f_gr = fidelity(g.rho, np.outer(psi_bare, psi_bare.conj()))
        print(f"  W~={w:5.1f}  Gamma={ddf.purcell[0]:.2f}  conditions ok: {rep.all_satisfied}  "
              f"F(doubly dressed)={f_dd:.4f}  F(adiabatic)={f_ad:.4f}  F(GRWA)={f_gr:.4f}  "
              f"C(GRWA)={g.concurrence:.4f}")
