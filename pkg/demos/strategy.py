"""Four-step tuning strategy started from a detuned carrier configuration."""
import warnings

from thzent import SystemParams, strategy_trace
from thzent.models import ValidityWarning

warnings.simplefilter("ignore", ValidityWarning)

start = SystemParams(f_thz=1000.0, delta=(874.9, 868.9), omega=(537.3, 529.7),
                     omega_sb=(16.7, 17.5), chi=24.4, kappa=59.6, gamma=0.03979, n_fock=4)
for step in strategy_trace(start, {"omega_r_tilde": 16.0}):
    p = step.params
    c = "  n/a " if step.concurrence is None else f"{step.concurrence:.4f}"
    print(f"{step.label:20s} C={c}  conditions={step.report.satisfied}  "
          f"Omega=({p.omega[0]:.2f}, {p.omega[1]:.2f})  Delta=({p.delta[0]:.2f}, {p.delta[1]:.2f})  "
          f"Omega_sb=({p.omega_sb[0]:.2f}, {p.omega_sb[1]:.2f})")
