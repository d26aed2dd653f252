"""Filtration problem: full model against the three reduced closures.

    python3 demos/filtration.py [inverse h, default 200]
"""
import sys

from sbdflow.scenarios import run_filtration

h_inv = int(sys.argv[1]) if len(sys.argv) > 1 else 200
rep = run_filtration(1.0 / h_inv).report
print(f"h = 1/{h_inv}, full model {rep.cpu_full:.2f}s")
for name, (eu, ev, ep) in rep.eps.items():
    print(f"{name:17s} eps_u {eu:.4e}  eps_v {ev:.4e}  eps_p {ep:.4e}  "
          f"cpu {rep.cpu_reduced[name]:.2f}s")
for name, (qin, qout, rel) in rep.mass_balance.items():
    print(f"mass balance {name}: {rel:.2e}")
