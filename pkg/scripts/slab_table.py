"""Energies per transverse area for Dirichlet plates in 1 + d2 space dimensions."""

import math

from zetavac import observables as O
from zetavac import spectrum as S

for d2 in (1, 2, 3):
    dom = S.slab(S.segment(1.0, "dirichlet"), d2)
    xi = O.xi_critical(1 + d2)
    rep = O.energy_report(O.ObservableRequest(dom, xi))
    flag = " (kappa dependent)" if rep.pole_order else ""
    print(f"d2 = {d2}: E = {rep.total:+.15f}{flag}")
print(f"reference for d2 = 2: -pi^2/1440 = {-math.pi**2 / 1440:+.15f}")
