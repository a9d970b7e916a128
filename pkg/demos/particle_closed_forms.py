"""Point-particle reduction against its closed-form solutions.

Integrates the non-compact pure-quasitriangular particle and compares it
with the exact solution (group factor times a one-parameter subgroup,
exponential chiral momenta), then shows the principal limit: as mu grows
the trajectory approaches geodesic motion for the bi-invariant metric
with deviation O(1/mu).

Run:  python demos/particle_closed_forms.py
"""

import numpy as np

from pltdual.duality import splitting
from pltdual.groups import GroupKit, expm2
from pltdual.models import make_preset
from pltdual.particle import integrate_particle, principal_limit_solution, pure_qt_solution

# exact solution of the pure quasitriangular flow
preset = make_preset("pure-qt", algebra="sl2r")
kit = GroupKit(preset.bialgebra)
split = splitting(preset)
omega, x0 = 0.8, 0.35 + 0.0j
u0 = expm2(kit.mat(np.array([0.1, -0.2, 0.3])))
p0 = np.array([2 * omega, x0, np.conj(x0)], dtype=complex)
traj = integrate_particle(kit, split, u0, p0, 1e-3, 1000)
u_exact, p_exact = pure_qt_solution(kit, u0, omega, x0, 1.0)
print("pure quasitriangular flow at t = 1:")
print(f"  |u - u_exact| = {np.max(np.abs(traj.us[-1] - u_exact)):.2e}")
print(f"  |p - p_exact| = {np.max(np.abs(traj.ps[-1] - p_exact)):.2e}")
print(f"  energy drift  = {np.max(np.abs(traj.hams - traj.hams[0])):.2e}")

# the principal limit
print("principal limit (deviation from geodesic motion):")
p0c = np.array([0.3, -0.1, 0.2], dtype=complex)
for mu in (1e3, 1e5, 1e7):
    pre = make_preset("principal-limit", algebra="su2", mu=mu)
    kit_l = GroupKit(pre.bialgebra)
    split_l = splitting(pre)
    u0c = expm2(kit_l.mat(np.array([0.2, 0.1, -0.3])))
    tr = integrate_particle(kit_l, split_l, u0c, p0c, 1e-3, 1000)
    dev = np.max(np.abs(tr.us[-1] - principal_limit_solution(kit_l, split_l, u0c, p0c, 1.0)))
    print(f"  mu = {mu:.0e}: deviation = {dev:.2e}")
