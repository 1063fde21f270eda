"""Open vs periodic Hatano-Nelson chain with weak uniform pumping.

The open chain has every right eigenvector piled against one edge within a
few sites, yet its steady-state density changes over ~50 sites. This script
puts the two length scales side by side.

    python demos/01_skin_effect_vs_healing.py
"""
import numpy as np

from nhlattice import greens, numkernel, steadystate
from nhlattice.model import build_hatano_nelson

n, w, kappa, gamma = 200, 1.0, 0.99, 0.01

# %% spectra: the open chain is strongly damped, the ring is almost undamped
for bc in ("open", "periodic"):
    e = numkernel.eigvals_general(build_hatano_nelson(n, w, kappa, gamma, bc).h_eff)
    print(f"{bc:>8}: slowest decay rate {-e.imag.max():.4f}, fastest {-e.imag.min():.4f}")

# %% the ring: uniform density, correlations decay over xi_pbc
ring = steadystate.steady_state_direct(build_hatano_nelson(n, w, kappa, gamma, "periodic"))
print(f"\nring density {ring.occupation(1):.5f} on every site")
print(f"correlation length xi_pbc = {steadystate.xi_pbc(kappa, gamma):.3f}")
for d in (0, 5, 10, 20):
    print(f"  |<c_1^dag c_{1 + d}>| = {abs(ring.correlation(1, 1 + d)):.3e}")

# %% the open chain, fermions and bosons
j = np.arange(1, n + 1)
for stats in ("fermion", "boson"):
    model = build_hatano_nelson(n, w, kappa, gamma, "open", stats)
    dens = steadystate.steady_state_direct(model).densities()
    p = greens.HNParams(w, kappa, gamma, stats)
    asym = greens.occupation_asymptotic(j, p, n)
    print(f"\n{stats}: n_1 = {dens[0]:.4f}, n_N/2 = {dens[n // 2 - 1]:.4f}, n_N = {dens[-1]:.4f}")
    print(f"  asymptotic form vs exact, sites 20-180: "
          f"{np.abs(asym[19:180] / dens[19:180] - 1).max():.2%} worst")
    print(f"  xi_obc = {greens.xi_obc(p):.2f}, "
          f"fitted {greens.fit_healing_length(j, dens, stats):.2f}")

# %% compare with the skin length of the eigenvectors
a = greens.HNParams(w, kappa, gamma).a
print(f"\nskin length 1/A = {1 / a:.3f} sites; healing length is ~{greens.xi_obc(p) * a:.0f}x longer")
