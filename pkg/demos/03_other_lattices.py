"""Same mechanism, other lattices.

A two-site cell with non-reciprocal intercell hopping, a chain with an extra
next-nearest-neighbour hop, and a chain with loss and gain that do not
commute with the hopping.

    python demos/03_other_lattices.py
"""
import numpy as np

from nhlattice import greens, numkernel, steadystate
from nhlattice.model import build_hn_nnn, build_nh_ssh, build_structured_noise_chain

# %% two-site cell: the infinite-lattice propagator already gives the bulk
args = (50, 1.0, 0.0, 1.0, 0.99, 0.01)
ssh = build_nh_ssh(*args, "open")
exact = steadystate.steady_state_direct(ssh).densities()
approx = greens.ssh_occupation_approx(ssh)
bulk = slice(18, 80)  # sites of cells 10-40
print("two-site cell, 50 cells")
print(f"  no-bounce vs exact in cells 10-40: {np.abs(approx[bulk] / exact[bulk] - 1).max():.1e}")
for bc in ("open", "periodic"):
    e = numkernel.eigvals_general(build_nh_ssh(*args, bc).h_eff)
    print(f"  {bc:>8} slowest decay {-e.imag.max():.4f}")

# %% next-nearest-neighbour hop: bosons now pile up on the left
n = 200
nnn = build_hn_nnn(n, 1.0, 0.99, 1.0, np.pi / 2, 0.01, "open", "boson")
dens = steadystate.steady_state_direct(nnn).densities()
j = np.arange(1, n + 1)
print("\nnext-nearest-neighbour chain, bosons")
print(f"  densest site {np.argmax(dens) + 1}, n_1 = {dens[0]:.2f}, n_N = {dens[-1]:.4f}")
print(f"  bulk log-slope {greens.log_slope(j, dens, 20, 180):+.4f} per site")

# %% structured noise: half filling in the bulk, opposite edge imbalances
n = 100
chain = build_structured_noise_chain(n, 1.0, 0.5, 0.5)
dens = steadystate.steady_state_direct(chain).densities()
print("\nstructured loss and gain, kappa = gamma")
print(f"  bulk density {dens[n // 2]:.4f}")
print(f"  edges {dens[0]:.4f} and {dens[-1]:.4f}, total excess {dens[0] + dens[-1] - 1:+.1e}")
