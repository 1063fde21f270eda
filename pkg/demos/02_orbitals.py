"""What is occupied in the open chain: orbitals of the steady state.

The covariance matrix is Hermitian even though H_eff is not, and its
eigenvectors (orbitals) are extended over the chain. With no coherent hop
they are exactly standing waves; a finite hop mixes neighbouring momenta,
which second-order perturbation theory captures well for the weakly
occupied orbitals.

    python demos/02_orbitals.py
"""
import numpy as np

from nhlattice import numkernel, orbitals, steadystate
from nhlattice.model import build_hatano_nelson

n, w, kappa, gamma = 100, 0.9, 1.0, 0.01
model = build_hatano_nelson(n, w, kappa, gamma, "open")
cov = steadystate.steady_state_direct(model)
d = orbitals.decompose(cov)

# %% localisation: eigenvectors vs orbitals
right = numkernel.eig_general(model.h_eff).right
print(f"participation ratio of H_eff eigenvectors: max {orbitals.participation_ratio(right).max():.2f}")
pr = orbitals.participation_ratio(d.orbitals)
print(f"participation ratio of orbitals:           min {pr.min():.1f} (N = {n})")

# %% occupations and Gaussian weights
print("\nmost occupied orbitals")
for r in range(5):
    print(f"  r={r + 1}: n = {d.occupations[r]:.4f}, ln(n/(1-n)) = {d.log_weights[r]:+.3f}")

# %% perturbation theory around the standing waves
vecs, n0 = orbitals.perturbative_orbitals(model, order=2)
order = np.argsort(-n0, kind="stable")
overlap = np.abs(np.sum(d.orbitals.conj() * vecs[:, order], axis=0)) ** 2
print("\noverlap with second-order standing waves")
for label, sl in (("most occupied quarter", slice(0, n // 4)), ("remaining 75%", slice(n // 4, n))):
    print(f"  {label:>22}: min {overlap[sl].min():.4f}, mean {overlap[sl].mean():.4f}")

# %% occupation estimate from an orbital alone
# exact for the true orbitals; on the perturbative ones it is only as good as
# the overlap above, so look at the weakly occupied end
print("\n<G>/(<G>+<L>) on perturbative orbitals vs exact occupation")
for r in range(n - 5, n):
    est = orbitals.orbital_occupation_rayleigh(vecs[:, order[r]], model)
    print(f"  r={r + 1}: {est:.5f} vs {d.occupations[r]:.5f}")
