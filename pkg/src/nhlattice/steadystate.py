"""Steady-state covariance of open quadratic lattices.

The normal-ordered two-point matrix ``F_mn = <c_n^dagger c_m>`` of the
stationary state solves the Lyapunov equation

    H_eff F - F H_eff^dagger = -i G.

Three independent routes are provided: a Schur-based Sylvester solve (the
production path), the biorthogonal eigenbasis sum, and the frequency integral
``F = int d omega / 2 pi R G R^dagger`` with ``R = (omega - H_eff)^-1``. The
periodic non-reciprocal chain additionally has closed forms in momentum and
real space.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkernel as nk
from .errors import DimensionError, InvalidParameter, QuadratureUnderResolved, UnstableBoson
from .model import Statistics, effective_hamiltonian, require_stable
from .quadrature import QuadratureSpec

__all__ = [
    "CovarianceMatrix",
    "lyapunov_residual",
    "steady_state_direct",
    "steady_state_eigenbasis",
    "steady_state_frequency",
    "anti_normal_covariance",
    "momentum_basis",
    "pbc_momentum_occupation",
    "pbc_realspace_correlation",
    "xi_pbc",
]

CHUNK = 512


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Normal-ordered covariance ``F_mn = <c_n^dagger c_m>``.

    Sites are labelled ``1..N`` in :meth:`occupation` and
    :meth:`correlation`; the underlying array is zero-based.
    """

    f: np.ndarray
    statistics: Statistics = Statistics.FERMION

    def __post_init__(self):
        object.__setattr__(self, "statistics", Statistics.parse(self.statistics))

    @property
    def n_sites(self):
        return self.f.shape[0]

    def densities(self):
        """Site occupations ``<c_j^dagger c_j>`` as a real array."""
        return np.real(np.diagonal(self.f)).copy()

    def occupation(self, j):
        return float(np.real(self.f[j - 1, j - 1]))

    def correlation(self, j, p):
        """``<c_j^dagger c_p>`` for sites ``j, p`` in ``1..N``."""
        return complex(self.f[p - 1, j - 1])

    def hermiticity_error(self):
        return nk.max_abs(self.f - self.f.conj().T)

    def eigenvalue_bounds(self):
        vals = nk.eigh(self.f)[0]
        return float(vals[0]), float(vals[-1])

    def check(self, tol=1e-9):
        """True when Hermitian and eigenvalues lie in the allowed interval."""
        if self.hermiticity_error() > 1e-10 * max(1.0, nk.max_abs(self.f)):
            return False
        lo, hi = self.eigenvalue_bounds()
        if lo < -tol:
            return False
        return self.statistics is Statistics.BOSON or hi <= 1.0 + tol


def lyapunov_residual(model, f):
    """Max-norm of ``H_eff F - F H_eff^dagger + i G``."""
    h = effective_hamiltonian(model)
    f = f.f if isinstance(f, CovarianceMatrix) else np.asarray(f)
    return nk.max_abs(h @ f - f @ h.conj().T + 1j * model.gain)


def _hermitize(f):
    return 0.5 * (f + f.conj().T)


def steady_state_direct(model):
    """Solve the Lyapunov equation by the Bartels-Stewart method.

    Raises
    ------
    Unstable, UnstableBoson
        If some eigenvalue of the effective Hamiltonian has ``Im E >= 0``.
    """
    require_stable(model)
    h = effective_hamiltonian(model)
    # stability already separates the spectra of h and h^dagger
    f = nk.solve_sylvester(h, h.conj().T, -1j * model.gain, check=False)
    return CovarianceMatrix(_hermitize(f), model.statistics)


def steady_state_eigenbasis(model):
    """Covariance from the biorthogonal eigenbasis of ``H_eff``.

    ``F = -i sum_ab |R_a> <L_a|G|L_b> / (E_a - E_b^*) <R_b|``. Exact in
    exact arithmetic but loses accuracy like the eigenvector condition number,
    so it is a cross-check rather than a production route for long open
    chains.
    """
    require_stable(model)
    spec = nk.eig_general(effective_hamiltonian(model))
    e, r, left = spec.eigenvalues, spec.right, spec.left
    kernel = left.conj().T @ model.gain @ left
    m = -1j * kernel / (e[:, None] - e.conj()[None, :])
    return CovarianceMatrix(_hermitize(r @ m @ r.conj().T), model.statistics)


def _gain_factor(gain):
    vals, vecs = nk.eigh(gain)
    keep = vals > 1e-14 * max(1.0, np.abs(vals).max())
    return vecs[:, keep] * np.sqrt(vals[keep])


def _frequency_sum(h, factor, omega, weight, tail, gain):
    n = h.shape[0]
    eye = np.eye(n)
    total = np.zeros((n, n), dtype=complex)
    if factor.shape[1] == 0:
        return total
    for start in range(0, omega.size, CHUNK):
        om = omega[start:start + CHUNK]
        mats = om[:, None, None] * eye - h[None, :, :]
        rhs = np.broadcast_to(factor, (om.size,) + factor.shape)
        y = np.linalg.solve(mats, rhs)
        # sum_k w_k y_k y_k^dagger as one product over the stacked (k, a) index
        yw = (y * weight[start:start + CHUNK, None, None]).transpose(1, 0, 2).reshape(n, -1)
        total += yw @ y.transpose(1, 0, 2).reshape(n, -1).conj().T
    total += tail * gain
    return total / (2.0 * np.pi)


def steady_state_frequency(model, quad=None, check=True, rtol=1e-6):
    """Covariance from the frequency integral of ``R G R^dagger``.

    Parameters
    ----------
    model : OpenLatticeModel
    quad : QuadratureSpec, optional
        Defaults to 4096-node Gauss-Legendre on the mapped real line.
    check : bool
        Repeat with twice the nodes and compare.
    rtol : float
        Allowed change under doubling, relative to ``max|F|``.

    Raises
    ------
    QuadratureUnderResolved
        If doubling the number of nodes changes ``F`` by more than ``rtol``.
    """
    require_stable(model)
    quad = quad or QuadratureSpec()
    h = effective_hamiltonian(model)
    e = nk.eigvals_general(h)
    factor = _gain_factor(model.gain)
    f = _frequency_sum(h, factor, *quad.rule(e), model.gain)
    if check:
        fine = _frequency_sum(h, factor, *quad.doubled().rule(e), model.gain)
        scale = max(nk.max_abs(fine), 1e-300)
        change = nk.max_abs(fine - f)
        if change > rtol * scale:
            raise QuadratureUnderResolved(
                f"doubling {quad.n_points} nodes changed F by {change / scale:.2e} (relative)"
            )
        f = fine
    return CovarianceMatrix(_hermitize(f), model.statistics)


def anti_normal_covariance(model, f=None):
    """Anti-normal-ordered covariance ``D_mn = <c_m c_n^dagger>``.

    Solves ``H_eff D - D H_eff^dagger = -i L`` directly. For a valid
    steady state ``D = 1 - F`` (fermions) or ``D = 1 + F`` (bosons); when
    ``f`` is given the deviation from that identity is returned as well.
    """
    require_stable(model)
    h = effective_hamiltonian(model)
    d = _hermitize(nk.solve_sylvester(h, h.conj().T, -1j * model.loss, check=False))
    if f is None:
        return d
    f = f.f if isinstance(f, CovarianceMatrix) else np.asarray(f)
    expected = np.eye(h.shape[0]) - model.statistics.sign * f
    return d, nk.max_abs(d - expected)


# ---------------------------------------------------------------------------
# periodic non-reciprocal chain


def momentum_basis(n):
    """Plane waves ``U[j, m] = exp(i k_m j) / sqrt(N)`` with ``k_m = 2 pi m / N``, ``m = 1..N``.

    ``U^dagger F U`` is the covariance in momentum space.
    """
    if n < 1:
        raise DimensionError("need at least one site")
    k = 2.0 * np.pi * np.arange(1, n + 1) / n
    j = np.arange(1, n + 1)
    return k, np.exp(1j * np.outer(j, k)) / np.sqrt(n)


def pbc_momentum_occupation(k, kappa, gamma, statistics="fermion"):
    """Momentum occupation of the periodic chain, ``1/(e^{beta eps} +- 1)``.

    The Boltzmann factor is ``e^{-beta eps(k)} = 2 gamma / kappa(k)`` with
    mode loss rate ``kappa(k) = 2 kappa (1 + sin k)``. Only the product
    ``beta eps`` is meaningful, so neither factor is exposed.

    Raises
    ------
    UnstableBoson
        Bosons with ``kappa(k) <= 2 gamma`` for some requested ``k``.
    """
    stats = Statistics.parse(statistics)
    k = np.asarray(k, dtype=float)
    loss_k = 2.0 * kappa * (1.0 + np.sin(k))
    if stats is Statistics.FERMION:
        out = 2.0 * gamma / (loss_k + 2.0 * gamma)
    else:
        if np.any(loss_k <= 2.0 * gamma):
            raise UnstableBoson("momentum mode with kappa(k) <= 2 gamma grows without bound")
        out = 2.0 * gamma / (loss_k - 2.0 * gamma)
    return out if out.ndim else float(out)


def xi_pbc(kappa, gamma):
    """Correlation length ``1 / arccosh(1 + gamma/kappa)`` in sites."""
    if not (kappa > 0 and gamma > 0):
        raise InvalidParameter("kappa and gamma must be positive")
    return 1.0 / _arccosh1p(gamma / kappa)


def _arccosh1p(x):
    # arccosh(1 + x) without cancellation for small x
    return np.log1p(x + np.sqrt(x * (x + 2.0)))


def pbc_realspace_correlation(j, p, n, kappa, gamma):
    """Closed-form ``<c_j^dagger c_p>`` of the fermionic periodic chain.

    Sums the momentum occupations geometrically; the result depends on
    ``d = (p - j) mod N`` only and decays as ``exp(-d / xi_pbc)`` (times the
    phase ``i^-d``) away from the wrap-around.
    """
    if n < 2:
        raise DimensionError("periodic chain needs at least two sites")
    for s in (j, p):
        if not 1 <= s <= n:
            raise DimensionError(f"site {s} outside 1..{n}")
    inv = _arccosh1p(gamma / kappa)
    d = (p - j) % n
    phase_n = 1j ** (-(n % 4))
    pref = gamma * 1j ** (-(d % 4)) / (kappa * np.sinh(inv))
    first = np.exp(-d * inv) / (1.0 - phase_n * np.exp(-n * inv))
    # e^{d/xi} / (1 - i^-N e^{N/xi}) rewritten to avoid overflow
    second = np.exp((d - n) * inv) / (np.exp(-n * inv) - phase_n)
    return complex(pref * (first - second))
