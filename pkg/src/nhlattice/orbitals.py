"""Occupied orbitals of the Gaussian steady state.

The stationary state of a quadratic open system is Gaussian,
``rho ~ exp(sum_r ln(n_r/(1 -+ n_r)) c_r^dagger c_r)``, where ``n_r`` and
``|psi_r>`` are the eigenpairs of the covariance ``F``. For the open
non-reciprocal chain with ``w = 0`` the orbitals are standing waves with
centre-of-mass momentum ``pi/2``; a finite coherent hop ``w`` is treated
perturbatively in that basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkernel as nk
from .errors import (
    BoundaryOccupation,
    DegenerateOccupations,
    InvalidParameter,
    ZeroDenominator,
)
from .model import Boundary, Statistics
from .steadystate import CovarianceMatrix

__all__ = [
    "OrbitalDecomposition",
    "StandingWaveBasis",
    "decompose",
    "participation_ratio",
    "log_weight",
    "occupation_from_log_weight",
    "rho_ss_log_weights",
    "unperturbed_covariance",
    "perturbative_terms",
    "perturbative_covariance",
    "perturbative_orbitals",
    "hopping_overlap",
    "orbital_occupation_rayleigh",
]

BOUNDARY_TOL = 1e-12


def log_weight(n, statistics="fermion"):
    """``ln(n/(1-n))`` for fermions, ``ln(n/(1+n))`` for bosons (``+-inf`` at the edges)."""
    stats = Statistics.parse(statistics)
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(n) - np.log1p(-stats.sign * n)
    return out if out.ndim else float(out)


def occupation_from_log_weight(weight, statistics="fermion"):
    """Inverse of :func:`log_weight`."""
    stats = Statistics.parse(statistics)
    weight = np.asarray(weight, dtype=float)
    if stats is Statistics.FERMION:
        out = 0.5 * (1.0 + np.tanh(0.5 * weight))
    else:
        out = 1.0 / np.expm1(-weight)
    return out if out.ndim else float(out)


def _on_boundary(n, stats):
    bad = n <= BOUNDARY_TOL
    if stats is Statistics.FERMION:
        bad |= n >= 1.0 - BOUNDARY_TOL
    return bad


@dataclass(frozen=True, eq=False)
class OrbitalDecomposition:
    """Eigenpairs of the covariance, most occupied first.

    ``orbitals[:, r]`` is ``|psi_r>``; ``log_weights[r]`` is infinite where
    ``flagged[r]`` marks an occupation on the edge of the allowed interval.
    """

    occupations: np.ndarray
    orbitals: np.ndarray
    log_weights: np.ndarray
    flagged: np.ndarray
    statistics: Statistics = Statistics.FERMION

    def reconstruct(self):
        return (self.orbitals * self.occupations) @ self.orbitals.conj().T


def _fix_phase(vecs, tol=1e-12):
    out = vecs.copy()
    for r in range(out.shape[1]):
        col = out[:, r]
        idx = np.flatnonzero(np.abs(col) > tol * np.abs(col).max())[0]
        out[:, r] = col * (abs(col[idx]) / col[idx])
    return out


def decompose(f):
    """Hermitian eigendecomposition of a covariance into orbitals.

    Occupations are sorted in descending order and each orbital's first
    non-negligible component is made real and positive.
    """
    if not isinstance(f, CovarianceMatrix):
        f = CovarianceMatrix(np.asarray(f, dtype=complex))
    vals, vecs = nk.eigh(f.f)
    vals, vecs = vals[::-1], _fix_phase(vecs[:, ::-1])
    weights = log_weight(np.clip(vals, 0.0, None), f.statistics)
    flagged = _on_boundary(vals, f.statistics)
    weights = np.where(flagged, np.where(vals <= BOUNDARY_TOL, -np.inf, np.inf), weights)
    return OrbitalDecomposition(vals, vecs, weights, flagged, f.statistics)


def rho_ss_log_weights(d, statistics=None):
    """Per-orbital exponents of the Gaussian steady state.

    Raises
    ------
    BoundaryOccupation
        If any occupation sits at 0 (or 1 for fermions), where the weight is
        infinite.
    """
    stats = Statistics.parse(statistics or d.statistics)
    bad = _on_boundary(d.occupations, stats)
    if np.any(bad):
        raise BoundaryOccupation(f"{int(bad.sum())} orbitals have boundary occupation")
    return log_weight(d.occupations, stats)


def participation_ratio(vecs):
    """``(sum_j |v_j|^2)^2 / sum_j |v_j|^4`` for each column."""
    p = np.abs(np.asarray(vecs)) ** 2
    if p.ndim == 1:
        p = p[:, None]
    return p.sum(axis=0) ** 2 / (p ** 2).sum(axis=0)


class StandingWaveBasis:
    """Standing waves ``sqrt(2/(N+1)) i^j sin(K_q j)`` with ``K_q = pi q/(N+1)``.

    Columns of :attr:`vectors` are ordered ``q = 1..N``.
    """

    def __init__(self, n):
        if n < 1:
            raise InvalidParameter("need at least one site")
        self.n = int(n)
        self.q = np.arange(1, self.n + 1)
        self.k = np.pi * self.q / (self.n + 1)
        j = np.arange(1, self.n + 1)
        self.vectors = (
            np.sqrt(2.0 / (self.n + 1)) * (1j ** (j % 4))[:, None] * np.sin(np.outer(j, self.k))
        )

    def to_basis(self, m):
        """Matrix elements ``<K_q|M|K_q'>``."""
        return self.vectors.conj().T @ m @ self.vectors

    def from_basis(self, m):
        return self.vectors @ m @ self.vectors.conj().T


def _chain_rates(model):
    if model.boundary is not Boundary.OPEN:
        raise InvalidParameter("open-boundary chain required")
    basis = StandingWaveBasis(model.n_sites)
    loss_k = np.real(np.diagonal(basis.to_basis(model.loss)))
    gain_k = np.real(np.diagonal(basis.to_basis(model.gain)))
    return basis, loss_k, gain_k


def _zeroth_order(model):
    basis, loss_k, gain_k = _chain_rates(model)
    sign = model.statistics.sign
    n0 = gain_k / (loss_k + sign * gain_k)
    return basis, n0, loss_k + sign * gain_k


def unperturbed_covariance(model):
    """``F_0 = sum_q n_q |K_q><K_q|`` with ``n_q = G_q/(L_q +- G_q)``.

    Exact when the coherent hop vanishes, since the loss and gain matrices of
    the open chain are diagonal in the standing-wave basis.
    """
    basis, n0, _ = _zeroth_order(model)
    return CovarianceMatrix(basis.from_basis(np.diag(n0)), model.statistics)


def _hop_scale(model):
    w = model.params.get("w")
    if not w:
        raise InvalidParameter("perturbation theory needs the hop w > 0 in model.params")
    return float(w)


def perturbative_terms(model, order):
    """Corrections ``F_r`` (``r = 0..order``) in the standing-wave basis.

    ``F = sum_r w^r F_r`` with
    ``<q|F_r|q'> = 2i <q|F_{r-1} H_1 - H_1 F_{r-1}|q'> / (d_q + d_q')``,
    ``H_1 = H/w`` and ``d_q = L_q +- G_q``.
    """
    if order < 0:
        raise InvalidParameter("order must be non-negative")
    basis, n0, d = _zeroth_order(model)
    h1 = basis.to_basis(model.coherent_h) / _hop_scale(model)
    denom = d[:, None] + d[None, :]
    terms = [np.diag(n0).astype(complex)]
    for _ in range(order):
        prev = terms[-1]
        terms.append(2j * (prev @ h1 - h1 @ prev) / denom)
    return basis, terms


def perturbative_covariance(model, order):
    """Covariance truncated at ``w**order``, returned in the site basis."""
    w = _hop_scale(model)
    basis, terms = perturbative_terms(model, order)
    f = sum(w ** r * t for r, t in enumerate(terms))
    return CovarianceMatrix(basis.from_basis(f), model.statistics)


def perturbative_orbitals(model, order=2):
    """Standing waves corrected to ``order`` (1 or 2) in ``w``, normalised.

    Returns an ``(N, N)`` array whose column ``q-1`` is ``|K_q^pert>``,
    together with the zeroth-order occupations.

    Raises
    ------
    DegenerateOccupations
        If two coupled standing waves have equal unperturbed occupation.
    """
    if order not in (1, 2):
        raise InvalidParameter("order must be 1 or 2")
    w = _hop_scale(model)
    basis, terms = perturbative_terms(model, order)
    n0 = np.real(np.diagonal(terms[0]))
    gap = n0[None, :] - n0[:, None]  # gap[q', q] = n_q - n_q'
    # read the coupling off the hop itself: F_1 vanishes along with the gap
    h1 = basis.to_basis(model.coherent_h)
    coupled = np.abs(h1) > 1e-14 * max(1.0, nk.max_abs(h1))
    np.fill_diagonal(coupled, False)
    if np.any(coupled & (np.abs(gap) < 1e-12)):
        raise DegenerateOccupations("coupled standing waves with equal occupation")
    off = ~np.eye(basis.n, dtype=bool)
    inv = np.zeros_like(gap)
    inv[off] = 1.0 / gap[off]
    f1 = terms[1]
    coef = w * f1 * inv
    if order == 2:
        f1_off = np.where(off, f1, 0)
        second = terms[2] * inv + (f1_off @ (f1_off * inv)) * inv
        coef = coef + w ** 2 * second
    coef[~off] = 1.0
    vecs = basis.vectors @ coef
    return vecs / np.linalg.norm(vecs, axis=0), n0


def hopping_overlap(q, q2, n, w=1.0):
    """Closed form of ``<K_q|H|K_q'>`` for the uniform chain with hop ``w``.

    Zero when ``q`` and ``q'`` have the same parity, otherwise
    ``-(i w/(N+1)) sin K sin K' / (sin((K'-K)/2) sin((K'+K)/2))``.
    """
    q = np.asarray(q)
    q2 = np.asarray(q2)
    k1 = np.pi * q / (n + 1)
    k2 = np.pi * q2 / (n + 1)
    same = (q - q2) % 2 == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -1j * w / (n + 1) * np.sin(k1) * np.sin(k2) / (
            np.sin(0.5 * (k2 - k1)) * np.sin(0.5 * (k2 + k1))
        )
    out = np.where(same, 0.0, val)
    return out if out.ndim else complex(out)


def orbital_occupation_rayleigh(orbital, model):
    """Occupation estimate ``<G>/(<G> + <L>)`` (``<G>/(<L> - <G>)`` for bosons).

    Raises
    ------
    ZeroDenominator
        If the denominator is below ``1e-14``.
    """
    v = np.asarray(orbital, dtype=complex)
    v = v / np.linalg.norm(v)
    g = float(np.real(v.conj() @ model.gain @ v))
    loss = float(np.real(v.conj() @ model.loss @ v))
    den = loss + model.statistics.sign * g
    if abs(den) < 1e-14:
        raise ZeroDenominator("<G> +- <L> vanishes for this orbital")
    return g / den
