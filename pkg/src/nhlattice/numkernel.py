"""Dense complex linear-algebra kernel.

Everything downstream works with plain ``complex128`` numpy arrays. This
module collects the handful of decompositions the rest of the package needs:
Hermitian eigendecomposition, a biorthonormal eigendecomposition of general
(non-normal) matrices, and solvers for the Sylvester equation
``A X - X B = C``.

Non-reciprocal lattice Hamiltonians with open boundaries are extremely
non-normal: their eigenvector matrices have condition numbers growing like
``exp(2 A N)``. Plain LAPACK ``geev`` then returns eigenvalues that are off by
O(1). :func:`balance` removes the diagonal part of that non-normality with an
exact similarity transform before any eigenvalue problem is solved.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.special import roots_legendre

from .errors import DimensionError, NonDiagonalizable, SpectrumOverlap

__all__ = [
    "BiorthogonalSpectrum",
    "as_matrix",
    "is_hermitian",
    "hermitian_part",
    "antihermitian_part",
    "eigh",
    "balance",
    "eigvals_general",
    "eig_general",
    "solve_linear",
    "solve_sylvester",
    "solve_sylvester_kron",
    "solve_sylvester_time",
    "max_abs",
]

# condition-number threshold of the (balanced) eigenvector matrix
COND_LIMIT = 1e12
# eigenvalues closer than this (relative) are treated as repeated
DEGENERACY_TOL = 1e-12
RANK_TOL = 1e-10


def as_matrix(m, square=True, name="matrix"):
    """Return ``m`` as a 2-D ``complex128`` array, validating its shape."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def max_abs(m):
    """Max-norm ``max |m_ij|`` (0 for empty input)."""
    m = np.asarray(m)
    return float(np.abs(m).max()) if m.size else 0.0


def is_hermitian(m, rtol=1e-12):
    m = np.asarray(m)
    return max_abs(m - m.conj().T) <= rtol * max(1.0, max_abs(m))


def hermitian_part(m):
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().T)


def antihermitian_part(m):
    """Hermitian matrix ``(m - m^dagger) / 2i``; its eigenvalues bound Im of the spectrum."""
    m = np.asarray(m, dtype=complex)
    return (m - m.conj().T) / 2j


def eigh(m):
    """Hermitian eigendecomposition with ascending eigenvalues."""
    a = as_matrix(m)
    a = hermitian_part(a)
    return sla.eigh(a)


# ---------------------------------------------------------------------------
# balancing


def balance(m, tol=1e-13, max_iter=200):
    """Diagonal similarity that minimises the Frobenius norm of ``m``.

    Finds real ``x`` minimising ``sum_ij |m_ij|^2 exp(2 (x_j - x_i))`` (a
    convex function) by damped Newton iteration. Unlike LAPACK ``gebal`` the
    scale factors are not restricted to powers of two and may span hundreds
    of e-folds, which is what an open Hatano-Nelson chain needs.

    Returns
    -------
    x : ndarray
        Log scale factors, normalised so that ``max(x) == 0``.
    b : ndarray
        Balanced matrix ``b_ij = m_ij exp(x_j - x_i)``, similar to ``m``.
    """
    a = as_matrix(m)
    n = a.shape[0]
    w = np.abs(a) ** 2
    np.fill_diagonal(w, 0.0)
    x = np.zeros(n)
    if n == 1 or not np.any(w):
        return x, a.copy()
    mask = w > 0
    logw = np.full_like(w, -np.inf)
    logw[mask] = np.log(w[mask])

    def terms(x):
        # t_ij = |b_ij|^2, computed in log space to avoid overflow
        e = logw + 2.0 * (x[None, :] - x[:, None])
        t = np.zeros_like(w)
        t[mask] = np.exp(e[mask])
        return t

    t = terms(x)
    f = t.sum()
    for _ in range(max_iter):
        col = t.sum(axis=0)
        row = t.sum(axis=1)
        grad = 2.0 * (col - row)
        if np.abs(grad).max() <= tol * f:
            break
        sym = t + t.T
        hess = -4.0 * sym
        np.fill_diagonal(hess, 4.0 * sym.sum(axis=1))
        step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
        step -= step.mean()
        slope = grad @ step
        if slope >= 0:
            break
        alpha = 1.0
        while alpha > 1e-10:
            x_new = x + alpha * step
            t_new = terms(x_new)
            f_new = t_new.sum()
            if np.isfinite(f_new) and f_new <= f + 1e-4 * alpha * slope:
                break
            alpha *= 0.5
        else:
            break
        converged = f - f_new <= 1e-15 * f
        x, t, f = x_new, t_new, f_new
        if converged:
            break
    x = x - x.max()
    shift = x[None, :] - x[:, None]
    b = np.zeros_like(a)
    nz = a != 0
    b[nz] = a[nz] * np.exp(shift[nz])
    return x, b


def _sort_order(values):
    return np.lexsort((values.imag, values.real))


def eigvals_general(m, balanced=True):
    """Eigenvalues of a general matrix sorted by (Re, Im)."""
    a = as_matrix(m)
    if balanced:
        _, a = balance(a)
    vals = sla.eigvals(a)
    return vals[_sort_order(vals)]


@dataclass(frozen=True)
class BiorthogonalSpectrum:
    """Eigenvalues with biorthonormal right/left eigenvector columns.

    ``left[:, a].conj() @ right[:, b] == delta_ab``; right columns have unit
    2-norm.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    condition: float = 1.0
    log_scale: np.ndarray | None = None

    def reconstruct(self):
        """Return ``sum_a E_a |R_a><L_a|``."""
        return (self.right * self.eigenvalues) @ self.left.conj().T

    def residual(self, m):
        """Max-norm of ``reconstruct() - m`` measured in the balanced frame.

        Entries of a strongly non-normal matrix far from the diagonal carry
        rounding errors amplified by ``exp(x_i - x_j)``; undoing the balancing
        similarity puts all entries on the same footing.
        """
        diff = self.reconstruct() - np.asarray(m, dtype=complex)
        if self.log_scale is not None:
            x = self.log_scale
            with np.errstate(over="ignore", under="ignore"):
                diff = diff * np.exp(x[None, :] - x[:, None])
        return max_abs(diff)

    def biorthogonality_error(self):
        overlap = self.left.conj().T @ self.right
        return max_abs(overlap - np.eye(overlap.shape[0]))


def _check_degenerate(a, vals, tol=DEGENERACY_TOL):
    """Raise unless every repeated eigenvalue has a full set of eigenvectors.

    Balancing can shrink the coupling inside a Jordan block below rounding,
    so the geometric multiplicity is measured on the original matrix.
    """
    scale = max(1.0, max_abs(a))
    n = vals.size
    done = np.zeros(n, dtype=bool)
    for i in range(n):
        if done[i]:
            continue
        cluster = np.abs(vals - vals[i]) <= tol * scale
        done |= cluster
        size = int(cluster.sum())
        if size == 1:
            continue
        sv = np.linalg.svd(a - vals[cluster].mean() * np.eye(n), compute_uv=False)
        nullity = int(np.sum(sv <= RANK_TOL * scale))
        if nullity < size:
            raise NonDiagonalizable(
                f"eigenvalue {vals[i]:.6g} has multiplicity {size} but {nullity} eigenvectors"
            )


def eig_general(m, cond_limit=COND_LIMIT):
    """Biorthonormal eigendecomposition of a diagonalizable matrix.

    The matrix is balanced first (see :func:`balance`); the diagonal
    similarity is undone analytically so that eigenvector components spanning
    many orders of magnitude are still resolved. The conditioning check is
    applied to the balanced eigenvector matrix.

    Raises
    ------
    NonDiagonalizable
        If the balanced eigenvector matrix has condition number above
        ``cond_limit`` or the rescaled vectors are not representable.
    """
    a = as_matrix(m)
    x, b = balance(a)
    vals, vb = sla.eig(b)
    order = _sort_order(vals)
    vals, vb = vals[order], vb[:, order]
    _check_degenerate(a, vals)
    vb = vb / np.linalg.norm(vb, axis=0)
    cond = np.linalg.cond(vb)
    if not np.isfinite(cond) or cond > cond_limit:
        raise NonDiagonalizable(
            f"eigenvector matrix condition {cond:.3e} exceeds {cond_limit:.1e}"
        )
    ub = np.linalg.inv(vb).conj().T
    # right = D vb, left = D^{-1} ub; scale by exp(-max x) == 1 (max x is 0)
    with np.errstate(over="ignore", under="ignore"):
        right = np.exp(x)[:, None] * vb
        norms = np.linalg.norm(right, axis=0)
        right = right / norms
        left = np.exp(-x)[:, None] * ub * norms
    if not (np.all(np.isfinite(right)) and np.all(np.isfinite(left))):
        raise NonDiagonalizable("eigenvector components overflow double precision")
    # fix the right-vector phase: largest component real-positive
    idx = np.abs(right).argmax(axis=0)
    phase = right[idx, np.arange(right.shape[1])]
    phase = phase / np.abs(phase)
    right = right / phase
    left = left * phase.conj()
    return BiorthogonalSpectrum(vals, right, left, float(cond), x)


def solve_linear(a, b):
    return sla.solve(as_matrix(a), np.asarray(b, dtype=complex))


# ---------------------------------------------------------------------------
# Sylvester / Lyapunov


def _check_spectra(a, b, atol):
    ea = eigvals_general(a)
    if np.array_equal(b, a.conj().T):
        eb = ea.conj()
    else:
        eb = eigvals_general(b)
    gap = np.abs(ea[:, None] - eb[None, :]).min()
    scale = max(1.0, max_abs(a), max_abs(b))
    if gap <= atol * scale:
        raise SpectrumOverlap(f"spectra of A and B are {gap:.3e} apart")
    return gap


def solve_sylvester(a, b, c, check=True, atol=1e-12):
    """Solve ``A X - X B = C`` by the Bartels-Stewart (Schur) method.

    Parameters
    ----------
    a, b, c : array_like
        Square ``(n, n)``, ``(m, m)`` and ``(n, m)`` complex matrices.
    check : bool
        Verify that the spectra of ``a`` and ``b`` are disjoint.

    Raises
    ------
    SpectrumOverlap
        If an eigenvalue of ``a`` coincides with one of ``b`` to ``atol``.
    """
    a = as_matrix(a, name="A")
    b = as_matrix(b, name="B")
    c = np.asarray(c, dtype=complex)
    if c.shape != (a.shape[0], b.shape[0]):
        raise DimensionError(f"C has shape {c.shape}, expected {(a.shape[0], b.shape[0])}")
    if check:
        _check_spectra(a, b, atol)
    return sla.solve_sylvester(a, -b, c)


def solve_sylvester_kron(a, b, c):
    """Brute-force oracle: one dense solve of ``(1 (x) A - B^T (x) 1) vec X = vec C``."""
    a = as_matrix(a, name="A")
    b = as_matrix(b, name="B")
    c = np.asarray(c, dtype=complex)
    n, m = a.shape[0], b.shape[0]
    op = np.kron(np.eye(m), a) - np.kron(b.T, np.eye(n))
    vec = np.linalg.solve(op, c.reshape(-1, order="F"))
    return vec.reshape((n, m), order="F")


def solve_sylvester_time(a, b, c, rtol=1e-10, order=16):
    """Oracle from the time integral ``X = i int_0^inf exp(-iAt) C exp(iBt) dt``.

    Requires ``Im eig(A) < 0 < Im eig(B)``. The half-line is cut where the
    slowest mode has decayed below ``rtol`` (with a safety factor for
    non-normal transients) and integrated by composite Gauss-Legendre with
    matrix exponentials evaluated at each node.
    """
    a = as_matrix(a, name="A")
    b = as_matrix(b, name="B")
    c = np.asarray(c, dtype=complex)
    rate = -np.max(eigvals_general(a).imag) + np.min(eigvals_general(b).imag)
    if rate <= 0:
        raise SpectrumOverlap("time integral diverges: A, B not strictly damped")
    t_max = 1.5 * np.log(1.0 / rtol) / rate
    scale = max(max_abs(a), max_abs(b), rate)
    panels = max(8, int(np.ceil(t_max * scale)))
    nodes, weights = roots_legendre(order)
    h = t_max / panels
    step_a = sla.expm(-1j * a * h)
    step_b = sla.expm(1j * b * h)
    node_a = [sla.expm(-1j * a * h * (1 + s) / 2) for s in nodes]
    node_b = [sla.expm(1j * b * h * (1 + s) / 2) for s in nodes]
    x = np.zeros_like(c)
    left = np.eye(a.shape[0], dtype=complex)
    right = np.eye(b.shape[0], dtype=complex)
    for _ in range(panels):
        m = left @ c @ right
        for wk, na, nb in zip(weights, node_a, node_b):
            x += (0.5 * h * wk) * (na @ m @ nb)
        left = step_a @ left
        right = right @ step_b
    return 1j * x
