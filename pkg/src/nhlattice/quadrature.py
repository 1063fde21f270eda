"""Deterministic quadrature rules for frequency integrals over the real line.

Integrands of interest are rational in ``omega`` with poles at the complex
eigenvalues of an effective Hamiltonian and fall off as ``omega**-2``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .errors import InvalidParameter

__all__ = ["Scheme", "QuadratureSpec", "spectral_window"]

PANEL_ORDER = 16


class Scheme(enum.Enum):
    GAUSS_LEGENDRE_MAPPED = "gauss_legendre_mapped"
    TRAPEZOID_WINDOW = "trapezoid_window"


def spectral_window(eigenvalues):
    """Centre and half-width ``max|Re E - c| + 20 max|Im E|`` of a spectrum."""
    e = np.asarray(eigenvalues, dtype=complex)
    c = 0.5 * (e.real.max() + e.real.min())
    half = np.abs(e.real - c).max() + 20.0 * np.abs(e.imag).max()
    return c, max(half, 1e-300)


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature rule for ``int_{-inf}^{inf} f(omega) d omega``.

    Parameters
    ----------
    scheme : Scheme
        ``GAUSS_LEGENDRE_MAPPED`` (default) maps the whole line onto
        ``(-pi/2, pi/2)`` via ``omega = c + h tan(theta)`` and applies
        composite 16-node Gauss-Legendre panels. ``TRAPEZOID_WINDOW``
        integrates ``[c - W, c + W]`` with the trapezoid rule and adds the
        analytic ``omega**-2`` tail.
    n_points : int
        Total number of nodes (rounded up to a multiple of 16 for panels).
    window_halfwidth : float, optional
        ``h`` for the mapped rule or ``W`` for the trapezoid rule. Chosen
        from the spectrum when omitted.
    """

    scheme: Scheme = Scheme.GAUSS_LEGENDRE_MAPPED
    n_points: int = 4096
    window_halfwidth: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if int(self.n_points) < 16:
            raise InvalidParameter("quadrature needs at least 16 points")
        object.__setattr__(self, "n_points", int(self.n_points))
        if self.window_halfwidth is not None and not self.window_halfwidth > 0:
            raise InvalidParameter("window_halfwidth must be positive")

    def doubled(self):
        return QuadratureSpec(self.scheme, 2 * self.n_points, self.window_halfwidth)

    def rule(self, eigenvalues):
        """Nodes, weights and tail coefficient for a given spectrum.

        Returns
        -------
        omega, weight : ndarray
            ``int f d omega ~ sum weight * f(omega) + tail * lim omega^2 f``.
        tail : float
            Weight of the leading ``omega**-2`` tail outside a finite window
            (zero for the mapped rule).
        """
        e = np.asarray(eigenvalues, dtype=complex)
        c, half = spectral_window(e)
        if self.scheme is Scheme.GAUSS_LEGENDRE_MAPPED:
            h = self.window_halfwidth
            if h is None:
                h = max(np.abs(e.real - c).max(), np.abs(e.imag).max())
            panels = -(-self.n_points // PANEL_ORDER)
            x, wx = roots_legendre(PANEL_ORDER)
            edges = np.linspace(-0.5 * np.pi, 0.5 * np.pi, panels + 1)
            mid = 0.5 * (edges[1:] + edges[:-1])
            rad = 0.5 * (edges[1:] - edges[:-1])
            theta = (mid[:, None] + rad[:, None] * x[None, :]).ravel()
            wt = (rad[:, None] * wx[None, :]).ravel()
            omega = c + h * np.tan(theta)
            weight = wt * h / np.cos(theta) ** 2
            return omega, weight, 0.0
        big_w = self.window_halfwidth or half
        omega = np.linspace(c - big_w, c + big_w, self.n_points)
        weight = np.full(self.n_points, omega[1] - omega[0])
        weight[0] *= 0.5
        weight[-1] *= 0.5
        return omega, weight, 2.0 / big_w
