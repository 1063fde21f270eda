"""Closed-form retarded Green's functions of non-reciprocal chains.

For the chain with right hopping ``(w+kappa)/2``, left hopping
``(w-kappa)/2`` and uniform damping ``s = kappa +- gamma`` the imaginary
gauge transformation ``c_j -> e^{A j} c_j`` maps the problem to a reciprocal
chain of hopping ``J/2`` with ``J = sqrt(w^2 - kappa^2)`` and
``A = (1/2) ln((w+kappa)/(w-kappa))``. All propagators below are written in
terms of the complex wavevector ``Q`` solving ``omega + i s = J cos Q`` with
``Im Q < 0``.

Sites are labelled ``1..N`` throughout this module.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit
from scipy.special import erf, erfi

from . import numkernel as nk
from .errors import (
    BranchAmbiguity,
    DimensionError,
    InvalidParameter,
    NonDiagonalizable,
    QuadratureUnderResolved,
    RegimeWarning,
    ResonancePole,
)
from .model import Boundary, Statistics
from .quadrature import QuadratureSpec

__all__ = [
    "HNParams",
    "SSHParams",
    "ComplexWavevector",
    "MomentumDecay",
    "dispersion_q",
    "momentum_decay",
    "g_infinite",
    "g_pbc",
    "g_obc",
    "occupation_from_greens",
    "xi_obc",
    "occupation_asymptotic",
    "occupation_no_bounce",
    "fit_healing_length",
    "log_slope",
    "skin_localization_length",
    "ssh_dispersion_q",
    "ssh_g_infinite",
    "ssh_occupation_approx",
]


@dataclass(frozen=True)
class HNParams:
    """Rates of the non-reciprocal chain and the derived decay constants."""

    w: float
    kappa: float
    gamma: float = 0.0
    statistics: Statistics = Statistics.FERMION

    def __post_init__(self):
        object.__setattr__(self, "statistics", Statistics.parse(self.statistics))
        if not (np.isfinite(self.w) and np.isfinite(self.kappa) and np.isfinite(self.gamma)):
            raise InvalidParameter("rates must be finite")
        if not self.w > self.kappa >= 0:
            raise InvalidParameter(f"closed forms need w > kappa >= 0, got w={self.w}, kappa={self.kappa}")
        if self.gamma < 0:
            raise InvalidParameter("gamma must be non-negative")

    @classmethod
    def from_model(cls, model):
        p = model.params
        if p.get("model") not in ("hatano_nelson",):
            raise InvalidParameter("model was not built by build_hatano_nelson")
        return cls(p["w"], p["kappa"], p["gamma"], model.statistics)

    @property
    def s(self):
        """Uniform damping ``kappa + gamma`` (fermions) or ``kappa - gamma`` (bosons)."""
        return self.kappa + self.statistics.sign * self.gamma

    @property
    def j(self):
        return float(np.sqrt(self.w ** 2 - self.kappa ** 2))

    @property
    def a(self):
        """Inverse skin length ``(1/2) ln((w+kappa)/(w-kappa))``."""
        return 0.5 * float(np.log((self.w + self.kappa) / (self.w - self.kappa)))

    @property
    def a_prime(self):
        """Decay constant ``ln((sqrt(s^2 + J^2) + s)/J)`` of the ``omega``-integrated propagator."""
        s, j = self.s, self.j
        return float(np.log((np.hypot(s, j) + s) / j))


@dataclass(frozen=True)
class ComplexWavevector:
    omega: float
    q: complex
    branch: str

    @property
    def z(self):
        """``exp(-iQ)``, inside the unit disc."""
        return np.exp(-1j * self.q)


@dataclass(frozen=True)
class MomentumDecay:
    k: float
    r: float


def _solve_cos(c):
    """``Q = arccos(c)`` on the branch with ``Im Q <= 0``; also the flip mask."""
    q = np.arccos(np.asarray(c, dtype=complex))
    flip = q.imag > 0
    q = np.where(flip, -q, q)
    if np.any(np.abs(np.abs(np.exp(-1j * q)) - 1.0) < 1e-12):
        raise BranchAmbiguity("both branches give |exp(-iQ)| = 1; damping is zero")
    return q, flip


def _q(omega, p):
    if p.j <= 0:
        raise InvalidParameter("J = 0: closed forms undefined at w == kappa")
    return _solve_cos((np.asarray(omega, dtype=float) + 1j * p.s) / p.j)[0]


def dispersion_q(omega, p):
    """Complex wavevector with ``omega + i s = J cos Q`` and ``Im Q < 0``."""
    q, flip = _solve_cos((omega + 1j * p.s) / p.j)
    return ComplexWavevector(float(omega), complex(q), "negated" if flip else "principal")


def momentum_decay(k, p):
    """Per-site log decay ``R[k] <= 0`` with ``e^R = (sqrt(s^2 + (J sin k)^2) - s)/(J sin k)``."""
    if not 0 < k < np.pi:
        raise InvalidParameter("k must lie in (0, pi)")
    js = p.j * np.sin(k)
    return MomentumDecay(float(k), float(np.log((np.hypot(p.s, js) - p.s) / js)))


def g_infinite(d, omega, p):
    """Infinite-chain propagator ``<j|(omega - H_eff)^-1|p>`` for ``d = j - p``.

    ``-i exp(A d - i Q |d|) / (J sin Q)``. Broadcasts over ``d`` and ``omega``.
    """
    d = np.asarray(d)
    q = _q(omega, p)
    return -1j * np.exp(p.a * d - 1j * q * np.abs(d)) / (p.j * np.sin(q))


def _check_sites(n, *sites):
    for s in sites:
        s = np.asarray(s)
        if np.any(s < 1) or np.any(s > n):
            raise DimensionError(f"site index outside 1..{n}")


def g_pbc(j, p, n, omega, params):
    """Ring propagator: infinite-chain terms summed over all round trips.

    With ``d = (j - p) mod N``::

        -i e^{Ad} / (J sin Q) [ e^{-iQd}/(1 - e^{(A-iQ)N}) - e^{iQd}/(1 - e^{(A+iQ)N}) ]

    Site labels are read modulo ``N``, so ``j + N`` and ``j`` are the same site.

    Raises
    ------
    ResonancePole
        If a round-trip factor ``1 - e^{(A -+ iQ) N}`` vanishes.
    """
    if n < 2:
        raise DimensionError("ring needs at least two sites")
    d = np.mod(np.asarray(j) - np.asarray(p), n)
    q = _q(omega, params)
    a = params.a
    out = 0
    for sign in (-1, 1):
        u = a + sign * 1j * q
        denom = -np.expm1(u * n)
        if np.any(np.abs(denom) < 1e-12):
            raise ResonancePole("round-trip factor vanishes")
        grow = np.real(u) > 0
        # e^{ud}/(1 - e^{uN}) = e^{u(d-N)}/(e^{-uN} - 1) when Re u > 0
        with np.errstate(over="ignore"):
            term = np.where(
                grow,
                np.exp(u * (d - n)) / np.where(grow, np.expm1(-u * n), 1.0),
                np.exp(u * d) / np.where(grow, 1.0, denom),
            )
        out = out - sign * term
    return -1j * out / (params.j * np.sin(q))


def g_obc(j, p, n, omega, params):
    """Open-chain propagator summed over all reflections at the two ends.

    Equal to ``e^{A(j-p)} 2 sin(Q m) sin(Q(N+1-M)) / (J sin Q sin(Q(N+1)))``
    with ``m = min(j, p)``, ``M = max(j, p)``; evaluated in the overflow-free
    form ``-i e^{A(j-p) - iQ|j-p|} (1-z^{2m})(1-z^{2(N+1-M)}) / (J sin Q (1-z^{2(N+1)}))``
    with ``z = e^{-iQ}``.

    Raises
    ------
    ResonancePole
        If ``sin(Q(N+1))`` vanishes.
    """
    if n < 1:
        raise DimensionError("need at least one site")
    _check_sites(n, j, p)
    j = np.asarray(j)
    p = np.asarray(p)
    q = _q(omega, params)
    z = np.exp(-1j * q)
    lo = np.minimum(j, p)
    hi = n + 1 - np.maximum(j, p)
    wall = 1.0 - z ** (2 * (n + 1))
    if np.any(np.abs(wall) < 1e-14):
        raise ResonancePole("sin(Q(N+1)) vanishes")
    d = j - p
    envelope = np.exp(params.a * d - 1j * q * np.abs(d))
    return -1j * envelope * (1.0 - z ** (2 * lo)) * (1.0 - z ** (2 * hi)) / (params.j * np.sin(q) * wall)


def _obc_eigenvalues(n, params):
    q = np.arange(1, n + 1)
    return params.j * np.cos(np.pi * q / (n + 1)) - 1j * params.s


def _greens_density(n, params, omega, weight, chunk=256):
    sites = np.arange(1, n + 1)
    jj, pp = sites[:, None], sites[None, :]
    total = np.zeros(n)
    for start in range(0, omega.size, chunk):
        om = omega[start:start + chunk]
        g = g_obc(jj[None], pp[None], n, om[:, None, None], params)
        total += np.einsum("k,kjp->j", weight[start:start + chunk], np.abs(g) ** 2)
    return 2.0 * params.gamma * total / (2.0 * np.pi)


def occupation_from_greens(model, quad=None, check=True, rtol=1e-6):
    """Site densities ``2 gamma sum_p int d omega/2pi |g_obc(j, p; omega)|^2``.

    Parameters
    ----------
    model : OpenLatticeModel
        Open chain from :func:`~nhlattice.model.build_hatano_nelson`.
    quad : QuadratureSpec, optional

    Raises
    ------
    QuadratureUnderResolved
        If doubling the nodes changes the densities by more than ``rtol``.
    """
    if model.boundary is not Boundary.OPEN:
        raise InvalidParameter("open-boundary model required")
    params = HNParams.from_model(model)
    n = model.n_sites
    if params.gamma == 0:
        return np.zeros(n)
    quad = quad or QuadratureSpec()
    e = _obc_eigenvalues(n, params)
    omega, weight, tail = quad.rule(e)
    dens = _greens_density(n, params, omega, weight) + 2.0 * params.gamma * tail / (2 * np.pi)
    if check:
        omega, weight, tail = quad.doubled().rule(e)
        fine = _greens_density(n, params, omega, weight) + 2.0 * params.gamma * tail / (2 * np.pi)
        change = np.abs(fine - dens).max() / np.abs(fine).max()
        if change > rtol:
            raise QuadratureUnderResolved(f"doubling nodes changed densities by {change:.2e}")
        dens = fine
    return dens


# ---------------------------------------------------------------------------
# asymptotic occupation


def xi_obc(params):
    """Healing (fermions) or amplification (bosons) length ``|1/(2 ln(1 +- gamma/w))|``."""
    if params.gamma <= 0:
        return np.inf
    return abs(1.0 / (2.0 * np.log1p(params.statistics.sign * params.gamma / params.w)))


def _regime_warning(params, n):
    if params.j >= params.s:
        warnings.warn("asymptotic occupation assumes damping s exceeding J", RegimeWarning, stacklevel=3)
    elif n is not None and params.j / n > 0.1 * params.s:
        warnings.warn("asymptotic occupation assumes J/N << s", RegimeWarning, stacklevel=3)


def occupation_asymptotic(j, params, n=None):
    """Large-damping approximation of the open-chain density profile.

    Fermions: ``gamma/(kappa+gamma) (sqrt(xi) erf(sqrt(j/xi)) + c)``;
    bosons: ``gamma/(kappa-gamma) (sqrt(xi) erfi(sqrt(j/xi)) + c)``, with
    ``xi = xi_obc(params)`` and ``c`` fixed so the first site is
    ``gamma/(kappa +- gamma)``. For ``j << xi`` both reduce to
    ``(gamma/s)(1 + (2/sqrt(pi))(sqrt(j) - 1))``.

    Emits :class:`RegimeWarning` when the damping does not dominate the
    bandwidth (``J >= s``) or when ``J/N`` is not small against ``s``.
    """
    _regime_warning(params, n)
    j = np.asarray(j, dtype=float)
    xi = xi_obc(params)
    base = params.gamma / params.s
    if not np.isfinite(xi):
        out = base * (1.0 + 2.0 / np.sqrt(np.pi) * (np.sqrt(j) - 1.0))
        return out if out.ndim else float(out)
    fn = erf if params.statistics is Statistics.FERMION else erfi
    root = np.sqrt(xi)
    const = 1.0 - root * fn(1.0 / root)
    out = base * (root * fn(np.sqrt(j / xi)) + const)
    return out if out.ndim else float(out)


def occupation_no_bounce(n, params):
    """Densities from the infinite-chain propagator with the frequency integral done by Laplace's method.

    ``(gamma/s)(1 + C1 sum_{p != j} e^{2A(j-p) - 2A'|j-p|}/sqrt|j-p|)`` with
    ``C1 = sqrt(s / (pi sqrt(s^2 + J^2)))``. Returns the profile for sites
    ``1..n``.
    """
    s, a, ap = params.s, params.a, params.a_prime
    c1 = np.sqrt(s / (np.pi * np.hypot(s, params.j)))
    sites = np.arange(1, n + 1)
    d = sites[:, None] - sites[None, :]
    ad = np.abs(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(ad > 0, np.exp(2 * a * d - 2 * ap * ad) / np.sqrt(np.maximum(ad, 1)), 0.0)
    return params.gamma / s * (1.0 + c1 * terms.sum(axis=1))


def fit_healing_length(sites, densities, statistics="fermion", xi0=None):
    """Fit ``a (sqrt(xi) F(sqrt(j/xi)) + c)`` to a density profile and return ``xi``.

    ``F`` is ``erf`` for fermions and ``erfi`` for bosons; ``a``, ``xi`` and
    ``c`` are all free.
    """
    stats = Statistics.parse(statistics)
    fn = erf if stats is Statistics.FERMION else erfi
    j = np.asarray(sites, dtype=float)
    n = np.asarray(densities, dtype=float)

    def shape(j, a, xi, c):
        return a * (np.sqrt(xi) * fn(np.sqrt(j / xi)) + c)

    xi0 = xi0 or 0.25 * (j.max() - j.min() + 1)
    (a, xi, c), _ = curve_fit(shape, j, n, p0=[n[0], xi0, 0.0],
                              bounds=([0, 1e-3, -np.inf], [np.inf, np.inf, np.inf]))
    return float(xi)


def log_slope(sites, densities, lo, hi):
    """Least-squares slope of ``ln n_j`` for ``lo <= j <= hi``."""
    j = np.asarray(sites, dtype=float)
    sel = (j >= lo) & (j <= hi)
    return float(np.polyfit(j[sel], np.log(np.asarray(densities)[sel]), 1)[0])


def skin_localization_length(model, bulk=(0.25, 0.75)):
    """Mean exponential growth rate of the right eigenvectors of ``H_eff``.

    Each eigenvector ``|psi>`` is smoothed over neighbouring pairs,
    ``rho_j = |psi_j|^2 + |psi_{j+1}|^2``, which removes the nodes of the
    standing-wave factor; ``ln(rho_j)/2`` is then fitted linearly over the
    bulk fraction ``bulk`` of the chain. Returns the mean fitted slope.
    """
    spec = nk.eig_general(model.h_eff)
    n = model.n_sites
    lo, hi = int(np.floor(bulk[0] * n)), int(np.ceil(bulk[1] * n))
    if hi - lo < 3:
        raise DimensionError("chain too short for a bulk fit")
    with np.errstate(divide="ignore"):
        amp = np.abs(spec.right) ** 2
        rho = np.log(amp[:-1] + amp[1:])
    x = np.arange(1, n)[lo:hi]
    y = 0.5 * rho[lo:hi]
    if not np.all(np.isfinite(y)):
        raise NonDiagonalizable("eigenvector components underflow in the bulk")
    slopes = np.polyfit(x, y, 1)[0]
    return float(np.mean(slopes))


# ---------------------------------------------------------------------------
# two-site unit cell


@dataclass(frozen=True)
class SSHParams:
    """Rates of the two-site non-reciprocal chain.

    Intra-cell bonds have ``w, kappa``; inter-cell bonds ``u, gamma_hop``.
    """

    w: float
    kappa: float
    u: float
    gamma_hop: float
    gamma_pump: float = 0.0
    statistics: Statistics = Statistics.FERMION

    def __post_init__(self):
        object.__setattr__(self, "statistics", Statistics.parse(self.statistics))
        if not (self.w > self.kappa >= 0 and self.u > self.gamma_hop >= 0):
            raise InvalidParameter("closed forms need w > kappa >= 0 and u > gamma_hop >= 0")
        if self.gamma_pump < 0:
            raise InvalidParameter("gamma_pump must be non-negative")

    @classmethod
    def from_model(cls, model):
        p = model.params
        if p.get("model") != "nh_ssh":
            raise InvalidParameter("model was not built by build_nh_ssh")
        return cls(p["w"], p["kappa"], p["u"], p["gamma_hop"], p["gamma_pump"], model.statistics)

    @property
    def s(self):
        return 0.5 * (self.kappa + self.gamma_hop) + self.statistics.sign * self.gamma_pump

    @property
    def j(self):
        return float(np.sqrt(self.w ** 2 - self.kappa ** 2))

    @property
    def j_tilde(self):
        return float(np.sqrt(self.u ** 2 - self.gamma_hop ** 2))

    @property
    def a(self):
        return 0.5 * float(np.log((self.w + self.kappa) / (self.w - self.kappa)))

    @property
    def a_tilde(self):
        return 0.5 * float(np.log((self.u + self.gamma_hop) / (self.u - self.gamma_hop)))


def ssh_dispersion_q(omega, sp):
    """``Q`` with ``(J Jt/2) cos Q = (omega + i s)^2 - (J^2 + Jt^2)/4`` and ``Im Q < 0``."""
    if sp.j <= 0 or sp.j_tilde <= 0:
        raise InvalidParameter("closed forms need J, J~ > 0")
    x = np.asarray(omega, dtype=float) + 1j * sp.s
    c = (x ** 2 - 0.25 * (sp.j ** 2 + sp.j_tilde ** 2)) / (0.5 * sp.j * sp.j_tilde)
    return _solve_cos(c)[0]


def ssh_g_infinite(pair, d, omega, sp):
    """Infinite two-site chain propagator ``<X, j|(omega - H_eff)^-1|Y, p>``.

    Parameters
    ----------
    pair : {"AA", "AB", "BA", "BB"}
        Sublattices ``X`` and ``Y``.
    d : int or array
        Cell separation ``j - p``.
    """
    pair = pair.upper()
    d = np.asarray(d)
    x = np.asarray(omega, dtype=float) + 1j * sp.s
    q = ssh_dispersion_q(omega, sp)
    a, b = sp.a, sp.a + sp.a_tilde
    den = sp.j * sp.j_tilde * np.sin(q)

    def wave(m):
        return np.exp(-1j * q * np.abs(m))

    if pair in ("AA", "BB"):
        return -2j * x * np.exp(b * d) * wave(d) / den
    if pair == "AB":
        return -1j * np.exp(b * d - a) * (sp.j * wave(d) + sp.j_tilde * wave(d - 1)) / den
    if pair == "BA":
        return -1j * np.exp(b * d + a) * (sp.j * wave(d) + sp.j_tilde * wave(d + 1)) / den
    raise InvalidParameter(f"unknown sublattice pair {pair!r}")


def _ssh_density(n_cells, sp, omega, weight, chunk=256):
    cells = np.arange(1, n_cells + 1)
    d = (cells[:, None] - cells[None, :])[None]
    out = np.zeros((n_cells, 2))
    for start in range(0, omega.size, chunk):
        om = omega[start:start + chunk][:, None, None]
        wt = weight[start:start + chunk]
        aa = np.abs(ssh_g_infinite("AA", d, om, sp)) ** 2
        ab = np.abs(ssh_g_infinite("AB", d, om, sp)) ** 2
        ba = np.abs(ssh_g_infinite("BA", d, om, sp)) ** 2
        out[:, 0] += np.einsum("k,kjp->j", wt, aa + ab)
        out[:, 1] += np.einsum("k,kjp->j", wt, ba + aa)
    return 2.0 * sp.gamma_pump * out.ravel() / (2.0 * np.pi)


def ssh_occupation_approx(model, quad=None, check=True, rtol=1e-6):
    """No-bounce site densities of the two-site chain, ordered ``A1, B1, A2, ...``.

    Uses the infinite-chain propagators for every pair of cells inside the
    finite chain, so reflections at the ends are neglected.
    """
    sp = SSHParams.from_model(model)
    n_cells = model.n_sites // 2
    if sp.gamma_pump == 0:
        return np.zeros(2 * n_cells)
    quad = quad or QuadratureSpec()
    # bands of the uniform chain bound the relevant frequency window
    k = np.linspace(0, 2 * np.pi, 64)
    band = 0.5 * np.sqrt(sp.j ** 2 + sp.j_tilde ** 2 + 2 * sp.j * sp.j_tilde * np.cos(k))
    e = np.concatenate([band, -band]) - 1j * sp.s
    dens = _ssh_density(n_cells, sp, *quad.rule(e)[:2])
    if check:
        fine = _ssh_density(n_cells, sp, *quad.doubled().rule(e)[:2])
        change = np.abs(fine - dens).max() / np.abs(fine).max()
        if change > rtol:
            raise QuadratureUnderResolved(f"doubling nodes changed densities by {change:.2e}")
        dens = fine
    return dens
