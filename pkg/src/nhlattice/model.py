"""Open quadratic lattice models.

A model is fixed by three ``N x N`` Hermitian matrices: the coherent
single-particle Hamiltonian ``H``, the loss matrix ``L`` and the gain matrix
``G``. For jump operators ``c_l = sum_i a_i c_i`` (loss, rate ``r``) the loss
matrix collects ``r * conj(a) a^T``; for gain operators
``c_g^dagger = sum_i b_i c_i^dagger`` the gain matrix collects
``r * b conj(b)^T``. The drift matrix of the normal-ordered covariance is the
effective Hamiltonian ``H - (i/2)(L + G)`` for fermions and
``H - (i/2)(L - G)`` for bosons.

Besides the generic container this module provides two ways of turning a
target non-Hermitian Hamiltonian into loss and gain matrices, and builders
for the concrete lattices used throughout the package.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from . import numkernel as nk
from .errors import (
    DimensionError,
    EpsilonRange,
    InvalidParameter,
    NotPSD,
    Unstable,
    UnstableBoson,
)

__all__ = [
    "Statistics",
    "Boundary",
    "OpenLatticeModel",
    "JumpOperatorSet",
    "effective_hamiltonian",
    "conditional_hamiltonian",
    "stabilize",
    "method1_dissipators",
    "method2_dissipators",
    "loss_from_jumps",
    "gain_from_jumps",
    "hatano_nelson_loss_jumps",
    "hatano_nelson_target",
    "build_hatano_nelson",
    "build_nh_ssh",
    "build_hn_nnn",
    "build_structured_noise_chain",
    "extract_jumps",
    "random_model",
    "max_growth_rate",
    "is_stable",
    "require_stable",
    "model_to_json",
    "model_from_json",
]

PSD_TOL = 1e-10
STABILITY_MARGIN = 1e-10


class Statistics(enum.Enum):
    FERMION = "fermion"
    BOSON = "boson"

    @property
    def sign(self):
        """+1 for fermions, -1 for bosons."""
        return 1 if self is Statistics.FERMION else -1

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidParameter(f"unknown statistics {value!r}") from None


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        aliases = {"pbc": "periodic", "obc": "open"}
        try:
            return cls(aliases.get(v, v))
        except ValueError:
            raise InvalidParameter(f"unknown boundary condition {value!r}") from None


def _psd_floor(m):
    return float(nk.eigh(m)[0].min())


@dataclass(frozen=True, eq=False)
class OpenLatticeModel:
    """Quadratic open lattice: coherent part, loss and gain matrices.

    Parameters
    ----------
    coherent_h, loss, gain : ndarray
        Hermitian ``(n, n)`` matrices; ``loss`` and ``gain`` positive
        semi-definite.
    statistics : Statistics
    boundary : Boundary
    params : dict
        Free-form record of the builder arguments.
    notes : tuple of str
        Flags raised by the builder (e.g. parameters outside the intended
        regime).
    """

    coherent_h: np.ndarray
    loss: np.ndarray
    gain: np.ndarray
    statistics: Statistics = Statistics.FERMION
    boundary: Boundary = Boundary.OPEN
    params: dict = field(default_factory=dict)
    notes: tuple = ()

    def __post_init__(self):
        h = nk.as_matrix(self.coherent_h, name="coherent_h")
        n = h.shape[0]
        mats = {"coherent_h": h}
        for name in ("loss", "gain"):
            m = nk.as_matrix(getattr(self, name), name=name)
            if m.shape != (n, n):
                raise DimensionError(f"{name} has shape {m.shape}, expected {(n, n)}")
            mats[name] = m
        for name, m in mats.items():
            if not nk.is_hermitian(m):
                raise InvalidParameter(f"{name} is not Hermitian")
            m = m.copy()
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        for name in ("loss", "gain"):
            lo = _psd_floor(mats[name])
            if lo < -PSD_TOL * max(1.0, nk.max_abs(mats[name])):
                raise NotPSD(f"{name} has negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "statistics", Statistics.parse(self.statistics))
        object.__setattr__(self, "boundary", Boundary.parse(self.boundary))
        object.__setattr__(self, "notes", tuple(self.notes))
        if self.boundary is Boundary.PERIODIC and n < 2:
            raise DimensionError("periodic boundary needs at least two sites")

    @property
    def n_sites(self):
        return self.coherent_h.shape[0]

    @property
    def h_eff(self):
        return effective_hamiltonian(self)

    def with_statistics(self, statistics):
        return OpenLatticeModel(
            self.coherent_h, self.loss, self.gain, statistics, self.boundary,
            dict(self.params), self.notes,
        )


@dataclass(frozen=True, eq=False)
class JumpOperatorSet:
    """Loss and gain channels ``M = sum_k rate_k |m_k><m_k|``.

    ``loss_modes[:, k]`` and ``gain_modes[:, k]`` are orthonormal kets.
    """

    loss_rates: np.ndarray
    loss_modes: np.ndarray
    gain_rates: np.ndarray
    gain_modes: np.ndarray

    @staticmethod
    def _assemble(rates, modes, n):
        if rates.size == 0:
            return np.zeros((n, n), dtype=complex)
        return (modes * rates) @ modes.conj().T

    def loss_matrix(self):
        return self._assemble(self.loss_rates, self.loss_modes, self.loss_modes.shape[0])

    def gain_matrix(self):
        return self._assemble(self.gain_rates, self.gain_modes, self.gain_modes.shape[0])


# ---------------------------------------------------------------------------
# drift matrices


def effective_hamiltonian(model):
    """``H - (i/2)(L + G)`` for fermions, ``H - (i/2)(L - G)`` for bosons."""
    s = model.statistics.sign
    return model.coherent_h - 0.5j * (model.loss + s * model.gain)


def conditional_hamiltonian(model):
    """No-jump drift ``H - (i/2)(L - G)`` (fermions) or ``H - (i/2)(L + G)`` (bosons)."""
    s = model.statistics.sign
    return model.coherent_h - 0.5j * (model.loss - s * model.gain)


def stabilize(h_targ, nu):
    """Shift ``h_targ`` down the imaginary axis until it is strictly damped.

    Returns ``h_targ - i(lam + nu)`` where ``lam`` is the largest non-negative
    eigenvalue of the Hermitian matrix ``(h_targ - h_targ^dagger)/2i``.
    """
    h = nk.as_matrix(h_targ)
    if not nu > 0:
        raise InvalidParameter("nu must be positive")
    lam = max(0.0, float(nk.eigh(nk.antihermitian_part(h))[0][-1]))
    return h - 1j * (lam + nu) * np.eye(h.shape[0])


def _dissipative_part(h_eff):
    """``i(H - H^dagger)``, the Hermitian matrix equal to ``L +- G``."""
    h = nk.as_matrix(h_eff)
    x = 1j * (h - h.conj().T)
    return 0.5 * (x + x.conj().T)


def _require_psd(m, name):
    lo = _psd_floor(m)
    if lo < -PSD_TOL * max(1.0, nk.max_abs(m)):
        raise NotPSD(f"{name} has negative eigenvalue {lo:.3e}")


def method1_dissipators(h_eff, epsilon, statistics):
    """Split the dissipative part of ``h_eff`` into loss and gain by a ratio.

    With ``X = i(H_eff - H_eff^dagger)``, fermions get ``L = (1-eps) X`` and
    ``G = eps X`` (``0 <= eps <= 1``); bosons get ``L = eps X`` and
    ``G = (eps - 1) X`` (``eps >= 1``).

    Returns
    -------
    loss, gain : ndarray
    """
    stats = Statistics.parse(statistics)
    x = _dissipative_part(h_eff)
    eps = float(epsilon)
    if stats is Statistics.FERMION:
        if not 0.0 <= eps <= 1.0:
            raise EpsilonRange(f"fermions need 0 <= epsilon <= 1, got {eps}")
        loss, gain = (1.0 - eps) * x, eps * x
    else:
        if not eps >= 1.0:
            raise EpsilonRange(f"bosons need epsilon >= 1, got {eps}")
        loss, gain = eps * x, (eps - 1.0) * x
    _require_psd(x, "i(H_eff - H_eff^dagger)")
    return loss, gain


def method2_dissipators(h_eff, gamma, statistics):
    """Uniform gain ``G = 2 gamma`` with the loss matrix chosen to reproduce ``h_eff``.

    ``L = i(H_eff - H_eff^dagger) - 2 gamma`` for fermions and ``+ 2 gamma``
    for bosons.

    Raises
    ------
    NotPSD
        Fermions, when the required loss matrix is not positive semi-definite.
    UnstableBoson
        Bosons, when ``h_eff`` has an eigenvalue with ``Im >= 0``.
    """
    stats = Statistics.parse(statistics)
    h = nk.as_matrix(h_eff)
    if gamma < 0:
        raise InvalidParameter("gamma must be non-negative")
    n = h.shape[0]
    gain = 2.0 * gamma * np.eye(n, dtype=complex)
    loss = _dissipative_part(h) - stats.sign * gain
    _require_psd(loss, "loss")
    if stats is Statistics.BOSON:
        growth = max_growth_rate(h)
        if growth >= -STABILITY_MARGIN:
            raise UnstableBoson(f"bosonic drift has eigenvalue with Im E = {growth:.3e}")
    return loss, gain


# ---------------------------------------------------------------------------
# jump bookkeeping


def loss_from_jumps(n, jumps):
    """Loss matrix from ``(rate, coefficients)`` of operators ``sum_i a_i c_i``."""
    m = np.zeros((n, n), dtype=complex)
    for rate, a in jumps:
        a = np.asarray(a, dtype=complex)
        m += rate * np.outer(a.conj(), a)
    return m


def gain_from_jumps(n, jumps):
    """Gain matrix from ``(rate, coefficients)`` of operators ``sum_i b_i c_i^dagger``."""
    m = np.zeros((n, n), dtype=complex)
    for rate, b in jumps:
        b = np.asarray(b, dtype=complex)
        m += rate * np.outer(b, b.conj())
    return m


def _bond_vector(n, a, b, phase=-1j):
    v = np.zeros(n, dtype=complex)
    v[a] += 1.0
    v[b] += phase
    return v


def _site_vector(n, a):
    v = np.zeros(n, dtype=complex)
    v[a] = 1.0
    return v


def _n_bonds(n, boundary):
    return n if boundary is Boundary.PERIODIC else n - 1


def hatano_nelson_loss_jumps(n, kappa, boundary):
    """Raw loss channels ``sqrt(kappa)(c_j - i c_{j+1})`` plus open-edge baths.

    With open boundaries the two end sites would otherwise lose at half the
    bulk rate; a single-site bath of rate ``kappa`` on each end restores a
    uniform diagonal ``2 kappa``.
    """
    bc = Boundary.parse(boundary)
    jumps = [(kappa, _bond_vector(n, j, (j + 1) % n)) for j in range(_n_bonds(n, bc))]
    if bc is Boundary.OPEN:
        jumps.append((kappa, _site_vector(n, 0)))
        jumps.append((kappa, _site_vector(n, n - 1)))
    return jumps


def _hopping(n, amps, boundary, offset=1):
    """Hermitian hopping ``sum_j amps[j]/2 (|j+offset><j| + h.c.)``."""
    h = np.zeros((n, n), dtype=complex)
    for j in range(n if boundary is Boundary.PERIODIC else n - offset):
        a, b = j, (j + offset) % n
        h[b, a] += 0.5 * amps[j]
        h[a, b] += 0.5 * np.conj(amps[j])
    return h


def hatano_nelson_target(n, w, kappa, boundary):
    """Non-reciprocal hopping ``((w+k)/2)|j+1><j| + ((w-k)/2)|j><j+1|``."""
    bc = Boundary.parse(boundary)
    h = np.zeros((n, n), dtype=complex)
    for j in range(_n_bonds(n, bc)):
        a, b = j, (j + 1) % n
        h[b, a] += 0.5 * (w + kappa)
        h[a, b] += 0.5 * (w - kappa)
    return h


def _check_rates(**rates):
    for name, value in rates.items():
        if not np.isfinite(value) or value < 0:
            raise InvalidParameter(f"{name} must be a finite non-negative rate, got {value}")


def _check_sites(n, boundary, minimum_pbc=2, minimum_obc=1):
    if int(n) != n:
        raise DimensionError(f"site count must be an integer, got {n}")
    lo = minimum_pbc if boundary is Boundary.PERIODIC else minimum_obc
    if n < lo:
        raise DimensionError(f"need at least {lo} sites for {boundary.value} boundaries, got {n}")
    return int(n)


def build_hatano_nelson(n, w, kappa, gamma, boundary="open", statistics="fermion"):
    """Non-reciprocal chain realised by bond loss and uniform pumping.

    Coherent hopping ``w/2`` in both directions, loss channels
    ``sqrt(kappa)(c_j - i c_{j+1})`` on every bond (plus single-site baths on
    the two ends for open boundaries) and uniform gain ``2 gamma``. The
    effective Hamiltonian has hopping ``(w+kappa)/2`` to the right,
    ``(w-kappa)/2`` to the left and uniform damping ``kappa +- gamma``.

    Parameters
    ----------
    n : int
        Number of sites (``>= 2`` for periodic boundaries).
    w, kappa, gamma : float
        Hopping, non-reciprocity and pump rates.
    boundary : {"open", "periodic"}
    statistics : {"fermion", "boson"}
    """
    bc = Boundary.parse(boundary)
    stats = Statistics.parse(statistics)
    n = _check_sites(n, bc)
    _check_rates(w=w, kappa=kappa, gamma=gamma)
    h = _hopping(n, np.full(n, float(w)), bc)
    loss = loss_from_jumps(n, hatano_nelson_loss_jumps(n, kappa, bc))
    gain = 2.0 * gamma * np.eye(n, dtype=complex)
    params = dict(model="hatano_nelson", n=n, w=w, kappa=kappa, gamma=gamma)
    notes = []
    if kappa > w:
        notes.append("kappa > w: closed-form Green's functions do not apply")
    return OpenLatticeModel(h, loss, gain, stats, bc, params, tuple(notes))


def build_nh_ssh(n_cells, w, kappa, u, gamma_hop, gamma_pump, boundary="open",
                 statistics="fermion"):
    """Two-site unit cell version of the non-reciprocal chain.

    Sites are ordered ``A1, B1, A2, B2, ...``. Intra-cell bonds carry
    coherent hopping ``w`` and loss ``sqrt(kappa)(c_A - i c_B)``; inter-cell
    bonds carry ``u`` and ``sqrt(gamma_hop)(c_B - i c_A')``. Open boundaries
    add baths of rate ``gamma_hop`` on the first and last site so that every
    site is damped at ``(kappa + gamma_hop)/2 + gamma_pump``.
    """
    bc = Boundary.parse(boundary)
    stats = Statistics.parse(statistics)
    n_cells = _check_sites(n_cells, bc, minimum_pbc=1, minimum_obc=1)
    _check_rates(w=w, kappa=kappa, u=u, gamma_hop=gamma_hop, gamma_pump=gamma_pump)
    n = 2 * n_cells
    hops = np.array([w if b % 2 == 0 else u for b in range(n)], dtype=float)
    rates = [kappa if b % 2 == 0 else gamma_hop for b in range(n)]
    h = _hopping(n, hops, bc)
    jumps = [(rates[b], _bond_vector(n, b, (b + 1) % n)) for b in range(_n_bonds(n, bc))]
    if bc is Boundary.OPEN:
        jumps += [(gamma_hop, _site_vector(n, 0)), (gamma_hop, _site_vector(n, n - 1))]
    loss = loss_from_jumps(n, jumps)
    gain = 2.0 * gamma_pump * np.eye(n, dtype=complex)
    params = dict(model="nh_ssh", n_cells=n_cells, w=w, kappa=kappa, u=u,
                  gamma_hop=gamma_hop, gamma_pump=gamma_pump)
    return OpenLatticeModel(h, loss, gain, stats, bc, params)


def build_hn_nnn(n, w, kappa, t_nnn, phi, gamma, boundary="open", statistics="fermion"):
    """Non-reciprocal chain plus a Hermitian next-nearest-neighbour hop.

    Adds ``(T/2)(e^{i phi}|j+2><j| + h.c.)`` to the coherent part; the loss
    and gain channels are those of :func:`build_hatano_nelson`.
    """
    bc = Boundary.parse(boundary)
    if n < 3:
        raise DimensionError(f"next-nearest-neighbour chain needs at least 3 sites, got {n}")
    base = build_hatano_nelson(n, w, kappa, gamma, bc, statistics)
    n = base.n_sites
    h = base.coherent_h + _hopping(n, np.full(n, t_nnn * np.exp(1j * phi)), bc, offset=2)
    params = dict(base.params, model="hn_nnn", t_nnn=t_nnn, phi=phi)
    return OpenLatticeModel(h, base.loss, base.gain, base.statistics, bc, params, base.notes)


def build_structured_noise_chain(n, w, kappa, gamma, statistics="fermion", boundary="open"):
    """Reciprocal chain with correlated loss and correlated gain.

    Loss channels ``sqrt(kappa)(c_j - i c_{j+1})`` and gain channels
    ``sqrt(gamma)(c_j^dagger - i c_{j+1}^dagger)`` on every bond, with
    single-site baths of each kind on the open ends. For ``kappa == gamma``
    the non-reciprocal parts cancel and the fermionic effective Hamiltonian is
    ``H - 2i gamma``.
    """
    bc = Boundary.parse(boundary)
    stats = Statistics.parse(statistics)
    n = _check_sites(n, bc)
    _check_rates(w=w, kappa=kappa, gamma=gamma)
    h = _hopping(n, np.full(n, float(w)), bc)
    loss = loss_from_jumps(n, hatano_nelson_loss_jumps(n, kappa, bc))
    gain = gain_from_jumps(n, hatano_nelson_loss_jumps(n, gamma, bc))
    params = dict(model="structured_noise", n=n, w=w, kappa=kappa, gamma=gamma)
    notes = () if kappa == gamma else ("kappa != gamma: outside the half-filling regime",)
    return OpenLatticeModel(h, loss, gain, stats, bc, params, notes)


def extract_jumps(model, drop_tol=PSD_TOL):
    """Diagonalise ``L`` and ``G`` into independent jump channels.

    Rates within ``drop_tol`` of zero are discarded.

    Raises
    ------
    NotPSD
        If either matrix has an eigenvalue below ``-1e-8``.
    """
    out = []
    for name, m in (("loss", model.loss), ("gain", model.gain)):
        vals, vecs = nk.eigh(m)
        if vals.size and vals.min() < -1e-8:
            raise NotPSD(f"{name} has negative eigenvalue {vals.min():.3e}")
        keep = vals > drop_tol
        out += [vals[keep], vecs[:, keep]]
    return JumpOperatorSet(*out)


def _random_psd(rng, n, rank):
    x = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    return x @ x.conj().T / rank


def random_model(rng, n, statistics="fermion", margin=0.05):
    """Random dense model with a guaranteed damping margin.

    ``H`` is a random Hermitian matrix, ``G`` a random PSD matrix and ``L`` a
    random PSD matrix plus enough identity that the anti-Hermitian part of
    ``H_eff`` is at most ``-margin`` (for bosons this bounds the spectrum
    away from the real axis as well).
    """
    stats = Statistics.parse(statistics)
    rng = np.random.default_rng(rng)
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = 0.5 * (h + h.conj().T)
    gain = 0.5 * _random_psd(rng, n, max(1, n // 2))
    loss = _random_psd(rng, n, max(1, n // 2))
    if stats is Statistics.BOSON:
        top = float(nk.eigh(gain)[0][-1])
        loss = loss + top * np.eye(n)
    loss = loss + 2.0 * margin * np.eye(n)
    return OpenLatticeModel(h, loss, gain, stats, Boundary.OPEN, {"model": "random", "n": n})


# ---------------------------------------------------------------------------
# stability


def max_growth_rate(h_eff):
    """Largest imaginary part of the spectrum of ``h_eff``.

    The numerical range bounds the spectrum, so when the anti-Hermitian part
    is already negative definite the (expensive, balanced) eigenvalue solve
    is skipped and that bound is returned instead.
    """
    h = nk.as_matrix(h_eff)
    bound = float(nk.eigh(nk.antihermitian_part(h))[0][-1])
    if bound < -STABILITY_MARGIN:
        return bound
    return float(nk.eigvals_general(h).imag.max())


def is_stable(model, margin=STABILITY_MARGIN):
    return max_growth_rate(effective_hamiltonian(model)) < -margin


def require_stable(model, margin=STABILITY_MARGIN):
    growth = max_growth_rate(effective_hamiltonian(model))
    if growth >= -margin:
        cls = UnstableBoson if model.statistics is Statistics.BOSON else Unstable
        raise cls(f"effective Hamiltonian has eigenvalue with Im E = {growth:.3e}")


# ---------------------------------------------------------------------------
# serialisation


def _encode(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _decode(rows):
    a = np.asarray(rows, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def model_to_json(model, indent=None):
    doc = {
        "n_sites": model.n_sites,
        "statistics": model.statistics.value,
        "boundary": model.boundary.value,
        "coherent_h": _encode(model.coherent_h),
        "loss": _encode(model.loss),
        "gain": _encode(model.gain),
        "params": model.params,
        "notes": list(model.notes),
    }
    return json.dumps(doc, indent=indent, allow_nan=False)


def model_from_json(text):
    doc = json.loads(text)
    mats = [_decode(doc[k]) for k in ("coherent_h", "loss", "gain")]
    if any(m.shape != (doc["n_sites"], doc["n_sites"]) for m in mats):
        raise DimensionError("matrix shapes disagree with n_sites")
    return OpenLatticeModel(
        *mats, doc["statistics"], doc["boundary"], doc.get("params", {}),
        tuple(doc.get("notes", ())),
    )
