"""Steady states of dissipative non-reciprocal lattices.

Quadratic open systems are described by a coherent Hamiltonian and loss and
gain matrices (:mod:`nhlattice.model`). Their stationary covariance follows
from a Lyapunov equation (:mod:`nhlattice.steadystate`); closed-form lattice
Green's functions (:mod:`nhlattice.greens`) explain the resulting density
profiles, and :mod:`nhlattice.orbitals` analyses the occupied modes.
"""
from . import greens, model, numkernel, orbitals, steadystate
from .errors import NHLatticeError, RegimeWarning
from .model import (
    Boundary,
    OpenLatticeModel,
    Statistics,
    build_hatano_nelson,
    build_hn_nnn,
    build_nh_ssh,
    build_structured_noise_chain,
    effective_hamiltonian,
)
from .quadrature import QuadratureSpec, Scheme
from .steadystate import (
    CovarianceMatrix,
    steady_state_direct,
    steady_state_eigenbasis,
    steady_state_frequency,
)

__version__ = "0.1.0"

__all__ = [
    "greens",
    "model",
    "numkernel",
    "orbitals",
    "steadystate",
    "NHLatticeError",
    "RegimeWarning",
    "Boundary",
    "OpenLatticeModel",
    "Statistics",
    "build_hatano_nelson",
    "build_hn_nnn",
    "build_nh_ssh",
    "build_structured_noise_chain",
    "effective_hamiltonian",
    "QuadratureSpec",
    "Scheme",
    "CovarianceMatrix",
    "steady_state_direct",
    "steady_state_eigenbasis",
    "steady_state_frequency",
]
