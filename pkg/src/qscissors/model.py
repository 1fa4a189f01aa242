"""Model assembly: Kerr Hamiltonian and squeezed-reservoir damping channels.

The system couples two Kerr-nonlinear oscillators through a two-photon
exchange (strength epsilon) and drives mode a with a classical field
(amplitude alpha). Each mode relaxes into its own broadband squeezed
reservoir characterised by a damping rate gamma_j, a mean photon number N_j,
and the squeezing coefficient M_j = sqrt(N_j (N_j + 1)) exp(-i phi). A single
squeezing phase phi applies to both reservoirs; with N_j = 0 the reservoir is
an ordinary vacuum and M_j vanishes identically.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fock import ModeDims, annihilator, single_mode_ladder

__all__ = [
    "SystemParams",
    "DissipationChannel",
    "ModelOperators",
    "squeezing_coefficient",
    "build_hamiltonian",
    "build_model",
    "single_mode_model",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the coupler.

    chi_a, chi_b : Kerr nonlinearities (positive).
    epsilon      : two-photon inter-mode coupling (complex allowed, real here).
    alpha        : classical drive amplitude on mode a.
    gamma_a/b    : reservoir damping rates (>= 0).
    N_a/b        : reservoir mean photon numbers (>= 0).
    phi          : squeezing phase in [0, 2*pi), shared by both reservoirs.
    """

    chi_a: float = 25.0
    chi_b: float = 25.0
    epsilon: complex = 0.1
    alpha: complex = 0.1
    gamma_a: float = 0.0025
    gamma_b: float = 0.0025
    N_a: float = 2.0
    N_b: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        for name in ("chi_a", "chi_b"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("gamma_a", "gamma_b", "N_a", "N_b"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not (0.0 <= self.phi < TWO_PI):
            raise ValueError(f"phi must lie in [0, 2*pi), got {self.phi}")


def squeezing_coefficient(N: float, phi: float) -> complex:
    """M = sqrt(N (N + 1)) * exp(-i phi); the modulus saturates the physicality
    bound |M|^2 <= N (N + 1), i.e. the reservoir is maximally squeezed."""
    if N < 0:
        raise ValueError("N must be non-negative")
    return math.sqrt(N * (N + 1.0)) * cmath.exp(-1j * phi)


@dataclass(frozen=True, eq=False)
class DissipationChannel:
    """One reservoir coupling: collapse direction plus (gamma, N, M)."""

    operator: sp.csr_matrix
    gamma: float
    N: float
    M: complex


@dataclass(frozen=True, eq=False)
class ModelOperators:
    """Assembled Hamiltonian and damping channels, ready for propagation."""

    hamiltonian: sp.csr_matrix
    channels: tuple
    dims: ModeDims | None = None

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def build_hamiltonian(params: SystemParams, dims: ModeDims) -> sp.csr_matrix:
    """H = (chi_a/2) a+a+aa + (chi_b/2) b+b+bb + (eps a+a+bb + h.c.) + (alpha a+ + h.c.).

    The off-diagonal part is assembled as T + T-dagger, which makes the result
    Hermitian elementwise-exactly, not just to rounding.
    """
    a = annihilator(dims, "a")
    b = annihilator(dims, "b")
    ad = a.conj().T.tocsr()
    bd = b.conj().T.tocsr()
    kerr = 0.5 * params.chi_a * (ad @ ad @ a @ a) + 0.5 * params.chi_b * (bd @ bd @ b @ b)
    coupling = params.epsilon * (ad @ ad @ b @ b) + params.alpha * ad
    h = kerr + coupling + coupling.conj().T
    h = h.tocsr()
    h.sort_indices()
    return h


def _channel(operator: sp.csr_matrix, gamma: float, N: float, phi: float,
             thermal_only: bool) -> DissipationChannel:
    M = 0.0 + 0.0j if thermal_only else squeezing_coefficient(N, phi)
    return DissipationChannel(operator=operator, gamma=gamma, N=N, M=M)


def build_model(params: SystemParams, dims: ModeDims, thermal_only: bool = False) -> ModelOperators:
    """Assemble Hamiltonian and both reservoir channels.

    thermal_only forces M_j = 0 while keeping N_j > 0, turning the squeezed
    reservoirs into purely thermal ones for comparison runs.
    """
    channels = (
        _channel(annihilator(dims, "a"), params.gamma_a, params.N_a, params.phi, thermal_only),
        _channel(annihilator(dims, "b"), params.gamma_b, params.N_b, params.phi, thermal_only),
    )
    return ModelOperators(hamiltonian=build_hamiltonian(params, dims), channels=channels, dims=dims)


def single_mode_model(levels: int, gamma: float, N: float, phi: float = 0.0,
                      hamiltonian: sp.csr_matrix | None = None,
                      thermal_only: bool = False) -> ModelOperators:
    """One mode in one squeezed reservoir; used by oracle and steady-state tests.

    hamiltonian defaults to zero (free dissipative relaxation).
    """
    if gamma < 0 or N < 0:
        raise ValueError("gamma and N must be non-negative")
    op = single_mode_ladder(levels)
    if hamiltonian is None:
        hamiltonian = sp.csr_matrix((levels, levels), dtype=np.complex128)
    else:
        hamiltonian = sp.csr_matrix(hamiltonian, dtype=np.complex128)
        if hamiltonian.shape != (levels, levels):
            raise ValueError("hamiltonian shape does not match levels")
    channel = _channel(op, gamma, N, phi, thermal_only)
    return ModelOperators(hamiltonian=hamiltonian, channels=(channel,), dims=None)
