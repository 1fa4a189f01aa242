"""Two-mode Fock space: index maps, ladder operators, expectations.

Basis ordering is row-major with mode a as the major index: |n, m> (n photons
in mode a, m photons in mode b) lives at flat index n * levels_b + m. Ladder
operators are returned sparse (CSR) because every hot loop in the simulator
multiplies them against dense density matrices.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "ModeDims",
    "basis_index",
    "unindex",
    "single_mode_ladder",
    "annihilator",
    "creator",
    "identity",
    "basis_state",
    "vacuum_state",
    "pure_density",
    "expectation",
]


@dataclass(frozen=True)
class ModeDims:
    """Per-mode Fock-space cutoffs.

    Both cutoffs must be at least 4: the scissors subspace needs |0>, |1>, |2>
    in each mode plus at least one buffer level above.
    """

    levels_a: int = 10
    levels_b: int = 10

    def __post_init__(self):
        for name in ("levels_a", "levels_b"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            if value < 4:
                raise ValueError(f"{name} must be >= 4, got {value}")

    @property
    def dim(self) -> int:
        """Total two-mode dimension levels_a * levels_b."""
        return self.levels_a * self.levels_b


def basis_index(dims: ModeDims, n: int, m: int) -> int:
    """Flat index of |n, m> in the row-major (mode-a major) ordering."""
    if not (0 <= n < dims.levels_a):
        raise ValueError(f"mode-a occupation {n} outside [0, {dims.levels_a})")
    if not (0 <= m < dims.levels_b):
        raise ValueError(f"mode-b occupation {m} outside [0, {dims.levels_b})")
    return n * dims.levels_b + m


def unindex(dims: ModeDims, index: int) -> tuple[int, int]:
    """Inverse of basis_index."""
    if not (0 <= index < dims.dim):
        raise ValueError(f"flat index {index} outside [0, {dims.dim})")
    return divmod(index, dims.levels_b)


def single_mode_ladder(levels: int) -> sp.csr_matrix:
    """Single-mode annihilation operator: <n-1| op |n> = sqrt(n)."""
    if levels < 2:
        raise ValueError("need at least 2 levels for a ladder operator")
    amp = np.sqrt(np.arange(1, levels, dtype=float))
    return sp.diags(amp.astype(np.complex128), 1, format="csr")


def annihilator(dims: ModeDims, mode: str) -> sp.csr_matrix:
    """Two-mode annihilation operator for mode 'a' or 'b' (CSR, complex)."""
    if mode == "a":
        op = sp.kron(single_mode_ladder(dims.levels_a), sp.identity(dims.levels_b), format="csr")
    elif mode == "b":
        op = sp.kron(sp.identity(dims.levels_a), single_mode_ladder(dims.levels_b), format="csr")
    else:
        raise ValueError(f"mode must be 'a' or 'b', got {mode!r}")
    op = op.astype(np.complex128)
    op.sort_indices()
    return op


def creator(dims: ModeDims, mode: str) -> sp.csr_matrix:
    """Hermitian conjugate of annihilator(dims, mode)."""
    op = annihilator(dims, mode).conj().T.tocsr()
    op.sort_indices()
    return op


def identity(dims: ModeDims) -> sp.csr_matrix:
    return sp.identity(dims.dim, dtype=np.complex128, format="csr")


def basis_state(dims: ModeDims, n: int, m: int) -> np.ndarray:
    """Unit vector |n, m>."""
    psi = np.zeros(dims.dim, dtype=np.complex128)
    psi[basis_index(dims, n, m)] = 1.0
    return psi


def vacuum_state(dims: ModeDims) -> np.ndarray:
    return basis_state(dims, 0, 0)


def pure_density(psi: np.ndarray) -> np.ndarray:
    """Projector |psi><psi| as a dense matrix."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.ndim != 1:
        raise ValueError("state vector must be one-dimensional")
    return np.outer(psi, psi.conj())


def expectation(op, rho: np.ndarray) -> complex:
    """Tr(op @ rho) for a sparse or dense operator against a dense matrix."""
    rho = np.asarray(rho)
    if op.shape[1] != rho.shape[0] or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"shape mismatch: op {op.shape} vs rho {rho.shape}")
    if sp.issparse(op):
        return complex((op @ rho).trace())
    return complex(np.trace(op @ rho))
