"""Scissors-subspace truncation and negativity of the partial transpose.

The full two-mode state is projected onto the qutrit (x) qubit subspace
spanned by |n>_a for n in {0,1,2} and |m>_b for m in {0,2}. The 6x6 block is
kept unnormalized: its decaying trace measures how much population leaks out
of the scissors subspace, and is itself one of the reported observables.
Negativity is max(0, -2 lambda_min) of the partial transpose with respect to
the qubit factor; eigenvalues come from an in-house cyclic Jacobi sweep (a
6x6 Hermitian problem does not warrant an external solver and this keeps the
hot path dependency-free and easily cross-checked).
"""

from dataclasses import dataclass

import numpy as np

from .fock import ModeDims, basis_index, basis_state

__all__ = [
    "TRUNC_BASIS",
    "trunc_indices",
    "bell_state",
    "truncate_qutrit_qubit",
    "partial_transpose_qubit",
    "jacobi_eigenvalues",
    "negativity",
    "truncation_fidelity",
    "NegativitySeries",
]

# Ordered (n, m) pairs of the retained subspace: qutrit index major, qubit
# index (m in {0, 2}) minor.
TRUNC_BASIS = ((0, 0), (0, 2), (1, 0), (1, 2), (2, 0), (2, 2))

_TRACE_FLOOR = 1e-12


def trunc_indices(dims: ModeDims) -> list[int]:
    """Flat indices of the six retained basis states."""
    return [basis_index(dims, n, m) for n, m in TRUNC_BASIS]


def bell_state(kind: str, dims: ModeDims) -> np.ndarray:
    """Maximally entangled two-photon states of the scissors subspace.

    B1 = (|2,0> + i |0,2>) / sqrt2
    B2 = (|2,0> - i |0,2>) / sqrt2
    B3 = (|2,0> + |1,2>) / sqrt2
    """
    name = kind.upper()
    s = 1.0 / np.sqrt(2.0)
    if name == "B1":
        return s * (basis_state(dims, 2, 0) + 1j * basis_state(dims, 0, 2))
    if name == "B2":
        return s * (basis_state(dims, 2, 0) - 1j * basis_state(dims, 0, 2))
    if name == "B3":
        return s * (basis_state(dims, 2, 0) + basis_state(dims, 1, 2))
    raise ValueError(f"unknown Bell state {kind!r}; expected B1, B2 or B3")


def truncate_qutrit_qubit(rho: np.ndarray, dims: ModeDims) -> np.ndarray:
    """(P_a x P_b) rho (P_a x P_b) compressed to the ordered 6x6 block.

    The sandwich with both projectors equals plain submatrix extraction. No
    renormalization: the trace decays and that is part of the signal.
    """
    rho = np.asarray(rho)
    if rho.shape != (dims.dim, dims.dim):
        raise ValueError(f"rho shape {rho.shape} does not match dims {dims}")
    idx = trunc_indices(dims)
    return rho[np.ix_(idx, idx)].copy()


def partial_transpose_qubit(rho6: np.ndarray) -> np.ndarray:
    """Transpose the qubit (mode b) factor of the 6x6 scissors block."""
    rho6 = np.asarray(rho6)
    if rho6.shape != (6, 6):
        raise ValueError(f"expected a 6x6 block, got shape {rho6.shape}")
    return rho6.reshape(3, 2, 3, 2).transpose(0, 3, 2, 1).reshape(6, 6).copy()


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = 1e-13,
                       max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Sweeps rotate every off-diagonal pair per cycle until all off-diagonal
    magnitudes fall below tol. Returns eigenvalues in ascending order.
    """
    A = np.array(matrix, dtype=np.complex128)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    herm = np.abs(A - A.conj().T).max() if n else 0.0
    if herm > 1e-8:
        raise ValueError(f"matrix not Hermitian: max |A - A+| = {herm:.3e}")
    A = (A + A.conj().T) / 2.0

    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            row = A[p, p + 1:]
            m = np.abs(row).max() if row.size else 0.0
            if m > off:
                off = m
        if off < tol:
            return np.sort(A.diagonal().real)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    continue
                u = apq / mag
                app = A[p, p].real
                aqq = A[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                # |tau| > 1e8 would overflow tau*tau long before losing
                # accuracy; the asymptotic rotation is exact to double there.
                if abs(tau) > 1e8:
                    t = 1.0 / (2.0 * tau)
                elif tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                uc = np.conj(u)
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * uc * akq
                    A[k, q] = s * u * akp + c * akq
                    A[p, k] = np.conj(A[k, p])
                    A[q, k] = np.conj(A[k, q])
                A[p, p] = app - t * mag
                A[q, q] = aqq + t * mag
                A[p, q] = 0.0
                A[q, p] = 0.0
    raise RuntimeError(f"Jacobi sweep did not converge in {max_sweeps} sweeps")


def negativity(rho6: np.ndarray, renormalize: bool = False) -> float:
    """max(0, -2 lambda_min) of the qubit partial transpose.

    Computed on the unnormalized scissors block by default. renormalize=True
    divides by the block trace first (guarded: a trace below 1e-12 means the
    subspace is empty and the negativity is reported as 0).
    """
    rho6 = np.asarray(rho6, dtype=np.complex128)
    if rho6.shape != (6, 6):
        raise ValueError(f"expected a 6x6 block, got shape {rho6.shape}")
    herm = np.abs(rho6 - rho6.conj().T).max()
    if herm > 1e-8:
        raise ValueError(f"block not Hermitian: max |rho - rho+| = {herm:.3e}")
    if renormalize:
        tr = np.trace(rho6).real
        if tr < _TRACE_FLOOR:
            return 0.0
        rho6 = rho6 / tr
    w = jacobi_eigenvalues(partial_transpose_qubit(rho6))
    return max(0.0, -2.0 * float(w[0]))


def truncation_fidelity(psi: np.ndarray, dims: ModeDims) -> float:
    """Overlap weight |c_02|^2 + |c_12|^2 + |c_20|^2 of a pure state with the
    two-photon scissors triplet (equals |<psi_cut|psi>|^2 for the normalized
    projection psi_cut)."""
    psi = np.asarray(psi)
    if psi.ndim != 1 or psi.size != dims.dim:
        raise ValueError(f"psi shape {psi.shape} does not match dims {dims}")
    total = 0.0
    for n, m in ((0, 2), (1, 2), (2, 0)):
        total += abs(psi[basis_index(dims, n, m)]) ** 2
    return float(total)


@dataclass
class NegativitySeries:
    """Uniformly sampled negativity trajectory in t*chi time units.

    populations, when present, holds the six diagonal entries of the
    truncated block per sample, ordered like TRUNC_BASIS.
    """

    times_chi: np.ndarray
    negativity: np.ndarray
    trunc_trace: np.ndarray
    populations: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times_chi, dtype=float)
        n = np.asarray(self.negativity, dtype=float)
        tr = np.asarray(self.trunc_trace, dtype=float)
        if not (t.shape == n.shape == tr.shape) or t.ndim != 1:
            raise ValueError("series arrays must be one-dimensional and equally long")
        if t.size < 2 or np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing with at least 2 samples")
        if self.populations is not None and np.asarray(self.populations).shape != (t.size, 6):
            raise ValueError("populations must have shape (n_samples, 6)")
        self.times_chi = t
        self.negativity = n
        self.trunc_trace = tr

    def __len__(self) -> int:
        return self.times_chi.size
