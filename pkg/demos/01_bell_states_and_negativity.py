"""Bell-like states, qutrit-qubit truncation, and the negativity measure.

Walks the static machinery: build the three two-mode Bell-like states, project
them onto the 3x2 subspace (mode a levels {0,1,2}, mode b levels {0,2}), take
the partial transpose over the qubit, and read entanglement off the spectrum.
"""

import numpy as np

from qscissors import (
    ModeDims,
    bell_state,
    jacobi_eigenvalues,
    negativity,
    partial_transpose_qubit,
    pure_density,
    truncate_qutrit_qubit,
)

dims = ModeDims(10, 10)

# Each Bell-like state is a balanced superposition of two Fock pairs.
# A maximally entangled 2x2 block inside the 3x2 subspace gives negativity 1.
for kind in ("B1", "B2", "B3"):
    psi = bell_state(kind, dims)
    rho6 = truncate_qutrit_qubit(pure_density(psi), dims)
    spectrum = jacobi_eigenvalues(partial_transpose_qubit(rho6))
    print(f"{kind}: negativity = {negativity(rho6):.6f}, "
          f"PT spectrum = {np.round(spectrum, 6)}")

# A product state stays positive under partial transposition: no entanglement.
qutrit = np.diag([0.5, 0.3, 0.2]).astype(complex)
qubit = np.array([[0.7, 0.2], [0.2, 0.3]], dtype=complex)
product = np.kron(qutrit, qubit)
print(f"product state: negativity = {negativity(product):.6f}")

# Mixing a Bell projector with noise erodes the negative eigenvalue.
rho_b3 = truncate_qutrit_qubit(pure_density(bell_state("B3", dims)), dims)
for p in (0.0, 0.3, 0.6, 0.9):
    mixed = (1 - p) * rho_b3 + p * np.eye(6) / 6.0
    print(f"noise fraction {p:.1f}: negativity = {negativity(mixed):.6f}")
