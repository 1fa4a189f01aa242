"""Density-matrix propagation for squeezed-reservoir master equations.

The generator acts on rho as

    drho/dt = -i [H, rho]
            + sum_j gamma_j         (2 j rho j+  - j+ j rho - rho j+ j)
            + sum_j gamma_j N_j     (2 j rho j+  - j+ j rho - rho j+ j)
            + sum_j gamma_j N_j     (2 j+ rho j  - j j+ rho - rho j j+)
            - sum_j gamma_j M_j^*   (2 j+ rho j+ - j+ j+ rho - rho j+ j+)
            - sum_j gamma_j M_j     (2 j rho j   - j j rho  - rho j j)

with one channel per reservoir. Squeezing enters only through the products
gamma_j M_j and gamma_j M_j^*; no square root of M is ever taken.

Integration is classical fixed-step RK4 on the vectorized (row-major) density
matrix against a sparse generator, with an optional step-doubling error
control that halves the step until the local elementwise error estimate drops
below a tolerance. Sampled snapshots are re-Hermitized as (rho + rho+)/2 but
never renormalized; trace loss is a physically meaningful diagnostic for the
truncated dynamics and is recorded, not corrected.

Time is in absolute model units throughout this module (multiply by chi_a for
the t*chi axis used in reports).
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .model import ModelOperators

__all__ = [
    "IntegrationError",
    "StabilityError",
    "DivergenceError",
    "StabilityWarning",
    "IntegratorOptions",
    "EvolutionRecord",
    "PureEvolutionRecord",
    "check_density_matrix",
    "master_rhs",
    "liouvillian",
    "stability_rate",
    "default_step",
    "evolve_master",
    "evolve_pure",
    "expm_oracle",
]

# Step-size stability policy, in units of step * stability_rate.
_STAB_WARN = 1.0
_STAB_FAIL = 2.5


class IntegrationError(RuntimeError):
    """Base class for propagation failures."""


class StabilityError(IntegrationError):
    """Requested step grossly violates the RK4 stability precondition."""


class DivergenceError(IntegrationError):
    """State picked up non-finite entries during propagation."""

    def __init__(self, time: float):
        super().__init__(f"non-finite state entries at t = {time!r}")
        self.time = time


class StabilityWarning(UserWarning):
    """Step exceeds the conservative stability budget but is below hard failure."""


@dataclass(frozen=True)
class IntegratorOptions:
    """Fixed-grid integration controls (absolute time units).

    step            : RK4 step; None selects 0.5 / stability_rate(model).
    sample_interval : spacing of recorded snapshots; the step is shrunk to an
                      integer number of substeps per sample.
    t_max           : horizon; samples are emitted at 0, dt, 2 dt, ... <= t_max.
    error_control   : 'fixed' or 'step_doubling'.
    local_tolerance : elementwise local error target for step_doubling.
    """

    t_max: float
    sample_interval: float
    step: float | None = None
    error_control: str = "fixed"
    local_tolerance: float = 1e-9

    def __post_init__(self):
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")
        if self.t_max < self.sample_interval:
            raise ValueError("t_max must be at least one sample_interval")
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive when given")
        if self.step is not None and self.step > self.sample_interval:
            raise ValueError("step must not exceed sample_interval")
        if self.error_control not in ("fixed", "step_doubling"):
            raise ValueError(f"unknown error_control {self.error_control!r}")
        if self.local_tolerance <= 0:
            raise ValueError("local_tolerance must be positive")


@dataclass
class EvolutionRecord:
    """Sampled run output.

    states holds either re-Hermitized density-matrix snapshots (observer=None)
    or whatever the observer callback returned per sample.
    """

    times: np.ndarray
    states: list
    trace_drift: np.ndarray
    hermiticity_drift: np.ndarray
    step: float
    total_steps: int = 0


@dataclass
class PureEvolutionRecord:
    times: np.ndarray
    states: list
    norm_drift: np.ndarray
    step: float
    total_steps: int = 0


def check_density_matrix(rho: np.ndarray, herm_tol: float = 1e-10,
                         trace_tol: float = 1e-10, psd_tol: float = 1e-8) -> None:
    """Raise ValueError unless rho is a finite, Hermitian, unit-trace,
    numerically positive matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix has non-finite entries")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > herm_tol:
        raise ValueError(f"density matrix not Hermitian: max |rho - rho+| = {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr!r} differs from 1 beyond {trace_tol}")
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)
    if w[0] < -psd_tol:
        raise ValueError(f"density matrix has eigenvalue {w[0]:.3e} below -{psd_tol}")


def _generator_parts(model: ModelOperators):
    """Split the generator into left/right multipliers and sandwich terms.

    Returns (W_L, W_R_T, sandwiches) such that

        rhs(rho) = -(W_L @ rho) - (rho @ W_R) + sum_k c_k A_k rho B_k

    where W_R_T is W_R pre-transposed (the matrix and kron paths both want it
    that way) and sandwiches is a list of (c_k, A_k, B_k_T).
    """
    H = model.hamiltonian.tocsr()
    D = H.shape[0]
    Ksum = sp.csr_matrix((D, D), dtype=np.complex128)
    sandwiches = []
    for ch in model.channels:
        g = float(ch.gamma)
        if g == 0.0:
            continue
        j = ch.operator.tocsr()
        jd = j.conj().T.tocsr()
        N = float(ch.N)
        M = complex(ch.M)
        Ksum = Ksum + g * (N + 1.0) * (jd @ j)
        sandwiches.append((2.0 * g * (N + 1.0), j, jd.T.tocsr()))
        if N != 0.0:
            Ksum = Ksum + g * N * (j @ jd)
            sandwiches.append((2.0 * g * N, jd, j.T.tocsr()))
        if M != 0.0:
            Ksum = Ksum - g * np.conj(M) * (jd @ jd) - g * M * (j @ j)
            sandwiches.append((-2.0 * g * np.conj(M), jd, jd.T.tocsr()))
            sandwiches.append((-2.0 * g * M, j, j.T.tocsr()))
    W_L = (1j * H + Ksum).tocsr()
    W_R_T = ((-1j) * H + Ksum).T.tocsr()
    W_L.sort_indices()
    W_R_T.sort_indices()
    for _, A, B_T in sandwiches:
        A.sort_indices()
        B_T.sort_indices()
    return W_L, W_R_T, sandwiches


def master_rhs(model: ModelOperators, rho: np.ndarray) -> np.ndarray:
    """Apply the generator to one (not necessarily Hermitian) matrix.

    Output is exactly trace-free by cyclicity, which holds under Fock
    truncation as well; tests pin that down.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    D = model.dim
    if rho.shape != (D, D):
        raise ValueError(f"rho shape {rho.shape} does not match model dimension {D}")
    W_L, W_R_T, sandwiches = _generator_parts(model)
    out = -(W_L @ rho)
    out -= (W_R_T @ rho.T).T
    for c, A, B_T in sandwiches:
        out += c * (B_T @ (A @ rho).T).T
    return out


def liouvillian(model: ModelOperators) -> sp.csr_matrix:
    """Sparse generator acting on the row-major vectorization of rho.

    vec(A rho B) = kron(A, B^T) vec(rho) for row-major vec. This kron
    assembly is deliberately independent of the column-by-column assembly in
    expm_oracle so the two can cross-check each other.
    """
    W_L, W_R_T, sandwiches = _generator_parts(model)
    D = model.dim
    eye = sp.identity(D, dtype=np.complex128, format="csr")
    L = -sp.kron(W_L, eye, format="csr") - sp.kron(eye, W_R_T, format="csr")
    for c, A, B_T in sandwiches:
        L = L + c * sp.kron(A, B_T, format="csr")
    L = L.tocsr()
    L.sort_indices()
    return L


def _diag_gap(H: sp.spmatrix) -> float:
    d = np.real(H.diagonal())
    return float(d.max() - d.min()) if d.size else 0.0


def stability_rate(model: ModelOperators) -> float:
    """Largest Hamiltonian diagonal gap plus total damping, the rate whose
    product with the step is budgeted by the stability policy."""
    rate = _diag_gap(model.hamiltonian)
    for ch in model.channels:
        rate += 4.0 * float(ch.gamma) * (float(ch.N) + 1.0)
    return rate


def default_step(model: ModelOperators) -> float:
    """Conservative default: half the stability budget."""
    rate = stability_rate(model)
    if rate <= 0.0:
        raise ValueError("model generates no dynamics; choose the step explicitly")
    return 0.5 / rate


def _check_stability(step: float, rate: float) -> None:
    product = step * rate
    if product > _STAB_FAIL:
        raise StabilityError(
            f"step * stability_rate = {product:.3g} exceeds {_STAB_FAIL}; "
            "reduce the step or the horizon grid")
    if product > _STAB_WARN:
        warnings.warn(
            f"step * stability_rate = {product:.3g} exceeds {_STAB_WARN}; "
            "results may be inaccurate", StabilityWarning, stacklevel=3)


def _rk4_span(L: sp.csr_matrix, y: np.ndarray, h: float, nsteps: int) -> np.ndarray:
    """Advance nsteps fixed RK4 steps; mutates and returns y."""
    for _ in range(nsteps):
        k1 = L @ y
        k2 = L @ (y + (0.5 * h) * k1)
        k3 = L @ (y + (0.5 * h) * k2)
        k4 = L @ (y + h * k3)
        y += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return y


def _rk4_single(L: sp.csr_matrix, y: np.ndarray, h: float) -> np.ndarray:
    """One functional RK4 step (y untouched)."""
    k1 = L @ y
    k2 = L @ (y + (0.5 * h) * k1)
    k3 = L @ (y + (0.5 * h) * k2)
    k4 = L @ (y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def _span_step_doubling(L, y, span: float, h: float, tol: float):
    """Advance one sample span with step-doubling control.

    Each trial compares a full step against two half steps elementwise; on
    failure the step is halved and retried (the shrunken step persists). The
    accepted state is the two-half-step result. Returns (y, h, steps_taken).
    """
    remaining = span
    eps = 1e-12 * span
    steps = 0
    while remaining > eps:
        hs = min(h, remaining)
        while True:
            y_full = _rk4_single(L, y, hs)
            y_half = _rk4_single(L, _rk4_single(L, y, 0.5 * hs), 0.5 * hs)
            err = float(np.abs(y_full - y_half).max())
            if err < tol:
                break
            hs *= 0.5
            h = hs
            if hs < eps:
                raise IntegrationError(
                    f"step doubling cannot reach local tolerance {tol:g}")
        y = y_half
        remaining -= hs
        steps += 2
    return y, h, steps


def _sample_grid(opts: IntegratorOptions):
    n_samples = int(math.floor(opts.t_max / opts.sample_interval + 1e-9))
    times = opts.sample_interval * np.arange(n_samples + 1)
    return n_samples, times


def evolve_master(model: ModelOperators, rho0: np.ndarray, opts: IntegratorOptions,
                  observer=None, validate: bool = True) -> EvolutionRecord:
    """Propagate rho0 and sample every opts.sample_interval.

    observer, if given, is called as observer(t, rho_snapshot) on the
    re-Hermitized snapshot and its return value is stored instead of the
    matrix itself (the way to keep long runs in bounded memory). The evolving
    state itself is never re-Hermitized or renormalized.
    """
    rho0 = np.asarray(rho0, dtype=np.complex128)
    D = model.dim
    if rho0.shape != (D, D):
        raise ValueError(f"rho0 shape {rho0.shape} does not match model dimension {D}")
    if validate:
        check_density_matrix(rho0)

    rate = stability_rate(model)
    base = opts.step if opts.step is not None else default_step(model)
    _check_stability(base, rate)
    n_sub = max(1, int(math.ceil(opts.sample_interval / base - 1e-12)))
    h = opts.sample_interval / n_sub
    n_samples, times = _sample_grid(opts)

    L = liouvillian(model)
    y = rho0.reshape(-1).copy()
    states = []
    trace_drift = np.empty(n_samples + 1)
    herm_drift = np.empty(n_samples + 1)
    total_steps = 0

    def take_sample(idx: int, t: float):
        rho = y.reshape(D, D)
        if not np.all(np.isfinite(rho)):
            raise DivergenceError(t)
        herm_drift[idx] = np.abs(rho - rho.conj().T).max()
        snap = (rho + rho.conj().T) / 2.0
        trace_drift[idx] = abs(np.trace(snap).real - 1.0)
        states.append(observer(t, snap) if observer is not None else snap)

    take_sample(0, 0.0)
    h_live = h
    for s in range(1, n_samples + 1):
        if opts.error_control == "fixed":
            y = _rk4_span(L, y, h, n_sub)
            total_steps += n_sub
        else:
            y, h_live, took = _span_step_doubling(
                L, y, opts.sample_interval, h_live, opts.local_tolerance)
            total_steps += took
        take_sample(s, times[s])

    # under step_doubling the persisted (possibly shrunken) step is the
    # honest diagnostic; under fixed control it equals the resolved substep
    return EvolutionRecord(times=times, states=states, trace_drift=trace_drift,
                           hermiticity_drift=herm_drift, step=h_live,
                           total_steps=total_steps)


def evolve_pure(hamiltonian: sp.spmatrix, psi0: np.ndarray, opts: IntegratorOptions,
                observer=None) -> PureEvolutionRecord:
    """Schroedinger propagation d psi/dt = -i H psi with the same RK4 grid.

    For the lossless scenarios only; the caller guarantees there are no
    reservoirs in play. Norm drift is recorded per sample, never corrected.
    """
    H = sp.csr_matrix(hamiltonian, dtype=np.complex128)
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if psi0.ndim != 1 or psi0.size != H.shape[0]:
        raise ValueError("psi0 shape does not match the Hamiltonian")
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"psi0 norm {norm!r} differs from 1")

    rate = _diag_gap(H)
    if opts.step is not None:
        base = opts.step
    else:
        if rate <= 0.0:
            raise ValueError("zero diagonal gap; choose the step explicitly")
        base = 0.5 / rate
    _check_stability(base, rate)
    n_sub = max(1, int(math.ceil(opts.sample_interval / base - 1e-12)))
    h = opts.sample_interval / n_sub
    n_samples, times = _sample_grid(opts)

    L = (-1j) * H
    L = L.tocsr()
    L.sort_indices()
    y = psi0.copy()
    states = []
    norm_drift = np.empty(n_samples + 1)
    total_steps = 0

    def take_sample(idx: int, t: float):
        if not np.all(np.isfinite(y)):
            raise DivergenceError(t)
        norm_drift[idx] = abs(np.linalg.norm(y) - 1.0)
        states.append(observer(t, y.copy()) if observer is not None else y.copy())

    take_sample(0, 0.0)
    h_live = h
    for s in range(1, n_samples + 1):
        if opts.error_control == "fixed":
            y = _rk4_span(L, y, h, n_sub)
            total_steps += n_sub
        else:
            y, h_live, took = _span_step_doubling(
                L, y, opts.sample_interval, h_live, opts.local_tolerance)
            total_steps += took
        take_sample(s, times[s])

    return PureEvolutionRecord(times=times, states=states, norm_drift=norm_drift,
                               step=h, total_steps=total_steps)


def expm_oracle(model: ModelOperators, rho0: np.ndarray, t: float) -> np.ndarray:
    """Exact-propagator reference for small models.

    The superoperator matrix is assembled column by column by applying
    master_rhs to matrix units, then exponentiated with scaling-and-squaring.
    Deliberately a different construction from liouvillian() so integrator
    bugs and assembly bugs cannot cancel. Cost is O(dim^6); refuses dim > 8.
    """
    D = model.dim
    if D > 8:
        raise ValueError(f"expm oracle is restricted to dimension <= 8, got {D}")
    rho0 = np.asarray(rho0, dtype=np.complex128)
    if rho0.shape != (D, D):
        raise ValueError(f"rho0 shape {rho0.shape} does not match model dimension {D}")
    cols = np.empty((D * D, D * D), dtype=np.complex128)
    unit = np.zeros((D, D), dtype=np.complex128)
    for k in range(D):
        for l in range(D):
            unit[k, l] = 1.0
            cols[:, k * D + l] = master_rhs(model, unit).reshape(-1)
            unit[k, l] = 0.0
    propagator = scipy.linalg.expm(cols * t)
    return (propagator @ rho0.reshape(-1)).reshape(D, D)
