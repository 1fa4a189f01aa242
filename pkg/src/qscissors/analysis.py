"""Trajectory analysis: sudden death, rebirths, maxima, parameter sweeps.

Death time tau_d is the earliest sample time from which the negativity stays
below the threshold through the end of the series (the *last* crossing, so a
later rebirth resets it). A series still above threshold at the horizon has
undetermined tau_d, reported as None. Rebirths are counted as maximal
above-threshold runs after the first sub-threshold run, which is robust
against ripples that never actually cross the threshold.

Sweep results are deterministic: jobs are laid out in axis order and the
worker pool (processes; each run is independent) returns them in the same
order regardless of scheduling.

All analysis-level times are reported in t*chi units (chi := chi_a); the
underlying integrator options stay in absolute units.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import EvolutionRecord, IntegratorOptions, evolve_master, evolve_pure
from .entanglement import NegativitySeries, bell_state, negativity, trunc_indices, truncation_fidelity
from .fock import ModeDims, pure_density, vacuum_state
from .model import SystemParams, build_hamiltonian, build_model

__all__ = [
    "DeathReport",
    "SweepRow",
    "SweepTable",
    "ConvergenceReport",
    "detect_death_time",
    "find_negativity_maxima",
    "run_decay",
    "run_fidelity",
    "sweep_phase",
    "sweep_squeezing",
    "cutoff_convergence",
]

DEFAULT_THRESHOLD = 1e-4


@dataclass(frozen=True)
class DeathReport:
    """Death/rebirth summary of one negativity series.

    tau_d_chi None means the state was still entangled at the horizon.
    max_last / max_penultimate are the peak amplitudes of the last two revival
    arcs, i.e. above-threshold runs entered from below (NaN when there are
    fewer than two arcs).
    """

    threshold: float
    tau_d_chi: float | None
    n_rebirths: int
    max_last: float
    max_penultimate: float

    @property
    def undetermined(self) -> bool:
        return self.tau_d_chi is None


def _interior_maxima(neg: np.ndarray, threshold: float) -> np.ndarray:
    if neg.size < 3:
        return np.empty(0, dtype=int)
    mid = neg[1:-1]
    mask = (mid > neg[:-2]) & (mid > neg[2:]) & (mid >= threshold)
    return np.nonzero(mask)[0] + 1


def detect_death_time(series: NegativitySeries, threshold: float = DEFAULT_THRESHOLD,
                      require_hold: bool = True) -> DeathReport:
    """Locate entanglement death and count rebirths.

    require_hold=True (the definition used everywhere in reports) demands the
    negativity stay below threshold through the end of the series;
    require_hold=False returns the first sub-threshold sample instead.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    neg = series.negativity
    t = series.times_chi
    below = neg < threshold

    if not below.any():
        tau = None
    elif require_hold:
        if not below[-1]:
            tau = None
        else:
            above = np.nonzero(~below)[0]
            tau = float(t[above[-1] + 1]) if above.size else float(t[0])
    else:
        tau = float(t[int(np.argmax(below))])

    # revival arcs: maximal above-threshold runs entered by an upward crossing;
    # one rebirth per arc, amplitudes are the arc peaks (a single revival can
    # carry secondary wiggles, which must not masquerade as separate maxima)
    above = ~below
    starts = np.nonzero(above[1:] & below[:-1])[0] + 1
    run_ends = np.nonzero(above & np.append(below[1:], True))[0]
    peaks = [float(neg[s:run_ends[np.searchsorted(run_ends, s)] + 1].max())
             for s in starts]
    max_last = peaks[-1] if len(peaks) >= 1 else math.nan
    max_penult = peaks[-2] if len(peaks) >= 2 else math.nan
    return DeathReport(threshold=threshold, tau_d_chi=tau, n_rebirths=len(peaks),
                       max_last=max_last, max_penultimate=max_penult)


def find_negativity_maxima(series: NegativitySeries,
                           threshold: float = DEFAULT_THRESHOLD) -> list[tuple[float, float]]:
    """Strict 3-point interior maxima with parabolic refinement.

    Returns (t_chi, value) pairs. The initial sample, which is itself the
    global maximum for Bell-state starts, is not an interior point and is not
    included; read series.negativity[0] for it.
    """
    neg = series.negativity
    t = series.times_chi
    out = []
    for i in _interior_maxima(neg, threshold):
        y0, y1, y2 = neg[i - 1], neg[i], neg[i + 1]
        denom = y0 - 2.0 * y1 + y2
        delta = 0.0 if denom == 0.0 else 0.5 * (y0 - y2) / denom
        dt = t[i + 1] - t[i]
        out.append((float(t[i] + delta * dt), float(y1 - 0.25 * (y0 - y2) * delta)))
    return out


def _negativity_observer(dims: ModeDims, renormalize: bool, with_populations: bool):
    idx = trunc_indices(dims)
    def observe(t, rho):
        block = rho[np.ix_(idx, idx)]
        pops = block.diagonal().real
        neg = negativity(block, renormalize=renormalize)
        if with_populations:
            return (neg, float(pops.sum()), pops.copy())
        return (neg, float(pops.sum()))
    return observe


def _initial_density(initial: str, dims: ModeDims) -> np.ndarray:
    if initial == "vacuum":
        return pure_density(vacuum_state(dims))
    return pure_density(bell_state(initial, dims))


def run_decay(params: SystemParams, dims: ModeDims, opts: IntegratorOptions,
              initial: str = "B3", thermal_only: bool = False,
              renormalize: bool = False, populations: bool = False
              ) -> tuple[NegativitySeries, EvolutionRecord]:
    """One master-equation run reduced to its negativity series."""
    model = build_model(params, dims, thermal_only=thermal_only)
    rho0 = _initial_density(initial, dims)
    observer = _negativity_observer(dims, renormalize, populations)
    record = evolve_master(model, rho0, opts, observer=observer)
    neg = np.array([row[0] for row in record.states])
    trace = np.array([row[1] for row in record.states])
    pops = np.array([row[2] for row in record.states]) if populations else None
    series = NegativitySeries(times_chi=record.times * params.chi_a, negativity=neg,
                              trunc_trace=trace, populations=pops)
    record.states = []
    return series, record


def run_fidelity(params: SystemParams, dims: ModeDims, opts: IntegratorOptions,
                 initial: str = "B3"):
    """Lossless scissors-confinement check: evolve a pure state under the full
    Hamiltonian and log the overlap weight with the retained triplet.

    Returns (times_chi, fidelity, record). Requires gamma_a = gamma_b = 0.
    """
    if params.gamma_a != 0.0 or params.gamma_b != 0.0:
        raise ValueError("fidelity run is defined for the lossless case; set gamma to 0")
    H = build_hamiltonian(params, dims)
    psi0 = vacuum_state(dims) if initial == "vacuum" else bell_state(initial, dims)
    record = evolve_pure(H, psi0, opts,
                         observer=lambda t, psi: truncation_fidelity(psi, dims))
    fid = np.array(record.states, dtype=float)
    record.states = []
    return record.times * params.chi_a, fid, record


def _sweep_worker(job):
    params, dims, opts, thermal_only, threshold, renormalize = job
    try:
        series, record = run_decay(params, dims, opts, initial="B3",
                                   thermal_only=thermal_only, renormalize=renormalize)
        report = detect_death_time(series, threshold)
        return (report, float(record.trace_drift.max()),
                float(record.hermiticity_drift.max()), None)
    except Exception as exc:  # keep the sweep alive; the row carries the failure
        return (None, math.nan, math.nan, f"{type(exc).__name__}: {exc}")


@dataclass
class SweepRow:
    axis_value: float
    report: DeathReport | None
    error: str | None
    max_trace_drift: float
    max_hermiticity_drift: float

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        if self.report is None or self.report.undetermined:
            return "undetermined"
        return "ok"


@dataclass
class SweepTable:
    axis_name: str
    rows: list
    params: SystemParams
    dims: ModeDims
    threshold: float

    @property
    def axis_values(self) -> np.ndarray:
        return np.array([row.axis_value for row in self.rows])


def _run_sweep(axis_name, values, make_params, dims, opts, threshold,
               renormalize, thermal_only, workers) -> SweepTable:
    values = [float(v) for v in values]
    if not values:
        raise ValueError("sweep needs at least one axis value")
    jobs = [(make_params(v), dims, opts, thermal_only, threshold, renormalize)
            for v in values]
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, min(int(workers), len(jobs)))
    if workers == 1:
        results = [_sweep_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    rows = [SweepRow(axis_value=v, report=rep, error=err,
                     max_trace_drift=tdr, max_hermiticity_drift=hdr)
            for v, (rep, tdr, hdr, err) in zip(values, results)]
    template = make_params(values[0])
    return SweepTable(axis_name=axis_name, rows=rows, params=template,
                      dims=dims, threshold=threshold)


def sweep_phase(params: SystemParams, phi_values, dims: ModeDims, opts: IntegratorOptions,
                threshold: float = DEFAULT_THRESHOLD, renormalize: bool = False,
                thermal_only: bool = False, workers: int | None = None) -> SweepTable:
    """Death analysis across squeezing phases, B3 start, one run per phase."""
    return _run_sweep("phi", phi_values, lambda v: replace(params, phi=v),
                      dims, opts, threshold, renormalize, thermal_only, workers)


def sweep_squeezing(params: SystemParams, n_values, dims: ModeDims, opts: IntegratorOptions,
                    threshold: float = DEFAULT_THRESHOLD, renormalize: bool = False,
                    thermal_only: bool = False, workers: int | None = None) -> SweepTable:
    """Death analysis across reservoir mean photon numbers N_a at fixed phase."""
    return _run_sweep("N_a", n_values, lambda v: replace(params, N_a=v),
                      dims, opts, threshold, renormalize, thermal_only, workers)


@dataclass
class ConvergenceReport:
    base_dims: ModeDims
    refined_dims: ModeDims
    sup_diff: float
    tolerance: float
    passed: bool
    series_base: NegativitySeries
    series_refined: NegativitySeries


def cutoff_convergence(params: SystemParams, dims: ModeDims, opts: IntegratorOptions,
                       initial: str = "B3", thermal_only: bool = False,
                       renormalize: bool = False, tolerance: float = 1e-3) -> ConvergenceReport:
    """Rerun the scenario with both cutoffs raised by 2 and compare series.

    The step auto-selection resolves per-dims (the refined model is stiffer),
    while the sample grid is shared, so the two negativity series are compared
    pointwise on identical times.
    """
    refined = ModeDims(dims.levels_a + 2, dims.levels_b + 2)
    base_series, _ = run_decay(params, dims, opts, initial=initial,
                               thermal_only=thermal_only, renormalize=renormalize)
    ref_series, _ = run_decay(params, refined, opts, initial=initial,
                              thermal_only=thermal_only, renormalize=renormalize)
    sup = float(np.abs(base_series.negativity - ref_series.negativity).max())
    return ConvergenceReport(base_dims=dims, refined_dims=refined, sup_diff=sup,
                             tolerance=tolerance, passed=sup < tolerance,
                             series_base=base_series, series_refined=ref_series)
