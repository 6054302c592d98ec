"""FFT split-operator propagation of the time-dependent problem.

One step applies the symmetric (Strang) factorization

    psi <- exp(-i pi v dt) . IFFT[ exp(-2 i pi k^2 dt) . FFT[ exp(-i pi v dt) psi ] ]

which is ``exp(-i H dt / hbar_eff)`` with ``hbar_eff = 1/(2 pi)`` split
into half potential / full kinetic / half potential phases (local error
O(dt^3)).  Time-dependent barrier heights are sampled at the midpoint of
each step; any step that straddles a height switch is split at the switch
time.  The imaginary-time variant replaces the phases by decaying
exponentials and renormalizes after every step, which relaxes any initial
guess onto the ground state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Grid, WaveState
from .potential import BarrierSchedule, potential_on_grid

DEFAULT_WALL_HEIGHT = 200.0


class GroundStateError(RuntimeError):
    """Imaginary-time relaxation did not converge within n_steps."""

    def __init__(self, last_energy: float, steps: int):
        self.last_energy = last_energy
        super().__init__(
            f"imaginary-time relaxation not converged after {steps} steps "
            f"(last energy {last_energy:.10g})"
        )


@dataclass(frozen=True)
class PropagatorConfig:
    dt: float = 1e-4
    n_steps: int = 10_000
    record_stride: int = 1
    mode: str = "real"  # "real" | "imaginary"
    wall_height: float | None = DEFAULT_WALL_HEIGHT
    keep_snapshots: bool = False

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.mode not in ("real", "imaginary"):
            raise ValueError(f"mode must be 'real' or 'imaginary', got {self.mode!r}")


@dataclass(frozen=True)
class EvolutionTrace:
    """Recorded time series of one propagation."""

    times: np.ndarray
    dot_probs: np.ndarray  # (n_records, n_regions)
    norm_series: np.ndarray
    snapshots: np.ndarray | None  # (n_records, n_points) |psi|^2, optional
    final_state: WaveState


def som_step(state: WaveState, potential, t: float, dt: float,
             wall_height: float | None = DEFAULT_WALL_HEIGHT) -> WaveState:
    """One symmetric split-operator step from t to t + dt.

    ``potential`` may be any potential representation; its value is taken
    at the step midpoint t + dt/2.
    """
    g = state.grid
    v = potential_on_grid(potential, g, t + 0.5 * dt, wall_height)
    half_v = np.exp(-1j * np.pi * v * dt)
    kin = np.exp(-2j * np.pi * g.wavenumbers**2 * dt)
    psi = half_v * np.fft.ifft(kin * np.fft.fft(half_v * state.amplitudes))
    return WaveState(g, psi, state.time + dt)


def _switch_times(potential) -> np.ndarray:
    if isinstance(potential, BarrierSchedule):
        return potential.switch_times
    return np.empty(0)


def _region_masks(grid: Grid, regions) -> np.ndarray:
    x = grid.points
    return np.stack([(x >= a) & (x < b) for a, b in regions])


def evolve(state: WaveState, schedule, config: PropagatorConfig,
           regions) -> EvolutionTrace:
    """Propagate ``n_steps`` real-time steps, recording dot probabilities.

    ``schedule`` is a BarrierSchedule or any static potential; ``regions``
    are the dot intervals whose occupation probabilities are recorded every
    ``record_stride`` steps (plus the initial sample).
    """
    if config.mode != "real":
        raise ValueError("evolve runs in real time; use ground_state_imaginary_time")
    g = state.grid
    dt = config.dt
    dx = g.spacing
    masks = _region_masks(g, regions)
    kin = np.exp(-2j * np.pi * g.wavenumbers**2 * dt)
    t0 = state.time
    switches = _switch_times(schedule)
    switches = switches[(switches > t0) & (switches < t0 + config.n_steps * dt)]
    exp_cache: dict[int, np.ndarray] = {}

    def exp_half_v(t_mid: float, step: float) -> np.ndarray:
        epoch = int(np.searchsorted(switches, t_mid, "right"))
        if step == dt and epoch in exp_cache:
            return exp_cache[epoch]
        v = potential_on_grid(schedule, g, t_mid, config.wall_height)
        out = np.exp(-1j * np.pi * v * step)
        if step == dt:
            exp_cache[epoch] = out
        return out

    psi = state.amplitudes.copy()
    n_rec = config.n_steps // config.record_stride + 1
    times = np.empty(n_rec)
    probs = np.empty((n_rec, len(regions)))
    norms = np.empty(n_rec)
    snaps = np.empty((n_rec, g.n_points)) if config.keep_snapshots else None

    def record(i_rec: int, t: float) -> None:
        density = np.abs(psi) ** 2 * dx
        times[i_rec] = t
        probs[i_rec] = masks @ density
        norms[i_rec] = np.sqrt(density.sum())
        if snaps is not None:
            snaps[i_rec] = density / dx

    record(0, t0)
    i_rec = 1
    for i in range(config.n_steps):
        ta = t0 + i * dt
        tb = ta + dt
        inside = switches[(switches > ta) & (switches < tb)]
        if inside.size == 0:
            ev = exp_half_v(ta + 0.5 * dt, dt)
            psi = ev * np.fft.ifft(kin * np.fft.fft(ev * psi))
        else:
            edges = np.concatenate([[ta], inside, [tb]])
            for u0, u1 in zip(edges[:-1], edges[1:]):
                sub = u1 - u0
                ev = exp_half_v(u0 + 0.5 * sub, sub)
                ksub = np.exp(-2j * np.pi * g.wavenumbers**2 * sub)
                psi = ev * np.fft.ifft(ksub * np.fft.fft(ev * psi))
        if (i + 1) % config.record_stride == 0:
            record(i_rec, tb)
            i_rec += 1

    final = WaveState(g, psi, t0 + config.n_steps * dt)
    return EvolutionTrace(times[:i_rec], probs[:i_rec], norms[:i_rec],
                          snaps[:i_rec] if snaps is not None else None, final)


def ground_state_imaginary_time(potential, config: PropagatorConfig,
                                tol: float = 1e-10, grid: Grid | None = None,
                                initial: WaveState | None = None) -> WaveState:
    """Ground state by imaginary-time relaxation.

    Starts from ``initial`` (or a centered Gaussian bump) and iterates
    diffusion steps with renormalization until the relative energy change
    between recorded strides drops below ``tol``.
    """
    if config.mode != "imaginary":
        raise ValueError("config.mode must be 'imaginary'")
    if initial is None:
        if grid is None:
            raise ValueError("provide either an initial state or a grid")
        x = grid.points
        span = grid.length
        bump = np.exp(-(((x - x[0]) - 0.5 * span) / (span / 8.0)) ** 2)
        initial = WaveState(grid, bump.astype(complex))
    g = initial.grid
    dx = g.spacing
    dtau = config.dt
    v = potential_on_grid(potential, g, 0.0, config.wall_height)
    decay_half_v = np.exp(-np.pi * v * dtau)
    decay_kin = np.exp(-2.0 * np.pi * g.wavenumbers**2 * dtau)

    def energy(psi: np.ndarray) -> float:
        psi_k = np.fft.fft(psi)
        kinetic = np.sum(g.wavenumbers**2 * np.abs(psi_k) ** 2) * dx / g.n_points
        return float(kinetic + np.sum(v * np.abs(psi) ** 2) * dx)

    psi = initial.amplitudes.copy()
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * dx)
    e_prev = energy(psi)
    for i in range(1, config.n_steps + 1):
        psi = decay_half_v * np.fft.ifft(decay_kin * np.fft.fft(decay_half_v * psi))
        psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * dx)
        if i % config.record_stride == 0:
            e = energy(psi)
            if abs(e - e_prev) <= tol * max(abs(e), 1e-300):
                return WaveState(g, psi, 0.0)
            e_prev = e
    raise GroundStateError(e_prev, config.n_steps)


def evolve_ensemble(state: WaveState, schedules, config: PropagatorConfig,
                    regions) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Propagate one initial state under many barrier schedules in lockstep.

    All schedules must share the same base potential and differ only in
    their modulation step functions.  Steps are split at the union of all
    schedules' switch times, so every run sees its own potential exactly
    while the whole batch advances as one (n_runs, n_points) array.

    Returns ``(times, dot_probs, norms)`` with shapes (T,), (R, T, D) and
    (R, T).
    """
    if config.mode != "real":
        raise ValueError("evolve_ensemble runs in real time")
    g = state.grid
    dt = config.dt
    dx = g.spacing
    n_runs = len(schedules)
    masks = _region_masks(g, regions).astype(float)
    kin = np.exp(-2j * np.pi * g.wavenumbers**2 * dt)
    t0 = state.time
    horizon_end = t0 + config.n_steps * dt

    # Per-run modulation bookkeeping: grid mask and step function per segment.
    run_mods = []
    base_v = None
    for sched in schedules:
        if not isinstance(sched, BarrierSchedule):
            raise TypeError("evolve_ensemble expects BarrierSchedule entries")
        v0 = potential_on_grid(sched.base, g, 0.0, config.wall_height)
        if base_v is None:
            base_v = v0
        mods = []
        inner = sched.base.inner
        c_lo = sched.base.inner_interval[0]
        shift = c_lo - inner.extent[0]
        x = g.points
        for seg, fn in sched.modulations.items():
            a, b = inner.breakpoints[seg] + shift, inner.breakpoints[seg + 1] + shift
            mods.append(((x >= a) & (x < b), fn))
        run_mods.append(mods)

    union = np.unique(np.concatenate([_switch_times(s) for s in schedules] + [np.empty(0)]))
    union = union[(union > t0) & (union < horizon_end)]

    v_batch = np.tile(base_v, (n_runs, 1))

    def refresh(t: float, runs=None) -> None:
        for r in range(n_runs) if runs is None else runs:
            for mask, fn in run_mods[r]:
                v_batch[r, mask] = float(fn(t))

    psi = np.tile(state.amplitudes, (n_runs, 1))
    n_rec = config.n_steps // config.record_stride + 1
    times = np.empty(n_rec)
    probs = np.empty((n_runs, n_rec, len(regions)))
    norms = np.empty((n_runs, n_rec))

    def record(i_rec: int, t: float) -> None:
        density = np.abs(psi) ** 2 * dx
        times[i_rec] = t
        probs[:, i_rec, :] = density @ masks.T
        norms[:, i_rec] = np.sqrt(density.sum(axis=1))

    record(0, t0)
    i_rec = 1
    exp_v = None
    current_epoch = -1
    for i in range(config.n_steps):
        ta = t0 + i * dt
        tb = ta + dt
        inside = union[(union > ta) & (union < tb)]
        if inside.size == 0:
            mid = ta + 0.5 * dt
            epoch = int(np.searchsorted(union, mid, "right"))
            if epoch != current_epoch:
                refresh(mid)
                exp_v = np.exp(-1j * np.pi * v_batch * dt)
                current_epoch = epoch
            psi = exp_v * np.fft.ifft(kin * np.fft.fft(exp_v * psi, axis=1), axis=1)
        else:
            edges = np.concatenate([[ta], inside, [tb]])
            for u0, u1 in zip(edges[:-1], edges[1:]):
                sub = u1 - u0
                refresh(u0 + 0.5 * sub)
                ev = np.exp(-1j * np.pi * v_batch * sub)
                ksub = np.exp(-2j * np.pi * g.wavenumbers**2 * sub)
                psi = ev * np.fft.ifft(ksub * np.fft.fft(ev * psi, axis=1), axis=1)
            current_epoch = -1  # force a refresh on the next nominal step
        if (i + 1) % config.record_stride == 0:
            record(i_rec, tb)
            i_rec += 1

    return times[:i_rec], probs[:, :i_rec, :], norms[:, :i_rec]
