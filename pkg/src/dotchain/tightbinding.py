"""Reduced lattice model: one amplitude per dot, pulsed nearest-neighbor hopping.

The register is a chain of sites with Hamiltonian ``H_jk(t) = -t_h,jk(t)``
on adjacent pairs and zero diagonal.  Amplitudes obey
``i (1/2pi) dC/dt = H(t) C``; because every hopping is a step function of
time, the propagation is exact: within each interval of constant H,
``C(t + d) = exp(-2 i pi H d) C(t)`` evaluated by eigendecomposition, with
amplitudes continuous across the switch instants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GATE_KINDS = ("transport", "half_split")


@dataclass(frozen=True)
class Pulse:
    """One hopping pulse on a link: t_low outside, t_high inside the window.

    The window is right-continuous: the value is ``t_high`` on
    ``[t_start, t_start + width)`` and ``t_low`` elsewhere.
    """

    link: tuple[int, int]
    t_low: float
    t_high: float
    t_start: float
    width: float

    def __post_init__(self) -> None:
        j, k = self.link
        if abs(j - k) != 1:
            raise ValueError(f"link {self.link} is not an adjacent pair")
        if self.width <= 0:
            raise ValueError("pulse width must be positive")
        if not 0.0 <= self.t_low <= self.t_high:
            raise ValueError("need t_high >= t_low >= 0")
        object.__setattr__(self, "link", (min(j, k), max(j, k)))

    @property
    def t_end(self) -> float:
        return self.t_start + self.width


@dataclass(frozen=True)
class TBSchedule:
    """Pulse schedule for an n-site chain.

    ``default_hopping`` applies to every link not covered by a pulse at a
    given time; it may be a scalar or a ``{(j, j+1): value}`` mapping.
    Pulses on the same link must not overlap.
    """

    n_sites: int
    pulses: tuple[Pulse, ...] = ()
    default_hopping: float | dict = 0.0

    def __post_init__(self) -> None:
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        object.__setattr__(self, "pulses", tuple(self.pulses))
        per_link: dict[tuple[int, int], list[Pulse]] = {}
        for p in self.pulses:
            j, k = p.link
            if not 0 <= j < k < self.n_sites:
                raise ValueError(f"pulse link {p.link} outside 0..{self.n_sites - 1}")
            per_link.setdefault(p.link, []).append(p)
        for link, plist in per_link.items():
            plist.sort(key=lambda p: p.t_start)
            for a, b in zip(plist, plist[1:]):
                if b.t_start < a.t_end:
                    raise ValueError(
                        f"pulses on link {link} overlap at t = {b.t_start}"
                    )
                if b.t_low != a.t_low:
                    raise ValueError(
                        f"pulses on link {link} disagree on the off-window "
                        f"level t_low"
                    )

    def base_hopping(self, link: tuple[int, int]) -> float:
        link = (min(link), max(link))
        if isinstance(self.default_hopping, dict):
            return float(self.default_hopping.get(link, 0.0))
        return float(self.default_hopping)

    @property
    def switch_times(self) -> np.ndarray:
        edges = [t for p in self.pulses for t in (p.t_start, p.t_end)]
        return np.unique(np.asarray(edges, dtype=float))


def hopping_at(schedule: TBSchedule, link: tuple[int, int], t: float) -> float:
    """Hopping energy of one link at time t (right-continuous in t)."""
    link = (min(link), max(link))
    if not 0 <= link[0] < link[1] < schedule.n_sites or link[1] - link[0] != 1:
        raise ValueError(f"invalid link {link} for {schedule.n_sites} sites")
    off_level = None
    for p in schedule.pulses:
        if p.link != link:
            continue
        if p.t_start <= t < p.t_end:
            return float(p.t_high)
        off_level = float(p.t_low)
    if off_level is not None:
        return off_level
    return schedule.base_hopping(link)


def hamiltonian_at(schedule: TBSchedule, t: float) -> np.ndarray:
    """Tridiagonal n x n Hamiltonian with zero diagonal at time t."""
    n = schedule.n_sites
    h = np.zeros((n, n))
    for j in range(n - 1):
        val = -hopping_at(schedule, (j, j + 1), t)
        h[j, j + 1] = h[j + 1, j] = val
    return h


@dataclass(frozen=True)
class AmplitudeTrace:
    times: np.ndarray
    amplitudes: np.ndarray  # (n_times, n_sites) complex

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def propagate(c0, schedule: TBSchedule, horizon: float,
              record_dt: float = 1e-2) -> AmplitudeTrace:
    """Exact piecewise-constant propagation of the amplitude vector.

    Records the amplitudes on a uniform grid of spacing ``record_dt`` from
    0 to ``horizon`` (inclusive); switch times never need to coincide with
    record times because each constant-H interval is integrated exactly.
    """
    c = np.asarray(c0, dtype=complex)
    if c.shape != (schedule.n_sites,):
        raise ValueError("c0 length does not match n_sites")
    if abs(np.linalg.norm(c) - 1.0) > 1e-12:
        raise ValueError("initial amplitudes must be normalized to 1")
    if horizon <= 0:
        raise ValueError("horizon must be positive")

    rec_times = np.arange(0.0, horizon + 0.5 * record_dt, record_dt)
    rec_times[-1] = min(rec_times[-1], horizon)
    edges = schedule.switch_times
    edges = edges[(edges > 0.0) & (edges < horizon)]
    seg_edges = np.concatenate([[0.0], edges, [horizon]])

    out = np.empty((rec_times.size, schedule.n_sites), dtype=complex)
    idx = 0
    for ta, tb in zip(seg_edges[:-1], seg_edges[1:]):
        evals, u = np.linalg.eigh(hamiltonian_at(schedule, ta))
        c_seg = u.conj().T @ c
        sel = (rec_times >= ta) & (rec_times < tb) if tb < horizon else (rec_times >= ta)
        t_in = rec_times[sel]
        phases = np.exp(-2j * np.pi * np.outer(t_in - ta, evals))
        out[idx : idx + t_in.size] = (phases * c_seg) @ u.T
        idx += t_in.size
        c = u @ (np.exp(-2j * np.pi * evals * (tb - ta)) * c_seg)
    return AmplitudeTrace(rec_times, out)


def rabi_period(t_h: float) -> float:
    """Occupancy oscillation period of an isolated pair: T0 = 1 / (2 t_h)."""
    if t_h <= 0:
        raise ValueError("t_h must be positive")
    return 1.0 / (2.0 * t_h)


def gate_pulse_width(kind: str, T0: float, k: int = 0) -> float:
    """Pulse width for a transport (T0/2 + k T0) or half-split (T0/4 + k T0) gate."""
    if kind not in GATE_KINDS:
        raise ValueError(f"kind must be one of {GATE_KINDS}, got {kind!r}")
    if k < 0:
        raise ValueError("k must be a non-negative integer")
    base = 0.5 if kind == "transport" else 0.25
    return (base + k) * T0
