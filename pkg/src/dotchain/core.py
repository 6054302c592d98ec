"""Dimensionless unit system, spatial grid and wavefunction observables.

Every solver in this package works with the dimensionless form of the
Schrodinger equation obtained by measuring length in units of ``x0``,
energy in units of ``E0 = hbar^2 / (2 m_eff x0^2)`` and time in units of
``t0 = 2 pi hbar / E0``.  In these units the equation reads

    i * (1/2pi) * dpsi/dtau = [-d^2/dxi^2 + v(xi, tau)] psi

so the dimensionless Planck constant is ``1/(2 pi)``, the Hamiltonian is
``-d^2/dxi^2 + v`` and the n-th level of an infinite well of width ``L``
is ``(n pi / L)^2``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.constants as const

UNIT_KINDS = ("length", "energy", "time")

# Default physical inputs: silicon DOS effective mass in units of the
# electron mass, characteristic length of the dot structures.
DEFAULT_X0_M = 20e-9
DEFAULT_M_EFF_KG = 1.08 * 9.109e-31
DEFAULT_E_CHARGE_C = 1.602e-19


@dataclass(frozen=True)
class UnitSystem:
    """Normalisation units for the dimensionless Schrodinger problem.

    ``x0`` and ``m_eff`` are the independent inputs; ``E0``, ``t0`` and
    ``hbar_dimensionless`` are derived so that the defining relations
    ``E0 = hbar^2/(2 m_eff x0^2)`` and ``t0 = 2 pi hbar / E0`` hold to
    machine precision, which makes ``hbar_dimensionless = 1/(2 pi)``.

    Attributes
    ----------
    x0 : float
        Length unit in metres.
    m_eff : float
        Effective electron mass in kg.
    e_charge : float
        Elementary charge in C (used for eV-based conversions).
    E0 : float
        Energy unit in joules (derived).
    t0 : float
        Time unit in seconds (derived).
    hbar_dimensionless : float
        Value of hbar expressed in ``E0 * t0``, i.e. ``1/(2 pi)``.
    """

    x0: float = DEFAULT_X0_M
    m_eff: float = DEFAULT_M_EFF_KG
    e_charge: float = DEFAULT_E_CHARGE_C
    E0: float = field(init=False)
    t0: float = field(init=False)
    hbar_dimensionless: float = field(init=False)

    def __post_init__(self) -> None:
        if self.x0 <= 0 or self.m_eff <= 0 or self.e_charge <= 0:
            raise ValueError("x0, m_eff and e_charge must be positive")
        e0 = const.hbar**2 / (2.0 * self.m_eff * self.x0**2)
        object.__setattr__(self, "E0", e0)
        object.__setattr__(self, "t0", 2.0 * np.pi * const.hbar / e0)
        object.__setattr__(self, "hbar_dimensionless", const.hbar / (e0 * self.t0))

    @property
    def E0_ueV(self) -> float:
        """Energy unit expressed in micro-electronvolts."""
        return self.E0 / self.e_charge * 1e6

    # -- conversions between SI values and dimensionless units ----------

    def _scale(self, kind: str) -> float:
        try:
            return {"length": self.x0, "energy": self.E0, "time": self.t0}[kind]
        except KeyError:
            raise ValueError(
                f"unknown unit kind {kind!r}; expected one of {UNIT_KINDS}"
            ) from None

    def to_dimensionless(self, value: float, kind: str) -> float:
        """Convert an SI value (m, J or s) to x0/E0/t0 units."""
        return value / self._scale(kind)

    def from_dimensionless(self, value: float, kind: str) -> float:
        """Convert a dimensionless value back to SI (m, J or s)."""
        return value * self._scale(kind)

    # Named helpers for the units that actually appear in lab inputs.

    def length_from_nm(self, nm):
        return np.asarray(nm, dtype=float) * 1e-9 / self.x0

    def length_to_nm(self, xi):
        return np.asarray(xi, dtype=float) * self.x0 * 1e9

    def energy_from_mev(self, mev):
        return np.asarray(mev, dtype=float) * 1e-3 * self.e_charge / self.E0

    def energy_from_uev(self, uev):
        return np.asarray(uev, dtype=float) * 1e-6 * self.e_charge / self.E0

    def energy_to_uev(self, v):
        return np.asarray(v, dtype=float) * self.E0_ueV

    def time_from_ps(self, ps):
        return np.asarray(ps, dtype=float) * 1e-12 / self.t0

    def time_from_ns(self, ns):
        return np.asarray(ns, dtype=float) * 1e-9 / self.t0

    def time_to_ps(self, tau):
        return np.asarray(tau, dtype=float) * self.t0 * 1e12

    def time_to_ns(self, tau):
        return np.asarray(tau, dtype=float) * self.t0 * 1e9


def convert(value: float, kind: str, direction: str, units: UnitSystem) -> float:
    """Convert ``value`` between SI and dimensionless units.

    ``direction`` is ``"to"`` (SI -> dimensionless) or ``"from"``
    (dimensionless -> SI); ``kind`` is one of ``length``, ``energy``,
    ``time``.
    """
    if direction == "to":
        return units.to_dimensionless(value, kind)
    if direction == "from":
        return units.from_dimensionless(value, kind)
    raise ValueError(f"direction must be 'to' or 'from', got {direction!r}")


@dataclass(frozen=True)
class Grid:
    """Uniform periodic spatial grid with a power-of-2 point count.

    Points are ``offset + i * spacing`` for ``i = 0 .. n_points-1`` with
    ``spacing = length / n_points``; the point at ``offset + length`` is
    identified with the first one (FFT convention).
    """

    n_points: int
    length: float
    offset: float = 0.0

    def __post_init__(self) -> None:
        n = self.n_points
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError(f"n_points must be a power of 2, got {n}")
        if self.length <= 0:
            raise ValueError("grid length must be positive")

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def points(self) -> np.ndarray:
        return self.offset + self.spacing * np.arange(self.n_points)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Spectral wavenumbers matching ``np.fft.fft`` ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)


@dataclass(frozen=True)
class WaveState:
    """Complex wavefunction sampled on a grid at a given time."""

    grid: Grid
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.grid.n_points,):
            raise ValueError(
                f"amplitudes shape {amp.shape} does not match grid "
                f"({self.grid.n_points},)"
            )
        object.__setattr__(self, "amplitudes", amp)

    def normalized(self) -> "WaveState":
        n = norm(self)
        if n == 0.0:
            raise ValueError("cannot normalize the zero state")
        return WaveState(self.grid, self.amplitudes / n, self.time)


def norm(state: WaveState) -> float:
    """L2 norm ``sqrt(sum |psi_i|^2 dx)`` of a sampled wavefunction."""
    return float(
        np.sqrt(np.sum(np.abs(state.amplitudes) ** 2) * state.grid.spacing)
    )


def _potential_values(potential, grid: Grid) -> np.ndarray:
    if potential is None:
        return np.zeros(grid.n_points)
    if callable(potential):
        return np.asarray(potential(grid.points), dtype=float)
    v = np.asarray(potential, dtype=float)
    if v.shape != (grid.n_points,):
        raise ValueError("potential array length does not match the grid")
    return v


def energy_expectation(state: WaveState, potential=None) -> float:
    """Expectation of the dimensionless Hamiltonian ``-d^2/dxi^2 + v``.

    The kinetic part uses the spectral (Fourier) second derivative; the
    potential part is a pointwise sum.  ``potential`` may be ``None``
    (free particle), a callable ``v(x)`` or an array of grid values.
    Emits a warning when the state is not normalized to within 1e-6.
    """
    psi = state.amplitudes
    g = state.grid
    density = np.abs(psi) ** 2
    norm_sq = float(np.sum(density) * g.spacing)
    if abs(norm_sq - 1.0) > 1e-6:
        warnings.warn(
            f"energy_expectation called on a non-normalized state "
            f"(|psi|^2 integrates to {norm_sq:.6g})",
            stacklevel=2,
        )
    psi_k = np.fft.fft(psi)
    kinetic = np.sum(g.wavenumbers**2 * np.abs(psi_k) ** 2) * g.spacing / g.n_points
    v = _potential_values(potential, g)
    return float(kinetic + np.sum(v * density) * g.spacing)


def dot_probabilities(state: WaveState, regions) -> np.ndarray:
    """Probability of finding the electron inside each coordinate interval.

    ``regions`` is a sequence of ``(a, b)`` intervals in grid coordinates.
    Each probability is the discrete sum ``sum |psi_i|^2 dx`` over grid
    points with ``a <= x < b`` (half-open, so touching intervals never
    double-count a point).  Intervals must not overlap and must lie within
    the grid extent.
    """
    g = state.grid
    ivals = [(float(a), float(b)) for a, b in regions]
    for a, b in ivals:
        if not a < b:
            raise ValueError(f"region ({a}, {b}) is empty or reversed")
    eps = 1e-9 * g.length
    lo, hi = g.offset - eps, g.offset + g.length + eps
    for a, b in ivals:
        if a < lo or b > hi:
            raise ValueError(f"region ({a}, {b}) extends outside the grid")
    for (a1, b1), (a2, b2) in zip(sorted(ivals), sorted(ivals)[1:]):
        if b1 > a2 + eps:
            raise ValueError(
                f"regions ({a1}, {b1}) and ({a2}, {b2}) overlap"
            )
    x = g.points
    density = np.abs(state.amplitudes) ** 2 * g.spacing
    return np.array([float(density[(x >= a) & (x < b)].sum()) for a, b in ivals])
