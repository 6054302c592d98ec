"""Representations of the 1D potential energy landscape.

A potential can be a cubic-spline interpolated table (``SampledPotential``),
a piecewise constant/linear profile (``PiecewisePotential``), either of
those placed inside an infinite well (``EmbeddedPotential``), or an
embedded profile whose barrier segments change height over time
(``BarrierSchedule``).  All coordinates are in x0 units and all energies
in E0 units.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import find_peaks

from .core import UnitSystem

OVERSAMPLE = 10  # refinement factor for extrema detection / deviation checks
DEFAULT_PROMINENCE = 0.5  # E0; minimum prominence of a well/barrier feature

X_UNITS = ("nm", "x0")
V_UNITS = ("meV", "ueV", "E0")


class PotentialFormatError(ValueError):
    """Raised when a potential table stream cannot be parsed."""


class NoWellsError(ValueError):
    """Raised when well detection finds no local minima."""


class SegmentBudgetError(ValueError):
    """Raised when the segment budget cannot cover the detected features."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"segment budget {budget} is too small; the potential has "
            f"{required} features (wells/barriers/edges) and needs at least "
            f"{required} segments"
        )


@dataclass(frozen=True)
class SampledPotential:
    """Tabulated potential with cubic-spline interpolation.

    Outside the tabulated range the edge values are extended as constant
    plateaus.
    """

    xs: np.ndarray
    vs: np.ndarray
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=float)
        vs = np.asarray(self.vs, dtype=float)
        if xs.ndim != 1 or xs.shape != vs.shape or xs.size < 4:
            raise ValueError("xs and vs must be equal-length 1D arrays, len >= 4")
        if not np.all(np.diff(xs) > 0):
            raise ValueError("xs must be strictly increasing")
        if not np.all(np.isfinite(vs)):
            raise ValueError("vs must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "vs", vs)
        object.__setattr__(self, "_spline", CubicSpline(xs, vs))

    @property
    def extent(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def __call__(self, x, t: float = 0.0):
        xq = np.clip(np.asarray(x, dtype=float), self.xs[0], self.xs[-1])
        return self._spline(xq)


@dataclass(frozen=True)
class PiecewisePotential:
    """Contiguous segments, each constant or linear in x.

    ``breakpoints`` has one more entry than there are segments; segment i
    spans ``[breakpoints[i], breakpoints[i+1])`` and interpolates linearly
    between ``values[i, 0]`` and ``values[i, 1]`` (equal endpoints make the
    segment constant).
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = np.stack([vals, vals], axis=1)
        if bp.ndim != 1 or bp.size < 2 or vals.shape != (bp.size - 1, 2):
            raise ValueError("need n+1 breakpoints for n segments of (v_lo, v_hi)")
        if not np.all(np.diff(bp) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(vals)):
            raise ValueError("segment values must be finite")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, breakpoints, heights) -> "PiecewisePotential":
        h = np.asarray(heights, dtype=float)
        return cls(np.asarray(breakpoints, dtype=float), np.stack([h, h], axis=1))

    @property
    def n_segments(self) -> int:
        return self.breakpoints.size - 1

    @property
    def extent(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def is_constant(self, i: int) -> bool:
        return self.values[i, 0] == self.values[i, 1]

    def segment_index(self, x) -> np.ndarray:
        idx = np.searchsorted(self.breakpoints, np.asarray(x, dtype=float), "right") - 1
        return np.clip(idx, 0, self.n_segments - 1)

    def __call__(self, x, t: float = 0.0):
        x = np.asarray(x, dtype=float)
        i = self.segment_index(x)
        a, b = self.breakpoints[i], self.breakpoints[i + 1]
        w = np.clip((x - a) / (b - a), 0.0, 1.0)
        out = self.values[i, 0] * (1.0 - w) + self.values[i, 1] * w
        return out


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous piecewise-constant function of time.

    ``values[i]`` applies on ``[switch_times[i-1], switch_times[i])`` with
    the first value extending to -infinity and the last to +infinity.
    """

    switch_times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        st = np.atleast_1d(np.asarray(self.switch_times, dtype=float))
        vals = np.atleast_1d(np.asarray(self.values, dtype=float))
        if vals.size != st.size + 1:
            raise ValueError("need len(values) == len(switch_times) + 1")
        if st.size and not np.all(np.diff(st) > 0):
            raise ValueError("switch_times must be strictly increasing")
        object.__setattr__(self, "switch_times", st)
        object.__setattr__(self, "values", vals)

    @classmethod
    def const(cls, value: float) -> "StepFunction":
        return cls(np.empty(0), np.array([float(value)]))

    @classmethod
    def from_pulses(cls, base: float, pulses) -> "StepFunction":
        """Build a step function from (t_start, width, value) pulses."""
        pulses = sorted((float(t), float(w), float(v)) for t, w, v in pulses)
        times, vals = [], [float(base)]
        t_prev_end = -np.inf
        for t0, w, v in pulses:
            if w <= 0:
                raise ValueError("pulse width must be positive")
            if t0 < t_prev_end:
                raise ValueError(f"pulses overlap at t = {t0}")
            times += [t0, t0 + w]
            vals += [v, float(base)]
            t_prev_end = t0 + w
        return cls(np.array(times), np.array(vals))

    def __call__(self, t):
        idx = np.searchsorted(self.switch_times, np.asarray(t, dtype=float), "right")
        return self.values[idx]


@dataclass(frozen=True)
class EmbeddedPotential:
    """Inner potential centered inside an infinite well spanning [0, L].

    Between the well walls and the inner extent the potential continues the
    inner edge values as constant plateaus.  Evaluation outside [0, L]
    returns ``inf`` (hard-wall sentinel).  ``inner=None`` gives the bare
    infinite well.
    """

    inner: SampledPotential | PiecewisePotential | None
    margin_h: float
    total_length_L: float

    def __post_init__(self) -> None:
        if self.total_length_L <= 0:
            raise ValueError("total_length_L must be positive")
        if self.margin_h < 0:
            raise ValueError("margin_h must be non-negative")
        if self.inner is not None:
            lo, hi = self.inner.extent
            if self.total_length_L + 1e-12 < (hi - lo) + 2 * self.margin_h:
                raise ValueError(
                    f"well width L={self.total_length_L} is too small for inner "
                    f"extent {hi - lo} plus margins 2*{self.margin_h}"
                )

    @property
    def inner_extent(self) -> float:
        if self.inner is None:
            return 0.0
        lo, hi = self.inner.extent
        return hi - lo

    @property
    def inner_interval(self) -> tuple[float, float]:
        """Placement of the inner potential in well coordinates."""
        c_lo = 0.5 * (self.total_length_L - self.inner_extent)
        return c_lo, self.total_length_L - c_lo

    @property
    def plateaus(self) -> tuple[float, float]:
        """Constant potential values on the left/right embedding margins."""
        if self.inner is None:
            return 0.0, 0.0
        lo, hi = self.inner.extent
        return float(self.inner(lo)), float(self.inner(hi))

    def to_inner(self, x):
        """Map well coordinates to inner-potential coordinates."""
        c_lo, _ = self.inner_interval
        return np.asarray(x, dtype=float) - c_lo + (self.inner.extent[0] if self.inner else 0.0)

    def __call__(self, x, t: float = 0.0):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, np.inf)
        inside = (x >= 0.0) & (x <= self.total_length_L)
        if self.inner is None:
            out[inside] = 0.0
        else:
            # Clamped spline/segment evaluation already extends the plateaus.
            out[inside] = self.inner(self.to_inner(x[inside]), t)
        return out if out.shape else float(out)


@dataclass(frozen=True)
class BarrierSchedule:
    """Embedded piecewise potential with time-modulated segment heights.

    ``modulations`` maps a segment index of the inner piecewise potential to
    a right-continuous step function of that segment's height.  Only
    constant-shaped segments can be modulated.
    """

    base: EmbeddedPotential
    modulations: dict[int, StepFunction]

    def __post_init__(self) -> None:
        inner = self.base.inner
        if not isinstance(inner, PiecewisePotential):
            raise ValueError("BarrierSchedule needs a piecewise inner potential")
        for seg, fn in self.modulations.items():
            if not 0 <= seg < inner.n_segments:
                raise ValueError(f"segment index {seg} out of range")
            if not inner.is_constant(seg):
                raise ValueError(f"segment {seg} is not constant; cannot modulate")
            if not np.all(np.isfinite(fn.values)):
                raise ValueError("modulated heights must be finite")

    @classmethod
    def with_pulses(cls, base: EmbeddedPotential, pulse_map) -> "BarrierSchedule":
        """Modulate segments with (t_start, width, value) pulse lists."""
        mods = {}
        for seg, pulses in pulse_map.items():
            h0 = float(base.inner.values[seg, 0])
            mods[seg] = StepFunction.from_pulses(h0, pulses)
        return cls(base, mods)

    @property
    def switch_times(self) -> np.ndarray:
        times = [fn.switch_times for fn in self.modulations.values()]
        return np.unique(np.concatenate(times)) if times else np.empty(0)

    def frozen_at(self, t: float) -> EmbeddedPotential:
        """Embedded potential with segment heights taken at time t."""
        inner: PiecewisePotential = self.base.inner
        vals = inner.values.copy()
        for seg, fn in self.modulations.items():
            vals[seg] = float(fn(t))
        return replace(self.base, inner=PiecewisePotential(inner.breakpoints, vals))

    def __call__(self, x, t: float = 0.0):
        return self.frozen_at(t)(x)


# -- operations ---------------------------------------------------------


def evaluate(p, x, t: float = 0.0):
    """Evaluate any potential representation at position(s) x and time t."""
    return p(x, t)


def load_potential_table(source, units: UnitSystem | None = None) -> SampledPotential:
    """Parse a potential table stream into a SampledPotential.

    Format: UTF-8 CSV, '#' comment lines, one header line ``x_unit,v_unit``
    with ``x_unit`` in {nm, x0} and ``v_unit`` in {meV, ueV, E0}, then
    ``x,V`` rows.  Coordinates are converted to x0 units, energies to E0
    units, and the energy minimum is shifted to zero.
    """
    units = units or UnitSystem()
    if isinstance(source, (str, bytes)):
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    elif isinstance(source, io.IOBase) or hasattr(source, "readlines"):
        lines = source.readlines()
    else:
        raise TypeError("source must be a path or a text stream")

    rows = [ln.strip() for ln in lines]
    rows = [ln for ln in rows if ln and not ln.startswith("#")]
    if not rows:
        raise PotentialFormatError("empty potential table")

    header = [tok.strip() for tok in rows[0].split(",")]
    if len(header) != 2 or header[0] not in X_UNITS or header[1] not in V_UNITS:
        raise PotentialFormatError(
            f"first non-comment line must be a 'x_unit,v_unit' header with "
            f"x_unit in {X_UNITS} and v_unit in {V_UNITS}; got {rows[0]!r}"
        )
    x_unit, v_unit = header

    xs, vs = [], []
    for ln in rows[1:]:
        toks = ln.split(",")
        if len(toks) != 2:
            raise PotentialFormatError(f"expected 'x,V' pair, got {ln!r}")
        try:
            xs.append(float(toks[0]))
            vs.append(float(toks[1]))
        except ValueError as exc:
            raise PotentialFormatError(f"non-numeric row {ln!r}") from exc
    xs = np.asarray(xs)
    vs = np.asarray(vs)
    if xs.size < 4:
        raise PotentialFormatError("need at least 4 table rows")
    if not np.all(np.diff(xs) > 0):
        raise PotentialFormatError("x column must be strictly increasing")

    if x_unit == "nm":
        xs = units.length_from_nm(xs)
    if v_unit == "meV":
        vs = units.energy_from_mev(vs)
    elif v_unit == "ueV":
        vs = units.energy_from_uev(vs)
    vs = vs - vs.min()
    return SampledPotential(xs, vs)


def _oversampled(p: SampledPotential) -> tuple[np.ndarray, np.ndarray]:
    n = OVERSAMPLE * (p.xs.size - 1) + 1
    x = np.linspace(p.xs[0], p.xs[-1], n)
    return x, p(x)


def _features(x: np.ndarray, v: np.ndarray, prominence: float) -> tuple[np.ndarray, np.ndarray]:
    """Interior extrema positions (minima, maxima) with a prominence floor."""
    imax, _ = find_peaks(v, prominence=prominence)
    imin, _ = find_peaks(-v, prominence=prominence)
    return x[imin], x[imax]


def approximate_piecewise(
    p,
    mode: str = "coarse",
    budget: int = 16,
    tol: float = 0.1,
    prominence: float = DEFAULT_PROMINENCE,
) -> PiecewisePotential:
    """Piecewise-constant approximation of a sampled potential.

    Coarse mode gives one constant segment per detected feature (each well,
    each barrier, and the two domain edges), at the spline mean over the
    segment.  Fine mode then greedily bisects the worst segment until the
    max pointwise deviation from the spline on a 10x oversampled grid drops
    below ``tol`` or the budget is exhausted.  A potential that is already
    piecewise is returned unchanged.
    """
    if isinstance(p, PiecewisePotential):
        return p
    if mode not in ("coarse", "fine"):
        raise ValueError(f"mode must be 'coarse' or 'fine', got {mode!r}")

    x_f, v_f = _oversampled(p)
    mins, maxs = _features(x_f, v_f, prominence)
    feats = np.sort(np.concatenate([[x_f[0]], mins, maxs, [x_f[-1]]]))
    n_required = feats.size
    if budget < n_required:
        raise SegmentBudgetError(n_required, budget)

    edges = [x_f[0]] + list(0.5 * (feats[:-1] + feats[1:])) + [x_f[-1]]
    edges = np.unique(edges)

    anti = p._spline.antiderivative()

    def seg_mean(a: float, b: float) -> float:
        return float((anti(b) - anti(a)) / (b - a))

    heights = [seg_mean(a, b) for a, b in zip(edges[:-1], edges[1:])]

    if mode == "fine":
        edges = list(edges)
        while len(heights) < budget:
            devs = []
            for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
                sel = (x_f >= a) & (x_f <= b)
                devs.append(np.max(np.abs(v_f[sel] - heights[i])) if sel.any() else 0.0)
            worst = int(np.argmax(devs))
            if devs[worst] <= tol:
                break
            a, b = edges[worst], edges[worst + 1]
            m = 0.5 * (a + b)
            edges.insert(worst + 1, m)
            heights[worst : worst + 1] = [seg_mean(a, m), seg_mean(m, b)]
        edges = np.asarray(edges)

    return PiecewisePotential.constant(np.asarray(edges), np.asarray(heights))


def embed_in_infinite_well(p, margin_h: float, total_L: float) -> EmbeddedPotential:
    """Center a potential inside an infinite well of width ``total_L``.

    ``margin_h`` is the minimum clearance required between the inner extent
    and each wall; the inner potential is always centered, so the actual
    margins are ``(total_L - extent)/2``.
    """
    return EmbeddedPotential(p, margin_h, total_L)


def potential_on_grid(p, grid, t: float = 0.0, wall_height: float | None = None) -> np.ndarray:
    """Sample a potential on grid points, with finite walls on the margins.

    For embedded potentials, ``wall_height`` (when given) raises the margin
    regions to at least that value so that a periodic (FFT) propagator sees
    confining walls instead of open plateaus.
    """
    x = grid.points
    base = p.base if isinstance(p, BarrierSchedule) else p
    v = np.asarray(p(x, t), dtype=float)
    if wall_height is not None and isinstance(base, EmbeddedPotential):
        c_lo, c_hi = base.inner_interval
        margin = (x < c_lo) | (x > c_hi)
        v[margin] = np.maximum(v[margin], wall_height)
    if not np.all(np.isfinite(v)):
        raise ValueError("grid extends outside the potential domain")
    return v


def _profile_samples(p) -> tuple[np.ndarray, np.ndarray]:
    """Dense samples of a bare potential profile for feature detection."""
    if isinstance(p, SampledPotential):
        return _oversampled(p)
    lo, hi = p.extent
    x = np.linspace(lo, hi, OVERSAMPLE * 200 + 1)
    return x, np.asarray(p(x), dtype=float)


def segment_dots(p, prominence: float = DEFAULT_PROMINENCE) -> list[tuple[float, float]]:
    """One coordinate interval per potential well.

    Wells are the local minima of the profile (10x oversampled, with a
    prominence floor); each interval runs between the flanking local maxima
    (barrier positions), falling back to the domain edges / embedding walls
    where no barrier flanks the well.
    """
    if isinstance(p, BarrierSchedule):
        p = p.frozen_at(0.0)
    embedded = None
    if isinstance(p, EmbeddedPotential):
        if p.inner is None:
            return [(0.0, p.total_length_L)]
        embedded = p
        p = p.inner

    x_f, v_f = _profile_samples(p)
    mins, maxs = _features(x_f, v_f, prominence)
    if mins.size == 0:
        raise NoWellsError("no wells found: the potential has no local minimum "
                           f"with prominence >= {prominence}")

    lo, hi = p.extent
    shift = 0.0
    if embedded is not None:
        shift = embedded.inner_interval[0] - lo
        lo, hi = 0.0, embedded.total_length_L
    ivals = []
    for m in mins:
        left = maxs[maxs < m]
        right = maxs[maxs > m]
        a = float(left[-1] + shift) if left.size else lo
        b = float(right[0] + shift) if right.size else hi
        ivals.append((a, b))
    return ivals
