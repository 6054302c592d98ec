"""Bound states by sine-basis expansion and dense diagonalization.

The stationary problem for a potential embedded in an infinite well of
width L is expanded in the well eigenbasis ``sqrt(2/L) sin(m pi x / L)``;
the truncated Hamiltonian ``H_km = (k pi / L)^2 delta_km + V_km`` is then
diagonalized with a dense symmetric solver.

All potential matrix elements are evaluated through the identity

    (2/L) sin(k pi x/L) sin(m pi x/L) = [cos((k-m) pi x/L) - cos((k+m) pi x/L)] / L

so a full matrix assembly only needs the cosine moments
``I(q) = integral V(x) cos(q pi x / L) dx`` for q = 0 .. 2 n_basis, which
are closed-form for piecewise profiles and Gauss-Legendre quadrature with
oscillation-aware subdivision for splined tables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Grid, WaveState, dot_probabilities
from .potential import EmbeddedPotential, PiecewisePotential, SampledPotential

GL_ORDER = 8
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)
MAX_QUAD_REFINE = 64  # max subdivision multiplier during convergence checks


class QuadratureError(RuntimeError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, achieved: float, requested: float):
        self.achieved = achieved
        self.requested = requested
        super().__init__(
            f"cosine-moment quadrature did not converge: achieved "
            f"{achieved:.3e}, requested {requested:.3e}"
        )


@dataclass(frozen=True)
class BasisSpec:
    """Sine basis of an infinite well: m-th function is sqrt(2/L) sin(m pi x / L)."""

    n_basis: int
    L: float

    def __post_init__(self) -> None:
        if self.n_basis < 1:
            raise ValueError("n_basis must be >= 1")
        if self.L <= 0:
            raise ValueError("L must be positive")

    @property
    def energies(self) -> np.ndarray:
        """Unperturbed level energies (m pi / L)^2, m = 1 .. n_basis."""
        m = np.arange(1, self.n_basis + 1)
        return (m * np.pi / self.L) ** 2

    def sample(self, x: np.ndarray) -> np.ndarray:
        """Matrix of basis functions evaluated at x, shape (n_basis, len(x))."""
        m = np.arange(1, self.n_basis + 1)
        return np.sqrt(2.0 / self.L) * np.sin(np.outer(m, np.pi * x / self.L))


@dataclass(frozen=True)
class EigenSolution:
    """Spectrum and expansion coefficients of the truncated Hamiltonian.

    ``coefficients[n, m-1]`` is the weight of basis function m in state n;
    rows are orthonormal.  ``n_bound`` counts states below the bound-state
    threshold used at solve time.
    """

    energies: np.ndarray
    coefficients: np.ndarray
    n_bound: int
    basis: BasisSpec


# -- cosine moments of the potential profile ----------------------------


def _const_cos_moment(a, b, value, L, qs):
    """integral_a^b value * cos(q pi x / L) dx for an array of q."""
    qs = np.asarray(qs)
    out = np.empty(qs.shape, dtype=float)
    zero = qs == 0
    out[zero] = value * (b - a)
    q = qs[~zero]
    c = q * np.pi / L
    out[~zero] = value * (np.sin(c * b) - np.sin(c * a)) / c
    return out


def _linear_cos_moment(a, b, va, vb, L, qs):
    """Cosine moments of a linear ramp va -> vb over [a, b]."""
    qs = np.asarray(qs)
    beta = (vb - va) / (b - a)
    alpha = va - beta * a
    out = np.empty(qs.shape, dtype=float)
    zero = qs == 0
    out[zero] = alpha * (b - a) + 0.5 * beta * (b**2 - a**2)
    q = qs[~zero]
    c = q * np.pi / L
    sin_b, sin_a = np.sin(c * b), np.sin(c * a)
    cos_b, cos_a = np.cos(c * b), np.cos(c * a)
    out[~zero] = alpha * (sin_b - sin_a) / c + beta * (
        (cos_b - cos_a) / c**2 + (b * sin_b - a * sin_a) / c
    )
    return out


def _spline_cos_moment_once(fn, knots, L, q, factor):
    """GL quadrature of fn(x) cos(q pi x / L) over knot intervals.

    Each interval gets one subdivision per basis oscillation wavelength
    (2L/q) plus one, times the refinement ``factor``.
    """
    lens = np.diff(knots)
    n_sub = factor * (1 + np.floor(lens * max(q, 1) / (2.0 * L)).astype(int))
    edges = np.concatenate(
        [np.linspace(knots[i], knots[i + 1], n_sub[i] + 1)[:-1] for i in range(len(lens))]
        + [knots[-1:]]
    )
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = fn(pts.ravel()).reshape(pts.shape)
    integ = vals * np.cos(q * np.pi * pts / L)
    return float(np.sum((integ @ _GL_WEIGHTS) * half))


def _profile_parts(p, L: float):
    """Decompose a potential over [0, L] into integrable parts.

    Returns a list of ('const', a, b, v), ('linear', a, b, va, vb) and
    ('fn', a, b, callable, knots) tuples covering [0, L].
    """
    if isinstance(p, EmbeddedPotential):
        parts = []
        if p.inner is None:
            return [("const", 0.0, L, 0.0)]
        c_lo, c_hi = p.inner_interval
        pl_lo, pl_hi = p.plateaus
        if c_lo > 0:
            parts.append(("const", 0.0, c_lo, pl_lo))
        inner = p.inner
        shift = c_lo - inner.extent[0]
        if isinstance(inner, PiecewisePotential):
            bp = inner.breakpoints + shift
            for i in range(inner.n_segments):
                va, vb = inner.values[i]
                if va == vb:
                    parts.append(("const", bp[i], bp[i + 1], float(va)))
                else:
                    parts.append(("linear", bp[i], bp[i + 1], float(va), float(vb)))
        else:
            fn = lambda x: inner(x - shift)  # noqa: E731
            parts.append(("fn", c_lo, c_hi, fn, inner.xs + shift))
        if c_hi < L:
            parts.append(("const", c_hi, L, pl_hi))
        return parts
    if isinstance(p, SampledPotential):
        parts = []
        lo, hi = p.extent
        if lo > 0:
            parts.append(("const", 0.0, lo, float(p.vs[0])))
        parts.append(("fn", lo, hi, p, p.xs.copy()))
        if hi < L:
            parts.append(("const", hi, L, float(p.vs[-1])))
        return parts
    if isinstance(p, PiecewisePotential):
        return _profile_parts(EmbeddedPotential(p, 0.0, L), L)
    raise TypeError(f"unsupported potential type {type(p).__name__}")


def cosine_moments(p, L: float, qs: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Moments I(q) = integral_0^L V(x) cos(q pi x / L) dx for all q.

    Closed forms for constant/linear parts; adaptive Gauss-Legendre for
    splined parts, refined until successive estimates differ by less than
    ``tol`` (absolute, per moment).
    """
    qs = np.asarray(qs, dtype=int)
    out = np.zeros(qs.shape, dtype=float)
    for part in _profile_parts(p, L):
        kind = part[0]
        if kind == "const":
            _, a, b, v = part
            out += _const_cos_moment(a, b, v, L, qs)
        elif kind == "linear":
            _, a, b, va, vb = part
            out += _linear_cos_moment(a, b, va, vb, L, qs)
        else:
            _, a, b, fn, knots = part
            knots = np.unique(np.clip(np.concatenate([[a], knots, [b]]), a, b))
            for j, q in enumerate(qs):
                factor = 1
                prev = _spline_cos_moment_once(fn, knots, L, int(q), factor)
                while True:
                    factor *= 2
                    cur = _spline_cos_moment_once(fn, knots, L, int(q), factor)
                    err = abs(cur - prev)
                    if err <= tol:
                        break
                    if factor >= MAX_QUAD_REFINE:
                        raise QuadratureError(err, tol)
                    prev = cur
                out[j] += cur
    return out


# -- matrix elements ----------------------------------------------------


def _check_indices(k: int, m: int) -> None:
    if k < 1 or m < 1:
        raise ValueError("basis indices k, m must be >= 1")


def matrix_element_piecewise(a: float, b: float, v_i: float, k: int, m: int, L: float) -> float:
    """V_km contribution of one constant segment of height v_i on [a, b].

    Closed form of ``v_i (2/L) integral_a^b sin(k pi x/L) sin(m pi x/L) dx``;
    symmetric in (k, m).
    """
    _check_indices(k, m)
    if not 0.0 <= a < b <= L + 1e-12:
        raise ValueError(f"need 0 <= a < b <= L, got a={a}, b={b}, L={L}")
    qs = np.array([abs(k - m), k + m])
    j = _const_cos_moment(a, b, 1.0, L, qs)
    return float(v_i * (j[0] - j[1]) / L)


def matrix_element_linear(a: float, b: float, va: float, vb: float,
                          k: int, m: int, L: float) -> float:
    """V_km contribution of one linear segment ramping va -> vb on [a, b]."""
    _check_indices(k, m)
    if not 0.0 <= a < b <= L + 1e-12:
        raise ValueError(f"need 0 <= a < b <= L, got a={a}, b={b}, L={L}")
    qs = np.array([abs(k - m), k + m])
    i = _linear_cos_moment(a, b, va, vb, L, qs)
    return float((i[0] - i[1]) / L)


def matrix_element_sampled(p, k: int, m: int, L: float, tol: float = 1e-9) -> float:
    """V_km for a splined table potential defined over [0, L].

    Spline-aware quadrature converged to absolute tolerance ``tol``;
    symmetric in (k, m).
    """
    _check_indices(k, m)
    i = cosine_moments(p, L, np.array([abs(k - m), k + m]), tol=0.5 * tol * L)
    return float((i[0] - i[1]) / L)


def assemble_hamiltonian(p: EmbeddedPotential, basis: BasisSpec,
                         tol: float = 1e-9) -> np.ndarray:
    """Dense symmetric Hamiltonian matrix in the sine basis."""
    if abs(basis.L - p.total_length_L) > 1e-12 * max(1.0, basis.L):
        raise ValueError(
            f"basis well width {basis.L} does not match the embedding width "
            f"{p.total_length_L}"
        )
    n = basis.n_basis
    qs = np.arange(0, 2 * n + 1)
    moments = cosine_moments(p, basis.L, qs, tol=0.5 * tol * basis.L)
    k = np.arange(1, n + 1)
    diff = np.abs(k[:, None] - k[None, :])
    summ = k[:, None] + k[None, :]
    v = (moments[diff] - moments[summ]) / basis.L
    h = v + np.diag(basis.energies)
    return 0.5 * (h + h.T)


def default_bound_threshold(p: EmbeddedPotential) -> float:
    """Bound-state criterion: below the lower of the two margin plateaus."""
    if p.inner is None:
        return np.inf
    return min(p.plateaus)


def solve_bound_states(p: EmbeddedPotential, basis: BasisSpec,
                       bound_threshold: float | None = None) -> EigenSolution:
    """Diagonalize the truncated Hamiltonian and count bound states."""
    h = assemble_hamiltonian(p, basis)
    try:
        energies, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigendecomposition failed: {exc}") from exc
    if bound_threshold is None:
        bound_threshold = default_bound_threshold(p)
    n_bound = int(np.count_nonzero(energies < bound_threshold))
    return EigenSolution(energies, vecs.T.copy(), n_bound, basis)


def reconstruct_wavefunction(sol: EigenSolution, n: int, grid: Grid) -> WaveState:
    """Sample eigenstate n on a grid (state 0 is the ground state)."""
    if not 0 <= n < sol.n_bound:
        raise ValueError(f"state index {n} outside the bound range [0, {sol.n_bound})")
    psi = sol.coefficients[n] @ sol.basis.sample(grid.points)
    return WaveState(grid, psi.astype(complex))


def localized_states(sol: EigenSolution, wells, grid: Grid) -> list[WaveState]:
    """Orthonormal dot-localized combinations of the lowest band.

    Takes the lowest ``len(wells)`` eigenstates and diagonalizes the
    position operator restricted to that band; the eigenvectors are the
    maximally position-separated unitary combinations, returned left to
    right (matching ``wells`` sorted by center).
    """
    n_w = len(wells)
    if n_w > sol.n_bound:
        raise ValueError(
            f"only {sol.n_bound} bound states available for {n_w} wells"
        )
    if n_w == 1:
        return [reconstruct_wavefunction(sol, 0, grid)]
    band = sol.coefficients[:n_w]
    x_basis = _position_matrix(sol.basis)
    x_band = band @ x_basis @ band.T
    _, w = np.linalg.eigh(x_band)
    combos = w.T @ band
    states = []
    for row in combos:
        psi = row @ sol.basis.sample(grid.points)
        peak = np.argmax(np.abs(psi))
        if psi[peak].real < 0:
            psi = -psi
        states.append(WaveState(grid, psi.astype(complex)))
    return states


def _position_matrix(basis: BasisSpec) -> np.ndarray:
    """Matrix of x in the sine basis, from its closed-form cosine moments."""
    n, L = basis.n_basis, basis.L
    qmax = 2 * n
    q = np.arange(1, qmax + 1)
    g = np.concatenate([[L**2 / 2.0], L**2 * ((-1.0) ** q - 1.0) / (q * np.pi) ** 2])
    k = np.arange(1, n + 1)
    return (g[np.abs(k[:, None] - k[None, :])] - g[k[:, None] + k[None, :]]) / L


def hopping_from_splitting(sol: EigenSolution, band: tuple[int, int]) -> float:
    """Effective hopping t_h = (E_upper - E_lower) / 2 of a tunneling doublet."""
    i, j = band
    if not i < j:
        raise ValueError(f"band indices must be ascending, got {band}")
    return 0.5 * float(sol.energies[j] - sol.energies[i])


def tunneling_doublet(sol: EigenSolution, wells, link: tuple[int, int],
                      grid: Grid, weight: float = 0.8) -> tuple[int, int]:
    """Indices of the doublet localized on the two wells of ``link``.

    Scans the lowest bound states for the two lowest-energy states whose
    probability inside the linked pair of wells exceeds ``weight``.
    """
    i, j = link
    pair = [wells[i], wells[j]]
    found = []
    for n in range(min(sol.n_bound, len(wells) + 3)):
        state = reconstruct_wavefunction(sol, n, grid)
        state = state.normalized()
        p = dot_probabilities(state, pair).sum()
        if p >= weight:
            found.append(n)
        if len(found) == 2:
            return found[0], found[1]
    raise RuntimeError(
        f"no tunneling doublet found for link {link}: "
        f"{len(found)} candidate state(s) with pair weight >= {weight}"
    )
