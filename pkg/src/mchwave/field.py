"""Periodic grids, spectral calculus, conserved functionals, and the
orbital semi-distance.

A :class:`PeriodicField` carries samples of an L-periodic function on a
uniform grid.  Differentiation is Fourier (exact for band-limited data),
integration is the trapezoid rule, which is spectrally accurate for
smooth periodic integrands.  The H^1 inner product used throughout is
the one induced by the momentum functional: ||v||^2 = int v^2 + v_x^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import DomainError
from .wave import WaveParams, profile

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid of n nodes x_j = j L / n on [0, L); n even, >= 16."""

    L: float
    n: int

    def __post_init__(self) -> None:
        if not (self.L > 0.0) or not math.isfinite(self.L):
            raise DomainError(f"grid period must be positive, got {self.L}")
        if self.n < 16 or self.n % 2 != 0:
            raise DomainError(f"grid size must be even and >= 16, got {self.n}")

    @property
    def spacing(self) -> float:
        return self.L / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * (self.L / self.n)

    def wavenumbers(self) -> np.ndarray:
        """rfft wavenumbers 2 pi m / L, m = 0 .. n/2."""
        return 2.0 * math.pi * np.arange(self.n // 2 + 1) / self.L


@dataclass(frozen=True)
class PeriodicField:
    """Real samples of an L-periodic function on a :class:`PeriodicGrid`."""

    grid: PeriodicGrid
    values: np.ndarray = dc_field(repr=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise DomainError(
                f"values shape {vals.shape} does not match grid size {self.grid.n}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("field values must be finite")
        object.__setattr__(self, "values", vals)

    def _check_same_grid(self, other: "PeriodicField") -> None:
        if self.grid != other.grid:
            raise DomainError("fields live on different grids and cannot be combined")

    def __add__(self, other: "PeriodicField") -> "PeriodicField":
        self._check_same_grid(other)
        return PeriodicField(self.grid, self.values + other.values)

    def __sub__(self, other: "PeriodicField") -> "PeriodicField":
        self._check_same_grid(other)
        return PeriodicField(self.grid, self.values - other.values)

    def __rmul__(self, scalar: float) -> "PeriodicField":
        return PeriodicField(self.grid, float(scalar) * self.values)


def sample(f: Callable, grid: PeriodicGrid) -> PeriodicField:
    """Sample a pointwise function on the grid nodes."""
    x = grid.nodes
    try:
        vals = np.asarray(f(x), dtype=float)
        if vals.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(f(xi)) for xi in x])
    if not np.all(np.isfinite(vals)):
        raise DomainError("sampled function produced non-finite values")
    return PeriodicField(grid, vals)


def sample_wave(p: WaveParams, grid: PeriodicGrid) -> PeriodicField:
    """Sample the wave profile phi on the grid."""
    if not np.isclose(grid.L, p.L, rtol=1e-12, atol=0.0):
        raise DomainError(f"grid period {grid.L} does not match wave period {p.L}")
    return PeriodicField(grid, np.asarray(profile(p, grid.nodes)[0]))


def derivative(u: PeriodicField, order: int = 1) -> PeriodicField:
    """Spectral x-derivative of order 1, 2 or 3.

    The Nyquist mode is zeroed for odd orders (its derivative is not
    representable on an even grid) and kept with symbol (i kappa)^order
    for even ones.
    """
    if order not in (1, 2, 3):
        raise DomainError(f"derivative order must be 1, 2 or 3, got {order}")
    kap = u.grid.wavenumbers()
    symbol = (1j * kap) ** order
    if order % 2 == 1:
        symbol[-1] = 0.0
    spec = np.fft.rfft(u.values)
    return PeriodicField(u.grid, np.fft.irfft(symbol * spec, u.grid.n))


def integrate(u: PeriodicField) -> float:
    """Trapezoid rule over one period: (L/n) sum u_j."""
    return float(u.grid.spacing * np.sum(u.values))


def helmholtz_inverse(u: PeriodicField) -> PeriodicField:
    """(1 - d^2/dx^2)^{-1} u via its Fourier symbol 1 / (1 + kappa^2)."""
    kap = u.grid.wavenumbers()
    spec = np.fft.rfft(u.values) / (1.0 + kap * kap)
    return PeriodicField(u.grid, np.fft.irfft(spec, u.grid.n))


def inner_l2(u: PeriodicField, v: PeriodicField) -> float:
    u._check_same_grid(v)
    return float(u.grid.spacing * np.dot(u.values, v.values))


def inner_h1(u: PeriodicField, v: PeriodicField) -> float:
    """H^1 pairing int u v + u_x v_x."""
    return inner_l2(u, v) + inner_l2(derivative(u), derivative(v))


def h1_norm(u: PeriodicField) -> float:
    return math.sqrt(max(inner_h1(u, u), 0.0))


def functionals(u: PeriodicField) -> tuple[float, float, float]:
    """The three conserved quantities (E, F, V) of the flow.

    E = -int [u^4/4 + u u_x^2 / 2], F = (1/2) int u^2 + u_x^2, V = int u,
    with u_x from spectral differentiation.
    """
    ux = derivative(u).values
    w = u.grid.spacing
    vals = u.values
    e = -w * float(np.sum(0.25 * vals**4 + 0.5 * vals * ux * ux))
    f = 0.5 * w * float(np.sum(vals * vals + ux * ux))
    v = w * float(np.sum(vals))
    return e, f, v


def augmented(u: PeriodicField, c: float, big_a: float) -> float:
    """Augmented functional G(u) = E(u) + c F(u) - A V(u)."""
    e, f, v = functionals(u)
    return e + c * f - big_a * v


def lyapunov(u: PeriodicField, p: WaveParams, big_n: float,
             q_coeffs: tuple[float, float]) -> float:
    """Modified Lyapunov functional B(u) = G(u) - G(phi) + N (Q(u) - Q(phi))^2.

    ``q_coeffs = (dA_dk, dc_dk)`` defines the conserved combination
    Q(u) = dA_dk * V(u) - dc_dk * F(u).  ``big_n`` is the caller-supplied
    positive weight (only its existence is guaranteed, not a formula).
    """
    if not (big_n > 0.0):
        raise DomainError(f"lyapunov weight must be positive, got {big_n}")
    da_dk, dc_dk = q_coeffs
    phi = sample_wave(p, u.grid)

    def q_of(w: PeriodicField) -> float:
        _, f, v = functionals(w)
        return da_dk * v - dc_dk * f

    g_u = augmented(u, p.c, p.A)
    g_phi = augmented(phi, p.c, p.A)
    return g_u - g_phi + big_n * (q_of(u) - q_of(phi)) ** 2


def fractional_shift(u: PeriodicField, s: float) -> PeriodicField:
    """u(. + s) by Fourier phase multiplication; exact for band-limited u.

    The Nyquist mode is phase-shifted with its cosine interpretation kept
    real, so shifted fields stay real for any fractional s.
    """
    kap = u.grid.wavenumbers()
    spec = np.fft.rfft(u.values)
    shifted = spec * np.exp(1j * kap * s)
    # the Nyquist coefficient represents a pure cosine; rotate it as such
    shifted[-1] = spec[-1] * math.cos(kap[-1] * s)
    return PeriodicField(u.grid, np.fft.irfft(shifted, u.grid.n))


def _orbit_distance(u: PeriodicField, phi: PeriodicField,
                    shift_tol_rel: float = 1e-10) -> tuple[float, float]:
    """min over y of ||u - phi(. + y)||_H1 and the minimizing shift.

    Coarse stage: the H^1 cross-correlation against all n grid shifts in
    one FFT.  Fine stage: golden-section refinement of the exact
    objective around the best coarse shift, to |dy| < shift_tol_rel * L.
    """
    u._check_same_grid(phi)
    n, big_l = u.grid.n, u.grid.L
    kap = 2.0 * math.pi * np.fft.fftfreq(n, d=1.0 / n) / big_l
    weight = 1.0 + kap * kap
    weight[n // 2] = 1.0  # derivatives zero the Nyquist mode; match inner_h1
    u_hat = np.fft.fft(u.values)
    p_hat = np.fft.fft(phi.values)
    # <u, phi(.+y_j)>_H1 for every grid shift y_j = j L / n in one pass.
    cross = np.fft.fft(weight * u_hat * np.conj(p_hat)).real * (big_l / n**2)
    norm_u2 = inner_h1(u, u)
    norm_p2 = inner_h1(phi, phi)

    def objective(y: float) -> float:
        diff = u - fractional_shift(phi, y)
        return inner_h1(diff, diff)

    j_best = int(np.argmax(cross))
    y0 = j_best * big_l / n
    lo, hi = y0 - big_l / n, y0 + big_l / n
    tol = shift_tol_rel * big_l
    # Golden-section minimization of the exact objective.
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = objective(x1), objective(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = objective(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = objective(x2)
    y_star = 0.5 * (lo + hi)
    val_star = objective(y_star)
    val_grid = norm_u2 + norm_p2 - 2.0 * float(cross[j_best])
    if val_grid < val_star:
        val_star, y_star = val_grid, y0
    return math.sqrt(max(val_star, 0.0)), y_star % big_l


def semidistance(u: PeriodicField, p: WaveParams) -> tuple[float, float]:
    """Orbital semi-distance rho(u, phi) = inf_y ||u - phi(. + y)||_H1.

    Returns (rho, argmin shift).  The grid period must match the wave's.
    """
    phi = sample_wave(p, u.grid)
    return _orbit_distance(u, phi)
