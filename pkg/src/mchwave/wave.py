"""Explicit periodic traveling waves and their parameter maps.

A wave is the dnoidal profile

    phi(x) = a + b * (dn^2(2 K(k) x / L; k) - E(k)/K(k)),

traveling at speed c and solving

    (phi - c) phi'' + phi'^2 / 2 - phi^3 + c phi = A.

Given the modulus k and period L, the coefficients (a, b, c) come from
closed forms in K(k) and E(k); they exist only where the discriminant

    Delta(k, L) = 9 L^4 - 2048 K(k)^4 (1 - k^2 + k^4)

is positive ("period large enough").  The integration constant A is
evaluated from the wave equation itself at x = 0, where the profile sits
at its minimum and phi' vanishes; a published long closed form for A is
kept only as a cross-check because it is easy to mistype.

All k-derivatives go through one central-difference machinery with a
Richardson extrapolation level and a step-halving consistency gate.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .elliptic import complete_k_e, jacobi
from .errors import AccuracyError, DomainError

logger = logging.getLogger(__name__)

# Agreement target between the two independent computations of A.
A_CROSSCHECK_TOL = 1e-8


@dataclass(frozen=True)
class WaveParams:
    """One exact periodic wave: modulus, period, and ODE coefficients.

    ``a`` is the mean of the profile over a period, ``b < 0`` the dnoidal
    amplitude, ``0 < c < 3/2`` the speed, ``A`` the integration constant.
    """

    k: float
    L: float
    a: float
    b: float
    c: float
    A: float


@dataclass(frozen=True)
class SnoidalParams:
    """Offset and amplitude of the equivalent sn^2 form of a wave."""

    alpha: float
    beta: float


@dataclass(frozen=True)
class ValidityReport:
    """Signed margins of the three conditions a wave must satisfy.

    ``ineq_i_value`` is c^2 - 3c + 32 pi^4 / L^4 (must be < 0) and
    ``ineq_ii_margin`` is max(phi - c) over the period (must be < 0).
    When the discriminant fails the other two margins are NaN.
    """

    discriminant_ok: bool
    ineq_i_value: float
    ineq_ii_margin: float
    all_ok: bool


@dataclass(frozen=True)
class ParamDerivatives:
    """k-derivatives of (a, b, c, A) at fixed period, with the FD step used."""

    da_dk: float
    db_dk: float
    dc_dk: float
    dA_dk: float
    step: float


def discriminant(k: float, L: float) -> float:
    """Delta(k, L) = 9 L^4 - 2048 K(k)^4 (1 - k^2 + k^4)."""
    big_k, _ = complete_k_e(k)
    return 9.0 * L**4 - 2048.0 * big_k**4 * (1.0 - k * k + k**4)


def _params_from_k_l(k: float, L: float) -> tuple[float, float, float, float, float]:
    """(a, b, c, K, E) by direct evaluation of the closed forms."""
    big_k, big_e = complete_k_e(k)
    delta = 9.0 * L**4 - 2048.0 * big_k**4 * (1.0 - k * k + k**4)
    if delta <= 0.0:
        raise DomainError(
            f"period too small for this modulus: Delta(k={k}, L={L}) = {delta} <= 0"
        )
    root = math.sqrt(delta)
    b = -32.0 * big_k**2 / (L * L)
    c = (1.5 * L * L - 0.5 * root) / (L * L)
    a = -(
        -32.0 * (2.0 - k * k) * big_k**2
        + 96.0 * big_e * big_k
        + 1.5 * L * L
        - 0.5 * root
    ) / (3.0 * L * L)
    return a, b, c, big_k, big_e


def _a_from_ode(a: float, b: float, c: float, k: float, big_k: float,
                big_e: float, L: float) -> float:
    """Integration constant from the wave ODE evaluated at x = 0.

    At the origin sn = 0, cn = dn = 1, so phi' = 0 there and
    A = (phi(0) - c) phi''(0) - phi(0)^3 + c phi(0).
    """
    omega = 2.0 * big_k / L
    phi0 = a + b * (1.0 - big_e / big_k)
    phi2_0 = -2.0 * k * k * b * omega * omega
    return (phi0 - c) * phi2_0 - phi0**3 + c * phi0


def integration_constant_closed_form(k: float, L: float) -> float:
    """The published long closed form for A; cross-check only."""
    big_k, _ = complete_k_e(k)
    k2 = k * k
    delta = 2048.0 * (-1.0 + k2 - k2 * k2) * big_k**4 + 9.0 * L**4
    if delta <= 0.0:
        raise DomainError(f"Delta(k={k}, L={L}) = {delta} <= 0")
    root = math.sqrt(delta)
    k4, k6 = k2 * k2, k2 * k2 * k2
    term1 = (1280.0 * (-1.0 + k2 - k4) * big_k**4 + 9.0 * L**4) * root
    term2 = (-16384.0 - 16384.0 * k6 + 24576.0 * k2 + 24576.0 * k4) * big_k**6
    term3 = 6912.0 * L * L * (1.0 - k2 + k4) * big_k**4
    return (term1 + term2 + term3 - 27.0 * L**6) / (27.0 * L**6)


def wave_params(k: float, L: float) -> WaveParams:
    """Construct the wave at modulus k and period L.

    Requires 0 < k < 1 and Delta(k, L) > 0.  A comes from the wave ODE at
    x = 0; any disagreement beyond 1e-8 with the long closed form is
    logged (a warning, not a failure).
    """
    if not (0.0 < k < 1.0):
        raise DomainError(f"wave_params requires 0 < k < 1, got k={k}")
    if not (L > 0.0) or not math.isfinite(L):
        raise DomainError(f"wave_params requires L > 0, got L={L}")
    a, b, c, big_k, big_e = _params_from_k_l(k, L)
    a_ode = _a_from_ode(a, b, c, k, big_k, big_e, L)
    a_closed = integration_constant_closed_form(k, L)
    if abs(a_ode - a_closed) > A_CROSSCHECK_TOL * max(1.0, abs(a_ode)):
        logger.warning(
            "integration-constant cross-check disagrees at (k=%g, L=%g): "
            "ode=%.17g closed_form=%.17g", k, L, a_ode, a_closed,
        )
    return WaveParams(k=k, L=L, a=a, b=b, c=c, A=a_ode)


def constant_wave(L: float) -> WaveParams:
    """The k -> 0 degenerate wave: a constant profile phi = a.

    Exposed for testing; k = 0 itself lies outside the open modulus
    interval of :func:`wave_params`.  Exists for L > (128/9)^(1/4) pi.
    """
    if not (L > 0.0):
        raise DomainError(f"constant_wave requires L > 0, got L={L}")
    delta = 9.0 * L**4 - 128.0 * math.pi**4
    if delta <= 0.0:
        raise DomainError(f"period too small for the constant wave: Delta = {delta} <= 0")
    root = math.sqrt(delta)
    b = -8.0 * math.pi**2 / (L * L)
    c = (1.5 * L * L - 0.5 * root) / (L * L)
    a = -(8.0 * math.pi**2 + 1.5 * L * L - 0.5 * root) / (3.0 * L * L)
    return WaveParams(k=0.0, L=L, a=a, b=b, c=c, A=-a**3 + c * a)


def profile(p: WaveParams, x):
    """Profile phi and its first two x-derivatives at x (scalar or array).

    Derivatives are analytic, via (dn^2)' = -2 k^2 sn cn dn and the chain
    rule with theta = 2 K x / L.
    """
    big_k, big_e = complete_k_e(p.k)
    omega = 2.0 * big_k / p.L
    x_arr = np.asarray(x, dtype=float)
    sn, cn, dn = jacobi(omega * x_arr, p.k)
    k2 = p.k * p.k
    phi = p.a + p.b * (dn * dn - big_e / big_k)
    phi1 = -2.0 * k2 * p.b * omega * (sn * cn * dn)
    phi2 = -2.0 * k2 * p.b * omega * omega * (
        (cn * dn) ** 2 - (sn * dn) ** 2 - k2 * (sn * cn) ** 2
    )
    if x_arr.ndim == 0:
        return float(phi), float(phi1), float(phi2)
    return phi, phi1, phi2


def snoidal_form(p: WaveParams) -> SnoidalParams:
    """Coefficients (alpha, beta) with phi = alpha + beta sn^2(2Kx/L; k).

    Follows from dn^2 = 1 - k^2 sn^2: alpha = a + b (1 - E/K) and
    beta = -b k^2 >= 0.
    """
    big_k, big_e = complete_k_e(p.k)
    return SnoidalParams(
        alpha=p.a + p.b * (1.0 - big_e / big_k),
        beta=-p.b * p.k * p.k,
    )


def ode_residual(p: WaveParams, n: int = 512) -> float:
    """Max residual of the wave ODE over n uniform samples of one period."""
    if n < 16:
        raise DomainError(f"ode_residual requires n >= 16, got {n}")
    x = np.arange(n) * (p.L / n)
    phi, phi1, phi2 = profile(p, x)
    res = (phi - p.c) * phi2 + 0.5 * phi1 * phi1 - phi**3 + p.c * phi - p.A
    return float(np.max(np.abs(res)))


def validity(k: float, L: float, n: int = 256) -> ValidityReport:
    """Diagnose whether (k, L) admits a valid wave; never raises.

    Reports the discriminant sign, the value of c^2 - 3c + 32 pi^4 / L^4,
    and max(phi - c) over n samples.  All three must be strictly negative
    margins for ``all_ok``.
    """
    try:
        if 0.0 < k < 1.0:
            p = wave_params(k, L)
        elif k == 0.0:
            p = constant_wave(L)
        else:
            return ValidityReport(False, math.nan, math.nan, False)
    except DomainError:
        return ValidityReport(False, math.nan, math.nan, False)
    ineq_i = p.c * p.c - 3.0 * p.c + 32.0 * math.pi**4 / L**4
    x = np.arange(max(int(n), 16)) * (L / max(int(n), 16))
    phi = profile(p, x)[0]
    ineq_ii = float(np.max(phi - p.c))
    all_ok = bool(ineq_i < 0.0 and ineq_ii < 0.0)
    return ValidityReport(True, ineq_i, ineq_ii, all_ok)


def fd_dk(f: Callable[[float], np.ndarray], k: float, h: float,
          rel_tol: float = 0.01, abs_floor: float = 1e-9) -> np.ndarray:
    """d f / dk by central differences with one Richardson level.

    Evaluates f at k +- h, k +- h/2, k +- h/4 and forms the Richardson
    values R(h) and R(h/2); the two must agree componentwise to
    ``rel_tol`` (components below ``abs_floor`` are exempt, so limits
    where a derivative vanishes do not trip the gate).

    Raises:
        AccuracyError: if the step-halving consistency gate fails.
        DomainError: propagated when the stencil leaves the valid domain.
    """
    evals = {}
    for step in (h, 0.5 * h, 0.25 * h):
        for sgn in (1.0, -1.0):
            evals[sgn * step] = np.asarray(f(k + sgn * step), dtype=float)

    def central(step: float) -> np.ndarray:
        return (evals[step] - evals[-step]) / (2.0 * step)

    def richardson(step: float) -> np.ndarray:
        return (4.0 * central(0.5 * step) - central(step)) / 3.0

    r_coarse = richardson(h)
    r_fine = richardson(0.5 * h)
    scale = np.maximum(np.abs(r_coarse), np.abs(r_fine))
    bad = (scale > abs_floor) & (np.abs(r_coarse - r_fine) > rel_tol * scale)
    if np.any(bad):
        raise AccuracyError(
            f"finite-difference consistency gate failed at k={k} (h={h}): "
            f"R(h)={r_coarse!r} vs R(h/2)={r_fine!r}"
        )
    return r_fine


def default_fd_step(k: float) -> float:
    """Step keeping the stencil inside (0, 1) and the roundoff benign."""
    return min(1e-3, 0.25 * k, 0.25 * (1.0 - k))


def params_dk(k: float, L: float, h: float | None = None) -> ParamDerivatives:
    """k-derivatives of (a, b, c, A) at fixed L.

    Central differences with one Richardson extrapolation level; the
    reported values must move by less than 1% under h -> h/2.

    Raises:
        DomainError: if the stencil leaves the valid (k, L) domain.
        AccuracyError: if the consistency gate fails.
    """
    if h is None:
        h = default_fd_step(k)
    if h <= 0.0 or k - h <= 0.0 or k + h >= 1.0:
        raise DomainError(f"FD stencil [k-h, k+h] leaves (0, 1) for k={k}, h={h}")

    def f(kk: float) -> np.ndarray:
        p = wave_params(kk, L)
        return np.array([p.a, p.b, p.c, p.A])

    d = fd_dk(f, k, h)
    return ParamDerivatives(
        da_dk=float(d[0]), db_dk=float(d[1]), dc_dk=float(d[2]),
        dA_dk=float(d[3]), step=h,
    )
