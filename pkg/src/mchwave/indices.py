"""Stability indices: the Vakhitov-Kolokolov-type index I, the Morse
count identities on the zero-mean subspace, the zero-mean period branch,
d''(c) along it, and the Hamiltonian Krein index.

The index

    I = dA/dk * dV/dk - dc/dk * dF/dk        (at fixed period L)

uses dV/dk = L * da/dk (the profile mean is a, so V(phi) = a L) and a
finite-difference dF/dk of the momentum of the sampled profile.  All
k-derivatives share the machinery of :func:`mchwave.wave.fd_dk`, so the
components are mutually consistent and carry one step-halving gate.

The sign condition I < 0 is checked as a reproducible assertion over
sampled (k, L) grids; no claim is made beyond the sampled windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import wave as wave_mod
from .errors import DomainError, NumericalError
from .field import PeriodicGrid, PeriodicField, functionals
from .linop import assemble_l, inv_one_pairing, restricted_spectrum, spectrum
from .wave import WaveParams, default_fd_step, fd_dk, profile, validity, wave_params

Classification = Literal["stable", "unstable", "indeterminate"]

# |pairing| or |D| below this is treated as "needs to be non-zero" failing.
SIGN_FLOOR = 1e-10


@dataclass(frozen=True)
class IndexSample:
    """One evaluation of the stability index with its audit components."""

    k: float
    L: float
    I: float
    valid: bool
    dA_dk: float
    dc_dk: float
    dV_dk: float
    dF_dk: float


@dataclass(frozen=True)
class ScanSummary:
    min_I: float
    max_I: float
    count_positive: int
    count_invalid: int


@dataclass(frozen=True)
class MorseReport:
    """Both sides of the zero-mean Morse identities, computed independently."""

    n_L: int
    z_L: int
    pairing: float
    n_Y0_direct: int
    z_Y0_direct: int
    n_Y0_predicted: int
    z_Y0_predicted: int

    @property
    def n_identity_holds(self) -> bool:
        return self.n_Y0_direct == self.n_Y0_predicted

    @property
    def z_identity_holds(self) -> bool:
        return self.z_Y0_direct == self.z_Y0_predicted


@dataclass(frozen=True)
class DSecondReport:
    """d'(c) and d''(c) along the zero-mean branch at one modulus."""

    k: float
    L_star: float
    c: float
    dc_dk: float
    d_prime: float          # F(phi), the chain-rule value of d'(c)
    d_prime_fd: float       # direct FD of d(c), cross-check
    d_second: float         # dF/dk / dc/dk
    d_second_fd: float      # double FD of d(c), cross-check


@dataclass(frozen=True)
class KreinReport:
    """Counts, pairing, D and the Hamiltonian Krein index classification.

    All numeric fields are NaN (and counts -1) when the zero-mean branch
    does not exist in the bracket, in which case the classification is
    ``indeterminate``.
    """

    n_L: int
    n_L_Y0: int
    z_L: int
    z_L_Y0: int
    pairing: float
    D: float
    K_Ham: int
    classification: Classification
    L_star: float = math.nan


def _sign_count(x: float, floor: float = SIGN_FLOOR) -> tuple[int, int]:
    """(n, z) of a scalar: one negative eigenvalue, or one zero within floor."""
    if abs(x) <= floor:
        return 0, 1
    return (1, 0) if x < 0.0 else (0, 0)


def classify(n_y0: int, pairing: float, big_d: float) -> Classification:
    """Krein classification from n(L|Y0), the pairing, and D = -d''(c).

    K_Ham = n(L|Y0) - n(D); unstable at 1, stable at 0, indeterminate
    when the pairing or D sits at zero or the counts fall outside {0, 1}.
    """
    n_d, z_d = _sign_count(big_d)
    k_ham = n_y0 - n_d
    if abs(pairing) <= SIGN_FLOOR or z_d == 1:
        return "indeterminate"
    if k_ham == 1:
        return "unstable"
    if k_ham == 0:
        return "stable"
    return "indeterminate"


def stability_index(k: float, L: float, h: float | None = None,
                    n_quad: int = 256) -> IndexSample:
    """Evaluate I = dA/dk dV/dk - dc/dk dF/dk at fixed period.

    One finite-difference pass produces (a, b, c, A, F) together, so all
    four components share the same stencil and consistency gate.

    Raises:
        DomainError: if the FD stencil leaves the valid (k, L) domain.
        AccuracyError: if the step-halving gate fails.
    """
    if h is None:
        h = default_fd_step(k)
    if h <= 0.0 or k - h <= 0.0 or k + h >= 1.0:
        raise DomainError(f"FD stencil leaves (0, 1) for k={k}, h={h}")
    grid = PeriodicGrid(L, n_quad)

    def f(kk: float) -> np.ndarray:
        p = wave_params(kk, L)
        phi = PeriodicField(grid, np.asarray(profile(p, grid.nodes)[0]))
        _, f_mom, _ = functionals(phi)
        return np.array([p.a, p.c, p.A, f_mom])

    d = fd_dk(f, k, h)
    da_dk, dc_dk, dA_dk, dF_dk = (float(v) for v in d)
    dV_dk = L * da_dk
    idx = dA_dk * dV_dk - dc_dk * dF_dk
    ok = validity(k, L, n=n_quad).all_ok
    return IndexSample(k=k, L=L, I=idx, valid=ok, dA_dk=dA_dk, dc_dk=dc_dk,
                       dV_dk=dV_dk, dF_dk=dF_dk)


def index_scan(k_min: float, k_max: float, L_min: float, L_max: float,
               nk: int, nL: int, h: float | None = None,
               n_quad: int = 256) -> tuple[list[IndexSample], ScanSummary]:
    """Evaluate the index on an nk x nL grid, flagging invalid cells.

    Cells failing validity (or whose FD stencil leaves the domain) are
    kept in the table with I = NaN and valid = False.  Ordering is by
    (k, L), deterministic regardless of evaluation order.
    """
    if not (0.0 < k_min <= k_max < 1.0) or not (0.0 < L_min <= L_max):
        raise DomainError("scan ranges must satisfy 0 < k_min <= k_max < 1, 0 < L_min <= L_max")
    ks = np.linspace(k_min, k_max, nk) if nk > 1 else np.array([k_min])
    Ls = np.linspace(L_min, L_max, nL) if nL > 1 else np.array([L_min])
    samples: list[IndexSample] = []
    for k in ks:
        for L in Ls:
            if not validity(float(k), float(L), n=n_quad).all_ok:
                samples.append(IndexSample(float(k), float(L), math.nan, False,
                                           math.nan, math.nan, math.nan, math.nan))
                continue
            try:
                samples.append(stability_index(float(k), float(L), h=h, n_quad=n_quad))
            except (DomainError, NumericalError):
                samples.append(IndexSample(float(k), float(L), math.nan, False,
                                           math.nan, math.nan, math.nan, math.nan))
    vals = np.array([s.I for s in samples if s.valid])
    summary = ScanSummary(
        min_I=float(np.min(vals)) if vals.size else math.nan,
        max_I=float(np.max(vals)) if vals.size else math.nan,
        count_positive=int(np.sum(vals > 0.0)) if vals.size else 0,
        count_invalid=sum(1 for s in samples if not s.valid),
    )
    return samples, summary


def _operator_for(p: WaveParams, n: int):
    grid = PeriodicGrid(p.L, n)
    phi, _, phi2 = profile(p, grid.nodes)
    return assemble_l(PeriodicField(grid, phi), PeriodicField(grid, phi2), p.c)


def morse_check(k: float, L: float, n: int = 256, tol: float | None = None,
                allow_multi_kernel: bool = False) -> MorseReport:
    """Check the zero-mean Morse identities by two independent routes.

    Left sides come from the spectrum of the operator compressed to Y0;
    right sides from the unrestricted counts plus the sign of the
    pairing <L^{-1} 1, 1>.  The identities assume a simple kernel; a
    double kernel (the constant-wave degeneracy) needs
    ``allow_multi_kernel`` for the deflated pairing solve.

    When no tolerance is supplied, one is placed inside the spectral gap
    around the presumed kernel: small-amplitude waves carry a genuine
    tiny eigenvalue beside zero that a radius-proportional default would
    misclassify.

    Raises:
        RankError: propagated when the kernel is not simple and the
            override is not set.
    """
    p = constant_or_wave(k, L)
    op = _operator_for(p, n)
    if tol is None:
        from .linop import kernel_gap_tol
        vals = np.linalg.eigvalsh(op.matrix)
        tol = kernel_gap_tol(vals, kernel_dim=2 if allow_multi_kernel else 1)
    full = spectrum(op, tol=tol)
    pair = inv_one_pairing(op, tol=tol, allow_multi_kernel=allow_multi_kernel)
    restr = restricted_spectrum(op, tol=tol)
    n_pair, z_pair = _sign_count(pair.value)
    return MorseReport(
        n_L=full.n_neg, z_L=full.z_dim, pairing=pair.value,
        n_Y0_direct=restr.n_neg, z_Y0_direct=restr.z_dim,
        n_Y0_predicted=full.n_neg - n_pair - z_pair,
        z_Y0_predicted=full.z_dim + z_pair,
    )


def constant_or_wave(k: float, L: float) -> WaveParams:
    """Wave at (k, L), admitting the k = 0 constant-wave limit."""
    if k == 0.0:
        return wave_mod.constant_wave(L)
    return wave_params(k, L)


def zero_mean_period(k: float, L_bracket: tuple[float, float],
                     a_tol: float = 1e-10) -> float | None:
    """Period L* with a(k, L*) = 0, by bisection; None when no sign change.

    Branch absence is an expected finding (the mean level a is negative
    throughout the small-k region), so a missing root is reported, not
    raised.

    Raises:
        DomainError: if either bracket endpoint leaves the wave-existence
            domain (discriminant <= 0).
    """
    lo, hi = float(L_bracket[0]), float(L_bracket[1])
    if not (0.0 < lo < hi):
        raise DomainError(f"bad bracket {L_bracket}")
    try:
        a_lo = wave_params(k, lo).a
        a_hi = wave_params(k, hi).a
    except DomainError as exc:
        raise DomainError(f"bracket endpoint leaves the valid domain: {exc}") from exc
    if a_lo == 0.0:
        return lo
    if a_hi == 0.0:
        return hi
    if a_lo * a_hi > 0.0:
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        a_mid = wave_params(k, mid).a
        if abs(a_mid) < a_tol:
            return mid
        if a_lo * a_mid < 0.0:
            hi = mid
        else:
            lo, a_lo = mid, a_mid
    raise NumericalError(f"zero-mean bisection failed to reach |a| < {a_tol}")


def _branch_state(k: float, L_bracket: tuple[float, float],
                  n_quad: int) -> tuple[float, float, float, float] | None:
    """(L*, c, F, d) on the zero-mean branch at modulus k, or None."""
    l_star = zero_mean_period(k, L_bracket)
    if l_star is None:
        return None
    p = wave_params(k, l_star)
    grid = PeriodicGrid(p.L, n_quad)
    phi = PeriodicField(grid, np.asarray(profile(p, grid.nodes)[0]))
    e, f, _ = functionals(phi)
    return l_star, p.c, f, e + p.c * f


def d_second(k: float, L_bracket: tuple[float, float], h: float | None = None,
             n_quad: int = 256) -> DSecondReport | None:
    """d'(c) and d''(c) along the zero-mean branch, or None without a branch.

    d'(c) = F(phi) by the chain rule through the critical-point identity;
    d''(c) = (dF/dk) / (dc/dk).  Both are cross-checked by direct central
    differences of d(c) = E + c F along the branch.

    Raises:
        DomainError: no branch in the widened FD bracket, or stencil issues.
        NumericalError: |dc/dk| below 1e-10 (singular parametrization).
    """
    state = _branch_state(k, L_bracket, n_quad)
    if state is None:
        return None
    l_star, c0, f0, _ = state
    if h is None:
        h = default_fd_step(k)

    def branch(kk: float) -> np.ndarray:
        # Re-center the bracket on the current root so the stencil stays bracketed.
        width = 0.25 * (L_bracket[1] - L_bracket[0])
        st = _branch_state(kk, (max(l_star - width, 0.5 * l_star), l_star + width), n_quad)
        if st is None:
            raise DomainError(f"zero-mean branch lost at k={kk}")
        return np.array([st[1], st[2], st[3]])  # c, F, d

    d = fd_dk(branch, k, h)
    dc_dk, df_dk, dd_dk = (float(v) for v in d)
    if abs(dc_dk) < 1e-10:
        raise NumericalError(f"singular parametrization: |dc/dk| = {abs(dc_dk)} < 1e-10")
    d_prime_fd = dd_dk / dc_dk
    d2 = df_dk / dc_dk

    # Independent double-FD of d(c): d'(c) at k +- h via nested stencils.
    def d_prime_at(kk: float) -> float:
        vals = fd_dk(branch, kk, 0.5 * h)
        return float(vals[2] / vals[0])

    dp_hi = d_prime_at(k + h)
    dp_lo = d_prime_at(k - h)
    d2_fd = (dp_hi - dp_lo) / (2.0 * h) / dc_dk
    return DSecondReport(k=k, L_star=l_star, c=c0, dc_dk=dc_dk,
                         d_prime=f0, d_prime_fd=d_prime_fd,
                         d_second=d2, d_second_fd=d2_fd)


def krein_index(k: float, L_bracket: tuple[float, float], n: int = 256,
                h: float | None = None, tol: float | None = None) -> KreinReport:
    """Hamiltonian Krein index on the zero-mean branch.

    K_Ham = n(L|Y0) - n(D) with D = -d''(c); the wave is classified
    unstable when K_Ham = 1 and stable when K_Ham = 0.  Classification is
    ``indeterminate`` when the branch is absent, the parametrization is
    singular, the pairing or D is too close to zero, or the counts fall
    outside the formula's reach.  Genuine bracket errors propagate.
    """
    no_branch = KreinReport(n_L=-1, n_L_Y0=-1, z_L=-1, z_L_Y0=-1,
                            pairing=math.nan, D=math.nan, K_Ham=-1,
                            classification="indeterminate")
    if zero_mean_period(k, L_bracket) is None:
        return no_branch
    try:
        report = d_second(k, L_bracket, h=h, n_quad=n)
    except (DomainError, NumericalError):
        # branch lost inside the FD stencil, or dc/dk at zero
        report = None
    if report is None:
        return no_branch
    p = wave_params(k, report.L_star)
    op = _operator_for(p, n)
    full = spectrum(op, tol=tol)
    restr = restricted_spectrum(op, tol=tol)
    pair = inv_one_pairing(op, tol=tol)
    big_d = -report.d_second
    n_d, _ = _sign_count(big_d)
    k_ham = restr.n_neg - n_d
    cls = classify(restr.n_neg, pair.value, big_d)
    return KreinReport(n_L=full.n_neg, n_L_Y0=restr.n_neg, z_L=full.z_dim,
                       z_L_Y0=restr.z_dim, pairing=pair.value, D=big_d,
                       K_Ham=k_ham, classification=cls, L_star=report.L_star)
