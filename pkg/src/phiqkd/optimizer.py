"""Tilt-angle optimization and overlap-angle sweeps against the B92 baseline."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import keyrate
from .gsd import SignalPair, make_signal_pair
from .keyrate import DEFAULTS, FiniteKeyParams, KeyRateReport
from .numerics import bisect, golden_section_max

GRID_POINTS = 2048
PHI_XTOL = 1e-7
IMPROVEMENT_MIN_B92 = 0.001


class Mode(str, Enum):
    ASYMPTOTIC = "asymptotic"
    FINITE = "finite"
    COMPOSABLE = "composable"


@dataclass(frozen=True)
class OptimumResult:
    mode: Mode
    theta: float
    phi_opt: float
    rate: float
    report: KeyRateReport


@dataclass(frozen=True)
class ThetaSweepRow:
    theta: float
    phi_opt: float
    r_phiqkd: float
    r_b92: float
    difference: float
    improvement: float | None
    phi_bound: float | None
    coverage: float | None
    feasible: bool  # both protocols keep bits after the test sample


def rate_function(
    sp: SignalPair, mode: Mode | str, fk: FiniteKeyParams = DEFAULTS, masked: bool = True
):
    """Vectorized ``phi -> rate`` for ``mode``.

    With ``masked``, finite-size modes return ``-inf`` where the sifted bits
    cannot cover the test sample, so such tilts are never chosen when a
    usable one exists.
    """
    mode = Mode(mode)
    q_bits = keyrate.preparation_quality(sp)
    theta = sp.theta
    if mode is Mode.ASYMPTOTIC:
        return lambda phi: keyrate.asymptotic_kernel(theta, phi, q_bits)
    kernel = keyrate.finite_kernel if mode is Mode.FINITE else keyrate.secure_kernel

    def f(phi):
        r = kernel(theta, phi, q_bits, fk)
        if not masked:
            return r
        return np.where(keyrate.sample_feasible(theta, phi, fk), r, -np.inf)

    return f


def _raw_rate(sp, mode, phi, fk):
    if mode is Mode.ASYMPTOTIC:
        return keyrate.asymptotic_rate(sp, phi)
    if mode is Mode.FINITE:
        return keyrate.finite_rate(sp, phi, fk)
    return keyrate.secure_rate(sp, phi, fk)


def optimize_phi(
    sp: SignalPair, mode: Mode | str, fk: FiniteKeyParams = DEFAULTS
) -> OptimumResult:
    """Global maximizer of the mode's rate over ``[0, phi_med]``.

    A uniform scan picks the best grid point; golden-section search then
    refines inside the two neighbouring grid cells.
    """
    mode = Mode(mode)
    top = sp.phi_med
    f = rate_function(sp, mode, fk)
    if top <= 0.0:
        phi_opt = 0.0
    else:
        grid = np.linspace(0.0, top, GRID_POINTS)
        vals = f(grid)
        if not np.any(np.isfinite(vals)):
            # no tilt keeps a usable sample; fall back to the raw expression
            f = rate_function(sp, mode, fk, masked=False)
            vals = f(grid)
        i = int(np.argmax(vals))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, GRID_POINTS - 1)]
        phi_opt, best = golden_section_max(lambda x: float(f(x)), lo, hi, xtol=PHI_XTOL)
        if vals[i] > best:
            phi_opt = float(grid[i])
    phi_opt = float(min(max(phi_opt, 0.0), top))
    rate = _raw_rate(sp, mode, phi_opt, fk)
    return OptimumResult(mode, sp.theta, phi_opt, rate, keyrate.key_rate_report(sp, phi_opt, fk))


def _bound_analysis(sp: SignalPair, fk: FiniteKeyParams, opt: OptimumResult | None = None):
    """Return ``(phi_bound, coverage)``; either may be ``None`` when undefined."""
    top = sp.phi_med
    if top <= 0.0:
        return None, 100.0
    b92_eta = 1.0 - math.cos(sp.theta)
    if b92_eta * fk.N <= fk.n:
        return None, None
    b92 = keyrate.b92_secure_rate(sp, fk)
    if opt is None:
        opt = optimize_phi(sp, Mode.COMPOSABLE, fk)

    def diff(phi):
        return keyrate.secure_rate(sp, phi, fk) - b92

    if diff(opt.phi_opt) <= 0.0:
        return None, 0.0
    grid = np.linspace(opt.phi_opt, top, GRID_POINTS)
    d = keyrate.secure_kernel(sp.theta, grid, keyrate.preparation_quality(sp), fk) - b92
    below = np.nonzero(d < 0.0)[0]
    if below.size == 0:
        return None, 100.0
    j = int(below[0])
    phi_b = bisect(diff, float(grid[j - 1]), float(grid[j]), xtol=1e-14, ftol=1e-12)
    return phi_b, 100.0 * phi_b / top


def phi_bound(sp: SignalPair, fk: FiniteKeyParams = DEFAULTS) -> float | None:
    """Tilt past the optimum where the composable rate falls back to the B92 rate."""
    return _bound_analysis(sp, fk)[0]


def coverage(sp: SignalPair, fk: FiniteKeyParams = DEFAULTS) -> float | None:
    """Percentage of the tilt domain on which the composable rate beats B92.

    100 when the rate never falls back within the domain, 0 when it never
    exceeds B92, ``None`` when B92 itself has no usable sample.
    """
    return _bound_analysis(sp, fk)[1]


def sweep_row(theta: float, fk: FiniteKeyParams = DEFAULTS) -> ThetaSweepRow:
    sp = make_signal_pair(theta)
    opt = optimize_phi(sp, Mode.COMPOSABLE, fk)
    r_b92 = keyrate.b92_secure_rate(sp, fk)
    feasible = (1.0 - math.cos(sp.theta)) * fk.N > fk.n
    diff = opt.rate - r_b92
    improvement = 100.0 * diff / r_b92 if feasible and r_b92 >= IMPROVEMENT_MIN_B92 else None
    bound, cov = _bound_analysis(sp, fk, opt)
    return ThetaSweepRow(sp.theta, opt.phi_opt, opt.rate, r_b92, diff, improvement, bound, cov, feasible)


def default_theta_grid(points: int = 600) -> np.ndarray:
    return np.linspace(0.01, math.pi / 2, points)


def theta_sweep(grid, fk: FiniteKeyParams = DEFAULTS, workers: int | None = None) -> list[ThetaSweepRow]:
    """One row per overlap angle, in input order regardless of ``workers``."""
    grid = [float(t) for t in grid]
    if workers is None or workers <= 1:
        return [sweep_row(t, fk) for t in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: sweep_row(t, fk), grid))


@dataclass(frozen=True)
class SweepLandmarks:
    saturation_theta: float | None
    max_difference: float
    max_difference_theta: float
    improvement_peak: float | None
    improvement_peak_theta: float | None
    max_phi_opt: float
    max_phi_opt_theta: float


def landmarks(rows: list[ThetaSweepRow]) -> SweepLandmarks:
    """Summary points of a sweep.

    * saturation: first overlap angle from which coverage stays at 100%.
    * max difference: over rows where both protocols keep a usable sample.
    * improvement peak: highest filtered improvement beyond the first local
      minimum of the improvement curve; before it both rates are tiny and the
      ratio is dominated by the B92 denominator.
    * max phi_opt: over rows with a positive composable rate.
    """
    thetas = np.array([r.theta for r in rows])
    cov = [r.coverage for r in rows]
    saturation = None
    for i in range(len(rows) - 1, -1, -1):
        if cov[i] is None or cov[i] < 100.0:
            break
        saturation = float(thetas[i])

    feas = [r for r in rows if r.feasible]
    top = max(feas, key=lambda r: r.difference)

    imp = [(r.theta, r.improvement) for r in rows if r.improvement is not None]
    peak = peak_theta = None
    if imp:
        k = 0
        while k + 1 < len(imp) and imp[k + 1][1] <= imp[k][1]:
            k += 1
        upper = imp[k:]
        peak_theta, peak = max(upper, key=lambda x: x[1])

    pos = [r for r in rows if r.r_phiqkd > 0 and r.feasible] or rows
    widest = max(pos, key=lambda r: r.phi_opt)
    return SweepLandmarks(
        saturation, top.difference, top.theta, peak, peak_theta, widest.phi_opt, widest.theta
    )
