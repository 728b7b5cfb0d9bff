"""Evolution equations ``D u + lam u = f`` and their Green's functions.

Green's functions are obtained by inverting ``1/(Psi(i xi) + lam)`` on the
rectified line.  Before inversion the delta part (when ``Psi`` stays bounded)
and a unit-jump part (when ``Ghat ~ g1/(i xi)``) are split off analytically;
what remains is inverted under a smooth exponential band filter, which keeps
the slowly decaying spectra of fractional symbols from ringing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.signal import fftconvolve

from .errors import ConvergenceError, EdgeDecayWarning, IllPosedError
from .kernels import Regime, SoninePair
from .structure import Domain, SampledSignal, StructurePair, uniform_grid, unwarp_signal, warp_signal
from .wft import FrequencyGrid, forward_wft, inverse_wft, uniform_dft, weighted_inner_product

ELLIPTICITY_THRESHOLD = 1e-6
# largest band used when inverting slowly decaying Green spectra
MAX_GREEN_BAND = 1.0e4
_FILTER_ORDER = 8
_FILTER_STRENGTH = 36.0


def _is_bessel(pair: SoninePair) -> bool:
    return pair.name.endswith("bessel-klein-gordon")


@dataclass
class EvolutionProblem:
    """``D u + lam u = f`` for a Sonine pair under a structure pair."""

    pair: SoninePair
    structure: StructurePair
    lam: float
    source: SampledSignal
    freq: FrequencyGrid = field(default_factory=FrequencyGrid.symmetric)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if _is_bessel(self.pair) and abs(self.lam - 1.0) < 1e-12:
            raise IllPosedError(
                "lambda = 1 is resonant for the Bessel kernel: e^{i gamma/xi} + 1 vanishes "
                "at real xi (propagating modes); use wave_dispersion_roots instead",
                infimum=0.0,
            )
        if self.source.domain is not Domain.LAB:
            raise ValueError("source must be a lab-time signal")


@dataclass(frozen=True)
class EllipticityReport:
    infimum: float
    xi: float

    def holds(self, threshold: float = ELLIPTICITY_THRESHOLD) -> bool:
        return self.infimum > threshold


def check_ellipticity(pair: SoninePair, lam: float, freq: Optional[FrequencyGrid] = None) -> EllipticityReport:
    """Infimum of ``|Psi(i xi) + lam|`` over the band, refined locally.

    Samples the grid, a logarithmic sweep towards ``xi = 0`` (where
    oscillatory symbols wind fastest), the ``xi -> 0`` and ``xi -> inf``
    limits, then polishes the best sample with a bounded scalar search.
    """
    freq = freq or FrequencyGrid.symmetric()
    sym = pair.symbol

    def f(x):
        return np.abs(sym.psi_full(np.atleast_1d(x)) + lam)

    sweep = np.logspace(-6, math.log10(freq.limit), 20001)
    xs = np.concatenate([freq.values, sweep, -sweep, [1e-12, -1e-12]])
    vals = f(xs)
    i = int(np.argmin(vals))
    best, at = float(vals[i]), float(xs[i])
    if sym.psi_at_infinity is not None:
        lim = abs(sym.psi_at_infinity + lam)
        if lim < best:
            best, at = lim, math.inf
    if math.isfinite(at) and abs(at) > 1e-12:
        # bracket by neighbouring samples of the same sign
        same = np.sort(xs[np.sign(xs) == np.sign(at)])
        j = int(np.searchsorted(same, at))
        lo, hi = same[max(j - 1, 0)], same[min(j + 1, same.size - 1)]
        if hi > lo:
            res = minimize_scalar(lambda x: float(f(x)[0]), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-14 * max(1.0, abs(at))})
            if res.fun < best:
                best, at = float(res.fun), float(res.x)
    return EllipticityReport(best, at)


@dataclass(frozen=True)
class GreenFunction:
    """Green's function on the rectified line.

    ``G(y) = delta_weight * delta(y) + jump_weight * exp(-y) theta(y) +
    time_samples(y)``; ``time_samples`` holds the full regular part
    including the jump term.
    """

    spectrum: Callable
    time_samples: SampledSignal
    ellipticity_infimum: float
    delta_weight: float
    jump_weight: float
    causality_ratio: float
    band: float

    def regular(self, y):
        return np.interp(y, self.time_samples.grid, self.time_samples.values.real)


def _jump_weight(ghat, g0):
    s1, s2 = 1e6, 1e7
    a = complex(1j * s1 * (ghat(np.array([s1]))[0] - g0))
    b = complex(1j * s2 * (ghat(np.array([s2]))[0] - g0))
    if abs(a - b) <= 1e-3 * max(abs(b), 1e-300) and abs(b.imag) <= 1e-3 * abs(b):
        return b.real
    return 0.0


def _band_filter(xi, band):
    return np.exp(-_FILTER_STRENGTH * (np.abs(xi) / band) ** _FILTER_ORDER)


@dataclass(frozen=True)
class _GreenParts:
    ghat: Callable
    delta: float
    jump: float
    band: float
    xi: np.ndarray
    step: float

    def remainder(self, x):
        return self.ghat(x) - self.delta - self.jump / (1j * x + 1.0)

    def invert(self, multiplier, y):
        """``(1/2 pi) int remainder * multiplier * filter * exp(i xi y) d xi`` on uniform ``y``."""
        y = np.asarray(y, dtype=float)
        hy = (y[-1] - y[0]) / (y.size - 1) if y.size > 1 else 1.0
        w = self.remainder(self.xi) * multiplier(self.xi) * _band_filter(self.xi, self.band) * self.step
        return uniform_dft(w, self.xi[0], self.step, y[0], hy, y.size, +1) / (2.0 * math.pi)


def _require_elliptic(pair, lam, freq, threshold):
    rep = check_ellipticity(pair, lam, freq)
    if not rep.holds(threshold):
        raise IllPosedError(
            f"ellipticity fails: inf |Psi(i xi) + lambda| = {rep.infimum:.3g} at xi = {rep.xi:.6g}",
            xi=rep.xi,
            infimum=rep.infimum,
        )
    return rep


def _green_parts(pair, lam, freq, max_band) -> _GreenParts:
    sym = pair.symbol

    def ghat(x):
        return 1.0 / (sym.psi_full(np.asarray(x, dtype=float)) + lam)

    g0 = 0.0 if sym.psi_at_infinity is None else 1.0 / (sym.psi_at_infinity + lam)
    g1 = _jump_weight(ghat, g0)
    parts = _GreenParts(ghat, g0, g1, freq.limit, np.empty(0), freq.step)
    # grow the band until the remainder is negligible at its edge
    band = freq.limit
    peak = float(np.abs(ghat(freq.values)).max())
    while abs(parts.remainder(np.array([band]))[0]) > 1e-10 * peak and band < max_band:
        band = min(2.0 * band, max_band)
    count = int(math.ceil(band / freq.step))
    xi = -(count - 0.5) * freq.step + freq.step * np.arange(2 * count)
    return _GreenParts(ghat, g0, g1, band, xi, freq.step)


def green_function(
    pair: SoninePair,
    lam: float,
    freq: Optional[FrequencyGrid] = None,
    y_grid=None,
    threshold: float = ELLIPTICITY_THRESHOLD,
    max_band: float = MAX_GREEN_BAND,
) -> GreenFunction:
    """Sample ``Ghat = 1/(Psi + lam)`` and invert it to warped time."""
    freq = freq or FrequencyGrid.symmetric()
    rep = _require_elliptic(pair, lam, freq, threshold)
    y = np.asarray(y_grid if y_grid is not None else uniform_grid(-20.0, 20.0, 0.01), dtype=float)
    parts = _green_parts(pair, lam, freq, max_band)
    vals = parts.invert(lambda x: 1.0, y)
    jump = np.where(y > 0, np.exp(-np.clip(y, 0, None)), np.where(y == 0, 0.5, 0.0))
    reg = vals.real + parts.jump * jump
    samples = SampledSignal.on_grid(y, reg, Domain.WARPED)
    neg, pos = np.abs(reg[y < 0]), np.abs(reg[y > 0])
    ratio = float(neg.max() / pos.max()) if neg.size and pos.size and pos.max() > 0 else 0.0
    return GreenFunction(parts.ghat, samples, rep.infimum, parts.delta, parts.jump, ratio, parts.band)


def green_cell_integrals(pair: SoninePair, lam: float, h: float, count: int,
                         freq: Optional[FrequencyGrid] = None, max_band: float = MAX_GREEN_BAND) -> np.ndarray:
    """``int_{m h}^{(m+1) h} G(y) dy`` for ``m < count``, excluding the delta part.

    The cell integral multiplies the spectrum by the bounded factor
    ``(exp(i xi h) - 1)/(i xi)``, so the integrable singularity of ``G`` at
    the origin costs no accuracy.
    """
    freq = freq or FrequencyGrid.symmetric()
    _require_elliptic(pair, lam, freq, ELLIPTICITY_THRESHOLD)
    parts = _green_parts(pair, lam, freq, max_band)
    lead = 3
    y = h * np.arange(-lead, count)
    cells = parts.invert(lambda x: np.expm1(1j * x * h) / (1j * x), y).real
    # the band filter smears the singular mass at 0+ slightly into y < 0
    cells[lead] += cells[:lead].sum()
    cells = cells[lead:]
    return cells + parts.jump * np.exp(-y[lead:]) * (-np.expm1(-h))


def solve_evolution(prob: EvolutionProblem, method: str = "spectral", y_step: Optional[float] = None) -> SampledSignal:
    """Solution on the source grid, by spectral division or Green's convolution."""
    _require_elliptic(prob.pair, prob.lam, prob.freq, ELLIPTICITY_THRESHOLD)
    s, f = prob.structure, prob.source
    if method == "spectral":
        spec = forward_wft(f, s, prob.freq, y_step=y_step)
        ghat = 1.0 / (prob.pair.symbol.psi_full(prob.freq.values) + prob.lam)
        return inverse_wft(spec.with_values(spec.values * ghat), s, f.grid, y_step=y_step)
    if method == "convolution":
        y = s.warped_grid(f.grid, y_step)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EdgeDecayWarning)
            v = warp_signal(f, s, y)
        h = v.step
        cells = green_cell_integrals(prob.pair, prob.lam, h, y.size, prob.freq)
        # cell m pairs with the mean of v at its two ends
        kern = np.zeros(y.size + 1)
        kern[:-1] += cells / 2.0
        kern[1:] += cells / 2.0
        delta = prob.pair.symbol.psi_at_infinity
        g0 = 0.0 if delta is None else 1.0 / (delta + prob.lam)
        out = fftconvolve(v.values, kern)[: y.size] + g0 * v.values
        return unwarp_signal(SampledSignal.on_grid(y, out, Domain.WARPED), s, f.grid)
    raise ValueError(f"unknown method {method!r}")


def _weighted_norm(u: SampledSignal, s: StructurePair) -> float:
    return math.sqrt(max(weighted_inner_product(u, u, s).real, 0.0))


def residual(prob: EvolutionProblem, u: SampledSignal) -> float:
    """``||D u + lam u - f|| / ||f||`` in the weighted norm."""
    from .operators import Form, OperatorRequest, apply_derivative

    pair = prob.pair
    form = Form.DIRECT if pair.kappa_time is not None and pair.n <= 2 else Form.SPECTRAL
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EdgeDecayWarning)
        du = apply_derivative(OperatorRequest(pair, prob.structure, u, form, freq=prob.freq))
    r = prob.source.with_values(du.values + prob.lam * u.values - prob.source.values)
    return _weighted_norm(r, prob.structure) / _weighted_norm(prob.source, prob.structure)


@dataclass(frozen=True)
class DispersionRoots:
    roots: np.ndarray
    infimum: float
    message: str = ""


def wave_dispersion_roots(gamma: float, lam: float, count: int = 3) -> DispersionRoots:
    """Positive real roots of ``exp(i gamma/xi) + lam = 0``, largest first.

    Real roots exist only for ``lam = 1``; otherwise the result is empty and
    carries ``inf |exp(i theta) + lam| = |lam - 1|``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if count < 0:
        raise ValueError("count must be nonnegative")
    if abs(lam - 1.0) > 1e-12:
        inf = abs(abs(lam) - 1.0)
        return DispersionRoots(np.array([]), inf, f"no real roots: |e^(i theta) + {lam:g}| >= {inf:g}")
    roots = []
    for m in range(count):
        # phase theta = gamma/xi must hit an odd multiple of pi
        theta = brentq(lambda th: math.cos(th / 2.0), 2 * m * math.pi + 1e-9, (2 * m + 2) * math.pi - 1e-9, xtol=1e-15)
        xi = gamma / theta
        check = abs(np.exp(1j * gamma / xi) + lam)
        if check >= 1e-10:
            raise ConvergenceError(f"root {xi} fails verification ({check:.2e})")
        roots.append(xi)
    return DispersionRoots(np.array(roots), 0.0, "")


def redshift_trace(xi0: float, structure: StructurePair, t_grid) -> SampledSignal:
    """Single spectral mode ``Re(exp(i xi0 psi(t)))/omega(t)`` in lab time."""
    if not xi0 > 0:
        raise ValueError("xi0 must be positive")
    t = np.asarray(t_grid, dtype=float)
    vals = np.cos(xi0 * structure.psi(t)) / structure.omega(t)
    return SampledSignal.on_grid(t, vals, Domain.LAB)


__all__ = [
    "EvolutionProblem",
    "EllipticityReport",
    "GreenFunction",
    "DispersionRoots",
    "check_ellipticity",
    "green_function",
    "solve_evolution",
    "residual",
    "wave_dispersion_roots",
    "redshift_trace",
]
