"""Weighted Fourier transform, its inverse and weighted inner products.

The transform is ``F_{psi,omega} u(xi) = (2 pi)^{-1/2} int exp(-i xi psi(t))
omega(t) u(t) psi'(t) dt``.  The default evaluation warps ``u`` to the
rectified line and applies the classical transform there; the ``direct``
method sums the defining integral in lab time and serves as a cross-check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import czt

from .errors import EdgeDecayWarning
from .structure import (
    EDGE_DECAY_LEVEL,
    Domain,
    SampledSignal,
    StructurePair,
    unwarp_signal,
    warp_signal,
)

SQRT_2PI = math.sqrt(2.0 * math.pi)
_CHUNK = 1 << 22


@dataclass(frozen=True)
class FrequencyGrid:
    """Symmetric uniform grid ``xi = ±(j + 1/2) step``, ``j < count``; excludes 0."""

    step: float = 0.005
    count: int = 10000

    def __post_init__(self):
        if not self.step > 0 or self.count < 1:
            raise ValueError("frequency grid needs step > 0 and count >= 1")

    @classmethod
    def symmetric(cls, limit: float = 50.0, step: float = 0.005) -> "FrequencyGrid":
        return cls(step, max(1, int(round(limit / step))))

    @property
    def start(self) -> float:
        return -(self.count - 0.5) * self.step

    @property
    def limit(self) -> float:
        return (self.count - 0.5) * self.step

    @property
    def values(self) -> np.ndarray:
        return self.start + self.step * np.arange(2 * self.count)

    def __len__(self):
        return 2 * self.count


def uniform_dft(values, x0, dx, k0, dk, m, sign=-1):
    """``sum_j values_j exp(sign i (k0 + l dk)(x0 + j dx))`` for ``l < m``.

    Evaluated with a chirp-z transform.
    """
    values = np.asarray(values, dtype=complex)
    j = np.arange(values.size)
    pre = values * np.exp(sign * 1j * k0 * dx * j)
    out = czt(pre, m=m, w=np.exp(sign * 1j * dk * dx), a=1.0)
    k = k0 + dk * np.arange(m)
    return out * np.exp(sign * 1j * k * x0)


def _trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = h / 2.0
    return w


def fourier_transform(v: SampledSignal, freq: FrequencyGrid) -> SampledSignal:
    """Classical unitary transform of a warped-time signal by trapezoidal quadrature."""
    w = _trapezoid_weights(len(v), v.step)
    vals = uniform_dft(v.values * w, v.start, v.step, freq.start, freq.step, len(freq), -1)
    return SampledSignal(Domain.FREQUENCY, freq.start, freq.step, vals / SQRT_2PI)


def inverse_fourier(spec: SampledSignal, y_grid) -> SampledSignal:
    """Inverse classical transform of a spectrum onto a uniform warped grid."""
    y_grid = np.asarray(y_grid, dtype=float)
    hy = (y_grid[-1] - y_grid[0]) / (y_grid.size - 1) if y_grid.size > 1 else 1.0
    vals = uniform_dft(spec.values * spec.step, spec.start, spec.step, y_grid[0], hy, y_grid.size, +1)
    return SampledSignal.on_grid(y_grid, vals / SQRT_2PI, Domain.WARPED) if y_grid.size > 1 else SampledSignal(
        Domain.WARPED, float(y_grid[0]), 1.0, vals / SQRT_2PI
    )


def _check_lab(u: SampledSignal, s: StructurePair):
    if u.domain is not Domain.LAB:
        raise ValueError("expected a lab-time signal")
    if not np.all(s.scale.contains(u.grid)):
        raise ValueError(f"signal grid leaves the scale domain {s.domain}")
    ratio = u.edge_ratio()
    if ratio > EDGE_DECAY_LEVEL:
        warnings.warn(
            f"input does not decay at the grid edges (edge/max = {ratio:.3g})",
            EdgeDecayWarning,
            stacklevel=3,
        )


def _direct_sum(weights_values, phase_points, xi, sign):
    """``sum_j a_j exp(sign i xi psi_j)`` in memory-bounded chunks."""
    out = np.empty(xi.size, dtype=complex)
    step = max(1, _CHUNK // max(1, phase_points.size))
    for lo in range(0, xi.size, step):
        blk = xi[lo : lo + step]
        out[lo : lo + step] = np.exp(sign * 1j * np.outer(blk, phase_points)) @ weights_values
    return out


def forward_wft(
    u: SampledSignal,
    s: StructurePair,
    freq: FrequencyGrid | None = None,
    method: str = "warp",
    y_step: float | None = None,
) -> SampledSignal:
    """Weighted Fourier transform of a lab-time signal."""
    freq = freq or FrequencyGrid.symmetric()
    _check_lab(u, s)
    if method == "warp":
        y = s.warped_grid(u.grid, y_step)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EdgeDecayWarning)
            v = warp_signal(u, s, y)
        return fourier_transform(v, freq)
    if method == "direct":
        t = u.grid
        a = _trapezoid_weights(len(u), u.step) * s.omega(t) * u.values * s.dpsi(t)
        vals = _direct_sum(a, s.psi(t), freq.values, -1) / SQRT_2PI
        return SampledSignal(Domain.FREQUENCY, freq.start, freq.step, vals)
    raise ValueError(f"unknown method {method!r}")


def inverse_wft(
    spec: SampledSignal,
    s: StructurePair,
    t_grid,
    method: str = "warp",
    y_step: float | None = None,
) -> SampledSignal:
    """Pointwise inverse ``u(t) = (omega(t) sqrt(2 pi))^{-1} int exp(i xi psi(t)) spec(xi) d xi``."""
    if spec.domain is not Domain.FREQUENCY:
        raise ValueError("expected a frequency-domain spectrum")
    t_grid = np.asarray(t_grid, dtype=float)
    ratio = spec.edge_ratio()
    if ratio > 1e-6:
        warnings.warn(
            f"spectrum does not decay at the band edges (edge/max = {ratio:.3g})",
            EdgeDecayWarning,
            stacklevel=2,
        )
    if method == "warp":
        v = inverse_fourier(spec, s.warped_grid(t_grid, y_step))
        return unwarp_signal(v, s, t_grid)
    if method == "direct":
        vals = _direct_sum(spec.values * spec.step, spec.grid, s.psi(t_grid), +1)
        return SampledSignal.on_grid(t_grid, vals / (SQRT_2PI * s.omega(t_grid)), Domain.LAB)
    raise ValueError(f"unknown method {method!r}")


def weighted_inner_product(u: SampledSignal, v: SampledSignal, s: StructurePair) -> complex:
    """``int u conj(v) omega psi' dt`` by the trapezoidal rule on the common grid."""
    if len(u) != len(v) or abs(u.start - v.start) > 1e-12 or abs(u.step - v.step) > 1e-15:
        raise ValueError("inner product needs signals on a common grid")
    t = u.grid
    w = _trapezoid_weights(len(u), u.step)
    return complex(np.sum(w * u.values * np.conj(v.values) * s.omega(t) * s.dpsi(t)))


@dataclass(frozen=True)
class PlancherelReport:
    norm_time: float
    norm_freq: float
    rel_error: float


def conjugated_norm(u: SampledSignal, s: StructurePair, y_step: float | None = None) -> float:
    """L2 norm of ``omega u`` carried to the rectified line.

    Equals ``(int |u|^2 omega^2 psi' dt)^{1/2}``, the norm that the weighted
    transform preserves.
    """
    y = s.warped_grid(u.grid, y_step)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EdgeDecayWarning)
        v = warp_signal(u, s, y)
    w = _trapezoid_weights(len(v), v.step)
    return math.sqrt(float(np.sum(w * np.abs(v.values) ** 2)))


def plancherel_check(
    u: SampledSignal,
    s: StructurePair,
    freq: FrequencyGrid | None = None,
    y_step: float | None = None,
) -> PlancherelReport:
    """Compare the conjugated time norm of ``u`` with the L2 norm of its spectrum."""
    spec = forward_wft(u, s, freq, y_step=y_step)
    nt = conjugated_norm(u, s, y_step)
    nf = math.sqrt(float(np.sum(np.abs(spec.values) ** 2) * spec.step))
    return PlancherelReport(nt, nf, abs(nt - nf) / nt)
