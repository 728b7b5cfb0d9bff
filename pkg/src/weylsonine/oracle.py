"""Slow, independent reference computations for validating the main paths.

Nothing here shares quadrature code with :mod:`operators` or
:mod:`kernels`; everything rests on :func:`scipy.integrate.quad`, plain
series, or textbook stencils.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, OutOfRangeError
from .structure import SampledSignal, StructurePair

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-13
    rel_tol: float = 1e-12
    max_subdivisions: int = 200
    left_exponent: float = 0.0
    right_exponent: float = 0.0

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        for e in (self.left_exponent, self.right_exponent):
            if not -1.0 < e <= 0.0:
                raise ValueError("endpoint exponents must lie in (-1, 0]")

    def halved(self) -> "QuadratureSpec":
        return QuadratureSpec(
            self.abs_tol / 2,
            self.rel_tol / 2,
            2 * self.max_subdivisions,
            self.left_exponent,
            self.right_exponent,
        )


def _quad(f, a, b, spec, where):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions
            )
        except integrate.IntegrationWarning as exc:
            raise ConvergenceError(f"quadrature did not converge at t = {where}: {exc}", t=where) from None
    return val


def _endpoint_half(g, length, exponent, spec, where):
    """``int_0^length g(x) dx`` for ``g ~ x**exponent`` via ``x = length * r**(1/(1+e))``."""
    q = 1.0 / (1.0 + exponent)

    def h(r):
        # Gauss-Kronrod never samples r = 0
        x = length * r**q
        return g(x) * length * q * r ** (q - 1.0)

    return _quad(h, 0.0, 1.0, spec, where)


def _real_convolve(k, f, t, spec):
    half = t / 2.0
    left = _endpoint_half(lambda x: k(t - x) * f(x), half, spec.left_exponent, spec, t)
    right = _endpoint_half(lambda x: k(x) * f(t - x), half, spec.right_exponent, spec, t)
    return left + right


def adaptive_convolve(k, f, t: float, spec: QuadratureSpec | None = None, certify: bool = True):
    """``int_0^t k(t - tau) f(tau) d tau`` by adaptive quadrature.

    ``spec.left_exponent`` describes ``f`` near ``tau = 0`` and
    ``spec.right_exponent`` describes ``k`` near its origin.  With
    ``certify`` the result is recomputed at half the tolerance and a
    :class:`ConvergenceError` is raised if the two disagree beyond it.
    """
    spec = spec or QuadratureSpec()
    if t <= 0:
        return 0.0

    def run(sp):
        probe = f(t / 2.0)
        if np.iscomplexobj(probe):
            re = _real_convolve(k, lambda x: float(np.real(f(x))), t, sp)
            im = _real_convolve(k, lambda x: float(np.imag(f(x))), t, sp)
            return complex(re, im)
        return _real_convolve(lambda x: float(k(x)), lambda x: float(f(x)), t, sp)

    val = run(spec)
    if certify:
        again = run(spec.halved())
        if abs(val - again) > max(spec.abs_tol, spec.rel_tol * abs(val)) * 10:
            raise ConvergenceError(f"result not stable under tolerance halving at t = {t}", t=t)
    return val


def mittag_leffler(alpha: float, beta: float, z):
    """Two-parameter Mittag-Leffler function by its power series.

    Restricted to ``|z| <= 50``; arguments where alternating cancellation
    would destroy more than ten digits are refused as well.
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    z_arr = np.asarray(z, dtype=float)
    if np.any(np.abs(z_arr) > 50):
        raise OutOfRangeError("Mittag-Leffler series is limited to |z| <= 50")
    out = np.array([_ml_series(alpha, beta, float(x)) for x in z_arr.ravel()]).reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


def _ml_series(alpha, beta, x):
    if x == 0.0:
        return 1.0 / math.gamma(beta)
    total, biggest = 0.0, 0.0
    lx, sign = math.log(abs(x)), -1.0 if x < 0 else 1.0
    k = 0
    while True:
        arg = alpha * k + beta
        mag = math.exp(k * lx - math.lgamma(arg))
        term = (sign**k) * mag
        total += term
        biggest = max(biggest, mag)
        # past the peak of the terms and below round-off of the partial sum
        if k * lx - math.lgamma(arg) < math.log(biggest) and mag < 1e-17 * max(abs(total), 1e-300):
            break
        k += 1
        if k > 100000:
            raise ConvergenceError("Mittag-Leffler series did not converge")
    if biggest > 1e10 * max(abs(total), 1e-300):
        raise OutOfRangeError(f"series cancellation too severe at z = {x}")
    return total


def fd_derivative(v: SampledSignal, n: int = 1) -> SampledSignal:
    """Fourth-order finite differences, one-sided at the two ends of each edge."""
    if n not in (1, 2):
        raise ValueError("order must be 1 or 2")
    f = np.asarray(v.values)
    if f.size < 6:
        raise ValueError("grid too short for the difference stencils")
    h = v.step
    if n == 1:
        central, near, edge, scale = [1, -8, 0, 8, -1], [-3, -10, 18, -6, 1, 0], [-25, 48, -36, 16, -3, 0], 12 * h
        mirror = -1.0
    else:
        central, near, edge, scale = [-1, 16, -30, 16, -1], [10, -15, -4, 14, -6, 1], [45, -154, 214, -156, 61, -10], 12 * h * h
        mirror = 1.0
    out = np.empty_like(f)
    out[2:-2] = sum(c * f[i : f.size - 4 + i] for i, c in enumerate(central)) / scale
    out[0] = np.dot(edge, f[:6]) / scale
    out[1] = np.dot(near, f[:6]) / scale
    out[-1] = mirror * np.dot(edge, f[::-1][:6]) / scale
    out[-2] = mirror * np.dot(near, f[::-1][:6]) / scale
    return v.with_values(out)


def laplace_transform(f, s: float, exponent: float = 0.0, spec: QuadratureSpec | None = None) -> float:
    """``int_0^inf f(z) exp(-s z) dz`` for real ``s > 0``; ``f ~ z**(-exponent)`` near 0."""
    spec = spec or QuadratureSpec(abs_tol=1e-14, rel_tol=1e-11, max_subdivisions=400)
    if not s > 0:
        raise ValueError("s must be positive")
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            if exponent != 0.0:
                # QAWS evaluates the endpoint itself
                head, _ = integrate.quad(
                    lambda z: f(max(z, 1e-300)) * max(z, 1e-300) ** exponent * math.exp(-s * z),
                    0.0,
                    1.0,
                    weight="alg",
                    wvar=(-exponent, 0.0),
                    epsabs=spec.abs_tol,
                    epsrel=spec.rel_tol,
                    limit=spec.max_subdivisions,
                )
            else:
                head, _ = integrate.quad(
                    lambda z: f(z) * math.exp(-s * z), 0.0, 1.0, epsabs=spec.abs_tol, epsrel=spec.rel_tol
                )
            mid = max(1.0, 40.0 / s)
            tail = 0.0
            for lo, hi in ((1.0, mid), (mid, np.inf)):
                if hi > lo:
                    tail += integrate.quad(
                        lambda z: f(z) * math.exp(-s * z),
                        lo,
                        hi,
                        epsabs=spec.abs_tol,
                        epsrel=spec.rel_tol,
                        limit=spec.max_subdivisions,
                    )[0]
        except integrate.IntegrationWarning as exc:
            raise ConvergenceError(f"Laplace quadrature failed at s = {s}: {exc}") from None
    return head + tail


def direct_wft(u, s: StructurePair, xi, t_range, spec: QuadratureSpec | None = None) -> np.ndarray:
    """Weighted Fourier transform of a callable by per-frequency quadrature."""
    spec = spec or QuadratureSpec(abs_tol=1e-12, rel_tol=1e-10, max_subdivisions=2000)
    a, b = t_range
    out = []
    for x in np.atleast_1d(np.asarray(xi, dtype=float)):
        def part(fn):
            return _quad(lambda t: fn(np.exp(-1j * x * s.psi(t)) * s.omega(t) * u(t) * s.dpsi(t)), a, b, spec, x)

        out.append(complex(part(np.real), part(np.imag)) / SQRT_2PI)
    return np.array(out)


def classical_relaxation(f, lam: float, t_grid) -> np.ndarray:
    """Solution of ``u' + lam u = f`` with quiescent past, by ODE integration."""
    t_grid = np.asarray(t_grid, dtype=float)
    sol = integrate.solve_ivp(
        lambda t, u: f(t) - lam * u,
        (t_grid[0], t_grid[-1]),
        [0.0],
        t_eval=t_grid,
        rtol=1e-11,
        atol=1e-13,
        method="DOP853",
    )
    if not sol.success:
        raise ConvergenceError(sol.message)
    return sol.y[0]


__all__ = [
    "QuadratureSpec",
    "adaptive_convolve",
    "mittag_leffler",
    "fd_derivative",
    "laplace_transform",
    "direct_wft",
    "classical_relaxation",
]
