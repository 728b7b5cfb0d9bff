"""Weighted Weyl-Sonine integral and derivative in three forms.

``direct`` evaluates the convolution in warped time by product integration,
``spectral`` multiplies the weighted Fourier transform by the symbol, and
``marchaud`` uses the Lévy-density difference form of the derivative.

Inputs are either lab-time :class:`SampledSignal` objects or plain callables.
A callable is evaluated at exact quadrature nodes (``t_grid`` then gives the
output points), which removes interpolation error from the direct and
Marchaud forms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.signal import fftconvolve
from scipy.special import beta as beta_fn
from scipy.special import betaincc

from ._quadrature import jacobi_rule, legendre_rule, panel_nodes
from .errors import (
    IllPosedError,
    NoLevyRepresentationError,
    OutOfRangeError,
    UnsupportedFormError,
)
from .kernels import SoninePair
from .structure import Domain, SampledSignal, Signal, StructurePair, unwarp_signal, warp_signal
from .wft import FrequencyGrid, forward_wft, inverse_wft


class Form(str, enum.Enum):
    DIRECT = "direct"
    SPECTRAL = "spectral"
    MARCHAUD = "marchaud"


# history used for callable inputs when no window is given
DEFAULT_CALLABLE_WINDOW = 40.0
# a symbol this small at the origin is treated as vanishing there
_VANISH = 1e-8
# spectral mass near xi = 0 (relative) above which 1/Psi is refused
_MEAN_TOL = 1e-6


@dataclass
class OperatorRequest:
    """Bundle of everything an operator evaluation needs.

    ``history_window`` is the retained past in warped time; ``None`` keeps
    the whole sampled past (grid inputs) or :data:`DEFAULT_CALLABLE_WINDOW`
    (callable inputs).  ``t_grid`` is required for callable inputs.
    """

    pair: SoninePair
    structure: StructurePair
    input: Signal
    form: Form = Form.SPECTRAL
    history_window: Optional[float] = None
    freq: Optional[FrequencyGrid] = None
    t_grid: Optional[np.ndarray] = None
    y_step: Optional[float] = None

    def __post_init__(self):
        self.form = Form(self.form)
        if self.history_window is not None and not self.history_window > 0:
            raise ValueError("history_window must be positive")
        if self.form is Form.MARCHAUD:
            if self.pair.levy is None:
                raise NoLevyRepresentationError(f"{self.pair.name} has no Lévy density")
            if self.pair.n != 1:
                raise UnsupportedFormError("the Marchaud form is defined for n = 1 only")
        if self.is_callable:
            if self.t_grid is None:
                raise ValueError("callable input needs t_grid")
        elif self.input.domain is not Domain.LAB:
            raise ValueError("operator input must be a lab-time signal")
        if self.t_grid is not None:
            self.t_grid = np.asarray(self.t_grid, dtype=float)

    @property
    def is_callable(self) -> bool:
        return callable(self.input) and not isinstance(self.input, SampledSignal)

    @property
    def output_grid(self) -> np.ndarray:
        return self.t_grid if self.t_grid is not None else self.input.grid

    def sampled_input(self) -> SampledSignal:
        if self.is_callable:
            return SampledSignal.from_function(self.input, self.t_grid)
        return self.input


# ---------------------------------------------------------------------------
# product integration on a uniform warped grid


def _lagrange(sig):
    """Cubic Lagrange basis on nodes -1, 0, 1, 2 at positions ``sig``."""
    return np.array(
        [
            -sig * (sig - 1) * (sig - 2) / 6.0,
            (sig + 1) * (sig - 1) * (sig - 2) / 2.0,
            -(sig + 1) * sig * (sig - 2) / 2.0,
            (sig + 1) * sig * (sig - 1) / 6.0,
        ]
    )


def _kernel_filter(f, p, h, ncells, skip_first=False, nq=10, nq0=24):
    """Filter ``c`` with ``sum_q c[q+1] v[j-q]`` ~ ``int_0^{ncells h} f(z) v(y_j - z) dz``.

    ``v`` is treated as the piecewise cubic through its samples; ``f`` may
    behave like ``z**(-p)`` at the origin.
    """
    moments = np.zeros((ncells, 4))
    if ncells > 1:
        r, w = legendre_rule(nq)
        z = h * (np.arange(1, ncells)[:, None] + r[None, :])
        moments[1:] = (f(z) * (w * h)) @ _lagrange(1.0 - r).T
    if not skip_first:
        r, w = jacobi_rule(nq0, float(p))
        z = h * r
        smooth = f(z) * z**p if p != 0 else f(z)
        moments[0] = (h ** (1.0 - p) * w * smooth) @ _lagrange(1.0 - r).T
    c = np.zeros(ncells + 3)
    m = np.arange(ncells)
    for k, shift in enumerate((2, 1, 0, -1)):
        np.add.at(c, m + shift + 1, moments[:, k])
    return c


def _apply_filter(c, values):
    full = fftconvolve(values, c.astype(complex) if np.iscomplexobj(values) else c)
    return full[1 : values.size + 1]


def _pair_filter(pair: SoninePair, which, h, ncells):
    if pair.components:
        return sum(w * _pair_filter(comp, which, h, ncells) for w, comp in pair.components)
    fn = pair.k_time if which == "k" else pair.kappa_time
    p = pair.k_singularity if which == "k" else pair.kappa_singularity
    if fn is None:
        raise UnsupportedFormError(
            f"{pair.name} has no closed time form for {which}; use the spectral form"
        )
    return _kernel_filter(fn, p, h, ncells)


def _fd_first(f, h):
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return d


def _fd_second(f, h):
    d = np.empty_like(f)
    h2 = 12 * h * h
    d[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / h2
    edge = np.array([45, -154, 214, -156, 61, -10]) / h2
    near = np.array([10, -15, -4, 14, -6, 1]) / h2
    head, tail = f[:6], f[::-1][:6]
    d[0], d[1] = edge @ head, near @ head
    d[-1], d[-2] = edge @ tail, near @ tail
    return d


def _shifted_power(c, dc, d2c, n, lam):
    """``(d/dy + lam)**n`` from the convolution and its derivatives."""
    if n == 1:
        return dc + lam * c
    return d2c + 2 * lam * dc + lam * lam * c


def _ncells(window, h, span):
    if window is None:
        return max(4, int(round(span / h)) + 1)
    return max(4, int(round(window / h)))


def _warped_input(req: OperatorRequest):
    s = req.structure
    u = req.input
    y = s.warped_grid(req.output_grid, req.y_step)
    return y, warp_signal(u, s, y)


def _grid_convolution(req: OperatorRequest, which):
    y, v = _warped_input(req)
    h = v.step
    c = _pair_filter(req.pair, which, h, _ncells(req.history_window, h, y[-1] - y[0]))
    return y, v, _apply_filter(c, v.values)


def _check_direct_order(pair):
    if pair.n > 2:
        raise UnsupportedFormError("direct form supports n <= 2; use the spectral form")


# ---------------------------------------------------------------------------
# exact-node quadrature for callable inputs


def _conv_nodes(f, p, window, panel=1.0, n0=32, n=16):
    panel = min(panel, window)
    z0, w0 = jacobi_rule(n0, float(p))
    z_first = panel * z0
    w_first = panel ** (1.0 - p) * w0 * (f(z_first) * z_first**p if p != 0 else f(z_first))
    if window > panel:
        z_rest, w_rest = panel_nodes(panel, window, panel, n)
        w_rest = w_rest * f(z_rest)
        return np.concatenate([z_first, z_rest]), np.concatenate([w_first, w_rest])
    return z_first, w_first


def _pair_nodes(pair, which, window):
    if pair.components:
        zs, ws = zip(*(_pair_nodes(c, which, window) for _, c in pair.components))
        weights = [w * wt for (w, _), wt in zip(pair.components, ws)]
        return np.concatenate(zs), np.concatenate(weights)
    fn = pair.k_time if which == "k" else pair.kappa_time
    p = pair.k_singularity if which == "k" else pair.kappa_singularity
    if fn is None:
        raise UnsupportedFormError(
            f"{pair.name} has no closed time form for {which}; use the spectral form"
        )
    return _conv_nodes(fn, p, window)


def _warped_callable(u, s: StructurePair):
    def v(y):
        t = s.psi_inv(y)
        if not np.all(s.scale.contains(t)):
            raise OutOfRangeError("quadrature node maps outside the scale domain")
        return s.omega(t) * np.asarray(u(t), dtype=complex)

    return v


def _node_sum(v, y, z, w, chunk=1 << 21):
    out = np.empty(y.size, dtype=complex)
    step = max(1, chunk // max(1, z.size))
    for lo in range(0, y.size, step):
        yy = y[lo : lo + step]
        out[lo : lo + step] = v(yy[:, None] - z[None, :]) @ w
    return out


def _callable_window(req):
    return req.history_window if req.history_window is not None else DEFAULT_CALLABLE_WINDOW


def _finish_callable(req, y, vals):
    t = req.t_grid
    return SampledSignal.on_grid(t, vals / req.structure.omega(t), Domain.LAB)


# ---------------------------------------------------------------------------
# spectral form


def _spectral(req: OperatorRequest, invert: bool) -> SampledSignal:
    u = req.sampled_input()
    freq = req.freq or FrequencyGrid.symmetric()
    spec = forward_wft(u, req.structure, freq, y_step=req.y_step)
    xi = freq.values
    psi = req.pair.symbol.psi_full(xi)
    if invert:
        tiny, small = np.abs(req.pair.symbol.psi_full(np.array([1e-12, 1e-10])))
        # vanishing: negligible, or still shrinking as xi -> 0
        vanishes = tiny < _VANISH or tiny < 0.99 * small
        c = freq.count
        even = spec.values[c - 2 : c + 2]
        # even part at h/2 and 3h/2, extrapolated quadratically to xi = 0
        at_zero = (9.0 * (even[1] + even[2]) - (even[0] + even[3])) / 16.0 if c > 1 else spec.values[0]
        mass = abs(at_zero) / max(np.abs(spec.values).max(), 1e-300)
        if vanishes and mass > _MEAN_TOL:
            raise IllPosedError(
                f"integral multiplier 1/Psi is unbounded at xi = 0 and the input has "
                f"nonzero mean (relative spectrum {mass:.3g} at xi = 0)",
                xi=0.0,
            )
        mult = 1.0 / psi
    else:
        mult = psi
    return inverse_wft(spec.with_values(spec.values * mult), req.structure, req.output_grid, y_step=req.y_step)


# ---------------------------------------------------------------------------
# public operators


def apply_integral(req: OperatorRequest) -> SampledSignal:
    """Weighted Weyl-Sonine integral of the request input."""
    if req.form is Form.SPECTRAL:
        return _spectral(req, invert=True)
    if req.form is Form.MARCHAUD:
        raise UnsupportedFormError("the Marchaud form applies to the derivative only")
    if req.is_callable:
        z, w = _pair_nodes(req.pair, "k", _callable_window(req))
        y = req.structure.psi(req.t_grid)
        vals = _node_sum(_warped_callable(req.input, req.structure), y, z, w)
        return _finish_callable(req, y, vals)
    y, _, conv = _grid_convolution(req, "k")
    out = SampledSignal.on_grid(y, conv, Domain.WARPED)
    return unwarp_signal(out, req.structure, req.output_grid)


def _callable_derivative(req, fd_step):
    pair = req.pair
    z, w = _pair_nodes(pair, "kappa", _callable_window(req))
    y = req.structure.psi(req.t_grid)
    v = _warped_callable(req.input, req.structure)
    offs = fd_step * np.arange(-2, 3)
    c = np.array([_node_sum(v, y + o, z, w) for o in offs])
    dc = (c[0] - 8 * c[1] + 8 * c[3] - c[4]) / (12 * fd_step)
    d2c = (-c[0] + 16 * c[1] - 30 * c[2] + 16 * c[3] - c[4]) / (12 * fd_step**2)
    return y, _shifted_power(c[2], dc, d2c, pair.n, pair.tempering)


def apply_derivative(req: OperatorRequest, fd_step: float = 1e-3) -> SampledSignal:
    """Weighted Weyl-Sonine derivative of the request input.

    ``fd_step`` is the difference step in warped time for callable inputs;
    sampled inputs differentiate on their own warped grid.
    """
    if req.form is Form.SPECTRAL:
        return _spectral(req, invert=False)
    if req.form is Form.MARCHAUD:
        return apply_marchaud(req)
    pair = req.pair
    _check_direct_order(pair)
    if req.is_callable:
        y, vals = _callable_derivative(req, fd_step if pair.n == 1 else 2 * fd_step)
        return _finish_callable(req, y, vals)
    y, v, conv = _grid_convolution(req, "kappa")
    h = v.step
    d2c = _fd_second(conv, h) if pair.n == 2 else None
    vals = _shifted_power(conv, _fd_first(conv, h), d2c, pair.n, pair.tempering)
    return unwarp_signal(SampledSignal.on_grid(y, vals, Domain.WARPED), req.structure, req.output_grid)


def _levy_moment(g, p, h, power):
    """``int_0^h z**power g(z) dz`` for ``g ~ z**(-p)``."""
    r, w = jacobi_rule(24, float(p - power))
    z = h * r
    return float(h ** (1.0 + power - p) * np.sum(w * z**p * g(z)))


def apply_marchaud(req: OperatorRequest, fd_step: float = 1e-3) -> SampledSignal:
    """Derivative through the Lévy-density difference integral.

    Sampled inputs use product integration away from the origin and a
    second-order Taylor expansion of the difference on the first cell.
    """
    pair = req.pair
    levy = pair.levy
    if levy is None:
        raise NoLevyRepresentationError(f"{pair.name} has no Lévy density")
    if pair.n != 1:
        raise UnsupportedFormError("the Marchaud form is defined for n = 1 only")
    g, p = levy.eval, levy.integrability_exponent
    if req.is_callable:
        window = _callable_window(req)
        y = req.structure.psi(req.t_grid)
        v = _warped_callable(req.input, req.structure)
        panel = min(1.0, window)
        r, w = jacobi_rule(32, float(p - 1.0))
        z0 = panel * r
        w0 = panel ** (2.0 - p) * w * z0**p * g(z0) / z0
        vy = v(y)
        head = np.empty(y.size, dtype=complex)
        step = max(1, (1 << 21) // z0.size)
        for lo in range(0, y.size, step):
            yy = y[lo : lo + step]
            head[lo : lo + step] = (vy[lo : lo + step, None] - v(yy[:, None] - z0[None, :])) @ w0
        vals = head
        if window > panel:
            zr, wr = panel_nodes(panel, window, panel, 16)
            wr = wr * g(zr)
            vals = vals + vy * float(levy.tail(panel)) - _node_sum(v, y, zr, wr)
        else:
            vals = vals + vy * float(levy.tail(panel))
        vals = vals + levy.killing * vy
        return _finish_callable(req, y, vals)
    y, v = _warped_input(req)
    h = v.step
    vals = v.values
    c = _kernel_filter(g, p, h, _ncells(req.history_window, h, y[-1] - y[0]), skip_first=True)
    first = _levy_moment(g, p, h, 1) * _fd_first(vals, h) - 0.5 * _levy_moment(g, p, h, 2) * _fd_second(vals, h)
    out = vals * float(levy.tail(h)) - _apply_filter(c, vals) + first + levy.killing * vals
    return unwarp_signal(SampledSignal.on_grid(y, out, Domain.WARPED), req.structure, req.output_grid)


def apply_operator(req: OperatorRequest, operator: str = "derivative") -> SampledSignal:
    """Dispatch on ``operator`` in {'integral', 'derivative'}."""
    if operator == "integral":
        return apply_integral(req)
    if operator == "derivative":
        return apply_derivative(req)
    raise ValueError(f"unknown operator {operator!r}")


# ---------------------------------------------------------------------------
# truncation of the infinite history


def estimate_truncation_error(M: float, N: float, W: float, y: float = 0.0, C: float = 1.0) -> float:
    """Bound ``C (1+|y|)**N int_W^inf z**M (1+z)**(-N) dz`` on the discarded history.

    ``M`` is the polynomial growth of the kernel and ``N`` the decay of the
    warped input; the tail integral is an incomplete beta function.
    """
    if N <= M + 1:
        raise ValueError(f"tail integral diverges: need N > M + 1 (got M={M}, N={N})")
    if W < 0:
        raise ValueError("window must be nonnegative")
    a, b = M + 1.0, N - M - 1.0
    x = W / (1.0 + W)
    # int_W^inf = B(a, b) * (1 - I_x(a, b)); betaincc keeps precision near x -> 1
    tail = beta_fn(a, b) * betaincc(a, b, x) if x < 1.0 else 0.0
    return float(C * (1.0 + abs(y)) ** N * tail)


def suggest_history_window(M: float, N: float, tol: float, y: float = 0.0, C: float = 1.0) -> float:
    """Smallest window whose truncation bound is at most ``tol``."""
    if estimate_truncation_error(M, N, 0.0, y, C) <= tol:
        return 0.0
    hi = 1.0
    while estimate_truncation_error(M, N, hi, y, C) > tol:
        hi *= 2.0
        if hi > 1e15:
            raise ValueError("tolerance unreachable")
    return float(brentq(lambda w: estimate_truncation_error(M, N, w, y, C) - tol, 0.0, hi, xtol=1e-10))


def truncation_decay_ratio(M: float, N: float, W: float) -> float:
    """Bound reduction obtained by doubling ``W``."""
    return estimate_truncation_error(M, N, W) / estimate_truncation_error(M, N, 2.0 * W)


__all__ = [
    "Form",
    "OperatorRequest",
    "apply_integral",
    "apply_derivative",
    "apply_marchaud",
    "apply_operator",
    "estimate_truncation_error",
    "suggest_history_window",
    "truncation_decay_ratio",
]
