"""Structure pairs (psi, omega) and the warp/unwarp conjugation maps.

A structure pair couples a strictly increasing time scale ``psi`` (the
medium's internal clock) with a positive weight ``omega``.  Operators act in
the rectified ("warped") variable ``y = psi(t)`` on the auxiliary signal
``v(y) = omega(t) u(t)``, and results are mapped back to lab time.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import EdgeDecayWarning, OutOfRangeError

EDGE_DECAY_LEVEL = 1e-8


class Domain(str, enum.Enum):
    """Which axis a sampled signal lives on."""

    LAB = "lab-time"
    WARPED = "warped-time"
    FREQUENCY = "frequency"


@dataclass(frozen=True)
class ScaleFunction:
    """Strictly increasing diffeomorphism of ``domain`` onto the real line."""

    kind: str
    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float] = (-math.inf, math.inf)
    params: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.eval(t)

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity"

    def contains(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        lo, hi = self.domain
        return (t > lo) & (t < hi)


@dataclass(frozen=True)
class WeightFunction:
    """Strictly positive weight ``omega(t)``."""

    kind: str
    eval: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.eval(t)

    @property
    def is_unit(self) -> bool:
        return self.kind == "unit"


def _signed_power(beta):
    def ev(t):
        t = np.asarray(t, dtype=float)
        return np.sign(t) * np.abs(t) ** beta

    def der(t):
        t = np.asarray(t, dtype=float)
        return beta * np.abs(t) ** (beta - 1.0)

    def inv(y):
        y = np.asarray(y, dtype=float)
        return np.sign(y) * np.abs(y) ** (1.0 / beta)

    return ev, der, inv


def _sample_points(domain, count=401):
    lo, hi = domain
    lo = -50.0 if math.isinf(lo) else lo
    hi = 50.0 if math.isinf(hi) else hi
    pts = np.linspace(lo, hi, count + 2)[1:-1]
    return pts


def make_scale(kind: str = "identity", **params) -> ScaleFunction:
    """Build a scale function.

    Parameters
    ----------
    kind : {"identity", "signed-power", "logarithmic", "custom"}
        ``signed-power`` takes ``beta > 0`` and uses ``sgn(t)|t|**beta`` on the
        whole line.  ``logarithmic`` is ``ln t`` on ``(0, inf)``.  ``custom``
        takes ``eval``, ``deriv``, ``inverse`` and optionally ``domain``.
    """
    if kind == "identity":
        ident = lambda t: np.asarray(t, dtype=float)  # noqa: E731
        one = lambda t: np.ones_like(np.asarray(t, dtype=float))  # noqa: E731
        return ScaleFunction("identity", ident, one, ident)
    if kind == "signed-power":
        beta = float(params.get("beta", 1.0))
        if not beta > 0:
            raise ValueError(f"signed-power scale needs beta > 0, got {beta}")
        ev, der, inv = _signed_power(beta)
        return ScaleFunction("signed-power", ev, der, inv, params={"beta": beta})
    if kind == "logarithmic":
        return ScaleFunction(
            "logarithmic",
            lambda t: np.log(np.asarray(t, dtype=float)),
            lambda t: 1.0 / np.asarray(t, dtype=float),
            lambda y: np.exp(np.asarray(y, dtype=float)),
            domain=(0.0, math.inf),
        )
    if kind == "custom":
        try:
            ev, der, inv = params["eval"], params["deriv"], params["inverse"]
        except KeyError as exc:
            raise ValueError(f"custom scale is missing {exc.args[0]!r}") from None
        domain = tuple(params.get("domain", (-math.inf, math.inf)))
        pts = _sample_points(domain)
        y = np.asarray(ev(pts), dtype=float)
        if np.any(np.asarray(der(pts)) <= 0) or np.any(np.diff(y) <= 0):
            raise ValueError("custom scale is not strictly increasing on its domain")
        back = np.asarray(inv(y), dtype=float)
        if np.max(np.abs(back - pts) / np.maximum(1.0, np.abs(pts))) > 1e-8:
            raise ValueError("custom scale inverse does not invert eval")
        return ScaleFunction("custom", ev, der, inv, domain=domain)
    raise ValueError(f"unknown scale kind {kind!r}")


def make_weight(kind: str = "unit", **params) -> WeightFunction:
    """Build a weight: ``unit``, ``exponential`` (``rate``) or ``custom`` (``eval``)."""
    if kind == "unit":
        return WeightFunction("unit", lambda t: np.ones_like(np.asarray(t, dtype=float)))
    if kind == "exponential":
        rate = float(params.get("rate", 0.0))
        return WeightFunction(
            "exponential",
            lambda t: np.exp(rate * np.asarray(t, dtype=float)),
            params={"rate": rate},
        )
    if kind == "custom":
        if "eval" not in params:
            raise ValueError("custom weight is missing 'eval'")
        ev = params["eval"]
        pts = _sample_points(params.get("domain", (-math.inf, math.inf)))
        if np.any(np.asarray(ev(pts)) <= 0):
            raise ValueError("custom weight must be strictly positive")
        return WeightFunction("custom", ev)
    raise ValueError(f"unknown weight kind {kind!r}")


@dataclass(frozen=True)
class StructurePair:
    """Admissible pair (psi, omega)."""

    scale: ScaleFunction = field(default_factory=make_scale)
    weight: WeightFunction = field(default_factory=make_weight)

    @classmethod
    def identity(cls) -> "StructurePair":
        return cls(make_scale("identity"), make_weight("unit"))

    @property
    def domain(self) -> tuple[float, float]:
        return self.scale.domain

    @property
    def is_trivial(self) -> bool:
        return self.scale.is_identity and self.weight.is_unit

    def psi(self, t):
        return self.scale.eval(t)

    def dpsi(self, t):
        return self.scale.deriv(t)

    def psi_inv(self, y):
        return self.scale.inverse(y)

    def omega(self, t):
        return self.weight.eval(t)

    def warped_grid(self, t_grid, y_step=None) -> np.ndarray:
        """Uniform grid in ``y`` spanning ``psi(t_grid)``.

        The identity scale reuses ``t_grid``.  Otherwise the default step keeps
        the sample count of ``t_grid``; an explicit step is shrunk slightly so
        the grid lands on both ends.
        """
        t_grid = np.asarray(t_grid, dtype=float)
        if self.scale.is_identity and y_step is None:
            return t_grid
        y0, y1 = float(self.psi(t_grid[0])), float(self.psi(t_grid[-1]))
        if y_step is None:
            n = len(t_grid)
        else:
            n = int(math.ceil((y1 - y0) / y_step - 1e-9)) + 1
        return np.linspace(y0, y1, n)


def uniform_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Uniform grid ``start, start+step, ...`` ending at (or just below) ``stop``."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def _check_uniform(grid) -> tuple[float, float]:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must be one-dimensional with at least two points")
    step = (grid[-1] - grid[0]) / (grid.size - 1)
    if step <= 0 or np.max(np.abs(np.diff(grid) - step)) > 1e-9 * max(1.0, abs(step)) + 1e-12:
        raise ValueError("grid must be uniform and increasing")
    return float(grid[0]), float(step)


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Complex samples on a uniform grid of the tagged domain."""

    domain: Domain
    start: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("values must be a nonempty 1-d sequence")
        if not self.step > 0:
            raise ValueError("grid_step must be positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "domain", Domain(self.domain))

    @classmethod
    def on_grid(cls, grid, values, domain=Domain.LAB) -> "SampledSignal":
        start, step = _check_uniform(grid)
        return cls(domain, start, step, values)

    @classmethod
    def from_function(cls, func, grid, domain=Domain.LAB) -> "SampledSignal":
        grid = np.asarray(grid, dtype=float)
        return cls.on_grid(grid, func(grid), domain)

    @property
    def grid(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.values.size)

    @property
    def stop(self) -> float:
        return self.start + self.step * (self.values.size - 1)

    def __len__(self):
        return self.values.size

    def with_values(self, values) -> "SampledSignal":
        return SampledSignal(self.domain, self.start, self.step, values)

    def edge_ratio(self) -> float:
        """Largest edge magnitude relative to the maximum magnitude."""
        mag = np.abs(self.values)
        peak = mag.max()
        if peak == 0:
            return 0.0
        return float(max(mag[0], mag[-1]) / peak)


Signal = Union[SampledSignal, Callable[[np.ndarray], np.ndarray]]


def cubic_interpolate(sig: SampledSignal, x) -> np.ndarray:
    """Four-point Lagrange interpolation of ``sig`` at points ``x``."""
    x = np.asarray(x, dtype=float)
    n = len(sig)
    if n < 4:
        raise ValueError("cubic interpolation needs at least four samples")
    s = (x - sig.start) / sig.step
    slack = 1e-7
    if np.any(s < -slack) or np.any(s > n - 1 + slack):
        bad = x[(s < -slack) | (s > n - 1 + slack)]
        raise OutOfRangeError(
            f"{bad.size} point(s) outside sampled range [{sig.start}, {sig.stop}], e.g. {bad.flat[0]}"
        )
    i = np.clip(np.floor(s).astype(int), 1, n - 3)
    r = s - i
    f = sig.values
    wm = -r * (r - 1) * (r - 2) / 6.0
    w0 = (r + 1) * (r - 1) * (r - 2) / 2.0
    w1 = -(r + 1) * r * (r - 2) / 2.0
    w2 = (r + 1) * r * (r - 1) / 6.0
    return wm * f[i - 1] + w0 * f[i] + w1 * f[i + 1] + w2 * f[i + 2]


def _warn_edges(sig: SampledSignal, what: str):
    ratio = sig.edge_ratio()
    if ratio > EDGE_DECAY_LEVEL:
        warnings.warn(
            f"{what} does not decay at the grid edges (edge/max = {ratio:.3g})",
            EdgeDecayWarning,
            stacklevel=3,
        )


def _same_grid(sig: SampledSignal, grid: np.ndarray) -> bool:
    return (
        len(sig) == grid.size
        and abs(sig.start - grid[0]) <= 1e-12 * max(1.0, abs(grid[0]))
        and abs(sig.stop - grid[-1]) <= 1e-12 * max(1.0, abs(grid[-1]))
    )


def warp_signal(u: Signal, s: StructurePair, y_grid, check_edges=True) -> SampledSignal:
    """Map lab-time ``u`` to ``v(y) = omega(psi^-1(y)) u(psi^-1(y))``.

    ``u`` is either a lab-time :class:`SampledSignal` (interpolated with the
    four-point rule) or a callable evaluated exactly.
    """
    y_grid = np.asarray(y_grid, dtype=float)
    _check_uniform(y_grid)
    if callable(u) and not isinstance(u, SampledSignal):
        t = s.psi_inv(y_grid)
        if not np.all(s.scale.contains(t)):
            raise OutOfRangeError("warped grid maps outside the scale domain")
        vals = s.omega(t) * np.asarray(u(t), dtype=complex)
    else:
        if u.domain is not Domain.LAB:
            raise ValueError("warp_signal expects a lab-time signal")
        if s.scale.is_identity and _same_grid(u, y_grid):
            vals = s.omega(y_grid) * u.values
        else:
            lo, hi = float(s.psi(u.start)), float(s.psi(u.stop))
            tol = 1e-9 * max(1.0, abs(lo), abs(hi))
            if y_grid[0] < lo - tol or y_grid[-1] > hi + tol:
                raise OutOfRangeError(
                    f"warped grid [{y_grid[0]}, {y_grid[-1]}] leaves image [{lo}, {hi}]"
                )
            t = np.clip(s.psi_inv(y_grid), u.start, u.stop)
            vals = s.omega(t) * cubic_interpolate(u, t)
    out = SampledSignal.on_grid(y_grid, vals, Domain.WARPED)
    if check_edges:
        _warn_edges(out, "warped signal")
    return out


def unwarp_signal(v: Signal, s: StructurePair, t_grid) -> SampledSignal:
    """Map warped ``v`` back to lab time: ``u(t) = v(psi(t)) / omega(t)``."""
    t_grid = np.asarray(t_grid, dtype=float)
    if not np.all(s.scale.contains(t_grid)):
        raise OutOfRangeError("lab grid leaves the scale domain")
    if callable(v) and not isinstance(v, SampledSignal):
        vals = np.asarray(v(s.psi(t_grid)), dtype=complex)
    else:
        if v.domain is not Domain.WARPED:
            raise ValueError("unwarp_signal expects a warped-time signal")
        if s.scale.is_identity and _same_grid(v, t_grid):
            vals = v.values
        else:
            vals = cubic_interpolate(v, s.psi(t_grid))
    return SampledSignal.on_grid(t_grid, vals / s.omega(t_grid), Domain.LAB)
