"""Sonine kernel pairs, their spectral symbols and Lévy densities.

Conventions
-----------
``kappa`` is the derivative kernel and ``k`` the integral kernel of a pair of
order ``n``: ``(k * kappa)(t) = t**(n-1)/(n-1)!``.  The symbol ``Phi(s)`` is
the Laplace transform of ``kappa`` and ``Psi(s) = s**n Phi(s)`` is the full
operator symbol.  Fractional powers and logarithms of ``i xi`` use the
principal branch for ``xi > 0``; negative frequencies follow by conjugate
symmetry.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from ._quadrature import legendre_rule, panel_nodes, singular_panel
from .errors import (
    ConvergenceError,
    NoLevyRepresentationError,
    OutOfRangeError,
    UnsupportedFormError,
)

KERNEL_NAMES = (
    "power-law",
    "tempered-power-law",
    "caputo-fabrizio",
    "atangana-baleanu",
    "distributed-order",
    "bessel-klein-gordon",
    "classical",
    "power-law-order2",
)


class Regime(str, enum.Enum):
    DIFFUSIVE = "diffusive"
    OSCILLATORY = "oscillatory"


@dataclass(frozen=True)
class SpectralSymbol:
    """Symbol of a Sonine pair.

    ``phi_laplace`` and ``psi_laplace`` are evaluated at complex ``s``;
    ``phi`` and ``psi_full`` take real frequencies ``xi`` and evaluate at
    ``s = i xi``.  ``psi_at_infinity`` is the finite limit of ``Psi(i xi)`` as
    ``|xi| -> inf`` or ``None`` when the symbol grows without bound.
    """

    phi_laplace: Callable
    psi_laplace: Callable
    n: int = 1
    psi_at_infinity: Optional[complex] = None

    def _on_axis(self, fn, xi):
        xi = np.asarray(xi, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = np.asarray(fn(1j * np.abs(xi)), dtype=complex)
        return np.where(xi < 0, np.conj(val), val)

    def phi(self, xi):
        return self._on_axis(self.phi_laplace, xi)

    def psi_full(self, xi):
        return self._on_axis(self.psi_laplace, xi)

    def integral_symbol(self, xi):
        """Symbol ``1/Psi(i xi)`` of the integral operator."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 / self.psi_full(xi)


@dataclass(frozen=True)
class LevyDensity:
    """Density ``g`` with ``Psi(s) = killing + int_0^inf (1 - e^{-sz}) g(z) dz``."""

    eval: Callable
    integrability_exponent: float
    tail: Callable
    killing: float = 0.0

    def __call__(self, z):
        return self.eval(z)

    def integrability_integral(self, lo=1e-8, hi=1e8) -> float:
        """``int min(1, z) g(z) dz`` over ``[lo, hi]``; finite for a Lévy measure."""
        a, _ = integrate.quad(lambda z: z * self.eval(z), lo, 1.0, limit=200)
        b, _ = integrate.quad(lambda z: self.eval(z), 1.0, hi, limit=200)
        return a + b


@dataclass(frozen=True, eq=False)
class OrderDistribution:
    """Density ``b(alpha)`` of differentiation orders on [0, 1].

    ``tabulated`` densities are piecewise linear between the given nodes and
    zero outside them.
    """

    kind: str = "uniform"
    alphas: Optional[np.ndarray] = None
    density: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "uniform":
            return
        if self.kind != "tabulated":
            raise ValueError(f"unknown order distribution {self.kind!r}")
        a = np.asarray(self.alphas, dtype=float)
        b = np.asarray(self.density, dtype=float)
        if a.shape != b.shape or a.ndim != 1 or a.size < 2:
            raise ValueError("tabulated density needs matching 1-d alphas and values")
        if a[0] < 0 or a[-1] > 1 or np.any(np.diff(a) <= 0):
            raise ValueError("alphas must increase within [0, 1]")
        if np.any(b < 0):
            raise ValueError("order density must be nonnegative")
        mass = float(np.sum(np.diff(a) * (b[1:] + b[:-1]) / 2.0))
        if abs(mass - 1.0) > 1e-8:
            raise ValueError(f"order density integrates to {mass!r}, not 1")
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "density", b)

    def b(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        if self.kind == "uniform":
            return np.where((alpha >= 0) & (alpha <= 1), 1.0, 0.0)
        return np.interp(alpha, self.alphas, self.density, left=0.0, right=0.0)

    def rule(self, nodes: int = 64) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes in ``alpha`` and weights that include ``b``.

        Uniform densities use one ``nodes``-point Gauss-Legendre rule; tabulated
        ones use an 8-point rule on every table segment.
        """
        if self.kind == "uniform":
            z, w = legendre_rule(nodes)
            return z.copy(), w.copy()
        z, w = legendre_rule(8)
        a = self.alphas
        h = np.diff(a)
        al = (a[:-1, None] + h[:, None] * z[None, :]).ravel()
        wt = (h[:, None] * w[None, :]).ravel() * self.b(al)
        keep = wt > 0
        return al[keep], wt[keep]


def uniform_orders() -> OrderDistribution:
    return OrderDistribution("uniform")


def tabulated_orders(alphas, density) -> OrderDistribution:
    return OrderDistribution("tabulated", np.asarray(alphas), np.asarray(density))


@dataclass(frozen=True, eq=False)
class SoninePair:
    """A Sonine pair ``(k, kappa)`` of order ``n``.

    ``k_singularity``/``kappa_singularity`` give the exponent ``p`` of the
    integrable ``z**(-p)`` behaviour at the origin.  ``tempering`` is the rate
    ``lam`` of a pair obtained by :func:`temper_kernel`; its derivative acts
    as ``(d/dy + lam)**n (kappa_lam * .)``.  Distributed-order pairs list
    their weighted power-law ``components``.
    """

    name: str
    n: int
    params: dict
    symbol: SpectralSymbol
    regime: Regime
    k_time: Optional[Callable] = None
    kappa_time: Optional[Callable] = None
    k_singularity: float = 0.0
    kappa_singularity: float = 0.0
    levy: Optional[LevyDensity] = None
    tempering: float = 0.0
    components: tuple = field(default_factory=tuple)

    @property
    def phi(self):
        return self.symbol.phi

    @property
    def psi_full(self):
        return self.symbol.psi_full


def _power(s, p):
    return np.power(np.asarray(s, dtype=complex), p)


def _check_alpha(alpha, name):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"{name} needs 0 < alpha < 1, got {alpha}")
    return alpha


def _power_law_levy(alpha):
    c = alpha / math.gamma(1.0 - alpha)
    return LevyDensity(
        eval=lambda z: c * np.asarray(z, dtype=float) ** (-1.0 - alpha),
        integrability_exponent=1.0 + alpha,
        tail=lambda z: np.asarray(z, dtype=float) ** (-alpha) / math.gamma(1.0 - alpha),
    )


def _power_law(alpha):
    alpha = _check_alpha(alpha, "power-law")
    ga, g1a = math.gamma(alpha), math.gamma(1.0 - alpha)
    return SoninePair(
        name="power-law",
        n=1,
        params={"alpha": alpha},
        symbol=SpectralSymbol(
            phi_laplace=lambda s: _power(s, alpha - 1.0),
            psi_laplace=lambda s: _power(s, alpha),
        ),
        regime=Regime.DIFFUSIVE,
        k_time=lambda z: np.asarray(z, dtype=float) ** (alpha - 1.0) / ga,
        kappa_time=lambda z: np.asarray(z, dtype=float) ** (-alpha) / g1a,
        k_singularity=1.0 - alpha,
        kappa_singularity=alpha,
        levy=_power_law_levy(alpha),
    )


def _power_law_order2(alpha):
    alpha = _check_alpha(alpha, "power-law-order2")
    ga, g2a = math.gamma(alpha), math.gamma(2.0 - alpha)
    return SoninePair(
        name="power-law-order2",
        n=2,
        params={"alpha": alpha},
        symbol=SpectralSymbol(
            phi_laplace=lambda s: _power(s, -alpha),
            psi_laplace=lambda s: _power(s, 2.0 - alpha),
            n=2,
        ),
        regime=Regime.DIFFUSIVE,
        k_time=lambda z: np.asarray(z, dtype=float) ** (1.0 - alpha) / g2a,
        kappa_time=lambda z: np.asarray(z, dtype=float) ** (alpha - 1.0) / ga,
        k_singularity=alpha - 1.0,
        kappa_singularity=1.0 - alpha,
    )


def _caputo_fabrizio(alpha):
    alpha = _check_alpha(alpha, "caputo-fabrizio")
    a = alpha / (1.0 - alpha)
    return SoninePair(
        name="caputo-fabrizio",
        n=1,
        params={"alpha": alpha},
        symbol=SpectralSymbol(
            phi_laplace=lambda s: 1.0 / (np.asarray(s, dtype=complex) + a),
            psi_laplace=lambda s: np.asarray(s, dtype=complex) / (np.asarray(s, dtype=complex) + a),
            psi_at_infinity=1.0,
        ),
        regime=Regime.DIFFUSIVE,
        kappa_time=lambda z: np.exp(-a * np.asarray(z, dtype=float)),
    )


def _atangana_baleanu(alpha):
    alpha = _check_alpha(alpha, "atangana-baleanu")
    a = alpha / (1.0 - alpha)

    def phi(s):
        sa = _power(s, alpha)
        return sa / (np.asarray(s, dtype=complex) * (sa + a))

    return SoninePair(
        name="atangana-baleanu",
        n=1,
        params={"alpha": alpha},
        symbol=SpectralSymbol(
            phi_laplace=phi,
            psi_laplace=lambda s: _power(s, alpha) / (_power(s, alpha) + a),
            psi_at_infinity=1.0,
        ),
        regime=Regime.DIFFUSIVE,
    )


def _bessel(gamma):
    gamma = float(gamma)
    if not gamma > 0:
        raise ValueError(f"bessel-klein-gordon needs gamma > 0, got {gamma}")

    def psi(s):
        s = np.asarray(s, dtype=complex)
        return np.exp(-gamma / s)

    return SoninePair(
        name="bessel-klein-gordon",
        n=1,
        params={"gamma": gamma},
        symbol=SpectralSymbol(
            phi_laplace=lambda s: psi(s) / np.asarray(s, dtype=complex),
            psi_laplace=psi,
            psi_at_infinity=1.0,
        ),
        regime=Regime.OSCILLATORY,
        kappa_time=lambda z: special.j0(2.0 * np.sqrt(gamma * np.asarray(z, dtype=float))),
    )


def _classical():
    return SoninePair(
        name="classical",
        n=1,
        params={},
        symbol=SpectralSymbol(
            phi_laplace=lambda s: np.ones_like(np.asarray(s, dtype=complex)),
            psi_laplace=lambda s: np.asarray(s, dtype=complex),
        ),
        regime=Regime.DIFFUSIVE,
        k_time=lambda z: np.ones_like(np.asarray(z, dtype=float)),
    )


def distributed_symbol(b: OrderDistribution, nodes: int = 64, method: str = "auto") -> SpectralSymbol:
    """Symbol ``Phi_b(s) = int_0^1 b(alpha) s**(alpha-1) d alpha``.

    ``method="auto"`` uses the closed form ``(s-1)/(s ln s)`` for the uniform
    density and Gauss-Legendre quadrature otherwise; ``"quadrature"`` forces
    the quadrature path.
    """
    if method not in ("auto", "quadrature", "closed"):
        raise ValueError(f"unknown method {method!r}")
    if method == "closed" and b.kind != "uniform":
        raise ValueError("closed form exists only for the uniform density")

    if b.kind == "uniform" and method != "quadrature":

        def psi(s):
            s = np.asarray(s, dtype=complex)
            d = s - 1.0
            near = np.abs(d) < 1e-6
            safe = np.where(near, 2.0, s)
            out = (safe - 1.0) / np.log(safe)
            series = 1.0 + d / 2.0 - d * d / 12.0
            return np.where(near, series, out)

    else:
        al, wt = b.rule(nodes)

        def psi(s):
            s = np.asarray(s, dtype=complex)
            return np.tensordot(wt, np.power(s[None, ...], al.reshape((-1,) + (1,) * s.ndim)), axes=1)

    return SpectralSymbol(
        phi_laplace=lambda s: psi(s) / np.asarray(s, dtype=complex),
        psi_laplace=psi,
    )


def _distributed(distribution=None, nodes=64, method="auto"):
    b = distribution if distribution is not None else uniform_orders()
    al, wt = b.rule(nodes)
    comps = tuple((float(w), _power_law(float(a))) for a, w in zip(al, wt))
    coef = np.array([w / math.gamma(1.0 - a) for a, w in zip(al, wt)])

    def kappa(z):
        z = np.asarray(z, dtype=float)
        return np.tensordot(coef, z[None, ...] ** (-al.reshape((-1,) + (1,) * z.ndim)), axes=1)

    return SoninePair(
        name="distributed-order",
        n=1,
        params={"distribution": b.kind, "nodes": nodes},
        symbol=distributed_symbol(b, nodes, method),
        regime=Regime.DIFFUSIVE,
        kappa_time=kappa,
        kappa_singularity=float(al.max()),
        components=comps,
    )


def temper_kernel(pair: SoninePair, rate: float) -> SoninePair:
    """Multiply both kernels by ``exp(-rate z)``.

    The integral symbol becomes ``1/Psi(s + rate)``; the derivative is its
    inverse, ``Psi(s + rate)``, matching the operator obtained with the weight
    ``exp(rate t)``.  Lévy densities are tempered as well and gain the killing
    rate ``Psi(rate)``.
    """
    rate = float(rate)
    if rate < 0:
        raise ValueError("tempering rate must be nonnegative")
    if rate == 0.0:
        return pair
    if pair.k_time is None and pair.kappa_time is None:
        raise UnsupportedFormError(f"{pair.name} has no closed-form kernels to temper")
    sym = pair.symbol
    n = pair.n

    def psi_t(s):
        return sym.psi_laplace(np.asarray(s, dtype=complex) + rate)

    def phi_t(s):
        s = np.asarray(s, dtype=complex)
        return psi_t(s) / s**n

    def damp(f):
        if f is None:
            return None
        return lambda z: np.exp(-rate * np.asarray(z, dtype=float)) * f(z)

    levy = None
    if pair.levy is not None:
        base = pair.levy
        alpha = pair.params.get("alpha")
        shift = float(np.real(sym.psi_laplace(complex(rate))))
        lam_total = pair.tempering + rate
        if pair.name in ("power-law", "tempered-power-law") and alpha is not None:
            tail = _tempered_power_tail(alpha, lam_total)
        else:
            tail = _numeric_tail(damp(base.eval))
        levy = LevyDensity(
            eval=damp(base.eval),
            integrability_exponent=base.integrability_exponent,
            tail=tail,
            killing=base.killing + shift,
        )
    name = pair.name if pair.name.startswith("tempered-") else "tempered-" + pair.name
    params = dict(pair.params)
    params["rate"] = pair.tempering + rate
    return replace(
        pair,
        name=name,
        params=params,
        symbol=SpectralSymbol(phi_t, psi_t, n, sym.psi_at_infinity),
        k_time=damp(pair.k_time),
        kappa_time=damp(pair.kappa_time),
        levy=levy,
        tempering=pair.tempering + rate,
        components=tuple((w, temper_kernel(c, rate)) for w, c in pair.components),
    )


def _tempered_power_tail(alpha, lam):
    g1a = math.gamma(1.0 - alpha)

    def tail(z):
        x = lam * np.asarray(z, dtype=float)
        return lam**alpha * (x ** (-alpha) * np.exp(-x) - g1a * special.gammaincc(1.0 - alpha, x)) / g1a

    return tail


def _numeric_tail(g):
    def tail(z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return np.array([integrate.quad(g, zi, np.inf, limit=200)[0] for zi in z])

    return tail


def make_kernel(name: str, **params) -> SoninePair:
    """Construct a member of the kernel zoo.

    ``power-law``/``caputo-fabrizio``/``atangana-baleanu``/``power-law-order2``
    take ``alpha`` in (0, 1); ``tempered-power-law`` additionally ``rate``;
    ``bessel-klein-gordon`` takes ``gamma > 0``; ``distributed-order`` takes an
    optional ``distribution`` (:class:`OrderDistribution`), ``nodes`` and
    ``method``; ``classical`` is the first derivative.
    """
    if name == "power-law":
        return _power_law(params.get("alpha", 0.5))
    if name == "tempered-power-law":
        return temper_kernel(_power_law(params.get("alpha", 0.5)), params.get("rate", 1.0))
    if name == "caputo-fabrizio":
        return _caputo_fabrizio(params.get("alpha", 0.5))
    if name == "atangana-baleanu":
        return _atangana_baleanu(params.get("alpha", 0.5))
    if name == "distributed-order":
        return _distributed(params.get("distribution"), params.get("nodes", 64), params.get("method", "auto"))
    if name == "bessel-klein-gordon":
        return _bessel(params.get("gamma", 1.0))
    if name == "classical":
        return _classical()
    if name == "power-law-order2":
        return _power_law_order2(params.get("alpha", 0.5))
    raise ValueError(f"unknown kernel {name!r}; expected one of {', '.join(KERNEL_NAMES)}")


def eval_kernel(pair: SoninePair, which: str, z):
    """Pointwise value of ``k`` or ``kappa``.

    ``z = 0`` is accepted only for kernels that are regular at the origin.
    """
    if which in ("k",):
        fn, p = pair.k_time, pair.k_singularity
    elif which in ("kappa", "κ"):
        fn, p = pair.kappa_time, pair.kappa_singularity
    else:
        raise ValueError("which must be 'k' or 'kappa'")
    if fn is None:
        raise UnsupportedFormError(
            f"{pair.name} has no closed time form for {which}; use the spectral route"
        )
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or (p > 0 and np.any(z == 0)):
        raise OutOfRangeError("kernel argument must be positive")
    out = fn(z)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SonineReport:
    t: np.ndarray
    values: np.ndarray
    target: np.ndarray
    errors: np.ndarray
    max_error: float
    passed: bool


def sonine_target(pair: SoninePair, t):
    t = np.asarray(t, dtype=float)
    return np.exp(-pair.tempering * t) * t ** (pair.n - 1) / math.factorial(pair.n - 1)


def dirichlet_convolution(pair: SoninePair, t: float, nodes: int = 40) -> float:
    """``int_0^t k(t - tau) kappa(tau) d tau`` split at ``t/2`` with Gauss-Jacobi halves."""
    if pair.k_time is None or pair.kappa_time is None:
        raise UnsupportedFormError(f"{pair.name} lacks a closed form for k or kappa")
    k, kap = pair.k_time, pair.kappa_time
    pk, pkap = pair.k_singularity, pair.kappa_singularity
    half = t / 2.0
    left = singular_panel(lambda z: z**pkap * kap(z) * k(t - z), half, pkap, nodes)
    right = singular_panel(lambda z: z**pk * k(z) * kap(t - z), half, pk, nodes)
    val = float(left + right)
    if not np.isfinite(val):
        raise ConvergenceError(f"Dirichlet convolution is not finite at t={t}", t=t)
    return val


def check_sonine_condition(pair: SoninePair, t_points, tol: float = 1e-8, nodes: int = 40) -> SonineReport:
    """Compare ``(k * kappa)(t)`` with ``exp(-lam t) t**(n-1)/(n-1)!``."""
    t = np.asarray(t_points, dtype=float)
    if np.any(t <= 0):
        raise OutOfRangeError("t_points must be positive")
    vals = np.array([dirichlet_convolution(pair, ti, nodes) for ti in t])
    target = sonine_target(pair, t)
    err = np.abs(vals - target)
    return SonineReport(t, vals, target, err, float(err.max()), bool(err.max() < tol))


def laplace_numeric(f, p: float, s: float, width: float = 1.0) -> float:
    """Laplace transform of ``f`` (``~ z**(-p)`` at 0) at real ``s > 0``."""
    head = singular_panel(lambda z: z**p * f(z) * np.exp(-s * z), min(width, 1.0), p, 40)
    stop = max(1.0, 45.0 / s)
    z, w = panel_nodes(min(width, 1.0), stop, width, 20)
    return float(head + np.sum(w * f(z) * np.exp(-s * z)))


def _kernel_laplace(pair: SoninePair, which: str, s: float) -> float:
    if pair.components:
        return sum(w * _kernel_laplace(c, which, s) for w, c in pair.components)
    if which == "k":
        return laplace_numeric(pair.k_time, pair.k_singularity, s)
    return laplace_numeric(pair.kappa_time, pair.kappa_singularity, s)


@dataclass(frozen=True)
class DualityReport:
    kernel: str
    s: np.ndarray
    numeric: np.ndarray
    expected: np.ndarray
    rel_errors: np.ndarray
    max_rel_error: float


def check_symbol_duality(pair: SoninePair, s_values=(0.5, 1.0, 2.0, 5.0)) -> DualityReport:
    """Numerically transform the closed-form kernel and compare with the symbol.

    Uses ``k`` (expected ``1/Psi(s)``) when available, otherwise ``kappa``
    (expected ``Phi(s)``).
    """
    s = np.asarray(s_values, dtype=float)
    if pair.k_time is not None:
        which = "k"
        num = np.array([_kernel_laplace(pair, "k", si) for si in s])
        exp = np.real(1.0 / pair.symbol.psi_laplace(s.astype(complex)))
    elif pair.kappa_time is not None:
        which = "kappa"
        num = np.array([_kernel_laplace(pair, "kappa", si) for si in s])
        exp = np.real(pair.symbol.phi_laplace(s.astype(complex)))
    else:
        raise UnsupportedFormError(f"{pair.name} has no closed-form kernel")
    rel = np.abs(num - exp) / np.abs(exp)
    return DualityReport(which, s, num, exp, rel, float(rel.max()))


def levy_density(pair: SoninePair) -> LevyDensity:
    """Lévy density of a (tempered) power-law pair."""
    if pair.levy is None:
        raise NoLevyRepresentationError(f"{pair.name} has no Lévy density available")
    return pair.levy
