"""Fixed-order Gauss rules used by the main computation paths."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=None)
def jacobi_rule(n: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1] for the weight ``z**(-p)``, ``p < 1``."""
    x, w = roots_jacobi(n, 0.0, -p)
    z = (1.0 + x) / 2.0
    return z, w * 2.0 ** (p - 1.0)


@lru_cache(maxsize=None)
def legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = roots_legendre(n)
    return (1.0 + x) / 2.0, w / 2.0


def singular_panel(smooth, length: float, p: float, n: int = 32):
    """``int_0^length z**(-p) smooth(z) dz`` by Gauss-Jacobi."""
    z, w = jacobi_rule(n, float(p))
    return length ** (1.0 - p) * np.sum(w * smooth(length * z), axis=-1)


def panel_nodes(a: float, b: float, width: float, n: int = 16):
    """Composite Gauss-Legendre nodes/weights on [a, b] with panels of ``width``."""
    count = max(1, int(np.ceil((b - a) / width)))
    edges = np.linspace(a, b, count + 1)
    z, w = legendre_rule(n)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + h[:, None] * z[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return nodes, weights
