"""Fourth-order finite differences on uniform computational grids."""
from functools import lru_cache
from math import factorial

import numpy as np


@lru_cache(maxsize=None)
def stencil(offsets: tuple, order: int) -> np.ndarray:
    """Weights ``c`` with ``sum(c[j] * f(x + offsets[j] * h)) ~ h**order * f^(order)(x)``."""
    k = len(offsets)
    V = np.array([[o**i for o in offsets] for i in range(k)], dtype=float)
    rhs = np.zeros(k)
    rhs[order] = factorial(order)
    return np.linalg.solve(V, rhs)


_INTERIOR = (-2, -1, 0, 1, 2)
# one-sided: 5 points for first derivatives, 6 for second keeps fourth order
_LEFT = {1: ((0, 1, 2, 3, 4), (-1, 0, 1, 2, 3)), 2: ((0, 1, 2, 3, 4, 5), (-1, 0, 1, 2, 3, 4))}


def derivative(f: np.ndarray, h: float, order: int = 1) -> np.ndarray:
    """First or second derivative of grid values ``f`` with spacing ``h``."""
    f = np.asarray(f, dtype=float)
    n = f.size
    if n < 6:
        raise ValueError("need at least 6 nodes for fourth-order stencils")
    out = np.empty(n)
    c = stencil(_INTERIOR, order)
    # weights sum to zero, so differencing against the centre value costs
    # nothing and makes constants differentiate to exactly zero
    mid = f[2:-2]
    out[2:-2] = c[0] * (f[:-4] - mid) + c[1] * (f[1:-3] - mid) + c[3] * (f[3:-1] - mid) + c[4] * (f[4:] - mid)
    for i, offs in enumerate(_LEFT[order]):
        cl = stencil(offs, order)
        idx = np.array(offs) + i
        out[i] = np.dot(cl, f[idx] - f[i])
        # mirrored stencil at the right end; odd derivatives flip sign
        out[n - 1 - i] = (-1) ** order * np.dot(cl, f[n - 1 - idx] - f[n - 1 - i])
    return out / h**order
