"""Slow reference computations used only by the test suite.

The lattice Green's function G(x) of the simple random walk on Z^d is
computed by quadrature: switching to the rate-1 continuous-time walk leaves
the expected occupation times unchanged and factorizes the transition kernel
over coordinates, giving

    G(x) = integral over t >= 0 of prod_j exp(-t/d) I_{|x_j|}(t/d) dt,

with I the modified Bessel function; scipy's exponentially scaled ``ive``
evaluates each factor without overflow.  From G, the exact capacity of a
finite set follows from the last-exit decomposition: the escape
probabilities q solve [G(x_i - x_j)] q = 1 and Cap(A) = sum(q).  None of
this shares any mechanism with the Monte Carlo estimator under test.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import ive

_SPLIT = 40.0
_TAIL_START = 2.0e5


@lru_cache(maxsize=200_000)
def green_function(offsets: tuple[int, ...]) -> float:
    """G(x) for the simple random walk on Z^d, d = len(offsets) >= 3."""
    d = len(offsets)
    if d < 3:
        raise ValueError("Green's function only defined for transient d >= 3")
    orders = tuple(abs(int(o)) for o in offsets)

    def integrand(t: float) -> float:
        value = 1.0
        for order in orders:
            value *= ive(order, t / d)
        return value

    head, _ = quad(integrand, 0.0, _SPLIT, limit=200)
    body, _ = quad(integrand, _SPLIT, _TAIL_START, limit=400)
    # beyond _TAIL_START the integrand is flat in x and follows the local
    # limit value (d / (2 pi t))^{d/2}; integrate that tail analytically
    tail = (d / (2.0 * math.pi)) ** (d / 2.0) * _TAIL_START ** (1.0 - d / 2.0) / (
        d / 2.0 - 1.0
    )
    return head + body + tail


def exact_capacity(points: np.ndarray) -> float:
    """Capacity of a finite set by solving the equilibrium-measure system."""
    pts = np.unique(np.asarray(points, dtype=np.int64), axis=0)
    m = pts.shape[0]
    matrix = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            diff = tuple(sorted(abs(int(c)) for c in pts[i] - pts[j]))
            matrix[i, j] = green_function(diff)
    escape = np.linalg.solve(matrix, np.ones(m))
    return float(escape.sum())
