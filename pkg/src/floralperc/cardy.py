"""Continuum reference on the unit equilateral triangle.

Corners 0, 1 and exp(i*pi/3).  Side A is the right side, B the left, C the
bottom; each h vanishes on its own side and is one at the opposite corner.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT3 = np.sqrt(3.0)
TAU = np.exp(2j * np.pi / 3)
_EPS = 1e-12


def in_triangle(x, y, tol=_EPS) -> np.ndarray:
    x, y = np.asarray(x, float), np.asarray(y, float)
    return (y >= -tol) & (y <= SQRT3 * x + tol) & (y <= SQRT3 * (1 - x) + tol)


def h_triple(x, y):
    """(h_A, h_B, h_C) at points of the closed triangle; arrays broadcast."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if not np.all(in_triangle(x, y)):
        raise ValueError("point outside triangle")
    hA = 1 - (x + y / SQRT3)
    hB = x - y / SQRT3
    hC = 2 * y / SQRT3
    return hA, hB, hC


def harmonic_triple_residual(h: float, field=None, n: int = 40) -> float:
    """Max discrete Cauchy-Riemann residual of F = h_A + (i/sqrt3)(h_B - h_C).

    Central differences on a square grid of spacing ``h`` inside the
    triangle; ``field(x, y) -> (hA, hB, hC)`` replaces the exact triple.
    """
    if h <= 0:
        raise ValueError("grid spacing must be positive")
    field = field or (lambda x, y: h_triple(x, y))
    xs = 0.5 + h * (np.arange(n) - n / 2)
    ys = SQRT3 / 6 + h * (np.arange(n) - n / 2)
    X, Yg = np.meshgrid(xs, ys)
    pts = in_triangle(X - h, Yg - h) & in_triangle(X + h, Yg + h) & in_triangle(X - h, Yg + h) & in_triangle(X + h, Yg - h)
    X, Yg = X[pts], Yg[pts]

    def F(x, y):
        a, b, c = field(x, y)
        return a + 1j / SQRT3 * (b - c)

    dFdx = (F(X + h, Yg) - F(X - h, Yg)) / (2 * h)
    dFdy = (F(X, Yg + h) - F(X, Yg - h)) / (2 * h)
    # analytic iff dF/dy = i dF/dx
    return float(np.max(np.abs(dFdy - 1j * dFdx))) if X.size else 0.0


@dataclass
class FieldError:
    max_abs: float
    l2: float
    max_stderr: float
    n_used: int
    n_excluded: int
    max_abs_excluded: float


def field_error(z, values, which: str, stderr=None, N: int | None = None, margin: float = 2.0) -> FieldError:
    """Errors of estimated values at unit-scale points ``z`` against h_which.

    Points within ``margin / N`` of the boundary are excluded and reported
    separately.
    """
    z = np.asarray(z, complex)
    values = np.asarray(values, float)
    if z.size == 0:
        raise ValueError("empty field")
    idx = "ABC".index(which)
    ref = h_triple(z.real, z.imag)[idx]
    err = np.abs(values - ref)
    if N:
        d = np.minimum.reduce([z.imag, (SQRT3 * z.real - z.imag) / 2, (SQRT3 * (1 - z.real) - z.imag) / 2])
        keep = d >= margin / N - _EPS
    else:
        keep = np.ones(z.shape, bool)
    se = np.zeros_like(values) if stderr is None else np.asarray(stderr, float)
    used = err[keep]
    return FieldError(
        max_abs=float(used.max()) if used.size else float("nan"),
        l2=float(np.sqrt(np.mean(used**2))) if used.size else float("nan"),
        max_stderr=float(se[keep].max()) if used.size else 0.0,
        n_used=int(keep.sum()),
        n_excluded=int((~keep).sum()),
        max_abs_excluded=float(err[~keep].max()) if (~keep).any() else 0.0,
    )
