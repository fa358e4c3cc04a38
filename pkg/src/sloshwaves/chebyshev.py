"""Chebyshev grids, transforms, and weighted quadrature on (-1, 1).

Coefficient vectors are plain 1-D float arrays in the first-kind basis,
phi(x) = sum_n a[n] T_n(x).  Grid values live on the Gauss-Chebyshev points
x_j = cos((2j+1) pi / (2N)), which are interior, so the weights
w(x) = sqrt(1-x^2) and 1/w never blow up at a node.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dct


@dataclass(frozen=True, eq=False)
class ChebGrid:
    """Gauss-Chebyshev grid: theta_j = (2j+1) pi / (2n), x_j = cos(theta_j).

    `w` holds sqrt(1 - x_j^2) = sin(theta_j).  Nodes are strictly decreasing
    in j and symmetric about 0.  Instances are cached; treat arrays as
    read-only.
    """
    n: int
    theta: np.ndarray
    x: np.ndarray
    w: np.ndarray


@lru_cache(maxsize=None)
def cheb_grid(n):
    if n < 1:
        raise ValueError("grid size must be positive")
    theta = (2 * np.arange(n) + 1) * np.pi / (2 * n)
    x = np.cos(theta)
    grid = ChebGrid(n=n, theta=theta, x=x, w=np.sin(theta))
    grid.theta.flags.writeable = False
    grid.x.flags.writeable = False
    grid.w.flags.writeable = False
    return grid


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values of a function at the nodes of a ChebGrid."""
    values: np.ndarray
    grid: ChebGrid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError("value count does not match grid size")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        object.__setattr__(self, "values", v)


def _values(f):
    return f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)


def _grid_of(f):
    if isinstance(f, GridFunction):
        return f.grid
    return cheb_grid(len(f))


def eval_T(n, x):
    """T_n(x) by the three-term recurrence. Accepts scalar or array x in [-1,1]."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise ValueError("argument outside [-1, 1]")
    tkm1 = np.ones_like(x)
    if n == 0:
        return tkm1 if tkm1.ndim else float(tkm1)
    tk = x.copy()
    for _ in range(n - 1):
        tkm1, tk = tk, 2.0 * x * tk - tkm1
    return tk if tk.ndim else float(tk)


def eval_U(n, x):
    """U_n(x) by recurrence; the endpoint values are the limits (n+1)(+-1)^n."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise ValueError("argument outside [-1, 1]")
    ukm1 = np.ones_like(x)
    if n == 0:
        return ukm1 if ukm1.ndim else float(ukm1)
    uk = 2.0 * x
    for _ in range(n - 1):
        ukm1, uk = uk, 2.0 * x * uk - ukm1
    return uk if uk.ndim else float(uk)


def to_coeffs(f, method="dct"):
    """Coefficients a_n = (2 - delta_n0)/N sum_j f(x_j) cos(n theta_j).

    Exact for polynomials of degree < N.  method='dct' uses the fast cosine
    transform, method='direct' the O(N^2) sum; they agree to rounding and
    the tests cross-check them.
    """
    v = _values(f)
    n = v.size
    if method == "dct":
        a = dct(v, type=2) / (2.0 * n)
        a[1:] *= 2.0
        return a
    if method == "direct":
        grid = _grid_of(f) if isinstance(f, GridFunction) else cheb_grid(n)
        modes = np.arange(n)
        a = (np.cos(np.outer(modes, grid.theta)) @ v) * (2.0 / n)
        a[0] *= 0.5
        return a
    raise ValueError("method must be 'dct' or 'direct'")


def to_grid(a, grid):
    """Evaluate sum a_n T_n at the grid nodes. Inverse of to_coeffs there."""
    a = np.asarray(a, dtype=float)
    if isinstance(grid, int):
        grid = cheb_grid(grid)
    if a.size > grid.n:
        raise ValueError("more coefficients than grid points")
    half = np.zeros(grid.n)
    half[: a.size] = a
    half[1:] *= 0.5
    return GridFunction(values=dct(half, type=3), grid=grid)


def deriv_coeffs(a):
    """Coefficients of phi' from those of phi, by the backward recurrence."""
    a = np.asarray(a, dtype=float)
    n = a.size
    if n <= 1:
        return np.zeros(max(n - 1, 1))
    b = np.zeros(n - 1)
    b[n - 2] = 2.0 * (n - 1) * a[n - 1]
    for k in range(n - 2, 0, -1):
        prev = b[k + 1] if k + 1 <= n - 2 else 0.0
        b[k - 1] = prev + 2.0 * k * a[k]
    b[0] *= 0.5
    return b


def quad_winv(f):
    """int f(x)/sqrt(1-x^2) dx by the N-point Gauss rule (pi/N) sum f(x_j).

    Exact for polynomial f of degree <= 2N-1.
    """
    v = _values(f)
    return np.pi / v.size * v.sum()


def quad_w(f):
    """int f(x) sqrt(1-x^2) dx = (pi/N) sum f(x_j)(1 - x_j^2)."""
    v = _values(f)
    g = _grid_of(f)
    return np.pi / v.size * np.sum(v * g.w ** 2)


def integral_T(n):
    """Vector of int T_m dx for m < n: 2/(1-m^2) for even m, 0 for odd m."""
    m = np.arange(n)
    out = np.zeros(n)
    even = m % 2 == 0
    out[even] = 2.0 / (1.0 - m[even].astype(float) ** 2)
    return out


def quad_plain(f):
    """int f dx, computed as sum_n a_n int T_n dx with a = to_coeffs(f).

    Exact for polynomial f of degree < N.  Going through coefficients keeps
    the rule spectrally accurate; weighting the samples by w directly would
    only be O(N^-2) because w is not a polynomial.
    """
    a = to_coeffs(f)
    return float(a @ integral_T(a.size))
