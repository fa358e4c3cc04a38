"""Galerkin discretization in the T-basis: resolvent solves and sloshing modes.

The weak form (phi, psi) + (A phi, psi) = (v, psi) with psi = T_0..T_{n-1}
reduces to (M + D) a = b with a closed-form mass matrix and the diagonal
stiffness D_nn = n pi / 2.  Nothing here is approximated that has an exact
expression: M, D, and the 1/w pairing are all closed form.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh

from . import chebyshev as cheb
from .waveop import winv_weights


def mass_matrix(n):
    """M_mn = int T_m T_n dx: zero for odd m+n, else 1/(1-(m+n)^2) + 1/(1-(m-n)^2)."""
    m = np.arange(n)
    s = (m[:, None] + m[None, :]).astype(float)
    d = np.abs(m[:, None] - m[None, :]).astype(float)
    with np.errstate(divide="ignore"):
        return np.where(s % 2 == 0, 1.0 / (1.0 - s ** 2) + 1.0 / (1.0 - d ** 2), 0.0)


@dataclass(frozen=True, eq=False)
class GalerkinSystem:
    """Truncation size, mass matrix, and the stiffness diagonal n pi / 2."""
    n: int
    mass: np.ndarray
    stiff: np.ndarray


def build_system(n):
    if n < 2:
        raise ValueError("need at least two basis functions")
    return GalerkinSystem(n=n, mass=mass_matrix(n), stiff=0.5 * np.pi * np.arange(n))


def sample_load_matrix(n):
    """Q with (Q v)_m = (pi/n) sum_j v(x_j) w(x_j) T_m(x_j), approximating int v T_m dx.

    One-grid product rule for pairing node samples against the basis.  Its
    transpose carries coefficient fields back to w-weighted node values,
    which is what makes discrete control dualities exact.
    """
    g = cheb.cheb_grid(n)
    return (np.pi / n) * np.cos(np.outer(np.arange(n), g.theta)) * g.w[None, :]


def load_from_values(sys, v):
    """Weak load b_m = int v T_m dx from grid samples of v.

    The samples are projected onto the polynomial basis first, so the load
    is exact whenever v is a polynomial of degree < n.  Loads with a 1/w
    component must use load_with_winv instead; sampling cannot see the
    weight and stalls near 1e-3 accuracy.
    """
    v = v.values if isinstance(v, cheb.GridFunction) else np.asarray(v, dtype=float)
    return sys.mass @ cheb.to_coeffs(v)


def load_with_winv(sys, smooth, winv_part):
    """Weak load of v = p(x) + s(x)/w(x) given T-coefficients of p and s.

    Exact: int T_n T_m / w dx is the diagonal winv_weights, so the singular
    component never passes through point samples.
    """
    b = np.zeros(sys.n)
    smooth = np.asarray(smooth, dtype=float)
    winv_part = np.asarray(winv_part, dtype=float)
    if smooth.size > sys.n or winv_part.size > sys.n:
        raise ValueError("load coefficients exceed truncation")
    pad = np.zeros(sys.n)
    pad[: smooth.size] = smooth
    b += sys.mass @ pad
    b[: winv_part.size] += winv_weights(sys.n)[: winv_part.size] * winv_part
    return b


def solve_resolvent(sys, v):
    """Solve (M + D) a = b for the weak solution of phi + A phi = v.

    v may be a GridFunction (projected via load_from_values) or a load
    vector built by either load constructor.  The residual of the SPD solve
    is checked against 1e-10 in the max norm; exceeding it means a broken
    build, hence ArithmeticError rather than a result.
    """
    if isinstance(v, cheb.GridFunction):
        b = load_from_values(sys, v)
    else:
        b = np.asarray(v, dtype=float)
        if b.size != sys.n:
            raise ValueError("load length does not match truncation")
    lhs = sys.mass + np.diag(sys.stiff)
    a = cho_solve(cho_factor(lhs), b)
    residual = np.max(np.abs(lhs @ a - b))
    if residual > 1e-10:
        raise ArithmeticError(f"resolvent residual {residual:.3e} exceeds 1e-10")
    return a


def weak_residual(sys, a, b):
    """Max norm of (M + D) a - b; how far a is from satisfying the weak form."""
    lhs = sys.mass + np.diag(sys.stiff)
    return float(np.max(np.abs(lhs @ np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """First k sloshing modes: values[i] ascending, vectors[:, i] coefficients.

    Vectors are L^2-orthonormal (that is, M-orthonormal) with the first
    coefficient above rounding noise made positive, so results are
    reproducible across runs and libraries.
    """
    values: np.ndarray
    vectors: np.ndarray


def eigenmodes(sys, k):
    """Solve D e = lambda M e and return the k lowest modes.

    lambda_0 = 0 with the constant mode; the rest are simple and strictly
    increasing.  Reduction through the Cholesky factor of M is fine at these
    sizes (M is well conditioned, cond ~ 3e2 at n = 256).
    """
    if k > sys.n:
        raise ValueError("cannot request more modes than basis functions")
    values, vectors = eigh(np.diag(sys.stiff), sys.mass)
    values = values[:k]
    vectors = vectors[:, :k].copy()
    for i in range(k):
        col = vectors[:, i]
        lead = col[np.abs(col) > 1e-8 * np.max(np.abs(col))][0]
        if lead < 0:
            vectors[:, i] = -col
    return EigenDecomposition(values=values, vectors=vectors)
