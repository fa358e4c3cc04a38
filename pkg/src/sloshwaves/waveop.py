"""The non-local wave operator on (-1, 1) and the weighted norms around it.

The operator acts diagonally on first-kind Chebyshev coefficients,

    A phi = sum_{n>=1} n a_n T_n(x) / sqrt(1 - x^2),

which makes the coefficient path exact; a principal-value quadrature path
evaluates the defining singular integral directly and serves as an
independent oracle, never as the production route.  Constants are in the
kernel and the operator conserves the mean: int A phi dx = 0.
"""

import numpy as np
from numpy.polynomial.chebyshev import chebval

from . import chebyshev as cheb
from ._kernels import pv_plain, pv_subtracted


class WaveOperator:
    """Spectral truncation of the operator at n coefficients on cheb_grid(n)."""

    def __init__(self, n):
        if n < 1:
            raise ValueError("truncation must be positive")
        self.n = n
        self.grid = cheb.cheb_grid(n)

    def apply_spectral(self, a):
        """A phi at the grid nodes from coefficients, via the diagonal form."""
        a = np.asarray(a, dtype=float)
        na = np.arange(a.size) * a
        g = cheb.to_grid(na, self.grid)
        return cheb.GridFunction(g.values / self.grid.w, self.grid)

    def apply_quadrature(self, a, oversample=8):
        """A phi by principal-value quadrature of the singular integral.

        Substituting xi = cos z turns the integral into
        (1/pi) PV int_0^pi F(z) / (cos y - cos z) dz with
        F(z) = sin(z)^2 phi'(cos z) = sin z * sum_n n a_n sin(n z),
        evaluated at the grid angles y = theta_j.  The integration nodes
        (k+1/2) pi / Q with Q = 2*oversample*n interlace the evaluation
        angles exactly, and subtracting F(y) removes the pole, so the
        midpoint rule is spectrally accurate.
        """
        a = np.asarray(a, dtype=float)
        q = 2 * oversample * self.n
        h = np.pi / q
        zk = (np.arange(q) + 0.5) * h
        na = np.arange(a.size) * a
        fz = np.sin(zk) * (np.sin(np.outer(zk, np.arange(a.size))) @ na)
        fy = self.grid.w * (np.sin(np.outer(self.grid.theta, np.arange(a.size))) @ na)
        pv = pv_subtracted(self.grid.theta, zk, fz, fy, np.zeros(self.n), h, 0.0)
        return cheb.GridFunction(pv / self.grid.w, self.grid)

    def quad_form(self, a, b):
        """(A phi, psi)_{L^2} = (pi/2) sum_{n>=1} n a_n b_n, closed form.

        The elementwise product makes the swap symmetry bitwise exact.
        """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.size != b.size:
            raise ValueError("coefficient length mismatch")
        wts = 0.5 * np.pi * np.arange(a.size)
        return float(np.dot(wts, a * b))


def fht_winv(a, x):
    """(1/pi) PV int phi(xi) / (sqrt(1-xi^2)(x - xi)) dxi = -sum_{n>=1} a_n U_{n-1}(x).

    Closed-form path; x must be strictly inside (-1, 1).
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 1.0):
        raise ValueError("evaluation point must lie strictly inside (-1, 1)")
    out = np.zeros_like(x)
    ukm1 = np.ones_like(x)
    uk = 2.0 * x
    for n in range(1, a.size):
        out += a[n] * ukm1
        ukm1, uk = uk, 2.0 * x * uk - ukm1
    return -out if out.ndim else -float(out)


def fht_winv_quad(a, x, nodes=2048):
    """Quadrature oracle for fht_winv: theta substitution plus pole subtraction.

    (1/pi) PV int_0^pi phi(cos z)/(cos y - cos z) dz with phi(cos y)
    subtracted; the n=0 Glauert integral vanishes, so the subtraction is
    free and leaves a smooth integrand.  Where an integration node falls on
    top of y the quotient is replaced by its limit -phi'(cos y).
    """
    a = np.asarray(a, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(x) >= 1.0):
        raise ValueError("evaluation point must lie strictly inside (-1, 1)")
    h = np.pi / nodes
    zk = (np.arange(nodes) + 0.5) * h
    fz = chebval(np.cos(zk), a)
    fy = chebval(x, a)
    if a.size > 1:
        flimit = -chebval(x, cheb.deriv_coeffs(a))
    else:
        flimit = np.zeros_like(x)
    y = np.arccos(x)
    out = pv_subtracted(y, zk, fz, fy, flimit, h, 1e-9)
    return out if out.size > 1 else float(out[0])


def theta_midpoints(q):
    """Integration angles (k+1/2) pi / q, k = 0..q-1."""
    return (np.arange(q) + 0.5) * np.pi / q


def theta_interior(q):
    """Evaluation angles m pi / q, m = 1..q-1; interlaces theta_midpoints(q)."""
    return np.arange(1, q) * np.pi / q


def k_op(psi, q=None):
    """K psi (y) = (1/pi) PV int_0^pi sin(z) psi(z) / (cos y - cos z) dz.

    psi is sampled at theta_midpoints(q) with q even; values are returned at
    theta_interior(q), where the pole is straddled symmetrically and the
    plain midpoint rule converges.  Maps sin(ny) to cos(ny).
    """
    psi = np.asarray(psi, dtype=float)
    q = psi.size if q is None else q
    if q % 2:
        raise ValueError("theta grid size must be even")
    zk = theta_midpoints(q)
    return pv_plain(theta_interior(q), zk, np.sin(zk) * psi, np.pi / q)


def kstar_op(psi, q=None):
    """K* psi (y) = -(sin y / pi) PV int_0^pi psi(z) / (cos y - cos z) dz.

    Grid conventions as in k_op.  Maps cos(ny) to sin(ny) and constants to 0.
    """
    psi = np.asarray(psi, dtype=float)
    q = psi.size if q is None else q
    if q % 2:
        raise ValueError("theta grid size must be even")
    ym = theta_interior(q)
    return -np.sin(ym) * pv_plain(ym, theta_midpoints(q), psi, np.pi / q)


def inner_l2(a, b):
    """Plain L^2 pairing int phi psi dx of two coefficient vectors.

    The product is sampled on a grid of twice the combined size so the
    integral is exact for the represented polynomials.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size != b.size:
        raise ValueError("coefficient length mismatch")
    g = cheb.cheb_grid(2 * a.size)
    prod = cheb.to_grid(a, g).values * cheb.to_grid(b, g).values
    return cheb.quad_plain(cheb.GridFunction(prod, g))


def winv_weights(n):
    """Diagonal of the 1/w-weighted Gram matrix of T_0..T_{n-1}: pi, pi/2, ..."""
    wts = np.full(n, 0.5 * np.pi)
    wts[0] = np.pi
    return wts


def h12_weights(n):
    """Diagonal coefficient weights of the half-order energy norm.

    norm2_h12(a) = sum_n h12_weights[n] a_n^2: pi for n = 0,
    (pi/2)(1 + n) for n >= 1.
    """
    wts = 0.5 * np.pi * (1.0 + np.arange(n))
    wts[0] = np.pi
    return wts


def norm2_winv(a):
    """Squared 1/w-weighted L^2 norm, closed form from T-orthogonality."""
    a = np.asarray(a, dtype=float)
    return float(winv_weights(a.size) @ a ** 2)


def norm2_w(f):
    """Squared w-weighted L^2 norm of a grid function."""
    v = f.values if isinstance(f, cheb.GridFunction) else np.asarray(f, dtype=float)
    return float(cheb.quad_w(cheb.GridFunction(v * v, cheb.cheb_grid(v.size))))


def norm2_h12(a, op=None):
    """Squared half-order energy norm: norm2_winv(a) + (A phi, phi)."""
    a = np.asarray(a, dtype=float)
    if op is None:
        op = WaveOperator(a.size)
    return norm2_winv(a) + op.quad_form(a, a)


def mean_value(a):
    """phi_bar = (1/2) int phi dx, from the coefficient integrals."""
    a = np.asarray(a, dtype=float)
    return float(0.5 * (a @ cheb.integral_T(a.size)))
