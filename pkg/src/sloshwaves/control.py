"""Synthesis of localized source controls by penalized dual least squares.

Given initial data, a target pair [g0, g1], a horizon T, and a spatial
window I, find v(t, x) supported on I such that phi_tt + A phi = v 1_I
steers the state to within eps of the target at t = T.  The build is
discretize-then-optimize: the backward midpoint sweep is the exact
algebraic transpose of the forward source-to-terminal map, so the discrete
duality identity

    sum_k dt (zbar_k, vbar_k)_{L^2} = (g0, phi_t(T))_{L^2} + (g1, phi(T))_{L^2}

holds to rounding (zbar, vbar are per-step interval averages), and the CG
gradient is exact.  Misfits are measured in the product of the half-order
energy norm for phi and plain L^2 for phi_t; controls in L^2(0,T; L^2_w).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import chebyshev as cheb
from .evolution import WaveState
from .galerkin import sample_load_matrix
from .waveop import h12_weights
from ._kernels import midpoint_sweep


@dataclass(frozen=True, eq=False)
class ControlWindow:
    """Open interval (lo, hi) in (-1, 1) with its node indicator mask."""
    lo: float
    hi: float
    grid: cheb.ChebGrid
    mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (-1.0 < self.lo < self.hi < 1.0):
            raise ValueError("window must satisfy -1 < lo < hi < 1")
        mask = (self.grid.x > self.lo) & (self.grid.x < self.hi)
        if mask.sum() < 3:
            raise ValueError("window covers fewer than 3 grid nodes; refine or widen")
        mask.flags.writeable = False
        object.__setattr__(self, "mask", mask)


@dataclass(eq=False)
class ControlSignal:
    """Node samples v(t_k, x_j) on a uniform time grid, zero outside the window."""
    times: np.ndarray
    values: np.ndarray
    window: ControlWindow

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.times.size, self.window.grid.n):
            raise ValueError("sample array must be (len(times), grid size)")
        if self.times.size < 2:
            raise ValueError("need at least two time levels")
        steps = np.diff(self.times)
        if not np.allclose(steps, steps[0], rtol=1e-12, atol=1e-12):
            raise ValueError("time grid must be uniform")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("samples must be finite")
        if np.any(self.values[:, ~self.window.mask] != 0.0):
            raise ValueError("signal has support outside the control window")
        self._norm2 = None

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    @property
    def norm2(self):
        """Squared L^2(0,T; L^2_w) norm: trapezoid in t of the w-weighted rule."""
        if self._norm2 is None:
            g = self.window.grid
            tau = np.full(self.times.size, self.dt)
            tau[0] = tau[-1] = 0.5 * self.dt
            rows = (np.pi / g.n) * ((self.values * g.w[None, :]) ** 2).sum(axis=1)
            self._norm2 = float(tau @ rows)
        return self._norm2


@dataclass(frozen=True, eq=False)
class TargetState:
    """Coefficients of the desired terminal pair [phi(T), phi_t(T)]."""
    g0: np.ndarray
    g1: np.ndarray

    def __post_init__(self):
        g0 = np.asarray(self.g0, dtype=float)
        g1 = np.asarray(self.g1, dtype=float)
        if g0.shape != g1.shape:
            raise ValueError("target coefficient lengths differ")
        if not (np.all(np.isfinite(g0)) and np.all(np.isfinite(g1))):
            raise ValueError("target coefficients must be finite")
        object.__setattr__(self, "g0", g0)
        object.__setattr__(self, "g1", g1)


@dataclass(eq=False)
class ControlResult:
    """Synthesized signal plus the optimizer trace.

    misfit_history[i] is the terminal misfit before iteration i of CG (so
    entry 0 is the v = 0 misfit and the last entry belongs to the returned
    signal); cost_history tracks the full penalized objective.  Reaching
    the iteration cap is reported through converged=False, not an error.
    """
    signal: ControlSignal
    misfit: float
    misfit_history: np.ndarray
    cost_history: np.ndarray
    iterations: int
    converged: bool


class _DiscreteControl:
    """Matrices of the discrete problem at fixed system, window, T, and steps."""

    def __init__(self, sys, window, T, nsteps):
        if window.grid.n != sys.n:
            raise ValueError("window grid does not match the Galerkin truncation")
        if nsteps < 1:
            raise ValueError("need at least one time step")
        self.sys = sys
        self.window = window
        self.nsteps = nsteps
        self.dt = T / nsteps
        g = window.grid
        self.tmat = np.cos(np.outer(np.arange(sys.n), g.theta))
        self.qmat = sample_load_matrix(sys.n)
        tau = np.full(nsteps + 1, self.dt)
        tau[0] = tau[-1] = 0.5 * self.dt
        self.rdiag = tau[:, None] * (np.pi / sys.n) * (g.w ** 2)[None, :]
        self.w1 = h12_weights(sys.n)
        lhs = sys.mass + (self.dt * self.dt / 4.0) * np.diag(sys.stiff)
        self.sinv = cho_solve(cho_factor(lhs), np.eye(sys.n))
        self._mch = cho_factor(sys.mass)

    def forward_terminal(self, values, a0=None, z0=None):
        """Terminal (a, adot) of the midpoint run driven by interval-averaged loads."""
        vbar = 0.5 * (values[: self.nsteps] + values[1 : self.nsteps + 1])
        loads = vbar @ self.qmat.T
        if a0 is None:
            a0 = np.zeros(self.sys.n)
        if z0 is None:
            z0 = np.zeros(self.sys.n)
        ak, zk, _ = midpoint_sweep(a0, z0, self.sinv, self.sys.stiff,
                                   loads, self.dt, self.nsteps, 0)
        return ak, zk

    def adjoint_midpoints(self, g0, g1):
        """Backward sweep from z(T) = g0, z_t(T) = -g1; interval averages of z.

        Row k is aligned with forward step k.  Because the sweep matrix is
        even in dt, this is the exact transpose of forward_terminal.
        """
        _, _, mids = midpoint_sweep(np.asarray(g0, dtype=float),
                                    -np.asarray(g1, dtype=float),
                                    self.sinv, self.sys.stiff, None,
                                    -self.dt, self.nsteps, 2)
        return mids[::-1]

    def misfit_gradient(self, ra, rz):
        """Euclidean gradient of (1/2)(|ra|_h12^2 + |rz|_M^2) wrt the node samples.

        The terminal residual seeds the adjoint at z(T) = rz,
        z_t(T) = -M^{-1} W1 ra; each step's contribution dt Q' zbar_k is
        split evenly between the two endpoint samples (the interval-average
        transpose).
        """
        g1 = cho_solve(self._mch, self.w1 * ra)
        zb = self.adjoint_midpoints(rz, g1)
        gam = self.dt * (zb @ self.qmat)
        c = np.zeros((self.nsteps + 1, self.sys.n))
        c[:-1] += 0.5 * gam
        c[1:] += 0.5 * gam
        return c

    def riesz(self, c):
        """Euclidean gradient to the L^2(0,T; L^2_w) one, restricted to the window."""
        out = c / self.rdiag
        out[:, ~self.window.mask] = 0.0
        return out

    def rinner(self, u, v):
        return float(np.sum(self.rdiag * u * v))

    def misfit2(self, ra, rz):
        return float(ra @ (self.w1 * ra) + rz @ self.sys.mass @ rz)


def solve_adjoint(target, T, dt, sys):
    """Integrate z_tt + A z = 0 backward from z(T) = g0, z_t(T) = -g1.

    Returns the trajectory as WaveStates in forward time order (t = 0 first).
    """
    nsteps = int(np.ceil(T / dt - 1e-12))
    lhs = sys.mass + (dt * dt / 4.0) * np.diag(sys.stiff)
    sinv = cho_solve(cho_factor(lhs), np.eye(sys.n))
    _, _, traj = midpoint_sweep(target.g0, -target.g1, sinv, sys.stiff,
                                None, -dt, nsteps, 1)
    return [WaveState(t=T - (nsteps - k) * dt, a=traj[nsteps - k, 0],
                      adot=traj[nsteps - k, 1]) for k in range(nsteps + 1)]


def duality_gap(v, target, sys):
    """Relative defect of the transpose identity for the signal v.

    LHS pairs the adjoint interval averages against those of v with the
    same one-grid product rule that builds the loads; RHS is
    (g0, phi_t(T)) + (g1, phi(T)) from the forward run with zero initial
    data.  Exact transposition makes this rounding-level.
    """
    nsteps = v.times.size - 1
    horizon = v.times[-1] - v.times[0]
    prob = _DiscreteControl(sys, v.window, horizon, nsteps)
    ak, zk = prob.forward_terminal(v.values)
    rhs = float(target.g0 @ sys.mass @ zk + target.g1 @ sys.mass @ ak)
    zb_nodes = prob.adjoint_midpoints(target.g0, target.g1) @ prob.tmat
    vbar = 0.5 * (v.values[:nsteps] + v.values[1:])
    g = v.window.grid
    lhs = prob.dt * float(np.sum((np.pi / g.n) * zb_nodes * vbar * g.w[None, :]))
    return abs(lhs - rhs) / max(abs(rhs), np.finfo(float).tiny)


def synthesize(init, target, window, T, dt, sys, eps, reg=0.0, max_iter=500):
    """Approximate-controllability synthesis by CG on the penalized objective.

    Minimizes J(v) = 1/2 |terminal(v) - target|^2 + reg/2 |v|^2 over signals
    supported on the window, starting from v = 0.  The initial state is
    removed up front by linearity (free forward run, target shifted), the
    misfit norm is the h12 x L^2 product, and the control norm is
    L^2(0,T; L^2_w).  Stops at misfit <= eps or after max_iter iterations;
    hitting the cap returns converged=False rather than raising.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if reg < 0:
        raise ValueError("penalty weight must be nonnegative")
    nsteps = int(round(T / dt))
    if nsteps < 1 or abs(nsteps * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError("dt must divide the horizon")
    prob = _DiscreteControl(sys, window, T, nsteps)

    free_a, free_z, _ = midpoint_sweep(init.a, init.adot, prob.sinv,
                                       sys.stiff, None, prob.dt, nsteps, 0)
    r0 = target.g0 - free_a
    r1 = target.g1 - free_z

    def evaluate(vcur):
        ak, zk = prob.forward_terminal(vcur)
        m2 = prob.misfit2(ak - r0, zk - r1)
        cost = 0.5 * m2 + 0.5 * reg * prob.rinner(vcur, vcur)
        return np.sqrt(m2), cost

    def hessian_apply(u):
        ak, zk = prob.forward_terminal(u)
        return prob.riesz(prob.misfit_gradient(ak, zk)) + reg * u

    v = np.zeros((nsteps + 1, sys.n))
    b = -prob.riesz(prob.misfit_gradient(-r0, -r1))
    r = b.copy()
    p = r.copy()
    rr = prob.rinner(r, r)
    # with reg = 0 the normal operator is only semidefinite; once the
    # residual reaches its rounding floor further steps amplify noise
    rr_floor = 1e-28 * rr

    mis, cost = evaluate(v)
    mis_hist = [mis]
    cost_hist = [cost]
    it = 0
    while mis > eps and it < max_iter and rr > rr_floor:
        hp = hessian_apply(p)
        curv = prob.rinner(p, hp)
        if curv <= 0:
            break
        alpha = rr / curv
        v += alpha * p
        r -= alpha * hp
        rr_next = prob.rinner(r, r)
        p = r + (rr_next / rr) * p
        rr = rr_next
        it += 1
        mis, cost = evaluate(v)
        mis_hist.append(mis)
        cost_hist.append(cost)

    v[:, ~window.mask] = 0.0
    signal = ControlSignal(times=np.arange(nsteps + 1) * prob.dt,
                           values=v, window=window)
    return ControlResult(signal=signal, misfit=mis,
                         misfit_history=np.asarray(mis_hist),
                         cost_history=np.asarray(cost_hist),
                         iterations=it, converged=bool(mis <= eps))


def gradient_check(v, target, window, T, dt, sys, reg=0.0,
                   ndirections=10, step=1e-2, seed=0):
    """Max relative error of the adjoint gradient against central differences.

    The objective is quadratic, so central differences are exact up to
    rounding and the check is sharp.  Directions are seeded and supported
    on the window.
    """
    nsteps = int(round(T / dt))
    prob = _DiscreteControl(sys, window, T, nsteps)
    vals = v.values if isinstance(v, ControlSignal) else np.asarray(v, dtype=float)

    def cost(u):
        ak, zk = prob.forward_terminal(u)
        m2 = prob.misfit2(ak - target.g0, zk - target.g1)
        return 0.5 * m2 + 0.5 * reg * prob.rinner(u, u)

    ak, zk = prob.forward_terminal(vals)
    grad = prob.riesz(prob.misfit_gradient(ak - target.g0, zk - target.g1)) + reg * vals

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(ndirections):
        d = np.zeros_like(vals)
        d[:, window.mask] = rng.standard_normal((vals.shape[0], int(window.mask.sum())))
        fd = (cost(vals + step * d) - cost(vals - step * d)) / (2.0 * step)
        an = prob.rinner(grad, d)
        worst = max(worst, abs(fd - an) / max(abs(fd), np.finfo(float).tiny))
    return worst


def manufactured_target(sys, window, T, nsteps, seed=0):
    """A provably reachable target: the forward image of a smooth known control.

    Draws decaying random terminal data, maps it through the adjoint and
    Riesz steps to a window-supported v*, and returns (target, v*) where
    target is the terminal state v* produces from rest.  Used by the
    synthesis tests and the CLI demo config.
    """
    rng = np.random.default_rng(seed)
    decay = np.exp(-np.arange(sys.n, dtype=float))
    eta0 = decay * rng.standard_normal(sys.n)
    eta1 = decay * rng.standard_normal(sys.n)
    prob = _DiscreteControl(sys, window, T, nsteps)
    vstar = prob.riesz(prob.misfit_gradient(eta0, eta1))
    ak, zk = prob.forward_terminal(vstar)
    signal = ControlSignal(times=np.arange(nsteps + 1) * prob.dt,
                           values=vstar, window=window)
    return TargetState(g0=ak, g1=zk), signal


def report_lines(result):
    """Key=value summary lines for a synthesis result."""
    return [
        f"converged={'true' if result.converged else 'false'}",
        f"iterations={result.iterations}",
        f"misfit={format(result.misfit, '.17g')}",
        f"control_norm2={format(result.signal.norm2, '.17g')}",
    ]


def write_signal(path, signal):
    """CSV export: column t then one column per grid node, 17 digits."""
    n = signal.window.grid.n
    header = "t," + ",".join(f"x_{j}" for j in range(n))
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for t, row in zip(signal.times, signal.values):
            fh.write(format(t, ".17g") + ","
                     + ",".join(format(x, ".17g") for x in row) + "\n")


def read_signal(path, window):
    """Read a signal written by write_signal back onto the given window."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != window.grid.n + 1:
        raise ValueError("column count does not match the window grid")
    return ControlSignal(times=data[:, 0], values=data[:, 1:], window=window)
