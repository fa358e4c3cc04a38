"""Time integration of phi_tt + A phi = f with an energy ledger.

The workhorse is the implicit midpoint rule on the Galerkin system
M a'' + D a = b.  Midpoint conserves the quadratic invariant
E_cons = adot' M adot + a' D a of the homogeneous system exactly (up to
the linear solver), which turns conservation into a machine test, and it
is time reversible.  An explicit Stormer-Verlet stepper is provided as an
independent cross-check path.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh

from . import chebyshev as cheb
from .galerkin import sample_load_matrix
from ._kernels import midpoint_sweep


@dataclass
class WaveState:
    """Coefficients of [phi, phi_t] at time t."""
    t: float
    a: np.ndarray
    adot: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.adot = np.asarray(self.adot, dtype=float)
        if self.a.shape != self.adot.shape:
            raise ValueError("phi and phi_t coefficient lengths differ")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.adot))):
            raise ValueError("state coefficients must be finite")


@dataclass
class EnergyRecord:
    """t, E_total = |phi|^2 + |phi_t|^2 + (A phi, phi), and the conserved
    part E_cons = |phi_t|^2 + (A phi, phi) (plain L^2 norms)."""
    t: float
    total: float
    conserved: float


class ZeroRhs:
    """Homogeneous problem, f = 0."""


class LipschitzRhs:
    """Pointwise nonlinearity f(phi) with |f(s)| <= c |s|.

    f is applied on the grid and projected back to coefficients.  The bound
    is spot-checked on a sample of the real line at construction.
    """

    def __init__(self, f, c):
        if c <= 0:
            raise ValueError("Lipschitz constant must be positive")
        s = np.linspace(-3.0, 3.0, 61)
        if np.any(np.abs(f(s)) > c * np.abs(s) + 1e-12):
            raise ValueError("|f(s)| <= c|s| fails on sample points")
        self.f = f
        self.c = c


class SourceRhs:
    """Time-dependent source v(t, x) 1_I from a ControlSignal."""

    def __init__(self, signal):
        self.signal = signal


class StepConvergenceError(RuntimeError):
    """Fixed-point iteration of an implicit step failed to converge."""

    def __init__(self, residual, iterations):
        super().__init__(f"step stalled at residual {residual:.3e} after {iterations} iterations")
        self.residual = residual
        self.iterations = iterations


class MidpointStepper:
    """Implicit midpoint for M a'' + D a = b at fixed step dt.

    Each step solves (M + dt^2/4 D) delta = dt (b_mid - D (a + dt/2 adot)),
    then adot += delta and a += dt/2 (adot_old + adot_new).  For linear
    loads this is one application of the cached inverse; a Lipschitz
    right-hand side closes the step by fixed-point iteration
    (tol 1e-12, at most 50 sweeps).  dt < 0 runs the same scheme backward.
    """

    def __init__(self, sys, dt):
        if dt == 0:
            raise ValueError("dt must be nonzero")
        self.sys = sys
        self.dt = dt
        lhs = sys.mass + (dt * dt / 4.0) * np.diag(sys.stiff)
        self.sinv = cho_solve(cho_factor(lhs), np.eye(sys.n))
        self._qmat = None
        self._to_grid_matrix = None

    def _load_matrix(self):
        if self._qmat is None:
            self._qmat = sample_load_matrix(self.sys.n)
        return self._qmat

    def _nonlinear_load(self, rhs, amid):
        if self._to_grid_matrix is None:
            g = cheb.cheb_grid(self.sys.n)
            self._to_grid_matrix = np.cos(np.outer(g.theta, np.arange(self.sys.n)))
        vals = rhs.f(self._to_grid_matrix @ amid)
        return self.sys.mass @ cheb.to_coeffs(vals)

    def step(self, state, rhs=ZeroRhs()):
        dt = self.dt
        a, z = state.a, state.adot
        if isinstance(rhs, LipschitzRhs):
            delta = np.zeros(self.sys.n)
            base = a + 0.5 * dt * z
            for it in range(50):
                amid = base + 0.25 * dt * delta
                bmid = self._nonlinear_load(rhs, amid)
                new = self.sinv @ (dt * (bmid - self.sys.stiff * base))
                shift = np.max(np.abs(new - delta))
                delta = new
                if shift <= 1e-12:
                    break
            else:
                raise StepConvergenceError(shift, 50)
        else:
            bmid = self._source_load(rhs, state.t)
            rhsvec = -self.sys.stiff * (a + 0.5 * dt * z)
            if bmid is not None:
                rhsvec = rhsvec + bmid
            delta = self.sinv @ (dt * rhsvec)
        znew = z + delta
        anew = a + 0.5 * dt * (z + znew)
        return WaveState(t=state.t + dt, a=anew, adot=znew)

    def _source_load(self, rhs, t):
        if isinstance(rhs, ZeroRhs) or rhs is None:
            return None
        if isinstance(rhs, SourceRhs):
            sig = rhs.signal
            k = int(round((t - sig.times[0]) / self.dt))
            if not np.isclose(sig.times[0] + k * self.dt, t, atol=1e-9 * max(1.0, abs(t))):
                raise ValueError("source samples are not aligned with the step grid")
            vmid = 0.5 * (sig.values[k] + sig.values[k + 1])
            return self._load_matrix() @ vmid
        raise TypeError(f"unsupported right-hand side {type(rhs).__name__}")


def energy(state, sys):
    """Energy ledger entry from the closed quadratic forms."""
    a, z = state.a, state.adot
    cons = float(z @ sys.mass @ z + a @ (sys.stiff * a))
    return EnergyRecord(t=state.t, total=cons + float(a @ sys.mass @ a), conserved=cons)


def simulate(state0, T, dt, rhs, sys):
    """Advance ceil(T/dt) midpoint steps, recording the energy each step.

    Returns (states, energies); states[0] is state0.  dt may be negative
    for backward runs (then T must be too).
    """
    if T == 0 or dt == 0 or (T > 0) != (dt > 0):
        raise ValueError("T and dt must be nonzero and of equal sign")
    nsteps = int(np.ceil(abs(T) / abs(dt) - 1e-12))
    stepper = MidpointStepper(sys, dt)
    if isinstance(rhs, LipschitzRhs):
        states = [state0]
        for _ in range(nsteps):
            states.append(stepper.step(states[-1], rhs))
    else:
        loads = None
        if isinstance(rhs, SourceRhs):
            v = rhs.signal.values
            if v.shape[0] < nsteps + 1:
                raise ValueError("source signal shorter than the run")
            loads = 0.5 * (v[:nsteps] + v[1 : nsteps + 1]) @ sample_load_matrix(sys.n).T
        elif not (isinstance(rhs, ZeroRhs) or rhs is None):
            raise TypeError(f"unsupported right-hand side {type(rhs).__name__}")
        _, _, traj = midpoint_sweep(state0.a, state0.adot, stepper.sinv,
                                    sys.stiff, loads, dt, nsteps, 1)
        states = [WaveState(t=state0.t + k * dt, a=traj[k, 0], adot=traj[k, 1])
                  for k in range(nsteps + 1)]
    energies = [energy(s, sys) for s in states]
    return states, energies


class VerletStepper:
    """Explicit Stormer-Verlet cross-check for the homogeneous system.

    Stability requires dt sqrt(lambda_max) <= 2, checked at construction
    against the largest generalized eigenvalue of (D, M).
    """

    def __init__(self, sys, dt):
        if dt <= 0:
            raise ValueError("dt must be positive")
        lam_max = eigh(np.diag(sys.stiff), sys.mass, eigvals_only=True)[-1]
        if dt * np.sqrt(lam_max) > 2.0:
            raise ValueError(f"dt violates the stability bound dt*sqrt(lambda_max) <= 2 "
                             f"(lambda_max = {lam_max:.3e})")
        self.sys = sys
        self.dt = dt
        self._mch = cho_factor(sys.mass)

    def step(self, state, rhs=ZeroRhs()):
        if not (isinstance(rhs, ZeroRhs) or rhs is None):
            raise TypeError("the explicit stepper only handles the homogeneous problem")
        dt = self.dt
        a, z = state.a, state.adot
        zh = z - 0.5 * dt * cho_solve(self._mch, self.sys.stiff * a)
        anew = a + dt * zh
        znew = zh - 0.5 * dt * cho_solve(self._mch, self.sys.stiff * anew)
        return WaveState(t=state.t + dt, a=anew, adot=znew)


def write_trajectory(path, states, energies):
    """CSV export: t, a_0..a_{n-1}, adot_0..adot_{n-1}, E_total, E_cons.

    Full 17-digit precision so downstream checks are tool independent.
    """
    n = states[0].a.size
    cols = ["t"] + [f"a_{i}" for i in range(n)] + [f"adot_{i}" for i in range(n)] \
        + ["E_total", "E_cons"]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for s, e in zip(states, energies):
            row = [s.t, *s.a, *s.adot, e.total, e.conserved]
            fh.write(",".join(format(x, ".17g") for x in row) + "\n")
