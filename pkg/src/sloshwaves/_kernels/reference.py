"""Pure numpy implementations of the hot kernels.

Same call signatures as the compiled module `_core`; whichever is selected
at import time is exposed through the package namespace in __init__.
"""

import numpy as np


def pv_subtracted(yev, znodes, fvals, fpole, flimit, h, guard):
    """Midpoint principal-value rule with pole-value subtraction.

    Computes (h/pi) * sum_k (fvals[k] - fpole[i]) / (cos(yev[i]) - cos(znodes[k]))
    for each evaluation angle yev[i].  Subtracting the pole value is free
    because PV int dz/(cos y - cos z) over (0,pi) vanishes, and it makes the
    integrand smooth, so the midpoint rule converges spectrally.

    Where an integration node falls within `guard` of yev[i] the quotient is
    0/0 up to rounding; those entries are replaced by flimit[i], the analytic
    limit of the subtracted integrand at the pole.
    """
    yev = np.asarray(yev, dtype=float)
    znodes = np.asarray(znodes, dtype=float)
    fvals = np.asarray(fvals, dtype=float)
    den = 2.0 * np.sin((znodes[None, :] + yev[:, None]) / 2.0) \
              * np.sin((znodes[None, :] - yev[:, None]) / 2.0)
    num = fvals[None, :] - np.asarray(fpole, dtype=float)[:, None]
    hit = np.abs(znodes[None, :] - yev[:, None]) < guard
    quot = np.where(hit, np.asarray(flimit, dtype=float)[:, None],
                    num / np.where(hit, 1.0, den))
    return (h / np.pi) * quot.sum(axis=1)


def pv_plain(yev, znodes, svals, h):
    """Plain midpoint principal-value rule (h/pi) * sum_k svals[k]/(cos y - cos z_k).

    Valid only when the evaluation angles interlace the integration nodes so
    the pole is straddled symmetrically; the caller guarantees that.
    """
    yev = np.asarray(yev, dtype=float)
    znodes = np.asarray(znodes, dtype=float)
    svals = np.asarray(svals, dtype=float)
    den = 2.0 * np.sin((znodes[None, :] + yev[:, None]) / 2.0) \
              * np.sin((znodes[None, :] - yev[:, None]) / 2.0)
    return (h / np.pi) * (svals[None, :] / den).sum(axis=1)


def midpoint_sweep(a, z, sinv, dvec, loads, dt, nsteps, store):
    """Implicit-midpoint sweep for M a'' + diag(dvec) a = load.

    One step solves (M + dt^2/4 diag(dvec)) delta = dt*(load_mid - dvec*(a + dt/2 z))
    with sinv the precomputed inverse of the left-hand matrix, then
    z += delta and a += dt/2 (z_old + z_new).  Exact for linear loads given
    per step in `loads` (row k is the midpoint load of step k); pass None
    for the homogeneous problem.

    store: 0 returns (a, z, None); 1 returns the full trajectory, shape
    (nsteps+1, 2, n) with [k,0]=a, [k,1]=z; 2 returns the per-step position
    midpoints (a_k + a_{k+1})/2, shape (nsteps, n).
    """
    a = np.array(a, dtype=float, copy=True)
    z = np.array(z, dtype=float, copy=True)
    sinv = np.asarray(sinv, dtype=float)
    dvec = np.asarray(dvec, dtype=float)
    n = a.size
    out = None
    if store == 1:
        out = np.empty((nsteps + 1, 2, n))
        out[0, 0] = a
        out[0, 1] = z
    elif store == 2:
        out = np.empty((nsteps, n))
    for k in range(nsteps):
        rhs = -dvec * (a + (0.5 * dt) * z)
        if loads is not None:
            rhs = rhs + loads[k]
        delta = sinv @ (dt * rhs)
        znew = z + delta
        anew = a + (0.5 * dt) * (z + znew)
        if store == 1:
            out[k + 1, 0] = anew
            out[k + 1, 1] = znew
        elif store == 2:
            out[k] = 0.5 * (a + anew)
        a, z = anew, znew
    return a, z, out
