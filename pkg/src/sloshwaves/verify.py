"""Named identity and invariant checks, aggregated for the CLI verify mode.

Each check recomputes a closed-form fact or structural invariant through an
independent route and reports its worst error against a fixed tolerance.
All randomness is seeded, so a verify run is reproducible byte for byte.
"""

from dataclasses import dataclass

import numpy as np

from . import chebyshev as cheb
from . import control as ctl
from . import evolution as evo
from . import galerkin
from . import waveop


@dataclass
class CheckResult:
    name: str
    passed: bool
    error: float
    tol: float
    detail: str = ""


CHECKS = {}


def _check(name):
    def deco(fn):
        CHECKS[name] = fn
        return fn
    return deco


@_check("basis-roundtrip")
def _basis_roundtrip(seed):
    rng = np.random.default_rng(seed)
    g = cheb.cheb_grid(32)
    worst = 0.0
    for k in range(32):
        unit = np.zeros(32)
        unit[k] = 1.0
        got = cheb.to_coeffs(cheb.to_grid(unit, g))
        worst = max(worst, np.max(np.abs(got - unit)))
    a = rng.standard_normal(32)
    worst = max(worst, np.max(np.abs(cheb.to_coeffs(cheb.to_grid(a, g)) - a)))
    return CheckResult("basis-roundtrip", worst <= 1e-12, worst, 1e-12)


@_check("transform-paths")
def _transform_paths(seed):
    rng = np.random.default_rng(seed)
    g = cheb.cheb_grid(64)
    worst = 0.0
    for _ in range(10):
        f = cheb.GridFunction(rng.standard_normal(64), g)
        worst = max(worst, np.max(np.abs(cheb.to_coeffs(f, method="dct")
                                         - cheb.to_coeffs(f, method="direct"))))
    return CheckResult("transform-paths", worst <= 1e-12, worst, 1e-12)


@_check("derivative-identity")
def _derivative_identity(seed):
    g = cheb.cheb_grid(64)
    worst = 0.0
    for n in range(1, 33):
        unit = np.zeros(n + 1)
        unit[n] = 1.0
        dn = cheb.to_grid(cheb.deriv_coeffs(unit), g).values
        worst = max(worst, np.max(np.abs(dn - n * cheb.eval_U(n - 1, g.x))))
    return CheckResult("derivative-identity", worst <= 1e-10, worst, 1e-10,
                       "T_n' = n U_(n-1) on the grid, n <= 32")


@_check("orthogonality")
def _orthogonality(seed):
    g = cheb.cheb_grid(64)
    worst = 0.0
    for n in range(33):
        tn = cheb.eval_T(n, g.x)
        un = cheb.eval_U(n, g.x)
        for m in range(33):
            tgt = np.pi if n == m == 0 else (0.5 * np.pi if n == m else 0.0)
            worst = max(worst, abs(cheb.quad_winv(tn * cheb.eval_T(m, g.x)) - tgt))
            tgt_u = 0.5 * np.pi if n == m else 0.0
            worst = max(worst, abs(cheb.quad_w(cheb.GridFunction(
                un * cheb.eval_U(m, g.x), g)) - tgt_u))
    return CheckResult("orthogonality", worst <= 1e-12, worst, 1e-12,
                       "weighted T and U pairings, indices <= 32")


@_check("plain-integrals")
def _plain_integrals(seed):
    g = cheb.cheb_grid(64)
    worst = 0.0
    for n in range(33):
        tgt = 2.0 / (1.0 - n * n) if n % 2 == 0 else 0.0
        got = cheb.quad_plain(cheb.GridFunction(cheb.eval_T(n, g.x), g))
        worst = max(worst, abs(got - tgt))
    passed = worst <= 1e-12
    big = cheb.cheb_grid(65536)
    c0_err = abs(cheb.to_coeffs(cheb.GridFunction(big.w.copy(), big))[0] - 2.0 / np.pi)
    return CheckResult("plain-integrals", passed and c0_err <= 1e-10,
                       max(worst, c0_err), 1e-10,
                       f"int T_n dx to 1e-12; leading coefficient of w err {c0_err:.2e}")


@_check("airfoil-closed")
def _airfoil_closed(seed):
    xev = cheb.cheb_grid(64).x
    worst = 0.0
    for n in range(1, 33):
        unit = np.zeros(n + 1)
        unit[n] = 1.0
        got = waveop.fht_winv(unit, xev)
        worst = max(worst, np.max(np.abs(got + cheb.eval_U(n - 1, xev))))
    return CheckResult("airfoil-closed", worst <= 1e-10, worst, 1e-10,
                       "closed-form weighted transform of T_n, n <= 32")


@_check("airfoil-quadrature")
def _airfoil_quadrature(seed):
    xev = cheb.cheb_grid(64).x
    worst = 0.0
    for n in range(1, 33):
        unit = np.zeros(n + 1)
        unit[n] = 1.0
        got = waveop.fht_winv_quad(unit, xev)
        worst = max(worst, np.max(np.abs(got + cheb.eval_U(n - 1, xev))))
    return CheckResult("airfoil-quadrature", worst <= 1e-6, worst, 1e-6,
                       "principal-value oracle for the same identity")


@_check("operator-paths")
def _operator_paths(seed):
    rng = np.random.default_rng(seed)
    op = waveop.WaveOperator(64)
    g = op.grid
    worst = 0.0
    for _ in range(5):
        a = np.zeros(64)
        a[1:33] = rng.standard_normal(32)
        spec = op.apply_spectral(a).values
        quad = op.apply_quadrature(a).values
        num = np.sqrt(cheb.quad_w(cheb.GridFunction((quad - spec) ** 2, g)))
        den = np.sqrt(cheb.quad_w(cheb.GridFunction(spec ** 2, g)))
        worst = max(worst, num / den)
    return CheckResult("operator-paths", worst <= 1e-6, worst, 1e-6,
                       "spectral vs singular-quadrature application, rel L2_w")


@_check("quadform-diagonal")
def _quadform_diagonal(seed):
    op = waveop.WaveOperator(64)
    g = op.grid
    worst_closed = 0.0
    worst_quad = 0.0
    for n in range(33):
        unit = np.zeros(64)
        unit[n] = 1.0
        worst_closed = max(worst_closed, abs(op.quad_form(unit, unit) - 0.5 * np.pi * n))
        applied = op.apply_quadrature(unit).values
        tn = cheb.eval_T(n, g.x)
        cross = cheb.quad_winv(applied * tn * g.w)
        worst_quad = max(worst_quad, abs(cross - 0.5 * np.pi * n))
    passed = worst_closed == 0.0 and worst_quad <= 1e-9
    return CheckResult("quadform-diagonal", passed, max(worst_closed, worst_quad),
                       1e-9, f"closed form exact (err {worst_closed:.1e}), "
                       f"quadrature cross-check {worst_quad:.2e}")


@_check("self-adjointness")
def _self_adjointness(seed):
    rng = np.random.default_rng(seed)
    op = waveop.WaveOperator(32)
    g = op.grid
    worst_closed = 0.0
    worst_quad = 0.0
    for _ in range(100):
        a = rng.standard_normal(32)
        b = rng.standard_normal(32)
        worst_closed = max(worst_closed, abs(op.quad_form(a, b) - op.quad_form(b, a)))
        left = cheb.quad_winv(op.apply_spectral(a).values
                              * cheb.to_grid(b, g).values * g.w)
        right = cheb.quad_winv(op.apply_spectral(b).values
                               * cheb.to_grid(a, g).values * g.w)
        worst_quad = max(worst_quad, abs(left - right))
    passed = worst_closed == 0.0 and worst_quad <= 1e-9
    return CheckResult("self-adjointness", passed, max(worst_closed, worst_quad),
                       1e-9, "100 random pairs at n = 32")


@_check("kernel-and-mass")
def _kernel_and_mass(seed):
    rng = np.random.default_rng(seed)
    op = waveop.WaveOperator(64)
    const = np.zeros(64)
    const[0] = 3.7
    worst = np.max(np.abs(op.apply_spectral(const).values))
    for _ in range(10):
        a = rng.standard_normal(64)
        integral = cheb.quad_winv(op.apply_spectral(a).values * op.grid.w)
        worst = max(worst, abs(integral))
    return CheckResult("kernel-and-mass", worst <= 1e-9, worst, 1e-9,
                       "constants annihilated; int A phi dx = 0")


@_check("poincare")
def _poincare(seed):
    rng = np.random.default_rng(seed)
    op = waveop.WaveOperator(64)
    modes = np.arange(64)
    violations = 0
    min_slack = np.inf
    for _ in range(1000):
        a = rng.standard_normal(64) * np.exp(-rng.uniform(0.0, 0.2) * modes)
        lhs = waveop.norm2_winv(a)
        rhs = 0.25 * (np.pi ** 2 - 4.0) * op.quad_form(a, a) \
            + 2.0 * np.pi * waveop.mean_value(a) ** 2
        slack = rhs - lhs
        min_slack = min(min_slack, slack)
        if slack < -1e-12:
            violations += 1
    return CheckResult("poincare", violations == 0, float(max(0.0, -min_slack)),
                       1e-12, f"1000 vectors, min slack {min_slack:.3e}")


@_check("coercivity")
def _coercivity(seed):
    rng = np.random.default_rng(seed)
    op = waveop.WaveOperator(64)
    modes = np.arange(64)
    violations = 0
    min_slack = np.inf
    for _ in range(1000):
        a = rng.standard_normal(64) * np.exp(-rng.uniform(0.0, 0.2) * modes)
        lhs = waveop.inner_l2(a, a) + op.quad_form(a, a)
        slack = lhs - waveop.norm2_h12(a, op) / np.pi
        min_slack = min(min_slack, slack)
        if slack < -1e-12:
            violations += 1
    return CheckResult("coercivity", violations == 0, float(max(0.0, -min_slack)),
                       1e-12, f"1000 vectors, min slack {min_slack:.3e}")


@_check("sum-identity")
def _sum_identity(seed):
    ints = cheb.integral_T(2001)[1:]
    partial = np.cumsum(ints ** 2)
    target = (np.pi ** 2 - 8.0) / 4.0
    err = abs(partial[-1] - target)
    nonzero = partial[1::2]
    monotone = bool(np.all(np.diff(nonzero) > 0))
    return CheckResult("sum-identity", err <= 1e-3 and monotone, err, 1e-3,
                       f"2000 terms, monotone={monotone}")


@_check("k-kstar")
def _k_kstar(seed):
    q = 512
    zk = waveop.theta_midpoints(q)
    ym = waveop.theta_interior(q)
    worst = 0.0
    for n in (2, 5):
        worst = max(worst, np.max(np.abs(waveop.k_op(np.sin(n * zk)) - np.cos(n * ym))))
    worst = max(worst, np.max(np.abs(waveop.kstar_op(np.ones(q)))))
    worst = max(worst, np.max(np.abs(waveop.kstar_op(np.cos(3 * zk)) - np.sin(3 * ym))))
    return CheckResult("k-kstar", worst <= 1e-4, worst, 1e-4,
                       "K sin -> cos, K* cos -> sin, K* 1 = 0 at 512 nodes")


@_check("resolvent")
def _resolvent(seed):
    rng = np.random.default_rng(seed)
    sys = galerkin.build_system(64)
    worst = 0.0
    for coeffs in ([1.0], [0.0, 1.0], [0.0, 1.0, 0.0, 0.0, 1.0]):
        phi = np.zeros(64)
        phi[: len(coeffs)] = coeffs
        load = galerkin.load_with_winv(sys, phi, np.arange(64) * phi)
        got = galerkin.solve_resolvent(sys, load)
        worst = max(worst, np.max(np.abs(got - phi)))
    g = cheb.cheb_grid(64)
    v = cheb.GridFunction(np.exp(-3.0 * g.x ** 2) * (1.0 + g.x), g)
    b = galerkin.load_from_values(sys, v)
    res = galerkin.weak_residual(sys, galerkin.solve_resolvent(sys, b), b)
    worst = max(worst, res)
    return CheckResult("resolvent", worst <= 1e-10, worst, 1e-10,
                       "manufactured solutions and weak-form residual")


@_check("eigen-structure")
def _eigen_structure(seed):
    sys128 = galerkin.build_system(128)
    sys256 = galerkin.build_system(256)
    dec128 = galerkin.eigenmodes(sys128, 16)
    dec256 = galerkin.eigenmodes(sys256, 16)
    lam0 = abs(dec256.values[0])
    increasing = bool(np.all(np.diff(dec256.values[: 64]) > 0)) \
        and bool(np.all(np.diff(dec128.values) > 0))
    gram = dec256.vectors.T @ sys256.mass @ dec256.vectors
    ortho = np.max(np.abs(gram - np.eye(16)))
    dform = dec256.vectors.T @ (sys256.stiff[:, None] * dec256.vectors)
    diag_err = np.max(np.abs(dform - np.diag(dec256.values)))
    rel = np.max(np.abs(dec128.values[1:9] - dec256.values[1:9]) / dec256.values[1:9])
    passed = lam0 <= 1e-12 and increasing and ortho <= 1e-10 \
        and diag_err <= 1e-9 and rel <= 1e-8
    return CheckResult("eigen-structure", passed, max(lam0, ortho, rel), 1e-8,
                       f"lambda_0 {lam0:.1e}, orthonormality {ortho:.1e}, "
                       f"128-vs-256 stability {rel:.2e}")


@_check("energy-conservation")
def _energy_conservation(seed):
    rng = np.random.default_rng(seed)
    sys = galerkin.build_system(32)
    a0 = np.zeros(32)
    z0 = np.zeros(32)
    a0[:8] = rng.standard_normal(8)
    z0[:8] = rng.standard_normal(8)
    states, energies = evo.simulate(evo.WaveState(0.0, a0, z0), 100.0, 0.01,
                                    evo.ZeroRhs(), sys)
    cons = np.array([e.conserved for e in energies])
    drift = np.max(np.abs(cons - cons[0])) / cons[0]
    return CheckResult("energy-conservation", drift <= 1e-10, drift, 1e-10,
                       "relative drift of the quadratic invariant over 1e4 steps")


@_check("reversibility")
def _reversibility(seed):
    rng = np.random.default_rng(seed)
    sys = galerkin.build_system(32)
    a0 = rng.standard_normal(32) * np.exp(-0.3 * np.arange(32))
    z0 = rng.standard_normal(32) * np.exp(-0.3 * np.arange(32))
    fwd, _ = evo.simulate(evo.WaveState(0.0, a0, z0), 1.0, 0.01, evo.ZeroRhs(), sys)
    back, _ = evo.simulate(fwd[-1], -1.0, -0.01, evo.ZeroRhs(), sys)
    err = max(np.max(np.abs(back[-1].a - a0)), np.max(np.abs(back[-1].adot - z0)))
    return CheckResult("reversibility", err <= 1e-9, err, 1e-9,
                       "100 steps forward then backward")


@_check("integrator-order")
def _integrator_order(seed):
    sys = galerkin.build_system(32)
    dec = galerkin.eigenmodes(sys, 4)
    lam = dec.values[3]
    mode = dec.vectors[:, 3]
    horizon = 1.7
    errs = []
    for nsteps in (64, 128, 256):
        dt = horizon / nsteps
        states, _ = evo.simulate(evo.WaveState(0.0, mode, np.zeros(32)),
                                 horizon, dt, evo.ZeroRhs(), sys)
        root = np.sqrt(lam)
        exact_a = np.cos(root * horizon) * mode
        exact_z = -root * np.sin(root * horizon) * mode
        errs.append(np.sqrt(np.linalg.norm(states[-1].a - exact_a) ** 2
                            + np.linalg.norm(states[-1].adot - exact_z) ** 2))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    passed = all(1.9 <= o <= 2.1 for o in orders)
    dev = max(abs(o - 2.0) for o in orders)
    return CheckResult("integrator-order", passed, dev, 0.1,
                       f"observed orders {orders[0]:.4f}, {orders[1]:.4f}")


@_check("gronwall")
def _gronwall(seed):
    rng = np.random.default_rng(seed)
    sys = galerkin.build_system(16)
    a0 = np.zeros(16)
    z0 = np.zeros(16)
    a0[:6] = rng.standard_normal(6)
    z0[:6] = rng.standard_normal(6)
    c = 0.5
    rhs = evo.LipschitzRhs(lambda s: c * s, c)
    states, energies = evo.simulate(evo.WaveState(0.0, a0, z0), 5.0, 0.01, rhs, sys)
    e0 = energies[0].total
    rate = 2.0 * max(1.0, c * c)
    worst = -np.inf
    for rec in energies[1:]:
        excess = np.log(rec.total) - (np.log(e0) + rate * rec.t)
        worst = max(worst, excess)
    return CheckResult("gronwall", worst <= 1e-6, float(max(worst, 0.0)), 1e-6,
                       f"f(s) = 0.5 s on [0,5]; max log excess {worst:.3e}")


def _duality_setup(seed, n=24, nsteps=200, horizon=4.0):
    sys = galerkin.build_system(n)
    window = ctl.ControlWindow(-0.6, -0.1, cheb.cheb_grid(n))
    dt = horizon / nsteps
    times = np.arange(nsteps + 1) * dt
    return sys, window, times


@_check("duality")
def _duality(seed):
    rng = np.random.default_rng(seed)
    sys, window, times = _duality_setup(seed)
    n = sys.n
    decay = np.exp(-0.3 * np.arange(n))
    worst = 0.0
    for _ in range(20):
        values = np.zeros((times.size, n))
        values[:, window.mask] = rng.standard_normal((times.size, int(window.mask.sum())))
        signal = ctl.ControlSignal(times, values, window)
        target = ctl.TargetState(decay * rng.standard_normal(n),
                                 decay * rng.standard_normal(n))
        worst = max(worst, ctl.duality_gap(signal, target, sys))
    return CheckResult("duality", worst <= 1e-9, worst, 1e-9,
                       "transpose identity, 20 random pairs, n = 24, 200 steps")


@_check("gradient")
def _gradient(seed):
    rng = np.random.default_rng(seed)
    sys, window, times = _duality_setup(seed)
    n = sys.n
    values = np.zeros((times.size, n))
    values[:, window.mask] = rng.standard_normal((times.size, int(window.mask.sum())))
    signal = ctl.ControlSignal(times, values, window)
    decay = np.exp(-0.4 * np.arange(n))
    target = ctl.TargetState(decay * rng.standard_normal(n),
                             decay * rng.standard_normal(n))
    err = ctl.gradient_check(signal, target, window, times[-1],
                             times[1] - times[0], sys, reg=1e-3, seed=seed)
    return CheckResult("gradient", err <= 1e-5, err, 1e-5,
                       "adjoint gradient vs central differences, 10 directions")


@_check("synthesis")
def _synthesis(seed):
    sys, window, times = _duality_setup(seed)
    target, _ = ctl.manufactured_target(sys, window, times[-1], times.size - 1, seed)
    rest = evo.WaveState(0.0, np.zeros(sys.n), np.zeros(sys.n))
    result = ctl.synthesize(rest, target, window, times[-1], times[1] - times[0],
                            sys, eps=1e-6, reg=0.0, max_iter=300)
    hist = result.misfit_history
    monotone = bool(np.all(np.diff(hist) <= 1e-12))
    passed = result.converged and result.misfit <= 1e-6 and monotone
    return CheckResult("synthesis", passed, result.misfit, 1e-6,
                       f"manufactured target reached in {result.iterations} "
                       f"iterations, monotone={monotone}")


@_check("window-monotonicity")
def _window_monotonicity(seed):
    sys, window, times = _duality_setup(seed)
    target, _ = ctl.manufactured_target(sys, window, times[-1], times.size - 1, seed)
    wide = ctl.ControlWindow(-0.6, 0.4, window.grid)
    rest = evo.WaveState(0.0, np.zeros(sys.n), np.zeros(sys.n))
    dt = times[1] - times[0]
    # budget chosen so both problems reach their numerical floor
    kwargs = dict(eps=1e-14, reg=0.0, max_iter=300)
    narrow_mis = ctl.synthesize(rest, target, window, times[-1], dt, sys, **kwargs).misfit
    wide_mis = ctl.synthesize(rest, target, wide, times[-1], dt, sys, **kwargs).misfit
    gap = wide_mis - narrow_mis
    return CheckResult("window-monotonicity", gap <= 1e-9, float(max(gap, 0.0)), 1e-9,
                       f"misfit {narrow_mis:.3e} narrow vs {wide_mis:.3e} widened, "
                       "equal iteration budget")


def run_checks(names=None, seed=0):
    """Run the named checks (all by default) and return their results."""
    if names is None:
        names = list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(unknown)}; "
                         f"available: {', '.join(CHECKS)}")
    return [CHECKS[name](seed) for name in names]
