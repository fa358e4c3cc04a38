"""Midpoint stepping, energy bookkeeping, and the explicit cross-check."""

import numpy as np
import pytest

from sloshwaves import chebyshev as cheb
from sloshwaves import evolution as evo
from sloshwaves import galerkin
from sloshwaves.control import ControlSignal, ControlWindow


@pytest.fixture(scope="module")
def sys32():
    return galerkin.build_system(32)


def _random_state(n, seed, decay=0.3):
    rng = np.random.default_rng(seed)
    env = np.exp(-decay * np.arange(n))
    return evo.WaveState(0.0, env * rng.standard_normal(n),
                         env * rng.standard_normal(n))


def test_state_validation():
    with pytest.raises(ValueError):
        evo.WaveState(0.0, np.ones(4), np.ones(5))
    with pytest.raises(ValueError):
        evo.WaveState(0.0, np.array([1.0, np.inf]), np.zeros(2))


def test_energy_matches_quadratic_forms(sys32):
    state = _random_state(32, 1)
    rec = evo.energy(state, sys32)
    cons = state.adot @ sys32.mass @ state.adot \
        + state.a @ (sys32.stiff * state.a)
    assert rec.conserved == pytest.approx(cons, rel=1e-14)
    assert rec.total == pytest.approx(cons + state.a @ sys32.mass @ state.a,
                                      rel=1e-14)


def test_invariant_conserved(sys32):
    states, energies = evo.simulate(_random_state(32, 2), 10.0, 0.01,
                                    evo.ZeroRhs(), sys32)
    cons = np.array([e.conserved for e in energies])
    assert np.max(np.abs(cons - cons[0])) / cons[0] < 1e-12
    assert len(states) == 1001


def test_time_reversible(sys32):
    state = _random_state(32, 3)
    fwd, _ = evo.simulate(state, 1.0, 0.01, evo.ZeroRhs(), sys32)
    back, _ = evo.simulate(fwd[-1], -1.0, -0.01, evo.ZeroRhs(), sys32)
    assert np.max(np.abs(back[-1].a - state.a)) < 1e-12
    assert np.max(np.abs(back[-1].adot - state.adot)) < 1e-12


def test_simulate_sign_checks(sys32):
    state = _random_state(32, 4)
    with pytest.raises(ValueError):
        evo.simulate(state, 1.0, -0.01, evo.ZeroRhs(), sys32)
    with pytest.raises(ValueError):
        evo.simulate(state, 0.0, 0.01, evo.ZeroRhs(), sys32)


def test_unsupported_rhs(sys32):
    with pytest.raises(TypeError):
        evo.simulate(_random_state(32, 5), 0.1, 0.01, object(), sys32)


def test_stepper_rejects_zero_dt(sys32):
    with pytest.raises(ValueError):
        evo.MidpointStepper(sys32, 0.0)


class TestSource:
    def _signal(self, n, nsteps, dt, seed):
        window = ControlWindow(-0.5, 0.5, cheb.cheb_grid(n))
        rng = np.random.default_rng(seed)
        values = np.zeros((nsteps + 1, n))
        values[:, window.mask] = rng.standard_normal(
            (nsteps + 1, int(window.mask.sum())))
        return ControlSignal(np.arange(nsteps + 1) * dt, values, window)

    def test_sweep_matches_manual_steps(self, sys32):
        dt = 0.02
        sig = self._signal(32, 50, dt, 7)
        state0 = _random_state(32, 8)
        states, _ = evo.simulate(state0, 1.0, dt, evo.SourceRhs(sig), sys32)
        stepper = evo.MidpointStepper(sys32, dt)
        manual = state0
        for _ in range(50):
            manual = stepper.step(manual, evo.SourceRhs(sig))
        assert np.max(np.abs(states[-1].a - manual.a)) < 1e-12
        assert np.max(np.abs(states[-1].adot - manual.adot)) < 1e-12

    def test_short_signal_rejected(self, sys32):
        sig = self._signal(32, 10, 0.02, 9)
        with pytest.raises(ValueError):
            evo.simulate(_random_state(32, 9), 1.0, 0.02,
                         evo.SourceRhs(sig), sys32)

    def test_misaligned_time_rejected(self, sys32):
        sig = self._signal(32, 10, 0.02, 10)
        stepper = evo.MidpointStepper(sys32, 0.02)
        off = evo.WaveState(0.003, np.zeros(32), np.zeros(32))
        with pytest.raises(ValueError):
            stepper.step(off, evo.SourceRhs(sig))


class TestLipschitz:
    def test_constant_must_be_positive(self):
        with pytest.raises(ValueError):
            evo.LipschitzRhs(lambda s: 0.1 * s, 0.0)

    def test_claimed_bound_is_spot_checked(self):
        with pytest.raises(ValueError):
            evo.LipschitzRhs(lambda s: 2.0 * s, 1.0)

    def test_small_nonlinearity_steps(self, sys32):
        rhs = evo.LipschitzRhs(lambda s: 0.5 * np.sin(s), 0.5)
        states, energies = evo.simulate(_random_state(32, 11), 0.5, 0.01,
                                        rhs, sys32)
        assert len(states) == 51
        assert np.isfinite(energies[-1].total)

    def test_divergent_fixed_point_raises(self):
        sys_ = galerkin.build_system(8)
        stepper = evo.MidpointStepper(sys_, 1.0)
        rhs = evo.LipschitzRhs(lambda s: 20.0 * s, 20.0)
        state = _random_state(8, 12, decay=0.0)
        with pytest.raises(evo.StepConvergenceError) as exc:
            stepper.step(state, rhs)
        assert exc.value.iterations == 50
        assert exc.value.residual > 1.0


class TestVerlet:
    def test_stability_guard(self, sys32):
        with pytest.raises(ValueError):
            evo.VerletStepper(sys32, 0.5)
        with pytest.raises(ValueError):
            evo.VerletStepper(sys32, -0.01)

    def test_cross_checks_midpoint(self, sys32):
        # independent second-order scheme; both approximate the same flow
        dec = galerkin.eigenmodes(sys32, 3)
        state0 = evo.WaveState(0.0, dec.vectors[:, 2], np.zeros(32))
        dt = 0.005
        mid, _ = evo.simulate(state0, 0.5, dt, evo.ZeroRhs(), sys32)
        ver = state0
        stepper = evo.VerletStepper(sys32, dt)
        for _ in range(100):
            ver = stepper.step(ver)
        assert np.max(np.abs(mid[-1].a - ver.a)) < 1e-4

    def test_homogeneous_only(self, sys32):
        stepper = evo.VerletStepper(sys32, 0.01)
        with pytest.raises(TypeError):
            stepper.step(_random_state(32, 13),
                         evo.LipschitzRhs(lambda s: 0.1 * s, 0.1))


def test_trajectory_roundtrip(tmp_path, sys32):
    states, energies = evo.simulate(_random_state(32, 14), 0.1, 0.01,
                                    evo.ZeroRhs(), sys32)
    path = tmp_path / "traj.csv"
    evo.write_trajectory(path, states, energies)
    raw = np.loadtxt(path, delimiter=",", skiprows=1)
    assert raw.shape == (11, 1 + 2 * 32 + 2)
    assert np.array_equal(raw[:, 1:33], np.array([s.a for s in states]))
    header = path.read_text().splitlines()[0].split(",")
    assert header[0] == "t" and header[-1] == "E_cons"
