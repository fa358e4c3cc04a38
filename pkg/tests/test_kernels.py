"""Backend selection and compiled-vs-reference agreement."""

import os
import subprocess
import sys

import numpy as np
import pytest

from sloshwaves import _kernels
from sloshwaves._kernels import reference

compiled = pytest.importorskip("sloshwaves._kernels._core") \
    if _kernels.backend_name() == "compiled" else None


def test_backend_name_is_known():
    assert _kernels.backend_name() in ("compiled", "reference")


def test_pure_env_forces_reference_backend():
    env = dict(os.environ, SLOSHWAVES_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from sloshwaves._kernels import backend_name; print(backend_name())"],
        env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "reference"


def _pv_case(seed, p=24, q=96):
    rng = np.random.default_rng(seed)
    y = (np.arange(p) + 0.5) * np.pi / p
    z = (np.arange(q) + 0.5) * np.pi / q
    f = rng.standard_normal(q)
    fp = rng.standard_normal(p)
    fl = rng.standard_normal(p)
    return y, z, f, fp, fl


@pytest.mark.skipif(compiled is None, reason="compiled backend not built")
class TestBackendAgreement:
    def test_pv_subtracted(self):
        y, z, f, fp, fl = _pv_case(0)
        h = np.pi / z.size
        a = compiled.pv_subtracted(y, z, f, fp, fl, h, 0.0)
        b = reference.pv_subtracted(y, z, f, fp, fl, h, 0.0)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13)

    def test_pv_subtracted_guard_hits(self):
        # evaluation points colliding with nodes take the limit value
        y, z, f, fp, fl = _pv_case(1, p=8, q=8)
        h = np.pi / z.size
        a = compiled.pv_subtracted(z, z, f, fp, fl, h, 1e-9)
        b = reference.pv_subtracted(z, z, f, fp, fl, h, 1e-9)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13)

    def test_pv_plain(self):
        y, z, f, _, _ = _pv_case(2)
        h = np.pi / z.size
        a = compiled.pv_plain(y, z, f, h)
        b = reference.pv_plain(y, z, f, h)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13)

    @pytest.mark.parametrize("store", [0, 1, 2])
    def test_midpoint_sweep(self, store):
        rng = np.random.default_rng(3)
        n, k = 12, 40
        a = rng.standard_normal(n)
        z = rng.standard_normal(n)
        m = rng.standard_normal((n, n))
        sinv = m @ m.T / n + np.eye(n)
        dvec = np.abs(rng.standard_normal(n))
        loads = rng.standard_normal((k, n))
        got = compiled.midpoint_sweep(a, z, sinv, dvec, loads, 0.01, k, store)
        ref = reference.midpoint_sweep(a, z, sinv, dvec, loads, 0.01, k, store)
        assert np.allclose(got[0], ref[0], rtol=1e-12, atol=1e-12)
        assert np.allclose(got[1], ref[1], rtol=1e-12, atol=1e-12)
        if store == 0:
            assert got[2] is None and ref[2] is None
        else:
            assert got[2].shape == ref[2].shape
            assert np.allclose(got[2], ref[2], rtol=1e-12, atol=1e-12)

    def test_midpoint_sweep_no_loads(self):
        rng = np.random.default_rng(4)
        n = 6
        a = rng.standard_normal(n)
        z = rng.standard_normal(n)
        sinv = np.eye(n) * 0.7
        dvec = np.ones(n)
        got = compiled.midpoint_sweep(a, z, sinv, dvec, None, 0.05, 20, 0)
        ref = reference.midpoint_sweep(a, z, sinv, dvec, None, 0.05, 20, 0)
        assert np.allclose(got[0], ref[0], rtol=1e-13)
        assert np.allclose(got[1], ref[1], rtol=1e-13)


def test_reference_sweep_store_modes_consistent():
    # final state reported by store=0 equals the last row of the trajectory
    rng = np.random.default_rng(5)
    n, k = 8, 25
    a = rng.standard_normal(n)
    z = rng.standard_normal(n)
    sinv = np.eye(n) * 0.9
    dvec = np.abs(rng.standard_normal(n))
    a0, z0, _ = reference.midpoint_sweep(a, z, sinv, dvec, None, 0.02, k, 0)
    a1, z1, traj = reference.midpoint_sweep(a, z, sinv, dvec, None, 0.02, k, 1)
    assert np.array_equal(a0, a1) and np.array_equal(z0, z1)
    assert np.array_equal(traj[-1, 0], a1)
    assert np.array_equal(traj[0, 0], a)
    _, _, mids = reference.midpoint_sweep(a, z, sinv, dvec, None, 0.02, k, 2)
    assert np.allclose(mids[0], 0.5 * (a + traj[1, 0]), rtol=1e-14)
