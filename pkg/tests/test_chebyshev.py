"""Grid, transform, and quadrature tests."""

import numpy as np
import pytest

from sloshwaves import chebyshev as cheb


class TestGrid:
    def test_nodes_and_weights(self):
        g = cheb.cheb_grid(8)
        j = np.arange(8)
        assert np.allclose(g.theta, (2 * j + 1) * np.pi / 16)
        assert np.allclose(g.x, np.cos(g.theta))
        assert np.allclose(g.w, np.sin(g.theta))
        assert np.all(g.w > 0)

    def test_cached(self):
        assert cheb.cheb_grid(16) is cheb.cheb_grid(16)

    def test_read_only(self):
        g = cheb.cheb_grid(8)
        with pytest.raises(ValueError):
            g.x[0] = 0.0

    def test_invalid_size(self):
        with pytest.raises(ValueError):
            cheb.cheb_grid(0)


class TestPolynomials:
    def test_eval_t_matches_cosine_form(self):
        x = np.linspace(-1.0, 1.0, 41)
        for n in (0, 1, 2, 5, 11):
            assert np.allclose(cheb.eval_T(n, x), np.cos(n * np.arccos(x)),
                               atol=1e-12)

    def test_eval_u_interior(self):
        x = np.linspace(-0.99, 0.99, 37)
        th = np.arccos(x)
        for n in (0, 1, 4, 9):
            assert np.allclose(cheb.eval_U(n, x),
                               np.sin((n + 1) * th) / np.sin(th), atol=1e-10)

    def test_eval_u_endpoints(self):
        # limits (n+1) and (n+1)(-1)^n, not removable by the sine quotient
        for n in (0, 1, 2, 7):
            assert cheb.eval_U(n, 1.0) == n + 1
            assert cheb.eval_U(n, -1.0) == (n + 1) * (-1.0) ** n

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            cheb.eval_T(3, 1.5)
        with pytest.raises(ValueError):
            cheb.eval_U(3, np.array([0.0, -1.0001]))

    def test_scalar_in_scalar_out(self):
        assert cheb.eval_T(2, 0.5) == pytest.approx(2 * 0.25 - 1)


class TestTransforms:
    def test_roundtrip(self):
        rng = np.random.default_rng(3)
        g = cheb.cheb_grid(33)
        a = rng.standard_normal(33)
        back = cheb.to_coeffs(cheb.to_grid(a, g))
        assert np.max(np.abs(back - a)) < 1e-12

    def test_unit_coefficients(self):
        g = cheb.cheb_grid(16)
        for k in (0, 1, 7, 15):
            f = cheb.GridFunction(cheb.eval_T(k, g.x), g)
            a = cheb.to_coeffs(f)
            expect = np.zeros(16)
            expect[k] = 1.0
            assert np.max(np.abs(a - expect)) < 1e-13

    def test_dct_and_direct_agree(self):
        rng = np.random.default_rng(4)
        g = cheb.cheb_grid(48)
        f = cheb.GridFunction(rng.standard_normal(48), g)
        d1 = cheb.to_coeffs(f, method="dct")
        d2 = cheb.to_coeffs(f, method="direct")
        assert np.max(np.abs(d1 - d2)) < 1e-12

    def test_unknown_method(self):
        g = cheb.cheb_grid(8)
        f = cheb.GridFunction(np.ones(8), g)
        with pytest.raises(ValueError):
            cheb.to_coeffs(f, method="fft")

    def test_to_grid_pads(self):
        g = cheb.cheb_grid(16)
        short = np.array([0.0, 1.0])
        assert np.allclose(cheb.to_grid(short, g).values, g.x, atol=1e-14)

    def test_to_grid_rejects_excess_modes(self):
        with pytest.raises(ValueError):
            cheb.to_grid(np.ones(17), cheb.cheb_grid(16))

    def test_grid_function_validation(self):
        g = cheb.cheb_grid(8)
        with pytest.raises(ValueError):
            cheb.GridFunction(np.ones(7), g)
        bad = np.ones(8)
        bad[3] = np.nan
        with pytest.raises(ValueError):
            cheb.GridFunction(bad, g)


class TestDerivative:
    def test_low_degree_closed_forms(self):
        # T_2' = 4 T_1, T_3' = 3 T_0 + 6 T_2
        assert np.allclose(cheb.deriv_coeffs([0, 0, 1]), [0, 4])
        assert np.allclose(cheb.deriv_coeffs([0, 0, 0, 1]), [3, 0, 6])

    def test_matches_u_identity(self):
        g = cheb.cheb_grid(64)
        for n in (1, 2, 8, 20, 32):
            unit = np.zeros(n + 1)
            unit[n] = 1.0
            dvals = cheb.to_grid(cheb.deriv_coeffs(unit), g).values
            assert np.max(np.abs(dvals - n * cheb.eval_U(n - 1, g.x))) < 1e-10

    def test_constant(self):
        assert cheb.deriv_coeffs([5.0]).size == 1
        assert cheb.deriv_coeffs([5.0])[0] == 0.0


class TestQuadrature:
    def test_winv_orthogonality(self):
        g = cheb.cheb_grid(32)
        t2 = cheb.eval_T(2, g.x)
        t5 = cheb.eval_T(5, g.x)
        assert cheb.quad_winv(t2 * t2) == pytest.approx(np.pi / 2, abs=1e-13)
        assert cheb.quad_winv(t2 * t5) == pytest.approx(0.0, abs=1e-13)
        assert cheb.quad_winv(np.ones(32)) == pytest.approx(np.pi, abs=1e-13)

    def test_w_weighted(self):
        g = cheb.cheb_grid(32)
        u3 = cheb.eval_U(3, g.x)
        f = cheb.GridFunction(u3 * u3, g)
        assert cheb.quad_w(f) == pytest.approx(np.pi / 2, abs=1e-13)

    def test_integral_t_table(self):
        vals = cheb.integral_T(6)
        assert np.allclose(vals, [2.0, 0.0, -2.0 / 3.0, 0.0, -2.0 / 15.0, 0.0])

    def test_plain_matches_table(self):
        g = cheb.cheb_grid(64)
        for n in (0, 2, 4, 10, 31):
            f = cheb.GridFunction(cheb.eval_T(n, g.x), g)
            assert cheb.quad_plain(f) == pytest.approx(cheb.integral_T(n + 1)[n],
                                                       abs=1e-13)

    def test_plain_smooth_function(self):
        g = cheb.cheb_grid(64)
        f = cheb.GridFunction(np.exp(g.x), g)
        assert cheb.quad_plain(f) == pytest.approx(np.exp(1) - np.exp(-1),
                                                   abs=1e-12)

    def test_weight_leading_coefficient(self):
        # the weight itself is not polynomial; convergence is only algebraic
        g = cheb.cheb_grid(65536)
        a0 = cheb.to_coeffs(cheb.GridFunction(g.w.copy(), g))[0]
        assert abs(a0 - 2.0 / np.pi) < 1e-10
