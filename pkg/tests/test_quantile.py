import math

import mpmath as mp
import numpy as np
import pytest

import skembed as sk
from skembed.quantile import ENDPOINT_EPS, QuantileSpec

# high-precision evaluation of the heavy-tail closed form at u -> 1:
#   q(1) = 5/(ln 10 + 1)^2 - 10/(1 + ln 10)^3, frozen from a 40-digit run
HEAVY_Q1 = 0.18080650828946794
HEAVY_A = 0.4584183269137341


def heavy_oracle(u: float) -> float:
    """Independent high-precision evaluation of the heavy-tail quantile."""
    mp.mp.dps = 40
    uu = mp.mpf(u)
    return float(5 / (mp.log(10) + 1) ** 2 - 10 / (uu * (1 - mp.log(uu / 10)) ** 3))


class TestQuantileEval:
    def test_uniform_linear(self):
        spec = sk.uniform_spec(1.0)
        assert sk.quantile_eval(spec, 0.75) == pytest.approx(0.5, abs=1e-15)

    def test_heavy_tail_near_one(self):
        spec = sk.heavy_tail_spec()
        u = 1.0 - 1e-13
        assert sk.quantile_eval(spec, u) == pytest.approx(heavy_oracle(u), abs=1e-12)
        assert sk.quantile_eval(spec, u) == pytest.approx(HEAVY_Q1, abs=1e-11)

    def test_two_point_atomic_step(self):
        spec = sk.table_spec((0.5, 1.0), (-1.0, 1.0))
        assert sk.quantile_eval(spec, 0.25) == -1.0
        # left-continuity at the atom boundary (infimum definition)
        assert sk.quantile_eval(spec, 0.5) == -1.0
        assert sk.quantile_eval(spec, 0.5 + 1e-12) == 1.0

    def test_domain_errors(self):
        spec = sk.uniform_spec(1.0)
        for u in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(sk.DomainError):
                sk.quantile_eval(spec, u)

    def test_unvalidated_spec_state_error(self):
        bad = QuantileSpec(kind="table", table_u=(0.5, 1.0), table_q=(1.0, -1.0), support=(-1, 1))
        with pytest.raises(sk.SpecValidationError):
            sk.quantile_eval(bad, 0.5)

    def test_vectorized(self):
        spec = sk.uniform_spec(2.0)
        u = np.array([0.25, 0.5, 0.75])
        np.testing.assert_allclose(sk.quantile_eval(spec, u), [-1.0, 0.0, 1.0])


class TestFoldToBoundary:
    def test_uniform_median(self, uniform_phi):
        assert uniform_phi(math.pi / 2) == pytest.approx(0.0, abs=1e-15)

    def test_heavy_singular_at_zero(self, heavy_phi):
        assert heavy_phi.singular_at_zero
        assert not heavy_phi.singular_at_pi
        # the fold blows down near the singular endpoint
        assert heavy_phi(1e-6) < -1e3
        # at exactly zero the endpoint guard applies
        guard = sk.heavy_tail_spec().quantile(ENDPOINT_EPS)
        assert heavy_phi(0.0) == pytest.approx(guard)

    def test_heavy_at_pi(self, heavy_phi):
        assert heavy_phi(math.pi) == pytest.approx(HEAVY_Q1, abs=1e-11)

    def test_even_exact_at_paired_points(self, uniform_phi, heavy_phi):
        theta = np.linspace(1e-9, math.pi - 1e-9, 257)
        for phi in (uniform_phi, heavy_phi):
            np.testing.assert_array_equal(phi(theta), phi(-theta))

    def test_jump_thetas_for_tables(self):
        phi = sk.fold_to_boundary(sk.two_point_spec(1.0))
        assert phi.jump_thetas == (math.pi * 0.5,)


class TestValidate:
    def test_uniform_passes(self):
        result = sk.validate(sk.uniform_spec(1.0))
        assert result.ok and result.mean == pytest.approx(0.0, abs=1e-15)

    def test_decreasing_table_fails_monotonicity(self):
        bad = QuantileSpec(kind="table", table_u=(0.5, 1.0), table_q=(1.0, -1.0), support=(-1, 1))
        result = sk.validate(bad)
        assert not result.ok and not result.monotone_ok

    def test_constant_table_degenerate(self):
        flat = QuantileSpec(kind="table", table_u=(1.0,), table_q=(0.0,), support=(0, 0))
        result = sk.validate(flat)
        assert not result.ok and result.degenerate

    def test_nonzero_mean_fails(self):
        shifted = sk.table_spec((0.5, 1.0), (0.0, 1.0))
        result = sk.validate(shifted)
        assert not result.ok and any("mean" in f for f in result.failures)

    def test_grid_size_precondition(self):
        with pytest.raises(sk.DomainError):
            sk.validate(sk.uniform_spec(1.0), grid_size=32)

    def test_heavy_tail_zero_mean_exact(self):
        # the closed-form antiderivative integrates the singular tail exactly
        result = sk.validate(sk.heavy_tail_spec())
        assert result.ok
        assert abs(result.mean) < 1e-15

    def test_monotone_on_grid(self):
        for spec in (sk.uniform_spec(1.0), sk.heavy_tail_spec(), sk.two_point_spec(1.0)):
            u = (np.arange(512) + 0.5) / 512
            q = spec.quantile(u)
            assert np.all(np.diff(q) >= 0)


class TestPartialMean:
    def test_uniform_analytic(self):
        spec = sk.uniform_spec(1.0)
        assert spec.partial_mean(0.0, 0.5) == pytest.approx(-0.25)
        assert spec.partial_mean(0.0, 1.0) == 0.0

    def test_table_exact(self):
        spec = sk.two_point_spec(2.0)
        assert spec.partial_mean(0.0, 0.5) == pytest.approx(-1.0)
        assert spec.partial_mean(0.25, 0.75) == pytest.approx(-0.5 + 0.5)

    def test_heavy_tail_quadrature_oracle(self):
        # independent oracle: adaptive quadrature in t = -ln u coordinates
        mp.mp.dps = 30
        a, b = 1e-6, 0.5
        oracle = mp.quad(
            lambda t: (5 / (mp.log(10) + 1) ** 2 - 10 * mp.e**t / (1 + mp.log(10) + t) ** 3) * mp.e**-t,
            [-mp.log(b), 3, -mp.log(a)],
        )
        spec = sk.heavy_tail_spec()
        assert spec.partial_mean(a, b) == pytest.approx(float(oracle), abs=1e-12)


class TestInverseTransformSampling:
    def test_uniform_ks_band(self):
        # q(U) must sample the law: ECDF vs closed-form CDF, 99% band
        n = 100_000
        rng = np.random.default_rng(7)
        x = sk.uniform_spec(1.0).quantile(rng.uniform(1e-12, 1 - 1e-12, size=n))
        result = sk.ks_one_sample(x, lambda v: (v + 1.0) / 2.0)
        assert result.passed, result.statistic


class TestKoebe:
    def test_boundary_flags(self):
        kb = sk.koebe_boundary()
        assert kb.singular_at_zero and not kb.singular_at_pi
        assert kb(math.pi) == pytest.approx(-0.25)

    def test_cdf_limits(self):
        assert sk.koebe_exit_cdf(-0.25) == pytest.approx(1.0)
        assert sk.koebe_exit_cdf(-1e9) == pytest.approx(0.0, abs=1e-4)

    def test_boundary_inverts_cdf(self):
        # phi(t) = F^{-1}(|t|/pi): pushing the fold through F recovers |t|/pi
        kb = sk.koebe_boundary()
        t = np.linspace(0.3, math.pi - 0.01, 64)
        np.testing.assert_allclose(sk.koebe_exit_cdf(kb(t)), t / math.pi, atol=1e-12)


class TestTableCsv:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text("u,q\n0.5,-1.0\n1.0,1.0\n", encoding="utf-8")
        spec = sk.load_table_csv(path)
        assert spec.quantile(0.25) == -1.0
        assert spec.validation.ok

    def test_header_required(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n0.5,-1\n", encoding="utf-8")
        with pytest.raises(sk.TableFormatError):
            sk.load_table_csv(path)

    def test_bad_number_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("u,q\n0,5;-1\n", encoding="utf-8")
        with pytest.raises(sk.TableFormatError):
            sk.load_table_csv(path)

    def test_u_must_increase_to_one(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("u,q\n0.5,-1\n0.9,1\n", encoding="utf-8")
        with pytest.raises(sk.TableFormatError):
            sk.load_table_csv(path)

    def test_atom_spec(self):
        spec = sk.atom_spec([-2.0, 1.0], [1.0 / 3.0, 2.0 / 3.0])
        assert spec.validation.ok
        assert spec.quantile(0.2) == -2.0
        assert spec.quantile(0.9) == 1.0

    def test_linear_interp_opt_in(self):
        spec = sk.table_spec((0.5, 1.0), (-1.0, 1.0), interp="linear")
        assert spec.quantile(0.75) == pytest.approx(0.0)
