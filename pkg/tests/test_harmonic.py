import math

import numpy as np
import pytest

import skembed as sk
from skembed.harmonic import (
    DiscPoint,
    TrigSeries,
    analyze,
    boundary_value,
    conjugate_values,
    fejer_smoothed,
    grid_values,
    hilbert_pv,
    hilbert_series,
    schwarz_eval,
    schwarz_eval_kernel,
    series_power,
    series_values,
)

# analytic Fourier cosine integral of the folded uniform quantile
# phi(t) = 2|t|/pi - 1:  c_n = -8/(pi^2 n^2) for odd n, 0 for even n
UNIFORM_C = lambda n: -8.0 / (math.pi**2 * n**2) if n % 2 else 0.0


def random_poly(rng, degree=None, zero_mean=True, even=False):
    degree = degree or int(rng.integers(3, 24))
    cos = rng.normal(size=degree) / np.arange(1, degree + 1)
    sin = np.zeros(degree) if even else rng.normal(size=degree) / np.arange(1, degree + 1)
    c0 = 0.0 if zero_mean else float(rng.normal())
    return TrigSeries(c0, cos, sin, 0)


def poly_boundary(poly, even=False):
    return sk.BoundaryFunction(func=lambda th: series_values(poly, th), even_symmetric=even)


class TestAnalyze:
    def test_uniform_coefficients(self, uniform_series):
        for n in range(1, 12):
            assert uniform_series.cos_coeffs[n - 1] == pytest.approx(UNIFORM_C(n), abs=2e-9)
        assert uniform_series.c0 == pytest.approx(0.0, abs=1e-10)
        assert np.all(uniform_series.sin_coeffs == 0.0)

    def test_cos_orthogonality(self, cos_series):
        assert cos_series.cos_coeffs[0] == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(cos_series.cos_coeffs[1:])) < 1e-12
        assert cos_series.c0 == pytest.approx(0.0, abs=1e-13)

    def test_koebe_non_integrable(self):
        with pytest.raises(sk.NonIntegrableError) as err:
            analyze(sk.koebe_boundary(), n_coeffs=256, grid_size=4096)
        values = [v for _, v in err.value.trace]
        # the refinement trace itself shows unbounded growth (|phi| ~ 1/t^2)
        assert values[-1] > 10.0 * values[0]

    def test_grid_precondition(self, uniform_phi):
        with pytest.raises(sk.DomainError):
            analyze(uniform_phi, n_coeffs=512, grid_size=1024)

    def test_heavy_zero_mean_coefficient(self, heavy_series):
        assert abs(heavy_series.c0) < 1e-6

    def test_tail_estimate(self, uniform_series, cos_series):
        # uniform: true dropped l1 mass is about sum_{odd n > N} 8/(pi^2 n^2)
        true_tail = 8.0 / math.pi**2 * 0.5 / uniform_series.n
        assert 0.1 * true_tail < uniform_series.tail_estimate < 10.0 * true_tail
        assert cos_series.tail_estimate == 0.0

    def test_general_phi_recovers_both_parts(self):
        rng = np.random.default_rng(3)
        poly = random_poly(rng, degree=12)
        series = analyze(poly_boundary(poly), n_coeffs=32, grid_size=512)
        np.testing.assert_allclose(series.cos_coeffs[:12], poly.cos_coeffs, atol=1e-12)
        np.testing.assert_allclose(series.sin_coeffs[:12], poly.sin_coeffs, atol=1e-12)


class TestHilbertSeries:
    def test_cos_to_sin(self):
        s = TrigSeries(0.0, np.array([1.0]), np.array([0.0]), 0)
        h = hilbert_series(s)
        assert h.cos_coeffs[0] == 0.0 and h.sin_coeffs[0] == 1.0

    def test_anti_involution_exact(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            poly = random_poly(rng, zero_mean=True)
            twice = hilbert_series(hilbert_series(poly))
            np.testing.assert_array_equal(twice.cos_coeffs, -poly.cos_coeffs)
            np.testing.assert_array_equal(twice.sin_coeffs, -poly.sin_coeffs)
            assert twice.c0 == 0.0

    def test_constant_maps_to_zero(self):
        s = TrigSeries(3.5, np.zeros(4), np.zeros(4), 0)
        h = hilbert_series(s)
        assert h.c0 == 0.0
        assert np.all(h.cos_coeffs == 0.0) and np.all(h.sin_coeffs == 0.0)


class TestHilbertPv:
    def test_conjugate_of_cosine(self, cos_phi):
        assert hilbert_pv(cos_phi, math.pi / 3) == pytest.approx(math.sin(math.pi / 3), abs=1e-6)

    def test_sin_at_zero(self):
        phi = sk.BoundaryFunction(func=np.sin, even_symmetric=False)
        assert hilbert_pv(phi, 0.0) == pytest.approx(-1.0, abs=1e-6)

    def test_uniform_cross_oracle(self, uniform_phi, uniform_series):
        conj = hilbert_series(uniform_series)
        x = math.pi / 2
        assert hilbert_pv(uniform_phi, x) == pytest.approx(series_values(conj, x), abs=1e-4)

    def test_random_points_smooth_phi(self):
        rng = np.random.default_rng(5)
        poly = random_poly(rng, degree=16)
        phi = poly_boundary(poly)
        conj = hilbert_series(poly)
        xs = rng.uniform(-math.pi, math.pi, size=100)
        for x in xs:
            assert hilbert_pv(phi, float(x)) == pytest.approx(series_values(conj, float(x)), abs=1e-4)

    def test_jump_reports_oscillation(self):
        phi = sk.fold_to_boundary(sk.two_point_spec(1.0))
        with pytest.raises(sk.ConvergenceError) as err:
            hilbert_pv(phi, math.pi / 2)
        assert err.value.oscillation > 1e-3

    def test_singular_point_refused(self, heavy_phi):
        with pytest.raises(sk.DomainError):
            hilbert_pv(heavy_phi, 0.0)


class TestSchwarzEval:
    def test_zero_mean_at_origin(self, uniform_series):
        assert schwarz_eval(uniform_series, 0j) == pytest.approx(0.0, abs=1e-12)

    def test_cos_is_identity_map(self, cos_phi, cos_series):
        for z in (0.3 + 0.1j, -0.5j, 0.7 + 0.2j):
            assert schwarz_eval(cos_series, z) == pytest.approx(z, abs=1e-10)
            # dual-method oracle: direct kernel quadrature agrees
            assert schwarz_eval_kernel(cos_phi, z, 8192) == pytest.approx(z, abs=1e-8)

    def test_uniform_dual_method(self, uniform_phi, uniform_series):
        z = 0.5 + 0j
        series_val = schwarz_eval(uniform_series, z)
        kernel_val = schwarz_eval_kernel(uniform_phi, z, 65536)
        assert abs(series_val - kernel_val) < 1e-8

    def test_disc_point_and_domain_error(self, uniform_series):
        p = DiscPoint(0.5, math.pi / 4)
        assert schwarz_eval(uniform_series, p) == schwarz_eval(uniform_series, p.z)
        with pytest.raises(sk.DomainError):
            schwarz_eval(uniform_series, 1.0 + 0j)
        with pytest.raises(sk.DomainError):
            DiscPoint(1.0, 0.0)


class TestBoundaryValue:
    def test_uniform_median_real_part(self, uniform_series):
        assert boundary_value(uniform_series, math.pi / 2).real == pytest.approx(0.0, abs=1e-3)

    def test_cos_unit_circle(self, cos_series):
        theta = np.linspace(-math.pi, math.pi, 17)
        np.testing.assert_allclose(boundary_value(cos_series, theta), np.exp(1j * theta), atol=1e-10)

    def test_uniform_endpoint(self, uniform_series):
        val = boundary_value(uniform_series, math.pi).real
        assert val == pytest.approx(1.0, abs=5.0 * uniform_series.tail_estimate)

    def test_monotone_real_part(self, uniform_series):
        theta = np.linspace(0.0, math.pi, 2048)
        re = series_values(uniform_series, theta)
        assert np.min(np.diff(re)) > -1e-3  # up to truncation ripple

    def test_monotone_with_jump_masked(self):
        phi = sk.fold_to_boundary(sk.two_point_spec(1.0))
        series = analyze(phi, n_coeffs=512, grid_size=8192)
        theta = np.linspace(0.0, math.pi, 4096)
        re = series_values(series, theta)
        # partial sums of a step ripple at wavelength ~1/N everywhere, so the
        # monotone trend is read on window averages; the jump window is exempt
        window = 64
        centers = theta[: len(theta) // window * window].reshape(-1, window).mean(axis=1)
        means = re[: len(re) // window * window].reshape(-1, window).mean(axis=1)
        mask = np.abs(centers[:-1] - math.pi / 2) > 0.1
        assert np.min(np.diff(means)[mask]) > -1e-3


class TestIdentities:
    def test_parseval_trig_poly(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            poly = random_poly(rng, zero_mean=False)
            m = 8 * (poly.n + 1)
            theta = 2.0 * np.pi * np.arange(m) / m
            grid_mean = float(np.mean(series_values(poly, theta) ** 2))
            parseval = poly.c0**2 + 0.5 * float(np.sum(poly.cos_coeffs**2 + poly.sin_coeffs**2))
            assert grid_mean == pytest.approx(parseval, abs=1e-10)

    def test_radial_consistency(self, uniform_series):
        theta = np.linspace(-math.pi, math.pi, 512, endpoint=False)
        bnd = boundary_value(uniform_series, theta)
        dists = []
        for r in (0.9, 0.99, 0.999):
            inner = schwarz_eval(uniform_series, r * np.exp(1j * theta))
            dists.append(float(np.mean(np.abs(inner - bnd))))
        assert dists[0] > dists[1] > dists[2]

    def test_grid_values_match_direct(self, uniform_series):
        theta, vals = grid_values(uniform_series.truncated(256), 2048)
        direct = boundary_value(uniform_series.truncated(256), theta)
        np.testing.assert_allclose(vals, direct, atol=1e-12)

    def test_conjugate_values_are_imag_part(self, uniform_series):
        theta = np.array([0.3, 1.2, 2.9])
        np.testing.assert_allclose(
            conjugate_values(uniform_series, theta), boundary_value(uniform_series, theta).imag
        )

    def test_series_power(self):
        s = TrigSeries(2.0, np.array([3.0]), np.array([4.0]), 0)
        assert series_power(s) == pytest.approx(4.0 + 9.0 + 16.0)

    def test_fejer_damping(self, uniform_series):
        f = fejer_smoothed(uniform_series)
        n = uniform_series.n
        assert f.cos_coeffs[0] == pytest.approx(uniform_series.cos_coeffs[0] * (1 - 1 / (n + 1)))
        assert abs(f.cos_coeffs[-1]) < abs(uniform_series.cos_coeffs[-3])


class TestSeriesJson:
    def test_round_trip(self, uniform_series):
        text = uniform_series.to_json()
        back = TrigSeries.from_json(text)
        np.testing.assert_array_equal(back.cos_coeffs, uniform_series.cos_coeffs)
        np.testing.assert_array_equal(back.sin_coeffs, uniform_series.sin_coeffs)
        assert back.c0 == uniform_series.c0
        assert back.grid_size == uniform_series.grid_size
        assert back.tail_estimate == uniform_series.tail_estimate

    def test_schema_keys(self, cos_series):
        data = cos_series.to_json_dict()
        assert set(data) == {"n", "c0", "cos", "sin", "grid_size", "tail_estimate"}
