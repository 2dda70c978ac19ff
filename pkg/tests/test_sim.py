"""Tests for the data generator and the replication benchmark."""
import numpy as np
import pytest
from scipy import integrate, stats

from vcfam.errors import ParameterError, ShapeError, TuningError
from vcfam.pipeline import PipelineOptions
from vcfam.sim import (
    GRID_SIZE,
    MEASUREMENT_VARIANCE,
    N_TRUE_COMPONENTS,
    BenchmarkResult,
    SimConfig,
    generate,
    latent_signal,
    mse,
    replicate_benchmark,
    score_variances,
    true_component,
)

BIG = SimConfig(n=20000, sigma=0.05, seed=100)


@pytest.fixture(scope="module")
def big_data():
    return generate(BIG)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ParameterError):
            SimConfig(n=1)
        with pytest.raises(ParameterError):
            SimConfig(sigma=-0.1)
        with pytest.raises(ParameterError):
            SimConfig(t_mode="poisson")


class TestScoreVariances:
    def test_geometric_ladder(self):
        v = score_variances()
        assert v.shape == (20,)
        assert v[0] == pytest.approx(28.96)
        np.testing.assert_allclose(v[1:] / v[:-1], 0.64)


class TestTrueComponents:
    def test_hand_values(self):
        assert true_component(0, 0.0, 0.0) == pytest.approx(1.0)
        assert true_component(0, 0.5, 0.5) == pytest.approx(-1.0)
        assert true_component(1, 0.25, 0.25) == pytest.approx(0.0)
        assert true_component(1, 0.5, 0.25) == pytest.approx(1.0)
        assert true_component(2, 0.5, 0.9) == pytest.approx(0.25 - 1.0 / 3.0)
        assert true_component(7, 0.3, 0.3) == 0.0

    def test_broadcasting(self):
        z = np.array([0.1, 0.2, 0.3])
        out = true_component(2, z, 0.5)
        np.testing.assert_allclose(out, z**2 - 1.0 / 3.0)
        assert true_component(5, z, 0.5).shape == (3,)

    def test_latent_is_sum_of_active_components(self):
        rng = np.random.default_rng(0)
        zeta = rng.uniform(0.0, 1.0, (40, 5))
        t = rng.uniform(0.0, 1.0, 40)
        expected = sum(true_component(k, zeta[:, k], t) for k in range(3))
        np.testing.assert_allclose(latent_signal(zeta, t), expected)

    def test_latent_shape_checks(self):
        with pytest.raises(ShapeError):
            latent_signal(np.zeros((5, 2)), np.zeros(5))
        with pytest.raises(ShapeError):
            latent_signal(np.zeros((5, 3)), np.zeros(4))


class TestGenerate:
    def test_shapes_and_grid(self):
        d = generate(SimConfig(n=40, seed=1))
        assert d.curves.values.shape == (40, GRID_SIZE)
        np.testing.assert_allclose(d.curves.grid, np.linspace(0.0, 1.0, GRID_SIZE))
        assert d.xi.shape == (40, N_TRUE_COMPONENTS)
        assert d.zeta.shape == (40, N_TRUE_COMPONENTS)
        assert d.t.shape == d.y.shape == d.latent.shape == (40,)

    def test_deterministic(self):
        a = generate(SimConfig(n=60, seed=7))
        b = generate(SimConfig(n=60, seed=7))
        np.testing.assert_array_equal(a.curves.values, b.curves.values)
        np.testing.assert_array_equal(a.y, b.y)
        c = generate(SimConfig(n=60, seed=8))
        assert not np.array_equal(a.y, c.y)

    def test_sequential_design_points(self):
        d = generate(SimConfig(n=25, seed=2, t_mode="sequential"))
        np.testing.assert_allclose(d.t, np.arange(1, 26) / 25.0)

    def test_uniform_design_points_in_open_interval(self, big_data):
        assert big_data.t.min() > 0.0 and big_data.t.max() < 1.0
        assert stats.kstest(big_data.t, "uniform").pvalue > 0.01

    def test_score_marginals(self, big_data):
        variances = score_variances()
        sample_var = big_data.xi.var(axis=0)
        np.testing.assert_allclose(sample_var[:4], variances[:4], rtol=0.06)
        z = big_data.xi[:, 0] / np.sqrt(variances[0])
        assert stats.kstest(z, "norm").pvalue > 0.01

    def test_zeta_is_probability_transform(self, big_data):
        variances = score_variances()
        for k in (0, 3, 19):
            expected = stats.norm.cdf(big_data.xi[:, k], scale=np.sqrt(variances[k]))
            np.testing.assert_allclose(big_data.zeta[:, k], expected, atol=1e-12)
        assert stats.kstest(big_data.zeta[:, 0], "uniform").pvalue > 0.01

    def test_measurement_noise_level(self, big_data):
        from vcfam.basis import eval_basis, fourier_basis

        grid = big_data.curves.grid
        eigen = eval_basis(fourier_basis(N_TRUE_COMPONENTS + 1, (0.0, 1.0)), grid)[:, 1:]
        clean = (grid + np.sin(grid)) + big_data.xi @ eigen.T
        residual = big_data.curves.values - clean
        assert residual.mean() == pytest.approx(0.0, abs=0.01)
        assert residual.var() == pytest.approx(MEASUREMENT_VARIANCE, rel=0.03)

    def test_response_noise_scales_with_signal_range(self, big_data):
        noise = big_data.y - big_data.latent
        assert noise.std() == pytest.approx(0.05 * big_data.signal_range, rel=0.05)

    def test_zero_noise_gives_latent_exactly(self):
        d = generate(SimConfig(n=30, sigma=0.0, seed=3))
        np.testing.assert_array_equal(d.y, d.latent)


class TestLatentMoments:
    def test_mean_against_analytic_value(self, big_data):
        # E over independent uniform zeta and t: only the first component
        # has a nonzero mean, -4/pi^2
        assert big_data.latent.mean() == pytest.approx(-4.0 / np.pi**2, abs=0.025)

    def test_second_moment_against_quadrature_oracle(self, big_data):
        sq1, _ = integrate.dblquad(
            lambda z, t: np.cos(np.pi * (z + t)) ** 2, 0, 1, 0, 1
        )
        sq2, _ = integrate.dblquad(
            lambda z, t: np.sin(2 * np.pi * (z + t - 0.5)) ** 2, 0, 1, 0, 1
        )
        sq3, _ = integrate.quad(lambda z: (z**2 - 1.0 / 3.0) ** 2, 0, 1)
        # cross terms vanish: components 1 and 2 are mean-zero over zeta at
        # every fixed t, and component 3 is mean-zero over zeta outright
        for t in (0.0, 0.3, 0.7):
            m2, _ = integrate.quad(lambda z: np.sin(2 * np.pi * (z + t - 0.5)), 0, 1)
            assert abs(m2) < 1e-12
        m3, _ = integrate.quad(lambda z: z**2 - 1.0 / 3.0, 0, 1)
        assert abs(m3) < 1e-12
        oracle = sq1 + sq2 + sq3
        assert oracle == pytest.approx(0.5 + 0.5 + 4.0 / 45.0, abs=1e-10)
        assert mse(big_data.latent, np.zeros(BIG.n)) == pytest.approx(oracle, abs=0.05)


class TestMse:
    def test_hand_value(self):
        assert mse([1.0, 2.0], [0.0, 0.0]) == pytest.approx(2.5)

    def test_shape_errors(self):
        with pytest.raises(ShapeError):
            mse([1.0, 2.0], [1.0])
        with pytest.raises(ShapeError):
            mse([], [])


FAST_OPTIONS = PipelineOptions(
    n_components=2, m1=5, m2=4, lambda_grid_zeta=(1e-2,), lambda_grid_t=(1e-2,)
)


class TestReplicateBenchmark:
    def test_structure_and_summaries(self):
        result = replicate_benchmark(
            SimConfig(n=70, sigma=0.05, seed=5), 2, ("flm", "vcfam"), FAST_OPTIONS
        )
        assert isinstance(result, BenchmarkResult)
        assert result.models == ("flm", "vcfam")
        assert result.seeds == (5, 6)
        assert len(result.n_components) == 2
        for summary in result.summaries:
            assert summary.n_reps == 2
            assert summary.n_failures == 0
            assert len(summary.mse_values) == 2
            assert summary.mean_mse_x10 == pytest.approx(
                10.0 * np.mean(summary.mse_values)
            )
            assert summary.sd_mse_x100 == pytest.approx(
                100.0 * np.std(summary.mse_values, ddof=1)
            )
        assert result.summary_for("vcfam").mean_mse < result.summary_for("flm").mean_mse

    def test_deterministic(self):
        a = replicate_benchmark(SimConfig(n=60, seed=9), 2, ("fam2",), FAST_OPTIONS)
        b = replicate_benchmark(SimConfig(n=60, seed=9), 2, ("fam2",), FAST_OPTIONS)
        assert a.summary_for("fam2").mse_values == b.summary_for("fam2").mse_values

    def test_model_failures_are_isolated(self, monkeypatch):
        from vcfam import sim as sim_module

        real = sim_module.fit_regression

        def flaky(fpca, t, y, options):
            if options.model == "flm":
                raise TuningError("synthetic failure")
            return real(fpca, t, y, options)

        monkeypatch.setattr(sim_module, "fit_regression", flaky)
        result = replicate_benchmark(
            SimConfig(n=60, seed=10), 2, ("flm", "fam2"), FAST_OPTIONS
        )
        flm = result.summary_for("flm")
        assert flm.n_failures == 2 and np.isnan(flm.mean_mse_x10)
        assert result.summary_for("fam2").n_failures == 0
        assert len(result.failures) == 2

    def test_validation(self):
        with pytest.raises(ParameterError):
            replicate_benchmark(SimConfig(), 0)
        with pytest.raises(ParameterError):
            replicate_benchmark(SimConfig(), 1, ("boost",))
        with pytest.raises(ParameterError):
            replicate_benchmark(SimConfig(), 1, ())

    def test_progress_callback(self):
        seen = []
        replicate_benchmark(
            SimConfig(n=60, seed=11),
            2,
            ("flm",),
            FAST_OPTIONS,
            progress=lambda done, total: seen.append((done, total)),
        )
        assert seen == [(1, 2), (2, 2)]
