import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specband.kernel import PriorHyperParams, build_observed_cov
from specband.signal import (
    PanelConfig,
    SnapshotPanel,
    draw_amplitudes,
    draw_frequencies,
    generate_panel,
    make_rng,
    snr_to_noise_variance,
    synthesize,
)

TWO_PI = 2 * np.pi


def prior(centers=(1.0,), W=0.1, s2=1.0, noise=0.0, check=True):
    return PriorHyperParams(np.array(centers), W, s2, noise, check=check)


class TestDrawFrequencies:
    def test_zero_width(self):
        p = prior([1.2], 0.0, check=False)
        assert draw_frequencies(p, make_rng(0))[0] == 1.2

    def test_inside_support(self):
        p = prior([TWO_PI * 0.3145], TWO_PI * 0.0465)
        w = draw_frequencies(p, make_rng(1), size=1000)
        assert w.min() >= TWO_PI * 0.268 and w.max() <= TWO_PI * 0.361

    def test_moments(self):
        th, W = 1.0, 0.3
        w = draw_frequencies(prior([th], W), make_rng(2), size=100_000)[:, 0]
        se = W / np.sqrt(3) / np.sqrt(w.size)
        assert abs(w.mean() - th) < 3 * se
        assert w.var() == pytest.approx(W**2 / 3, rel=0.05)

    def test_deterministic(self):
        p = prior([1.0, 2.0], 0.1)
        np.testing.assert_array_equal(draw_frequencies(p, make_rng(5)), draw_frequencies(p, make_rng(5)))


class TestAmplitudes:
    @pytest.mark.parametrize("law", ["gaussian", "uniform"])
    def test_variance(self, law):
        a = draw_amplitudes(law, 2.5, make_rng(3), 200_000)
        assert a.var() == pytest.approx(2.5, rel=0.02)
        assert abs(a.mean()) < 0.02

    def test_uniform_bound(self):
        a = draw_amplitudes("uniform", 1.3813**2 / 3, make_rng(4), 10_000)
        assert np.abs(a).max() <= 1.3813

    def test_unknown_law(self):
        with pytest.raises(ValueError):
            draw_amplitudes("cauchy", 1.0, make_rng(0), 3)


class TestPanel:
    def test_shapes_and_truth(self):
        cfg = PanelConfig(prior([1.0, 2.0], 0.1, noise=0.1), N=30, L=7, seed=11)
        pan = generate_panel(cfg)
        assert pan.data.shape == (7, 30) and pan.L == 7 and pan.N == 30
        assert pan.omega.shape == pan.a.shape == pan.b.shape == (7, 2)
        assert np.all(np.abs(pan.omega - np.array([1.0, 2.0])) <= 0.1)

    def test_same_seed_bit_identical(self):
        cfg = PanelConfig(prior([1.0], 0.2, noise=0.3), 50, 20, "uniform", seed=123)
        np.testing.assert_array_equal(generate_panel(cfg).data, generate_panel(cfg).data)
        other = PanelConfig(prior([1.0], 0.2, noise=0.3), 50, 20, "uniform", seed=124)
        assert not np.array_equal(generate_panel(cfg).data, generate_panel(other).data)

    def test_noiseless_matches_model(self):
        pan = generate_panel(PanelConfig(prior([0.7, 2.1], 0.2), 40, 5, seed=9))
        t = np.arange(1, 41)
        k = 3
        ref = sum(pan.a[k, l] * np.cos(pan.omega[k, l] * t) + pan.b[k, l] * np.sin(pan.omega[k, l] * t) for l in range(2))
        np.testing.assert_allclose(pan.data[k], ref, atol=1e-12)

    def test_deterministic_cosine(self):
        x = synthesize(np.array([[0.9]]), np.array([[1.0]]), np.array([[0.0]]), 10)
        np.testing.assert_allclose(x[0], np.cos(0.9 * np.arange(1, 11)))

    @pytest.mark.parametrize("N, L", [(1, 5), (10, 0)])
    def test_invalid_dimensions(self, N, L):
        with pytest.raises(ValueError):
            PanelConfig(prior(), N, L)

    def test_truth_rows_must_match(self):
        with pytest.raises(ValueError):
            SnapshotPanel(np.zeros((3, 4)), omega=np.zeros((2, 1)))

    def test_lag_covariance_matches_kernel(self):
        # cross-sectional lag products over many snapshots converge to the model covariance
        p = prior([1.0, 2.2], 0.15, 1.0, 0.2)
        pan = generate_panel(PanelConfig(p, 12, 40_000, "uniform", seed=21))
        Y = pan.data
        emp = np.array([np.mean(Y[:, 0] * Y[:, tau]) for tau in range(12)])
        ref = build_observed_cov(p, 12).first_column
        # each lag product has variance below ~ (2 sigma2 + noise)^2 * 3
        np.testing.assert_allclose(emp, ref, atol=5 * np.sqrt(3 * 2.2**2 / Y.shape[0]))

    def test_single_path_time_average(self):
        # fixed omega: one long path's ACF tends to (a^2 + b^2)/2 cos(omega tau) + noise delta
        N, a, b, om, s2w = 200_000, 0.8, -0.6, 1.1, 0.25
        rng = make_rng(8)
        y = synthesize(np.array([[om]]), np.array([[a]]), np.array([[b]]), N)[0] + rng.normal(0, np.sqrt(s2w), N)
        for tau in (0, 1, 5):
            acf = np.mean(y[: N - tau] * y[tau:])
            ref = (a * a + b * b) / 2 * np.cos(om * tau) + (s2w if tau == 0 else 0)
            assert abs(acf - ref) < 3 * np.sqrt(2 * (1 + s2w) ** 2 / N) * 3


class TestSnr:
    @pytest.mark.parametrize(
        "snr, s2, expected", [(0, 1.0, 1.0), (15, 1.0, 10 ** (-1.5)), (20, 4.0, 0.04)]
    )
    def test_examples(self, snr, s2, expected):
        assert snr_to_noise_variance(snr, s2) == pytest.approx(expected, rel=1e-12)

    def test_rejects_nonpositive_variance(self):
        with pytest.raises(ValueError):
            snr_to_noise_variance(10, 0.0)

    @settings(max_examples=50)
    @given(snr=st.floats(-20, 60), s2=st.floats(1e-3, 1e3))
    def test_db_roundtrip(self, snr, s2):
        s2w = snr_to_noise_variance(snr, s2)
        assert 20 * np.log10(np.sqrt(s2) / np.sqrt(s2w)) == pytest.approx(snr, abs=1e-9)


class TestRng:
    def test_substreams_differ(self):
        a = make_rng(7, 0, 1).random(4)
        b = make_rng(7, 0, 2).random(4)
        assert not np.array_equal(a, b)
        np.testing.assert_array_equal(a, make_rng(7, 0, 1).random(4))

    def test_generator_passthrough(self):
        g = np.random.default_rng(0)
        assert make_rng(g) is g
