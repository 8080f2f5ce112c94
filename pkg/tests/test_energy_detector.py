import math

import numpy as np
import pytest

from energy_detector import (
    DetectorConfig, decide, energy_statistic, pd_chi_square, pd_gaussian, pd_marcum,
    pd_rayleigh, pf_chi_square, pf_gamma, pf_gaussian, rayleigh_average,
    required_samples, threshold_for_pf,
)
from errors import DomainError
from signal_model import SampleFrame, Hypothesis, SeededRng


def _se(p, n):
    return math.sqrt(p * (1 - p) / n)


class TestDetectorConfig:
    def test_threshold_conventions(self):
        raw = DetectorConfig(100, 400.0)
        norm = DetectorConfig(100, 4.0, normalized=True)
        assert raw.threshold_norm == pytest.approx(4.0)
        assert norm.threshold_raw == pytest.approx(400.0)

    @pytest.mark.parametrize("n,th", [(0, 1.0), (2.5, 1.0), (10, 0.0), (10, -1.0), (10, math.inf)])
    def test_invalid(self, n, th):
        with pytest.raises(DomainError):
            DetectorConfig(n, th)


class TestEnergyStatistic:
    def test_zero_frame(self):
        frame = SampleFrame(np.zeros(4), Hypothesis.H0)
        assert energy_statistic(frame, DetectorConfig(4, 1.0)) == 0.0

    def test_sum_of_squares(self):
        frame = SampleFrame(np.array([1.0, -1.0, 2.0]), Hypothesis.H1)
        assert energy_statistic(frame, DetectorConfig(3, 1.0)) == pytest.approx(6.0)
        assert energy_statistic(frame, DetectorConfig(3, 1.0, normalized=True)) == pytest.approx(2.0)

    def test_length_mismatch(self):
        frame = SampleFrame(np.ones(5), Hypothesis.H0)
        with pytest.raises(DomainError):
            energy_statistic(frame, DetectorConfig(4, 1.0))


class TestDecide:
    def test_above(self):
        assert decide(5.0, 4.0).decision == 1

    def test_tie_reports_idle(self):
        assert decide(4.0, 4.0).decision == 0

    def test_below(self):
        report = decide(3.9, 4.0)
        assert report.decision == 0
        assert report.energy == 3.9


class TestGaussianApproximation:
    def test_pf_at_noise_mean(self):
        assert pf_gaussian(DetectorConfig(100, 4.0, normalized=True), 4.0) == pytest.approx(0.5)

    def test_pf_ten_percent(self):
        cfg = DetectorConfig(100, 1 + 1.281552 * math.sqrt(2 / 100), normalized=True)
        assert pf_gaussian(cfg, 1.0) == pytest.approx(0.1, abs=1e-6)

    def test_pf_against_simulation(self):
        n, trials = 100, 50_000
        samples = SeededRng(31).normal(1.0, (trials, n))
        rate = np.mean(np.mean(samples ** 2, axis=1) > 1.25)
        cfg = DetectorConfig(n, 1.25, normalized=True)
        exact = pf_chi_square(cfg, 1.0)
        assert abs(rate - exact) <= 4 * _se(exact, trials)
        # the Gaussian form ignores the chi-square skew at N = 100
        assert pf_gaussian(cfg, 1.0) == pytest.approx(rate, abs=0.015)

    def test_pd_at_signal_mean(self):
        cfg = DetectorConfig(100, 1.5, normalized=True)
        assert pd_gaussian(cfg, 1.0, 0.5) == pytest.approx(0.5)

    def test_pd_vanishing_signal_is_pf(self):
        cfg = DetectorConfig(100, 1.1, normalized=True)
        assert pd_gaussian(cfg, 1.0, 1e-15) == pytest.approx(pf_gaussian(cfg, 1.0), abs=1e-9)

    def test_pd_against_simulation_at_minus_eight_db(self):
        n, trials, power = 100, 50_000, 10 ** -0.8
        rng = SeededRng(32)
        samples = rng.normal(1.0, (trials, n)) + rng.normal(math.sqrt(power), (trials, n))
        rate = np.mean(np.mean(samples ** 2, axis=1) > 1.2)
        cfg = DetectorConfig(n, 1.2, normalized=True)
        exact = pd_chi_square(cfg, 1.0, power)
        assert abs(rate - exact) <= 4 * _se(exact, trials)
        assert pd_gaussian(cfg, 1.0, power) == pytest.approx(rate, abs=0.03)

    def test_pd_not_below_pf(self):
        for th in np.linspace(200, 700, 26):
            cfg = DetectorConfig(100, th)
            assert pd_gaussian(cfg, 4.0, 0.6) >= pf_gaussian(cfg, 4.0)


class TestRequiredSamples:
    def test_reference_point(self):
        assert required_samples(0.1, 0.9, 0.1) == 1449

    def test_zero_quantiles_floor_to_one(self):
        assert required_samples(0.5, 0.5, 0.3) == 1

    def test_halving_snr_needs_more(self):
        assert required_samples(0.1, 0.9, 0.05) > required_samples(0.1, 0.9, 0.1)

    @pytest.mark.parametrize("pf,pd,snr", [(0.0, 0.9, 0.1), (0.1, 1.0, 0.1), (0.1, 0.9, 0.0)])
    def test_domain(self, pf, pd, snr):
        with pytest.raises(DomainError):
            required_samples(pf, pd, snr)

    def test_threshold_for_pf_inverts_pf_gaussian(self):
        th = threshold_for_pf(100, 4.0, 0.05)
        assert pf_gaussian(DetectorConfig(100, th), 4.0) == pytest.approx(0.05, rel=1e-9)
        th_norm = threshold_for_pf(100, 4.0, 0.05, normalized=True)
        assert th_norm == pytest.approx(th / 100)


class TestChiSquare:
    def test_pf_median(self):
        # chi2 with 2 degrees of freedom has median 2 ln 2
        cfg = DetectorConfig(2, 2 * math.log(2) * 3.0)
        assert pf_chi_square(cfg, 3.0) == pytest.approx(0.5)

    def test_pd_uses_total_power(self):
        cfg = DetectorConfig(50, 300.0)
        assert pd_chi_square(cfg, 4.0, 2.0) == pytest.approx(pf_chi_square(cfg, 6.0))


class TestMarcumAndGamma:
    def test_pd_marcum_small_threshold(self):
        assert pd_marcum(DetectorConfig(4, 1e-12), 2.0) == pytest.approx(1.0, abs=1e-9)

    def test_pf_gamma_small_threshold(self):
        assert pf_gamma(DetectorConfig(4, 1e-12), 3.0) == pytest.approx(1.0, abs=1e-9)

    def test_pf_gamma_exponential_case(self):
        assert pf_gamma(DetectorConfig(1, 2 * math.log(2)), 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_pd_marcum_zero_snr_is_pf_gamma(self):
        cfg = DetectorConfig(6, 9.0)
        assert pd_marcum(cfg, 0.0) == pytest.approx(pf_gamma(cfg, 6), abs=1e-12)

    def test_pd_marcum_against_simulation(self):
        n, snr, trials = 5, 1.0, 200_000
        samples = SeededRng(51).normal(1.0, (trials, 2 * n))
        samples[:, 0] += math.sqrt(2 * snr)
        rate = np.mean(np.sum(samples ** 2, axis=1) > 12.0)
        p = pd_marcum(DetectorConfig(n, 12.0), snr)
        assert abs(rate - p) <= 4 * _se(p, trials)

    def test_pf_gamma_against_simulation(self):
        u, trials = 10, 200_000
        samples = SeededRng(52).normal(1.0, (trials, 2 * u))
        rate = np.mean(np.sum(samples ** 2, axis=1) > 20.0)
        p = pf_gamma(DetectorConfig(u, 20.0), u)
        assert abs(rate - p) <= 4 * _se(p, trials)

    def test_pd_marcum_domain(self):
        with pytest.raises(DomainError):
            pd_marcum(DetectorConfig(4, 1.0), -0.1)

    def test_pf_gamma_domain(self):
        with pytest.raises(DomainError):
            pf_gamma(DetectorConfig(4, 1.0), 0.0)


class TestRayleigh:
    def test_small_threshold_always_detects(self):
        assert pd_rayleigh(DetectorConfig(5, 1e-12), 2.0) == pytest.approx(1.0, abs=1e-9)

    def test_matches_quadrature(self):
        cfg = DetectorConfig(5, 10.0)
        expected = rayleigh_average(lambda g: pd_marcum(cfg, g), 2.0)
        assert pd_rayleigh(cfg, 2.0) == pytest.approx(expected, abs=1e-6)

    def test_huge_mean_snr(self):
        cfg = DetectorConfig(5, 2.0)
        assert pd_rayleigh(cfg, 1e6) >= 1 - 1e-6
        assert pd_rayleigh(cfg, 1e6) > pd_rayleigh(cfg, 1e3)

    @pytest.mark.parametrize("n,threshold,mean", [
        (100, 220.0, 0.1585), (100, 200.0, 1.0), (50, 120.0, 0.1), (200, 450.0, 0.01),
    ])
    def test_large_order_low_snr_matches_quadrature(self, n, threshold, mean):
        cfg = DetectorConfig(n, threshold)
        expected = rayleigh_average(lambda g: pd_marcum(cfg, g), mean)
        assert pd_rayleigh(cfg, mean) == pytest.approx(expected, abs=1e-6)

    def test_minus_eight_db_at_one_hundred_samples(self):
        assert pd_rayleigh(DetectorConfig(100, 220.0), 0.1585) == pytest.approx(
            0.16228686792583727, abs=1e-6)

    def test_single_sample_order(self):
        # first order: exp(-E/(2(1+g)))
        cfg = DetectorConfig(1, 4.0)
        assert pd_rayleigh(cfg, 3.0) == pytest.approx(math.exp(-4.0 / 8.0), abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            pd_rayleigh(DetectorConfig(5, 1.0), 0.0)
        with pytest.raises(DomainError):
            rayleigh_average(lambda g: 1.0, -1.0)


class TestThresholdMonotonicity:
    @pytest.mark.parametrize("curve,grid", [
        (lambda th: pf_gaussian(DetectorConfig(100, th), 4.0), (200.0, 900.0)),
        (lambda th: pd_gaussian(DetectorConfig(100, th), 4.0, 4.0 * 10 ** -0.8), (200.0, 900.0)),
        (lambda th: pd_marcum(DetectorConfig(20, th), 1.5), (1.0, 120.0)),
        (lambda th: pf_gamma(DetectorConfig(20, th), 20), (1.0, 120.0)),
        (lambda th: pd_rayleigh(DetectorConfig(20, th), 2.0), (1.0, 120.0)),
        (lambda th: pd_rayleigh(DetectorConfig(100, th), 0.1585), (100.0, 400.0)),
    ], ids=["pf_gaussian", "pd_gaussian", "pd_marcum", "pf_gamma", "pd_rayleigh", "pd_rayleigh_n100"])
    def test_non_increasing_on_fifty_points(self, curve, grid):
        values = [curve(th) for th in np.linspace(*grid, 50)]
        assert all(0.0 <= v <= 1.0 for v in values)
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
