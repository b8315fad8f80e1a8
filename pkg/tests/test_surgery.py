"""Timelike decoding: figure reproductions, suppression, ansatz fits."""

import math

import pytest

from catqec.experiments import run_experiment
from catqec.noise import regime
from catqec.surgery import FitResult, SurgeryConfig, TimelikeExperiment, fit_ansatz


@pytest.fixture(scope="module")
def exp_d5_dm4():
    return TimelikeExperiment(SurgeryConfig("repetition", 5, 4), regime(1))


class TestFigureExamples:
    def test_single_round1_flip_corrected(self, exp_d5_dm4):
        key, fault = exp_d5_dm4.meas_flip_injection(slot=1, round_index=0)
        out = exp_d5_dm4.run_injected({key: fault})
        assert out["failures"] == 0
        assert out["reported_parity"] == out["true_parity"] == 0

    def test_two_consecutive_flips_fail(self, exp_d5_dm4):
        k1, f1 = exp_d5_dm4.meas_flip_injection(1, 0)
        k2, f2 = exp_d5_dm4.meas_flip_injection(1, 1)
        out = exp_d5_dm4.run_injected({k1: f1, k2: f2})
        assert out["failures"] == 1
        assert out["reported_parity"] == 1

    def test_zero_noise_parity_right(self, exp_d5_dm4):
        out = exp_d5_dm4.run_injected({})
        assert out["failures"] == 0


class TestSuppression:
    def test_rate_falls_with_dm(self):
        rates = {}
        for dm in (2, 4):
            res = run_experiment(
                TimelikeExperiment,
                dict(cfg=SurgeryConfig("repetition", 5, dm), params=regime(1)),
                shots=4000, master_seed=21, threads=0)
            rates[dm] = (res.rate, res.stderr)
        assert rates[4][0] + 3 * rates[4][1] < rates[2][0] - 3 * rates[2][1]

    def test_surface_strip_runs(self):
        exp = TimelikeExperiment(SurgeryConfig("surface", 3, 3), regime(2))
        out = exp.run_shot(5, 0)
        assert out["reported_parity"] in (0, 1)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SurgeryConfig("repetition", 5, 0)
        with pytest.raises(ValueError):
            SurgeryConfig("repetition", 5, 4, ell=0)
        with pytest.raises(ValueError):
            TimelikeExperiment(SurgeryConfig("toric", 5, 4), regime(1))


class TestFit:
    def test_round_trip_within_percent(self):
        a, b, c = 0.014, 770.0, 0.41
        points = []
        for d in (3, 5, 7, 9):
            for r in (1e-4, 3e-4, 1e-3):
                points.append((d, r, a * (b * r) ** (c * d)))
        fit = fit_ansatz(points)
        assert fit.a == pytest.approx(a, rel=0.01)
        assert fit.b == pytest.approx(b, rel=0.01)
        assert fit.c == pytest.approx(c, rel=0.01)
        assert not fit.degenerate

    def test_prefactors(self):
        a, b, c = 0.0093, 3559.0, 0.292
        points, prefs = [], []
        for d in (3, 5, 7):
            for r in (1e-5, 1e-4):
                pref = 3.0 * d
                points.append((d, r, pref * a * (b * r) ** (c * d)))
                prefs.append(pref)
        fit = fit_ansatz(points, prefs)
        assert fit.c == pytest.approx(c, rel=0.01)

    def test_constant_data_degenerate(self):
        points = [(3, 1e-4, 0.5), (5, 1e-4, 0.5), (7, 3e-4, 0.5),
                  (3, 3e-4, 0.5)]
        fit = fit_ansatz(points)
        assert fit.degenerate and fit.c == 0.0

    def test_underdetermined(self):
        with pytest.raises(ValueError):
            fit_ansatz([(3, 1e-4, 0.1), (3, 1e-4, 0.1)])

    def test_evaluate(self):
        fit = FitResult(a=0.014, b=770.0, c=0.41, residual=0.0)
        assert fit.evaluate(1.0, 3, 1e-3) == \
            pytest.approx(0.014 * (0.77) ** 1.23)
