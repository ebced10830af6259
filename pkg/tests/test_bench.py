import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homeledger.bench import (
    LatencyReport,
    mining_attempts,
    rmse,
    run_latency_experiment,
    run_rssi_experiment,
    simulate_cells,
)
from homeledger.kalman import KalmanModel
from homeledger.radio import BLE, PROFILES, WIFI, XBEE

DISTANCES = [0.25, 0.5, 1.0]


class TestRmse:
    def test_identical(self):
        assert rmse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_constant_offset(self):
        assert rmse([1.0, 2.0, 3.0], [2.0, 3.0, 4.0]) == 1.0

    def test_hand_value(self):
        assert rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(3.5355339059327376, abs=1e-9)

    @pytest.mark.parametrize("p, o", [([], []), ([1.0], [1.0, 2.0])])
    def test_invalid(self, p, o):
        with pytest.raises(ValueError):
            rmse(p, o)

    @settings(max_examples=200)
    @given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=200))
    def test_two_pass_reference(self, pairs):
        p, o = zip(*pairs)
        ss = 0.0
        for a, b in pairs:
            ss += (a - b) ** 2
        ref = math.sqrt(ss / len(pairs))
        assert rmse(p, o) == pytest.approx(ref, rel=1e-12, abs=1e-12)


class TestRssiExperiment:
    def test_noiseless(self):
        reports = run_rssi_experiment([WIFI.noiseless(), BLE.noiseless()], DISTANCES, 50, KalmanModel(), 3)
        assert all(r.rmse_raw == 0 and r.rmse_filtered == 0 for r in reports)

    def test_wifi_non_decreasing_in_distance(self):
        reports = run_rssi_experiment([WIFI], DISTANCES, 100, KalmanModel(), 0)
        raw = [r.rmse_raw for r in reports]
        assert raw == sorted(raw)

    def test_wifi_below_ble_at_one_metre(self):
        wifi, ble = run_rssi_experiment([WIFI, BLE], [1.0], 100, KalmanModel(), 0)
        assert wifi.rmse_raw < ble.rmse_raw

    def test_deterministic(self):
        a = run_rssi_experiment(list(PROFILES.values()), DISTANCES, 100, KalmanModel(), 9)
        b = run_rssi_experiment(list(PROFILES.values()), DISTANCES, 100, KalmanModel(), 9)
        assert a == b

    def test_report_shape(self):
        reports = run_rssi_experiment([WIFI, XBEE], DISTANCES, 10, KalmanModel(), 1)
        assert [(r.technology, r.distance) for r in reports] == [(p, d) for p in ("WiFi", "XBee") for d in DISTANCES]
        assert all(r.n_samples == 10 for r in reports)

    def test_single_sample_allowed(self):
        (cell,) = simulate_cells([WIFI], [1.0], 1, KalmanModel(), 0)
        assert len(cell.rows()) == 1 and cell.report().rmse_raw == cell.report().rmse_filtered

    @pytest.mark.parametrize("distances", [[], [0.0], [-1.0]])
    def test_bad_distances(self, distances):
        with pytest.raises(ValueError):
            run_rssi_experiment([WIFI], distances, 10, KalmanModel(), 0)

    @pytest.mark.parametrize("profile", [WIFI, BLE, XBEE])
    def test_filter_benefit_with_matched_noise(self, profile):
        model = KalmanModel(R=profile.sigma(1.0) ** 2)
        wins = sum(
            r.rmse_filtered < r.rmse_raw
            for seed in range(100)
            for r in run_rssi_experiment([profile], [1.0], 100, model, seed)
        )
        assert wins >= 90


class TestLatency:
    def test_reports(self):
        priv, pub = run_latency_experiment(5, 1)
        for rep in (priv, pub):
            assert isinstance(rep, LatencyReport)
            assert rep.trials == 5 and rep.min_seconds <= rep.mean_seconds <= rep.max_seconds
        assert (priv.mode, priv.difficulty, pub.mode, pub.difficulty) == ("Private", None, "Public", 1)

    def test_injected_clock(self):
        ticks = iter(range(1000))
        priv, pub = run_latency_experiment(3, 0, clock=lambda: float(next(ticks)))
        assert priv.mean_seconds == pub.mean_seconds == 1.0

    def test_difficulty_zero_is_comparable(self):
        priv, pub = run_latency_experiment(20, 0)
        assert 0.1 <= pub.mean_seconds / priv.mean_seconds <= 10

    def test_private_faster_from_difficulty_two(self):
        for difficulty in (2, 3):
            priv, pub = run_latency_experiment(20, difficulty)
            assert priv.mean_seconds < pub.mean_seconds

    def test_difficulty_four_ratio(self):
        priv, pub = run_latency_experiment(20, 4)
        assert pub.mean_seconds >= 100 * priv.mean_seconds

    def test_work_scaling_two_to_three(self):
        _, pub2 = run_latency_experiment(60, 2)
        _, pub3 = run_latency_experiment(60, 3)
        assert 4 <= pub3.mean_seconds / pub2.mean_seconds <= 64

    def test_trials_must_be_positive(self):
        with pytest.raises(ValueError):
            run_latency_experiment(0, 1)


def test_mining_attempts_mean_difficulty_one():
    assert 8 <= np.mean(mining_attempts(1, 300, seed=4)) <= 32
