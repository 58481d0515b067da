"""Smoke checks of the python bindings against values pinned in the C++ tests."""

import numpy as np
import pytest

import twinrange as tr


def bench_params():
    p = tr.SystemParams()
    p.pair_rate = 5e5
    p.dark_rate = 500.0
    p.background_density = 1e5
    p.bandwidth_nm = 200.0
    p.gain = 1e-3
    p.bin_width_s = 0.5e-9
    p.integration_time_s = 1.0
    p.channels = 625
    return p


def test_version_string():
    assert isinstance(tr.__version__, str) and tr.__version__


def test_snr_model_optimum():
    p = bench_params()
    n_opt = tr.optimal_channels(p)
    assert n_opt == pytest.approx(6324.555320336759, rel=1e-12)
    assert tr.snr_at(p, n_opt) == pytest.approx(22.212214965121905, rel=1e-12)
    terms = tr.noise_terms(p)
    assert terms["signal"] == pytest.approx(500.0, rel=1e-12)
    assert terms["per_term"]["N_cB"] == pytest.approx(5000.0, rel=1e-12)


def test_photon_statistics():
    assert tr.thermal_pn(1.0, 1) == pytest.approx(0.25, rel=1e-15)
    assert tr.poisson_pn(1.0, 0) == pytest.approx(np.exp(-1.0), rel=1e-12)
    lo, hi = tr.error_prob_bounds(1.0, 100.0)
    assert (lo, hi) == (0.5, 0.5)
    lo, hi = tr.error_prob_bounds(0.99, 100.0)
    assert 0.0 < lo < hi < 0.5
    assert tr.g2_from_schmidt([0.5, 0.5]) == pytest.approx(1.5, rel=1e-12)
    dist, tail = tr.poisson_vs_thermal_distance(1.0, 60)
    assert dist == pytest.approx(0.1768191617571635, rel=1e-9)
    assert tail < 1e-12


def test_simulate_is_deterministic_and_rangefinds():
    p = tr.SystemParams()
    p.pair_rate = 2e4
    p.gain = 1.0
    p.bin_width_s = 750e-12
    p.channels = 2
    sc = tr.ScenarioConfig()
    sc.params = p
    sc.target_distance_m = 3.0
    sc.time_resolution_ps = 50.0
    sc.channel_map = tr.ChannelMap.mirror(2)
    sc.seed = 11
    det = tr.DetectorConfig()

    s1 = tr.simulate(sc, det, 0.05)
    s2 = tr.simulate(sc, det, 0.05)
    assert len(s1) == len(s2) > 1000
    assert np.array_equal(s1.ticks(), s2.ticks())
    assert np.array_equal(s1.detectors(), s2.detectors())

    wf = tr.ranging_waveform(s1, sc.channel_map, 750.0, 60000.0,
                             tr.CombineMode.EnergyConserving)
    assert wf.shape == (80,)
    est = tr.detect_peak(s1, sc.channel_map, 750.0, 60000.0)
    assert est is not None
    assert est["peak_bin"] == 26  # 2 * 3 m / c lands in [19.5, 20.25) ns
    assert est["distance_m"] == pytest.approx(3.0, abs=est["resolution_m"])
    assert tr.expected_snr(p, tr.CombineMode.EnergyConserving) == pytest.approx(
        tr.snr(p), rel=1e-12)


def test_jsa_and_schmidt():
    pump = tr.PumpSpectrum()
    pump.center_nm = 405.0
    pump.bandwidth_nm = 2.0
    poling = tr.uniform_poling(10.0, 0.5)
    disp = tr.DispersionModel.vacuum()
    grid = tr.GridSpec.square(700.0, 980.0, 33)
    jsa = tr.compute_jsa(pump, poling, disp, grid)
    assert jsa.amplitude.shape == (33, 33)
    assert jsa.total_intensity() > 0.0
    sd = tr.schmidt(jsa)
    assert sd.schmidt_number() >= 1.0
    weights = np.asarray(sd.mode_weights())
    assert weights.sum() == pytest.approx(1.0, rel=1e-9)
    assert np.all(np.diff(np.asarray(sd.weights)) <= 1e-12)
