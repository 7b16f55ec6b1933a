import math
import os

import numpy as np
import pytest

import motionsm

CONFIGS = os.path.join(os.path.dirname(__file__), "..", "..", "configs")

SMALL = {
    "stimulus": {"kind": "noise_world_1d", "n": 5, "motion": {"type": "uniform_jitter", "amplitude": 0.5},
                 "correlation_length": 0.5, "aperture_sigma": 1.0},
    "data": {"episodes": 20, "steps": 1001},
    "whitening": {"epsilon": 0.004, "relative": True, "prefix_frames": 10000},
    "learner": {"mode": "SM", "K": 1, "objective_interval": 0},
    "baseline": {"K": 1},
}


def test_config_defaults_and_hash():
    cfg = motionsm.config(SMALL)
    assert cfg["learner"]["K"] == 1
    assert motionsm.config_hash(cfg) == motionsm.config_hash(SMALL)
    bumped = motionsm.config(SMALL, ["learner.K=2"])
    assert bumped["learner"]["K"] == 2
    assert motionsm.config_hash(bumped) != motionsm.config_hash(SMALL)
    with pytest.raises(ValueError):
        motionsm.config({"learner": {"K": 0}})
    with pytest.raises(ValueError):
        motionsm.config({"nonsense": 1})


def test_shipped_configs_load():
    for name in sorted(os.listdir(CONFIGS)):
        motionsm.load_config(os.path.join(CONFIGS, name))


def test_generate_is_deterministic():
    a = motionsm.generate(SMALL, 4)
    b = motionsm.generate(SMALL, 4)
    assert len(a) == 20
    frames, truth = a[0]
    assert frames.shape == (1001, 5)
    assert truth.shape == (1000, 1)  # one row per transition
    np.testing.assert_array_equal(frames, b[0][0])


def test_feature_layout():
    chi = motionsm.feature("standard", np.array([1.0, 2.0]), np.array([4.0, 6.0]))
    np.testing.assert_array_equal(chi, [3.0, 6.0, 4.0, 8.0])


def test_zca_whitens():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(2000, 3)) @ rng.normal(size=(3, 3))
    w, mean = motionsm.fit_zca(x, 0.0, relative=False)
    white = (x - mean) @ w.T
    np.testing.assert_allclose(np.cov(white.T, bias=True), np.eye(3), atol=1e-8)
    np.testing.assert_array_equal(w, w.T)


def test_sm_learns_translation_generator():
    out = motionsm.train(SMALL, 2)
    assert out["W"].shape == (1, 25)
    assert abs(out["operators"][0]["target_cosine"]) > 0.9
    base = motionsm.baselines(SMALL, 2)
    assert abs(base["pca_operators"][0]["target_cosine"]) > 0.9


def test_nsm_responses_are_nonnegative():
    W = np.random.default_rng(1).normal(size=(2, 9))
    M = np.array([[0.0, 0.3], [0.3, 0.0]])
    theta, converged, _ = motionsm.respond(W, M, "NSM", np.ones(9))
    assert converged
    assert (theta >= 0).all()


def test_detectors():
    cfg = motionsm.load_config(os.path.join(CONFIGS, "detector_contrast.json"))
    pts = motionsm.sweep(cfg)
    c = np.log([p["contrast"] for p in pts])
    y = np.log([abs(p["mean"]) for p in pts])
    assert np.polyfit(c, y, 1)[0] == pytest.approx(2.0, abs=1e-9)
    eq = motionsm.equivalence(motionsm.load_config(os.path.join(CONFIGS, "equiv.json"), ["equiv.streams=5"]), 1)
    assert eq["cases"] == 30
    assert eq["worst_relative"] <= 1e-10


def test_rotate_demo_analytic():
    frames, corr, scale = motionsm.rotate_demo(motionsm.rotation_generator(5), 0.05, 3, 1.0)
    assert len(frames) == 4
    assert scale == pytest.approx(1.0)
    assert min(corr) > 0.95
    with pytest.raises(ValueError):
        motionsm.rotate_demo(np.zeros((24, 24)), 0.05, 3, 1.0)


def test_velocity_sign():
    n = 9
    x = np.sin(2 * math.pi * np.arange(n) / 8)
    shifted = np.sin(2 * math.pi * (np.arange(n) - 0.1) / 8)
    assert motionsm.velocity_estimate(x, shifted) > 0
