import numpy as np
import pytest

from cise.audio import AudioSignal
from cise.dsp import (WindowConfig, de_emphasize, frame_and_window,
                      frame_count, power_spectrum, pre_emphasize)


def dft_oracle(x, n):
    """Direct O(N^2) DFT, bins 0..n//2."""
    x = np.concatenate([x, np.zeros(n - len(x))])
    bins = []
    for k in range(n // 2 + 1):
        acc = 0.0 + 0.0j
        for t in range(n):
            acc += x[t] * np.exp(-2j * np.pi * k * t / n)
        bins.append(acc)
    return np.array(bins)


def test_pre_emphasis_identity_at_zero():
    sig = AudioSignal(np.array([0.3, -0.2, 0.5]), 16000)
    out = pre_emphasize(sig, alpha=0.0)
    assert np.array_equal(out.samples, sig.samples)


def test_pre_emphasis_constant_input():
    sig = AudioSignal(np.ones(3), 16000)
    out = pre_emphasize(sig, alpha=0.97)
    assert np.allclose(out.samples, [1.0, 0.03, 0.03])


def test_pre_emphasis_impulse():
    sig = AudioSignal(np.array([1.0, 0.0]), 16000)
    out = pre_emphasize(sig, alpha=0.97)
    assert np.allclose(out.samples, [1.0, -0.97])


def test_pre_emphasis_inverse_recovers():
    rng = np.random.RandomState(0)
    sig = AudioSignal(np.clip(0.3 * rng.randn(2000), -1, 1), 16000)
    back = de_emphasize(pre_emphasize(sig, 0.97), 0.97)
    assert np.max(np.abs(back.samples - sig.samples)) < 1e-12


def test_pre_emphasis_empty():
    out = pre_emphasize(AudioSignal(np.zeros(0), 16000), 0.97)
    assert len(out) == 0


def test_window_is_hamming():
    cfg = WindowConfig()
    n = np.arange(160)
    expected = 0.54 - 0.46 * np.cos(2 * np.pi * n / 159)
    assert np.allclose(cfg.window, expected)
    assert np.allclose(cfg.window, cfg.window[::-1])


def test_frame_count_one_second():
    cfg = WindowConfig()
    sig = AudioSignal(np.zeros(16000), 16000)
    frames = frame_and_window(sig, cfg)
    assert frames.shape == (793, 160)


def test_frame_count_boundary():
    cfg = WindowConfig()
    sig = AudioSignal(np.zeros(160), 16000)
    assert frame_and_window(sig, cfg).shape[0] == 1
    with pytest.raises(ValueError):
        frame_and_window(AudioSignal(np.zeros(159), 16000), cfg)


def test_frames_of_constant_signal_equal_window():
    cfg = WindowConfig()
    sig = AudioSignal(np.ones(1000), 16000)
    frames = frame_and_window(sig, cfg)
    for row in frames:
        assert np.allclose(row, cfg.window)


def test_frame_count_formula_random():
    rng = np.random.RandomState(1)
    for _ in range(200):
        win = rng.randint(4, 300)
        hop = rng.randint(1, win + 1)
        length = rng.randint(win, 5000)
        fft = 1
        while fft < win:
            fft *= 2
        cfg = WindowConfig(window_len=win, hop=hop, fft_size=fft)
        sig = AudioSignal(np.zeros(length), 16000)
        expected = (length - win) // hop + 1
        assert frame_and_window(sig, cfg).shape[0] == expected
        assert frame_count(length, cfg) == expected


def test_power_spectrum_zero_frame():
    cfg = WindowConfig()
    spec = power_spectrum(np.zeros((3, 160)), cfg)
    assert spec.frames.shape == (3, 129)
    assert np.all(spec.frames == 0)
    assert spec.frame_rate == 800.0


def test_power_spectrum_dc_vector_matches_dft_oracle():
    cfg = WindowConfig()
    c = 0.7
    frame = np.full(160, c)
    spec = power_spectrum(frame[None, :], cfg)
    oracle = np.abs(dft_oracle(frame, 256)) ** 2
    assert spec.frames[0, 0] == pytest.approx((c * 160) ** 2, rel=1e-9)
    assert np.allclose(spec.frames[0], oracle, rtol=1e-9, atol=1e-9)


def test_fft_matches_dft_oracle_random():
    cfg = WindowConfig(window_len=256, hop=256, fft_size=256)
    rng = np.random.RandomState(2)
    frames = rng.randn(3, 256)
    spec = power_spectrum(frames, cfg)
    for i in range(3):
        oracle = np.abs(dft_oracle(frames[i], 256)) ** 2
        rel = np.abs(spec.frames[i] - oracle) / np.maximum(oracle, 1e-12)
        assert np.max(rel) < 1e-9


def test_parseval():
    cfg = WindowConfig()
    rng = np.random.RandomState(3)
    frame = rng.randn(160)
    spec = power_spectrum(frame[None, :], cfg)
    # conjugate-symmetric bins count twice except DC and Nyquist
    doubled = 2 * spec.frames[0].sum() - spec.frames[0, 0] - spec.frames[0, -1]
    assert doubled == pytest.approx(256 * np.sum(frame**2), rel=1e-9)


def test_window_config_validation():
    with pytest.raises(ValueError):
        WindowConfig(window_len=160, hop=0)
    with pytest.raises(ValueError):
        WindowConfig(window_len=300, hop=20, fft_size=256)
