"""Time-domain preprocessing and spectral analysis.

Pre-emphasis, Hamming framing and FFT power spectra. Defaults follow a
16 kHz pipeline: 10 ms windows (160 samples) with 8.75 ms overlap
(hop 20 samples, 800 Hz frame rate) and a 256-point FFT.
"""

from dataclasses import dataclass, field

import numpy as np

from .audio import AudioSignal


def hamming_window(n):
    # symmetric form, 0.54 - 0.46 cos(2 pi k / (n - 1))
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * np.arange(n) / (n - 1))


@dataclass
class WindowConfig:
    window_len: int = 160
    hop: int = 20
    fft_size: int = 256

    def __post_init__(self):
        if not (0 < self.hop <= self.window_len <= self.fft_size):
            raise ValueError("require 0 < hop <= window_len <= fft_size")
        self.window = hamming_window(self.window_len)

    @property
    def n_bins(self):
        return self.fft_size // 2 + 1

    def frame_rate(self, sample_rate):
        return sample_rate / self.hop


@dataclass
class PowerSpectrogram:
    frames: np.ndarray  # T x (fft_size/2 + 1), nonnegative
    frame_rate: float

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 2:
            raise ValueError("spectrogram must be 2-D")
        if not np.all(np.isfinite(self.frames)) or np.any(self.frames < 0):
            raise ValueError("spectral energies must be finite and nonnegative")

    @property
    def n_frames(self):
        return self.frames.shape[0]


def pre_emphasize(signal, alpha=0.97):
    """y[0] = x[0]; y[n] = x[n] - alpha*x[n-1]."""
    if not (0 <= alpha < 1):
        raise ValueError("alpha must be in [0, 1)")
    x = signal.samples
    y = np.empty_like(x)
    if len(x):
        y[0] = x[0]
        y[1:] = x[1:] - alpha * x[:-1]
    return AudioSignal(y, signal.sample_rate)


def de_emphasize(signal, alpha=0.97):
    """Exact inverse recursion of pre_emphasize."""
    x = signal.samples
    y = np.empty_like(x)
    acc = 0.0
    for i in range(len(x)):
        acc = x[i] + alpha * acc
        y[i] = acc
    return AudioSignal(y, signal.sample_rate)


def frame_and_window(signal, cfg):
    """Slice into hop-spaced frames and apply the Hamming window.

    Frame t covers samples [t*hop, t*hop + window_len); trailing samples
    that do not fill a frame are dropped.
    """
    x = signal.samples
    if len(x) < cfg.window_len:
        raise ValueError("signal shorter than one window")
    windows = np.lib.stride_tricks.sliding_window_view(x, cfg.window_len)
    frames = windows[:: cfg.hop].copy()
    return frames * cfg.window


def frame_count(n_samples, cfg):
    if n_samples < cfg.window_len:
        return 0
    return (n_samples - cfg.window_len) // cfg.hop + 1


def power_spectrum(frames, cfg, sample_rate=16000):
    """Per-frame squared-magnitude FFT, bins 0..fft_size/2."""
    frames = np.asarray(frames, dtype=np.float64)
    if not np.all(np.isfinite(frames)):
        raise ValueError("non-finite frame values")
    spec = np.fft.rfft(frames, n=cfg.fft_size, axis=1)
    power = np.abs(spec) ** 2
    return PowerSpectrogram(power, cfg.frame_rate(sample_rate))


def analyze(signal, cfg=None, alpha=0.97):
    """Full front half of the pipeline: pre-emphasis -> framing -> power spectra."""
    if cfg is None:
        cfg = WindowConfig()
    emphasized = pre_emphasize(signal, alpha)
    frames = frame_and_window(emphasized, cfg)
    return power_spectrum(frames, cfg, signal.sample_rate)


def dump_spectrogram_csv(spec, path):
    np.savetxt(path, spec.frames, delimiter=",")
