"""Classical enhancement baselines on FFT power spectra.

Noise-PSD tracking, spectral subtraction, decision-directed Wiener
filtering and Log-MMSE.  Gains are applied in the power domain (G^2 * y)
so outputs feed straight back into the filterbank feature path.
"""

from dataclasses import dataclass

import numpy as np

from .dsp import PowerSpectrogram

DD_SMOOTHING = 0.98  # decision-directed a-priori SNR constant
XI_FLOOR = 10.0 ** (-25.0 / 10.0)  # -25 dB prior SNR floor
EULER_GAMMA = 0.5772156649015329


@dataclass
class NoiseEstimate:
    psd: np.ndarray  # per-bin noise power
    smoothing: float = 0.98
    gate_ratio: float = 1.5

    def __post_init__(self):
        self.psd = np.asarray(self.psd, dtype=np.float64)
        if not np.all(np.isfinite(self.psd)) or np.any(self.psd < 0):
            raise ValueError("noise psd must be finite and nonnegative")


def estimate_noise(noisy, init_seconds=0.1, smoothing=0.98, gate_ratio=1.5):
    """Track the noise PSD of an utterance.

    Initializes from the first ``init_seconds`` of frames, then recursively
    smooths frames whose total power stays below ``gate_ratio`` times the
    current noise-floor power (speech frames are skipped).
    """
    y = noisy.frames
    if y.shape[0] < 10:
        raise ValueError("need at least 10 frames to estimate noise")
    n_init = max(1, min(int(round(init_seconds * noisy.frame_rate)), y.shape[0]))
    psd = y[:n_init].mean(axis=0)
    floor = 1e-12 * max(float(y.sum(axis=1).max()), 1e-300)
    frame_power = y.sum(axis=1)
    for t in range(n_init, y.shape[0]):
        if frame_power[t] < gate_ratio * psd.sum():
            psd = smoothing * psd + (1.0 - smoothing) * y[t]
    psd = np.maximum(psd, floor)
    return NoiseEstimate(psd=psd, smoothing=smoothing, gate_ratio=gate_ratio)


def spectral_subtract(noisy_psd, noise, alpha=1.0, beta=0.002):
    """Power spectral subtraction with oversubtraction and a spectral floor.

    s_hat = max(y - alpha * n_hat, beta * y), per bin.
    """
    if alpha < 1:
        raise ValueError("oversubtraction factor alpha must be >= 1")
    if not (0 < beta < 1):
        raise ValueError("floor beta must be in (0, 1)")
    y = np.asarray(noisy_psd, dtype=np.float64)
    if y.shape[-1] != noise.psd.shape[0]:
        raise ValueError("bin count mismatch")
    return np.maximum(y - alpha * noise.psd, beta * y)


def _dd_prior_snr(y, noise_psd, gain_fn, a=DD_SMOOTHING, xi_floor=XI_FLOOR):
    """Frame loop shared by Wiener-as and Log-MMSE.

    gain_fn(xi, gamma) -> per-bin amplitude gain.  Returns (gains T x bins).
    """
    t_frames, n_bins = y.shape
    gains = np.empty_like(y)
    gamma_prev = None
    g_prev = None
    npsd = np.maximum(noise_psd, 1e-300)
    for t in range(t_frames):
        gamma = y[t] / npsd
        ml = np.maximum(gamma - 1.0, 0.0)
        if t == 0:
            xi = (1.0 - a) * ml  # zero history
        else:
            xi = a * (g_prev**2) * gamma_prev + (1.0 - a) * ml
        xi = np.maximum(xi, xi_floor)
        g = gain_fn(xi, gamma)
        gains[t] = g
        gamma_prev = gamma
        g_prev = g
    return gains


def wiener_gain(xi, gamma=None):
    return xi / (1.0 + xi)


def exp_integral_e1(v):
    """E1(v) = integral_v^inf exp(-t)/t dt, elementwise.

    Power series below 1, modified Lentz continued fraction above;
    absolute error below 1e-10 across the positive axis.
    """
    v = np.asarray(v, dtype=np.float64)
    scalar = v.ndim == 0
    v = np.atleast_1d(v).copy()
    if np.any(v <= 0):
        raise ValueError("E1 requires positive argument")
    out = np.empty_like(v)

    small = v < 1.0
    if np.any(small):
        x = v[small]
        total = np.zeros_like(x)
        term = np.ones_like(x)
        for k in range(1, 40):
            term = term * (-x) / k
            total += term / k
        out[small] = -EULER_GAMMA - np.log(x) - total

    big = ~small
    if np.any(big):
        x = v[big]
        # continued fraction e^{-x} / (x + 1/(1 + 1/(x + 2/(1 + ...))))
        tiny = 1e-300
        b = x + 1.0
        c = np.full_like(x, 1.0 / tiny)
        d = 1.0 / b
        h = d.copy()
        for i in range(1, 200):
            an = -float(i * i)
            b = b + 2.0
            d = an * d + b
            d = np.where(np.abs(d) < tiny, tiny, d)
            d = 1.0 / d
            c = b + an / c
            c = np.where(np.abs(c) < tiny, tiny, c)
            delta = c * d
            h = h * delta
            if np.all(np.abs(delta - 1.0) < 1e-14):
                break
        out[big] = h * np.exp(-x)

    return out[0] if scalar else out


def logmmse_gain(xi, gamma):
    """Log-spectral amplitude gain: (xi/(1+xi)) * exp(E1(v)/2), v = xi*gamma/(1+xi)."""
    v = np.maximum(xi * gamma / (1.0 + xi), 1e-12)
    g = (xi / (1.0 + xi)) * np.exp(0.5 * exp_integral_e1(v))
    return np.minimum(g, 1.0)


def wiener_as(noisy, noise):
    """Decision-directed Wiener filtering; power-domain output G^2 * y."""
    gains = _dd_prior_snr(noisy.frames, noise.psd, wiener_gain)
    return PowerSpectrogram(gains**2 * noisy.frames, noisy.frame_rate)


def logmmse(noisy, noise):
    """Log-MMSE amplitude estimation; power-domain output G^2 * y."""
    gains = _dd_prior_snr(noisy.frames, noise.psd, logmmse_gain)
    return PowerSpectrogram(gains**2 * noisy.frames, noisy.frame_rate)


def spectral_subtract_spectrogram(noisy, noise, alpha=1.0, beta=0.002):
    """Spectral subtraction over a whole spectrogram."""
    return PowerSpectrogram(
        spectral_subtract(noisy.frames, noise, alpha=alpha, beta=beta),
        noisy.frame_rate)
