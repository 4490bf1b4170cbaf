"""Objective intelligibility scoring in CI feature space.

The envelope correlation score low-pass filters each channel's energy
trajectory (20 Hz cutoff at the 800 Hz frame rate), correlates clean
against processed per channel, clamps negative correlations to zero,
squares, and averages over the 22 channels.  The result lies in [0, 1]
with 1 for identical envelopes.
"""

from dataclasses import dataclass

import numpy as np

ENVELOPE_CUTOFF_HZ = 20.0
ENVELOPE_TAPS = 127
MIN_FRAMES = 32


@dataclass
class EcmScore:
    value: float
    per_channel: np.ndarray  # raw per-channel Pearson correlations


def _lowpass_taps(cutoff_hz, frame_rate, n_taps=ENVELOPE_TAPS):
    """Hamming-windowed sinc, linear phase, unit DC gain."""
    m = n_taps - 1
    n = np.arange(n_taps) - m / 2
    fc = cutoff_hz / frame_rate
    h = 2 * fc * np.sinc(2 * fc * n)
    h *= 0.54 - 0.46 * np.cos(2 * np.pi * np.arange(n_taps) / m)
    return h / h.sum()


def _smooth_envelopes(x, frame_rate):
    """Filter every channel with reflection padding at the edges."""
    taps = _lowpass_taps(ENVELOPE_CUTOFF_HZ, frame_rate)
    half = len(taps) // 2
    padded = np.pad(x, ((half, half), (0, 0)), mode="reflect")
    out = np.empty_like(x)
    for c in range(x.shape[1]):
        out[:, c] = np.convolve(padded[:, c], taps, mode="valid")
    return out


def ecm(clean, processed):
    """Envelope correlation score between clean and processed features."""
    a = clean.features
    b = processed.features
    if a.shape != b.shape:
        raise ValueError("feature shape mismatch")
    if a.shape[0] < MIN_FRAMES:
        raise ValueError(f"need at least {MIN_FRAMES} frames")
    sa = _smooth_envelopes(a, clean.frame_rate)
    sb = _smooth_envelopes(b, clean.frame_rate)
    sa = sa - sa.mean(axis=0)
    sb = sb - sb.mean(axis=0)
    var_a = np.sum(sa * sa, axis=0)
    var_b = np.sum(sb * sb, axis=0)
    rho = np.empty(a.shape[1])
    for c in range(a.shape[1]):
        if var_a[c] == 0.0 and var_b[c] == 0.0:
            rho[c] = 1.0
        elif var_a[c] == 0.0 or var_b[c] == 0.0:
            rho[c] = 0.0
        else:
            rho[c] = np.sum(sa[:, c] * sb[:, c]) / np.sqrt(var_a[c] * var_b[c])
    rho = np.clip(rho, -1.0, 1.0)
    value = float(np.mean(np.maximum(rho, 0.0) ** 2))
    return EcmScore(value=value, per_channel=rho)


def mean_ecm(pairs):
    """Arithmetic mean ECM over (clean, processed) pairs."""
    if not pairs:
        raise ValueError("empty pair list")
    return float(np.mean([ecm(c, p).value for c, p in pairs]))


def feature_mse(clean, processed):
    """Mean squared difference in the log(1+energy) domain."""
    a = clean.features
    b = processed.features
    if a.shape != b.shape:
        raise ValueError("feature shape mismatch")
    d = np.log1p(a) - np.log1p(b)
    return float(np.mean(d * d))
