"""CI auditory front-end: 22-channel filterbank, n-of-m selection, electrodograms."""

import csv
from dataclasses import dataclass

import numpy as np

N_CHANNELS = 22
LOW_EDGE_HZ = 250.0
HIGH_EDGE_HZ = 8000.0


@dataclass
class FilterBank:
    weights: np.ndarray  # channels x n_bins, nonnegative
    band_edges: np.ndarray  # channels + 1 ascending frequencies (Hz)

    @property
    def n_channels(self):
        return self.weights.shape[0]


@dataclass
class CiFeatureSequence:
    features: np.ndarray  # T x channels, nonnegative
    frame_rate: float

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise ValueError("features must be 2-D")
        if not np.all(np.isfinite(self.features)) or np.any(self.features < 0):
            raise ValueError("features must be finite and nonnegative")

    @property
    def n_frames(self):
        return self.features.shape[0]


@dataclass
class Electrodogram:
    stimulation: np.ndarray  # T x channels; inactive channels exactly 0
    frame_rate: float = 800.0


def build_filterbank(fft_size=256, sample_rate=16000, n_channels=N_CHANNELS,
                     low_hz=LOW_EDGE_HZ, high_hz=HIGH_EDGE_HZ):
    """Log-spaced triangular filterbank over [low_hz, high_hz].

    Channel i rises from the previous band centre to its own centre and
    falls to the next centre, so each FFT bin feeds at most two adjacent
    channels.  The outermost channels hold weight 1 out to the band-edge
    endpoints so every bin in [low_hz, high_hz] has positive total weight.
    """
    if fft_size & (fft_size - 1):
        raise ValueError("fft_size must be a power of two")
    if high_hz > sample_rate / 2:
        raise ValueError("upper band edge above Nyquist")
    edges = np.geomspace(low_hz, high_hz, n_channels + 1)
    centers = np.sqrt(edges[:-1] * edges[1:])  # geometric band centres
    n_bins = fft_size // 2 + 1
    bin_freqs = np.arange(n_bins) * sample_rate / fft_size

    weights = np.zeros((n_channels, n_bins))
    for i in range(n_channels):
        c = centers[i]
        left = centers[i - 1] if i > 0 else low_hz
        right = centers[i + 1] if i < n_channels - 1 else high_hz
        f = bin_freqs
        w = np.zeros(n_bins)
        if i == 0:
            w = np.where((f >= low_hz) & (f <= c), 1.0, w)
        else:
            rise = (f - left) / (c - left)
            w = np.where((f > left) & (f <= c), rise, w)
        if i == n_channels - 1:
            w = np.where((f > c) & (f <= high_hz), 1.0, w)
        else:
            fall = (right - f) / (right - c)
            w = np.where((f > c) & (f < right), fall, w)
        if not np.any(w > 0):
            raise ValueError(f"channel {i}: no FFT bins in band (fft_size too small)")
        weights[i] = w
    return FilterBank(weights=weights, band_edges=edges)


def extract_features(spec, fb):
    """Per-frame weighted sums of bin energies: features = spec @ weights.T."""
    if spec.frames.shape[1] != fb.weights.shape[1]:
        raise ValueError("spectrogram bin count does not match filterbank")
    feats = spec.frames @ fb.weights.T
    # clamp tiny negative round-off
    np.maximum(feats, 0.0, out=feats)
    return CiFeatureSequence(feats, spec.frame_rate)


def select_n_of_m(feat, n=8):
    """Keep the n largest strictly-positive channels per frame, zero the rest.

    Ties break toward the lower channel index.  Zero-energy channels are
    never selected, so frames with fewer than n positive channels keep
    only those.
    """
    x = feat.features
    m = x.shape[1]
    if not (1 <= n <= m):
        raise ValueError(f"n must be in [1, {m}]")
    out = np.zeros_like(x)
    # stable argsort on -x: equal values keep ascending channel order
    order = np.argsort(-x, axis=1, kind="stable")
    rows = np.arange(x.shape[0])[:, None]
    top = order[:, :n]
    vals = x[rows, top]
    keep = vals > 0
    out[rows.repeat(n, axis=1)[keep], top[keep]] = vals[keep]
    return Electrodogram(out, feat.frame_rate)


def write_electrodogram_csv(e, path):
    """CSV of nonzero entries: header 'frame,channel,energy', channels 1-indexed."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["frame", "channel", "energy"])
        t_idx, ch_idx = np.nonzero(e.stimulation)
        for t, ch in zip(t_idx, ch_idx):
            w.writerow([t, ch + 1, repr(float(e.stimulation[t, ch]))])


def read_electrodogram_csv(path, n_frames, n_channels=N_CHANNELS, frame_rate=800.0):
    stim = np.zeros((n_frames, n_channels))
    with open(path, newline="") as f:
        r = csv.reader(f)
        header = next(r)
        if header != ["frame", "channel", "energy"]:
            raise ValueError("bad electrodogram CSV header")
        for row in r:
            t, ch, energy = int(row[0]), int(row[1]), float(row[2])
            stim[t, ch - 1] = energy
    return Electrodogram(stim, frame_rate)


def render_electrodogram(e, csv_path, image_path=None):
    """Write the nonzero-entry CSV and, optionally, a raster image."""
    write_electrodogram_csv(e, csv_path)
    if image_path is not None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(10, 4))
        ax.imshow(
            e.stimulation.T,
            aspect="auto",
            origin="lower",
            interpolation="nearest",
            cmap="viridis",
            extent=[0, e.stimulation.shape[0], 0.5, e.stimulation.shape[1] + 0.5],
        )
        ax.set_xlabel("frame")
        ax.set_ylabel("electrode")
        fig.tight_layout()
        fig.savefig(image_path, dpi=120)
        plt.close(fig)
