"""Audio loading/storage, SNR mixing and dataset manifests."""

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.io import wavfile

PIPELINE_RATE = 16000


@dataclass
class AudioSignal:
    """Mono waveform with amplitudes in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("AudioSignal requires a 1-D sample array")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("non-finite samples")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self):
        return len(self.samples) / self.sample_rate


@dataclass
class NoisyMixture:
    clean: AudioSignal
    noise_scaled: AudioSignal
    mixture: AudioSignal
    target_snr_db: float
    noise_offset: int


@dataclass
class DatasetManifest:
    entries: list  # (utterance id, speech path)
    split: dict  # id -> "train" | "dev" | "test"
    seed: int = 0

    def ids(self, split_name):
        return [uid for uid, _ in self.entries if self.split[uid] == split_name]

    def paths(self, split_name):
        return [p for uid, p in self.entries if self.split[uid] == split_name]


def load_wav(path, expected_rate=PIPELINE_RATE):
    """Read a mono RIFF/WAVE file (PCM16 or float32) into [-1, 1].

    Integer PCM is mapped by division by 32768.  Files whose rate differs
    from ``expected_rate`` are rejected; pass ``expected_rate=None`` to
    accept any rate.
    """
    rate, data = wavfile.read(path)
    if data.ndim != 1:
        raise ValueError(f"{path}: multichannel audio not supported")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"{path}: unsupported sample format {data.dtype}")
    if np.max(np.abs(samples), initial=0.0) > 1.0:
        raise ValueError(f"{path}: samples exceed [-1, 1]")
    if expected_rate is not None and rate != expected_rate:
        raise ValueError(f"{path}: sample rate {rate} != {expected_rate}")
    return AudioSignal(samples, rate)


def save_wav(path, signal):
    """Write an AudioSignal as mono PCM16. Out-of-range samples are an error."""
    x = signal.samples
    if np.max(np.abs(x), initial=0.0) > 1.0:
        raise ValueError("samples exceed [-1, 1]; refusing to clip on store")
    pcm = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    wavfile.write(path, signal.sample_rate, pcm)


def mix_at_snr(speech, noise, snr_db, seed=0):
    """Additively mix noise into speech at an exact target SNR.

    The noise is cyclically tiled/cropped to the speech length starting at
    a seed-derived offset, then scaled so that
    10*log10(P_speech / P_noise) == snr_db with P the full-utterance
    mean square.
    """
    if speech.sample_rate != noise.sample_rate:
        raise ValueError("sample rate mismatch between speech and noise")
    if len(speech) < 1 or len(noise) < 1:
        raise ValueError("empty signal")
    rng = np.random.RandomState(seed)
    offset = int(rng.randint(0, len(noise)))
    idx = (offset + np.arange(len(speech))) % len(noise)
    n = noise.samples[idx]

    p_speech = np.mean(speech.samples**2)
    p_noise = np.mean(n**2)
    if p_speech == 0.0 or p_noise == 0.0:
        raise ValueError("zero-power speech or noise; SNR gain undefined")
    gain = np.sqrt(p_speech / (p_noise * 10.0 ** (snr_db / 10.0)))
    noise_scaled = AudioSignal(gain * n, speech.sample_rate)
    mixture = AudioSignal(speech.samples + noise_scaled.samples, speech.sample_rate)
    return NoisyMixture(speech, noise_scaled, mixture, float(snr_db), offset)


def split_manifest(entries, ratios, seed=0):
    """Shuffle entries with the given seed and partition into train/dev/test.

    Dev and test sizes are floor(ratio * N); the remainder goes to train.
    """
    r_train, r_dev, r_test = ratios
    if min(ratios) <= 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must be positive and sum to 1")
    if len(entries) < 3:
        raise ValueError("need at least 3 entries to split")
    order = np.random.RandomState(seed).permutation(len(entries))
    shuffled = [entries[i] for i in order]
    n = len(entries)
    n_dev = int(np.floor(r_dev * n))
    n_test = int(np.floor(r_test * n))
    n_train = n - n_dev - n_test
    split = {}
    for i, (uid, _) in enumerate(shuffled):
        if i < n_train:
            split[uid] = "train"
        elif i < n_train + n_dev:
            split[uid] = "dev"
        else:
            split[uid] = "test"
    return DatasetManifest(entries=list(entries), split=split, seed=seed)


def write_manifest(manifest, path):
    with open(path, "w", encoding="utf-8") as f:
        for uid, p in manifest.entries:
            f.write(f"{uid}\t{p}\t{manifest.split[uid]}\n")


def read_manifest(path):
    entries = []
    split = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            uid, p, s = line.split("\t")
            if s not in ("train", "dev", "test"):
                raise ValueError(f"bad split label {s!r}")
            entries.append((uid, p))
            split[uid] = s
    return DatasetManifest(entries=entries, split=split)


def manifest_from_dir(wav_dir):
    """Build (id, path) entries from all .wav files in a directory, sorted."""
    paths = sorted(
        os.path.join(wav_dir, f) for f in os.listdir(wav_dir) if f.endswith(".wav")
    )
    return [(os.path.splitext(os.path.basename(p))[0], p) for p in paths]
