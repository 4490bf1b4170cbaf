"""Synthetic desk-scale corpus: speech-like utterances and car-like noise.

Stands in for licensed corpora.  Speech is a sum of amplitude-modulated
harmonic tones with random pauses; noise is low-pass-filtered Gaussian
noise with an optional slow level drift.  Everything is deterministic
per seed.
"""

import os

import numpy as np
from scipy.signal import butter, lfilter

from .audio import AudioSignal, save_wav

SAMPLE_RATE = 16000


def synth_speech(rng, sample_rate=SAMPLE_RATE, min_seconds=1.0, max_seconds=3.0):
    """One speech-like utterance with random pauses.

    Voiced part: 2-4 amplitude-modulated harmonic tone clusters of a common
    fundamental.  A weaker fricative-like band (modulated high-pass noise)
    gives every filterbank channel real energy while keeping most of the
    power below 2 kHz.
    """
    duration = rng.uniform(min_seconds, max_seconds)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    x = np.zeros(n)
    # shared syllabic envelope: the 3-8 Hz rhythm common to every band,
    # like the cross-band comodulation of real speech
    syl_rate = rng.uniform(3.0, 8.0)
    syl_phase = rng.uniform(0.0, 2 * np.pi)
    syllabic = 0.5 * (1.0 + np.sin(2 * np.pi * syl_rate * t + syl_phase))

    n_tones = rng.randint(2, 5)
    f0 = rng.uniform(120.0, 280.0)
    for i in range(n_tones):
        harmonic = rng.randint(1, 8)
        freq = f0 * harmonic
        am_rate = rng.uniform(3.0, 8.0)
        am_phase = rng.uniform(0.0, 2 * np.pi)
        phase = rng.uniform(0.0, 2 * np.pi)
        own = 0.5 * (1.0 + np.sin(2 * np.pi * am_rate * t + am_phase))
        am = syllabic * (0.7 + 0.3 * own)
        x += (1.0 / (1 + i)) * am * np.sin(2 * np.pi * freq * t + phase)
    voiced_rms = np.sqrt(np.mean(x**2)) or 1.0

    # fricative-like band: modulated broadband noise above 2 kHz,
    # well below the voiced power
    fric = rng.randn(n)
    b, a = butter(4, 2000.0 / (sample_rate / 2), btype="high")
    fric = lfilter(b, a, fric)
    am_rate = rng.uniform(3.0, 8.0)
    am_phase = rng.uniform(0.0, 2 * np.pi)
    own = 0.5 * (1.0 + np.sin(2 * np.pi * am_rate * t + am_phase))
    fric *= syllabic * (0.7 + 0.3 * own)
    fric_rms = np.sqrt(np.mean(fric**2)) or 1.0
    x += fric * (0.2 * voiced_rms / fric_rms)

    # random pauses with smooth 20 ms edges
    gate = np.ones(n)
    for _ in range(rng.randint(1, 4)):
        start = rng.randint(0, max(1, n - sample_rate // 10))
        length = rng.randint(sample_rate // 20, sample_rate // 4)
        gate[start:start + length] = 0.0
    ramp = int(0.02 * sample_rate)
    kernel = np.ones(ramp) / ramp
    gate = np.convolve(gate, kernel, mode="same")
    x *= gate
    peak = np.max(np.abs(x))
    if peak > 0:
        x *= 0.3 / peak
    return AudioSignal(x, sample_rate)


def synth_noise(rng, seconds=30.0, sample_rate=SAMPLE_RATE, cutoff_hz=400.0,
                drift=True, hiss_level=0.28):
    """Car-like noise: low-pass-filtered Gaussian process, optional slow drift.

    A broadband hiss floor (``hiss_level`` in amplitude relative to the
    low-pass part, under 10% of the power) stands in for wind/tire noise
    so the noise touches the whole band.
    """
    n = int(round(seconds * sample_rate))
    white = rng.randn(n)
    b, a = butter(6, cutoff_hz / (sample_rate / 2), btype="low")
    x = lfilter(b, a, white)
    if hiss_level > 0:
        lp_rms = np.sqrt(np.mean(x**2)) or 1.0
        x = x + rng.randn(n) * (hiss_level * lp_rms)
    if drift:
        t = np.arange(n) / sample_rate
        rate = rng.uniform(0.3, 1.5)
        phase = rng.uniform(0.0, 2 * np.pi)
        depth = rng.uniform(0.4, 0.6)
        x *= 1.0 + depth * np.sin(2 * np.pi * rate * t + phase)
    peak = np.max(np.abs(x))
    if peak > 0:
        x *= 0.3 / peak
    return AudioSignal(x, sample_rate)


def synth_corpus(out_dir, n_utts, seed=0, n_noises=2, noise_seconds=30.0):
    """Generate a WAV corpus: speech/utt_*.wav plus noise/noise_*.wav.

    Returns (speech_paths, noise_paths).  Byte-identical for equal seeds.
    """
    if n_utts < 10:
        raise ValueError("need at least 10 utterances")
    speech_dir = os.path.join(out_dir, "speech")
    noise_dir = os.path.join(out_dir, "noise")
    os.makedirs(speech_dir, exist_ok=True)
    os.makedirs(noise_dir, exist_ok=True)
    rng = np.random.RandomState(seed)
    speech_paths = []
    for i in range(n_utts):
        sig = synth_speech(rng)
        path = os.path.join(speech_dir, f"utt_{i:04d}.wav")
        save_wav(path, sig)
        speech_paths.append(path)
    noise_paths = []
    cutoffs = [400.0, 300.0, 450.0, 350.0]
    for j in range(n_noises):
        sig = synth_noise(rng, seconds=noise_seconds,
                          cutoff_hz=cutoffs[j % len(cutoffs)])
        path = os.path.join(noise_dir, f"noise_{j:02d}.wav")
        save_wav(path, sig)
        noise_paths.append(path)
    return speech_paths, noise_paths
