"""scikit-learn style wrappers around the feature pipeline and enhancers.

X is a list of utterances.  For the feature extractor each utterance is a
1-D waveform array (or AudioSignal); for the enhancers each utterance is
a (T, 22) nonnegative feature matrix.  Lists are used instead of a single
array because utterances have different lengths.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .audio import AudioSignal
from .classic import estimate_noise, logmmse, spectral_subtract_spectrogram, wiener_as
from .dsp import PowerSpectrogram, WindowConfig, analyze
from .features import CiFeatureSequence, build_filterbank, extract_features
from .models import SeArchitecture, TrainConfig, TrainingExample, enhance, train


def _as_feature_sequence(x, frame_rate=800.0):
    if isinstance(x, CiFeatureSequence):
        return x
    return CiFeatureSequence(np.asarray(x, dtype=np.float64), frame_rate)


def _check_feature_list(X):
    if not isinstance(X, (list, tuple)) or not X:
        raise ValueError("X must be a nonempty list of per-utterance matrices")
    return [_as_feature_sequence(x) for x in X]


class CiFeatureExtractor(BaseEstimator, TransformerMixin):
    """Waveform -> CI auditory features (T x 22 per utterance).

    Stateless; fit only validates parameters.
    """

    def __init__(self, sample_rate=16000, pre_emphasis=0.97, window_len=160,
                 hop=20, fft_size=256):
        self.sample_rate = sample_rate
        self.pre_emphasis = pre_emphasis
        self.window_len = window_len
        self.hop = hop
        self.fft_size = fft_size

    def fit(self, X=None, y=None):
        self.window_cfg_ = WindowConfig(self.window_len, self.hop, self.fft_size)
        self.filterbank_ = build_filterbank(self.fft_size, self.sample_rate)
        return self

    def transform(self, X):
        check_is_fitted(self, "filterbank_")
        out = []
        for x in X:
            if not isinstance(x, AudioSignal):
                x = AudioSignal(np.asarray(x, dtype=np.float64), self.sample_rate)
            spec = analyze(x, self.window_cfg_, self.pre_emphasis)
            out.append(extract_features(spec, self.filterbank_).features)
        return out


class NeuralEnhancer(BaseEstimator, TransformerMixin):
    """Trainable feature-space enhancer (vanilla / spectral_sub / wiener_mask).

    fit(X, y) takes lists of noisy and clean (T, 22) matrices; the
    spectral_sub architecture additionally needs ``noise=`` matrices.
    transform(X) returns enhanced matrices.
    """

    def __init__(self, kind="wiener_mask", causal=False, epochs=50,
                 batch_size=8, learning_rate=1e-3, seed=0):
        self.kind = kind
        self.causal = causal
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed

    def fit(self, X, y, noise=None, dev_fraction=0.2):
        noisy = _check_feature_list(X)
        clean = _check_feature_list(y)
        if len(noisy) != len(clean):
            raise ValueError("X and y must have equal length")
        arch = SeArchitecture(kind=self.kind, causal=self.causal)
        if noise is not None:
            noise = _check_feature_list(noise)
        elif self.kind == "spectral_sub":
            raise ValueError("spectral_sub requires noise= feature matrices")
        examples = [TrainingExample(noisy=n, clean=c,
                                    noise=noise[i] if noise else None)
                    for i, (n, c) in enumerate(zip(noisy, clean))]
        n_dev = max(1, int(round(dev_fraction * len(examples))))
        if len(examples) - n_dev < 1:
            raise ValueError("not enough utterances to hold out a dev split")
        dev_set = examples[-n_dev:]
        train_set = examples[:-n_dev]
        cfg = TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                          learning_rate=self.learning_rate, seed=self.seed)
        self.net_, self.stats_, self.history_ = train(arch, train_set, dev_set, cfg)
        self.arch_ = arch
        return self

    def transform(self, X):
        check_is_fitted(self, "net_")
        return [enhance(x, self.net_, self.arch_, self.stats_).features
                for x in _check_feature_list(X)]


class ClassicEnhancer(BaseEstimator, TransformerMixin):
    """Stateless classical baseline over power spectrograms.

    X is a list of (T, n_bins) nonnegative power matrices; each utterance
    gets its own noise-PSD estimate.
    """

    METHODS = ("spectral_sub", "wiener_as", "logmmse")

    def __init__(self, method="logmmse", frame_rate=800.0):
        self.method = method
        self.frame_rate = frame_rate

    def fit(self, X=None, y=None):
        if self.method not in self.METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        self.fitted_ = True
        return self

    def transform(self, X):
        check_is_fitted(self, "fitted_")
        out = []
        for x in X:
            spec = PowerSpectrogram(np.asarray(x, dtype=np.float64),
                                    self.frame_rate)
            noise = estimate_noise(spec)
            if self.method == "spectral_sub":
                enhanced = spectral_subtract_spectrogram(spec, noise)
            elif self.method == "wiener_as":
                enhanced = wiener_as(spec, noise)
            else:
                enhanced = logmmse(spec, noise)
            out.append(enhanced.frames)
        return out
