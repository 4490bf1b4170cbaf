"""Speech enhancement in the cochlear-implant auditory feature space."""

from .audio import AudioSignal, NoisyMixture, load_wav, mix_at_snr, save_wav, split_manifest
from .dsp import PowerSpectrogram, WindowConfig, analyze, frame_and_window, power_spectrum, pre_emphasize
from .features import (CiFeatureSequence, Electrodogram, FilterBank,
                       build_filterbank, extract_features, select_n_of_m)
from .metrics import EcmScore, ecm, feature_mse, mean_ecm
from .models import NormStats, SeArchitecture, TrainConfig, build_model, enhance, train
from .nn import Adam, ConvLayer, Network, checkpoint_load, checkpoint_save, mse_loss

__version__ = "0.1.0"

__all__ = [
    "AudioSignal", "NoisyMixture", "load_wav", "save_wav", "mix_at_snr",
    "split_manifest", "WindowConfig", "PowerSpectrogram", "pre_emphasize",
    "frame_and_window", "power_spectrum", "analyze", "FilterBank",
    "CiFeatureSequence", "Electrodogram", "build_filterbank",
    "extract_features", "select_n_of_m", "EcmScore", "ecm", "mean_ecm",
    "feature_mse", "SeArchitecture", "NormStats", "TrainConfig",
    "build_model", "enhance", "train", "ConvLayer", "Network", "Adam",
    "mse_loss", "checkpoint_save", "checkpoint_load",
]
