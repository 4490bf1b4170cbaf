"""End-to-end experiment orchestration.

Synthesizes (or ingests) a WAV corpus, mixes speech with noise over an
SNR sweep, trains the convolutional enhancers, runs every configured
system over the test split and reports mean envelope-correlation scores
per (system, noise, SNR) cell.
"""

import csv
import hashlib
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import classic
from .audio import load_wav, manifest_from_dir, mix_at_snr, split_manifest
from .dsp import WindowConfig, analyze
from .features import build_filterbank, extract_features
from .metrics import ecm
from .models import (SeArchitecture, TrainConfig, TrainingExample, enhance,
                     save_enhancer, train, write_history_csv)
from .synth import synth_corpus

CNN_SYSTEMS = (
    "vanilla_noncausal", "vanilla_causal",
    "spectral_sub_noncausal", "spectral_sub_causal",
    "wiener_mask_noncausal", "wiener_mask_causal",
)
BASELINE_SYSTEMS = ("wiener_as", "logmmse")
DEFAULT_SYSTEMS = ("noisy",) + CNN_SYSTEMS + BASELINE_SYSTEMS


@dataclass
class ExperimentConfig:
    out_dir: str
    corpus_dir: str = None  # external WAV corpus; None -> synthesize
    n_utts: int = 400
    n_noises: int = 1
    snrs: tuple = (-10.0, -5.0, 0.0, 5.0)
    systems: tuple = DEFAULT_SYSTEMS
    split_ratios: tuple = (0.5, 0.25, 0.25)
    seed: int = 0
    epochs: int = 50
    batch_size: int = 8
    learning_rate: float = 1e-3

    def __post_init__(self):
        if not self.snrs:
            raise ValueError("snr list must be nonempty")
        if not self.systems:
            raise ValueError("need at least one system")
        for s in self.systems:
            if s not in DEFAULT_SYSTEMS:
                raise ValueError(f"unknown system {s!r}")

    def to_dict(self):
        return {
            "out_dir": self.out_dir, "corpus_dir": self.corpus_dir,
            "n_utts": self.n_utts, "n_noises": self.n_noises,
            "snrs": list(self.snrs), "systems": list(self.systems),
            "split_ratios": list(self.split_ratios), "seed": self.seed,
            "epochs": self.epochs, "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
        }

    def content_hash(self):
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass
class ExperimentReport:
    records: list  # dicts: system, noise, snr_db, mean_ecm, n
    metadata: dict = field(default_factory=dict)


class Pipeline:
    """Shared front-end: waveform -> power spectrogram -> CI features."""

    def __init__(self, window_cfg=None, pre_emphasis=0.97):
        self.window_cfg = window_cfg or WindowConfig()
        self.pre_emphasis = pre_emphasis
        self.filterbank = build_filterbank(self.window_cfg.fft_size)

    def spectrogram(self, signal):
        return analyze(signal, self.window_cfg, self.pre_emphasis)

    def features(self, signal):
        return extract_features(self.spectrogram(signal), self.filterbank)


def _mix_seed(base_seed, tag, index):
    digest = hashlib.sha256(f"{base_seed}:{tag}:{index}".encode()).digest()
    return int.from_bytes(digest[:4], "little")


def _training_examples(pipeline, paths, noises, snrs, seed, tag):
    """Mix each utterance at one (noise, snr) cell, round-robin, and featurize."""
    examples = []
    for i, path in enumerate(paths):
        speech = load_wav(path)
        snr = snrs[i % len(snrs)]
        noise = noises[(i // len(snrs)) % len(noises)][1]
        mix = mix_at_snr(speech, noise, snr, seed=_mix_seed(seed, tag, i))
        examples.append(TrainingExample(
            noisy=pipeline.features(mix.mixture),
            clean=pipeline.features(mix.clean),
            noise=pipeline.features(mix.noise_scaled),
        ))
    return examples


def _system_arch(name):
    kind, causal = name.rsplit("_", 1)
    return SeArchitecture(kind=kind, causal=(causal == "causal"))


def run_experiment(cfg, log=print):
    """Execute the full protocol and return an ExperimentReport."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    started = time.time()

    if cfg.corpus_dir is None:
        corpus_dir = os.path.join(cfg.out_dir, "corpus")
        speech_paths, noise_paths = synth_corpus(
            corpus_dir, cfg.n_utts, seed=cfg.seed, n_noises=cfg.n_noises)
    else:
        corpus_dir = cfg.corpus_dir
        speech_paths = [p for _, p in manifest_from_dir(
            os.path.join(corpus_dir, "speech"))]
        noise_paths = [p for _, p in manifest_from_dir(
            os.path.join(corpus_dir, "noise"))]
    if not noise_paths:
        raise ValueError("no noise files found")

    entries = [(os.path.splitext(os.path.basename(p))[0], p)
               for p in speech_paths]
    manifest = split_manifest(entries, cfg.split_ratios, seed=cfg.seed)
    noises = [(os.path.splitext(os.path.basename(p))[0], load_wav(p))
              for p in noise_paths]

    pipeline = Pipeline()
    cnn_systems = [s for s in cfg.systems if s in CNN_SYSTEMS]
    trained = {}
    train_seconds = {}
    if cnn_systems:
        log(f"building training features for {len(manifest.paths('train'))} "
            f"train / {len(manifest.paths('dev'))} dev utterances")
        train_set = _training_examples(pipeline, manifest.paths("train"),
                                       noises, cfg.snrs, cfg.seed, "train")
        dev_set = _training_examples(pipeline, manifest.paths("dev"),
                                     noises, cfg.snrs, cfg.seed, "dev")
        tc = TrainConfig(epochs=cfg.epochs, batch_size=cfg.batch_size,
                         learning_rate=cfg.learning_rate, seed=cfg.seed)
        for name in cnn_systems:
            arch = _system_arch(name)
            log(f"training {name} ({cfg.epochs} epochs)")
            t0 = time.time()
            net, stats, history = train(arch, train_set, dev_set, tc)
            train_seconds[name] = time.time() - t0
            log(f"  done in {train_seconds[name]:.1f}s; "
                f"best dev MSE {min(h[2] for h in history):.6f}")
            trained[name] = (net, stats)
            write_history_csv(history, os.path.join(
                cfg.out_dir, f"history_{name}.csv"))
            save_enhancer(os.path.join(cfg.out_dir, f"model_{name}"),
                          net, arch, stats)

    test_paths = manifest.paths("test")
    records = []
    for noise_name, noise_sig in noises:
        for snr in cfg.snrs:
            scores = {s: [] for s in cfg.systems}
            for i, path in enumerate(test_paths):
                speech = load_wav(path)
                mix = mix_at_snr(speech, noise_sig, snr,
                                 seed=_mix_seed(cfg.seed, f"test:{noise_name}:{snr}", i))
                clean_feat = pipeline.features(mix.clean)
                noisy_spec = pipeline.spectrogram(mix.mixture)
                noisy_feat = extract_features(noisy_spec, pipeline.filterbank)
                noise_est = None
                for system in cfg.systems:
                    if system == "noisy":
                        out = noisy_feat
                    elif system in CNN_SYSTEMS:
                        net, stats = trained[system]
                        out = enhance(noisy_feat, net, _system_arch(system), stats)
                    else:
                        if noise_est is None:
                            noise_est = classic.estimate_noise(noisy_spec)
                        if system == "wiener_as":
                            spec = classic.wiener_as(noisy_spec, noise_est)
                        else:
                            spec = classic.logmmse(noisy_spec, noise_est)
                        out = extract_features(spec, pipeline.filterbank)
                    scores[system].append(ecm(clean_feat, out).value)
            for system in cfg.systems:
                records.append({
                    "system": system, "noise": noise_name,
                    "snr_db": float(snr),
                    "mean_ecm": float(np.mean(scores[system])),
                    "n": len(scores[system]),
                })
            log(f"scored noise={noise_name} snr={snr:+.0f} dB "
                f"({len(test_paths)} utterances)")

    metadata = {
        "config": cfg.to_dict(),
        "config_hash": cfg.content_hash(),
        "started": started,
        "finished": time.time(),
        "train_seconds": train_seconds,
    }
    report = ExperimentReport(records=records, metadata=metadata)
    with open(os.path.join(cfg.out_dir, "metadata.json"), "w") as f:
        json.dump(metadata, f, indent=2)
    return report


def write_report_csv(report, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["system", "noise", "snr_db", "mean_ecm", "n"])
        for r in report.records:
            w.writerow([r["system"], r["noise"], repr(r["snr_db"]),
                        repr(r["mean_ecm"]), r["n"]])


def read_report_csv(path):
    records = []
    with open(path, newline="") as f:
        r = csv.reader(f)
        header = next(r)
        if header != ["system", "noise", "snr_db", "mean_ecm", "n"]:
            raise ValueError("bad report CSV header")
        for row in r:
            records.append({
                "system": row[0], "noise": row[1], "snr_db": float(row[2]),
                "mean_ecm": float(row[3]), "n": int(row[4]),
            })
    return ExperimentReport(records=records)


def render_report(report, out_dir):
    """Write report.csv plus one score-vs-SNR line plot per noise."""
    if not report.records:
        raise ValueError("empty report")
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "report.csv")
    write_report_csv(report, csv_path)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    noises = sorted({r["noise"] for r in report.records})
    plot_paths = []
    for noise in noises:
        rows = [r for r in report.records if r["noise"] == noise]
        systems = sorted({r["system"] for r in rows})
        fig, ax = plt.subplots(figsize=(7, 5))
        for system in systems:
            pts = sorted(((r["snr_db"], r["mean_ecm"]) for r in rows
                          if r["system"] == system))
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker="o", label=system)
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("mean envelope correlation score")
        ax.set_title(f"noise: {noise}")
        ax.set_ylim(0, 1)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, f"scores_{noise}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        plot_paths.append(path)
    return csv_path, plot_paths
