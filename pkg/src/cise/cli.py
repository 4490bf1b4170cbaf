"""Command-line interface.

Subcommands cover the whole pipeline: corpus synthesis, SNR mixing,
feature extraction, enhancer training, enhancement, electrodogram export,
scoring and the full experiment sweep.  Options can come from a plain
``key=value`` config file (``--config``); explicit flags win.
"""

import argparse
import os
import sys

import numpy as np

from . import classic
from .audio import load_wav, mix_at_snr, save_wav
from .experiment import (DEFAULT_SYSTEMS, ExperimentConfig, Pipeline,
                         read_report_csv, render_report, run_experiment,
                         write_report_csv)
from .features import render_electrodogram, select_n_of_m
from .metrics import ecm
from .models import (SeArchitecture, TrainConfig, TrainingExample, enhance,
                     load_enhancer, save_enhancer, train, write_history_csv)
from .synth import synth_corpus


def parse_config_file(path):
    """Plain-text key=value config; '#' starts a comment."""
    cfg = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            cfg[key.strip()] = value.strip()
    return cfg


def _resolve(args, file_cfg, key, cast, default):
    """Flag > config file > default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in file_cfg:
        return cast(file_cfg[key])
    return default


def _load_features(path):
    from .features import CiFeatureSequence

    return CiFeatureSequence(np.loadtxt(path, delimiter=","), 800.0)


def _save_features(feat, path):
    np.savetxt(path, feat.features, delimiter=",")


def cmd_synth(args, file_cfg):
    n_utts = _resolve(args, file_cfg, "n_utts", int, 100)
    n_noises = _resolve(args, file_cfg, "n_noises", int, 2)
    seed = _resolve(args, file_cfg, "seed", int, 0)
    speech, noise = synth_corpus(args.out_dir, n_utts, seed=seed,
                                 n_noises=n_noises)
    print(f"wrote {len(speech)} speech and {len(noise)} noise files "
          f"under {args.out_dir}")


def cmd_mix(args, file_cfg):
    seed = _resolve(args, file_cfg, "seed", int, 0)
    speech = load_wav(args.speech)
    noise = load_wav(args.noise)
    mix = mix_at_snr(speech, noise, args.snr, seed=seed)
    save_wav(args.out, mix.mixture)
    print(f"mixed at {args.snr:+.1f} dB (noise offset {mix.noise_offset}) "
          f"-> {args.out}")


def cmd_features(args, file_cfg):
    signal = load_wav(args.wav)
    feat = Pipeline().features(signal)
    _save_features(feat, args.out)
    print(f"{feat.n_frames} frames x {feat.features.shape[1]} channels "
          f"-> {args.out}")


def cmd_train(args, file_cfg):
    seed = _resolve(args, file_cfg, "seed", int, 0)
    epochs = _resolve(args, file_cfg, "epochs", int, 50)
    batch_size = _resolve(args, file_cfg, "batch_size", int, 8)
    lr = _resolve(args, file_cfg, "learning_rate", float, 1e-3)
    snrs = _parse_snrs(_resolve(args, file_cfg, "snrs", str, "-10,-5,0,5"))

    kind, causal = args.arch.rsplit("_", 1)
    arch = SeArchitecture(kind=kind, causal=(causal == "causal"))
    pipeline = Pipeline()
    noise = load_wav(args.noise)

    from .audio import manifest_from_dir, split_manifest

    entries = manifest_from_dir(args.speech_dir)
    manifest = split_manifest(entries, (0.6, 0.2, 0.2), seed=seed)
    from .experiment import _training_examples

    train_set = _training_examples(pipeline, manifest.paths("train"),
                                   [("noise", noise)], snrs, seed, "train")
    dev_set = _training_examples(pipeline, manifest.paths("dev"),
                                 [("noise", noise)], snrs, seed, "dev")
    cfg = TrainConfig(epochs=epochs, batch_size=batch_size,
                      learning_rate=lr, seed=seed)
    net, stats, history = train(
        arch, train_set, dev_set, cfg,
        progress=lambda e, tr, dv: print(
            f"epoch {e}: train {tr:.6f} dev {dv:.6f}"))
    save_enhancer(args.model, net, arch, stats)
    write_history_csv(history, args.model + "_history.csv")
    print(f"saved model to {args.model}.ckpt / .json")


def cmd_enhance(args, file_cfg):
    net, arch, stats = load_enhancer(args.model)
    feat = _load_features(args.features)
    out = enhance(feat, net, arch, stats)
    _save_features(out, args.out)
    print(f"enhanced {out.n_frames} frames -> {args.out}")


def cmd_electrodogram(args, file_cfg):
    feat = _load_features(args.features)
    e = select_n_of_m(feat, n=args.n_select)
    image = args.image if args.image else None
    render_electrodogram(e, args.out, image)
    print(f"electrodogram -> {args.out}" + (f" and {image}" if image else ""))


def cmd_evaluate(args, file_cfg):
    clean = _load_features(args.clean)
    processed = _load_features(args.processed)
    score = ecm(clean, processed)
    print(f"ecm {score.value:.6f}")


def _parse_snrs(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _parse_systems(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def cmd_experiment(args, file_cfg):
    cfg = ExperimentConfig(
        out_dir=args.out_dir,
        corpus_dir=_resolve(args, file_cfg, "corpus_dir", str, None),
        n_utts=_resolve(args, file_cfg, "n_utts", int, 400),
        n_noises=_resolve(args, file_cfg, "n_noises", int, 1),
        snrs=_parse_snrs(_resolve(args, file_cfg, "snrs", str, "-10,-5,0,5")),
        systems=_parse_systems(_resolve(args, file_cfg, "systems", str,
                                        ",".join(DEFAULT_SYSTEMS))),
        seed=_resolve(args, file_cfg, "seed", int, 0),
        epochs=_resolve(args, file_cfg, "epochs", int, 50),
        batch_size=_resolve(args, file_cfg, "batch_size", int, 8),
        learning_rate=_resolve(args, file_cfg, "learning_rate", float, 1e-3),
    )
    report = run_experiment(cfg)
    csv_path, plots = render_report(report, cfg.out_dir)
    print(f"report -> {csv_path}")
    for p in plots:
        print(f"plot -> {p}")


def cmd_report(args, file_cfg):
    report = read_report_csv(args.report_csv)
    csv_path, plots = render_report(report, args.out_dir)
    print(f"report -> {csv_path}")
    for p in plots:
        print(f"plot -> {p}")


def build_parser():
    p = argparse.ArgumentParser(
        prog="cise",
        description="Speech enhancement in the cochlear-implant feature space")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--seed", type=int, default=None, help="global RNG seed")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic WAV corpus")
    s.add_argument("out_dir")
    s.add_argument("--n-utts", dest="n_utts", type=int, default=None)
    s.add_argument("--n-noises", dest="n_noises", type=int, default=None)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("mix", help="mix speech with noise at a target SNR")
    s.add_argument("speech")
    s.add_argument("noise")
    s.add_argument("out")
    s.add_argument("--snr", type=float, required=True)
    s.set_defaults(func=cmd_mix)

    s = sub.add_parser("features", help="extract CI features from a WAV file")
    s.add_argument("wav")
    s.add_argument("out", help="output CSV (one frame per row)")
    s.set_defaults(func=cmd_features)

    s = sub.add_parser("train", help="train one enhancement architecture")
    s.add_argument("speech_dir", help="directory of clean speech WAVs")
    s.add_argument("noise", help="noise WAV")
    s.add_argument("model", help="output model path prefix")
    s.add_argument("--arch", required=True,
                   choices=[f"{k}_{c}" for k in
                            ("vanilla", "spectral_sub", "wiener_mask")
                            for c in ("causal", "noncausal")])
    s.add_argument("--epochs", type=int, default=None)
    s.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    s.add_argument("--learning-rate", dest="learning_rate", type=float,
                   default=None)
    s.add_argument("--snrs", default=None)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("enhance", help="enhance a CI feature CSV with a model")
    s.add_argument("model", help="model path prefix from `train`")
    s.add_argument("features", help="noisy feature CSV")
    s.add_argument("out")
    s.set_defaults(func=cmd_enhance)

    s = sub.add_parser("electrodogram",
                       help="n-of-m selection and electrodogram export")
    s.add_argument("features", help="feature CSV")
    s.add_argument("out", help="output CSV")
    s.add_argument("--image", help="optional raster image path")
    s.add_argument("--n-select", dest="n_select", type=int, default=8)
    s.set_defaults(func=cmd_electrodogram)

    s = sub.add_parser("evaluate", help="score processed against clean features")
    s.add_argument("clean")
    s.add_argument("processed")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("experiment", help="run the full sweep")
    s.add_argument("out_dir")
    s.add_argument("--corpus-dir", dest="corpus_dir", default=None)
    s.add_argument("--n-utts", dest="n_utts", type=int, default=None)
    s.add_argument("--n-noises", dest="n_noises", type=int, default=None)
    s.add_argument("--snrs", default=None)
    s.add_argument("--systems", default=None)
    s.add_argument("--epochs", type=int, default=None)
    s.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    s.add_argument("--learning-rate", dest="learning_rate", type=float,
                   default=None)
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("report", help="re-render plots from a report CSV")
    s.add_argument("report_csv")
    s.add_argument("out_dir")
    s.set_defaults(func=cmd_report)

    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    file_cfg = parse_config_file(args.config) if args.config else {}
    try:
        args.func(args, file_cfg)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
