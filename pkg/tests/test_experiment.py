import json
import os

import numpy as np
import pytest

from cise.experiment import (ExperimentConfig, Pipeline, read_report_csv,
                             render_report, run_experiment, write_report_csv)


def quiet(*args, **kwargs):
    pass


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("exp")
    cfg = ExperimentConfig(
        out_dir=str(out), n_utts=12, n_noises=2, snrs=(-5.0, 5.0),
        systems=("noisy", "wiener_mask_causal", "wiener_as"),
        seed=3, epochs=2, batch_size=4)
    report = run_experiment(cfg, log=quiet)
    return cfg, report


def test_report_covers_all_cells(small_run):
    cfg, report = small_run
    cells = {(r["system"], r["noise"], r["snr_db"]) for r in report.records}
    assert len(cells) == len(report.records)
    assert len(report.records) == len(cfg.systems) * cfg.n_noises * len(cfg.snrs)
    for r in report.records:
        assert 0.0 <= r["mean_ecm"] <= 1.0
        assert r["n"] == 3  # 12 utterances at (0.5, 0.25, 0.25)


def test_artifacts_written(small_run):
    cfg, report = small_run
    assert os.path.exists(os.path.join(cfg.out_dir, "metadata.json"))
    assert os.path.exists(os.path.join(cfg.out_dir,
                                       "history_wiener_mask_causal.csv"))
    assert os.path.exists(os.path.join(cfg.out_dir,
                                       "model_wiener_mask_causal.ckpt"))
    with open(os.path.join(cfg.out_dir, "metadata.json")) as f:
        meta = json.load(f)
    assert meta["config_hash"] == cfg.content_hash()


def test_report_csv_round_trip(small_run, tmp_path):
    _, report = small_run
    path = tmp_path / "report.csv"
    write_report_csv(report, path)
    back = read_report_csv(path)
    assert back.records == report.records


def test_render_report(small_run, tmp_path):
    _, report = small_run
    csv_path, plots = render_report(report, str(tmp_path / "render"))
    assert os.path.exists(csv_path)
    assert len(plots) == 2  # one image per noise
    for p in plots:
        assert os.path.getsize(p) > 0
    # single record -> single data row
    single = read_report_csv(csv_path)
    assert len(open(csv_path).read().strip().splitlines()) == \
        len(single.records) + 1


def test_passthrough_high_snr(tmp_path):
    cfg = ExperimentConfig(
        out_dir=str(tmp_path / "p"), n_utts=10, n_noises=1, snrs=(60.0,),
        systems=("noisy",), seed=1, epochs=1)
    report = run_experiment(cfg, log=quiet)
    assert all(r["mean_ecm"] > 0.99 for r in report.records)


def test_clean_noisy_alignment(tmp_path):
    from cise.audio import load_wav, mix_at_snr
    from cise.synth import synth_corpus

    speech, noise = synth_corpus(tmp_path / "c", 10, seed=5, n_noises=1)
    pipe = Pipeline()
    noise_sig = load_wav(noise[0])
    for p in speech[:3]:
        mix = mix_at_snr(load_wav(p), noise_sig, 0.0, seed=2)
        clean = pipe.features(mix.clean)
        noisy = pipe.features(mix.mixture)
        assert clean.n_frames == noisy.n_frames


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(out_dir=str(tmp_path), snrs=())
    with pytest.raises(ValueError):
        ExperimentConfig(out_dir=str(tmp_path), systems=("bogus",))
