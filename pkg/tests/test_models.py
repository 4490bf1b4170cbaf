import numpy as np
import pytest

from cise.features import CiFeatureSequence
from cise.models import (HIDDEN_CHANNELS, KERNEL_WIDTH, NormStats,
                         SeArchitecture, TrainConfig, TrainingExample,
                         build_model, enhance, load_enhancer, save_enhancer,
                         train, write_history_csv)


def random_features(rng, t=40, scale=1.0):
    return CiFeatureSequence(scale * rng.rand(t, 22), 800.0)


def flat_stats():
    return NormStats(mean=np.zeros(22), std=np.ones(22))


def test_parameter_count_formula():
    # sum over layers of out*in*k + out for 22 -> 65 x6 -> 22, k=5
    expected = (65 * 22 * 5 + 65) + 5 * (65 * 65 * 5 + 65) + (22 * 65 * 5 + 22)
    net = build_model(SeArchitecture("vanilla"))
    assert net.n_parameters() == expected == 120337


def test_build_model_structure():
    net = build_model(SeArchitecture("wiener_mask", causal=True), seed=3)
    assert len(net.layers) == 7
    assert all(l.padding == "causal" for l in net.layers)
    assert all(l.activation == "tanh" for l in net.layers[:-1])
    assert net.layers[-1].activation == "linear"
    assert net.layers[-1].out_channels == 22
    assert all(l.out_channels == HIDDEN_CHANNELS for l in net.layers[:-1])
    assert all(l.kernel_width == KERNEL_WIDTH for l in net.layers)


def test_build_model_seeded_identical():
    a = build_model(SeArchitecture("vanilla"), seed=9)
    b = build_model(SeArchitecture("vanilla"), seed=9)
    for pa, pb in zip(a.parameters(), b.parameters()):
        assert np.array_equal(pa, pb)


def test_end_to_end_causality():
    rng = np.random.RandomState(0)
    arch = SeArchitecture("wiener_mask", causal=True)
    net = build_model(arch, seed=1)
    stats = flat_stats()
    noisy = random_features(rng, t=60)
    out1 = enhance(noisy, net, arch, stats).features
    t0 = 25
    modified = noisy.features.copy()
    modified[t0:] = rng.rand(60 - t0, 22) * 10
    out2 = enhance(CiFeatureSequence(modified, 800.0), net, arch, stats).features
    assert np.array_equal(out1[:t0], out2[:t0])


def test_wiener_identity_mask():
    # force the network to output a constant 1 -> enhanced equals input
    arch = SeArchitecture("wiener_mask")
    net = build_model(arch, seed=2)
    for layer in net.layers:
        layer.weights[:] = 0
        layer.bias[:] = 0
    net.layers[-1].bias[:] = 1.0
    rng = np.random.RandomState(3)
    noisy = random_features(rng)
    out = enhance(noisy, net, arch, flat_stats())
    assert np.allclose(out.features, noisy.features)


def test_wiener_mask_head_starts_at_identity():
    net = build_model(SeArchitecture("wiener_mask"), seed=0)
    assert np.all(net.layers[-1].bias == 1.0)
    vanilla = build_model(SeArchitecture("vanilla"), seed=0)
    assert np.all(vanilla.layers[-1].bias == 0.0)


def test_wiener_mask_clamp():
    arch = SeArchitecture("wiener_mask")
    net = build_model(arch, seed=20)
    for layer in net.layers:
        layer.weights[:] = 0
        layer.bias[:] = 0
    net.layers[-1].bias[:] = 5.0  # mask of 5, clamps to 2
    rng = np.random.RandomState(21)
    noisy = random_features(rng)
    unclamped = enhance(noisy, net, arch, flat_stats())
    clamped = enhance(noisy, net, arch, flat_stats(), mask_clamp=True)
    assert np.allclose(unclamped.features, 5.0 * noisy.features)
    assert np.allclose(clamped.features, 2.0 * noisy.features)


def test_spectral_sub_zero_noise_estimate():
    # network output that denormalizes to log(1+n)=large negative -> n_hat=0
    arch = SeArchitecture("spectral_sub")
    net = build_model(arch, seed=4)
    for layer in net.layers:
        layer.weights[:] = 0
        layer.bias[:] = 0
    net.layers[-1].bias[:] = -50.0
    rng = np.random.RandomState(5)
    noisy = random_features(rng)
    out = enhance(noisy, net, arch, flat_stats())
    assert np.allclose(out.features, noisy.features)


def test_spectral_sub_oversubtraction_floors_at_zero():
    arch = SeArchitecture("spectral_sub")
    net = build_model(arch, seed=6)
    for layer in net.layers:
        layer.weights[:] = 0
        layer.bias[:] = 0
    net.layers[-1].bias[:] = 50.0  # enormous noise estimate
    rng = np.random.RandomState(7)
    noisy = random_features(rng)
    out = enhance(noisy, net, arch, flat_stats())
    assert np.all(out.features == 0)


def test_spectral_sub_never_amplifies():
    rng = np.random.RandomState(8)
    arch = SeArchitecture("spectral_sub")
    net = build_model(arch, seed=9)
    stats = flat_stats()
    for _ in range(5):
        noisy = random_features(rng, scale=5.0)
        out = enhance(noisy, net, arch, stats)
        assert np.all(out.features <= noisy.features + 1e-12)


def test_enhance_nonnegative_finite_all_archs():
    rng = np.random.RandomState(10)
    stats = flat_stats()
    for kind in ("vanilla", "spectral_sub", "wiener_mask"):
        for causal in (False, True):
            arch = SeArchitecture(kind, causal)
            net = build_model(arch, seed=11)
            out = enhance(random_features(rng, scale=20.0), net, arch, stats)
            assert np.all(out.features >= 0)
            assert np.all(np.isfinite(out.features))


def test_norm_stats_floor():
    feats = [CiFeatureSequence(np.ones((10, 22)), 800.0)]
    stats = NormStats.from_features(feats)
    assert np.all(stats.std >= 1e-6)


def make_identity_task(rng, n=6, t=48):
    examples = []
    for _ in range(n):
        f = random_features(rng, t=t, scale=2.0)
        examples.append(TrainingExample(noisy=f, clean=f, noise=f))
    return examples


def test_train_selects_argmin_dev_epoch():
    rng = np.random.RandomState(12)
    examples = make_identity_task(rng)
    cfg = TrainConfig(epochs=4, batch_size=2, seed=0)
    net, stats, history = train(SeArchitecture("wiener_mask"),
                                examples[:4], examples[4:], cfg)
    dev = [h[2] for h in history]
    best_epoch = int(np.argmin(dev)) + 1
    # returned net reproduces the best epoch's dev MSE
    from cise.models import evaluate_mse

    assert evaluate_mse(net, examples[4:], SeArchitecture("wiener_mask"),
                        stats) == pytest.approx(min(dev), rel=1e-12)
    assert history[best_epoch - 1][2] == min(dev)


def test_wiener_identity_task_improves():
    rng = np.random.RandomState(13)
    examples = make_identity_task(rng, n=8)
    cfg = TrainConfig(epochs=6, batch_size=4, seed=1)
    _, _, history = train(SeArchitecture("wiener_mask"),
                          examples[:6], examples[6:], cfg)
    assert history[-1][2] < history[0][2]


def test_train_deterministic():
    rng = np.random.RandomState(14)
    examples = make_identity_task(rng)
    cfg = TrainConfig(epochs=3, batch_size=2, seed=5)
    r1 = train(SeArchitecture("vanilla"), examples[:4], examples[4:], cfg)
    r2 = train(SeArchitecture("vanilla"), examples[:4], examples[4:], cfg)
    assert r1[2] == r2[2]
    for a, b in zip(r1[0].parameters(), r2[0].parameters()):
        assert np.array_equal(a, b)


def test_train_validation():
    rng = np.random.RandomState(15)
    examples = make_identity_task(rng)
    with pytest.raises(ValueError, match="empty"):
        train(SeArchitecture("vanilla"), [], examples, TrainConfig(epochs=1))
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        SeArchitecture("fancy")


def test_spectral_sub_training_requires_noise():
    rng = np.random.RandomState(16)
    f = random_features(rng)
    examples = [TrainingExample(noisy=f, clean=f, noise=None)] * 4
    with pytest.raises(ValueError, match="noise"):
        train(SeArchitecture("spectral_sub"), examples[:2], examples[2:],
              TrainConfig(epochs=1))


def test_save_load_enhancer_round_trip(tmp_path):
    rng = np.random.RandomState(17)
    arch = SeArchitecture("spectral_sub", causal=True)
    net = build_model(arch, seed=18)
    stats = NormStats(mean=rng.randn(22), std=np.abs(rng.randn(22)) + 0.1)
    prefix = str(tmp_path / "model")
    save_enhancer(prefix, net, arch, stats)
    net2, arch2, stats2 = load_enhancer(prefix)
    assert arch2 == arch
    assert np.array_equal(stats2.mean, stats.mean)
    assert np.array_equal(stats2.std, stats.std)
    noisy = random_features(rng)
    assert np.array_equal(enhance(noisy, net, arch, stats).features,
                          enhance(noisy, net2, arch2, stats2).features)


def test_history_csv(tmp_path):
    path = tmp_path / "h.csv"
    write_history_csv([(1, 0.5, 0.6), (2, 0.4, 0.55)], path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "epoch,train_mse,dev_mse"
    assert len(lines) == 3
