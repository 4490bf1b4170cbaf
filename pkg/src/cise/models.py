"""Enhancement architectures in CI feature space and their training loop.

Three network styles share one 7-layer convolutional backbone:

* ``vanilla``      — predicts clean features directly (in the normalized
  log domain).
* ``spectral_sub`` — predicts the noise features; the estimate is
  subtracted from the noisy energies with a floor at zero.
* ``wiener_mask``  — predicts a multiplicative mask applied to the noisy
  energies.

Networks see normalized log(1 + energy) inputs; subtraction and masking
happen in the linear energy domain.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .features import CiFeatureSequence, N_CHANNELS
from .nn import Adam, ConvLayer, Network, mse_loss

ARCH_KINDS = ("vanilla", "spectral_sub", "wiener_mask")

HIDDEN_LAYERS = 6
HIDDEN_CHANNELS = 65
KERNEL_WIDTH = 5


@dataclass
class SeArchitecture:
    kind: str
    causal: bool = False

    def __post_init__(self):
        if self.kind not in ARCH_KINDS:
            raise ValueError(f"unknown architecture kind {self.kind!r}")

    @property
    def name(self):
        return f"{self.kind}_{'causal' if self.causal else 'noncausal'}"


@dataclass
class NormStats:
    """Per-channel mean/std of log(1+energy), computed on training features."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def from_features(cls, feature_list, std_floor=1e-6):
        stacked = np.vstack([np.log1p(f.features) for f in feature_list])
        mean = stacked.mean(axis=0)
        std = np.maximum(stacked.std(axis=0), std_floor)
        return cls(mean=mean, std=std)

    def normalize(self, log_feats):
        return (log_feats - self.mean) / self.std

    def denormalize(self, z):
        return z * self.std + self.mean


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 8
    learning_rate: float = 1e-3
    seed: int = 0
    select_best_on_dev: bool = True
    kernel_width: int = KERNEL_WIDTH
    lr_decay: float = 1.0  # per-epoch multiplicative decay

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.kernel_width % 2 == 0 or self.kernel_width < 1:
            raise ValueError("kernel_width must be a positive odd integer")
        if not (0.0 < self.lr_decay <= 1.0):
            raise ValueError("lr_decay must be in (0, 1]")


@dataclass
class TrainingExample:
    """Frame-aligned feature triple for one mixed utterance."""

    noisy: CiFeatureSequence
    clean: CiFeatureSequence
    noise: CiFeatureSequence = None  # needed for the spectral_sub target


def build_model(arch, seed=0, n_channels=N_CHANNELS, kernel_width=KERNEL_WIDTH,
                hidden_channels=HIDDEN_CHANNELS, hidden_layers=HIDDEN_LAYERS):
    """7-layer conv net: 6 hidden tanh layers of 65 channels + linear output."""
    rng = np.random.RandomState(seed)
    padding = "causal" if arch.causal else "centered"
    layers = []
    cin = n_channels
    for _ in range(hidden_layers):
        layers.append(ConvLayer(cin, hidden_channels, kernel_width,
                                padding=padding, activation="tanh", rng=rng))
        cin = hidden_channels
    layers.append(ConvLayer(cin, n_channels, kernel_width,
                            padding=padding, activation="linear", rng=rng))
    if arch.kind == "wiener_mask":
        # start at an identity mask so the untrained net is a passthrough
        layers[-1].bias[:] = 1.0
    return Network(layers, rng_seed=seed)


def enhance(noisy, net, arch, stats, mask_clamp=False):
    """Run one architecture over a noisy feature sequence.

    With ``mask_clamp`` the wiener_mask gain is clipped to [0, 2] before
    application (off by default; other architectures ignore it).
    """
    y = noisy.features
    z = stats.normalize(np.log1p(y))
    f = net.forward(z)
    if not np.all(np.isfinite(f)):
        raise FloatingPointError("non-finite network output")
    if arch.kind == "vanilla":
        s_hat = np.maximum(np.exp(stats.denormalize(f)) - 1.0, 0.0)
    elif arch.kind == "spectral_sub":
        n_hat = np.maximum(np.exp(stats.denormalize(f)) - 1.0, 0.0)
        s_hat = np.maximum(y - n_hat, 0.0)
    else:  # wiener_mask
        if mask_clamp:
            f = np.clip(f, 0.0, 2.0)
        s_hat = np.maximum(y * f, 0.0)
    return CiFeatureSequence(s_hat, noisy.frame_rate)


def _example_loss(net, example, arch, stats, with_grads):
    """Loss (and optionally parameter grads) for one utterance.

    Vanilla / spectral_sub train in the normalized log domain against the
    clean / noise features; wiener_mask trains in the linear domain on the
    masked output.
    """
    y = example.noisy.features
    z = stats.normalize(np.log1p(y))
    if with_grads:
        f, caches = net.forward_cached(z)
    else:
        f = net.forward(z)
    if arch.kind == "vanilla":
        target = stats.normalize(np.log1p(example.clean.features))
        loss, grad_f = mse_loss(f, target)
    elif arch.kind == "spectral_sub":
        if example.noise is None:
            raise ValueError("spectral_sub training requires noise features")
        target = stats.normalize(np.log1p(example.noise.features))
        loss, grad_f = mse_loss(f, target)
    else:  # wiener_mask: pred = y * f in the linear domain
        pred = y * f
        loss, grad_pred = mse_loss(pred, example.clean.features)
        grad_f = grad_pred * y
    if not with_grads:
        return loss, None
    return loss, net.backward(grad_f, caches)


def _accumulate(total, grads):
    if total is None:
        return [(gw.copy(), gb.copy()) for gw, gb in grads]
    for (tw, tb), (gw, gb) in zip(total, grads):
        tw += gw
        tb += gb
    return total


def evaluate_mse(net, examples, arch, stats):
    """Mean per-utterance training-domain MSE over a dataset."""
    losses = [_example_loss(net, ex, arch, stats, with_grads=False)[0]
              for ex in examples]
    return float(np.mean(losses))


def train(arch, train_set, dev_set, cfg=None, stats=None, progress=None):
    """Train one architecture with Adam; return (net, stats, history).

    History rows are (epoch, train_mse, dev_mse).  The returned parameters
    are the snapshot of the epoch with minimum dev MSE (or the last epoch
    when dev selection is disabled).
    """
    if cfg is None:
        cfg = TrainConfig()
    if not train_set or not dev_set:
        raise ValueError("empty train or dev set")
    if stats is None:
        stats = NormStats.from_features([ex.noisy for ex in train_set])
    net = build_model(arch, seed=cfg.seed, kernel_width=cfg.kernel_width)
    opt = Adam(net, lr=cfg.learning_rate)
    order_rng = np.random.RandomState(cfg.seed + 1)

    history = []
    best_dev = np.inf
    best_params = net.copy_parameters()
    for epoch in range(1, cfg.epochs + 1):
        opt.lr = cfg.learning_rate * cfg.lr_decay ** (epoch - 1)
        order = order_rng.permutation(len(train_set))
        epoch_losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            total = None
            for idx in batch:
                loss, grads = _example_loss(net, train_set[idx], arch, stats,
                                            with_grads=True)
                if not np.isfinite(loss):
                    raise FloatingPointError(
                        f"non-finite loss at epoch {epoch}, utterance {idx}")
                epoch_losses.append(loss)
                total = _accumulate(total, grads)
            scale = 1.0 / len(batch)
            total = [(gw * scale, gb * scale) for gw, gb in total]
            opt.step(total)
        train_mse = float(np.mean(epoch_losses))
        dev_mse = evaluate_mse(net, dev_set, arch, stats)
        history.append((epoch, train_mse, dev_mse))
        if dev_mse < best_dev:
            best_dev = dev_mse
            best_params = net.copy_parameters()
        if progress is not None:
            progress(epoch, train_mse, dev_mse)
    if cfg.select_best_on_dev:
        net.set_parameters(best_params)
    return net, stats, history


def save_enhancer(prefix, net, arch, stats):
    """Persist a trained enhancer: JSON descriptor + binary checkpoint."""
    import json

    from .nn import checkpoint_save

    desc = {
        "kind": arch.kind,
        "causal": arch.causal,
        "norm_mean": stats.mean.tolist(),
        "norm_std": stats.std.tolist(),
    }
    with open(prefix + ".json", "w") as f:
        json.dump(desc, f, indent=2)
    checkpoint_save(prefix + ".ckpt", net)


def load_enhancer(prefix):
    """Restore (net, arch, stats) written by save_enhancer."""
    import json

    from .nn import checkpoint_load

    with open(prefix + ".json") as f:
        desc = json.load(f)
    arch = SeArchitecture(kind=desc["kind"], causal=desc["causal"])
    stats = NormStats(mean=np.array(desc["norm_mean"]),
                      std=np.array(desc["norm_std"]))
    net, _ = checkpoint_load(prefix + ".ckpt")
    return net, arch, stats


def write_history_csv(history, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["epoch", "train_mse", "dev_mse"])
        for epoch, train_mse, dev_mse in history:
            w.writerow([epoch, repr(train_mse), repr(dev_mse)])
