"""Minimal 1-D convolutional network engine.

Forward pass, exact reverse-mode gradients, Adam, binary checkpoints.
Sequences are (T, channels) float64 arrays.  Convolutions are zero-padded
either symmetrically ("centered") or on the past side only ("causal"),
so the output length always equals the input length.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

PADDING_MODES = ("centered", "causal")
ACTIVATIONS = ("tanh", "linear")

CHECKPOINT_MAGIC = b"CISE"
CHECKPOINT_VERSION = 1


class ConvLayer:
    """1-D convolution over time with per-output-channel bias and activation."""

    def __init__(self, in_channels, out_channels, kernel_width=5,
                 padding="causal", activation="tanh", rng=None):
        if kernel_width % 2 == 0:
            raise ValueError("kernel_width must be odd")
        if padding not in PADDING_MODES:
            raise ValueError(f"unknown padding mode {padding!r}")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_width = kernel_width
        self.padding = padding
        self.activation = activation
        if rng is None:
            rng = np.random.RandomState(0)
        fan_in = in_channels * kernel_width
        fan_out = out_channels * kernel_width
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        self.weights = rng.uniform(-limit, limit, (out_channels, in_channels, kernel_width))
        self.bias = np.zeros(out_channels)

    def _pad(self, x):
        k = self.kernel_width
        if self.padding == "causal":
            return np.pad(x, ((k - 1, 0), (0, 0)))
        half = (k - 1) // 2
        return np.pad(x, ((half, half), (0, 0)))

    def forward(self, x, want_cache=False):
        if x.shape[1] != self.in_channels:
            raise ValueError(
                f"input has {x.shape[1]} channels, layer expects {self.in_channels}")
        k = self.kernel_width
        xp = self._pad(x)
        # im2col: row t holds x_pad[t:t+k] flattened to (in_channels * k)
        cols = np.ascontiguousarray(
            np.lib.stride_tricks.sliding_window_view(xp, k, axis=0)
        ).reshape(x.shape[0], self.in_channels * k)
        z = cols @ self.weights.reshape(self.out_channels, -1).T + self.bias
        y = np.tanh(z) if self.activation == "tanh" else z
        if want_cache:
            return y, (cols, y)
        return y

    def backward(self, grad_out, cache):
        """Gradients for weights, bias and input given dL/d(output)."""
        cols, y = cache
        if self.activation == "tanh":
            grad_out = grad_out * (1.0 - y * y)
        grad_b = grad_out.sum(axis=0)
        # dW[o,c,j] = sum_t g[t,o] * x_pad[t+j,c]
        grad_w = (grad_out.T @ cols).reshape(self.weights.shape)
        k = self.kernel_width
        t = grad_out.shape[0]
        grad_cols = (grad_out @ self.weights.reshape(self.out_channels, -1)
                     ).reshape(t, self.in_channels, k)
        grad_xp = np.zeros((t + k - 1, self.in_channels))
        for j in range(k):
            grad_xp[j:j + t] += grad_cols[:, :, j]
        if self.padding == "causal":
            grad_x = grad_xp[k - 1:]
        else:
            half = (k - 1) // 2
            grad_x = grad_xp[half:half + t]
        return grad_w, grad_b, grad_x


class Network:
    """Ordered stack of ConvLayers applied sequentially over a (T, C) input."""

    def __init__(self, layers=None, rng_seed=0):
        self.layers = list(layers) if layers else []
        self.rng_seed = rng_seed
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_channels != b.in_channels:
                raise ValueError("adjacent layer channel counts do not match")

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def forward_cached(self, x):
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x, want_cache=True)
            caches.append(cache)
        return x, caches

    def backward(self, grad_out, caches):
        """Reverse-mode gradients; returns [(grad_w, grad_b), ...] per layer."""
        if len(caches) != len(self.layers):
            raise ValueError("cache list does not match layer stack")
        grads = [None] * len(self.layers)
        g = grad_out
        for i in range(len(self.layers) - 1, -1, -1):
            gw, gb, g = self.layers[i].backward(g, caches[i])
            grads[i] = (gw, gb)
        return grads

    def parameters(self):
        """Flat list of parameter arrays (weights, bias per layer, in order)."""
        out = []
        for layer in self.layers:
            out.append(layer.weights)
            out.append(layer.bias)
        return out

    def set_parameters(self, params):
        if len(params) != 2 * len(self.layers):
            raise ValueError("parameter list does not match network")
        for i, layer in enumerate(self.layers):
            layer.weights = params[2 * i].reshape(layer.weights.shape).copy()
            layer.bias = params[2 * i + 1].reshape(layer.bias.shape).copy()

    def copy_parameters(self):
        return [p.copy() for p in self.parameters()]

    def n_parameters(self):
        return sum(p.size for p in self.parameters())


def mse_loss(pred, target):
    """Mean squared error over all elements plus gradient w.r.t. pred."""
    if pred.shape != target.shape:
        raise ValueError("shape mismatch in mse_loss")
    diff = pred - target
    n = diff.size
    loss = float(np.mean(diff * diff))
    grad = (2.0 / n) * diff
    return loss, grad


class Adam:
    """Adam with bias correction over a network's parameter list."""

    def __init__(self, net, lr=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8):
        if lr <= 0:
            raise ValueError("lr must be positive")
        self.net = net
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        params = net.parameters()
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, grads):
        """Apply one update. grads is [(grad_w, grad_b), ...] per layer."""
        flat = []
        for gw, gb in grads:
            flat.append(gw)
            flat.append(gb)
        for g in flat:
            if not np.all(np.isfinite(g)):
                raise FloatingPointError("non-finite gradient; step aborted")
        self.t += 1
        params = self.net.parameters()
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for i, (p, g) in enumerate(zip(params, flat)):
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            m_hat = self.m[i] / bc1
            v_hat = self.v[i] / bc2
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.epsilon)


_PAD_CODE = {"centered": 0, "causal": 1}
_PAD_NAME = {v: k for k, v in _PAD_CODE.items()}
_ACT_CODE = {"tanh": 0, "linear": 1}
_ACT_NAME = {v: k for k, v in _ACT_CODE.items()}


def checkpoint_save(path, net, optimizer=None):
    """Binary checkpoint: magic, version, layer table, raw float64 parameters."""
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<II", CHECKPOINT_VERSION, len(net.layers)))
        for layer in net.layers:
            f.write(struct.pack(
                "<IIIBB", layer.in_channels, layer.out_channels,
                layer.kernel_width, _PAD_CODE[layer.padding],
                _ACT_CODE[layer.activation]))
        for p in net.parameters():
            f.write(np.ascontiguousarray(p, dtype="<f8").tobytes())
        if optimizer is None:
            f.write(struct.pack("<B", 0))
        else:
            f.write(struct.pack("<B", 1))
            f.write(struct.pack("<Qdddd", optimizer.t, optimizer.lr,
                                optimizer.beta1, optimizer.beta2,
                                optimizer.epsilon))
            for arr in optimizer.m + optimizer.v:
                f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read_exact(f, n):
    buf = f.read(n)
    if len(buf) != n:
        raise ValueError("truncated checkpoint file")
    return buf


def checkpoint_load(path, expect_net=None):
    """Restore (network, optimizer-or-None) from a checkpoint file.

    If ``expect_net`` is given its structure must match the file exactly.
    """
    with open(path, "rb") as f:
        if _read_exact(f, 4) != CHECKPOINT_MAGIC:
            raise ValueError("not a checkpoint file (bad magic)")
        version, n_layers = struct.unpack("<II", _read_exact(f, 8))
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        layers = []
        for _ in range(n_layers):
            cin, cout, k, pad, act = struct.unpack("<IIIBB", _read_exact(f, 14))
            layer = ConvLayer(cin, cout, k, _PAD_NAME[pad], _ACT_NAME[act],
                              rng=np.random.RandomState(0))
            layers.append(layer)
        net = Network(layers)
        if expect_net is not None:
            if len(expect_net.layers) != n_layers:
                raise ValueError("checkpoint layer count does not match network")
            for a, b in zip(expect_net.layers, net.layers):
                if (a.in_channels, a.out_channels, a.kernel_width,
                        a.padding, a.activation) != (
                        b.in_channels, b.out_channels, b.kernel_width,
                        b.padding, b.activation):
                    raise ValueError("checkpoint layer structure mismatch")
        for layer in net.layers:
            for arr in (layer.weights, layer.bias):
                raw = _read_exact(f, arr.size * 8)
                arr[...] = np.frombuffer(raw, dtype="<f8").reshape(arr.shape)
        (has_opt,) = struct.unpack("<B", _read_exact(f, 1))
        opt = None
        if has_opt:
            t, lr, b1, b2, eps = struct.unpack("<Qdddd", _read_exact(f, 40))
            opt = Adam(net, lr=lr, beta1=b1, beta2=b2, epsilon=eps)
            opt.t = t
            for arr in opt.m + opt.v:
                raw = _read_exact(f, arr.size * 8)
                arr[...] = np.frombuffer(raw, dtype="<f8").reshape(arr.shape)
    if expect_net is not None:
        expect_net.set_parameters(net.parameters())
        if opt is not None:
            opt.net = expect_net
        return expect_net, opt
    return net, opt
