"""Residual feedforward surrogate: 44 shape terms -> 32 log10 wave-drag
coefficients.

Architecture (fixed): four hidden layers of 256 units, leaky-ReLU
activations, and a skip connection adding the first hidden activation to the
last hidden activation before the output layer:

    h1 = act(W1 xhat + b1)
    h2 = act(W2 h1 + b2)
    h3 = act(W3 h2 + b3)
    h4 = act(W4 h3 + b4) + h1
    y  = W5 h4 + b5

Inputs are standardized per feature with statistics stored in the model.
Training is plain mini-batch Adam on MSE over log10 targets, fully
deterministic for a given seed.  Reverse-mode gradients of every output with
respect to every input are exact (leaky-ReLU subgradient 0.01 at the kink).
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ModelFormatError

N_INPUTS = 44
N_OUTPUTS = 32
HIDDEN = 256
LEAK = 0.01

_MAGIC = b"SHLN"
_VERSION = 1
_ACT_LEAKY_RELU = 1


def _act(x):
    return np.where(x > 0.0, x, LEAK * x)


def _act_grad(x):
    return np.where(x > 0.0, 1.0, LEAK)


@dataclass
class SurrogateModel:
    weights: list[np.ndarray]       # W1..W5, shapes (in, out)
    biases: list[np.ndarray]        # b1..b5
    x_mean: np.ndarray              # (44,)
    x_std: np.ndarray               # (44,)
    activation: int = _ACT_LEAKY_RELU

    @classmethod
    def initialize(cls, seed: int = 0) -> "SurrogateModel":
        """Scaled-uniform fan-in init, seed-controlled."""
        rng = np.random.default_rng(seed)
        dims = [N_INPUTS, HIDDEN, HIDDEN, HIDDEN, HIDDEN, N_OUTPUTS]
        weights, biases = [], []
        for d_in, d_out in zip(dims[:-1], dims[1:]):
            bound = np.sqrt(1.0 / d_in)
            weights.append(rng.uniform(-bound, bound, size=(d_in, d_out)))
            biases.append(np.zeros(d_out))
        return cls(weights=weights, biases=biases,
                   x_mean=np.zeros(N_INPUTS), x_std=np.ones(N_INPUTS))

    # ------------------------------------------------------------------ #
    def _normalize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.x_mean) / self.x_std

    def _forward(self, xhat: np.ndarray):
        """Returns (y, cache) for a batch of normalized inputs (N, 44)."""
        w, b = self.weights, self.biases
        z1 = xhat @ w[0] + b[0]
        h1 = _act(z1)
        z2 = h1 @ w[1] + b[1]
        h2 = _act(z2)
        z3 = h2 @ w[2] + b[2]
        h3 = _act(z3)
        z4 = h3 @ w[3] + b[3]
        h4 = _act(z4) + h1
        y = h4 @ w[4] + b[4]
        return y, (xhat, z1, h1, z2, h2, z3, h3, z4, h4)

    def predict(self, params44) -> np.ndarray:
        """log10(Cw) for the 32 conditions; accepts one vector or a batch."""
        x = np.asarray(params44, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != N_INPUTS:
            raise DomainError(f"expected {N_INPUTS} inputs, got {x.shape[1]}")
        if not np.all(np.isfinite(x)):
            raise DomainError("inputs must be finite")
        y, _ = self._forward(self._normalize(x))
        return y[0] if single else y

    def gradient(self, params44) -> np.ndarray:
        """Exact Jacobian (32, 44) of outputs w.r.t. the raw inputs."""
        x = np.asarray(params44, dtype=float)
        if x.shape != (N_INPUTS,):
            raise DomainError(f"expected a ({N_INPUTS},) vector")
        _, cache = self._forward(self._normalize(x[None, :]))
        _, z1, _, z2, _, z3, _, z4, _ = cache
        w = self.weights
        # propagate a (32, dim) matrix backward through the network
        g_h4 = w[4].T.copy()                      # dy/dh4: (32, 256)
        g_z4 = g_h4 * _act_grad(z4)               # broadcast over rows
        g_h3 = g_z4 @ w[3].T
        g_z3 = g_h3 * _act_grad(z3)
        g_h2 = g_z3 @ w[2].T
        g_z2 = g_h2 * _act_grad(z2)
        g_h1 = g_z2 @ w[1].T + g_h4               # skip path h4 <- h1
        g_z1 = g_h1 * _act_grad(z1)
        g_xhat = g_z1 @ w[0].T                    # (32, 44)
        return g_xhat / self.x_std[None, :]

    # ------------------------------------------------------------------ #
    def save(self, path) -> None:
        """Versioned binary: magic, version, dims, activation, stats,
        weights as little-endian float64, trailing CRC32 checksum."""
        dims = [N_INPUTS] + [w.shape[1] for w in self.weights]
        payload = bytearray()
        payload += struct.pack("<I", len(dims))
        payload += struct.pack(f"<{len(dims)}I", *dims)
        payload += struct.pack("<I", self.activation)
        for arr in (self.x_mean, self.x_std):
            payload += np.ascontiguousarray(arr, dtype="<f8").tobytes()
        for w, b in zip(self.weights, self.biases):
            payload += np.ascontiguousarray(w, dtype="<f8").tobytes()
            payload += np.ascontiguousarray(b, dtype="<f8").tobytes()
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<I", _VERSION))
            fh.write(struct.pack("<Q", len(payload)))
            fh.write(payload)
            fh.write(struct.pack("<I", zlib.crc32(bytes(payload))))

    @classmethod
    def load(cls, path) -> "SurrogateModel":
        with open(path, "rb") as fh:
            data = fh.read()
        if data[:4] != _MAGIC:
            raise ModelFormatError(f"{path}: bad magic {data[:4]!r}")
        (version,) = struct.unpack_from("<I", data, 4)
        if version != _VERSION:
            raise ModelFormatError(f"{path}: unsupported format version {version}")
        (size,) = struct.unpack_from("<Q", data, 8)
        payload = data[16:16 + size]
        if len(payload) != size or len(data) < 16 + size + 4:
            raise ModelFormatError(f"{path}: truncated model file")
        (crc,) = struct.unpack_from("<I", data, 16 + size)
        if crc != zlib.crc32(payload):
            raise ModelFormatError(f"{path}: checksum mismatch")
        off = 0
        (n_dims,) = struct.unpack_from("<I", payload, off); off += 4
        dims = struct.unpack_from(f"<{n_dims}I", payload, off); off += 4 * n_dims
        (activation,) = struct.unpack_from("<I", payload, off); off += 4

        def take(shape):
            nonlocal off
            n = int(np.prod(shape))
            arr = np.frombuffer(payload, dtype="<f8", count=n, offset=off).reshape(shape).copy()
            off += 8 * n
            return arr

        x_mean = take((dims[0],))
        x_std = take((dims[0],))
        weights, biases = [], []
        for d_in, d_out in zip(dims[:-1], dims[1:]):
            weights.append(take((d_in, d_out)))
            biases.append(take((d_out,)))
        return cls(weights=weights, biases=biases, x_mean=x_mean, x_std=x_std,
                   activation=activation)


# --------------------------------------------------------------------------- #
# training
# --------------------------------------------------------------------------- #

@dataclass
class TrainingConfig:
    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 400
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    val_fraction: float = 0.1
    upsample_factor: int = 4
    seed: int = 0
    lr_decay: float = 0.999          # multiplicative, per epoch

    def __post_init__(self):
        if not 0.0 < self.val_fraction < 1.0:
            raise DomainError("val_fraction must lie in (0, 1)")
        if self.upsample_factor < 1 or int(self.upsample_factor) != self.upsample_factor:
            raise DomainError("upsample_factor must be an integer >= 1")


@dataclass
class TrainingReport:
    train_mse: list[float] = field(default_factory=list)
    val_mse: list[float] = field(default_factory=list)
    best_epoch: int = -1
    val_r2: float = float("nan")
    n_train: int = 0
    n_val: int = 0
    n_upsampled: int = 0

    def table(self) -> str:
        lines = ["epoch,train_mse,val_mse"]
        for i, (tr, va) in enumerate(zip(self.train_mse, self.val_mse), start=1):
            lines.append(f"{i},{tr:.9e},{va:.9e}")
        return "\n".join(lines)


def r_squared(predictions, targets) -> float:
    """1 - SS_res/SS_tot pooled over every output column."""
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(targets, dtype=float)
    if p.shape != t.shape or t.size < 2:
        raise DomainError("predictions and targets must match with >= 2 values")
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        raise DomainError("targets are constant; R^2 undefined")
    ss_res = float(np.sum((p - t) ** 2))
    return 1.0 - ss_res / ss_tot


def upsample_low_drag_rows(log_targets: np.ndarray, train_idx: np.ndarray,
                           factor: int) -> np.ndarray:
    """Indices of the training split with low-drag rows replicated.

    A row qualifies when its mean log10(Cw) over the 32 conditions is more
    than one standard deviation below the mean of the whole dataset; each
    qualifying training row appears `factor` times in the result.
    """
    row_mean = log_targets.mean(axis=1)
    cutoff = row_mean.mean() - row_mean.std()
    out = []
    for idx in train_idx:
        reps = factor if row_mean[idx] < cutoff else 1
        out.extend([idx] * reps)
    return np.array(out, dtype=np.int64)


def train(dataset, config: TrainingConfig | None = None) -> tuple[SurrogateModel, TrainingReport]:
    """Train on (params44, cw32) rows; targets become log10(Cw).

    `dataset` is a pair of arrays: inputs (N, 44) and positive Cw (N, 32).
    Keeps the weights of the best validation epoch.
    """
    config = config or TrainingConfig()
    x, cw = dataset
    x = np.asarray(x, dtype=float)
    cw = np.asarray(cw, dtype=float)
    if x.ndim != 2 or x.shape[1] != N_INPUTS:
        raise DomainError(f"inputs must be (N, {N_INPUTS})")
    if cw.shape != (len(x), N_OUTPUTS):
        raise DomainError(f"targets must be (N, {N_OUTPUTS})")
    if len(x) < 10:
        raise DomainError("need at least 10 rows to train")
    if np.any(cw <= 0.0):
        raise DomainError("all Cw must be positive (log10 targets)")
    y = np.log10(cw)
    if float(np.ptp(y)) == 0.0:
        raise DomainError("targets are constant; nothing to learn")

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(x))
    n_val = max(1, int(round(config.val_fraction * len(x))))
    val_idx = order[:n_val]
    train_idx = order[n_val:]
    if len(train_idx) == 0:
        raise DomainError("validation split leaves no training rows")

    expanded = upsample_low_drag_rows(y, train_idx, config.upsample_factor)
    model = SurrogateModel.initialize(seed=config.seed)
    mean = x[train_idx].mean(axis=0)
    std = x[train_idx].std(axis=0)
    std[std < 1e-12] = 1.0
    model.x_mean = mean
    model.x_std = std

    xh_train = model._normalize(x[expanded])
    y_train = y[expanded]
    xh_val = model._normalize(x[val_idx])
    y_val = y[val_idx]

    report = TrainingReport(n_train=len(train_idx), n_val=n_val,
                            n_upsampled=len(expanded) - len(train_idx))
    w, b = model.weights, model.biases
    m_w = [np.zeros_like(a) for a in w]
    v_w = [np.zeros_like(a) for a in w]
    m_b = [np.zeros_like(a) for a in b]
    v_b = [np.zeros_like(a) for a in b]
    step = 0
    lr = config.learning_rate
    best_val = np.inf
    best = None

    n_rows = len(xh_train)
    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(n_rows)
        epoch_loss = 0.0
        for start in range(0, n_rows, config.batch_size):
            batch = perm[start:start + config.batch_size]
            xb = xh_train[batch]
            yb = y_train[batch]
            out, cache = model._forward(xb)
            _, z1, h1, z2, h2, z3, h3, z4, h4 = cache
            diff = out - yb
            epoch_loss += float(np.sum(diff**2))
            g_y = 2.0 * diff / (len(batch) * N_OUTPUTS)

            gw = [None] * 5
            gb = [None] * 5
            gw[4] = h4.T @ g_y
            gb[4] = g_y.sum(axis=0)
            g_h4 = g_y @ w[4].T
            g_z4 = g_h4 * _act_grad(z4)
            gw[3] = h3.T @ g_z4
            gb[3] = g_z4.sum(axis=0)
            g_h3 = g_z4 @ w[3].T
            g_z3 = g_h3 * _act_grad(z3)
            gw[2] = h2.T @ g_z3
            gb[2] = g_z3.sum(axis=0)
            g_h2 = g_z3 @ w[2].T
            g_z2 = g_h2 * _act_grad(z2)
            gw[1] = h1.T @ g_z2
            gb[1] = g_z2.sum(axis=0)
            g_h1 = g_z2 @ w[1].T + g_h4       # skip connection
            g_z1 = g_h1 * _act_grad(z1)
            gw[0] = xb.T @ g_z1
            gb[0] = g_z1.sum(axis=0)

            step += 1
            bc1 = 1.0 - config.beta1**step
            bc2 = 1.0 - config.beta2**step
            for k in range(5):
                m_w[k] = config.beta1 * m_w[k] + (1 - config.beta1) * gw[k]
                v_w[k] = config.beta2 * v_w[k] + (1 - config.beta2) * gw[k] ** 2
                w[k] -= lr * (m_w[k] / bc1) / (np.sqrt(v_w[k] / bc2) + config.eps)
                m_b[k] = config.beta1 * m_b[k] + (1 - config.beta1) * gb[k]
                v_b[k] = config.beta2 * v_b[k] + (1 - config.beta2) * gb[k] ** 2
                b[k] -= lr * (m_b[k] / bc1) / (np.sqrt(v_b[k] / bc2) + config.eps)

        lr *= config.lr_decay
        train_mse = epoch_loss / (n_rows * N_OUTPUTS)
        val_pred, _ = model._forward(xh_val)
        val_mse = float(np.mean((val_pred - y_val) ** 2))
        report.train_mse.append(train_mse)
        report.val_mse.append(val_mse)
        if val_mse < best_val:
            best_val = val_mse
            report.best_epoch = epoch
            best = ([a.copy() for a in w], [a.copy() for a in b])

    if best is not None:
        model.weights = best[0]
        model.biases = best[1]
    val_pred = model.predict(x[val_idx])
    report.val_r2 = r_squared(val_pred, y_val)
    return model, report
