"""Multilayer perceptron that predicts per-slot idle time and packet count.

Inputs are the base-station number, a weekday/weekend flag and the slot of
the day; outputs are the two traffic parameters the allocators consume.
Plain numpy with hand-written backpropagation.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyDataset, EncodingError
from .traffic import ChannelBounds

WEEKEND_FACTOR = 0.6
PACKET_SCALE = 100.0
DIURNAL_DEPTH = 0.5


@dataclass(frozen=True)
class TrafficFeatures:
    bsn: int
    is_weekend: bool
    slot: int


@dataclass(frozen=True)
class TrafficRecord:
    features: TrafficFeatures
    idle_time: float
    packet_count: float

    @property
    def targets(self) -> tuple[float, float]:
        return (self.idle_time, self.packet_count)


@dataclass
class MlpModel:
    """Feed-forward network: tanh hidden layers, linear output layer.

    ``weights[k]`` has shape ``(layer_sizes[k + 1], layer_sizes[k])``.
    ``target_mean`` and ``target_scale`` map standardized outputs back to
    physical units in :func:`predict_parameters`; :func:`mlp_forward` returns
    the raw network output.
    """

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    target_mean: np.ndarray = field(default=None)
    target_scale: np.ndarray = field(default=None)

    def __post_init__(self):
        self.layer_sizes = tuple(int(n) for n in self.layer_sizes)
        if len(self.layer_sizes) < 2 or any(n < 1 for n in self.layer_sizes):
            raise ValueError(f"bad layer sizes {self.layer_sizes}")
        self.weights = [np.array(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.array(b, dtype=np.float64).reshape(-1) for b in self.biases]
        n_layers = len(self.layer_sizes) - 1
        if len(self.weights) != n_layers or len(self.biases) != n_layers:
            raise DimensionMismatch("need one weight matrix and bias per layer")
        for k in range(n_layers):
            shape = (self.layer_sizes[k + 1], self.layer_sizes[k])
            if self.weights[k].shape != shape:
                raise DimensionMismatch(f"layer {k} weights {self.weights[k].shape} != {shape}")
            if self.biases[k].shape != (shape[0],):
                raise DimensionMismatch(f"layer {k} bias {self.biases[k].shape}")
        n_out = self.layer_sizes[-1]
        self.target_mean = (
            np.zeros(n_out) if self.target_mean is None
            else np.asarray(self.target_mean, dtype=np.float64).reshape(n_out)
        )
        self.target_scale = (
            np.ones(n_out) if self.target_scale is None
            else np.asarray(self.target_scale, dtype=np.float64).reshape(n_out)
        )
        for arr in [*self.weights, *self.biases, self.target_mean, self.target_scale]:
            if not np.all(np.isfinite(arr)):
                raise ValueError("model parameters must be finite")

    def copy(self) -> "MlpModel":
        return MlpModel(
            self.layer_sizes,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.target_mean.copy(),
            self.target_scale.copy(),
        )

    def to_json_dict(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "hidden_activation": "tanh",
            "output_activation": "identity",
            "weights": [w.reshape(-1).tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "target_mean": self.target_mean.tolist(),
            "target_scale": self.target_scale.tolist(),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "MlpModel":
        sizes = doc["layer_sizes"]
        weights = [
            np.asarray(w, dtype=np.float64).reshape(sizes[k + 1], sizes[k])
            for k, w in enumerate(doc["weights"])
        ]
        return cls(sizes, weights, doc["biases"], doc.get("target_mean"), doc.get("target_scale"))

    def save(self, path: str | Path):
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "MlpModel":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")


def encode_features(f: TrafficFeatures, M: int, slots_per_day: int) -> np.ndarray:
    """One-hot station, weekend flag, then slot-of-day on the unit circle."""
    if not 0 <= f.bsn < M:
        raise EncodingError(f"bsn {f.bsn} outside [0, {M})")
    if not 0 <= f.slot < slots_per_day:
        raise EncodingError(f"slot {f.slot} outside [0, {slots_per_day})")
    x = np.zeros(M + 3)
    x[f.bsn] = 1.0
    x[M] = 1.0 if f.is_weekend else 0.0
    angle = 2.0 * math.pi * f.slot / slots_per_day
    x[M + 1] = math.sin(angle)
    x[M + 2] = math.cos(angle)
    return x


def init_model(layer_sizes: Sequence[int], seed: int = 0) -> MlpModel:
    """Glorot-uniform weights and zero biases, drawn from a seeded generator."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpModel(tuple(layer_sizes), weights, biases)


def _forward(model: MlpModel, X: np.ndarray) -> list[np.ndarray]:
    # activations per layer, input first; X is (batch, n_in)
    acts = [X]
    last = len(model.weights) - 1
    for k, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ W.T + b
        acts.append(z if k == last else np.tanh(z))
    return acts


def mlp_forward(model: MlpModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.layer_sizes[0]:
        raise DimensionMismatch(f"input length {x.shape[-1]} != {model.layer_sizes[0]}")
    out = _forward(model, np.atleast_2d(x))[-1]
    return out[0] if x.ndim == 1 else out


def loss_and_gradients(model: MlpModel, X: np.ndarray, T: np.ndarray):
    """Mean-squared error over a batch and its gradient for every parameter.

    The per-sample loss is the mean over outputs of the squared error.
    Returns ``(loss, weight_grads, bias_grads)``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    T = np.atleast_2d(np.asarray(T, dtype=np.float64))
    acts = _forward(model, X)
    n, n_out = T.shape
    err = acts[-1] - T
    loss = float(np.mean(err * err))
    delta = 2.0 * err / (n * n_out)
    gw = [None] * len(model.weights)
    gb = [None] * len(model.weights)
    for k in range(len(model.weights) - 1, -1, -1):
        gw[k] = delta.T @ acts[k]
        gb[k] = delta.sum(axis=0)
        if k:
            delta = (delta @ model.weights[k]) * (1.0 - acts[k] ** 2)
    return loss, gw, gb


def _as_arrays(dataset) -> tuple[np.ndarray, np.ndarray]:
    if len(dataset) == 0:
        raise EmptyDataset("dataset has no rows")
    X = np.asarray([np.asarray(x, dtype=np.float64) for x, _ in dataset])
    T = np.asarray([np.asarray(t, dtype=np.float64) for _, t in dataset])
    return X, T


def mlp_train(
    model: MlpModel,
    dataset,
    config: TrainConfig = TrainConfig(),
    standardize: bool = True,
) -> tuple[MlpModel, list[float]]:
    """Mini-batch gradient descent on mean-squared error.

    ``dataset`` is a sequence of ``(input_vector, target_vector)`` pairs.
    With ``standardize`` the targets are shifted and scaled by their training
    mean and std, and the trained model remembers both.

    Returns the trained copy and the full-dataset MSE after each epoch. The
    MSE before any update is :func:`standardized_mse` of the input model.
    """
    X, T = _as_arrays(dataset)
    if X.shape[1] != model.layer_sizes[0]:
        raise DimensionMismatch(f"inputs have {X.shape[1]} features, model expects {model.layer_sizes[0]}")
    if T.shape[1] != model.layer_sizes[-1]:
        raise DimensionMismatch(f"targets have {T.shape[1]} values, model outputs {model.layer_sizes[-1]}")
    model = model.copy()
    if standardize:
        mean = T.mean(axis=0)
        scale = T.std(axis=0)
        scale[scale == 0] = 1.0
        model.target_mean, model.target_scale = mean, scale
        T = (T - mean) / scale

    rng = np.random.default_rng(config.seed)
    n = len(X)
    lr = config.learning_rate
    history = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            _, gw, gb = loss_and_gradients(model, X[idx], T[idx])
            for k in range(len(gw)):
                model.weights[k] -= lr * gw[k]
                model.biases[k] -= lr * gb[k]
        history.append(float(np.mean((_forward(model, X)[-1] - T) ** 2)))
    return model, history


def standardized_mse(model: MlpModel, dataset, target_mean=None, target_scale=None) -> float:
    """Dataset MSE of the raw outputs against standardized targets.

    Standardization uses ``target_mean``/``target_scale`` when given, else the
    model's own. Pass a trained model's statistics to score an untrained one.
    """
    X, T = _as_arrays(dataset)
    mean = model.target_mean if target_mean is None else np.asarray(target_mean)
    scale = model.target_scale if target_scale is None else np.asarray(target_scale)
    return float(np.mean((_forward(model, X)[-1] - (T - mean) / scale) ** 2))


def _flat_params(model: MlpModel) -> list[np.ndarray]:
    out = []
    for W, b in zip(model.weights, model.biases):
        out.extend([W, b])
    return out


def gradient_check(
    model: MlpModel,
    sample,
    grad_fn: Optional[Callable] = None,
    step: float = 1e-4,
) -> float:
    """Largest relative gap between analytic and central-difference gradients.

    ``sample`` is ``(input_vector, target_vector)``. ``grad_fn`` defaults to
    :func:`loss_and_gradients` and may be swapped out to test the checker.
    """
    grad_fn = grad_fn or loss_and_gradients
    x, t = sample
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    T = np.atleast_2d(np.asarray(t, dtype=np.float64))
    probe = model.copy()
    _, gw, gb = grad_fn(probe, X, T)
    analytic = []
    for g_w, g_b in zip(gw, gb):
        analytic.extend([g_w, g_b])

    worst = 0.0
    for param, grad in zip(_flat_params(probe), analytic):
        flat = param.reshape(-1)
        gflat = np.asarray(grad).reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss_and_gradients(probe, X, T)[0]
            flat[i] = orig - step
            down = loss_and_gradients(probe, X, T)[0]
            flat[i] = orig
            numeric = (up - down) / (2.0 * step)
            ga = float(gflat[i])
            rel = abs(ga - numeric) / max(abs(ga), abs(numeric), 1e-8)
            worst = max(worst, rel)
    return worst


def predict_parameters(
    model: MlpModel, features: TrafficFeatures, M: int, slots_per_day: int
) -> tuple[float, float]:
    """Predicted ``(idle_time, packet_count)`` in physical units."""
    raw = mlp_forward(model, encode_features(features, M, slots_per_day))
    out = raw * model.target_scale + model.target_mean
    return float(out[0]), float(out[1])


def derive_bounds(packet_predictions: Sequence[float], capacity_factor: float = 1.0) -> ChannelBounds:
    """Channel bounds from predicted per-slot packet counts.

    Demand is the prediction times ``capacity_factor``, clamped at zero;
    ``l_min`` is the floor of the smallest demand, ``l_max`` the ceiling of the
    largest, both at least one.
    """
    if len(packet_predictions) == 0:
        raise EmptyDataset("no predictions")
    demand = [max(0.0, float(p)) * capacity_factor for p in packet_predictions]
    l_min = max(1, math.floor(min(demand)))
    l_max = max(l_min, math.ceil(max(demand)))
    return ChannelBounds(l_min, l_max)


def station_load(bsn: int, slot: int, slots_per_day: int, is_weekend: bool) -> float:
    """Noise-free relative load used by :func:`synth_traffic_dataset`."""
    base = 1.0 + 0.5 * bsn
    phase = 2.0 * math.pi * slot / slots_per_day - math.pi / 2.0
    load = base * (1.0 + DIURNAL_DEPTH * math.sin(phase))
    return load * WEEKEND_FACTOR if is_weekend else load


def synth_traffic_dataset(
    M: int,
    days: int,
    slots_per_day: int,
    seed: int = 0,
    noise: float = 0.05,
    slot_seconds: float = 3600.0,
) -> list[TrafficRecord]:
    """Synthetic per-slot traffic for ``M`` stations over ``days`` days.

    With ``load = station_load(bsn, slot, slots_per_day, weekend)``::

        packet_count = 100 * load * (1 + noise * e1)
        idle_time    = slot_seconds / (1 + load) * (1 + noise * e2)

    where ``e1, e2`` are standard normal draws and idle time is clipped to
    ``[0, slot_seconds]``. Days 5 and 6 of every week are weekend days, whose
    load is scaled by ``WEEKEND_FACTOR``. Station baselines grow as
    ``1 + 0.5 * bsn`` and the diurnal cycle bottoms out at slot 0.
    """
    if min(M, days, slots_per_day) < 1:
        raise ValueError("M, days and slots_per_day must be positive")
    rng = np.random.default_rng(seed)
    rows = []
    for day in range(days):
        weekend = day % 7 >= 5
        for slot in range(slots_per_day):
            for bsn in range(M):
                load = station_load(bsn, slot, slots_per_day, weekend)
                e1, e2 = rng.standard_normal(2)
                packets = PACKET_SCALE * load * (1.0 + noise * e1)
                idle = slot_seconds / (1.0 + load) * (1.0 + noise * e2)
                idle = min(max(idle, 0.0), slot_seconds)
                rows.append(
                    TrafficRecord(TrafficFeatures(bsn, weekend, slot), float(idle), float(packets))
                )
    return rows


def encode_dataset(records: Sequence[TrafficRecord], M: int, slots_per_day: int):
    return [(encode_features(r.features, M, slots_per_day), r.targets) for r in records]


def write_dataset_csv(records: Sequence[TrafficRecord], path: str | Path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bsn", "is_weekend", "slot", "idle_time", "packet_count"])
        for r in records:
            f = r.features
            w.writerow([f.bsn, int(f.is_weekend), f.slot, repr(r.idle_time), repr(r.packet_count)])


def read_dataset_csv(path: str | Path) -> list[TrafficRecord]:
    with open(path, newline="") as fh:
        return [
            TrafficRecord(
                TrafficFeatures(int(row["bsn"]), row["is_weekend"] in ("1", "true", "True"), int(row["slot"])),
                float(row["idle_time"]),
                float(row["packet_count"]),
            )
            for row in csv.DictReader(fh)
        ]
