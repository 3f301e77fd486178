"""Popularity predictors over community sentiment energies.

Two linear hypothesis classes share one training loop:

* a one-variable model ``alpha * total_energy + beta``;
* a per-edge model ``sum(omega_e * edge_energy_e) + rho``, one weight per
  community edge.

Both are trained by stochastic gradient descent on half-mean-squared-error.
Features are z-scored internally on the training split (energies vary over
orders of magnitude) and the learned parameters are mapped back to raw
energy space, so stored models always apply to unscaled energies.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import stats
from .energy import EnergyFunction, per_edge_energies
from .graph import CommunityGraph, Edge
from .topics import GapDataset, Topic

PREDICTOR_KINDS = ("linear", "edge")


class TrainingDiverged(RuntimeError):
    """Loss or a gradient became non-finite during training."""

    def __init__(self, message: str, epoch: int | None = None):
        self.epoch = epoch
        super().__init__(message)


@dataclass(frozen=True)
class LinearModel:
    alpha: float
    beta: float


@dataclass(frozen=True, eq=False)
class EdgeModel:
    edges: tuple[Edge, ...]
    weight_values: np.ndarray
    rho: float

    def __post_init__(self):
        if self.weight_values.shape != (len(self.edges),):
            raise ValueError("one weight per edge required")

    @property
    def weights(self) -> dict[Edge, float]:
        return {e: float(w) for e, w in zip(self.edges, self.weight_values)}

    @classmethod
    def from_weights(cls, weights: Mapping[Edge, float], rho: float) -> "EdgeModel":
        edges = tuple(sorted(weights))
        values = np.array([weights[e] for e in edges], dtype=np.float64)
        return cls(edges=edges, weight_values=values, rho=rho)


@dataclass(frozen=True, eq=False)
class TopicSample:
    """Per-topic features (edge energies and their sum) with the real popularity."""

    topic: str
    edges: tuple[Edge, ...]
    edge_energies: np.ndarray
    total_energy: float
    target: float


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 500
    init: str = "zeros"  # "zeros" | "uniform"
    init_range: tuple[float, float] = (-0.01, 0.01)
    rng_seed: int = 0
    shuffle: bool = True
    l2: float = 0.0
    stop_tol: float = 1e-9

    def __post_init__(self):
        if not (math.isfinite(self.learning_rate) and self.learning_rate >= 0.0):
            raise ValueError("learning_rate must be finite and non-negative")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.init not in ("zeros", "uniform"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.l2 < 0.0:
            raise ValueError("l2 must be non-negative")


@dataclass
class TrainResult:
    model: LinearModel | EdgeModel
    loss_curve: list[float] = field(default_factory=list)


@dataclass
class EvalResult:
    rse: float
    r_squared: float
    residuals: list[tuple[str, float, float]]  # (topic, actual, predicted)


def make_samples(
    community: CommunityGraph,
    vectors_by_topic: Mapping[str, Mapping[str, np.ndarray]],
    topics: Sequence[Topic],
    function: EnergyFunction = EnergyFunction.COSINE,
) -> list[TopicSample]:
    """Build per-topic feature samples over the community's (sorted) edge set."""
    edges = tuple(community.sorted_edges())
    samples = []
    for topic in topics:
        vectors = vectors_by_topic.get(topic.hashtag, {})
        _, values = per_edge_energies(community, vectors, function)
        samples.append(
            TopicSample(
                topic=topic.hashtag,
                edges=edges,
                edge_energies=values,
                total_energy=float(np.sum(values)),
                target=float(topic.popularity),
            )
        )
    return samples


def split_train_test(
    dataset: GapDataset | Sequence[Topic], rng_seed: int
) -> tuple[list[Topic], list[Topic]]:
    """Uniform random split with ceil(n/2) topics in train, deterministic by seed."""
    topics = list(dataset.topics if isinstance(dataset, GapDataset) else dataset)
    n = len(topics)
    if n < 2:
        raise ValueError("need at least 2 topics to split")
    k = (n + 1) // 2
    perm = np.random.default_rng(rng_seed).permutation(n)
    in_train = set(int(i) for i in perm[:k])
    train = [t for i, t in enumerate(topics) if i in in_train]
    test = [t for i, t in enumerate(topics) if i not in in_train]
    return train, test


def predict_linear(model: LinearModel, energy: float) -> float:
    return model.alpha * energy + model.beta


def _check_edges(model: EdgeModel, sample: TopicSample) -> None:
    if sample.edges is not model.edges and sample.edges != model.edges:
        raise ValueError(
            f"sample {sample.topic!r} covers a different edge set than the model"
        )


def predict_edge(model: EdgeModel, sample: TopicSample) -> float:
    _check_edges(model, sample)
    return float(np.dot(model.weight_values, sample.edge_energies)) + model.rho


def predict(model: LinearModel | EdgeModel, sample: TopicSample) -> float:
    if isinstance(model, LinearModel):
        return predict_linear(model, sample.total_energy)
    return predict_edge(model, sample)


def _predict_batch(
    model: LinearModel | EdgeModel, samples: Sequence[TopicSample]
) -> np.ndarray:
    if isinstance(model, LinearModel):
        feats = np.array([s.total_energy for s in samples], dtype=np.float64)
        return model.alpha * feats + model.beta
    for s in samples:
        _check_edges(model, s)
    feats = np.stack([s.edge_energies for s in samples])
    return feats @ model.weight_values + model.rho


def loss(model: LinearModel | EdgeModel, samples: Sequence[TopicSample]) -> float:
    """Half mean squared error over the samples."""
    if not samples:
        raise ValueError("loss needs at least one sample")
    errors = _predict_batch(model, samples) - np.array(
        [s.target for s in samples], dtype=np.float64
    )
    return float(np.dot(errors, errors)) / (2.0 * len(samples))


def gradient_linear(
    model: LinearModel, samples: Sequence[TopicSample]
) -> tuple[float, float]:
    """(d/d alpha, d/d beta) of the loss: mean residual times feature."""
    if not samples:
        raise ValueError("gradient needs at least one sample")
    feats = np.array([s.total_energy for s in samples], dtype=np.float64)
    errors = model.alpha * feats + model.beta - np.array(
        [s.target for s in samples], dtype=np.float64
    )
    n = len(samples)
    return float(np.dot(errors, feats)) / n, float(np.sum(errors)) / n


def gradient_edge_model(
    model: EdgeModel, samples: Sequence[TopicSample]
) -> tuple[np.ndarray, float]:
    """Gradients for every edge weight plus the intercept."""
    if not samples:
        raise ValueError("gradient needs at least one sample")
    errors = _predict_batch(model, samples) - np.array(
        [s.target for s in samples], dtype=np.float64
    )
    feats = np.stack([s.edge_energies for s in samples])
    n = len(samples)
    return feats.T @ errors / n, float(np.sum(errors)) / n


def gradient_edge(
    model: EdgeModel, samples: Sequence[TopicSample], edge: Edge
) -> float:
    """Loss gradient with respect to a single edge weight."""
    try:
        idx = model.edges.index(edge)
    except ValueError:
        raise ValueError(f"edge {edge!r} is not in the model") from None
    grad_w, _ = gradient_edge_model(model, samples)
    return float(grad_w[idx])


def sgd_step(
    model: LinearModel | EdgeModel,
    batch: Sequence[TopicSample],
    config: TrainConfig,
) -> LinearModel | EdgeModel:
    """One gradient-descent update on the mean batch gradient.

    The optional L2 penalty applies to slopes and edge weights, never to the
    intercept.
    """
    eta = config.learning_rate
    if isinstance(model, LinearModel):
        d_alpha, d_beta = gradient_linear(model, batch)
        d_alpha += config.l2 * model.alpha
        if not (math.isfinite(d_alpha) and math.isfinite(d_beta)):
            raise TrainingDiverged(
                f"non-finite gradient (d_alpha={d_alpha}, d_beta={d_beta})"
            )
        return LinearModel(
            alpha=model.alpha - eta * d_alpha, beta=model.beta - eta * d_beta
        )
    grad_w, d_rho = gradient_edge_model(model, batch)
    if config.l2:
        grad_w = grad_w + config.l2 * model.weight_values
    if not (np.all(np.isfinite(grad_w)) and math.isfinite(d_rho)):
        raise TrainingDiverged("non-finite gradient on edge weights")
    return EdgeModel(
        edges=model.edges,
        weight_values=model.weight_values - eta * grad_w,
        rho=model.rho - eta * d_rho,
    )


def _standardize(values: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Column z-scores; constant columns keep scale 1 so they map to zero."""
    mu = values.mean(axis=0)
    sd = values.std(axis=0)
    sd = np.where(sd == 0.0, 1.0, sd)
    return (values - mu) / sd, mu, sd


def train(
    kind: str, train_samples: Sequence[TopicSample], config: TrainConfig
) -> TrainResult:
    """Run per-sample SGD for ``config.epochs`` passes and record the loss curve.

    Sample order is reshuffled every epoch when ``config.shuffle`` is set; all
    randomness (shuffling and optional uniform init) flows from
    ``config.rng_seed``. Stops early once an epoch changes the training loss
    by less than ``config.stop_tol`` (a plateau); a worsening epoch never
    counts as converged, so runaway learning rates surface as divergence
    errors instead of quietly returning the last iterate.
    """
    if kind not in PREDICTOR_KINDS:
        raise ValueError(f"kind must be one of {PREDICTOR_KINDS}, got {kind!r}")
    if not train_samples:
        raise ValueError("train needs at least one sample")
    rng = np.random.default_rng(config.rng_seed)
    n = len(train_samples)

    if kind == "linear":
        feats = np.array([s.total_energy for s in train_samples], dtype=np.float64)
        z, mu, sd = _standardize(feats[:, None])
        std_samples = [
            TopicSample(
                topic=s.topic,
                edges=(),
                edge_energies=np.zeros(0),
                total_energy=float(z[i, 0]),
                target=s.target,
            )
            for i, s in enumerate(train_samples)
        ]
        if config.init == "uniform":
            lo, hi = config.init_range
            a0, b0 = rng.uniform(lo, hi, 2)
            model: LinearModel | EdgeModel = LinearModel(float(a0), float(b0))
        else:
            model = LinearModel(0.0, 0.0)
    else:
        edges = train_samples[0].edges
        for s in train_samples:
            if s.edges is not edges and s.edges != edges:
                raise ValueError("samples cover different edge sets")
        feats = np.stack([s.edge_energies for s in train_samples])
        z, mu, sd = _standardize(feats)
        std_samples = [
            TopicSample(
                topic=s.topic,
                edges=edges,
                edge_energies=z[i],
                total_energy=float(np.sum(z[i])),
                target=s.target,
            )
            for i, s in enumerate(train_samples)
        ]
        if config.init == "uniform":
            lo, hi = config.init_range
            draws = rng.uniform(lo, hi, len(edges) + 1)
            model = EdgeModel(
                edges=edges, weight_values=draws[:-1], rho=float(draws[-1])
            )
        else:
            model = EdgeModel(
                edges=edges,
                weight_values=np.zeros(len(edges), dtype=np.float64),
                rho=0.0,
            )

    curve: list[float] = []
    prev = math.inf
    for epoch in range(config.epochs):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        try:
            for i in order:
                model = sgd_step(model, (std_samples[i],), config)
        except TrainingDiverged as exc:
            raise TrainingDiverged(str(exc), epoch=epoch) from None
        epoch_loss = loss(model, std_samples)
        curve.append(epoch_loss)
        if not math.isfinite(epoch_loss):
            raise TrainingDiverged(
                f"loss became non-finite at epoch {epoch}", epoch=epoch
            )
        if abs(prev - epoch_loss) < config.stop_tol:
            break
        prev = epoch_loss

    if isinstance(model, LinearModel):
        alpha = model.alpha / float(sd[0])
        beta = model.beta - model.alpha * float(mu[0]) / float(sd[0])
        return TrainResult(model=LinearModel(alpha, beta), loss_curve=curve)
    raw_w = model.weight_values / sd
    raw_rho = model.rho - float(np.dot(model.weight_values, mu / sd))
    return TrainResult(
        model=EdgeModel(edges=model.edges, weight_values=raw_w, rho=raw_rho),
        loss_curve=curve,
    )


def closed_form_linear_fit(
    energies: Sequence[float], targets: Sequence[float]
) -> LinearModel:
    """Ordinary least squares for the one-variable model; verification oracle.

    Training itself always goes through SGD; this exists to check it.
    """
    x = np.asarray(energies, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.shape[0] < 2:
        raise ValueError("need two equal-length one-dimensional series")
    dx = x - x.mean()
    ssx = float(np.dot(dx, dx))
    if ssx == 0.0:
        raise ValueError("constant energies; slope undefined")
    alpha = float(np.dot(dx, y - y.mean())) / ssx
    beta = float(y.mean()) - alpha * float(x.mean())
    return LinearModel(alpha=alpha, beta=beta)


def evaluate(
    model: LinearModel | EdgeModel, test_samples: Sequence[TopicSample]
) -> EvalResult:
    """RSE and R^2 on held-out samples, with per-topic residual rows."""
    if not test_samples:
        raise ValueError("evaluate needs at least one sample")
    preds = _predict_batch(model, test_samples)
    actuals = np.array([s.target for s in test_samples], dtype=np.float64)
    value = stats.rse(preds, actuals)
    return EvalResult(
        rse=value,
        r_squared=1.0 - value,
        residuals=[
            (s.topic, float(a), float(p))
            for s, a, p in zip(test_samples, actuals, preds)
        ],
    )


def save_model(model: LinearModel | EdgeModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if isinstance(model, LinearModel):
            fh.write("kind\tlinear\n")
            fh.write(f"{model.alpha!r}\t{model.beta!r}\n")
        else:
            fh.write("kind\tedge\n")
            for (a, b), w in zip(model.edges, model.weight_values):
                fh.write(f"{a}\t{b}\t{float(w)!r}\n")
            fh.write(f"rho\t{model.rho!r}\n")


def load_model(path: str | Path) -> LinearModel | EdgeModel:
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or not lines[0].startswith("kind\t"):
        raise ValueError(f"{path}: missing kind header")
    kind = lines[0].split("\t")[1]
    if kind == "linear":
        if len(lines) != 2:
            raise ValueError(f"{path}: malformed linear model")
        alpha, beta = (float(v) for v in lines[1].split("\t"))
        return LinearModel(alpha=alpha, beta=beta)
    if kind == "edge":
        if len(lines) < 2 or not lines[-1].startswith("rho\t"):
            raise ValueError(f"{path}: malformed edge model")
        weights: dict[Edge, float] = {}
        for row in lines[1:-1]:
            a, b, w = row.split("\t")
            weights[(a, b)] = float(w)
        rho = float(lines[-1].split("\t")[1])
        return EdgeModel.from_weights(weights, rho)
    raise ValueError(f"{path}: unknown model kind {kind!r}")
