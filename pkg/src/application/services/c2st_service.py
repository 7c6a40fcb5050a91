"""
Classifier two-sample test built on a small numpy MLP.
Application layer - evaluation metric.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np

from src.application.services.optimization_service import Adam
from src.domain.errors import DegenerateFeaturesError
from src.domain.value_objects.common import C2stConfig, C2stScore
from src.domain.value_objects.streams import StreamPurpose, stream

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100


class MlpClassifier:
    """Fully connected ReLU network with a single logit output."""

    def __init__(self, input_dim: int, hidden_width: int, hidden_layers: int, rng: np.random.Generator):
        sizes = [input_dim] + [hidden_width] * hidden_layers + [1]
        self.params = {}
        for layer, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            bound = 1.0 / np.sqrt(fan_in)
            self.params[f"W{layer}"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            self.params[f"b{layer}"] = rng.uniform(-bound, bound, size=fan_out)
        self.layers = len(sizes) - 1

    def _forward(self, features: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray], List[np.ndarray]]:
        activations = [features]
        pre_activations = []
        hidden = features
        for layer in range(self.layers):
            z = hidden @ self.params[f"W{layer}"] + self.params[f"b{layer}"]
            pre_activations.append(z)
            if layer < self.layers - 1:
                hidden = np.maximum(z, 0.0)
                activations.append(hidden)
        return pre_activations[-1][:, 0], activations, pre_activations

    def logits(self, features: np.ndarray) -> np.ndarray:
        return self._forward(np.asarray(features, dtype=float))[0]

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        logits = self.logits(features)
        return 0.5 * (1.0 + np.tanh(0.5 * logits))

    def predict(self, features: np.ndarray) -> np.ndarray:
        return (self.logits(features) > 0).astype(np.int64)

    def loss_and_gradients(self, features: np.ndarray, labels: np.ndarray) -> Tuple[float, dict]:
        """Mean binary cross-entropy on logits and its gradients."""
        logits, activations, pre_activations = self._forward(features)
        size = features.shape[0]
        loss = float(np.mean(np.logaddexp(0.0, logits) - labels * logits))
        probabilities = 0.5 * (1.0 + np.tanh(0.5 * logits))
        delta = ((probabilities - labels) / size)[:, None]

        grads = {}
        for layer in reversed(range(self.layers)):
            grads[f"W{layer}"] = activations[layer].T @ delta
            grads[f"b{layer}"] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ self.params[f"W{layer}"].T) * (pre_activations[layer - 1] > 0)
        return loss, grads


def train_classifier(features, labels, cfg: C2stConfig, rng: np.random.Generator) -> Tuple[MlpClassifier, List[float]]:
    """
    Mini-batch Adam on binary cross-entropy for a fixed number of epochs.

    Returns the classifier and the mean loss of every epoch. A non-finite loss
    raises FloatingPointError.
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    classifier = MlpClassifier(features.shape[1], cfg.hidden_width(features.shape[1]), cfg.hidden_layers, rng)
    optimizer = Adam(lr=cfg.learning_rate)
    losses = []
    for _ in range(cfg.epochs):
        order = rng.permutation(features.shape[0])
        epoch_loss = 0.0
        for start in range(0, order.size, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            loss, grads = classifier.loss_and_gradients(features[batch], labels[batch])
            if not np.isfinite(loss):
                raise FloatingPointError("Classifier loss became non-finite")
            optimizer.step(classifier.params, grads)
            epoch_loss += loss * batch.size
        losses.append(epoch_loss / order.size)
    return classifier, losses


def classify(classifier: MlpClassifier, features) -> np.ndarray:
    """Predicted 0/1 labels."""
    return classifier.predict(np.asarray(features, dtype=float))


def _standardize(x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    joint = np.concatenate([x, y])
    mean = joint.mean(axis=0)
    std = joint.std(axis=0)
    keep = std > 0
    if not keep.any():
        raise DegenerateFeaturesError("Every feature has zero variance in both sample sets")
    if not keep.all():
        logger.info(f"Dropping {int((~keep).sum())} zero-variance features before the two-sample test")
    return (x[:, keep] - mean[keep]) / std[keep], (y[:, keep] - mean[keep]) / std[keep]


def _fold_accuracy(features, labels, train, test, cfg: C2stConfig, fold: int) -> float:
    rng = stream(cfg.seed, StreamPurpose.C2ST, 1, fold)
    try:
        classifier, _ = train_classifier(features[train], labels[train], cfg, rng)
    except FloatingPointError as e:
        logger.warning(f"Two-sample test fold {fold} aborted: {e}; recording 0.5")
        return 0.5
    return float(np.mean(classify(classifier, features[test]) == labels[test]))


def c2st(x, y, cfg: Optional[C2stConfig] = None) -> C2stScore:
    """
    Held-out accuracy of a classifier separating X (label 0) from Y (label 1).

    Features are standardized jointly, folds are stratified, and the result
    does not depend on the order of the two arguments.
    """
    cfg = cfg or C2stConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.shape != y.shape:
        raise ValueError(f"Sample sets must have equal shapes, got {x.shape} and {y.shape}")
    if x.shape[0] < MIN_SAMPLES:
        raise ValueError(f"Each sample set needs at least {MIN_SAMPLES} rows")
    if x.tobytes() > y.tobytes():
        x, y = y, x

    x, y = _standardize(x, y)
    size = x.shape[0]
    features = np.concatenate([x, y])
    labels = np.concatenate([np.zeros(size), np.ones(size)])

    permutation = stream(cfg.seed, StreamPurpose.C2ST, 0).permutation(size)
    splits = np.array_split(permutation, cfg.folds)
    folds = []
    for test_half in splits:
        test = np.concatenate([test_half, test_half + size])
        train_mask = np.ones(2 * size, dtype=bool)
        train_mask[test] = False
        folds.append((np.flatnonzero(train_mask), test))

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            scores = list(pool.map(
                lambda item: _fold_accuracy(features, labels, item[1][0], item[1][1], cfg, item[0]),
                enumerate(folds),
            ))
    else:
        scores = [_fold_accuracy(features, labels, train, test, cfg, f) for f, (train, test) in enumerate(folds)]
    return C2stScore.from_folds(scores)
