"""Noise-robustness evaluation: a clean-trained model tested on noisy data.

Evaluation only, no retraining. The noisy collection covers 13 of the 18
materials, so the confusion matrix is restricted to the classes actually
present in the noisy set.
"""

from __future__ import annotations

import numpy as np

from ..dsp.features import FeatureSet
from ..errors import ModelModalityMismatch
from ..model.network import VibWalkNet
from ..model.training import Metrics, metrics_from_predictions, predict


def noise_eval(
    net: VibWalkNet,
    label_names: list[str],
    noisy: FeatureSet,
    clean_accuracy: float | None = None,
) -> tuple[Metrics, dict]:
    """Evaluate a trained model on noisy-condition features.

    ``noisy`` must be labeled over (a subset of) the model's label map.
    Returns metrics restricted to the present classes plus a summary with
    the clean-vs-noisy accuracy delta when a clean baseline is given.
    """
    rows, cols = noisy.X.shape[2], noisy.X.shape[3]
    if (1, rows, cols) != tuple(net.cfg.input_shape):
        raise ModelModalityMismatch(
            f"model expects {net.cfg.input_shape}, features are (1, {rows}, {cols})"
        )
    unknown = set(noisy.label_names) - set(label_names)
    if unknown:
        raise ModelModalityMismatch(f"labels not in the model map: {sorted(unknown)}")
    model_id = {name: i for i, name in enumerate(label_names)}
    y_true_full = np.array([model_id[noisy.label_names[v]] for v in noisy.y])
    preds_full = predict(net, noisy.X, noisy.aux)

    # restrict the reported matrix to classes present in the noisy set
    present = sorted({int(v) for v in y_true_full})
    to_present = {cls: i for i, cls in enumerate(present)}
    y_true = np.array([to_present[int(v)] for v in y_true_full])
    y_pred = np.array([to_present.get(int(v), len(present)) for v in preds_full])
    n = len(present) + 1  # one extra column for out-of-set predictions
    metrics = metrics_from_predictions(
        y_true, y_pred, n, [label_names[c] for c in present] + ["<other>"]
    )
    summary = {
        "noisy_accuracy": metrics.accuracy,
        "present_classes": [label_names[c] for c in present],
    }
    if clean_accuracy is not None:
        summary["clean_accuracy"] = clean_accuracy
        summary["accuracy_delta"] = clean_accuracy - metrics.accuracy
    return metrics, summary
