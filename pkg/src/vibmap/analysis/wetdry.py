"""Wet/dry surface detection as a 12-way joint classification.

Six materials (soil, rubber, sand, gravel, wood, carpet) in Dry and Wet
conditions give 12 joint (material, condition) classes. Training uses a
seeded random 80/20 segment split.
"""

from __future__ import annotations

import numpy as np

from ..dsp.features import FeatureSet, load_feature_set
from ..errors import MissingCondition
from ..materials import WET_DRY_MATERIALS
from ..model.network import NetworkConfig
from ..model.training import Metrics, TrainConfig, metrics_from_predictions, predict, train_fold

TRAIN_FRACTION = 0.8


def joint_label(entry: dict) -> str:
    return f"{entry['material']}|{entry['condition']}"


def load_wet_dry_features(
    features_dir,
    kind: str,
    materials=WET_DRY_MATERIALS,
) -> FeatureSet:
    """Load the joint-labeled feature set; both conditions must be present
    for every requested material."""
    fs = load_feature_set(features_dir, kind, label_fn=joint_label)
    keep = [
        i
        for i, e in enumerate(fs.meta)
        if e["material"] in materials and e["condition"] in ("Dry", "Wet")
    ]
    present = {(fs.meta[i]["material"], fs.meta[i]["condition"]) for i in keep}
    for material in materials:
        for condition in ("Dry", "Wet"):
            if (material, condition) not in present:
                raise MissingCondition(f"no {condition} sessions for {material!r}")
    labels = sorted({joint_label(fs.meta[i]) for i in keep})
    name_to_id = {n: i for i, n in enumerate(labels)}
    meta = [fs.meta[i] for i in keep]
    return FeatureSet(
        ids=[fs.ids[i] for i in keep],
        X=fs.X[keep],
        y=np.array([name_to_id[joint_label(e)] for e in meta], dtype=np.int64),
        subjects=fs.subjects[keep],
        label_names=labels,
        aux=fs.aux[keep] if fs.aux is not None else None,
        meta=meta,
    )


def wet_dry_eval(
    features: FeatureSet,
    net_cfg: NetworkConfig | None = None,
    train_cfg: TrainConfig | None = None,
    seed: int = 0,
) -> tuple[Metrics, dict]:
    """Train on a random 80% of segments, test on the rest; returns the
    12-class metrics plus a condition-only collapse of the same predictions."""
    train_cfg = train_cfg or TrainConfig()
    if net_cfg is None:
        rows, cols = features.X.shape[2], features.X.shape[3]
        net_cfg = NetworkConfig(input_shape=(1, rows, cols), n_classes=features.n_classes)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(features))
    cut = int(round(TRAIN_FRACTION * len(order)))
    tr, te = order[:cut], order[cut:]
    net, _ = train_fold(
        net_cfg,
        features.X[tr],
        features.y[tr],
        features.aux[tr] if features.aux is not None else None,
        train_cfg,
    )
    preds = predict(net, features.X[te], features.aux[te] if features.aux is not None else None)
    metrics = metrics_from_predictions(
        features.y[te], preds, features.n_classes, features.label_names
    )
    # collapse (material, condition) -> condition to isolate wet/dry skill
    condition_of = np.array(
        [0 if name.endswith("|Dry") else 1 for name in features.label_names]
    )
    cond_metrics = metrics_from_predictions(
        condition_of[features.y[te]], condition_of[preds], 2, ["Dry", "Wet"]
    )
    return metrics, {"condition_accuracy": cond_metrics.accuracy,
                     "condition_f1": cond_metrics.macro_f1}
