"""Category merging: collapse hard-to-separate labels into one class.

Merging a label set coarsens the partition, so recomputing metrics from
stored predictions can never lower accuracy. Both accuracy and macro-F1
are reported for merged runs.
"""

from __future__ import annotations

import numpy as np

from ..dsp.features import FeatureSet
from ..errors import UnknownLabel
from ..ingest.splits import SplitPlan
from ..materials import HARD_TO_SEPARATE
from ..model.network import NetworkConfig
from ..model.training import CrossValResult, Metrics, TrainConfig, metrics_from_predictions, train


def merged_label_map(
    label_names: list[str], merge_set=HARD_TO_SEPARATE
) -> tuple[list[str], np.ndarray]:
    """New label list plus an old-id -> new-id mapping array.

    The merged class is named by joining the merge set with '+'.
    """
    merge_set = sorted(set(merge_set))
    unknown = [m for m in merge_set if m not in label_names]
    if unknown:
        raise UnknownLabel(f"labels not present: {unknown}")
    merged_name = "+".join(merge_set) if len(merge_set) > 1 else merge_set[0]
    new_names: list[str] = []
    for name in label_names:
        target = merged_name if name in merge_set else name
        if target not in new_names:
            new_names.append(target)
    mapping = np.array(
        [new_names.index(merged_name if n in merge_set else n) for n in label_names],
        dtype=np.int64,
    )
    return new_names, mapping


def remap_predictions(
    y_true: np.ndarray,
    y_pred: np.ndarray,
    label_names: list[str],
    merge_set=HARD_TO_SEPARATE,
) -> Metrics:
    """Recompute metrics after merging, from stored predictions."""
    new_names, mapping = merged_label_map(label_names, merge_set)
    return metrics_from_predictions(
        mapping[np.asarray(y_true)], mapping[np.asarray(y_pred)], len(new_names), new_names
    )


def merge_and_eval(
    features: FeatureSet,
    plan: SplitPlan,
    merge_set=HARD_TO_SEPARATE,
    net_cfg: NetworkConfig | None = None,
    train_cfg: TrainConfig | None = None,
) -> tuple[CrossValResult, dict]:
    """Retrain on the merged label set and report merged metrics.

    Returns the cross-validated result plus a summary carrying both the
    accuracy and macro-F1 views.
    """
    new_names, mapping = merged_label_map(features.label_names, merge_set)
    relabeled = FeatureSet(
        ids=features.ids,
        X=features.X,
        y=mapping[features.y],
        subjects=features.subjects,
        label_names=new_names,
        aux=features.aux,
        meta=features.meta,
    )
    train_cfg = train_cfg or TrainConfig()
    if net_cfg is None:
        rows, cols = features.X.shape[2], features.X.shape[3]
        net_cfg = NetworkConfig(input_shape=(1, rows, cols), n_classes=len(new_names))
    else:
        net_cfg = NetworkConfig(**{**net_cfg.__dict__, "n_classes": len(new_names)})
    result = train(relabeled, plan, net_cfg, train_cfg)
    summary = {
        "n_classes": len(new_names),
        "merged_class": "+".join(sorted(set(merge_set))),
        "mean_accuracy": result.mean_accuracy,
        "mean_f1": result.mean_f1,
    }
    return result, summary
