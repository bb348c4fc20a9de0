"""Training loop, evaluation metrics, and cross-validated runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn

from ..dsp.features import FeatureSet
from ..errors import Divergence, EmptyTestSet, NonFiniteActivation
from ..ingest.splits import SplitPlan
from .network import NetworkConfig, VibWalkNet, build_network, standardize_batch


@dataclass
class TrainConfig:
    lr: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    batch_size: int = 64
    epochs: int = 30
    cosine_decay: bool = True
    seed: int = 0
    threads: int | None = None
    # stop early once training accuracy reaches this level (None: never)
    target_train_accuracy: float | None = None

    def to_dict(self) -> dict:
        return {
            "lr": self.lr,
            "betas": list(self.betas),
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "cosine_decay": self.cosine_decay,
            "seed": self.seed,
        }


@dataclass
class Metrics:
    macro_f1: float
    accuracy: float
    confusion: np.ndarray        # (n_classes, n_classes) ints, rows = truth
    label_names: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "label_names": self.label_names,
        }


def confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def metrics_from_predictions(
    y_true: np.ndarray,
    y_pred: np.ndarray,
    n_classes: int,
    label_names: list[str] | None = None,
) -> Metrics:
    """Macro-F1, accuracy, and the confusion matrix over a fixed class set."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.size == 0:
        raise EmptyTestSet("no test samples")
    cm = confusion_matrix(y_true, y_pred, n_classes)
    tp = np.diag(cm).astype(float)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    denom = 2 * tp + fp + fn
    f1 = np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)
    return Metrics(
        macro_f1=float(f1.mean()),
        accuracy=float(tp.sum() / cm.sum()),
        confusion=cm,
        label_names=label_names or [],
    )


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def train_fold(
    net_cfg: NetworkConfig,
    X: np.ndarray,
    y: np.ndarray,
    aux: np.ndarray | None,
    cfg: TrainConfig,
) -> tuple[VibWalkNet, dict]:
    """Train one model on one fold's training rows. Deterministic given
    seeds and a fixed torch thread count. Raises Divergence when the loss
    goes non-finite."""
    if cfg.threads is not None:
        torch.set_num_threads(cfg.threads)
    net = build_network(net_cfg)
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    opt = torch.optim.Adam(net.parameters(), lr=cfg.lr, betas=cfg.betas)
    sched = (
        torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=max(1, cfg.epochs))
        if cfg.cosine_decay
        else None
    )
    loss_fn = nn.CrossEntropyLoss()
    Xt = standardize_batch(torch.from_numpy(np.ascontiguousarray(X)))
    yt = torch.from_numpy(np.ascontiguousarray(y))
    auxt = None
    if net_cfg.use_aux:
        auxt = standardize_batch(torch.from_numpy(np.ascontiguousarray(aux)))

    history = {"loss": [], "train_accuracy": []}
    net.train()
    for epoch in range(cfg.epochs):
        total_loss = 0.0
        correct = 0
        for idx in _batches(len(yt), cfg.batch_size, rng):
            bx = Xt[idx]
            by = yt[idx]
            ba = auxt[idx] if auxt is not None else None
            opt.zero_grad()
            try:
                logits = net(bx, ba)
            except NonFiniteActivation as exc:
                raise Divergence(f"non-finite activations at epoch {epoch}") from exc
            loss = loss_fn(logits, by)
            if not torch.isfinite(loss):
                raise Divergence(f"non-finite loss at epoch {epoch}")
            loss.backward()
            opt.step()
            total_loss += loss.item() * len(idx)
            correct += int((logits.argmax(dim=1) == by).sum())
        if sched is not None:
            sched.step()
        history["loss"].append(total_loss / len(yt))
        history["train_accuracy"].append(correct / len(yt))
        if (
            cfg.target_train_accuracy is not None
            and history["train_accuracy"][-1] >= cfg.target_train_accuracy
        ):
            break
    net.eval()
    return net, history


@torch.no_grad()
def predict(
    net: VibWalkNet,
    X: np.ndarray,
    aux: np.ndarray | None = None,
    batch_size: int = 256,
) -> np.ndarray:
    net.eval()
    Xt = standardize_batch(torch.from_numpy(np.ascontiguousarray(X)))
    auxt = None
    if net.cfg.use_aux:
        auxt = standardize_batch(torch.from_numpy(np.ascontiguousarray(aux)))
    preds = []
    for start in range(0, len(Xt), batch_size):
        bx = Xt[start : start + batch_size]
        ba = auxt[start : start + batch_size] if auxt is not None else None
        preds.append(net(bx, ba).argmax(dim=1).numpy())
    return np.concatenate(preds) if preds else np.zeros(0, dtype=np.int64)


def evaluate(
    net: VibWalkNet,
    X: np.ndarray,
    y: np.ndarray,
    aux: np.ndarray | None = None,
    n_classes: int | None = None,
    label_names: list[str] | None = None,
) -> Metrics:
    if len(y) == 0:
        raise EmptyTestSet("no test samples")
    preds = predict(net, X, aux)
    return metrics_from_predictions(
        y, preds, n_classes or net.cfg.n_classes, label_names
    )


@dataclass
class CrossValResult:
    fold_metrics: list[Metrics]
    mean_f1: float
    std_f1: float
    mean_accuracy: float
    best_fold: int
    model: VibWalkNet            # model of the best-F1 fold
    fold_predictions: list[tuple[np.ndarray, np.ndarray]]  # (y_true, y_pred)

    def summary(self) -> dict:
        return {
            "mean_f1": self.mean_f1,
            "std_f1": self.std_f1,
            "mean_accuracy": self.mean_accuracy,
            "fold_f1": [m.macro_f1 for m in self.fold_metrics],
            "fold_accuracy": [m.accuracy for m in self.fold_metrics],
        }


def train(
    features: FeatureSet,
    plan: SplitPlan,
    net_cfg: NetworkConfig,
    cfg: TrainConfig,
) -> CrossValResult:
    """Cross-validated training over a split plan.

    Each fold trains a fresh model on the fold's train ids and evaluates
    on its test ids; reports per-fold metrics plus the mean and standard
    deviation of macro-F1.
    """
    row_of = {sid: i for i, sid in enumerate(features.ids)}
    fold_metrics: list[Metrics] = []
    fold_predictions = []
    best = (-1.0, 0, None)
    for f, fold in enumerate(plan.folds):
        tr = np.array([row_of[s] for s in fold.train_ids if s in row_of], dtype=int)
        te = np.array([row_of[s] for s in fold.test_ids if s in row_of], dtype=int)
        if len(te) == 0:
            raise EmptyTestSet(f"fold {f} has no test rows in the feature set")
        net, _ = train_fold(
            net_cfg,
            features.X[tr],
            features.y[tr],
            features.aux[tr] if features.aux is not None else None,
            cfg,
        )
        preds = predict(net, features.X[te],
                        features.aux[te] if features.aux is not None else None)
        m = metrics_from_predictions(
            features.y[te], preds, net_cfg.n_classes, features.label_names
        )
        fold_metrics.append(m)
        fold_predictions.append((features.y[te].copy(), preds))
        if m.macro_f1 > best[0]:
            best = (m.macro_f1, f, net)
    f1s = np.array([m.macro_f1 for m in fold_metrics])
    accs = np.array([m.accuracy for m in fold_metrics])
    return CrossValResult(
        fold_metrics=fold_metrics,
        mean_f1=float(f1s.mean()),
        std_f1=float(f1s.std()),
        mean_accuracy=float(accs.mean()),
        best_fold=best[1],
        model=best[2],
        fold_predictions=fold_predictions,
    )
