"""Declarative experiment runs with content-hash stage caching.

A run executes an ordered subset of stages {ingest, featurize, train,
eval, analyze, map}. Every stage writes its outputs plus a stage
manifest recording a key (SHA-256 over the stage's config slice and
input file hashes) and the hashes of its outputs. Re-running with
identical config and inputs skips completed stages.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from ..analysis.grain import grain_regression
from ..analysis.merge import merge_and_eval, remap_predictions
from ..analysis.noise import noise_eval
from ..analysis.wetdry import load_wet_dry_features, wet_dry_eval
from ..dsp.features import featurize_index, load_feature_set
from ..dsp.filters import high_pass
from ..errors import ConfigInvalid, StageFailure, VibmapError
from ..ingest.index import load_segment_index, write_segment_index
from ..ingest.splits import cross_user_folds, within_user_folds
from ..materials import GRAIN_MATERIALS
from ..model.checkpoint import load_checkpoint, save_checkpoint
from ..model.network import NetworkConfig, REFERENCE_CHANNELS
from ..model.training import TrainConfig, evaluate, train
from ..mapping.coverage import coverage_polygons
from ..mapping.geojson import dumps_geojson, emit_geojson
from ..mapping.html import render_html
from ..mapping.reports import ReportStore
from ..mapping.trajectory import fuse_trajectory

STAGES = ("ingest", "featurize", "train", "eval", "analyze", "map")

MODALITY_KIND = {"mic": "mic_mel", "acc": "acc_stft", "fused": "fused"}
MODALITY_SHAPE = {"mic": (1, 64, 61), "acc": (1, 26, 263), "fused": (1, 64, 102)}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["stages", "workdir"],
    "properties": {
        "stages": {
            "type": "array",
            "items": {"enum": list(STAGES)},
            "minItems": 1,
            "uniqueItems": True,
        },
        "workdir": {"type": "string"},
        "manifest": {"type": "string"},
        "modality": {"enum": list(MODALITY_KIND)},
        "tko": {"type": "boolean"},
        "split": {"enum": ["within", "cross"]},
        "folds": {"type": "integer", "minimum": 2},
        "group_size": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "train": {
            "type": "object",
            "properties": {
                "epochs": {"type": "integer", "minimum": 1},
                "batch_size": {"type": "integer", "minimum": 1},
                "lr": {"type": "number", "exclusiveMinimum": 0},
                "block_channels": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 1},
                    "minItems": 1,
                },
            },
        },
        "analyze": {
            "type": "array",
            "items": {"enum": ["grain", "wetdry", "noise", "merge"]},
        },
        "map": {
            "type": "object",
            "properties": {
                "store": {"type": "string"},
                "smoothing_k": {"type": "integer", "minimum": 1},
                "radius_m": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}

_DEFAULTS = {
    "modality": "mic",
    "tko": False,
    "split": "within",
    "folds": 10,
    "group_size": 3,
    "seed": 0,
    "train": {},
    "analyze": [],
    "map": {},
}


def validate_config(config: dict) -> dict:
    errors = sorted(
        Draft202012Validator(CONFIG_SCHEMA).iter_errors(config), key=lambda e: e.json_path
    )
    if errors:
        raise ConfigInvalid("; ".join(f"{e.json_path}: {e.message}" for e in errors))
    merged = {**_DEFAULTS, **config}
    order = [s for s in STAGES if s in merged["stages"]]
    if order != list(merged["stages"]):
        raise ConfigInvalid(
            f"stages must appear in pipeline order {STAGES}, got {merged['stages']}"
        )
    return merged


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _stage_key(config_slice: dict, input_files: list[Path]) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(config_slice, sort_keys=True).encode())
    for path in sorted(input_files):
        h.update(str(path).encode())
        h.update(_sha256_file(path).encode())
    return h.hexdigest()


@dataclass
class StageResult:
    name: str
    status: str                       # "ran" | "cached"
    outputs: list[str] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    config: dict
    stages: list[StageResult] = field(default_factory=list)

    @property
    def all_cached(self) -> bool:
        return all(s.status == "cached" for s in self.stages)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "stages": [
                {"name": s.name, "status": s.status, "outputs": s.outputs,
                 "metrics": s.metrics}
                for s in self.stages
            ],
        }


class _Stage:
    """Caching wrapper: compute the key, skip when unchanged, record outputs."""

    def __init__(self, name: str, out_dir: Path, config_slice: dict,
                 input_files: list[Path]):
        self.name = name
        self.out_dir = out_dir
        self.manifest_path = out_dir / "stage_manifest.json"
        for path in input_files:
            if not path.exists():
                raise FileNotFoundError(f"stage input missing: {path}")
        self.key = _stage_key(config_slice, input_files)

    def cached(self) -> StageResult | None:
        if not self.manifest_path.exists():
            return None
        try:
            doc = json.loads(self.manifest_path.read_text())
        except json.JSONDecodeError:
            return None
        if doc.get("key") != self.key:
            return None
        for rel, digest in doc.get("outputs", {}).items():
            path = self.out_dir / rel
            if not path.exists() or _sha256_file(path) != digest:
                return None
        return StageResult(
            name=self.name,
            status="cached",
            outputs=sorted(doc.get("outputs", {})),
            metrics=doc.get("metrics", {}),
        )

    def finish(self, outputs: list[Path], metrics: dict | None = None) -> StageResult:
        rels = {str(p.relative_to(self.out_dir)): _sha256_file(p) for p in outputs}
        self.manifest_path.write_text(
            json.dumps(
                {"stage": self.name, "key": self.key, "outputs": rels,
                 "metrics": metrics or {}},
                indent=1,
                sort_keys=True,
            )
        )
        return StageResult(
            name=self.name, status="ran", outputs=sorted(rels), metrics=metrics or {}
        )


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer, np.floating)):
        return value.item()
    return value


def run(config: dict) -> ExperimentReport:
    """Execute the configured stages in order; see CONFIG_SCHEMA."""
    config = validate_config(config)
    workdir = Path(config["workdir"])
    workdir.mkdir(parents=True, exist_ok=True)
    report = ExperimentReport(config=config)

    runners = {
        "ingest": _run_ingest,
        "featurize": _run_featurize,
        "train": _run_train,
        "eval": _run_eval,
        "analyze": _run_analyze,
        "map": _run_map,
    }
    for name in config["stages"]:
        try:
            report.stages.append(runners[name](config, workdir))
        except StageFailure:
            raise
        except (VibmapError, FileNotFoundError, OSError, ValueError) as exc:
            raise StageFailure(name, exc) from exc
    (workdir / "report.json").write_text(json.dumps(report.to_dict(), indent=1))
    return report


def _feature_kinds(config: dict) -> list[str]:
    kinds = [MODALITY_KIND[config["modality"]]]
    if config["tko"]:
        kinds.append("tko")
    return kinds


def _make_plan(config: dict, fs):
    if config["split"] == "within":
        return within_user_folds(fs.ids, k=config["folds"], seed=config["seed"])
    pairs = [(int(s), sid) for s, sid in zip(fs.subjects, fs.ids)]
    return cross_user_folds(
        {s for s, _ in pairs},
        segments=pairs,
        group_size=config["group_size"],
        seed=config["seed"],
    )


def _net_cfg(config: dict, n_classes: int, use_aux: bool) -> NetworkConfig:
    channels = tuple(config["train"].get("block_channels", REFERENCE_CHANNELS))
    return NetworkConfig(
        input_shape=MODALITY_SHAPE[config["modality"]],
        n_classes=n_classes,
        block_channels=channels,
        use_aux=use_aux,
        seed=config["seed"],
    )


def _train_cfg(config: dict) -> TrainConfig:
    t = config["train"]
    return TrainConfig(
        lr=t.get("lr", 1e-3),
        batch_size=t.get("batch_size", 64),
        epochs=t.get("epochs", 30),
        seed=config["seed"],
    )


def _manifest_inputs(manifest_path: Path) -> list[Path]:
    files = [manifest_path]
    try:
        doc = json.loads(manifest_path.read_text())
        root = manifest_path.parent
        for sess in doc.get("sessions", []):
            for rel in sess.get("files", {}).values():
                path = root / rel
                if path.exists():
                    files.append(path)
    except (json.JSONDecodeError, UnicodeDecodeError):
        pass  # load_manifest will raise the canonical error
    return files


def _run_ingest(config: dict, workdir: Path) -> StageResult:
    out_dir = workdir / "ingest"
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = Path(config.get("manifest", ""))
    if not manifest_path.exists():
        from ..errors import MissingManifest

        raise StageFailure("ingest", MissingManifest(f"no manifest at {manifest_path}"))
    stage = _Stage("ingest", out_dir, {"manifest": str(manifest_path)},
                   _manifest_inputs(manifest_path))
    if (hit := stage.cached()) is not None:
        return hit
    index = write_segment_index(manifest_path, out_dir / "index.json")
    return stage.finish(
        [out_dir / "index.json"],
        {"sessions": len(index["sessions"]), "segments": len(index["segments"])},
    )


def _run_featurize(config: dict, workdir: Path) -> StageResult:
    out_dir = workdir / "features"
    out_dir.mkdir(parents=True, exist_ok=True)
    index_path = workdir / "ingest" / "index.json"
    kinds = _feature_kinds(config)
    stage = _Stage("featurize", out_dir, {"kinds": kinds}, [index_path])
    if (hit := stage.cached()) is not None:
        return hit
    index = load_segment_index(index_path)
    doc = featurize_index(index, kinds, out_dir)
    outputs = [out_dir / "features_index.json"]
    for entries in doc["kinds"].values():
        outputs.extend(out_dir / e["path"] for e in entries)
    counts = {k: len(v) for k, v in doc["kinds"].items()}
    return stage.finish(outputs, {"tensors": counts})


def _features_inputs(workdir: Path, kinds: list[str]) -> list[Path]:
    features_dir = workdir / "features"
    index_path = features_dir / "features_index.json"
    files = [index_path]
    if index_path.exists():
        doc = json.loads(index_path.read_text())
        for kind in kinds:
            files.extend(features_dir / e["path"] for e in doc["kinds"].get(kind, []))
    return files


def _run_train(config: dict, workdir: Path) -> StageResult:
    out_dir = workdir / "train"
    out_dir.mkdir(parents=True, exist_ok=True)
    kinds = _feature_kinds(config)
    slice_ = {
        "kinds": kinds,
        "split": config["split"],
        "folds": config["folds"],
        "group_size": config["group_size"],
        "seed": config["seed"],
        "train": config["train"],
    }
    stage = _Stage("train", out_dir, slice_, _features_inputs(workdir, kinds))
    if (hit := stage.cached()) is not None:
        return hit
    fs = load_feature_set(workdir / "features", kinds[0], with_aux=config["tko"])
    plan = _make_plan(config, fs)
    result = train(fs, plan, _net_cfg(config, fs.n_classes, config["tko"]),
                   _train_cfg(config))
    metrics = result.summary()
    save_checkpoint(out_dir / "model.vw", result.model, fs.label_names, metrics)
    (out_dir / "plan.json").write_text(plan.to_json())
    (out_dir / "metrics.json").write_text(json.dumps(_jsonable(metrics), indent=1))
    y_true = np.concatenate([t for t, _ in result.fold_predictions])
    y_pred = np.concatenate([p for _, p in result.fold_predictions])
    np.savez(out_dir / "predictions.npz", y_true=y_true, y_pred=y_pred,
             label_names=np.array(fs.label_names))
    outputs = [out_dir / n for n in ("model.vw", "plan.json", "metrics.json",
                                     "predictions.npz")]
    return stage.finish(outputs, metrics)


def _run_eval(config: dict, workdir: Path) -> StageResult:
    out_dir = workdir / "eval"
    out_dir.mkdir(parents=True, exist_ok=True)
    kinds = _feature_kinds(config)
    model_path = workdir / "train" / "model.vw"
    stage = _Stage("eval", out_dir, {"kinds": kinds},
                   [model_path] + _features_inputs(workdir, kinds))
    if (hit := stage.cached()) is not None:
        return hit
    net, label_names, _ = load_checkpoint(model_path)
    fs = load_feature_set(workdir / "features", kinds[0], with_aux=config["tko"],
                          label_names=label_names)
    metrics = evaluate(net, fs.X, fs.y, fs.aux, net.cfg.n_classes, label_names)
    doc = _jsonable(metrics.to_dict())
    (out_dir / "eval.json").write_text(json.dumps(doc, indent=1))
    return stage.finish(
        [out_dir / "eval.json"],
        {"macro_f1": metrics.macro_f1, "accuracy": metrics.accuracy},
    )


def _run_analyze(config: dict, workdir: Path) -> StageResult:
    out_dir = workdir / "analyze"
    out_dir.mkdir(parents=True, exist_ok=True)
    which = config["analyze"] or ["grain"]
    index_path = workdir / "ingest" / "index.json"
    stage = _Stage("analyze", out_dir, {"which": which}, [index_path])
    if (hit := stage.cached()) is not None:
        return hit
    index = load_segment_index(index_path)
    outputs: list[Path] = []
    metrics: dict = {}
    lines: list[str] = []
    if "grain" in which:
        segs = _grain_segments(index)
        doc = {}
        for variant in ("literal", "conventional"):
            doc[variant] = grain_regression(segs, variant=variant).to_dict()
        path = out_dir / "grain.json"
        path.write_text(json.dumps(_jsonable(doc), indent=1))
        outputs.append(path)
        metrics["grain_r_centroid"] = doc["literal"]["centroid_fit"]["r_value"]
        metrics["grain_r_bandwidth"] = doc["literal"]["bandwidth_fit"]["r_value"]
        lines.append(
            f"grain: R(centroid)={metrics['grain_r_centroid']:+.3f} "
            f"R(bandwidth)={metrics['grain_r_bandwidth']:+.3f} (literal variant)"
        )
    if "wetdry" in which:
        fs = load_wet_dry_features(workdir / "features", _feature_kinds(config)[0])
        m, extra = wet_dry_eval(fs, net_cfg=_net_cfg_joint(config, fs),
                                train_cfg=_train_cfg(config), seed=config["seed"])
        path = out_dir / "wetdry.json"
        path.write_text(json.dumps(_jsonable({**m.to_dict(), **extra}), indent=1))
        outputs.append(path)
        metrics["wetdry_f1"] = m.macro_f1
        lines.append(f"wetdry: macro-F1={m.macro_f1:.3f} over {fs.n_classes} classes")
    if "noise" in which:
        net, label_names, train_metrics = load_checkpoint(workdir / "train" / "model.vw")
        fs = load_feature_set(workdir / "features", _feature_kinds(config)[0])
        keep = [i for i, e in enumerate(fs.meta) if e["condition"] == "Noisy"]
        if not keep:
            raise StageFailure("analyze", "no Noisy-condition segments in the features")
        from ..dsp.features import FeatureSet

        noisy = FeatureSet(
            ids=[fs.ids[i] for i in keep], X=fs.X[keep], y=fs.y[keep],
            subjects=fs.subjects[keep], label_names=fs.label_names,
            aux=fs.aux[keep] if fs.aux is not None else None,
            meta=[fs.meta[i] for i in keep],
        )
        m, summary = noise_eval(net, label_names, noisy,
                                clean_accuracy=train_metrics.get("mean_accuracy"))
        path = out_dir / "noise.json"
        path.write_text(json.dumps(_jsonable({**m.to_dict(), **summary}), indent=1))
        outputs.append(path)
        metrics["noise_accuracy"] = m.accuracy
        lines.append(f"noise: accuracy={m.accuracy:.3f}")
    if "merge" in which:
        doc = {}
        pred_path = workdir / "train" / "predictions.npz"
        if pred_path.exists():
            data = np.load(pred_path, allow_pickle=False)
            m = remap_predictions(data["y_true"], data["y_pred"],
                                  [str(n) for n in data["label_names"]])
            doc["recomputed_from_stored_predictions"] = {
                "accuracy": m.accuracy, "macro_f1": m.macro_f1,
            }
        fs = load_feature_set(workdir / "features", _feature_kinds(config)[0],
                              with_aux=config["tko"])
        plan = _make_plan(config, fs)
        _, summary = merge_and_eval(fs, plan, net_cfg=_net_cfg(config, fs.n_classes,
                                                               config["tko"]),
                                    train_cfg=_train_cfg(config))
        doc["retrained"] = summary
        path = out_dir / "merge.json"
        path.write_text(json.dumps(_jsonable(doc), indent=1))
        outputs.append(path)
        metrics["merge_accuracy"] = summary["mean_accuracy"]
        lines.append(f"merge: accuracy={summary['mean_accuracy']:.3f} "
                     f"({summary['n_classes']} classes)")
    summary_path = out_dir / "summary.txt"
    summary_path.write_text("\n".join(lines) + "\n")
    outputs.append(summary_path)
    return stage.finish(outputs, metrics)


def _net_cfg_joint(config: dict, fs) -> NetworkConfig:
    channels = tuple(config["train"].get("block_channels", REFERENCE_CHANNELS))
    rows, cols = fs.X.shape[2], fs.X.shape[3]
    return NetworkConfig(input_shape=(1, rows, cols), n_classes=fs.n_classes,
                         block_channels=channels, use_aux=fs.aux is not None,
                         seed=config["seed"])


def _grain_segments(index: dict) -> dict[str, list[np.ndarray]]:
    root = Path(index["root"])
    out: dict[str, list[np.ndarray]] = {m: [] for m in GRAIN_MATERIALS}
    signals: dict[str, np.ndarray] = {}
    for entry in index["segments"]:
        if entry["sensor"] != "mic" or entry["material"] not in out:
            continue
        if entry["condition"] not in ("Dry", "Clean"):
            continue
        rel = entry["file"]
        if rel not in signals:
            raw = (root / rel).read_bytes()
            signals[rel] = high_pass(
                np.frombuffer(raw, dtype="<f4").astype(np.float64), entry["rate"]
            )
        lo = entry["start_index"]
        out[entry["material"]].append(signals[rel][lo : lo + entry["n_samples"]])
    return out


def _run_map(config: dict, workdir: Path) -> StageResult:
    out_dir = workdir / "map"
    out_dir.mkdir(parents=True, exist_ok=True)
    map_cfg = config["map"]
    store_dir = Path(map_cfg.get("store", workdir / "store"))
    logs = sorted(store_dir.glob("client_*.jsonl"))
    if not logs:
        raise StageFailure("map", f"no report logs under {store_dir}")
    stage = _Stage("map", out_dir,
                   {"smoothing_k": map_cfg.get("smoothing_k", 3),
                    "radius_m": map_cfg.get("radius_m", 5.0)},
                   logs)
    if (hit := stage.cached()) is not None:
        return hit
    store = ReportStore(store_dir)
    segments = []
    all_reports = []
    for cid in store.client_ids():
        reports = store.reports_for(cid)
        all_reports.extend(reports)
        segments.extend(fuse_trajectory(reports, map_cfg.get("smoothing_k", 3)))
    polygons = coverage_polygons(all_reports, map_cfg.get("radius_m", 5.0))
    doc = emit_geojson(segments, polygons)
    geo_path = out_dir / "map.geojson"
    geo_path.write_text(dumps_geojson(doc))
    html_path = render_html(doc, out_dir / "map.html")
    return stage.finish(
        [geo_path, html_path],
        {"clients": len(store.client_ids()), "features": len(doc["features"])},
    )
