"""Per-segment feature extraction over a validated segment index.

Feature kinds:

* ``mic_mel``  - 64x61 decibel Mel spectrogram of a 1 s microphone segment
* ``acc_stft`` - 26x263 linear-magnitude STFT of a 2 s accelerometer segment
* ``acc_mel``  - 64x41 decibel Mel spectrogram of a 2 s accelerometer segment
* ``tko``      - 1x3200 smoothed gait-energy vector of the same segment
* ``fused``    - 64x102 splice of the decibel Mel pair (MIC frames first)

Material features are computed from the 20 Hz high-passed signal; the
gait-energy path uses the 20 Hz low-pass complement. Each fused sample
pairs a 2 s accelerometer segment with the 1 s microphone segment that
starts at the same instant, so fused/tko entries share the accelerometer
segment id and can be joined by id downstream.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ShapeMismatch
from ..ingest.sensors import SensorKind
from .filters import high_pass, low_pass
from .fusion import FeatureTensor, Layout, fuse
from .spectrogram import acc_mel, mic_mel, power_to_db, stft_mag
from .tensorio import write_tensor

FEATURE_KINDS = ("mic_mel", "acc_stft", "acc_mel", "tko", "fused")

FEATURES_INDEX = "features_index.json"


def _mic_mel_tensor(x: np.ndarray) -> FeatureTensor:
    return FeatureTensor(power_to_db(mic_mel(x).values), Layout.MIC_MEL)


def _acc_mel_tensor(x: np.ndarray) -> FeatureTensor:
    return FeatureTensor(power_to_db(acc_mel(x).values), Layout.ACC_MEL)


def _acc_stft_tensor(x: np.ndarray) -> FeatureTensor:
    return FeatureTensor(stft_mag(x, 1600.0).values, Layout.ACC_STFT)


def _tko_tensor(x: np.ndarray) -> FeatureTensor:
    from .tko import tko_vector

    vec = tko_vector(x, ts=1.0 / 1600.0)
    return FeatureTensor(vec.phi_smooth.reshape(1, -1), Layout.TKO)


def _session_key(entry: dict) -> tuple:
    return (entry["subject_id"], entry["material"], entry["condition"], entry["plate"])


def featurize_index(index: dict, kinds, out_dir: str | Path) -> dict:
    """Compute the requested feature kinds for every segment in the index.

    Writes one binary tensor per (kind, segment) under ``out_dir/<kind>/``
    plus a ``features_index.json`` manifest, and returns that manifest.
    """
    kinds = tuple(kinds)
    for kind in kinds:
        if kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {kind!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    root = Path(index["root"])

    sessions: dict[tuple, dict] = {}
    for sess in index["sessions"]:
        sessions[_session_key(sess)] = {"session": sess, "segments": {}}
    for entry in index["segments"]:
        sess = sessions[_session_key(entry)]
        sess["segments"].setdefault(entry["sensor"], []).append(entry)

    need_mic = any(k in kinds for k in ("mic_mel", "fused"))
    need_acc_hp = any(k in kinds for k in ("acc_stft", "acc_mel", "fused"))
    need_acc_lp = "tko" in kinds

    manifest: dict[str, list] = {k: [] for k in kinds}
    for key in sorted(sessions):
        sess = sessions[key]["session"]
        segs = sessions[key]["segments"]

        def _load(sensor: SensorKind) -> np.ndarray:
            raw = (root / sess["files"][sensor.value]).read_bytes()
            return np.frombuffer(raw, dtype="<f4").astype(np.float64)

        mic_hp = None
        if need_mic:
            mic_hp = high_pass(_load(SensorKind.MIC), 48000.0)

        if "mic_mel" in kinds:
            for entry in segs.get("mic", []):
                x = mic_hp[entry["start_index"] : entry["start_index"] + entry["n_samples"]]
                _emit(manifest, out_dir, "mic_mel", entry, _mic_mel_tensor(x))

        for sensor in (SensorKind.ACC_FOREFOOT, SensorKind.ACC_REARFOOT):
            entries = segs.get(sensor.value, [])
            if not entries:
                continue
            acc_hp = acc_lp = None
            if need_acc_hp:
                acc_hp = high_pass(_load(sensor), 1600.0)
            if need_acc_lp:
                acc_lp = low_pass(_load(sensor), 1600.0)
            for entry in entries:
                lo = entry["start_index"]
                hi = lo + entry["n_samples"]
                if "acc_stft" in kinds:
                    _emit(manifest, out_dir, "acc_stft", entry, _acc_stft_tensor(acc_hp[lo:hi]))
                if "acc_mel" in kinds:
                    _emit(manifest, out_dir, "acc_mel", entry, _acc_mel_tensor(acc_hp[lo:hi]))
                if "tko" in kinds:
                    _emit(manifest, out_dir, "tko", entry, _tko_tensor(acc_lp[lo:hi]))
                if "fused" in kinds:
                    mic_lo = round(lo * 48000 / entry["rate"])
                    if mic_hp is None or mic_lo + 48000 > mic_hp.size:
                        continue
                    fused = fuse(
                        _mic_mel_tensor(mic_hp[mic_lo : mic_lo + 48000]),
                        _acc_mel_tensor(acc_hp[lo:hi]),
                    )
                    _emit(manifest, out_dir, "fused", entry, fused)

    doc = {"kinds": manifest}
    (out_dir / FEATURES_INDEX).write_text(json.dumps(doc, indent=1, sort_keys=True))
    return doc


def _emit(manifest: dict, out_dir: Path, kind: str, entry: dict, tensor: FeatureTensor) -> None:
    rel = f"{kind}/{entry['id']}.vwt"
    write_tensor(out_dir / rel, tensor)
    manifest[kind].append(
        {
            "id": entry["id"],
            "subject_id": entry["subject_id"],
            "material": entry["material"],
            "condition": entry["condition"],
            "plate": entry["plate"],
            "sensor": entry["sensor"],
            "path": rel,
        }
    )


class FeatureSet:
    """In-memory bundle of one feature kind (plus optional aux vectors)."""

    def __init__(self, ids, X, y, subjects, label_names, aux=None, meta=None):
        self.ids = list(ids)
        self.X = X                        # (N, 1, rows, cols) float32
        self.y = y                        # (N,) int64
        self.subjects = subjects          # (N,) int64
        self.label_names = list(label_names)
        self.aux = aux                    # (N, 3200) float32 or None
        self.meta = meta or []            # per-row entry dicts

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def n_classes(self) -> int:
        return len(self.label_names)

    def row_of(self, segment_id: str) -> int:
        return self.ids.index(segment_id)


def load_feature_set(
    features_dir: str | Path,
    kind: str,
    with_aux: bool = False,
    label_fn=None,
    label_names=None,
) -> FeatureSet:
    """Load every tensor of one kind into memory as a training-ready array.

    ``label_fn`` maps an index entry to its class-name string (default:
    the material). When ``with_aux`` is set, the matching ``tko`` vectors
    are joined by segment id; entries without one are dropped.
    """
    from .tensorio import read_tensor

    features_dir = Path(features_dir)
    doc = json.loads((features_dir / FEATURES_INDEX).read_text())
    entries = doc["kinds"].get(kind)
    if entries is None:
        raise ShapeMismatch(f"feature kind {kind!r} not present in {features_dir}")
    if label_fn is None:
        label_fn = lambda e: e["material"]  # noqa: E731

    aux_by_id = {}
    if with_aux:
        for e in doc["kinds"].get("tko", []):
            aux_by_id[e["id"]] = e["path"]
        entries = [e for e in entries if e["id"] in aux_by_id]

    labels = [label_fn(e) for e in entries]
    if label_names is None:
        label_names = sorted(set(labels))
    name_to_id = {n: i for i, n in enumerate(label_names)}

    X, y, subjects, ids, aux = [], [], [], [], []
    for e, label in zip(entries, labels):
        tensor = read_tensor(features_dir / e["path"])
        X.append(tensor.values.astype(np.float32)[None, :, :])
        y.append(name_to_id[label])
        subjects.append(e["subject_id"])
        ids.append(e["id"])
        if with_aux:
            aux.append(
                read_tensor(features_dir / aux_by_id[e["id"]]).values.astype(np.float32).ravel()
            )
    return FeatureSet(
        ids=ids,
        X=np.stack(X) if X else np.zeros((0, 1, 1, 1), np.float32),
        y=np.asarray(y, dtype=np.int64),
        subjects=np.asarray(subjects, dtype=np.int64),
        label_names=label_names,
        aux=np.stack(aux) if aux else None,
        meta=entries,
    )
