"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`. Property suites always
run; the two dataset-gated targets run only when VIBMAP_DATASET_DIR
points at a dataset in the canonical manifest layout.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import shutil
import threading
import time

import numpy as np
import pytest
import torch

import vibmap.dsp as dsp
from vibmap.analysis.grain import fit_line, grain_regression
from vibmap.analysis.merge import remap_predictions
from vibmap.dsp.features import featurize_index, load_feature_set
from vibmap.dsp.spectral import PowerSpectrum, spectral_centroid
from vibmap.harness.fixtures import FixtureSpec, make_fixtures
from vibmap.ingest.index import write_segment_index
from vibmap.ingest.splits import cross_user_folds, within_user_folds
from vibmap.mapping.geojson import dumps_geojson
from vibmap.mapping.reports import GroundReport, ReportStore
from vibmap.mapping.server import build_map_document
from vibmap.mapping.trajectory import fuse_trajectory, smooth_labels
from vibmap.materials import MATERIAL_NAMES, get_material
from vibmap.model.gradcheck import grad_check
from vibmap.model.network import NetworkConfig, build_network
from vibmap.model.training import TrainConfig, metrics_from_predictions, train, train_fold

E2E_MATERIALS = ("carpet", "sand", "tile", "asphalt", "gravel-large", "wood")
NARROW = (8, 16, 32, 64, 128)

DATASET_DIR = os.environ.get("VIBMAP_DATASET_DIR", "")
needs_dataset = pytest.mark.skipif(
    not DATASET_DIR, reason="set VIBMAP_DATASET_DIR to run dataset-gated targets"
)


def _report_line(name: str, t0: float, detail: str = "") -> None:
    extra = f" {detail}" if detail else ""
    print(f"\nACCEPTANCE {name}: PASS ({time.monotonic() - t0:.1f}s){extra}")


@pytest.fixture(scope="module")
def e2e_dataset(tmp_path_factory):
    """3 subjects x 6 materials x 60 s, MIC features precomputed."""
    root = tmp_path_factory.mktemp("acceptance")
    manifest = make_fixtures(
        root,
        FixtureSpec(n_subjects=3, materials=E2E_MATERIALS,
                    seconds_per_session=60.0, seed=0),
    )
    index = write_segment_index(manifest, root / "index.json")
    features = root / "features"
    featurize_index(index, ("mic_mel",), features)
    return features


# --- C01 / C02: gait-energy operator ------------------------------------------

def _numba_oracles():
    import numba

    @numba.njit(cache=False)
    def tko_loop(x, ts):
        n = x.size
        out = np.empty(n)
        for i in range(n):
            im2 = i - 2 if i - 2 >= 0 else 0
            im1 = i - 1 if i - 1 >= 0 else 0
            ip1 = i + 1 if i + 1 < n else n - 1
            ip2 = i + 2 if i + 2 < n else n - 1
            out[i] = (
                2.0 * x[i] * x[i]
                + (x[ip1] - x[im1]) ** 2
                - x[i] * (x[ip2] + x[im2])
            ) / (4.0 * ts * ts)
        return out

    @numba.njit(cache=False)
    def smooth_loop(phi):
        n = phi.size
        out = np.empty(n)
        for i in range(n):
            acc = 0.0
            for j in range(i - 2, i + 3):
                jm = j - 1 if j - 1 >= 0 else 0
                if jm > n - 1:
                    jm = n - 1
                jj = j if j >= 0 else 0
                if jj > n - 1:
                    jj = n - 1
                jp = j + 1 if j + 1 <= n - 1 else n - 1
                if jp < 0:
                    jp = 0
                m = phi[jm]
                if phi[jj] > m:
                    m = phi[jj]
                if phi[jp] > m:
                    m = phi[jp]
                acc += m
            out[i] = acc / 5.0
        return out

    return tko_loop, smooth_loop


def _rel_err(a, b):
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-30)
    return np.abs(a - b) / scale


def test_c01_tko_oracle_equivalence_1000_segments():
    t0 = time.monotonic()
    tko_loop, smooth_loop = _numba_oracles()
    ts = 1.0 / 1600.0
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        x = rng.normal(size=3200)
        phi = dsp.tko(x, ts)
        worst = max(worst, float(_rel_err(phi, tko_loop(x, ts)).max()))
        smooth = dsp.tko_smooth(phi)
        worst = max(worst, float(_rel_err(smooth, smooth_loop(phi)).max()))
    elapsed = time.monotonic() - t0
    assert worst <= 1e-9, f"worst relative error {worst:.2e}"
    assert elapsed < 10.0, f"runtime {elapsed:.1f}s exceeds 10 s"
    _report_line("C01 tko-oracle-equivalence", t0, f"worst rel err {worst:.1e}")


def test_c02_tko_analytic_cases():
    t0 = time.monotonic()
    assert np.allclose(dsp.tko(np.full(3200, 2.25), ts=1.0), 0.0, atol=1e-12)
    x = np.zeros(3200)
    x[1600] = 1.0
    phi = dsp.tko(x, ts=1.0)
    np.testing.assert_allclose(phi[1599:1602], [0.25, 0.5, 0.25], rtol=0, atol=0)
    rng = np.random.default_rng(7)
    base_x = rng.normal(size=3200)
    base = dsp.tko(base_x, ts=1.0)
    for alpha in rng.uniform(-5, 5, size=100):
        np.testing.assert_allclose(dsp.tko(alpha * base_x, ts=1.0),
                                   alpha**2 * base, rtol=1e-9, atol=1e-12)
    _report_line("C02 tko-analytic-cases", t0)


# --- C03: feature shapes --------------------------------------------------------

def test_c03_feature_shape_conformance():
    t0 = time.monotonic()
    rng = np.random.default_rng(1)
    mic_seg = rng.normal(size=48000)
    acc_seg = rng.normal(size=3200)
    mic = dsp.mic_mel(mic_seg)
    acc = dsp.acc_mel(acc_seg)
    assert mic.values.shape == (64, 61)
    assert acc.values.shape == (64, 41)
    assert dsp.stft_mag(acc_seg, 1600.0).values.shape == (26, 263)
    fused = dsp.fuse(
        dsp.FeatureTensor(dsp.power_to_db(mic.values), dsp.Layout.MIC_MEL),
        dsp.FeatureTensor(dsp.power_to_db(acc.values), dsp.Layout.ACC_MEL),
    )
    assert fused.values.shape == (64, 102)
    _report_line("C03 feature-shape-conformance", t0,
                 "64x61 / 64x41 / 26x263 / 64x102")


# --- C04: gradient check --------------------------------------------------------

def test_c04_gradient_check_two_block_aux():
    t0 = time.monotonic()
    torch.manual_seed(0)
    net = build_network(
        NetworkConfig((1, 16, 16), 4, block_channels=(6, 12), use_aux=True, seed=0)
    )
    net.train()
    x = torch.randn(1, 1, 16, 16)
    aux = torch.randn(1, 3200)
    y = torch.tensor([1])

    def loss_fn(m, x, aux, y):
        return torch.nn.functional.cross_entropy(m(x, aux), y)

    report = grad_check(net, loss_fn, (x, aux, y), n_params=200, tolerance=1e-3)
    elapsed = time.monotonic() - t0
    assert report.ok
    assert report.n_checked >= 200
    assert report.max_rel_err < 1e-3
    assert elapsed < 120.0, f"runtime {elapsed:.1f}s exceeds 2 min"
    _report_line("C04 gradient-check", t0,
                 f"max rel err {report.max_rel_err:.1e} over {report.n_checked} params")


# --- C05: overfit sanity --------------------------------------------------------

def test_c05_overfit_sanity_100_segments(e2e_dataset):
    t0 = time.monotonic()
    old_threads = torch.get_num_threads()
    torch.set_num_threads(1)  # one CPU core budget
    try:
        fs = load_feature_set(e2e_dataset, "mic_mel")
        rng = np.random.default_rng(0)
        rows = []
        for c in range(fs.n_classes):
            cls_rows = np.flatnonzero(fs.y == c)
            take = 17 if c < 4 else 16
            rows.extend(rng.choice(cls_rows, size=take, replace=False))
        rows = np.array(rows)
        assert len(rows) == 100
        cfg = NetworkConfig((1, 64, 61), fs.n_classes, block_channels=NARROW, seed=0)
        _, history = train_fold(
            cfg, fs.X[rows], fs.y[rows], None,
            TrainConfig(epochs=200, batch_size=64, seed=0,
                        target_train_accuracy=0.99),
        )
    finally:
        torch.set_num_threads(old_threads)
    elapsed = time.monotonic() - t0
    assert history["train_accuracy"][-1] >= 0.99
    assert len(history["loss"]) <= 200
    assert elapsed < 300.0, f"runtime {elapsed:.1f}s exceeds 5 min"
    _report_line("C05 overfit-sanity", t0,
                 f"{history['train_accuracy'][-1]:.3f} at epoch {len(history['loss'])}")


# --- C06: fixture end-to-end ----------------------------------------------------

def test_c06_fixture_end_to_end(e2e_dataset):
    t0 = time.monotonic()
    fs = load_feature_set(e2e_dataset, "mic_mel")
    cfg = NetworkConfig((1, 64, 61), fs.n_classes, block_channels=NARROW, seed=0)
    tc = TrainConfig(epochs=12, batch_size=64, seed=0, target_train_accuracy=1.0)

    within = train(fs, within_user_folds(fs.ids, k=3, seed=0), cfg, tc)
    pairs = [(int(s), sid) for s, sid in zip(fs.subjects, fs.ids)]
    cross = train(
        fs,
        cross_user_folds({s for s, _ in pairs}, segments=pairs, group_size=1, seed=0),
        cfg, tc,
    )
    elapsed = time.monotonic() - t0
    assert within.mean_f1 >= 0.95, f"within-user F1 {within.mean_f1:.3f}"
    assert cross.mean_f1 >= within.mean_f1 - 0.25, (
        f"cross-user F1 {cross.mean_f1:.3f} vs within {within.mean_f1:.3f}"
    )
    assert elapsed < 900.0, f"runtime {elapsed:.1f}s exceeds 15 min"
    _report_line("C06 fixture-end-to-end", t0,
                 f"within F1 {within.mean_f1:.3f}, cross F1 {cross.mean_f1:.3f}")


# --- C07: spectral features -----------------------------------------------------

def test_c07_spectral_feature_properties():
    t0 = time.monotonic()
    # delta PSD centroid
    c = spectral_centroid(PowerSpectrum(np.array([123.0]), np.array([4.0])))
    assert abs(c - math.log(123.0)) <= 1e-9
    # scale invariance
    rng = np.random.default_rng(5)
    freqs = np.linspace(5, 2000, 128)
    psd = rng.uniform(0.01, 1.0, size=128)
    base = spectral_centroid(PowerSpectrum(freqs, psd))
    for alpha in (1e-9, 0.123, 1.0, 4096.0):
        assert abs(spectral_centroid(PowerSpectrum(freqs, alpha * psd)) - base) <= 1e-9

    # exact linear construction in log-diameter: R = 1 within 1e-6
    diameters = np.array([get_material(m).grain_diameter_m
                          for m in ("sand", "gravel-small", "gravel-mid",
                                    "gravel-large")])
    a, b = 0.40, 7.0
    log_d, cents = [], []
    for d in diameters:
        f0 = math.exp(a * math.log(d) + b)
        for _ in range(50):
            cents.append(
                spectral_centroid(PowerSpectrum(np.array([f0]), np.array([2.0])))
            )
            log_d.append(math.log(d))
    fit = fit_line(np.array(log_d), np.array(cents))
    assert abs(fit.r_value - 1.0) <= 1e-6

    # shuffled pairing: |R| < 0.3 at the 95th percentile of 100 shuffles
    log_d = np.array(log_d)
    cents = np.array(cents)
    rs = []
    for _ in range(100):
        perm = rng.permutation(len(log_d))
        rs.append(abs(fit_line(log_d[perm], cents).r_value))
    p95 = float(np.percentile(rs, 95))
    assert p95 < 0.3, f"95th percentile |R| = {p95:.3f}"
    _report_line("C07 spectral-features", t0, f"R=1 exact, shuffled p95 {p95:.2f}")


# --- C08 / C09: dataset-gated targets -------------------------------------------

@needs_dataset
def test_c08_grain_regression_released_dataset(tmp_path):
    t0 = time.monotonic()
    from vibmap.dsp.filters import high_pass
    from vibmap.ingest.manifest import decode_recording, load_manifest
    from vibmap.ingest.segmentation import segment
    from vibmap.ingest.sensors import SensorKind

    manifest = load_manifest(DATASET_DIR)
    segments: dict[str, list[np.ndarray]] = {}
    for sess in manifest.sessions:
        material = sess.material
        if get_material(material).grain_diameter_m is None:
            continue
        if sess.condition.value not in ("Dry", "Clean"):
            continue
        rec = decode_recording(manifest, sess, SensorKind.MIC)
        filtered = high_pass(rec.samples, rec.rate)
        for seg in segment(rec):
            segments.setdefault(material, []).append(
                filtered[seg.start_index : seg.start_index + seg.samples.size]
            )
    results = {}
    for variant in ("literal", "conventional"):
        report = grain_regression(segments, variant=variant)
        results[variant] = (abs(report.centroid_fit.r_value),
                            abs(report.bandwidth_fit.r_value))
        print(f"\n  variant={variant}: |R| centroid {results[variant][0]:.3f}, "
              f"bandwidth {results[variant][1]:.3f}")
    best = max(results, key=lambda v: min(results[v]))
    elapsed = time.monotonic() - t0
    assert min(results[best]) >= 0.85, f"best variant {best}: {results[best]}"
    assert elapsed < 1800.0
    _report_line("C08 grain-regression-dataset", t0, f"best variant: {best}")


@needs_dataset
def test_c09_scaled_classification_released_dataset(tmp_path):
    t0 = time.monotonic()
    from vibmap.ingest.index import build_segment_index
    from vibmap.ingest.manifest import load_manifest
    from vibmap.materials import WET_DRY_MATERIALS

    manifest = load_manifest(DATASET_DIR)
    subjects = sorted({s.subject_id for s in manifest.sessions})[:5]
    keep = [
        s for s in manifest.sessions
        if s.subject_id in subjects and s.material in WET_DRY_MATERIALS
        and s.condition.value == "Dry"
    ]
    manifest.sessions = keep
    index = build_segment_index(manifest)
    features = tmp_path / "features"
    featurize_index(index, ("mic_mel",), features)
    fs = load_feature_set(features, "mic_mel")
    cfg = NetworkConfig((1, 64, 61), fs.n_classes, seed=0)  # reference widths
    res = train(fs, within_user_folds(fs.ids, k=3, seed=0), cfg,
                TrainConfig(epochs=12, batch_size=64, seed=0))
    elapsed = time.monotonic() - t0
    # scaled proxy of the full-dataset run, not a reproduction of 92.9%
    assert res.mean_f1 >= 0.80, f"scaled MIC within-user F1 {res.mean_f1:.3f}"
    assert elapsed < 7200.0
    _report_line("C09 scaled-classification-dataset", t0, f"F1 {res.mean_f1:.3f}")


# --- C10: merging property -------------------------------------------------------

def test_c10_merging_never_lowers_accuracy():
    t0 = time.monotonic()
    labels = list(MATERIAL_NAMES)
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(20, 500))
        y_true = rng.integers(0, 18, size=n)
        skew = rng.integers(0, 18, size=n)
        y_pred = np.where(rng.random(n) < 0.5, y_true, skew)  # mixed quality
        base = metrics_from_predictions(y_true, y_pred, 18).accuracy
        merged = remap_predictions(y_true, y_pred, labels).accuracy
        assert merged >= base
        # exact recomputation: merged correct count equals base correct count
        # plus predictions that land inside the merged group
        merge_ids = {labels.index(m) for m in ("asphalt", "slab", "concrete")}
        gained = sum(
            1 for yt, yp in zip(y_true, y_pred)
            if yt != yp and yt in merge_ids and yp in merge_ids
        )
        base_correct = int(round(base * n))
        assert int(round(merged * n)) == base_correct + gained
    _report_line("C10 merging-property", t0, "200 random prediction sets")


# --- C11: mapping determinism ----------------------------------------------------

def test_c11_mapping_determinism(tmp_path):
    t0 = time.monotonic()
    store_dir = tmp_path / "store_a"
    store = ReportStore(store_dir)
    n = 1000
    labels = ["carpet", "sand", "tile", "asphalt"]

    def feed(client, lat0):
        rng = np.random.default_rng(hash(client) % (2**32))
        for seq in range(1, n + 1):
            store.submit(GroundReport(
                client_id=client, seq=seq, timestamp_ms=seq * 500,
                lat=lat0 + seq * 2e-6, lon=113.97 + seq * 2e-6,
                label=labels[(seq // 25) % 4], confidence=0.9,
            ))

    threads = [threading.Thread(target=feed, args=(c, lat))
               for c, lat in (("walker-1", 22.590), ("walker-2", 22.592))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for client in ("walker-1", "walker-2"):
        seqs = [r.seq for r in store.reports_for(client)]
        assert seqs == list(range(1, n + 1)), f"{client} log incomplete/unordered"

    # two server instances fed identical logs -> byte-identical geojson
    store_dir_b = tmp_path / "store_b"
    shutil.copytree(store_dir, store_dir_b)
    doc_a = build_map_document(ReportStore(store_dir), smoothing_k=3, radius_m=5.0)
    doc_b = build_map_document(ReportStore(store_dir_b), smoothing_k=3, radius_m=5.0)
    bytes_a = dumps_geojson(doc_a).encode()
    bytes_b = dumps_geojson(doc_b).encode()
    assert bytes_a == bytes_b

    import jsonschema

    from .test_mapping import GEOJSON_SCHEMA

    jsonschema.validate(json.loads(bytes_a), json.loads(GEOJSON_SCHEMA))
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0, f"runtime {elapsed:.1f}s exceeds 1 min"
    _report_line("C11 mapping-determinism", t0,
                 f"{len(doc_a['features'])} features, byte-identical")


# --- C12: smoothing oracle --------------------------------------------------------

def test_c12_smoothing_oracle():
    t0 = time.monotonic()
    rng = np.random.default_rng(11)
    alphabet = ["carpet", "sand", "tile", "wood", "grass"]

    def rle(labels):
        return [lab for lab, _ in itertools.groupby(labels)]

    def majority_oracle(labels, k):
        out = []
        half = (k - 1) // 2
        for i in range(len(labels)):
            window = labels[max(0, i - half): min(len(labels), i + (k - half))]
            counts = {}
            for lab in window:
                counts[lab] = counts.get(lab, 0) + 1
            best = max(counts.values())
            winners = [lab for lab, cnt in counts.items() if cnt == best]
            out.append(winners[0] if len(winners) == 1
                       else (out[-1] if out else labels[i]))
        return out

    def reports_for(labels):
        return [GroundReport("c", i + 1, i, 22.59 + i * 1e-6, 113.97, lab, 1.0)
                for i, lab in enumerate(labels)]

    for _ in range(500):
        labels = [alphabet[i] for i in rng.integers(0, 5, size=rng.integers(1, 60))]
        segs = fuse_trajectory(reports_for(labels), smoothing_k=1)
        assert [s.label for s in segs] == rle(labels)
        assert smooth_labels(labels, 3) == majority_oracle(labels, 3)
    _report_line("C12 smoothing-oracle", t0, "500 random label sequences")
