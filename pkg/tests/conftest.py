"""Shared test fixtures: a tiny synthetic dataset reused across modules."""

from __future__ import annotations

import numpy as np
import pytest

from vibmap.dsp.features import featurize_index
from vibmap.harness.fixtures import FixtureSpec, make_fixtures
from vibmap.ingest.index import write_segment_index

TINY_MATERIALS = ("carpet", "sand", "tile", "wood")


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """2 subjects x 4 materials x 8 s: enough for ingest/feature plumbing."""
    root = tmp_path_factory.mktemp("tiny")
    spec = FixtureSpec(
        n_subjects=2, materials=TINY_MATERIALS, seconds_per_session=8.0, seed=7
    )
    manifest_path = make_fixtures(root, spec)
    index = write_segment_index(manifest_path, root / "index.json")
    return {"root": root, "manifest": manifest_path, "index": index,
            "index_path": root / "index.json"}


@pytest.fixture(scope="session")
def tiny_features(tiny_dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny_features")
    featurize_index(tiny_dataset["index"], ("mic_mel", "acc_stft", "acc_mel", "tko", "fused"), out)
    return out


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
