"""Recording ingest: manifests, decoding, segmentation, evaluation splits."""

from .index import build_segment_index, load_segment_index, write_segment_index
from .manifest import (
    DatasetManifest,
    Recording,
    Session,
    decode_recording,
    load_manifest,
    write_sample_file,
)
from .segmentation import Segment, balance_report, segment, segment_count
from .sensors import (
    ACC_RATE,
    ACC_SEGMENT_SAMPLES,
    MIC_RATE,
    MIC_SEGMENT_SAMPLES,
    SensorKind,
)
from .splits import Fold, SplitMode, SplitPlan, cross_user_folds, within_user_folds

__all__ = [
    "ACC_RATE",
    "ACC_SEGMENT_SAMPLES",
    "MIC_RATE",
    "MIC_SEGMENT_SAMPLES",
    "DatasetManifest",
    "Fold",
    "Recording",
    "Segment",
    "Session",
    "SensorKind",
    "SplitMode",
    "SplitPlan",
    "balance_report",
    "build_segment_index",
    "cross_user_folds",
    "decode_recording",
    "load_manifest",
    "load_segment_index",
    "segment",
    "segment_count",
    "within_user_folds",
    "write_sample_file",
    "write_segment_index",
]
