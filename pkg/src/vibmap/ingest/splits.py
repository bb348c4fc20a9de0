"""Reproducible evaluation splits: segment-level k-fold and subject-group holdout."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import TooFewSegments, TooFewSubjects


class SplitMode(str, Enum):
    WITHIN_USER = "WithinUser"
    CROSS_USER = "CrossUser"


@dataclass
class Fold:
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


@dataclass
class SplitPlan:
    mode: SplitMode
    folds: list[Fold]
    seed: int

    def to_json(self) -> str:
        """Deterministic serialization; identical inputs yield identical bytes."""
        doc = {
            "mode": self.mode.value,
            "seed": self.seed,
            "folds": [
                {"train": sorted(f.train_ids), "test": sorted(f.test_ids)}
                for f in self.folds
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "SplitPlan":
        doc = json.loads(text)
        return cls(
            mode=SplitMode(doc["mode"]),
            seed=int(doc["seed"]),
            folds=[
                Fold(tuple(f["train"]), tuple(f["test"])) for f in doc["folds"]
            ],
        )


def _segment_ids(segments) -> list[str]:
    return [s if isinstance(s, str) else s.segment_id for s in segments]


def within_user_folds(segments, k: int, seed: int = 0) -> SplitPlan:
    """Random segment-level k-fold split; fold sizes differ by at most one.

    Every segment appears in exactly one test fold; deterministic given seed.
    """
    ids = _segment_ids(segments)
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(ids) < k:
        raise TooFewSegments(f"{len(ids)} segments for k={k}")
    order = sorted(ids)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(order))
    shuffled = [order[i] for i in perm]
    chunks = np.array_split(np.arange(len(shuffled)), k)
    folds = []
    for chunk in chunks:
        test = tuple(shuffled[i] for i in chunk)
        test_set = set(test)
        train = tuple(s for s in shuffled if s not in test_set)
        folds.append(Fold(train_ids=train, test_ids=test))
    return SplitPlan(mode=SplitMode.WITHIN_USER, folds=folds, seed=seed)


def cross_user_folds(
    subject_ids,
    segments=None,
    group_size: int = 3,
    seed: int = 0,
) -> SplitPlan:
    """Subject-group holdout folds with no subject leakage.

    Subjects are randomly partitioned into floor(n/group_size) groups, the
    remainder spread one-per-group (31 subjects at group size 3 give nine
    groups of three plus one of four). Each fold tests one group. When
    ``segments`` is given the fold id sets hold segment ids, otherwise
    stringified subject ids.
    """
    subjects = sorted({int(s) for s in subject_ids})
    if len(subjects) < 2:
        raise TooFewSubjects(f"need at least 2 subjects, got {len(subjects)}")
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    n_groups = len(subjects) // group_size
    if n_groups < 2:
        raise TooFewSubjects(
            f"{len(subjects)} subjects at group size {group_size} "
            f"yield {n_groups} fold(s); need >= 2"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(subjects))
    shuffled = [subjects[i] for i in perm]
    sizes = [group_size] * n_groups
    for i in range(len(subjects) - group_size * n_groups):
        sizes[i % n_groups] += 1
    groups: list[list[int]] = []
    pos = 0
    for size in sizes:
        groups.append(shuffled[pos : pos + size])
        pos += size

    by_subject: dict[int, list[str]] = {}
    if segments is not None:
        for seg in segments:
            sid = seg.subject_id if hasattr(seg, "subject_id") else int(seg[0])
            key = seg.segment_id if hasattr(seg, "segment_id") else str(seg[1])
            by_subject.setdefault(int(sid), []).append(key)

    def members(subject_list: list[int]) -> tuple[str, ...]:
        if segments is None:
            return tuple(str(s) for s in sorted(subject_list))
        out: list[str] = []
        for s in sorted(subject_list):
            out.extend(by_subject.get(s, []))
        return tuple(out)

    folds = []
    for g in groups:
        test_subjects = set(g)
        train_subjects = [s for s in subjects if s not in test_subjects]
        folds.append(Fold(train_ids=members(train_subjects), test_ids=members(g)))
    return SplitPlan(mode=SplitMode.CROSS_USER, folds=folds, seed=seed)
