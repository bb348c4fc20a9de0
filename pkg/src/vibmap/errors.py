"""Exception hierarchy shared across the toolkit.

Every operation-level failure raises one of these so callers can catch
``VibmapError`` at pipeline boundaries and still discriminate causes.
"""

from __future__ import annotations


class VibmapError(Exception):
    """Base class for all toolkit errors."""


# --- ingest ---------------------------------------------------------------

class MissingManifest(VibmapError):
    pass


class UnknownMaterial(VibmapError):
    def __init__(self, name: str):
        super().__init__(f"unknown material name: {name!r}")
        self.name = name


class DuplicateSession(VibmapError):
    def __init__(self, subject_id: int, material: str, condition: str, plate: bool):
        super().__init__(
            f"duplicate session: subject={subject_id} material={material!r} "
            f"condition={condition} plate={plate}"
        )
        self.subject_id = subject_id
        self.material = material
        self.condition = condition
        self.plate = plate


class RateMismatch(VibmapError):
    pass


class CorruptPayload(VibmapError):
    pass


class TooShort(VibmapError):
    pass


class TooFewSegments(VibmapError):
    pass


class TooFewSubjects(VibmapError):
    pass


# --- dsp ------------------------------------------------------------------

class InvalidCutoff(VibmapError):
    pass


class ZeroPower(VibmapError):
    pass


class ShapeMismatch(VibmapError):
    pass


# --- model ----------------------------------------------------------------

class BadShape(VibmapError):
    pass


class NonFiniteActivation(VibmapError):
    pass


class Divergence(VibmapError):
    pass


class EmptyTestSet(VibmapError):
    pass


class GradMismatch(VibmapError):
    def __init__(self, message: str, failures: list | None = None):
        super().__init__(message)
        self.failures = failures or []


# --- analysis ---------------------------------------------------------------

class InsufficientData(VibmapError):
    pass


class MissingCondition(VibmapError):
    pass


class ModelModalityMismatch(VibmapError):
    pass


class UnknownLabel(VibmapError):
    pass


# --- mapping ----------------------------------------------------------------

class MalformedReport(VibmapError):
    pass


class OutOfRangeCoordinate(VibmapError):
    pass


class EmptyInput(VibmapError):
    pass


class EmptyDocument(VibmapError):
    pass


# --- harness ----------------------------------------------------------------

class ConfigInvalid(VibmapError):
    pass


class BadSpec(VibmapError):
    pass


class StageFailure(VibmapError):
    def __init__(self, stage: str, cause: BaseException | str):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
