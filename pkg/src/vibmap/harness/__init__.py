"""End-to-end orchestration and synthetic fixture generation."""

from .fixtures import FixtureSpec, make_fixtures, material_signature, synth_session
from .pipeline import (
    CONFIG_SCHEMA,
    ExperimentReport,
    StageResult,
    run,
    validate_config,
)

__all__ = [
    "CONFIG_SCHEMA",
    "ExperimentReport",
    "FixtureSpec",
    "StageResult",
    "make_fixtures",
    "material_signature",
    "run",
    "synth_session",
    "validate_config",
]
