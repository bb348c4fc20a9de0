"""Canonical ground-material taxonomy.

18 materials in 5 categories (Ornament, Grain, Floor, Paving, Stroma);
13 are indoor surfaces, 5 outdoor. Granular materials carry a nominal
particle diameter in meters used by the grain-size analysis.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import UnknownMaterial


class Category(str, Enum):
    ORNAMENT = "Ornament"
    GRAIN = "Grain"
    FLOOR = "Floor"
    PAVING = "Paving"
    STROMA = "Stroma"


class Condition(str, Enum):
    DRY = "Dry"
    WET = "Wet"
    NOISY = "Noisy"
    CLEAN = "Clean"


@dataclass(frozen=True)
class Material:
    name: str
    category: Category
    indoor: bool
    grain_diameter_m: float | None = None  # granular materials only


# Order is canonical: it fixes label ids, fixture signatures and map colors.
MATERIALS: tuple[Material, ...] = (
    Material("carpet", Category.ORNAMENT, indoor=True),
    Material("carpet-red", Category.ORNAMENT, indoor=True),
    Material("carpet-color", Category.ORNAMENT, indoor=True),
    Material("mat", Category.ORNAMENT, indoor=True),
    Material("sand", Category.GRAIN, indoor=True, grain_diameter_m=0.0005),
    Material("gravel-small", Category.GRAIN, indoor=True, grain_diameter_m=0.005),
    Material("gravel-mid", Category.GRAIN, indoor=True, grain_diameter_m=0.013),
    Material("gravel-large", Category.GRAIN, indoor=True, grain_diameter_m=0.03),
    Material("tile", Category.FLOOR, indoor=True),
    Material("plastic", Category.FLOOR, indoor=True),
    Material("wood", Category.FLOOR, indoor=True),
    Material("rubber", Category.FLOOR, indoor=True),
    Material("soil", Category.STROMA, indoor=True),
    Material("asphalt", Category.PAVING, indoor=False),
    Material("concrete", Category.PAVING, indoor=False),
    Material("slab", Category.PAVING, indoor=False),
    Material("brick", Category.PAVING, indoor=False),
    Material("grass", Category.STROMA, indoor=False),
)

MATERIAL_NAMES: tuple[str, ...] = tuple(m.name for m in MATERIALS)
_BY_NAME = {m.name: m for m in MATERIALS}

# "stone-<size>" is an alias spelling of the gravel materials.
_ALIASES = {
    "stone-small": "gravel-small",
    "stone-middle": "gravel-mid",
    "stone-mid": "gravel-mid",
    "stone-large": "gravel-large",
}

GRAIN_MATERIALS: tuple[str, ...] = tuple(
    m.name for m in MATERIALS if m.category is Category.GRAIN
)

# Materials measured in both dry and wet conditions.
WET_DRY_MATERIALS: tuple[str, ...] = (
    "soil", "rubber", "sand", "gravel-mid", "wood", "carpet",
)

# ACC signals poorly separate these three; merging them is a supported eval.
HARD_TO_SEPARATE: tuple[str, ...] = ("asphalt", "slab", "concrete")


def get_material(name: str) -> Material:
    """Resolve a material by canonical name or alias; raises UnknownMaterial."""
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    try:
        return _BY_NAME[key]
    except KeyError:
        raise UnknownMaterial(name) from None


def material_index(name: str) -> int:
    return MATERIAL_NAMES.index(get_material(name).name)


def indoor_materials() -> tuple[str, ...]:
    return tuple(m.name for m in MATERIALS if m.indoor)


def outdoor_materials() -> tuple[str, ...]:
    return tuple(m.name for m in MATERIALS if not m.indoor)
