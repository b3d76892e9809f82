"""Page-object classes: eight table-related classes and their rotated variants."""
from __future__ import annotations

BASE_CLASSES = (
    "table",
    "table column",
    "table row",
    "table column header",
    "table spanning cell",
    "table projected row header",
    "table caption",
    "table footer",
)
ROTATED_SUFFIX = " rotated"
CLASS_NAMES = BASE_CLASSES + tuple(name + ROTATED_SUFFIX for name in BASE_CLASSES)
CLASS_INDEX = {name: i for i, name in enumerate(CLASS_NAMES)}


def canonical_class(name: str) -> str | None:
    """Canonical spelling of ``name``, or ``None`` if it is not in the taxonomy."""
    key = " ".join(name.strip().lower().replace("_", " ").split())
    return key if key in CLASS_INDEX else None


def is_rotated(name: str) -> bool:
    return name.endswith(ROTATED_SUFFIX)


def base_class(name: str) -> str:
    return name[: -len(ROTATED_SUFFIX)] if is_rotated(name) else name


def is_table(name: str) -> bool:
    """True for the parent class of the hierarchy (``table`` or ``table rotated``)."""
    return base_class(name) == "table"
