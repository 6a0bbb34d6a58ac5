"""Core data model: element kinds, normalized bounding boxes, layouts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

MAX_ELEMENTS = 32

# Slack on the right/bottom edge so pixel-derived boxes that land on 1.0
# plus rounding noise still validate.
COORD_TOL = 1e-6


class ElementKind(Enum):
    """The four element categories a poster layout may contain."""

    LOGO = "logo"
    TEXT = "text"
    UNDERLAY = "underlay"
    EMBELLISHMENT = "embellishment"

    @classmethod
    def from_string(cls, name: str) -> "ElementKind":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(
                f"unknown element kind {name!r} (expected one of: {valid})"
            ) from None

    def __str__(self) -> str:
        return self.value


#: Canonical kind order used for class indices and feature vectors.
KIND_ORDER: tuple[ElementKind, ...] = tuple(ElementKind)


class Domain(Enum):
    """Side of the clean/inpainted divide a sample or map belongs to."""

    SOURCE = "source"
    TARGET = "target"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box, top-left corner plus size, normalized to [0, 1].

    Degenerate boxes (zero width or height) are legal; metric code decides
    how to treat them.
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise TypeError(f"BBox.{name} must be a number, got {type(v).__name__}")
            if not math.isfinite(v):
                raise ValueError(f"BBox.{name} must be finite, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.w < 0.0 or self.h < 0.0:
            raise ValueError(f"BBox has negative size: w={self.w}, h={self.h}")
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise ValueError(f"BBox corner outside unit square: x={self.x}, y={self.y}")
        if self.x + self.w > 1.0 + COORD_TOL or self.y + self.h > 1.0 + COORD_TOL:
            raise ValueError(
                f"BBox extends past the unit square: "
                f"x+w={self.x + self.w}, y+h={self.y + self.h}"
            )

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def cx(self) -> float:
        return self.x + self.w / 2.0

    @property
    def cy(self) -> float:
        return self.y + self.h / 2.0


@dataclass(frozen=True)
class Element:
    """One layout element: a kind plus its box."""

    kind: ElementKind
    box: BBox

    def __post_init__(self) -> None:
        if not isinstance(self.kind, ElementKind):
            raise TypeError(f"Element.kind must be ElementKind, got {self.kind!r}")
        if not isinstance(self.box, BBox):
            raise TypeError(f"Element.box must be BBox, got {self.box!r}")


@dataclass(frozen=True)
class Layout:
    """An ordered collection of elements; order never affects metric values."""

    elements: tuple[Element, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        if len(self.elements) > MAX_ELEMENTS:
            raise ValueError(
                f"layout has {len(self.elements)} elements, maximum is {MAX_ELEMENTS}"
            )
        for e in self.elements:
            if not isinstance(e, Element):
                raise TypeError(f"layout entries must be Element, got {e!r}")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def is_empty(self) -> bool:
        return not self.elements

    def of_kind(self, *kinds: ElementKind) -> tuple[Element, ...]:
        """Elements whose kind is one of `kinds`, in layout order."""
        wanted = set(kinds)
        return tuple(e for e in self.elements if e.kind in wanted)

    def boxes(self) -> tuple[BBox, ...]:
        return tuple(e.box for e in self.elements)


def element(kind: ElementKind | str, x: float, y: float, w: float, h: float) -> Element:
    """Shorthand constructor used heavily in tests and fixtures."""
    if isinstance(kind, str):
        kind = ElementKind.from_string(kind)
    return Element(kind, BBox(x, y, w, h))
