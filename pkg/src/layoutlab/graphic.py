"""Content-agnostic layout metrics: overlap, underlay coverage, alignment, occupancy.

All scores are pure functions of a layout's geometry. Overlap and underlay
coverage are directed-ratio metrics (intersection over the area of the box
named first); alignment measures how close each element is to sharing an
edge or midline with some other element.
"""

from __future__ import annotations

import warnings

from .layout import BBox, Element, ElementKind, Layout

_OVERLAP_GROUPS: tuple[tuple[ElementKind, ...], ...] = (
    (ElementKind.LOGO, ElementKind.TEXT),
    (ElementKind.EMBELLISHMENT,),
)

_UNDERLAY_COVER_KINDS = (
    ElementKind.LOGO,
    ElementKind.TEXT,
    ElementKind.EMBELLISHMENT,
)


def bbox_area(b: BBox) -> float:
    """Area of a normalized box."""
    return b.w * b.h


def bbox_intersection_area(a: BBox, b: BBox) -> float:
    """Area of the axis-aligned intersection, 0 when disjoint."""
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def _warn_zero_area(context: str) -> None:
    warnings.warn(
        f"zero-area box skipped in {context} (cannot divide by its area)",
        UserWarning,
        stacklevel=3,
    )


def overlap_degree(layout: Layout) -> float:
    """Directed pairwise overlap among logo/text boxes plus among embellishments.

    For each group, every ordered pair (i, j), i != j, contributes
    intersection(i, j) / area(i). Zero-area boxes are skipped as the
    denominator box with a warning.
    """
    total = 0.0
    for group in _OVERLAP_GROUPS:
        boxes = [e.box for e in layout.of_kind(*group)]
        for i, bi in enumerate(boxes):
            ai = bbox_area(bi)
            if ai == 0.0:
                _warn_zero_area("overlap_degree")
                continue
            for j, bj in enumerate(boxes):
                if i == j:
                    continue
                total += bbox_intersection_area(bi, bj) / ai
    return total


def underlay_coverage(layout: Layout) -> float | None:
    """Mean, over underlays, of the best coverage ratio by another element type.

    Each underlay scores max over logo/text/embellishment boxes of
    intersection / underlay area. Returns None when the layout has no
    underlay (the metric is undefined, not zero).
    """
    underlays = layout.of_kind(ElementKind.UNDERLAY)
    if not underlays:
        return None
    others = [e.box for e in layout.of_kind(*_UNDERLAY_COVER_KINDS)]
    ratios: list[float] = []
    for u in underlays:
        area = bbox_area(u.box)
        if area == 0.0:
            _warn_zero_area("underlay_coverage")
            continue
        best = 0.0
        for b in others:
            best = max(best, bbox_intersection_area(u.box, b) / area)
        ratios.append(best)
    if not ratios:
        return None
    return sum(ratios) / len(ratios)


def _edge_coords(b: BBox) -> tuple[float, float, float, float, float, float]:
    # left, x-center, right, top, y-center, bottom
    return (b.x, b.cx, b.x2, b.y, b.cy, b.y2)


def alignment_distance(layout: Layout) -> float:
    """Mean, over elements, of the nearest edge/midline distance to any other element.

    Six candidate coordinates are compared per element (left, horizontal
    center, right, top, vertical center, bottom), each against the same
    coordinate of every other element; the per-element score is the minimum
    of the six nearest distances. Layouts with fewer than two elements
    score 0 (nothing to misalign against).
    """
    n = len(layout)
    if n < 2:
        return 0.0
    coords = [_edge_coords(e.box) for e in layout]
    total = 0.0
    for i in range(n):
        best = float("inf")
        for axis in range(6):
            ci = coords[i][axis]
            for j in range(n):
                if j == i:
                    continue
                d = abs(ci - coords[j][axis])
                if d < best:
                    best = d
        total += best
    return total / n


def occupancy_ratio(layouts: list[Layout]) -> float:
    """Fraction of layouts that contain at least one element."""
    if not layouts:
        raise ValueError("occupancy_ratio needs at least one layout")
    return sum(1 for lay in layouts if len(lay) >= 1) / len(layouts)
