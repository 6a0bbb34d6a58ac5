"""Shared geometry oracles and layout generators for the tests.

The rasterization oracle derives box pixel sets from pixel-center
containment, independently of the analytic min/max interval algebra it is
used to check. On a 1/N grid both constructions are exact, so comparisons
can demand near-equality at 1e-9.
"""

from __future__ import annotations

import math

import numpy as np

from layoutlab.layout import BBox, Element, ElementKind, Layout

GRID = 64
KINDS = tuple(ElementKind)


def random_grid_layout(rng: np.random.Generator, max_elements: int = 8) -> Layout:
    """A layout whose boxes snap to the 1/GRID lattice; zero-area boxes allowed."""
    n = int(rng.integers(0, max_elements + 1))
    elements = []
    for _ in range(n):
        x = int(rng.integers(0, GRID + 1))
        y = int(rng.integers(0, GRID + 1))
        w = int(rng.integers(0, GRID - x + 1))
        h = int(rng.integers(0, GRID - y + 1))
        kind = KINDS[int(rng.integers(0, 4))]
        elements.append(Element(kind, BBox(x / GRID, y / GRID, w / GRID, h / GRID)))
    return Layout(tuple(elements))


def random_float_layout(rng: np.random.Generator, max_elements: int = 8) -> Layout:
    """A layout with arbitrary float boxes (never degenerate)."""
    n = int(rng.integers(1, max_elements + 1))
    elements = []
    for _ in range(n):
        x = float(rng.uniform(0.0, 0.9))
        y = float(rng.uniform(0.0, 0.9))
        w = float(rng.uniform(0.01, 1.0 - x))
        h = float(rng.uniform(0.01, 1.0 - y))
        kind = KINDS[int(rng.integers(0, 4))]
        elements.append(Element(kind, BBox(x, y, w, h)))
    return Layout(tuple(elements))


def pixel_mask(box: BBox, n: int = GRID) -> np.ndarray:
    """Pixel-center containment mask, the oracle's own rasterization."""
    centers = (np.arange(n) + 0.5) / n
    in_x = (centers >= box.x) & (centers < box.x + box.w)
    in_y = (centers >= box.y) & (centers < box.y + box.h)
    return in_y[:, None] & in_x[None, :]


def oracle_overlap(layout: Layout, n: int = GRID) -> float:
    """Pixel-count version of the directed overlap score."""
    total = 0.0
    for group in ((ElementKind.LOGO, ElementKind.TEXT), (ElementKind.EMBELLISHMENT,)):
        masks = [pixel_mask(e.box, n) for e in layout.of_kind(*group)]
        counts = [int(m.sum()) for m in masks]
        for i, mi in enumerate(masks):
            if counts[i] == 0:
                continue
            for j, mj in enumerate(masks):
                if i == j:
                    continue
                total += int((mi & mj).sum()) / counts[i]
    return total


def oracle_underlay(layout: Layout, n: int = GRID) -> float | None:
    """Pixel-count version of the underlay coverage score."""
    underlays = [pixel_mask(e.box, n) for e in layout.of_kind(ElementKind.UNDERLAY)]
    if not underlays:
        return None
    others = [
        pixel_mask(e.box, n)
        for e in layout.of_kind(
            ElementKind.LOGO, ElementKind.TEXT, ElementKind.EMBELLISHMENT
        )
    ]
    ratios = []
    for u in underlays:
        cu = int(u.sum())
        if cu == 0:
            continue
        best = 0.0
        for o in others:
            best = max(best, int((u & o).sum()) / cu)
        ratios.append(best)
    if not ratios:
        return None
    return sum(ratios) / len(ratios)


def oracle_alignment(layout: Layout) -> float:
    """Exhaustive scalar-loop version of the alignment score."""
    n = len(layout)
    if n < 2:
        return 0.0
    total = 0.0
    for i, ei in enumerate(layout.elements):
        b = ei.box
        candidates = []
        for axis, coord in enumerate(
            (b.x, b.x + b.w / 2, b.x + b.w, b.y, b.y + b.h / 2, b.y + b.h)
        ):
            for j, ej in enumerate(layout.elements):
                if j == i:
                    continue
                o = ej.box
                other = (o.x, o.x + o.w / 2, o.x + o.w, o.y, o.y + o.h / 2, o.y + o.h)[axis]
                candidates.append(math.fabs(coord - other))
        total += min(candidates)
    return total / n
