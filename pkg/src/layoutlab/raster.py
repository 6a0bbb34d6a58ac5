"""Image-grid primitives and the pixel-based content-aware metrics.

Rasters are numpy arrays wrapped in a thin validated container: shape
(H, W) for single-channel data, (H, W, 3) for RGB, float64 throughout.
Box rasterization uses conservative floor/ceil pixel cover so that boxes
aligned to a 1/N grid rasterize exactly on an N-pixel image.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .graphic import bbox_area, bbox_intersection_area
from .layout import BBox, ElementKind, Layout

# ITU-R 601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114])

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T

#: Largest Sobel magnitude reachable on a [0, 1] image (|Gx| and |Gy| max out at 4).
SOBEL_MAGNITUDE_MAX = 4.0 * math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class Raster:
    """A single- or three-channel image grid with finite float64 values."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            pass
        elif arr.ndim == 3 and arr.shape[2] == 3:
            pass
        else:
            raise ValueError(
                f"raster must have shape (H, W) or (H, W, 3), got {arr.shape}"
            )
        if arr.size == 0:
            raise ValueError("raster must not be empty")
        if not np.isfinite(arr).all():
            raise ValueError("raster values must be finite")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else 3

    def luma(self) -> np.ndarray:
        """Single-channel view: identity for gray, ITU-R 601 weights for RGB."""
        if self.data.ndim == 2:
            return self.data
        return self.data @ _LUMA


def box_pixel_bounds(b: BBox, width: int, height: int) -> tuple[int, int, int, int]:
    """Conservative pixel cover of a normalized box: (x0, x1, y0, y1), half-open."""
    x0 = max(0, math.floor(b.x * width))
    x1 = min(width, math.ceil((b.x + b.w) * width))
    y0 = max(0, math.floor(b.y * height))
    y1 = min(height, math.ceil((b.y + b.h) * height))
    return x0, x1, y0, y1


def make_white_patch_map(layout: Layout, width: int, height: int) -> np.ndarray:
    """Binary (H, W) map: 1 inside any element box, 0 elsewhere."""
    if width <= 0 or height <= 0:
        raise ValueError(f"map dimensions must be positive, got {width}x{height}")
    out = np.zeros((height, width), dtype=np.float64)
    for e in layout:
        x0, x1, y0, y1 = box_pixel_bounds(e.box, width, height)
        out[y0:y1, x0:x1] = 1.0
    return out


def mask_layout_regions(sal: Raster, layout: Layout) -> Raster:
    """Copy of a single-channel raster with pixels under any element box zeroed."""
    if sal.channels != 1:
        raise ValueError("mask_layout_regions expects a single-channel raster")
    data = sal.data.copy()
    for e in layout:
        x0, x1, y0, y1 = box_pixel_bounds(e.box, sal.width, sal.height)
        data[y0:y1, x0:x1] = 0.0
    return Raster(data)


def _conv3x3_replicate(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    padded = np.pad(img, 1, mode="edge")
    out = np.zeros_like(img)
    h, w = img.shape
    for di in range(3):
        for dj in range(3):
            out += kernel[di, dj] * padded[di : di + h, dj : dj + w]
    return out


def sobel_gradient_magnitude(img: Raster) -> Raster:
    """Per-pixel L2 norm of the 3x3 Sobel gradient, edges replicated.

    RGB input is converted to luma first. Values are the raw kernel
    responses (no normalization), so magnitudes can exceed 1.
    """
    gray = img.luma()
    gx = _conv3x3_replicate(gray, _SOBEL_X)
    gy = _conv3x3_replicate(gray, _SOBEL_Y)
    return Raster(np.hypot(gx, gy))


def _gaussian_kernel_1d(sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs**2) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur_2d(channel: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur of one (H, W) channel, edges replicated."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    k = _gaussian_kernel_1d(sigma)
    r = (len(k) - 1) // 2
    padded = np.pad(channel, ((0, 0), (r, r)), mode="edge")
    h, w = channel.shape
    horiz = np.zeros_like(channel)
    for t in range(len(k)):
        horiz += k[t] * padded[:, t : t + w]
    padded = np.pad(horiz, ((r, r), (0, 0)), mode="edge")
    out = np.zeros_like(channel)
    for t in range(len(k)):
        out += k[t] * padded[t : t + h, :]
    return out


def gaussian_blur(img: Raster, sigma: float) -> Raster:
    """Gaussian blur with kernel radius ceil(3*sigma), applied per channel."""
    if img.data.ndim == 2:
        return Raster(gaussian_blur_2d(img.data, sigma))
    chans = [gaussian_blur_2d(img.data[:, :, c], sigma) for c in range(3)]
    return Raster(np.stack(chans, axis=2))


def _is_underlay_backed(text_box: BBox, layout: Layout, threshold: float) -> bool:
    area = bbox_area(text_box)
    if area == 0.0:
        return False
    for u in layout.of_kind(ElementKind.UNDERLAY):
        if bbox_intersection_area(text_box, u.box) / area >= threshold:
            return True
    return False


def background_complexity(
    img: Raster, layout: Layout, underlay_cover_threshold: float = 0.5
) -> float | None:
    """Mean Sobel magnitude under text boxes that sit directly on the image.

    Text elements covered by an underlay (intersection at least
    `underlay_cover_threshold` of the text area) are excluded; the final
    score averages the per-element means. Returns None when no text
    element qualifies. The value lives on the [0, 1] intensity scale;
    reports multiply by 255.
    """
    if not 0.0 <= underlay_cover_threshold <= 1.0:
        raise ValueError("underlay_cover_threshold must lie in [0, 1]")
    texts = layout.of_kind(ElementKind.TEXT)
    if not texts:
        return None
    grad = None
    region_means: list[float] = []
    for t in texts:
        if _is_underlay_backed(t.box, layout, underlay_cover_threshold):
            continue
        if bbox_area(t.box) == 0.0:
            warnings.warn(
                "zero-area text box skipped in background_complexity", UserWarning
            )
            continue
        x0, x1, y0, y1 = box_pixel_bounds(t.box, img.width, img.height)
        if x1 <= x0 or y1 <= y0:
            continue
        if grad is None:
            grad = sobel_gradient_magnitude(img).data
        region_means.append(float(grad[y0:y1, x0:x1].mean()))
    if not region_means:
        return None
    return sum(region_means) / len(region_means)


def attention_occlusion(
    attn: Raster, layout: Layout, scale: float = 10.0
) -> float | None:
    """Scaled mean, over elements, of the attention mass inside each box.

    Mass is the sum of attention values under the box divided by the total
    attention mass of the map. Returns None for an empty layout; raises
    when the map carries no mass at all.
    """
    if attn.channels != 1:
        raise ValueError("attention map must be single-channel")
    if (attn.data < 0.0).any():
        raise ValueError("attention values must be non-negative")
    if layout.is_empty:
        return None
    total = float(attn.data.sum())
    if total <= 0.0:
        raise ValueError("attention map has zero total mass; metric undefined")
    mass = 0.0
    for e in layout:
        x0, x1, y0, y1 = box_pixel_bounds(e.box, attn.width, attn.height)
        mass += float(attn.data[y0:y1, x0:x1].sum()) / total
    return scale * mass / len(layout)
