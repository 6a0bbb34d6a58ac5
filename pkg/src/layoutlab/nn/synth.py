"""Procedural clean/inpainted image pairs for the domain-adaptation demo.

Clean images combine a random linear gradient with a handful of soft
elliptical blobs. Source-domain images take a clean image and overwrite
one or more rectangles with mean-fill or heavy-blur content, keeping the
exact binary mask of replaced pixels, which mimics how inpainting erases
local texture.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..raster import gaussian_blur_2d

MEAN_FILL = "mean-fill"
BLUR_FILL = "blur-fill"


@dataclass(frozen=True)
class SyntheticDomainConfig:
    image_hw: tuple[int, int] = (32, 32)
    seed: int = 0
    rect_count: tuple[int, int] = (1, 2)  # inclusive range per source image
    rect_size: tuple[int, int] = (16, 26)  # inclusive side-length range, pixels
    inpaint_mode: str = MEAN_FILL
    blur_sigma: float = 3.0
    shapes_per_image: tuple[int, int] = (3, 7)  # large structural blobs
    texture_shapes: tuple[int, int] = (120, 200)  # dense speckle texture
    n_source: int = 256
    n_target: int = 256
    n_eval: int = 64

    def __post_init__(self) -> None:
        h, w = self.image_hw
        if h < 8 or w < 8:
            raise ValueError("images must be at least 8x8")
        if self.inpaint_mode not in (MEAN_FILL, BLUR_FILL):
            raise ValueError(f"unknown inpaint mode {self.inpaint_mode!r}")
        lo, hi = self.rect_count
        if not 0 <= lo <= hi:
            raise ValueError("bad rect_count range")
        slo, shi = self.rect_size
        if not 1 <= slo <= shi <= min(h, w):
            raise ValueError("rect_size must fit inside the image")


@dataclass(eq=False)
class SynthData:
    """Training and held-out splits. Source images come in clean/inpainted
    pairs sharing content; target images are clean only."""

    source_clean: np.ndarray  # (Ns, 3, H, W)
    source_inpainted: np.ndarray  # (Ns, 3, H, W)
    source_mask: np.ndarray  # (Ns, H, W), values 0/1
    target: np.ndarray  # (Nt, 3, H, W)
    eval_clean: np.ndarray
    eval_inpainted: np.ndarray
    eval_mask: np.ndarray

    @property
    def image_hw(self) -> tuple[int, int]:
        return self.source_clean.shape[2], self.source_clean.shape[3]


def _clean_image(rng: np.random.Generator, cfg: SyntheticDomainConfig) -> np.ndarray:
    h, w = cfg.image_hw
    grid_y, grid_x = np.mgrid[0:h, 0:w].astype(np.float64)
    img = np.empty((3, h, w), dtype=np.float64)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    ramp = np.cos(angle) * grid_x / max(w - 1, 1) + np.sin(angle) * grid_y / max(h - 1, 1)
    for c in range(3):
        img[c] = 0.5 + rng.uniform(-0.15, 0.15) * ramp
    n_shapes = int(rng.integers(cfg.shapes_per_image[0], cfg.shapes_per_image[1] + 1))
    for _ in range(n_shapes):
        cy = rng.uniform(0.0, h - 1)
        cx = rng.uniform(0.0, w - 1)
        ry = rng.uniform(1.5, h / 3.0)
        rx = rng.uniform(1.5, w / 3.0)
        sharp = rng.uniform(1.0, 3.0)
        d2 = ((grid_y - cy) / ry) ** 2 + ((grid_x - cx) / rx) ** 2
        blob = np.exp(-(d2**sharp))
        color = rng.uniform(-0.2, 0.2, size=3)
        img += color[:, None, None] * blob[None]
    # dense small blobs: the fine-grained texture that inpainting erases
    n_texture = int(rng.integers(cfg.texture_shapes[0], cfg.texture_shapes[1] + 1))
    for _ in range(n_texture):
        cy = rng.uniform(0.0, h - 1)
        cx = rng.uniform(0.0, w - 1)
        r = rng.uniform(0.8, 2.0)
        d2 = ((grid_y - cy) / r) ** 2 + ((grid_x - cx) / r) ** 2
        color = rng.uniform(-0.45, 0.45, size=3)
        img += color[:, None, None] * np.exp(-d2)[None]
    # affine rescale instead of clipping: saturation would flatten clean
    # patches into exactly the texture-free look that marks inpainting
    lo = img.min()
    hi = img.max()
    return 0.02 + 0.96 * (img - lo) / max(hi - lo, 1e-9)


def _inpaint(
    rng: np.random.Generator, clean: np.ndarray, cfg: SyntheticDomainConfig
) -> tuple[np.ndarray, np.ndarray]:
    h, w = cfg.image_hw
    img = clean.copy()
    mask = np.zeros((h, w), dtype=np.float64)
    n_rects = int(rng.integers(cfg.rect_count[0], cfg.rect_count[1] + 1))
    if n_rects and cfg.inpaint_mode == BLUR_FILL:
        blurred = np.stack(
            [gaussian_blur_2d(clean[c], cfg.blur_sigma) for c in range(3)]
        )
    for _ in range(n_rects):
        rh = int(rng.integers(cfg.rect_size[0], cfg.rect_size[1] + 1))
        rw = int(rng.integers(cfg.rect_size[0], cfg.rect_size[1] + 1))
        y0 = int(rng.integers(0, h - rh + 1))
        x0 = int(rng.integers(0, w - rw + 1))
        mask[y0 : y0 + rh, x0 : x0 + rw] = 1.0
        if cfg.inpaint_mode == MEAN_FILL:
            # fill with the region mean of the pristine image, per channel
            region = clean[:, y0 : y0 + rh, x0 : x0 + rw]
            img[:, y0 : y0 + rh, x0 : x0 + rw] = region.mean(axis=(1, 2))[
                :, None, None
            ]
        else:
            img[:, y0 : y0 + rh, x0 : x0 + rw] = blurred[
                :, y0 : y0 + rh, x0 : x0 + rw
            ]
    return img, mask


def synth_dataset(cfg: SyntheticDomainConfig) -> SynthData:
    """Generate the full dataset deterministically from the config seed."""
    rng = np.random.default_rng(cfg.seed)

    def source_batch(n: int):
        clean = np.empty((n, 3, *cfg.image_hw), dtype=np.float64)
        inp = np.empty_like(clean)
        mask = np.empty((n, *cfg.image_hw), dtype=np.float64)
        for i in range(n):
            clean[i] = _clean_image(rng, cfg)
            inp[i], mask[i] = _inpaint(rng, clean[i], cfg)
        return clean, inp, mask

    src_clean, src_inp, src_mask = source_batch(cfg.n_source)
    target = np.stack([_clean_image(rng, cfg) for _ in range(cfg.n_target)]) if cfg.n_target else np.empty((0, 3, *cfg.image_hw))
    ev_clean, ev_inp, ev_mask = source_batch(cfg.n_eval)
    return SynthData(
        source_clean=src_clean,
        source_inpainted=src_inp,
        source_mask=src_mask,
        target=target,
        eval_clean=ev_clean,
        eval_inpainted=ev_inp,
        eval_mask=ev_mask,
    )
