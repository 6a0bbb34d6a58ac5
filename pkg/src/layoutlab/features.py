"""Embedding-space statistics: Gaussian fits, Fréchet distance, feature providers.

Feature populations are stored as float32 rows (the on-disk dtype) while
all statistics run in float64. Providers abstract away where embedding
vectors come from; two self-contained ones ship with the package so the
metrics are usable without any pretrained network.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layout import KIND_ORDER, Layout
from .raster import (
    SOBEL_MAGNITUDE_MAX,
    Raster,
    mask_layout_regions,
    sobel_gradient_magnitude,
)

DEFAULT_FRECHET_EPS = 1e-6
DEFAULT_DOWNSAMPLE_RESOLUTION = 8
GRADIENT_HISTOGRAM_BINS = 16

PROVIDER_DOWNSAMPLE = "builtin-downsample"
PROVIDER_GRADIENT_HISTOGRAM = "builtin-gradient-histogram"
PROVIDER_EXTERNAL_FILE = "external-file"


class ProviderError(RuntimeError):
    """A feature provider could not produce features."""


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """A population of fixed-dimension feature vectors, one per row."""

    rows: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.rows)
        if arr.ndim != 2:
            raise ValueError(f"feature rows must be 2-D (n, d), got shape {arr.shape}")
        if arr.shape[1] < 1:
            raise ValueError("feature dimension must be at least 1")
        arr = arr.astype(np.float32)
        if not np.isfinite(arr).all():
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "rows", arr)

    @property
    def count(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True, eq=False)
class GaussianStats:
    """Sample mean and covariance of a feature population."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.ndim != 1:
            raise ValueError("mean must be 1-D")
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise ValueError(f"cov must be {d}x{d}, got {cov.shape}")
        if not (np.isfinite(mean).all() and np.isfinite(cov).all()):
            raise ValueError("stats must be finite")
        if np.abs(cov - cov.T).max() > 1e-10:
            raise ValueError("covariance must be symmetric within 1e-10")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class FeatureProviderSpec:
    """Which embedding to use: a builtin extractor or an external feature file."""

    kind: str
    resolution: int = DEFAULT_DOWNSAMPLE_RESOLUTION
    bins: int = GRADIENT_HISTOGRAM_BINS
    path: str | None = None

    def __post_init__(self) -> None:
        valid = (PROVIDER_DOWNSAMPLE, PROVIDER_GRADIENT_HISTOGRAM, PROVIDER_EXTERNAL_FILE)
        if self.kind not in valid:
            raise ValueError(f"unknown provider kind {self.kind!r}")
        if self.kind == PROVIDER_DOWNSAMPLE and self.resolution < 1:
            raise ValueError("downsample resolution must be >= 1")
        if self.kind == PROVIDER_GRADIENT_HISTOGRAM and self.bins < 1:
            raise ValueError("histogram bins must be >= 1")
        if self.kind == PROVIDER_EXTERNAL_FILE and not self.path:
            raise ValueError("external-file provider needs a path")

    @classmethod
    def parse(cls, token: str) -> "FeatureProviderSpec":
        """Parse CLI notation: downsample[:R], gradhist, or file:PATH."""
        if token == "gradhist":
            return cls(PROVIDER_GRADIENT_HISTOGRAM)
        if token == "downsample":
            return cls(PROVIDER_DOWNSAMPLE)
        if token.startswith("downsample:"):
            return cls(PROVIDER_DOWNSAMPLE, resolution=int(token.split(":", 1)[1]))
        if token.startswith("file:"):
            return cls(PROVIDER_EXTERNAL_FILE, path=token.split(":", 1)[1])
        raise ValueError(
            f"unknown provider {token!r} (expected downsample[:R], gradhist, or file:PATH)"
        )

    def describe(self) -> str:
        if self.kind == PROVIDER_DOWNSAMPLE:
            return f"downsample:{self.resolution}"
        if self.kind == PROVIDER_GRADIENT_HISTOGRAM:
            return "gradhist"
        return f"file:{self.path}"


def fit_gaussian(fs: FeatureSet) -> GaussianStats:
    """Sample mean and unbiased (n-1) covariance, symmetrized."""
    if fs.count < 2:
        raise ValueError(f"need at least 2 rows to fit a Gaussian, got {fs.count}")
    x = fs.rows.astype(np.float64)
    mean = x.mean(axis=0)
    dev = x - mean
    cov = dev.T @ dev / (x.shape[0] - 1)
    cov = (cov + cov.T) / 2.0
    return GaussianStats(mean, cov)


def psd_sqrt(m: np.ndarray, sym_tol: float = 1e-8) -> np.ndarray:
    """Symmetric square root via eigendecomposition, negative eigenvalues clipped."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.T).max() > sym_tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    sym = (m + m.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    vals = np.clip(vals, 0.0, None)
    root = (vecs * np.sqrt(vals)) @ vecs.T
    return (root + root.T) / 2.0


def frechet_distance(
    a: GaussianStats, b: GaussianStats, eps: float = DEFAULT_FRECHET_EPS
) -> float:
    """Fréchet distance between two Gaussians.

    ||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa Sb)^{1/2}) with eps added to both
    covariance diagonals first. The cross term is evaluated through the
    symmetric product sqrt(Sa)^{1/2} Sb sqrt(Sa)^{1/2}, whose trace equals
    Tr((Sa Sb)^{1/2}), so only PSD square roots are ever taken.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if eps < 0.0:
        raise ValueError("eps must be non-negative")
    d = a.dim
    sa = a.cov + eps * np.eye(d)
    sb = b.cov + eps * np.eye(d)
    root_a = psd_sqrt(sa)
    cross = psd_sqrt(root_a @ sb @ root_a)
    diff = a.mean - b.mean
    value = float(diff @ diff + np.trace(sa) + np.trace(sb) - 2.0 * np.trace(cross))
    return max(0.0, value)


def fid_pipeline(
    real: FeatureSet, generated: FeatureSet, eps: float = DEFAULT_FRECHET_EPS
) -> float:
    """Fit Gaussians to both populations and return their Fréchet distance."""
    if real.dim != generated.dim:
        raise ValueError(f"dimension mismatch: {real.dim} vs {generated.dim}")
    return frechet_distance(fit_gaussian(real), fit_gaussian(generated), eps=eps)


def _area_average_matrix(src: int, dst: int) -> np.ndarray:
    """(dst, src) weights averaging src pixels into dst equal-width cells."""
    m = np.zeros((dst, src), dtype=np.float64)
    cell = src / dst
    for o in range(dst):
        lo = o * cell
        hi = (o + 1) * cell
        p0 = int(np.floor(lo))
        p1 = int(np.ceil(hi))
        for p in range(p0, min(p1, src)):
            overlap = min(hi, p + 1) - max(lo, p)
            if overlap > 0:
                m[o, p] = overlap / cell
    return m


def builtin_provider_features(img: Raster, spec: FeatureProviderSpec) -> np.ndarray:
    """Compute a single feature vector with one of the builtin providers."""
    gray = img.luma()
    if spec.kind == PROVIDER_DOWNSAMPLE:
        r = spec.resolution
        rows = _area_average_matrix(gray.shape[0], r)
        cols = _area_average_matrix(gray.shape[1], r)
        return (rows @ gray @ cols.T).reshape(-1)
    if spec.kind == PROVIDER_GRADIENT_HISTOGRAM:
        mag = sobel_gradient_magnitude(img).data
        ghist, _ = np.histogram(mag, bins=spec.bins, range=(0.0, SOBEL_MAGNITUDE_MAX))
        ihist, _ = np.histogram(gray, bins=spec.bins, range=(0.0, 1.0))
        ghist = ghist.astype(np.float64) / max(1, mag.size)
        ihist = ihist.astype(np.float64) / max(1, gray.size)
        return np.concatenate([ghist, ihist])
    raise ProviderError(
        f"provider {spec.describe()!r} cannot compute features from a raster"
    )


def saliency_occlusion(
    sal: Raster, layout: Layout, provider: FeatureProviderSpec
) -> float:
    """L2 feature distance between a saliency map and its layout-masked copy."""
    if sal.channels != 1:
        raise ValueError("saliency map must be single-channel")
    try:
        before = builtin_provider_features(sal, provider)
        after = builtin_provider_features(mask_layout_regions(sal, layout), provider)
    except ProviderError:
        raise
    except Exception as exc:  # pragma: no cover - defensive wrap
        raise ProviderError(f"provider {provider.describe()!r} failed: {exc}") from exc
    return float(np.linalg.norm(before - after))


def layout_feature_vector(layout: Layout) -> np.ndarray:
    """Fixed 20-dim geometric summary: per kind, count and mean box stats.

    For each of the four kinds, in canonical order: element count, then the
    means of x, y, w, h over that kind's boxes (zeros when the kind is
    absent). Intended as the default feature for distribution-level layout
    comparison; external feature files can substitute richer embeddings.
    """
    parts: list[float] = []
    for kind in KIND_ORDER:
        boxes = [e.box for e in layout.of_kind(kind)]
        if boxes:
            n = len(boxes)
            parts.extend(
                [
                    float(n),
                    sum(b.x for b in boxes) / n,
                    sum(b.y for b in boxes) / n,
                    sum(b.w for b in boxes) / n,
                    sum(b.h for b in boxes) / n,
                ]
            )
        else:
            parts.extend([0.0] * 5)
    return np.array(parts, dtype=np.float64)


def layout_feature_set(layouts: list[Layout]) -> FeatureSet:
    """Stack layout feature vectors into a FeatureSet."""
    if not layouts:
        raise ValueError("need at least one layout")
    return FeatureSet(np.stack([layout_feature_vector(l) for l in layouts]))
