"""Discriminator and generator losses: pixel-map MAE terms, label smoothing,
GIoU, and the matched set-prediction reconstruction loss.

The pixel discriminator is trained with a mean absolute error between its
per-pixel output map and the (smoothed) white-patch ground truth, weighted
per domain. The generator's adversarial term replaces the source ground
truth with a constant low map so a fooled discriminator scores zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .layout import KIND_ORDER, BBox, Domain, Layout
from .matching import MatchResult, hungarian

#: Index of the "no element here" class in prediction probability rows.
NO_OBJECT = len(KIND_ORDER)

_PROB_CLAMP = 1e-7
DEFAULT_SET_LOSS_WEIGHTS = (1.0, 5.0, 2.0)  # class, box l1, giou
DEFAULT_NO_OBJECT_WEIGHT = 0.1


@dataclass(frozen=True)
class LossWeights:
    """Loss-balance constants; defaults follow the trained configuration."""

    alpha: float = 2.0  # source-domain MAE weight
    beta: float = 1.0  # target-domain MAE weight
    gamma: float = 6.0  # adversarial term weight in the generator loss
    smoothing_low: float = 0.2  # one-target label smoothing: 0 becomes this
    fake_source_target: float = 0.2  # constant map the generator tries to induce

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "smoothing_low", "fake_source_target"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"LossWeights.{name} must be finite and >= 0, got {v}")
        if not 0.0 <= self.smoothing_low < 0.5:
            raise ValueError("smoothing_low must lie in [0, 0.5)")


@dataclass(frozen=True, eq=False)
class PixelMapBatch:
    """Per-pixel maps with a domain tag each; all maps share one shape."""

    maps: tuple[np.ndarray, ...]
    domains: tuple[Domain, ...]

    def __post_init__(self) -> None:
        maps = tuple(np.asarray(m, dtype=np.float64) for m in self.maps)
        if len(maps) != len(self.domains):
            raise ValueError("one domain tag per map required")
        if maps:
            shape = maps[0].shape
            for m in maps:
                if m.shape != shape:
                    raise ValueError(f"map shape mismatch: {m.shape} vs {shape}")
                if not np.isfinite(m).all():
                    raise ValueError("map values must be finite")
        for d in self.domains:
            if not isinstance(d, Domain):
                raise TypeError(f"domain tags must be Domain, got {d!r}")
        object.__setattr__(self, "maps", maps)

    def domain_pixels(self, domain: Domain) -> np.ndarray:
        """All pixels of the given domain flattened into one vector."""
        sel = [m.reshape(-1) for m, d in zip(self.maps, self.domains) if d is domain]
        if not sel:
            return np.empty(0, dtype=np.float64)
        return np.concatenate(sel)


def smooth_one_target(wp_map: np.ndarray, low: float = 0.2) -> np.ndarray:
    """One-target label smoothing: 0 becomes `low`, 1 stays 1."""
    if not 0.0 <= low < 0.5:
        raise ValueError(f"low must lie in [0, 0.5), got {low}")
    arr = np.asarray(wp_map, dtype=np.float64)
    if not np.isin(arr, (0.0, 1.0)).all():
        raise ValueError("white-patch map must contain only 0 and 1")
    return np.where(arr == 0.0, low, 1.0)


def _check_aligned(preds: PixelMapBatch, targets: PixelMapBatch) -> None:
    if len(preds.maps) != len(targets.maps):
        raise ValueError(
            f"batch size mismatch: {len(preds.maps)} predictions, "
            f"{len(targets.maps)} targets"
        )
    if preds.domains != targets.domains:
        raise ValueError("prediction and target domain tags disagree")
    for p, t in zip(preds.maps, targets.maps):
        if p.shape != t.shape:
            raise ValueError(f"map shape mismatch: {p.shape} vs {t.shape}")


def _domain_mae(preds: PixelMapBatch, targets: PixelMapBatch, domain: Domain) -> float:
    p = preds.domain_pixels(domain)
    t = targets.domain_pixels(domain)
    if p.size == 0:
        return 0.0
    return float(np.abs(p - t).mean())


def pd_loss_terms(
    preds: PixelMapBatch, targets: PixelMapBatch
) -> tuple[float, float]:
    """Unweighted per-domain MAE terms (source, target) of the discriminator loss."""
    _check_aligned(preds, targets)
    return (
        _domain_mae(preds, targets, Domain.SOURCE),
        _domain_mae(preds, targets, Domain.TARGET),
    )


def pd_loss(preds: PixelMapBatch, targets: PixelMapBatch, w: LossWeights) -> float:
    """Discriminator loss: alpha * source MAE + beta * target MAE.

    Each MAE averages over every pixel of its domain subset; a domain with
    no maps contributes zero. Source targets are expected to be smoothed
    white-patch maps and target-domain targets the smoothed all-zero map.
    """
    src, tgt = pd_loss_terms(preds, targets)
    return w.alpha * src + w.beta * tgt


def pd_generator_loss(preds: PixelMapBatch, w: LossWeights) -> float:
    """Adversarial generator term: the discriminator should output the low
    constant everywhere, for both domains.

    The source ground truth is replaced by a constant map at
    `fake_source_target`; target-domain ground truth is the smoothed
    all-zero map, i.e. the same constant at the default settings.
    """
    src = preds.domain_pixels(Domain.SOURCE)
    tgt = preds.domain_pixels(Domain.TARGET)
    src_term = float(np.abs(src - w.fake_source_target).mean()) if src.size else 0.0
    tgt_term = float(np.abs(tgt - w.smoothing_low).mean()) if tgt.size else 0.0
    return w.alpha * src_term + w.beta * tgt_term


def total_generator_loss(rec: float, pd_gen: float, w: LossWeights) -> float:
    """Full generator objective: reconstruction plus gamma times the adversarial term."""
    if not (math.isfinite(rec) and math.isfinite(pd_gen)):
        raise ValueError("loss components must be finite")
    return rec + w.gamma * pd_gen


def giou(a: BBox, b: BBox) -> float:
    """Generalized IoU: IoU minus the hull area not covered by the union.

    Falls in [-1, 1]; returns 0 for the fully degenerate case of two
    zero-area boxes.
    """
    ax, ay = a.w * a.h, b.w * b.h
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    inter = iw * ih if (iw > 0.0 and ih > 0.0) else 0.0
    union = ax + ay - inter
    hull_w = max(a.x2, b.x2) - min(a.x, b.x)
    hull_h = max(a.y2, b.y2) - min(a.y, b.y)
    hull = hull_w * hull_h
    if hull <= 0.0:
        return 0.0
    iou = inter / union if union > 0.0 else 0.0
    return iou - (hull - union) / hull


@dataclass(frozen=True, eq=False)
class PredictedSet:
    """Fixed-size slot predictions: class probabilities and a box per slot.

    Probability rows cover the four element kinds in canonical order plus a
    trailing no-object entry and must sum to one.
    """

    probs: np.ndarray
    boxes: tuple[BBox, ...]

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[1] != NO_OBJECT + 1:
            raise ValueError(
                f"probs must have shape (Q, {NO_OBJECT + 1}), got {probs.shape}"
            )
        if probs.shape[0] != len(self.boxes):
            raise ValueError("one box per slot required")
        if (probs < 0.0).any():
            raise ValueError("probabilities must be non-negative")
        if probs.size and np.abs(probs.sum(axis=1) - 1.0).max() > 1e-6:
            raise ValueError("each probability row must sum to 1 within 1e-6")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "boxes", tuple(self.boxes))

    @property
    def slots(self) -> int:
        return self.probs.shape[0]


def _box_l1(a: BBox, b: BBox) -> float:
    return abs(a.x - b.x) + abs(a.y - b.y) + abs(a.w - b.w) + abs(a.h - b.h)


def _neg_log(p: float) -> float:
    return -math.log(min(max(p, _PROB_CLAMP), 1.0 - _PROB_CLAMP))


def reconstruction_loss(
    pred: PredictedSet,
    gt: Layout,
    weights: tuple[float, float, float] = DEFAULT_SET_LOSS_WEIGHTS,
    no_object_weight: float = DEFAULT_NO_OBJECT_WEIGHT,
) -> tuple[float, MatchResult]:
    """Set-prediction loss after optimal slot matching.

    Matching cost per (element, slot) pair combines the negated class
    probability, the box L1 distance, and the GIoU complement under the
    given weights. The loss re-scores matched pairs with a log-likelihood
    class term, adds a down-weighted no-object log term for every unmatched
    slot, and averages over slots.
    """
    lam_cls, lam_l1, lam_giou = weights
    n = len(gt)
    q = pred.slots
    if n > q:
        raise ValueError(f"layout has {n} elements but only {q} slots are available")
    kind_index = {k: i for i, k in enumerate(KIND_ORDER)}

    if n == 0:
        match = MatchResult((), 0.0)
    else:
        cost = np.zeros((n, q), dtype=np.float64)
        for i, e in enumerate(gt):
            ki = kind_index[e.kind]
            for s in range(q):
                cost[i, s] = (
                    lam_cls * (-pred.probs[s, ki])
                    + lam_l1 * _box_l1(e.box, pred.boxes[s])
                    + lam_giou * (1.0 - giou(e.box, pred.boxes[s]))
                )
        match = hungarian(cost)

    matched = dict(zip(match.assignment, range(n)))  # slot -> gt index
    total = 0.0
    for s in range(q):
        if s in matched:
            e = gt.elements[matched[s]]
            ki = kind_index[e.kind]
            total += lam_cls * _neg_log(float(pred.probs[s, ki]))
            total += lam_l1 * _box_l1(e.box, pred.boxes[s])
            total += lam_giou * (1.0 - giou(e.box, pred.boxes[s]))
        else:
            total += no_object_weight * lam_cls * _neg_log(
                float(pred.probs[s, NO_OBJECT])
            )
    return total / q, match
