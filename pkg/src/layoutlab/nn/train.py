"""Desk-scale adversarial training loops for the pixel discriminator.

`train_pd_only` fits the discriminator on frozen random features until it
can localize inpainted pixels. `train_adversarial` alternates that with an
extractor update that tries to fool the discriminator, shrinking the
feature gap between clean and inpainted inputs. Runs are bit-deterministic
given (seed, config); every step appends one trace record.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..layout import Domain
from ..losses import LossWeights, PixelMapBatch, pd_loss
from .nets import PdNet, SGD, ToyExtractor
from .synth import SynthData


class TrainingDiverged(RuntimeError):
    """Raised when a loss stops being finite."""


@dataclass
class TraceRecord:
    step: int
    l_pd: float
    l_pd_gen: float
    feature_gap: float
    auc: float

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "l_pd": self.l_pd,
            "l_pd_gen": self.l_pd_gen,
            "feature_gap": self.feature_gap,
            "auc": self.auc,
        }


@dataclass
class TrainResult:
    extractor: ToyExtractor
    pdnet: PdNet
    trace: list[TraceRecord] = field(default_factory=list)

    @property
    def final_auc(self) -> float:
        return self.trace[-1].auc

    @property
    def initial_gap(self) -> float:
        return self.trace[0].feature_gap

    @property
    def final_gap(self) -> float:
        return self.trace[-1].feature_gap


def pixel_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Rank-based ROC AUC with average ranks on ties."""
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both positive and negative pixels")
    order = np.argsort(s, kind="mergesort")
    ss = s[order]
    raw = np.arange(1, s.size + 1, dtype=np.float64)
    starts = np.r_[True, ss[1:] != ss[:-1]]
    gid = np.cumsum(starts) - 1
    sums = np.bincount(gid, weights=raw)
    counts = np.bincount(gid)
    ranks = np.empty_like(raw)
    ranks[order] = (sums / counts)[gid]
    pos_rank_sum = float(ranks[y == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def feature_domain_gap(
    extractor: ToyExtractor, clean: np.ndarray, inpainted: np.ndarray
) -> float:
    """Mean absolute feature difference over paired clean/inpainted images."""
    if clean.shape != inpainted.shape:
        raise ValueError(
            f"inputs must be paired with equal shapes, got {clean.shape} vs {inpainted.shape}"
        )
    fc = extractor.forward(clean)
    fi = extractor.forward(inpainted)
    return float(np.abs(fc - fi).mean())


def _smooth(mask: np.ndarray, low: float) -> np.ndarray:
    # one-target smoothing without revalidating {0,1} on the hot path
    return low + (1.0 - low) * mask


def _held_out_auc(extractor: ToyExtractor, pd: PdNet, data: SynthData) -> float:
    feats = extractor.forward(data.eval_inpainted)
    pred = pd.forward(feats, data.image_hw)[:, 0]
    return pixel_auc(pred, data.eval_mask)


def _pd_losses(
    pred_s: np.ndarray, target_s: np.ndarray, pred_t: np.ndarray, w: LossWeights
) -> tuple[float, float]:
    """(l_pd, l_pd_gen) for one batch; preds and targets are pixel stacks."""
    mae_s = float(np.abs(pred_s - target_s).mean())
    mae_t = float(np.abs(pred_t - w.smoothing_low).mean())
    l_pd = w.alpha * mae_s + w.beta * mae_t
    gen_s = float(np.abs(pred_s - w.fake_source_target).mean())
    l_pd_gen = w.alpha * gen_s + w.beta * mae_t
    return l_pd, l_pd_gen


def batch_pd_loss(
    pred_s: np.ndarray, target_s: np.ndarray, pred_t: np.ndarray, w: LossWeights
) -> float:
    """Discriminator loss on stacked maps, equal to losses.pd_loss on the
    equivalent PixelMapBatch (kept for cross-checking in tests)."""
    preds = PixelMapBatch(
        tuple(pred_s) + tuple(pred_t),
        (Domain.SOURCE,) * len(pred_s) + (Domain.TARGET,) * len(pred_t),
    )
    targets = PixelMapBatch(
        tuple(target_s) + tuple(np.full_like(p, w.smoothing_low) for p in pred_t),
        preds.domains,
    )
    return pd_loss(preds, targets, w)


def _check_finite(value: float, what: str) -> None:
    if not np.isfinite(value):
        raise TrainingDiverged(f"{what} became non-finite")


def train_pd_only(
    data: SynthData,
    steps: int = 500,
    lr: float = 0.1,
    weights: LossWeights = LossWeights(),
    seed: int = 0,
    batch_size: int = 8,
) -> TrainResult:
    """Train only the discriminator against a frozen random extractor.

    Each step samples `batch_size` source and target images, takes one SGD
    step on the discriminator loss, and records losses, the (constant)
    feature gap, and held-out pixel AUC.
    """
    rng = np.random.default_rng(seed)
    extractor = ToyExtractor(seed=seed * 2 + 1)
    pd = PdNet(in_ch=extractor.out_channels, seed=seed * 2 + 2)
    opt = SGD(pd.params(), lr=lr, momentum=0.9)
    hw = data.image_hw
    trace: list[TraceRecord] = []
    gap = feature_domain_gap(extractor, data.eval_clean, data.eval_inpainted)
    for step in range(steps):
        idx_s = rng.integers(0, len(data.source_inpainted), size=batch_size)
        idx_t = rng.integers(0, len(data.target), size=batch_size)
        xs = data.source_inpainted[idx_s]
        xt = data.target[idx_t]
        target_s = _smooth(data.source_mask[idx_s], weights.smoothing_low)

        feats = extractor.forward(np.concatenate([xs, xt]))
        pred = pd.forward(feats, hw)[:, 0]
        pred_s, pred_t = pred[:batch_size], pred[batch_size:]

        l_pd, l_pd_gen = _pd_losses(pred_s, target_s, pred_t, weights)
        _check_finite(l_pd, "discriminator loss")

        gpred = np.empty_like(pred)
        gpred[:batch_size] = weights.alpha * np.sign(pred_s - target_s) / pred_s.size
        gpred[batch_size:] = (
            weights.beta * np.sign(pred_t - weights.smoothing_low) / pred_t.size
        )
        pd.zero_grad()
        pd.backward(gpred[:, None])
        opt.step()

        auc = _held_out_auc(extractor, pd, data)
        trace.append(TraceRecord(step, l_pd, l_pd_gen, gap, auc))
    return TrainResult(extractor, pd, trace)


def train_adversarial(
    data: SynthData,
    steps: int = 400,
    weights: LossWeights = LossWeights(),
    seed: int = 0,
    lr_d: float = 0.1,
    lr_g: float = 5e-4,
    batch_size: int = 8,
) -> TrainResult:
    """Alternate discriminator and extractor updates.

    The discriminator step minimizes the pixel MAE loss; the extractor step
    minimizes gamma times the generator-side loss (no reconstruction term
    here, the adversarial path is the object under test). With gamma = 0
    the extractor receives exactly zero gradient and the feature gap stays
    at its initial value.
    """
    rng = np.random.default_rng(seed)
    extractor = ToyExtractor(seed=seed * 2 + 1)
    pd = PdNet(in_ch=extractor.out_channels, seed=seed * 2 + 2)
    opt_d = SGD(pd.params(), lr=lr_d, momentum=0.9)
    opt_g = SGD(extractor.params(), lr=lr_g, momentum=0.9)
    hw = data.image_hw
    trace: list[TraceRecord] = []
    for step in range(steps):
        idx_s = rng.integers(0, len(data.source_inpainted), size=batch_size)
        idx_t = rng.integers(0, len(data.target), size=batch_size)
        xs = data.source_inpainted[idx_s]
        xt = data.target[idx_t]
        target_s = _smooth(data.source_mask[idx_s], weights.smoothing_low)
        x = np.concatenate([xs, xt])

        # discriminator step
        feats = extractor.forward(x)
        pred = pd.forward(feats, hw)[:, 0]
        pred_s, pred_t = pred[:batch_size], pred[batch_size:]
        l_pd, _ = _pd_losses(pred_s, target_s, pred_t, weights)
        _check_finite(l_pd, "discriminator loss")
        gpred = np.empty_like(pred)
        gpred[:batch_size] = weights.alpha * np.sign(pred_s - target_s) / pred_s.size
        gpred[batch_size:] = (
            weights.beta * np.sign(pred_t - weights.smoothing_low) / pred_t.size
        )
        pd.zero_grad()
        pd.backward(gpred[:, None])
        opt_d.step()

        # extractor step against the updated discriminator
        feats = extractor.forward(x)
        pred = pd.forward(feats, hw)[:, 0]
        pred_s, pred_t = pred[:batch_size], pred[batch_size:]
        _, l_pd_gen = _pd_losses(pred_s, target_s, pred_t, weights)
        _check_finite(l_pd_gen, "generator loss")
        if weights.gamma > 0.0:
            gpred = np.empty_like(pred)
            gpred[:batch_size] = (
                weights.gamma
                * weights.alpha
                * np.sign(pred_s - weights.fake_source_target)
                / pred_s.size
            )
            gpred[batch_size:] = (
                weights.gamma
                * weights.beta
                * np.sign(pred_t - weights.smoothing_low)
                / pred_t.size
            )
            pd.zero_grad()
            extractor.zero_grad()
            gfeats = pd.backward(gpred[:, None])
            extractor.backward(gfeats)
            opt_g.step()

        gap = feature_domain_gap(extractor, data.eval_clean, data.eval_inpainted)
        _check_finite(gap, "feature gap")
        auc = _held_out_auc(extractor, pd, data)
        trace.append(TraceRecord(step, l_pd, l_pd_gen, gap, auc))
    return TrainResult(extractor, pd, trace)
