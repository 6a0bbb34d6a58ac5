"""Functional conv/tconv primitives with exact hand-derived gradients.

Everything operates on float64 (B, C, H, W) arrays. Convolution is
cross-correlation built on im2col; the transposed convolution is defined
as its exact linear adjoint (col2im of the transposed weight product), so
the inner-product identity <conv(x), y> == <x, tconv(y)> holds to machine
precision for shared kernels.

Weight conventions match the usual ones: conv weights are
(out_ch, in_ch, k, k); tconv weights are (in_ch, out_ch, k, k).
"""

from __future__ import annotations

import numpy as np

KERNEL = 3


def conv_out_size(size: int, stride: int, pad: int, k: int = KERNEL) -> int:
    return (size + 2 * pad - k) // stride + 1


def tconv_out_size(size: int, stride: int, pad: int, out_pad: int, k: int = KERNEL) -> int:
    return stride * (size - 1) + k - 2 * pad + out_pad


def im2col(x: np.ndarray, stride: int, pad: int, k: int = KERNEL) -> np.ndarray:
    """Unfold (B, C, H, W) into (B, C*k*k, L) patch columns."""
    b, c, h, w = x.shape
    ho = conv_out_size(h, stride, pad, k)
    wo = conv_out_size(w, stride, pad, k)
    if ho <= 0 or wo <= 0:
        raise ValueError(f"input {h}x{w} too small for kernel {k} stride {stride}")
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    cols = np.empty((b, c, k, k, ho, wo), dtype=x.dtype)
    for i in range(k):
        for j in range(k):
            cols[:, :, i, j] = xp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride]
    return cols.reshape(b, c * k * k, ho * wo)


def col2im(
    cols: np.ndarray,
    out_shape: tuple[int, int, int, int],
    stride: int,
    pad: int,
    k: int = KERNEL,
) -> np.ndarray:
    """Exact adjoint of im2col: scatter-add patch columns back onto a grid."""
    b, c, h, w = out_shape
    ho = conv_out_size(h, stride, pad, k)
    wo = conv_out_size(w, stride, pad, k)
    cols = cols.reshape(b, c, k, k, ho, wo)
    xp = np.zeros((b, c, h + 2 * pad, w + 2 * pad), dtype=cols.dtype)
    for i in range(k):
        for j in range(k):
            xp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += cols[:, :, i, j]
    if pad:
        return xp[:, :, pad : pad + h, pad : pad + w]
    return xp


def conv2d_forward(
    x: np.ndarray, w: np.ndarray, b: np.ndarray | None, stride: int, pad: int
) -> np.ndarray:
    """Strided cross-correlation; returns (B, out_ch, Ho, Wo)."""
    out_ch, in_ch, k, _ = w.shape
    if x.shape[1] != in_ch:
        raise ValueError(f"expected {in_ch} input channels, got {x.shape[1]}")
    cols = im2col(x, stride, pad, k)
    y = np.matmul(w.reshape(out_ch, -1), cols)
    ho = conv_out_size(x.shape[2], stride, pad, k)
    wo = conv_out_size(x.shape[3], stride, pad, k)
    y = y.reshape(x.shape[0], out_ch, ho, wo)
    if b is not None:
        y += b[None, :, None, None]
    return y


def conv2d_backward(
    x: np.ndarray, w: np.ndarray, gy: np.ndarray, stride: int, pad: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of conv2d_forward w.r.t. input, weights, and bias."""
    out_ch, in_ch, k, _ = w.shape
    bsz = x.shape[0]
    g = gy.reshape(bsz, out_ch, -1)
    cols = im2col(x, stride, pad, k)
    gw = np.matmul(g, cols.transpose(0, 2, 1)).sum(axis=0).reshape(w.shape)
    gb = gy.sum(axis=(0, 2, 3))
    gcols = np.matmul(w.reshape(out_ch, -1).T, g)
    gx = col2im(gcols, x.shape, stride, pad, k)
    return gx, gw, gb


def tconv2d_forward(
    x: np.ndarray,
    w: np.ndarray,
    b: np.ndarray | None,
    stride: int,
    pad: int,
    out_pad: int,
) -> np.ndarray:
    """Transposed convolution: the adjoint of a stride-s conv with kernel w.

    Input (B, in_ch, h, w) maps to (B, out_ch, H, W) with
    H = stride*(h-1) + k - 2*pad + out_pad.
    """
    in_ch, out_ch, k, _ = w.shape
    if x.shape[1] != in_ch:
        raise ValueError(f"expected {in_ch} input channels, got {x.shape[1]}")
    if not 0 <= out_pad < stride:
        raise ValueError(f"out_pad must lie in [0, stride), got {out_pad}")
    bsz, _, h, wid = x.shape
    big_h = tconv_out_size(h, stride, pad, out_pad, k)
    big_w = tconv_out_size(wid, stride, pad, out_pad, k)
    cols = np.matmul(w.reshape(in_ch, -1).T, x.reshape(bsz, in_ch, -1))
    y = col2im(cols, (bsz, out_ch, big_h, big_w), stride, pad, k)
    if b is not None:
        y += b[None, :, None, None]
    return y


def tconv2d_backward(
    x: np.ndarray,
    w: np.ndarray,
    gy: np.ndarray,
    stride: int,
    pad: int,
    out_pad: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of tconv2d_forward w.r.t. input, weights, and bias."""
    in_ch, out_ch, k, _ = w.shape
    bsz = x.shape[0]
    gcols = im2col(gy, stride, pad, k)
    gx = np.matmul(w.reshape(in_ch, -1), gcols).reshape(x.shape)
    gw = (
        np.matmul(x.reshape(bsz, in_ch, -1), gcols.transpose(0, 2, 1))
        .sum(axis=0)
        .reshape(w.shape)
    )
    gb = gy.sum(axis=(0, 2, 3))
    return gx, gw, gb


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x: np.ndarray, gy: np.ndarray) -> np.ndarray:
    return gy * (x > 0.0)


def leaky_relu_forward(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x > 0.0, x, slope * x)


def leaky_relu_backward(x: np.ndarray, gy: np.ndarray, slope: float) -> np.ndarray:
    return gy * np.where(x > 0.0, 1.0, slope)


def sigmoid_forward(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_backward(y: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Backward in terms of the forward output y."""
    return gy * y * (1.0 - y)


def _resize_matrix(src: int, dst: int) -> np.ndarray:
    """(dst, src) bilinear interpolation weights, half-pixel-center convention."""
    pos = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
    lo = np.floor(pos).astype(int)
    frac = pos - lo
    lo0 = np.clip(lo, 0, src - 1)
    lo1 = np.clip(lo + 1, 0, src - 1)
    m = np.zeros((dst, src), dtype=np.float64)
    for o in range(dst):
        m[o, lo0[o]] += 1.0 - frac[o]
        m[o, lo1[o]] += frac[o]
    return m


def bilinear_resize_forward(x: np.ndarray, out_hw: tuple[int, int]) -> np.ndarray:
    """Resize (B, C, H, W) to (B, C, *out_hw) with bilinear interpolation."""
    ho, wo = out_hw
    r = _resize_matrix(x.shape[2], ho)
    c = _resize_matrix(x.shape[3], wo)
    return np.einsum("oh,bchw,pw->bcop", r, x, c, optimize=True)


def bilinear_resize_backward(
    gy: np.ndarray, in_hw: tuple[int, int]
) -> np.ndarray:
    """Adjoint of bilinear_resize_forward back to spatial size in_hw."""
    h, w = in_hw
    r = _resize_matrix(h, gy.shape[2])
    c = _resize_matrix(w, gy.shape[3])
    return np.einsum("oh,bcop,pw->bchw", r, gy, c, optimize=True)
