"""Layer objects, the pixel discriminator, the small feature extractor, and SGD.

Layers cache their forward inputs and accumulate parameter gradients in
place; `backward` returns the input gradient so networks chain manually.
Everything is float64 and fully deterministic given a seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import convops as F


@dataclass
class Tensor4:
    """A (batch, channel, height, width) value with an attached gradient buffer."""

    value: np.ndarray
    grad: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.value = np.asarray(self.value, dtype=np.float64)
        if self.value.ndim != 4:
            raise ValueError(f"Tensor4 needs 4 dims, got shape {self.value.shape}")
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        else:
            self.grad = np.asarray(self.grad, dtype=np.float64)
            if self.grad.shape != self.value.shape:
                raise ValueError("grad shape must match value shape")
        if not (np.isfinite(self.value).all() and np.isfinite(self.grad).all()):
            raise ValueError("Tensor4 buffers must be finite")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.value.shape  # type: ignore[return-value]


def _he_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)


class Conv2d:
    """3x3 forward convolution layer, zero padding 1."""

    def __init__(
        self, in_ch: int, out_ch: int, stride: int, rng: np.random.Generator
    ) -> None:
        if stride not in (1, 2):
            raise ValueError(f"stride must be 1 or 2, got {stride}")
        self.stride = stride
        self.pad = 1
        self.w = _he_init(rng, (out_ch, in_ch, 3, 3), in_ch * 9)
        self.b = np.zeros(out_ch, dtype=np.float64)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._x: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return F.conv2d_forward(x, self.w, self.b, self.stride, self.pad)

    def backward(self, gy: np.ndarray) -> np.ndarray:
        gx, gw, gb = F.conv2d_backward(self._x, self.w, gy, self.stride, self.pad)
        self.gw += gw
        self.gb += gb
        return gx

    def params(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(self.w, self.gw), (self.b, self.gb)]


class TConv2d:
    """3x3 transposed convolution layer; out_pad defaults to stride - 1 so
    stride-2 layers exactly double even spatial sizes."""

    def __init__(
        self,
        in_ch: int,
        out_ch: int,
        stride: int,
        rng: np.random.Generator,
        out_pad: int | None = None,
    ) -> None:
        if stride not in (1, 2):
            raise ValueError(f"stride must be 1 or 2, got {stride}")
        self.stride = stride
        self.pad = 1
        self.out_pad = stride - 1 if out_pad is None else out_pad
        self.w = _he_init(rng, (in_ch, out_ch, 3, 3), in_ch * 9)
        self.b = np.zeros(out_ch, dtype=np.float64)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._x: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return F.tconv2d_forward(x, self.w, self.b, self.stride, self.pad, self.out_pad)

    def backward(self, gy: np.ndarray) -> np.ndarray:
        gx, gw, gb = F.tconv2d_backward(
            self._x, self.w, gy, self.stride, self.pad, self.out_pad
        )
        self.gw += gw
        self.gb += gb
        return gx

    def params(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(self.w, self.gw), (self.b, self.gb)]


def _count(params: list[tuple[np.ndarray, np.ndarray]]) -> int:
    return sum(p.size for p, _ in params)


class PdNet:
    """Pixel-level discriminator: three transposed convolutions that upsample
    shallow features back to image resolution, leaky-ReLU between layers, a
    sigmoid head, and a bilinear resize when the upsampled size is off.

    Weights are He-init scaled by `init_gain` (small init leaves the sigmoid
    output nearly constant and stalls early training); the output bias starts
    at the logit of `out_prior` so the net begins at the smoothed-background
    level instead of spending steps collapsing to it.
    """

    LEAKY_SLOPE = 0.1

    def __init__(
        self,
        in_ch: int = 8,
        widths: tuple[int, int] = (64, 32),
        seed: int = 0,
        init_gain: float = 3.0,
        out_prior: float = 0.2,
    ) -> None:
        rng = np.random.default_rng(seed)
        self.t1 = TConv2d(in_ch, widths[0], stride=2, rng=rng)
        self.t2 = TConv2d(widths[0], widths[1], stride=2, rng=rng)
        self.t3 = TConv2d(widths[1], 1, stride=1, rng=rng)
        for layer in (self.t1, self.t2, self.t3):
            layer.w *= init_gain
        if not 0.0 < out_prior < 1.0:
            raise ValueError("out_prior must lie in (0, 1)")
        self.t3.b[:] = np.log(out_prior / (1.0 - out_prior))
        self._cache: dict[str, np.ndarray | tuple[int, int]] = {}

    def forward(self, x: np.ndarray, out_hw: tuple[int, int]) -> np.ndarray:
        a1 = self.t1.forward(x)
        z1 = F.leaky_relu_forward(a1, self.LEAKY_SLOPE)
        a2 = self.t2.forward(z1)
        z2 = F.leaky_relu_forward(a2, self.LEAKY_SLOPE)
        a3 = self.t3.forward(z2)
        sig = F.sigmoid_forward(a3)
        self._cache = {
            "a1": a1,
            "a2": a2,
            "sig": sig,
            "pre_hw": a3.shape[2:],
            "out_hw": out_hw,
        }
        if a3.shape[2:] == tuple(out_hw):
            return sig
        return F.bilinear_resize_forward(sig, out_hw)

    def backward(self, gy: np.ndarray) -> np.ndarray:
        pre_hw = self._cache["pre_hw"]
        if tuple(pre_hw) != tuple(self._cache["out_hw"]):
            gy = F.bilinear_resize_backward(gy, pre_hw)
        g = F.sigmoid_backward(self._cache["sig"], gy)
        g = self.t3.backward(g)
        g = F.leaky_relu_backward(self._cache["a2"], g, self.LEAKY_SLOPE)
        g = self.t2.backward(g)
        g = F.leaky_relu_backward(self._cache["a1"], g, self.LEAKY_SLOPE)
        return self.t1.backward(g)

    def params(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return self.t1.params() + self.t2.params() + self.t3.params()

    def zero_grad(self) -> None:
        for _, g in self.params():
            g[...] = 0.0

    @property
    def num_params(self) -> int:
        return _count(self.params())


class ToyExtractor:
    """Two stride-2 convolutions with ReLU; stands in for the shallow block of
    a real backbone. Overall spatial downsampling factor 4.

    Biases draw from U(0, 0.3): slightly positive offsets keep the random
    frozen channels alive across inputs, which zero biases do not guarantee.
    """

    def __init__(self, in_ch: int = 3, width: int = 8, seed: int = 0) -> None:
        rng = np.random.default_rng(seed)
        self.c1 = Conv2d(in_ch, width, stride=2, rng=rng)
        self.c2 = Conv2d(width, width, stride=2, rng=rng)
        self.c1.b[:] = rng.uniform(0.0, 0.3, self.c1.b.shape)
        self.c2.b[:] = rng.uniform(0.0, 0.3, self.c2.b.shape)
        self.out_channels = width
        self._cache: dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray) -> np.ndarray:
        a1 = self.c1.forward(x)
        z1 = F.relu_forward(a1)
        a2 = self.c2.forward(z1)
        self._cache = {"a1": a1, "a2": a2}
        return F.relu_forward(a2)

    def backward(self, gy: np.ndarray) -> np.ndarray:
        g = F.relu_backward(self._cache["a2"], gy)
        g = self.c2.backward(g)
        g = F.relu_backward(self._cache["a1"], g)
        return self.c1.backward(g)

    def params(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return self.c1.params() + self.c2.params()

    def zero_grad(self) -> None:
        for _, g in self.params():
            g[...] = 0.0

    @property
    def num_params(self) -> int:
        return _count(self.params())


class SGD:
    """Plain SGD with classical momentum, updating parameters in place."""

    def __init__(
        self,
        params: list[tuple[np.ndarray, np.ndarray]],
        lr: float,
        momentum: float = 0.9,
    ) -> None:
        if lr <= 0.0:
            raise ValueError("learning rate must be positive")
        self.params = params
        self.lr = lr
        self.momentum = momentum
        self.velocity = [np.zeros_like(p) for p, _ in params]

    def step(self) -> None:
        for (p, g), v in zip(self.params, self.velocity):
            v *= self.momentum
            v += g
            p -= self.lr * v
