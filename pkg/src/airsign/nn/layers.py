"""Network layers with exact analytic gradients.

Each layer exposes forward(x, train, rng) -> (out, cache) and
backward(dout, cache) -> (dx, param_grads).  Caches are explicit so the
same parameter set can run several forward passes (both branches of a
twin network) before any backward pass.  Convolutions use valid padding
(no implicit zero border).
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError, StateError, ValidationError


def _require_cache(cache):
    if cache is None:
        raise StateError("backward called without a cached forward pass")
    return cache


class Layer:
    """Parameterless base; params/grads are aligned lists of arrays."""

    params: list

    def __init__(self):
        self.params = []

    def forward(self, x, train=False, rng=None):
        raise NotImplementedError

    def backward(self, dout, cache):
        raise NotImplementedError

    def out_shape(self, shape):
        raise NotImplementedError

    def spec(self) -> dict:
        raise NotImplementedError


def glorot_uniform(rng: np.random.Generator, shape, fan_in, fan_out, dtype):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Conv2D(Layer):
    """Valid-padding convolution: out[n,f,i,j] = b[f] + sum x*w over the window."""

    def __init__(self, in_ch, out_ch, kh, kw, stride=1, rng=None,
                 dtype=np.float64):
        super().__init__()
        if min(in_ch, out_ch, kh, kw, stride) < 1:
            raise ValidationError("conv dims and stride must be >= 1")
        self.in_ch, self.out_ch = in_ch, out_ch
        self.kh, self.kw, self.stride = kh, kw, stride
        rng = rng or np.random.default_rng(0)
        fan_in = in_ch * kh * kw
        fan_out = out_ch * kh * kw
        self.w = glorot_uniform(rng, (out_ch, in_ch, kh, kw), fan_in, fan_out, dtype)
        self.b = np.zeros(out_ch, dtype=dtype)
        self.params = [self.w, self.b]

    def out_shape(self, shape):
        c, h, w = shape
        if c != self.in_ch:
            raise ShapeError(f"expected {self.in_ch} channels, got {c}")
        if h < self.kh or w < self.kw:
            raise ShapeError(f"kernel {self.kh}x{self.kw} larger than input {h}x{w}")
        s = self.stride
        return (self.out_ch, (h - self.kh) // s + 1, (w - self.kw) // s + 1)

    def _im2col(self, x):
        n = x.shape[0]
        _, oh, ow = self.out_shape(x.shape[1:])
        win = np.lib.stride_tricks.sliding_window_view(x, (self.kh, self.kw),
                                                       axis=(2, 3))
        win = win[:, :, ::self.stride, ::self.stride]
        # (N, C, OH, OW, kh, kw) -> (N*OH*OW, C*kh*kw)
        cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(
            n * oh * ow, self.in_ch * self.kh * self.kw)
        return cols, oh, ow

    def forward(self, x, train=False, rng=None):
        cols, oh, ow = self._im2col(x)
        wmat = self.w.reshape(self.out_ch, -1)
        out = cols @ wmat.T + self.b
        out = out.reshape(x.shape[0], oh, ow, self.out_ch).transpose(0, 3, 1, 2)
        return out, (x.shape, cols, oh, ow)

    def backward(self, dout, cache):
        x_shape, cols, oh, ow = _require_cache(cache)
        n = x_shape[0]
        dmat = dout.transpose(0, 2, 3, 1).reshape(n * oh * ow, self.out_ch)
        dw = (dmat.T @ cols).reshape(self.w.shape)
        db = dmat.sum(axis=0)
        dcols = dmat @ self.w.reshape(self.out_ch, -1)
        d6 = dcols.reshape(n, oh, ow, self.in_ch, self.kh, self.kw)
        dx = np.zeros(x_shape, dtype=dout.dtype)
        s = self.stride
        # Per kernel offset the target slices are disjoint, so += is exact.
        for u in range(self.kh):
            for v in range(self.kw):
                dx[:, :, u:u + oh * s:s, v:v + ow * s:s] += \
                    d6[:, :, :, :, u, v].transpose(0, 3, 1, 2)
        return dx, [dw, db]

    def spec(self):
        return {"kind": "conv", "in_ch": self.in_ch, "out_ch": self.out_ch,
                "kh": self.kh, "kw": self.kw, "stride": self.stride}


class MaxPool2D(Layer):
    """Window-wise maxima; ties resolve to the first row-major position so
    the backward routing is deterministic."""

    def __init__(self, kh, kw, stride):
        super().__init__()
        if min(kh, kw, stride) < 1:
            raise ValidationError("pool dims and stride must be >= 1")
        self.kh, self.kw, self.stride = kh, kw, stride

    def out_shape(self, shape):
        c, h, w = shape
        if h < self.kh or w < self.kw:
            raise ShapeError(f"pool window {self.kh}x{self.kw} larger than {h}x{w}")
        s = self.stride
        return (c, (h - self.kh) // s + 1, (w - self.kw) // s + 1)

    def forward(self, x, train=False, rng=None):
        _, oh, ow = self.out_shape(x.shape[1:])
        win = np.lib.stride_tricks.sliding_window_view(x, (self.kh, self.kw),
                                                       axis=(2, 3))
        win = win[:, :, ::self.stride, ::self.stride]
        flat = win.reshape(*win.shape[:4], self.kh * self.kw)
        arg = flat.argmax(axis=-1)  # first occurrence on ties
        out = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]
        return out, (x.shape, arg)

    def backward(self, dout, cache):
        x_shape, arg = _require_cache(cache)
        n, c, oh, ow = dout.shape
        dx = np.zeros(x_shape, dtype=dout.dtype)
        u = arg // self.kw
        v = arg % self.kw
        ni, ci, oi, oj = np.indices((n, c, oh, ow), sparse=False)
        rows = oi * self.stride + u
        cols = oj * self.stride + v
        np.add.at(dx, (ni, ci, rows, cols), dout)
        return dx, []

    def spec(self):
        return {"kind": "maxpool", "kh": self.kh, "kw": self.kw,
                "stride": self.stride}


class LRN(Layer):
    """Cross-channel local response normalization.

    out[c] = x[c] / (k + alpha * sum_{c' in win(c)} x[c']^2)^beta with the
    n-wide window clamped at the channel borders.
    """

    def __init__(self, k=2.0, n=5, alpha=1e-4, beta=0.75):
        super().__init__()
        if n % 2 == 0 or n < 1:
            raise ValidationError(f"window size must be odd, got {n}")
        self.k, self.n, self.alpha, self.beta = float(k), n, float(alpha), float(beta)

    def out_shape(self, shape):
        return shape

    def _window_sum(self, arr):
        # Sliding sum over the channel axis, window clamped at borders.
        out = np.zeros_like(arr)
        c = arr.shape[1]
        half = (self.n - 1) // 2
        for d in range(-half, half + 1):
            lo, hi = max(0, -d), min(c, c - d)
            out[:, lo:hi] += arr[:, lo + d:hi + d]
        return out

    def forward(self, x, train=False, rng=None):
        ssum = self._window_sum(x * x)
        denom = self.k + self.alpha * ssum
        out = x * denom ** (-self.beta)
        return out, (x, denom)

    def backward(self, dout, cache):
        x, denom = _require_cache(cache)
        pb = denom ** (-self.beta)
        # d out[c]/d x[j] = delta_cj * denom[c]^-b
        #                 - 2 a b x[c] denom[c]^-(b+1) x[j] for j in win(c);
        # the window relation is symmetric, so the second term is a window
        # sum over dout * x * denom^-(b+1), scaled by x.
        inner = dout * x * denom ** (-self.beta - 1.0)
        dx = dout * pb - 2.0 * self.alpha * self.beta * x * self._window_sum(inner)
        return dx, []

    def spec(self):
        return {"kind": "lrn", "k": self.k, "n": self.n,
                "alpha": self.alpha, "beta": self.beta}


class Dropout(Layer):
    """Inverted dropout: train zeroes with probability `rate` and scales
    survivors by 1/(1-rate); eval is the identity."""

    def __init__(self, rate):
        super().__init__()
        if not (0.0 <= rate < 1.0):
            raise ValidationError(f"rate must be in [0, 1), got {rate}")
        self.rate = float(rate)

    def out_shape(self, shape):
        return shape

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            return x, (None,)
        if rng is None:
            raise StateError("training dropout requires an rng")
        keep = 1.0 - self.rate
        mask = (rng.random(x.shape) >= self.rate) / keep
        return x * mask, (mask,)

    def backward(self, dout, cache):
        (mask,) = _require_cache(cache)
        if mask is None:
            return dout, []
        return dout * mask, []

    def spec(self):
        return {"kind": "dropout", "rate": self.rate}


class ReLU(Layer):
    def out_shape(self, shape):
        return shape

    def forward(self, x, train=False, rng=None):
        out = np.maximum(x, 0)
        return out, (x,)

    def backward(self, dout, cache):
        (x,) = _require_cache(cache)
        return dout * (x > 0), []

    def spec(self):
        return {"kind": "relu"}


class Flatten(Layer):
    def out_shape(self, shape):
        return (int(np.prod(shape)),)

    def forward(self, x, train=False, rng=None):
        return x.reshape(x.shape[0], -1), (x.shape,)

    def backward(self, dout, cache):
        (shape,) = _require_cache(cache)
        return dout.reshape(shape), []

    def spec(self):
        return {"kind": "flatten"}


class Dense(Layer):
    def __init__(self, in_dim, out_dim, rng=None, dtype=np.float64):
        super().__init__()
        if in_dim < 1 or out_dim < 1:
            raise ValidationError("dense dims must be >= 1")
        self.in_dim, self.out_dim = in_dim, out_dim
        rng = rng or np.random.default_rng(0)
        self.w = glorot_uniform(rng, (in_dim, out_dim), in_dim, out_dim, dtype)
        self.b = np.zeros(out_dim, dtype=dtype)
        self.params = [self.w, self.b]

    def out_shape(self, shape):
        if len(shape) != 1 or shape[0] != self.in_dim:
            raise ShapeError(f"dense expects ({self.in_dim},), got {shape}")
        return (self.out_dim,)

    def forward(self, x, train=False, rng=None):
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeError(f"dense expects (N, {self.in_dim}), got {x.shape}")
        return x @ self.w + self.b, (x,)

    def backward(self, dout, cache):
        (x,) = _require_cache(cache)
        dw = x.T @ dout
        db = dout.sum(axis=0)
        dx = dout @ self.w.T
        return dx, [dw, db]

    def spec(self):
        return {"kind": "dense", "in_dim": self.in_dim, "out_dim": self.out_dim}
