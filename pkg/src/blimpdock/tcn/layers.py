"""Network building blocks with explicit forward/backward passes.

Everything works on (batch, channels, time) float64 arrays. Each layer's
forward returns (output, cache); backward consumes the cache, returns the
gradient wrt the input and stores parameter gradients on the layer.
"""

import numpy as np

from .. import kernels

LN_EPS = 1e-5


class ConvLayer:
    """Causal dilated 1-d convolution; left padding (kernel-1)*dilation."""

    def __init__(self, in_channels, out_channels, kernel, dilation):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.dilation = dilation
        self.w = np.zeros((out_channels, in_channels, kernel))
        self.b = np.zeros(out_channels)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)

    def forward(self, x):
        y = kernels.conv1d_forward(x, self.w, self.b, self.dilation)
        return y, x

    def backward(self, grad_y, cache):
        x = cache
        grad_x, gw, gb = kernels.conv1d_backward(x, self.w, grad_y, self.dilation)
        self.gw += gw
        self.gb += gb
        return grad_x

    def params(self):
        return [("w", self.w), ("b", self.b)]

    def grads(self):
        return [self.gw, self.gb]


class LayerNorm:
    """Normalization across the channel axis at every time step."""

    def __init__(self, channels):
        self.g = np.ones(channels)
        self.b = np.zeros(channels)
        self.gg = np.zeros_like(self.g)
        self.gb = np.zeros_like(self.b)

    def forward(self, x):
        mu = x.mean(axis=1, keepdims=True)
        var = x.var(axis=1, keepdims=True)
        inv = 1.0 / np.sqrt(var + LN_EPS)
        xhat = (x - mu) * inv
        y = self.g[None, :, None] * xhat + self.b[None, :, None]
        return y, (xhat, inv)

    def backward(self, grad_y, cache):
        xhat, inv = cache
        n = xhat.shape[1]
        self.gg += np.einsum("bct,bct->c", grad_y, xhat)
        self.gb += grad_y.sum(axis=(0, 2))
        gxhat = grad_y * self.g[None, :, None]
        s1 = gxhat.sum(axis=1, keepdims=True)
        s2 = (gxhat * xhat).sum(axis=1, keepdims=True)
        return inv / n * (n * gxhat - s1 - xhat * s2)

    def params(self):
        return [("g", self.g), ("b", self.b)]

    def grads(self):
        return [self.gg, self.gb]


class ResidualBlock:
    """conv -> layer norm -> ReLU, added to the (possibly projected) input."""

    def __init__(self, in_channels, out_channels, kernel, dilation):
        self.conv = ConvLayer(in_channels, out_channels, kernel, dilation)
        self.ln = LayerNorm(out_channels)
        self.skip = (ConvLayer(in_channels, out_channels, 1, 1)
                     if in_channels != out_channels else None)

    def forward(self, x):
        h, c_conv = self.conv.forward(x)
        hn, c_ln = self.ln.forward(h)
        r = np.maximum(hn, 0.0)
        if self.skip is not None:
            s, c_skip = self.skip.forward(x)
        else:
            s, c_skip = x, None
        return r + s, (c_conv, c_ln, hn, c_skip)

    def backward(self, grad_y, cache):
        c_conv, c_ln, hn, c_skip = cache
        grad_r = grad_y * (hn > 0.0)
        grad_h = self.ln.backward(grad_r, c_ln)
        grad_x = self.conv.backward(grad_h, c_conv)
        if self.skip is not None:
            grad_x = grad_x + self.skip.backward(grad_y, c_skip)
        else:
            grad_x = grad_x + grad_y
        return grad_x

    def layers(self):
        out = [("conv", self.conv), ("ln", self.ln)]
        if self.skip is not None:
            out.append(("skip", self.skip))
        return out
