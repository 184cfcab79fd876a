"""Differentiable layer primitives with hand-written backward passes.

Every forward function returns ``(output, backward)``. ``backward`` maps the
gradient of some scalar loss with respect to the output onto gradients with
respect to the array arguments, returned in argument order (a bare array for
single-input ops). Data arguments accept an optional leading batch axis;
parameter gradients are then summed over the batch, matching losses that are
summed over the batch.

Convolutions use cross-correlation semantics with stride 1 and zero
same-padding; kernels must have odd spatial size.
"""

import numpy as np

from .errors import ShapeError, ValidationError


def relu(x):
    """Elementwise max(0, x); subgradient 0 at x == 0."""
    x = np.asarray(x)
    y = np.maximum(x, 0.0)

    def backward(gy):
        return np.where(x > 0, gy, 0.0)

    return y, backward


def sigmoid(x):
    """Elementwise 1 / (1 + exp(-x)), computed via tanh for stability."""
    x = np.asarray(x)
    y = 0.5 * (1.0 + np.tanh(0.5 * x))

    def backward(gy):
        return gy * y * (1.0 - y)

    return y, backward


def dense(x, w, b):
    """Affine map: out_j = sum_i w[j, i] * x[i] + b[j].

    x may be (n,) or (..., n); w is (m, n); b is (m,).
    """
    x = np.asarray(x)
    w = np.asarray(w)
    b = np.asarray(b)
    if w.ndim != 2 or b.shape != (w.shape[0],) or x.shape[-1] != w.shape[1]:
        raise ShapeError(
            f"dense: input {tuple(x.shape)} incompatible with weights "
            f"{tuple(w.shape)} and bias {tuple(b.shape)}"
        )
    m, n = w.shape
    y = x @ w.T + b

    def backward(gy):
        gy = np.asarray(gy)
        gx = gy @ w
        if x.ndim == 1:
            gw = np.outer(gy, x)
            gb = gy.copy()
        else:
            x2 = x.reshape(-1, n)
            gy2 = gy.reshape(-1, m)
            gw = gy2.T @ x2
            gb = gy2.sum(axis=0)
        return gx, gw, gb

    return y, backward


def _lift(x, rank):
    x = np.asarray(x)
    if x.ndim == rank:
        return x[None], True
    if x.ndim == rank + 1:
        return x, False
    raise ShapeError(f"expected rank {rank} or {rank + 1} input, got shape {tuple(x.shape)}")


def conv2d(x, k, b):
    """2-D cross-correlation, stride 1, zero same-padding.

    x is (C_in, H, W) or (N, C_in, H, W); k is (C_out, C_in, kh, kw) with odd
    kh == kw; b is (C_out,).
    """
    k = np.asarray(k)
    b = np.asarray(b)
    if k.ndim != 4 or k.shape[2] != k.shape[3] or k.shape[2] % 2 == 0:
        raise ShapeError(f"conv2d: kernels must be (C_out, C_in, k, k) with odd k, got {tuple(k.shape)}")
    co, ci, kh, _ = k.shape
    if b.shape != (co,):
        raise ShapeError(f"conv2d: bias {tuple(b.shape)} does not match kernels {tuple(k.shape)}")
    x, single = _lift(x, 3)
    if x.shape[1] != ci:
        raise ShapeError(f"conv2d: input {tuple(x.shape)} incompatible with kernels {tuple(k.shape)}")
    n, _, h, w = x.shape
    p = kh // 2
    dtype = np.result_type(x, k, b)
    xp = np.zeros((n, ci, h + 2 * p, w + 2 * p), dtype)
    xp[:, :, p:p + h, p:p + w] = x
    y = np.zeros((n, co, h, w), dtype)
    y += b[None, :, None, None]
    for dy in range(kh):
        for dx in range(kh):
            y += np.tensordot(
                xp[:, :, dy:dy + h, dx:dx + w], k[:, :, dy, dx], axes=([1], [1])
            ).transpose(0, 3, 1, 2)

    def backward(gy):
        gy = np.asarray(gy)
        if single:
            gy = gy[None]
        gxp = np.zeros_like(xp)
        gk = np.zeros_like(k)
        for dy in range(kh):
            for dx in range(kh):
                sl = np.s_[:, :, dy:dy + h, dx:dx + w]
                gxp[sl] += np.tensordot(gy, k[:, :, dy, dx], axes=([1], [0])).transpose(0, 3, 1, 2)
                gk[:, :, dy, dx] = np.tensordot(gy, xp[sl], axes=([0, 2, 3], [0, 2, 3]))
        gx = gxp[:, :, p:p + h, p:p + w]
        gb = gy.sum(axis=(0, 2, 3))
        return (gx[0] if single else gx), gk, gb

    return (y[0] if single else y), backward


def deconv2d(x, k, b):
    """Transposed 2-D convolution, stride 1, same-padding: the adjoint of conv2d.

    With shared kernels k and zero bias, <conv2d(a, k), g> == <a, deconv2d(g, k)>.
    Maps C_out channels back to C_in: x is (C_out, H, W) or batched; b is (C_in,).
    """
    k = np.asarray(k)
    if k.ndim != 4:
        raise ShapeError(f"deconv2d: kernels must be 4-D, got {tuple(k.shape)}")
    kt = np.ascontiguousarray(k.transpose(1, 0, 2, 3)[:, :, ::-1, ::-1])
    y, conv_back = conv2d(x, kt, b)

    def backward(gy):
        gx, gkt, gb = conv_back(gy)
        gk = np.ascontiguousarray(gkt[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
        return gx, gk, gb

    return y, backward


def conv1d(x, k, b):
    """1-D cross-correlation, stride 1, zero same-padding, odd kernel size.

    x is (C_in, T) or (N, C_in, T); k is (C_out, C_in, kk); b is (C_out,).
    """
    k = np.asarray(k)
    b = np.asarray(b)
    if k.ndim != 3 or k.shape[2] % 2 == 0:
        raise ShapeError(f"conv1d: kernels must be (C_out, C_in, k) with odd k, got {tuple(k.shape)}")
    co, ci, kk = k.shape
    if b.shape != (co,):
        raise ShapeError(f"conv1d: bias {tuple(b.shape)} does not match kernels {tuple(k.shape)}")
    x, single = _lift(x, 2)
    if x.shape[1] != ci:
        raise ShapeError(f"conv1d: input {tuple(x.shape)} incompatible with kernels {tuple(k.shape)}")
    n, _, t = x.shape
    p = kk // 2
    dtype = np.result_type(x, k, b)
    xp = np.zeros((n, ci, t + 2 * p), dtype)
    xp[:, :, p:p + t] = x
    y = np.zeros((n, co, t), dtype)
    y += b[None, :, None]
    for d in range(kk):
        y += np.tensordot(xp[:, :, d:d + t], k[:, :, d], axes=([1], [1])).transpose(0, 2, 1)

    def backward(gy):
        gy = np.asarray(gy)
        if single:
            gy = gy[None]
        gxp = np.zeros_like(xp)
        gk = np.zeros_like(k)
        for d in range(kk):
            sl = np.s_[:, :, d:d + t]
            gxp[sl] += np.tensordot(gy, k[:, :, d], axes=([1], [0])).transpose(0, 2, 1)
            gk[:, :, d] = np.tensordot(gy, xp[sl], axes=([0, 2], [0, 2]))
        gb = gy.sum(axis=(0, 2))
        return (gxp[:, :, p:p + t][0] if single else gxp[:, :, p:p + t]), gk, gb

    return (y[0] if single else y), backward


def maxpool2x2(x):
    """2x2 max pooling over even spatial dims.

    Returns (pooled, indices, backward). Indices hold the argmax position per
    window as a row-major offset 0..3; ties break to the first position.
    """
    x, single = _lift(x, 3)
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError(f"maxpool2x2: spatial dims must be even, got {h}x{w}")
    hh, ww = h // 2, w // 2
    win = x.reshape(n, c, hh, 2, ww, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, hh, ww, 4)
    idx = win.argmax(axis=-1).astype(np.int8)
    y = np.take_along_axis(win, idx[..., None].astype(np.intp), axis=-1)[..., 0]

    def backward(gy):
        gy = np.asarray(gy)
        if single:
            gy = gy[None]
        gwin = np.zeros(win.shape, dtype=gy.dtype)
        np.put_along_axis(gwin, idx[..., None].astype(np.intp), gy[..., None], axis=-1)
        gx = gwin.reshape(n, c, hh, ww, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w)
        return gx[0] if single else gx

    return (y[0] if single else y), (idx[0] if single else idx), backward


def max_unpool2x2(y, idx):
    """Scatter pooled values back to their recorded window positions; rest zero."""
    y, single = _lift(y, 3)
    idx = np.asarray(idx)
    if single and idx.ndim == 3:
        idx = idx[None]
    if idx.shape != y.shape:
        raise ShapeError(f"max_unpool2x2: indices {tuple(idx.shape)} do not match values {tuple(y.shape)}")
    if idx.size and (idx.min() < 0 or idx.max() > 3):
        raise ValidationError("max_unpool2x2: index out of 2x2 window range")
    n, c, hh, ww = y.shape
    win = np.zeros((n, c, hh, ww, 4), dtype=y.dtype)
    np.put_along_axis(win, idx[..., None].astype(np.intp), y[..., None], axis=-1)
    x = win.reshape(n, c, hh, ww, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, 2 * hh, 2 * ww)

    def backward(gx):
        gx = np.asarray(gx)
        if single:
            gx = gx[None]
        gwin = gx.reshape(n, c, hh, 2, ww, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, hh, ww, 4)
        gy = np.take_along_axis(gwin, idx[..., None].astype(np.intp), axis=-1)[..., 0]
        return gy[0] if single else gy

    return (x[0] if single else x), backward


def lstm_cell(x, h, c, wx, wh, b):
    """One LSTM step. Gate order in the stacked affine is [i, f, o, g].

    i, f, o = sigmoid(affine), g = tanh(affine); c' = f*c + i*g; h' = o*tanh(c').
    x is (n,) or (N, n); h, c are (m,) or (N, m); wx (4m, n); wh (4m, m); b (4m,).
    Returns ((h', c'), backward); backward(gh', gc') -> (gx, gh, gc, gwx, gwh, gb).
    """
    x = np.asarray(x)
    h = np.asarray(h)
    c = np.asarray(c)
    wx = np.asarray(wx)
    wh = np.asarray(wh)
    b = np.asarray(b)
    m = h.shape[-1]
    if (
        c.shape != h.shape
        or wx.shape[0] != 4 * m
        or wh.shape != (4 * m, m)
        or b.shape != (4 * m,)
        or x.shape[-1] != wx.shape[1]
        or x.shape[:-1] != h.shape[:-1]
    ):
        raise ShapeError(
            f"lstm_cell: inconsistent shapes x{tuple(x.shape)} h{tuple(h.shape)} "
            f"c{tuple(c.shape)} wx{tuple(wx.shape)} wh{tuple(wh.shape)} b{tuple(b.shape)}"
        )
    a = x @ wx.T + h @ wh.T + b
    zi, zf, zo, zg = (a[..., i * m:(i + 1) * m] for i in range(4))
    gi = 0.5 * (1.0 + np.tanh(0.5 * zi))
    gf = 0.5 * (1.0 + np.tanh(0.5 * zf))
    go = 0.5 * (1.0 + np.tanh(0.5 * zo))
    gg = np.tanh(zg)
    c2 = gf * c + gi * gg
    tc2 = np.tanh(c2)
    h2 = go * tc2

    def backward(gh2, gc2):
        gh2 = np.asarray(gh2)
        gc2 = np.asarray(gc2)
        d_o = gh2 * tc2
        dc2 = gc2 + gh2 * go * (1.0 - tc2 * tc2)
        d_f = dc2 * c
        gc_in = dc2 * gf
        d_i = dc2 * gg
        d_g = dc2 * gi
        ga = np.concatenate(
            [
                d_i * gi * (1.0 - gi),
                d_f * gf * (1.0 - gf),
                d_o * go * (1.0 - go),
                d_g * (1.0 - gg * gg),
            ],
            axis=-1,
        )
        gx = ga @ wx
        gh_in = ga @ wh
        ga2 = ga.reshape(-1, 4 * m)
        x2 = x.reshape(-1, x.shape[-1])
        h2in = h.reshape(-1, m)
        gwx = ga2.T @ x2
        gwh = ga2.T @ h2in
        gb = ga2.sum(axis=0)
        return gx, gh_in, gc_in, gwx, gwh, gb

    return (h2, c2), backward
