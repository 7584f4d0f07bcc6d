"""Shared test utilities: independent oracles and a finite-difference
gradient checker.  Everything here stays deliberately naive; these are the
reference routes the implementation is checked against."""

from __future__ import annotations

import numpy as np


def fd_gradient_check(layer, x, rng, train=False, layer_rng_seed=1,
                      h=1e-5, n_input=20, n_param=15):
    """Max relative error between analytic and central-difference gradients
    on sampled input and parameter coordinates."""

    def run(x_, params=None):
        saved = [p.copy() for p in layer.params]
        if params is not None:
            for p, v in zip(layer.params, params):
                p[...] = v
        out, _ = layer.forward(x_, train=train,
                               rng=np.random.default_rng(layer_rng_seed))
        for p, v in zip(layer.params, saved):
            p[...] = v
        return out

    out, cache = layer.forward(x, train=train,
                               rng=np.random.default_rng(layer_rng_seed))
    dout = rng.standard_normal(out.shape)
    dx, grads = layer.backward(dout, cache)

    errs = []
    for i in rng.choice(x.size, size=min(n_input, x.size), replace=False):
        xp = x.copy().ravel()
        xm = x.copy().ravel()
        xp[i] += h
        xm[i] -= h
        num = (np.sum(run(xp.reshape(x.shape)) * dout)
               - np.sum(run(xm.reshape(x.shape)) * dout)) / (2 * h)
        errs.append(_rel_err(num, dx.ravel()[i]))
    for pi, p in enumerate(layer.params):
        for i in rng.choice(p.size, size=min(n_param, p.size), replace=False):
            pp = [q.copy() for q in layer.params]
            pm = [q.copy() for q in layer.params]
            pp[pi].ravel()[i] += h
            pm[pi].ravel()[i] -= h
            num = (np.sum(run(x, pp) * dout)
                   - np.sum(run(x, pm) * dout)) / (2 * h)
            errs.append(_rel_err(num, grads[pi].ravel()[i]))
    return max(errs)


def _rel_err(a, b):
    # The floor makes near-zero gradient pairs compare in absolute terms;
    # shared biases cancel exactly in embedding differences, so analytic 0
    # vs finite-difference noise (~1e-12) must not count as disagreement.
    return abs(a - b) / max(abs(a), abs(b), 1e-6)


def div_round_half_away(a: int, b: int) -> int:
    """Exact integer round-half-away-from-zero of a/b for b > 0."""
    if a >= 0:
        return (2 * a + b) // (2 * b)
    return -((-2 * a + b) // (2 * b))


def line_oracle(x0: int, y0: int, x1: int, y1: int) -> list:
    """Closed-form integer line stepping: walk the major axis and round the
    ideal minor coordinate, ties away from zero."""
    dx, dy = x1 - x0, y1 - y0
    n = max(abs(dx), abs(dy))
    if n == 0:
        return [(x0, y0)]
    return [(x0 + div_round_half_away(t * dx, n),
             y0 + div_round_half_away(t * dy, n)) for t in range(n + 1)]


def conv2d_oracle(x, w, b, stride):
    """Quadruple-nested-loop convolution, valid padding."""
    n, c, h, wd = x.shape
    f, _, kh, kw = w.shape
    oh = (h - kh) // stride + 1
    ow = (wd - kw) // stride + 1
    out = np.zeros((n, f, oh, ow))
    for ni in range(n):
        for fi in range(f):
            for i in range(oh):
                for j in range(ow):
                    acc = b[fi]
                    for ci in range(c):
                        for u in range(kh):
                            for v in range(kw):
                                acc += (x[ni, ci, i * stride + u, j * stride + v]
                                        * w[fi, ci, u, v])
                    out[ni, fi, i, j] = acc
    return out


def maxpool_oracle(x, kh, kw, stride):
    n, c, h, w = x.shape
    oh = (h - kh) // stride + 1
    ow = (w - kw) // stride + 1
    out = np.zeros((n, c, oh, ow))
    for ni in range(n):
        for ci in range(c):
            for i in range(oh):
                for j in range(ow):
                    out[ni, ci, i, j] = x[ni, ci,
                                          i * stride:i * stride + kh,
                                          j * stride:j * stride + kw].max()
    return out


def bilinear_oracle(values, out_h, out_w):
    """Scalar reference for the half-pixel-center bilinear mapping."""
    values = np.asarray(values, dtype=np.float64)
    in_h, in_w = values.shape
    out = np.zeros((out_h, out_w))
    for dy in range(out_h):
        for dx in range(out_w):
            sy = (dy + 0.5) * (in_h / out_h) - 0.5
            sx = (dx + 0.5) * (in_w / out_w) - 0.5
            y0, x0 = int(np.floor(sy)), int(np.floor(sx))
            fy, fx = sy - y0, sx - x0

            def at(yy, xx):
                return values[min(max(yy, 0), in_h - 1),
                              min(max(xx, 0), in_w - 1)]

            out[dy, dx] = (at(y0, x0) * (1 - fy) * (1 - fx)
                           + at(y0, x0 + 1) * (1 - fy) * fx
                           + at(y0 + 1, x0) * fy * (1 - fx)
                           + at(y0 + 1, x0 + 1) * fy * fx)
    return out


def sweep_threshold_oracle(distances, labels):
    """Exhaustive accuracy sweep over a dense threshold grid; returns
    (best_tau, best_accuracy) with ties to the smallest tau."""
    distances = np.asarray(distances, dtype=np.float64)
    labels = np.asarray(labels)
    lo, hi = distances.min() - 1.0, distances.max() + 1.0
    best = (None, -1.0)
    for tau in np.linspace(lo, hi, 20001):
        accept = distances <= tau
        acc = float(np.mean(accept == (labels == 1)))
        if acc > best[1]:
            best = (float(tau), acc)
    return best


def siamese_loss_and_grads(net, xa, xb, labels, loss_cfg):
    """Mean contrastive pair loss and its analytic parameter gradients,
    computed the same way the trainer does."""
    from airsign.verify import contrastive_loss

    ea, ca = net.forward(xa, train=False)
    eb, cb = net.forward(xb, train=False)
    diff = ea - eb
    d = np.sqrt(np.sum(diff * diff, axis=1))
    loss, dloss_dd = contrastive_loss(d, labels, loss_cfg)
    unit = np.where(d[:, None] > 0.0,
                    diff / np.maximum(d, 1e-300)[:, None], 0.0)
    gea = (dloss_dd / len(labels))[:, None] * unit
    _, ga = net.backward(gea, ca)
    _, gb = net.backward(-gea, cb)
    return float(loss.mean()), [a + b for a, b in zip(ga, gb)]


def _embed_with_signature(net, x):
    """Embedding plus the piecewise-linear activation pattern (ReLU signs,
    pool argmaxes) encountered on the way."""
    from airsign.nn.layers import MaxPool2D, ReLU

    h = np.asarray(x, dtype=net.dtype)
    sig = []
    for layer in net.layers:
        if isinstance(layer, ReLU):
            sig.append(h > 0)
        h, cache = layer.forward(h)
        if isinstance(layer, MaxPool2D):
            sig.append(cache[1].copy())  # argmax indices
    return h, sig


def _pair_loss_with_signature(net, xa, xb, labels, loss_cfg):
    from airsign.verify import contrastive_loss

    ea, siga = _embed_with_signature(net, xa)
    eb, sigb = _embed_with_signature(net, xb)
    d = np.sqrt(np.sum((ea - eb) ** 2, axis=1))
    loss, _ = contrastive_loss(d, labels, loss_cfg)
    hinge_side = (np.asarray(labels) == 0) & (d < loss_cfg.margin)
    return float(loss.mean()), siga + sigb + [hinge_side]


def _same_signature(a, b):
    return all(np.array_equal(x, y) for x, y in zip(a, b))


def siamese_fd_check(net, xa, xb, labels, loss_cfg, rng, h=1e-5,
                     n_per_param=8, max_skip_frac=0.2):
    """Max relative error of the composed pair-loss gradient against central
    finite differences over sampled parameter coordinates.

    The loss is piecewise linear in places (ReLU, pool maxima, the hinge);
    a coordinate whose +/-h step lands on different linear pieces has no
    two-sided derivative there, so it is skipped.  The skip fraction is
    capped so the check cannot degenerate into a no-op.
    """
    _, grads = siamese_loss_and_grads(net, xa, xb, labels, loss_cfg)

    def probe():
        return _pair_loss_with_signature(net, xa, xb, labels, loss_cfg)

    errs = []
    checked = skipped = 0
    for p, g in zip(net.params, grads):
        for i in rng.choice(p.size, size=min(n_per_param, p.size),
                            replace=False):
            orig = p.ravel()[i]
            p.ravel()[i] = orig + h
            lp, sig_p = probe()
            p.ravel()[i] = orig - h
            lm, sig_m = probe()
            p.ravel()[i] = orig
            if not _same_signature(sig_p, sig_m):
                skipped += 1
                continue
            checked += 1
            errs.append(_rel_err((lp - lm) / (2 * h), g.ravel()[i]))
    assert checked > 0 and skipped <= max_skip_frac * (checked + skipped), \
        f"too many kink-straddling samples ({skipped}/{checked + skipped})"
    return max(errs)


def kink_margins(net, x):
    """Smallest |pre-activation| at any ReLU and smallest top-two gap in any
    positive max-pool window.  A finite-difference check is only trustworthy
    when these margins comfortably exceed the step h."""
    from airsign.nn.layers import MaxPool2D, ReLU

    relu_margin = np.inf
    pool_margin = np.inf
    h = np.asarray(x, dtype=net.dtype)
    if h.ndim == 3:
        h = h[None]
    for layer in net.layers:
        if isinstance(layer, ReLU):
            relu_margin = min(relu_margin, float(np.min(np.abs(h))))
        if isinstance(layer, MaxPool2D):
            win = np.lib.stride_tricks.sliding_window_view(
                h, (layer.kh, layer.kw), axis=(2, 3))
            win = win[:, :, ::layer.stride, ::layer.stride]
            flat = np.sort(win.reshape(*win.shape[:4], -1), axis=-1)
            gap = flat[..., -1] - flat[..., -2]
            positive = flat[..., -1] > 0  # all-clamped windows route no grad
            if np.any(positive):
                pool_margin = min(pool_margin, float(gap[positive].min()))
        h, _ = layer.forward(h)
    return relu_margin, pool_margin


def recount_oracle(distances, labels, tau):
    """Brute-force confusion recount under accept iff D <= tau."""
    tp = tn = fp = fn = 0
    for d, lab in zip(distances, labels):
        accepted = d <= tau
        if lab == 1 and accepted:
            tp += 1
        elif lab == 1:
            fn += 1
        elif accepted:
            fp += 1
        else:
            tn += 1
    return tp, tn, fp, fn
