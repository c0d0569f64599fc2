"""Independent brute-force reference implementations used by the tests.

Deliberately naive: plain loops, float64 accumulation, no shared code with
the package internals.
"""

import numpy as np


def scatter_sum_transposed_conv(x, weights, bias, stride, pad, output_pad):
    """Reference transposed convolution.

    x: (h, w, in_ch); weights: (in_ch, out_ch, kh, kw); bias: (out_ch,).
    Walks every (input position, kernel tap, channel) combination and
    scatters into the output.
    """
    h, w, in_ch = x.shape
    _, out_ch, kh, kw = weights.shape
    oh = (h - 1) * stride - 2 * pad + kh + output_pad
    ow = (w - 1) * stride - 2 * pad + kw + output_pad
    out = np.zeros((oh, ow, out_ch), dtype=np.float64)
    out += np.asarray(bias, dtype=np.float64)
    for u in range(h):
        for v in range(w):
            for ky in range(kh):
                y = u * stride - pad + ky
                if y < 0 or y >= oh:
                    continue
                for kx in range(kw):
                    xx = v * stride - pad + kx
                    if xx < 0 or xx >= ow:
                        continue
                    for i in range(in_ch):
                        for o in range(out_ch):
                            out[y, xx, o] += float(x[u, v, i]) * float(
                                weights[i, o, ky, kx]
                            )
    return out


def minmax_scan(values):
    """Element-by-element extrema scan."""
    lo = hi = None
    for val in np.asarray(values).ravel():
        val = float(val)
        if lo is None or val < lo:
            lo = val
        if hi is None or val > hi:
            hi = val
    return lo, hi


def l2_distance(a, b):
    total = 0.0
    for x, y in zip(a, b):
        total += (float(x) - float(y)) ** 2
    return total**0.5


def best_threshold_exhaustive(pairs):
    """Try every distance value (and a below-min sentinel) as the threshold."""
    dists = [float(d) for d, _ in pairs]
    labels = [bool(s) for _, s in pairs]
    candidates = sorted(set(dists)) + [min(dists) - 1.0]
    best_acc = -1.0
    for t in candidates:
        correct = sum(1 for d, s in zip(dists, labels) if (d <= t) == s)
        acc = correct / len(dists)
        if acc > best_acc:
            best_acc = acc
    return best_acc
