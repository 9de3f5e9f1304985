"""Pure-Python / numpy implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx``. Given identical inputs the
two produce identical integer outputs and identical floating-point outputs for
``triangle_decode``, ``weighted_degrees``, ``alias_build`` and ``alias_draw``
(same operation order). ``enumerate_ratio`` agrees to rounding only.
"""
import math

import numpy as np

BACKEND = "python"

_ENUM_CHUNK = 1 << 15


def triangle_decode(slots):
    """Map linear slots to ``(row, col)`` with ``row <= col``.

    Slot ``s`` encodes ``col*(col+1)//2 + row``, i.e. the upper triangle of a
    square matrix including the diagonal, enumerated column by column.
    """
    s = np.ascontiguousarray(slots, dtype=np.int64)
    col = np.floor((np.sqrt(8.0 * s.astype(np.float64) + 1.0) - 1.0) / 2.0).astype(np.int64)
    # float sqrt can be off by one near perfect squares
    col = np.where(col * (col + 1) // 2 > s, col - 1, col)
    col = np.where((col + 1) * (col + 2) // 2 <= s, col + 1, col)
    row = s - col * (col + 1) // 2
    return row, col


def weighted_degrees(n, i, j, w):
    """Weighted degree per vertex; a self-loop (i == j) contributes its weight once."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    out_i = np.bincount(i, weights=w, minlength=n)
    nonloop = i != j
    out_j = np.bincount(j[nonloop], weights=w[nonloop], minlength=n)
    return out_i + out_j


def alias_build(weights):
    """Vose alias table for sampling index ``k`` with probability ``w_k / sum(w)``.

    Returns ``(prob, alias)``. The total must be positive.
    """
    w = np.ascontiguousarray(weights, dtype=np.float64)
    n = w.shape[0]
    # cumsum accumulates left to right, matching the compiled loop
    total = float(np.cumsum(w)[-1]) if n else 0.0
    if not total > 0.0:
        raise ValueError("alias table needs a positive total weight")
    scaled = (w * float(n) / total).tolist()
    prob = [0.0] * n
    alias = [0] * n
    small = []
    large = []
    for k in range(n):
        if scaled[k] < 1.0:
            small.append(k)
        else:
            large.append(k)
    while small and large:
        lo = small.pop()
        hi = large.pop()
        prob[lo] = scaled[lo]
        alias[lo] = hi
        scaled[hi] = (scaled[hi] + scaled[lo]) - 1.0
        if scaled[hi] < 1.0:
            small.append(hi)
        else:
            large.append(hi)
    while large:
        hi = large.pop()
        prob[hi] = 1.0
        alias[hi] = hi
    fallback = int(np.argmax(w))
    while small:
        lo = small.pop()
        # leftovers are rounding residue; a true zero weight must stay unreachable
        if w[lo] > 0.0:
            prob[lo] = 1.0
            alias[lo] = lo
        else:
            prob[lo] = 0.0
            alias[lo] = fallback
    return np.array(prob, dtype=np.float64), np.array(alias, dtype=np.int64)


def alias_draw(prob, alias, idx, coin):
    idx = np.asarray(idx, dtype=np.int64)
    return np.where(np.asarray(coin) < prob[idx], idx, alias[idx]).astype(np.int64)


def enumerate_ratio(probs, red_w, blue_w):
    """Sum over all ``2**e`` edge outcomes.

    Returns ``(sum P*R/(R+B) over R+B>0, sum P over R+B>0, sum P over R+B==0)``.
    """
    p = np.asarray(probs, dtype=np.float64)
    rw = np.asarray(red_w, dtype=np.float64)
    bw = np.asarray(blue_w, dtype=np.float64)
    e = p.shape[0]
    q = 1.0 - p
    shifts = np.arange(e, dtype=np.int64)
    total = 1 << e
    ratio_parts, nonempty_parts, empty_parts = [], [], []
    for start in range(0, total, _ENUM_CHUNK):
        masks = np.arange(start, min(start + _ENUM_CHUNK, total), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        pr = np.prod(np.where(bits, p, q), axis=1)
        r = bits @ rw
        b = bits @ bw
        tot = r + b
        pos = tot > 0
        ratio_parts.append(math.fsum(pr[pos] * (r[pos] / tot[pos])))
        nonempty_parts.append(math.fsum(pr[pos]))
        empty_parts.append(math.fsum(pr[~pos]))
    return math.fsum(ratio_parts), math.fsum(nonempty_parts), math.fsum(empty_parts)
