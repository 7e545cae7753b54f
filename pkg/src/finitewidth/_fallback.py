"""Pure numpy implementation of the ensemble kernels.

Mirrors ``_kernels.pyx`` operation for operation so that arithmetic-only
paths produce bit-identical outputs; see that module for the stream layout.
"""

from __future__ import annotations

import numpy as np

PHILOX_M0 = np.uint64(0xD2511F53)
PHILOX_M1 = np.uint64(0xCD9E8D57)
PHILOX_W0 = 0x9E3779B9
PHILOX_W1 = 0xBB67AE85
MASK32 = np.uint64(0xFFFFFFFF)
TWO_M53 = 1.0 / 9007199254740992.0
TWO_PI = 6.283185307179586

# networks x blocks per vectorized batch; bounds temporaries to a few MiB
_BATCH_ELEMS = 1 << 16


def philox4x32_10(c0, c1, c2, c3, k0: int, k1: int):
    """Vectorized Philox4x32-10. Counter words are uint64 arrays holding 32-bit values."""
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) for c in (c0, c1, c2, c3))
    s32 = np.uint64(32)
    for _ in range(10):
        p0 = PHILOX_M0 * c0
        p1 = PHILOX_M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> s32) ^ c1 ^ np.uint64(k0),
            p1 & MASK32,
            (p0 >> s32) ^ c3 ^ np.uint64(k1),
            p0 & MASK32,
        )
        k0 = (k0 + PHILOX_W0) & 0xFFFFFFFF
        k1 = (k1 + PHILOX_W1) & 0xFFFFFFFF
    return c0, c1, c2, c3


def philox_block(c0, c1, c2, c3, k0, k1):
    out = philox4x32_10(c0, c1, c2, c3, k0, k1)
    return tuple(int(w) for w in out)


def _weights(stream_lo, stream_hi, nblocks, layer, k0, k1, family, scale):
    """Weights of shape (n_networks, 2 * nblocks) for one layer."""
    n = stream_lo.shape[0]
    block = np.broadcast_to(np.arange(nblocks, dtype=np.uint64), (n, nblocks))
    lo = np.broadcast_to(stream_lo[:, None], (n, nblocks))
    hi = np.broadcast_to(stream_hi[:, None], (n, nblocks))
    r0, r1, r2, r3 = philox4x32_10(lo, hi, block, np.full((n, nblocks), layer, np.uint64), k0, k1)
    s11 = np.uint64(11)
    a = (((r1 << np.uint64(32)) | r0) >> s11).astype(np.float64) * TWO_M53
    b = (((r3 << np.uint64(32)) | r2) >> s11).astype(np.float64) * TWO_M53
    w = np.empty((n, 2 * nblocks))
    if family == 0:
        w[:, 0::2] = (2.0 * a - 1.0) * scale
        w[:, 1::2] = (2.0 * b - 1.0) * scale
    else:
        rad = np.sqrt(-2.0 * np.log(1.0 - a))
        theta = TWO_PI * b
        w[:, 0::2] = rad * np.cos(theta) * scale
        w[:, 1::2] = rad * np.sin(theta) * scale
    return w


def _activate(act, s):
    if act == 0:
        return np.where(s > 0.0, s, 0.0)
    if act == 1:
        return s
    return np.tanh(s)


def simulate(seed, start, out, width, act, fam_u, scale_u, fam_v, scale_v, x):
    k0 = seed & 0xFFFFFFFF
    k1 = (seed >> 32) & 0xFFFFFFFF
    n = out.shape[0]
    nblocks = (width + 1) // 2
    batch = max(1, _BATCH_ELEMS // nblocks)
    for off in range(0, n, batch):
        m = min(batch, n - off)
        stream = np.arange(start + off, start + off + m, dtype=np.uint64)
        lo = stream & MASK32
        hi = stream >> np.uint64(32)
        u = _weights(lo, hi, nblocks, 0, k0, k1, fam_u, scale_u)
        v = _weights(lo, hi, nblocks, 1, k0, k1, fam_v, scale_v)
        acc = np.zeros(m)
        for i in range(width):
            acc = acc + v[:, i] * _activate(act, u[:, i] * x)
        out[off:off + m] = acc


def chunk_summary(y, lo, inv_width, counts):
    n = y.shape[0]
    if n == 0:
        return (0.0, 0.0, 0.0, 0.0, 0, 0)
    # cumsum is strictly sequential, matching the compiled loops bit for bit
    mean = float(np.cumsum(y)[-1]) / n
    d = y - mean
    d2 = d * d
    m2 = float(np.cumsum(d2)[-1])
    m3 = float(np.cumsum(d2 * d)[-1])
    m4 = float(np.cumsum(d2 * d2)[-1])
    t = (y - lo) * inv_width
    under = t < 0.0
    inside = ~under & (t < float(counts.shape[0]))
    over = n - int(under.sum()) - int(inside.sum())
    counts += np.bincount(t[inside].astype(np.int64), minlength=counts.shape[0])
    return (mean, m2, m3, m4, int(under.sum()), over)
