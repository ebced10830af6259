"""Pure-Python kernels, used when the compiled ``_core`` is unavailable.

Arithmetic is ordered exactly as in ``_core.pyx`` so both backends agree
bit for bit.
"""

from __future__ import annotations

import hashlib

import numpy as np


def mine_nonce(prefix: bytes, suffix: bytes, difficulty: int, max_attempts: int):
    target = "0" * difficulty
    head = hashlib.sha256(prefix)
    nonce = 0
    while nonce < max_attempts:
        h = head.copy()
        h.update(b"%d" % nonce)
        h.update(suffix)
        digest = h.hexdigest()
        if digest.startswith(target):
            return nonce, digest
        nonce += 1
    return None


def kalman_series(samples, A, B, u, Q, H, R, x0, P0):
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    out = np.empty(len(samples), dtype=np.float64)
    x, P = float(x0), float(P0)
    for i, z in enumerate(samples.tolist()):
        xp = A * x + B * u
        Pp = A * P * A + Q
        den = H * Pp * H + R
        if den > 0.0:
            K = Pp * H / den
        elif R == 0.0 and H != 0.0:
            K = 1.0 / H
        else:
            raise ZeroDivisionError("innovation variance H*P*H + R is not positive")
        x = xp + K * (z - H * xp)
        a = 1.0 - K * H
        P = a * Pp * a + K * R * K
        out[i] = x
    return out, x, P


def grid_argmin(ax, ay, dist, nx, ny, res):
    xs = (np.arange(nx) + 0.5) * res
    ys = (np.arange(ny) + 0.5) * res
    gx, gy = np.meshgrid(xs, ys)  # shape (ny, nx), y outer
    s = np.zeros_like(gx)
    for axj, ayj, dj in zip(np.asarray(ax), np.asarray(ay), np.asarray(dist)):
        dx = gx - axj
        dy = gy - ayj
        e = np.sqrt(dx * dx + dy * dy) - dj
        s = s + e * e
    flat = int(np.argmin(s))
    by, bx = divmod(flat, nx)
    return bx, by, float(s[by, bx])
