# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: nonce search, scalar Kalman recursion, grid argmin.

Every kernel mirrors ``homeledger._fallback`` operation for operation so the
two backends return identical results, including floating-point rounding.
"""

import numpy as np

from libc.math cimport sqrt
from libc.stdio cimport snprintf

cdef extern from "openssl/sha.h":
    ctypedef struct SHA256_CTX:
        pass
    int SHA256_Init(SHA256_CTX *c) nogil
    int SHA256_Update(SHA256_CTX *c, const void *data, size_t n) nogil
    int SHA256_Final(unsigned char *md, SHA256_CTX *c) nogil

cdef inline bint _leading_hex_zeros(const unsigned char *digest, int n) noexcept nogil:
    cdef int i
    for i in range(n // 2):
        if digest[i] != 0:
            return False
    if n % 2 and (digest[n // 2] >> 4) != 0:
        return False
    return True


cdef const char *_HEX = b"0123456789abcdef"


def mine_nonce(bytes prefix, bytes suffix, int difficulty, max_attempts):
    """Smallest nonce whose digest has ``difficulty`` leading hex zeros.

    Returns ``(nonce, hexdigest)`` or ``None`` when ``max_attempts`` nonces
    were tried without success.
    """
    cdef Py_ssize_t np_ = len(prefix), ns = len(suffix)
    cdef unsigned long long limit
    if max_attempts >= 2 ** 64:
        limit = 0xFFFFFFFFFFFFFFFF
    else:
        limit = max_attempts
    cdef const char *pp = prefix
    cdef const char *sp = suffix
    cdef SHA256_CTX head, ctx
    cdef unsigned char digest[32]
    cdef char digits[24]
    cdef unsigned long long nonce = 0
    cdef int nd
    cdef bint found = False
    # the prefix midstate is hashed once and copied per nonce
    SHA256_Init(&head)
    SHA256_Update(&head, pp, np_)
    with nogil:
        while nonce < limit:
            nd = snprintf(digits, 24, "%llu", nonce)
            ctx = head
            SHA256_Update(&ctx, digits, nd)
            SHA256_Update(&ctx, sp, ns)
            SHA256_Final(digest, &ctx)
            if _leading_hex_zeros(digest, difficulty):
                found = True
                break
            nonce += 1
    if not found:
        return None
    cdef char hexbuf[64]
    cdef int i
    for i in range(32):
        hexbuf[2 * i] = _HEX[digest[i] >> 4]
        hexbuf[2 * i + 1] = _HEX[digest[i] & 0xF]
    return nonce, hexbuf[:64].decode("ascii")


def kalman_series(double[::1] samples, double A, double B, double u, double Q,
                  double H, double R, double x0, double P0):
    """Run the scalar filter over ``samples``; returns ``(estimates, x, P)``."""
    cdef Py_ssize_t i, n = samples.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double x = x0, P = P0, xp, Pp, den, K, a
    cdef bint degenerate = False
    with nogil:
        for i in range(n):
            xp = A * x + B * u
            Pp = A * P * A + Q
            den = H * Pp * H + R
            if den > 0.0:
                K = Pp * H / den
            elif R == 0.0 and H != 0.0:
                K = 1.0 / H
            else:
                degenerate = True
                break
            x = xp + K * (samples[i] - H * xp)
            a = 1.0 - K * H
            P = a * Pp * a + K * R * K
            o[i] = x
    if degenerate:
        raise ZeroDivisionError("innovation variance H*P*H + R is not positive")
    return out, x, P


def grid_argmin(double[::1] ax, double[::1] ay, double[::1] dist,
                Py_ssize_t nx, Py_ssize_t ny, double res):
    """Row-major (y outer) first argmin of the summed squared range mismatch."""
    cdef Py_ssize_t ix, iy, j, m = ax.shape[0]
    cdef Py_ssize_t bx = 0, by = 0
    cdef double best = float("inf"), s, cx, cy, dx, dy, e
    with nogil:
        for iy in range(ny):
            cy = (iy + 0.5) * res
            for ix in range(nx):
                cx = (ix + 0.5) * res
                s = 0.0
                for j in range(m):
                    dx = cx - ax[j]
                    dy = cy - ay[j]
                    e = sqrt(dx * dx + dy * dy) - dist[j]
                    s = s + e * e
                if s < best:
                    best = s
                    bx = ix
                    by = iy
    return bx, by, best
