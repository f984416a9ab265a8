"""Hot numeric loops, each in a numba and a pure-numpy flavour.

Every public kernel dispatches to ``*_jit`` or ``*_np`` according to
:data:`eodpersist._accel.USE_NUMBA`. Both flavours are always importable so
the benchmark and the equivalence tests can call them side by side.

Conventions shared by all kernels:

* a price panel is a 2-D array ``(N, T + 1)``; column 0 is the base day;
* spin index ``t`` reads column ``t + 1``; spin 0 compares column 1 with
  column 0 and later spins compare with column ``ref_col`` (0 or 1);
* a first-flip time of ``T`` means "never flipped inside the window".
"""
import numpy as np

from ._accel import USE_NUMBA, njit, prange


# -- first passage ---------------------------------------------------------

@njit(parallel=True)
def first_flips_jit(prices, ref_col=0):
    n, m = prices.shape
    T = m - 1
    out = np.empty(n, np.int64)
    for i in prange(n):
        up0 = prices[i, 1] >= prices[i, 0]
        ref = prices[i, ref_col]
        ff = T
        for t in range(1, T):
            if (prices[i, t + 1] >= ref) != up0:
                ff = t
                break
        out[i] = ff
    return out


def first_flips_np(prices, ref_col=0):
    prices = np.asarray(prices)
    T = prices.shape[1] - 1
    up = prices[:, 1:] >= prices[:, ref_col:ref_col + 1]
    up[:, 0] = prices[:, 1] >= prices[:, 0]
    flipped = up != up[:, :1]
    hit = flipped.any(axis=1)
    return np.where(hit, flipped.argmax(axis=1), T).astype(np.int64)


@njit
def survival_counts_jit(first_flips, T):
    hist = np.zeros(T + 1, np.int64)
    for f in first_flips:
        hist[f] += 1
    out = np.empty(T, np.int64)
    alive = first_flips.shape[0]
    for t in range(T):
        alive -= hist[t]
        out[t] = alive
    return out


def survival_counts_np(first_flips, T):
    hist = np.bincount(first_flips, minlength=T + 1)
    return (len(first_flips) - np.cumsum(hist)[:T]).astype(np.int64)


@njit(parallel=True)
def resampled_counts_jit(first_flips, idx, T):
    B, n = idx.shape
    out = np.empty((B, T), np.int64)
    for b in prange(B):
        hist = np.zeros(T + 1, np.int64)
        for j in range(n):
            hist[first_flips[idx[b, j]]] += 1
        alive = n
        for t in range(T):
            alive -= hist[t]
            out[b, t] = alive
    return out


def resampled_counts_np(first_flips, idx, T):
    B, n = idx.shape
    keys = first_flips[idx] + (T + 1) * np.arange(B)[:, None]
    hist = np.bincount(keys.ravel(), minlength=B * (T + 1)).reshape(B, T + 1)
    return (n - np.cumsum(hist, axis=1)[:, :T]).astype(np.int64)


# -- symmetric +/-1 walks ----------------------------------------------------

@njit(parallel=True)
def pm1_prices_jit(words, start, n_steps):
    n = words.shape[0]
    out = np.empty((n, n_steps + 1), np.int64)
    for i in prange(n):
        p = start
        out[i, 0] = p
        for k in range(n_steps):
            bit = (words[i, k >> 6] >> np.uint64(k & 63)) & np.uint64(1)
            if bit:
                p += 1
            else:
                p -= 1
            out[i, k + 1] = p
    return out


def pm1_prices_np(words, start, n_steps):
    n = words.shape[0]
    raw = np.ascontiguousarray(words, dtype="<u8").view(np.uint8)
    bits = np.unpackbits(raw, axis=1, bitorder="little")[:, :n_steps]
    out = np.empty((n, n_steps + 1), np.int64)
    out[:, 0] = start
    np.cumsum(2 * bits.astype(np.int64) - 1, axis=1, out=out[:, 1:])
    out[:, 1:] += start
    return out


# -- breakpoint scan -----------------------------------------------------------

@njit
def _seg_sse(c, sx, sy, sxx, sxy, syy):
    vxx = sxx - sx * sx / c
    vxy = sxy - sx * sy / c
    vyy = syy - sy * sy / c
    r = vyy - vxy * vxy / vxx
    return r if r > 0.0 else 0.0


@njit
def breakpoint_sse_jit(x, y):
    n = x.shape[0]
    x = x - x.mean()
    y = y - y.mean()
    px = np.zeros(n + 1)
    py = np.zeros(n + 1)
    pxx = np.zeros(n + 1)
    pxy = np.zeros(n + 1)
    pyy = np.zeros(n + 1)
    for i in range(n):
        px[i + 1] = px[i] + x[i]
        py[i + 1] = py[i] + y[i]
        pxx[i + 1] = pxx[i] + x[i] * x[i]
        pxy[i + 1] = pxy[i] + x[i] * y[i]
        pyy[i + 1] = pyy[i] + y[i] * y[i]
    out = np.empty(n - 5)
    for k in range(2, n - 3):
        a = k + 1
        left = _seg_sse(a, px[a], py[a], pxx[a], pxy[a], pyy[a])
        right = _seg_sse(n - a, px[n] - px[a], py[n] - py[a], pxx[n] - pxx[a],
                         pxy[n] - pxy[a], pyy[n] - pyy[a])
        out[k - 2] = left + right
    return out


def _seg_sse_np(c, sx, sy, sxx, sxy, syy):
    vxx = sxx - sx * sx / c
    vxy = sxy - sx * sy / c
    vyy = syy - sy * sy / c
    return np.maximum(vyy - vxy * vxy / vxx, 0.0)


def breakpoint_sse_np(x, y):
    """SSE of the best two-segment fit for every admissible split.

    Entry ``j`` corresponds to a short segment made of points ``0..j+2``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(x)
    x = x - x.mean()
    y = y - y.mean()

    def prefix(v):
        out = np.zeros(n + 1)
        np.cumsum(v, out=out[1:])
        return out

    px, py, pxx, pxy, pyy = (prefix(v) for v in (x, y, x * x, x * y, y * y))
    a = np.arange(3, n - 2)
    left = _seg_sse_np(a, px[a], py[a], pxx[a], pxy[a], pyy[a])
    right = _seg_sse_np(n - a, px[n] - px[a], py[n] - py[a], pxx[n] - pxx[a],
                        pxy[n] - pxy[a], pyy[n] - pyy[a])
    return left + right


if USE_NUMBA:
    first_flips = first_flips_jit
    survival_counts = survival_counts_jit
    resampled_counts = resampled_counts_jit
    pm1_prices = pm1_prices_jit
    breakpoint_sse = breakpoint_sse_jit
else:
    first_flips = first_flips_np
    survival_counts = survival_counts_np
    resampled_counts = resampled_counts_np
    pm1_prices = pm1_prices_np
    breakpoint_sse = breakpoint_sse_np
