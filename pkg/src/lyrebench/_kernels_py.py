"""Pure numpy implementations of the hot kernels.

This is the fallback backend; lyrebench._kernels is the compiled twin.  The
two must agree bit-for-bit, so every floating-point accumulation here is
sequential (cumsum) or elementwise — see tests/test_kernels.py for the
parity checks.
"""

import numpy as np

BACKEND = "python"

# FNV-1a 64-bit parameters; the full hashing scheme is documented in
# featurize.py and pinned by test vectors.
FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1

# Cumulative mass within this epsilon of the nucleus threshold counts as
# reaching it (guards against 0.5 + 0.3 < 0.8 style float artifacts).
NUCLEUS_EPS = 1e-12


def fnv1a_bytes(data, h=FNV_OFFSET):
    """Feed an iterable of byte values through FNV-1a 64."""
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


def _seed_prefix(seed, n):
    """Hash state after absorbing the seed (8 LE bytes) and n (1 byte)."""
    if not 1 <= n <= 255:
        raise ValueError(f"n-gram size out of range: {n}")
    h = fnv1a_bytes(int(seed).to_bytes(8, "little", signed=False))
    return fnv1a_bytes([n], h)


def assign_labels(x, centroids):
    """Index of the nearest centroid per row; ties go to the lowest index."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    c = np.ascontiguousarray(centroids, dtype=np.float64)
    n = x.shape[0]
    labels = np.empty(n, dtype=np.int64)
    # Chunked so the (chunk, k, d) temporary stays small.
    step = max(1, min(n, 4_194_304 // max(1, c.shape[0] * c.shape[1])))
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        d2 = ((x[lo:hi, None, :] - c[None, :, :]) ** 2).sum(axis=2)
        labels[lo:hi] = d2.argmin(axis=1)
    return labels


def ngram_unique_total(ids, n):
    """(unique, total) overlapping n-gram counts over an int id sequence."""
    ids = np.asarray(ids, dtype=np.int64)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    total = ids.shape[0] - n + 1
    if total <= 0:
        return 0, 0
    windows = np.lib.stride_tricks.sliding_window_view(ids, n)
    unique = np.unique(windows, axis=0).shape[0]
    return int(unique), int(total)


def char_ngram_bucket_counts(codes, n_lo, n_hi, dim, seed):
    """Histogram of hashed character n-grams over `dim` buckets.

    Each window of n codepoints (n in [n_lo, n_hi]) is hashed with FNV-1a 64
    over: seed as 8 LE bytes, n as 1 byte, then each codepoint as 4 LE bytes.
    Bucket = hash % dim.
    """
    codes = np.asarray(codes, dtype=np.uint32)
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    counts = np.zeros(dim, dtype=np.float64)
    m = codes.shape[0]
    prime = np.uint64(FNV_PRIME)
    for n in range(n_lo, n_hi + 1):
        if m - n + 1 <= 0:
            continue
        windows = np.lib.stride_tricks.sliding_window_view(codes, n)
        h = np.full(windows.shape[0], _seed_prefix(seed, n), dtype=np.uint64)
        for j in range(n):
            col = windows[:, j].astype(np.uint64)
            for shift in (0, 8, 16, 24):
                byte = (col >> np.uint64(shift)) & np.uint64(0xFF)
                h = (h ^ byte) * prime
        np.add.at(counts, (h % np.uint64(dim)).astype(np.int64), 1.0)
    return counts


def nucleus_order(probs):
    """Token order for nucleus filtering: descending prob, ties by index."""
    probs = np.asarray(probs, dtype=np.float64)
    return np.argsort(-probs, kind="stable")


def nucleus_cutoff(sorted_probs, p):
    """Index of the last kept token in an already-sorted prob array."""
    cs = np.cumsum(sorted_probs)
    cut = int(np.searchsorted(cs, p - NUCLEUS_EPS, side="left"))
    return min(cut, sorted_probs.shape[0] - 1)


def nucleus_sample(probs, p, u):
    """Draw a token id from the top-p filtered distribution given u in [0,1)."""
    probs = np.asarray(probs, dtype=np.float64)
    order = nucleus_order(probs)
    sorted_probs = probs[order]
    cut = nucleus_cutoff(sorted_probs, p)
    kept = order[: cut + 1]
    mass = float(np.cumsum(sorted_probs)[cut])
    cq = np.cumsum(probs[kept] / mass)
    j = int(np.searchsorted(cq, u, side="left"))
    j = min(j, kept.shape[0] - 1)
    return int(kept[j])
