# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Bit-for-bit twin of _kernels_py: same accumulation order, same hash, same
tie-breaking.  The parity tests in tests/test_kernels.py hold both backends
to identical outputs.
"""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc, qsort

cnp.import_array()

BACKEND = "cython"

cdef unsigned long long FNV_OFFSET_C = 14695981039346656037ULL
cdef unsigned long long FNV_PRIME_C = 1099511628211ULL
cdef double NUCLEUS_EPS_C = 1e-12


def assign_labels(x, centroids):
    """Index of the nearest centroid per row; ties go to the lowest index."""
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, ::1] cv = np.ascontiguousarray(centroids, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], k = cv.shape[0], d = xv.shape[1]
    if cv.shape[1] != d:
        raise ValueError("points and centroids disagree on dimension")
    labels_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] labels = labels_arr
    cdef Py_ssize_t i, j, t, best
    cdef double dist, diff, best_dist
    for i in range(n):
        best = 0
        best_dist = -1.0
        for j in range(k):
            dist = 0.0
            for t in range(d):
                diff = xv[i, t] - cv[j, t]
                dist += diff * diff
            if best_dist < 0.0 or dist < best_dist:
                best_dist = dist
                best = j
        labels[i] = best
    return labels_arr


cdef int _cmp_u64(const void* a, const void* b) noexcept nogil:
    cdef unsigned long long av = (<const unsigned long long*> a)[0]
    cdef unsigned long long bv = (<const unsigned long long*> b)[0]
    if av < bv:
        return -1
    if av > bv:
        return 1
    return 0


def ngram_unique_total(ids, int n):
    """(unique, total) overlapping n-gram counts over an int id sequence.

    Packs each window into a 64-bit key when the id width allows it (always
    the case for n <= 4 over vocabularies below 2^16); otherwise falls back
    to exact tuple hashing.
    """
    cdef long long[::1] idv = np.ascontiguousarray(ids, dtype=np.int64)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    cdef Py_ssize_t m = idv.shape[0]
    cdef Py_ssize_t total = m - n + 1
    if total <= 0:
        return 0, 0
    cdef long long max_id = 0
    cdef Py_ssize_t i, j
    for i in range(m):
        if idv[i] < 0:
            raise ValueError("ids must be nonnegative")
        if idv[i] > max_id:
            max_id = idv[i]
    cdef int bits = 1
    while (1LL << bits) <= max_id:
        bits += 1
    if bits * n > 64:
        seen = set()
        arr = np.asarray(ids)
        for i in range(total):
            seen.add(tuple(arr[i : i + n].tolist()))
        return len(seen), int(total)

    cdef unsigned long long* keys = <unsigned long long*> malloc(total * sizeof(unsigned long long))
    if keys == NULL:
        raise MemoryError()
    cdef unsigned long long key
    cdef Py_ssize_t unique
    try:
        for i in range(total):
            key = 0
            for j in range(n):
                key = (key << bits) | <unsigned long long> idv[i + j]
            keys[i] = key
        qsort(keys, total, sizeof(unsigned long long), _cmp_u64)
        unique = 1
        for i in range(1, total):
            if keys[i] != keys[i - 1]:
                unique += 1
    finally:
        free(keys)
    return int(unique), int(total)


def char_ngram_bucket_counts(codes, int n_lo, int n_hi, int dim, seed):
    """Histogram of hashed character n-grams; scheme documented in featurize."""
    cdef unsigned int[::1] cv = np.ascontiguousarray(codes, dtype=np.uint32)
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    counts_arr = np.zeros(dim, dtype=np.float64)
    cdef double[::1] counts = counts_arr
    cdef Py_ssize_t m = cv.shape[0]
    cdef unsigned long long seed_u = <unsigned long long> int(seed)
    cdef unsigned long long h, seed_state, prefix
    cdef unsigned int code
    cdef int n, b
    cdef Py_ssize_t start, j

    seed_state = FNV_OFFSET_C
    for b in range(8):
        seed_state = (seed_state ^ ((seed_u >> (8 * b)) & 0xFFULL)) * FNV_PRIME_C

    for n in range(n_lo, n_hi + 1):
        if n < 1 or n > 255:
            raise ValueError(f"n-gram size out of range: {n}")
        if m - n + 1 <= 0:
            continue
        prefix = (seed_state ^ <unsigned long long> n) * FNV_PRIME_C
        for start in range(m - n + 1):
            h = prefix
            for j in range(n):
                code = cv[start + j]
                h = (h ^ (code & 0xFFU)) * FNV_PRIME_C
                h = (h ^ ((code >> 8) & 0xFFU)) * FNV_PRIME_C
                h = (h ^ ((code >> 16) & 0xFFU)) * FNV_PRIME_C
                h = (h ^ ((code >> 24) & 0xFFU)) * FNV_PRIME_C
            counts[<Py_ssize_t> (h % <unsigned long long> dim)] += 1.0
    return counts_arr


cdef struct ProbIdx:
    double prob
    Py_ssize_t idx


cdef int _cmp_prob_desc(const void* a, const void* b) noexcept nogil:
    cdef const ProbIdx* av = <const ProbIdx*> a
    cdef const ProbIdx* bv = <const ProbIdx*> b
    if av.prob > bv.prob:
        return -1
    if av.prob < bv.prob:
        return 1
    if av.idx < bv.idx:
        return -1
    if av.idx > bv.idx:
        return 1
    return 0


def nucleus_sample(probs, double p, double u):
    """Draw a token id from the top-p filtered distribution given u in [0,1)."""
    cdef double[::1] pv = np.ascontiguousarray(probs, dtype=np.float64)
    cdef Py_ssize_t v = pv.shape[0]
    if v == 0:
        raise ValueError("empty distribution")
    cdef ProbIdx* items = <ProbIdx*> malloc(v * sizeof(ProbIdx))
    if items == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, cut
    cdef double cum, mass, acc, threshold
    try:
        for i in range(v):
            items[i].prob = pv[i]
            items[i].idx = i
        qsort(items, v, sizeof(ProbIdx), _cmp_prob_desc)
        threshold = p - NUCLEUS_EPS_C
        cum = 0.0
        cut = v - 1
        for i in range(v):
            cum += items[i].prob
            if cum >= threshold:
                cut = i
                break
        mass = 0.0
        for i in range(cut + 1):
            mass += items[i].prob
        acc = 0.0
        for i in range(cut + 1):
            acc += items[i].prob / mass
            if acc >= u:
                return int(items[i].idx)
        return int(items[cut].idx)
    finally:
        free(items)
