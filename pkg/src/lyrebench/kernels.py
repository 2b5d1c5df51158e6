"""Kernel backend selection.

Imports the compiled extension when present, otherwise the numpy fallback.
Set LYREBENCH_KERNELS=python to force the fallback (used by the benchmark
and the parity tests).
"""

import os

from . import _kernels_py

_FORCE = os.environ.get("LYREBENCH_KERNELS", "auto").lower()

if _FORCE == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        if _FORCE == "cython":
            raise
        _impl = _kernels_py

BACKEND = _impl.BACKEND

assign_labels = _impl.assign_labels
ngram_unique_total = _impl.ngram_unique_total
char_ngram_bucket_counts = _impl.char_ngram_bucket_counts
nucleus_sample = _impl.nucleus_sample

# Always from the python module: shared constants and the non-hot helpers
# used by top_p_filter.
FNV_OFFSET = _kernels_py.FNV_OFFSET
FNV_PRIME = _kernels_py.FNV_PRIME
NUCLEUS_EPS = _kernels_py.NUCLEUS_EPS
fnv1a_bytes = _kernels_py.fnv1a_bytes
nucleus_order = _kernels_py.nucleus_order
nucleus_cutoff = _kernels_py.nucleus_cutoff
