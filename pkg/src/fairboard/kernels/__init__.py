"""Hot numeric kernels with two interchangeable backends.

``FAIRBOARD_NUMBA`` selects the backend at import time:
  unset  -> numba if importable, else the numpy/stdlib fallback
  0/off  -> force the fallback
  1/on   -> force numba (ImportError if numba is absent)

Both backends export the same functions with identical semantics; the
test suite runs the kernel contracts against every available backend and
``benchmarks/bench_kernels.py`` times them side by side.
"""

from __future__ import annotations

import os

from . import _numpy

_FLAG = os.environ.get("FAIRBOARD_NUMBA", "").strip().lower()

if _FLAG in ("0", "off", "false", "no"):
    _impl = _numpy
elif _FLAG in ("1", "on", "true", "yes"):
    from . import _numba as _impl  # noqa: F401  (hard requirement, let ImportError surface)
else:
    try:
        from . import _numba as _impl
    except ImportError:
        _impl = _numpy

BACKEND: str = _impl.NAME

crc32c = _impl.crc32c
group_confusion = _impl.group_confusion
pearson_moments = _impl.pearson_moments


def warmup() -> None:
    """Trigger one call per kernel so JIT cost never lands on a request."""
    import numpy as np

    crc32c(b"warmup")
    group_confusion(
        np.array([0.2, 0.8]), np.array([0, 1], dtype=np.int8), np.zeros(2, dtype=np.int64), np.array([0.5])
    )
    pearson_moments(np.array([1.0, 2.0, 3.0]), np.array([2.0, 4.0, 6.0]))
