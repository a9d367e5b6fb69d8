"""Kernel selector: compiled extension when available, pure Python otherwise.

Set ``RAINBOW_STS_PURE=1`` to force the pure-Python kernels.
"""

from __future__ import annotations

import os

from . import _pykernels

EXHAUSTED = _pykernels.EXHAUSTED
SOLUTION_LIMIT = _pykernels.SOLUTION_LIMIT
NODE_LIMIT = _pykernels.NODE_LIMIT
TIME_LIMIT = _pykernels.TIME_LIMIT

_impl = _pykernels
BACKEND = "python"
if os.environ.get("RAINBOW_STS_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels


def exact_cover(n_cols, rows, primary=None, *, max_nodes=10**9, max_seconds=0.0,
                max_solutions=1, collect=True, backend=None):
    impl = _impl
    if backend == "python":
        impl = _pykernels
    elif backend == "cython":
        from . import _ckernels as impl  # type: ignore[no-redef]
    return impl.exact_cover(int(n_cols), rows, primary, int(max_nodes), float(max_seconds),
                            int(max_solutions), bool(collect))


def codegree_matrix(n, edges, mult, backend=None):
    impl = _impl
    if backend == "python":
        impl = _pykernels
    elif backend == "cython":
        from . import _ckernels as impl  # type: ignore[no-redef]
    return impl.codegree_matrix(int(n), edges, mult)
