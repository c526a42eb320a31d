"""Kernel dispatch: compiled extension if available, pure Python otherwise.

Set CML_PURE_PYTHON=1 to force the fallback (used by the equivalence tests
and the benchmark).  The compiled kernels use int64 arithmetic; inputs within
desk-scale ranges (norms below ~10^14) are safe, and the scalar symbol entry
point transparently falls back to exact Python integers beyond that.
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCE_PURE = os.environ.get("CML_PURE_PYTHON", "") not in ("", "0")

if not _FORCE_PURE:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - build-environment dependent
        _impl = _kernels_py
else:
    _impl = _kernels_py

IMPLEMENTATION: str = _impl.IMPLEMENTATION

#: guard for int64 safety in the compiled scalar symbol
_INT64_SAFE = 1 << 25


def cubic_symbol(a: int, b: int, c: int, d: int) -> int:
    """((a+bw)/(c+dw))_3 as an exponent of w (0..2), or 3 for the value 0."""
    if _impl is not _kernels_py:
        if max(abs(a), abs(b), abs(c), abs(d)) < _INT64_SAFE:
            return _impl.cubic_symbol(a, b, c, d)
        return _kernels_py.cubic_symbol(a, b, c, d)
    return _impl.cubic_symbol(a, b, c, d)


symbol_array = _impl.symbol_array
gauss_prime_sums = _impl.gauss_prime_sums
g3_factored = _impl.g3_factored
a2_pair_sum = _impl.a2_pair_sum

pure = _kernels_py
