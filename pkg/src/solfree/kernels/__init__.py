"""Hot integer kernels with backend selection at import time.

Preference order: compiled Cython extension, then numpy, then pure Python.
Set ``SOLFREE_BACKEND=pure`` (or ``numpy``/``cython``) to force a backend.
Every path is exact: int64 fast paths are guarded by a worst-case bound on
the convolution entries, and larger inputs are limb-split into int64-safe
convolutions (or handled in pure big-integer arithmetic).
"""

from __future__ import annotations

import os

from . import _pure

_INT64_SAFE = 2**62
_LIMB_BASE = 2**20

try:
    import numpy as _np
except ImportError:  # pragma: no cover - numpy is a hard dependency elsewhere
    _np = None

try:
    from . import _core
except ImportError:
    _core = None

_forced = os.environ.get("SOLFREE_BACKEND", "").strip().lower()
if _forced == "cython" and _core is None:
    raise ImportError("SOLFREE_BACKEND=cython but the compiled kernel is missing")
if _forced == "numpy" and _np is None:
    raise ImportError("SOLFREE_BACKEND=numpy but numpy is missing")

if _forced == "pure":
    _backend = None
elif _forced == "cython":
    _backend = "cython"
elif _forced == "numpy":
    _backend = "numpy"
elif _core is not None:
    _backend = "cython"
elif _np is not None:
    _backend = "numpy"
else:
    _backend = None

BACKEND = _backend or "pure"


def _convolve_int64(a, b):
    """Dispatch an int64-safe convolution to the selected fast backend."""
    if _backend == "cython":
        import array

        return _core.convolve_cyclic_int64(array.array("q", a), array.array("q", b))
    # numpy: linear convolution folded back to cyclic
    n = len(a)
    lin = _np.convolve(
        _np.asarray(a, dtype=_np.int64), _np.asarray(b, dtype=_np.int64)
    )
    out = lin[:n].copy()
    out[: n - 1] += lin[n:]
    return out.tolist()


def _limbs(values, count):
    """Split non-negative ints into `count` base-2^20 limbs (little endian)."""
    rows = []
    vals = list(values)
    for _ in range(count):
        rows.append([v % _LIMB_BASE for v in vals])
        vals = [v // _LIMB_BASE for v in vals]
    return rows


def convolve_cyclic(a, b):
    """Exact cyclic convolution of two equal-length integer sequences."""
    n = len(a)
    if len(b) != n:
        raise ValueError("length mismatch")
    if n == 0:
        return []
    amax = max(map(abs, a), default=0)
    bmax = max(map(abs, b), default=0)
    if amax == 0 or bmax == 0:
        return [0] * n
    if _backend is None:
        return _pure.convolve_cyclic(a, b)
    if n * amax * bmax < _INT64_SAFE:
        return _convolve_int64(a, b)
    if min(a) >= 0 and min(b) >= 0:
        # limb-split into int64-safe convolutions and recombine exactly
        ka = _limb_count(amax)
        kb = _limb_count(bmax)
        if n * _LIMB_BASE * _LIMB_BASE * 1 < _INT64_SAFE:
            la = _limbs(a, ka)
            lb = _limbs(b, kb)
            out = [0] * n
            for i, ra in enumerate(la):
                for j, rb in enumerate(lb):
                    part = _convolve_int64(ra, rb)
                    shift = _LIMB_BASE ** (i + j)
                    for k in range(n):
                        pk = part[k]
                        if pk:
                            out[k] += pk * shift
                    del part
            return out
    return _pure.convolve_cyclic(a, b)


def _limb_count(maxval):
    count = 1
    while _LIMB_BASE**count <= maxval:
        count += 1
    return count


def convolve_many(vectors):
    """Iterated cyclic convolution of a non-empty list of integer vectors."""
    vectors = list(vectors)
    acc = list(vectors[0])
    for vec in vectors[1:]:
        acc = convolve_cyclic(acc, vec)
    return acc


def u2_fourth_power(values):
    """Quadruple-sum fourth power of the U^2 norm (O(m^3) oracle path)."""
    if _backend == "cython":
        import array

        return _core.u2_fourth_power(array.array("d", [float(v) for v in values]))
    return _pure.u2_fourth_power([float(v) for v in values])
