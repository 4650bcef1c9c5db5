"""Backtracking enumeration kernels over bit-vector truth tables.

The two hot loops — enumerating table-compatible assignments and
collecting realized designation patterns — are written against plain
numpy arrays so the same source compiles under numba's @njit and also
runs unmodified as pure Python.  The active backend is chosen at import
time: set the environment variable ``NMATRICES_PURE_PYTHON=1`` to force
the pure path; otherwise numba is used when importable.

Plan layout (one entry per formula, in topological order — every
argument precedes the application built from it):

- ``kind[i]``   : -1 for a free leaf (variable), else connective id
- ``arity[i]``  : argument count (0 for leaves)
- ``argidx[i,j]``: plan index of the j-th argument, j < arity[i]
- ``tabflat``   : all tables concatenated, each flattened row-major
- ``taboff[c]`` : start of connective c's table inside ``tabflat``
- ``allowed[i]``: initial candidate bit-vector (constraints pre-applied)
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["BACKEND", "enumerate_assignments_raw", "realized_masks_raw", "backends"]


def _enumerate_impl(kind, arity, argidx, tabflat, taboff, allowed, n_values, max_results):
    """Depth-first enumeration of all compatible assignments.

    Returns an (n_results, n_f) int64 array of value indices, rows in
    canonical order (value indices increase fastest at the last plan
    position).  ``max_results < 0`` means unlimited.
    """
    n_f = kind.shape[0]
    vals = np.zeros(n_f, dtype=np.int64)
    pending = np.zeros(n_f, dtype=np.int64)
    cap = 16
    out = np.empty((cap, n_f), dtype=np.int64)
    count = 0
    if n_f == 0:
        return out[:0]

    level = 0
    m = allowed[0]
    if kind[0] >= 0:
        idx = np.int64(0)
        for j in range(arity[0]):
            idx = idx * n_values + vals[argidx[0, j]]
        m = m & tabflat[taboff[kind[0]] + idx]
    pending[0] = m
    while level >= 0:
        m = pending[level]
        if m == 0:
            level -= 1
            continue
        b = m & (-m)
        pending[level] = m ^ b
        v = 0
        while (b >> v) & 1 == 0:
            v += 1
        vals[level] = v
        if level == n_f - 1:
            if count == cap:
                cap *= 2
                grown = np.empty((cap, n_f), dtype=np.int64)
                grown[:count] = out
                out = grown
            out[count] = vals
            count += 1
            if max_results >= 0 and count >= max_results:
                break
        else:
            level += 1
            m = allowed[level]
            if kind[level] >= 0:
                idx = np.int64(0)
                for j in range(arity[level]):
                    idx = idx * n_values + vals[argidx[level, j]]
                m = m & tabflat[taboff[kind[level]] + idx]
            pending[level] = m
    return out[:count]


def _patterns_impl(kind, arity, argidx, tabflat, taboff, allowed, n_values, des_mask):
    """Designation patterns realized by compatible assignments.

    Pattern bit i is set when plan position i receives a designated
    value.  Returns the sorted int64 array of distinct patterns.
    Requires n_f small enough that a 2**n_f seen-table fits (callers
    enforce the cap).
    """
    n_f = kind.shape[0]
    seen = np.zeros(1 << n_f, dtype=np.bool_)
    if n_f == 0:
        # Only the empty assignment exists; it realizes the empty pattern.
        seen[0] = True
        return np.zeros(1, dtype=np.int64)

    vals = np.zeros(n_f, dtype=np.int64)
    pending = np.zeros(n_f, dtype=np.int64)
    patbits = np.zeros(n_f, dtype=np.int64)
    level = 0
    m = allowed[0]
    if kind[0] >= 0:
        idx = np.int64(0)
        for j in range(arity[0]):
            idx = idx * n_values + vals[argidx[0, j]]
        m = m & tabflat[taboff[kind[0]] + idx]
    pending[0] = m
    while level >= 0:
        m = pending[level]
        if m == 0:
            level -= 1
            continue
        b = m & (-m)
        pending[level] = m ^ b
        v = 0
        while (b >> v) & 1 == 0:
            v += 1
        vals[level] = v
        prefix = patbits[level - 1] if level > 0 else np.int64(0)
        if (des_mask >> v) & 1:
            prefix = prefix | (np.int64(1) << level)
        patbits[level] = prefix
        if level == n_f - 1:
            seen[prefix] = True
        else:
            level += 1
            m = allowed[level]
            if kind[level] >= 0:
                idx = np.int64(0)
                for j in range(arity[level]):
                    idx = idx * n_values + vals[argidx[level, j]]
                m = m & tabflat[taboff[kind[level]] + idx]
            pending[level] = m
    return np.nonzero(seen)[0].astype(np.int64)


def _compile(fn):
    from numba import njit  # deferred so the pure path needs no numba

    return njit(cache=True)(fn)


_PURE = {
    "enumerate": _enumerate_impl,
    "patterns": _patterns_impl,
    "name": "pure",
}

_jit_cache: dict | None = None


def _jit_backend() -> dict | None:
    global _jit_cache
    if _jit_cache is None:
        try:
            _jit_cache = {
                "enumerate": _compile(_enumerate_impl),
                "patterns": _compile(_patterns_impl),
                "name": "numba",
            }
        except ImportError:
            _jit_cache = {}
    return _jit_cache or None


def backends() -> dict[str, dict]:
    """All available backends, keyed by name (for benchmarking)."""
    out = {"pure": _PURE}
    jit = _jit_backend()
    if jit:
        out["numba"] = jit
    return out


if os.environ.get("NMATRICES_PURE_PYTHON"):
    _ACTIVE = _PURE
else:
    _ACTIVE = _jit_backend() or _PURE

BACKEND = _ACTIVE["name"]
enumerate_assignments_raw = _ACTIVE["enumerate"]
realized_masks_raw = _ACTIVE["patterns"]
