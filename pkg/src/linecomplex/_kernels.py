"""Random-walk kernels, compiled with numba when available.

Both backends consume the same pre-drawn slot choices, so they return
identical first-return times.  Set ``LINECOMPLEX_DISABLE_NUMBA=1`` to force
the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("LINECOMPLEX_DISABLE_NUMBA", "").strip() not in ("", "0")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


BLOCK = 512


# state convention: pos >= 0 is the current vertex (or distance), -1 escaped,
# -2 already returned


def _radial_block_py(pos, first, back, draws, t0):
    trials, block = draws.shape
    nmax = back.shape[0] - 1
    for j in range(block):
        live = pos >= 0
        if not live.any():
            break
        idx = np.nonzero(live)[0]
        d = pos[idx]
        step_back = draws[idx, j] < back[d]
        d = np.where(step_back, d - 1, d + 1)
        hit = d == 0
        first[idx[hit]] = t0 + j + 1
        d[hit] = -2
        d[d > nmax] = -1
        pos[idx] = d


@njit(cache=True)
def _radial_block_nb(pos, first, back, draws, t0):
    trials, block = draws.shape
    nmax = back.shape[0] - 1
    for i in range(trials):
        d = pos[i]
        if d < 0:
            continue
        for j in range(block):
            if draws[i, j] < back[d]:
                d -= 1
            else:
                d += 1
            if d == 0:
                first[i] = t0 + j + 1
                d = -2
                break
            if d > nmax:
                d = -1
                break
        pos[i] = d


def _graph_block_py(pos, first, nbr, draws, t0):
    trials, block = draws.shape
    for j in range(block):
        live = pos >= 0
        if not live.any():
            break
        idx = np.nonzero(live)[0]
        w = nbr[pos[idx], draws[idx, j]]
        hit = w == 0
        first[idx[hit]] = t0 + j + 1
        w[hit] = -2
        pos[idx] = w


@njit(cache=True)
def _graph_block_nb(pos, first, nbr, draws, t0):
    trials, block = draws.shape
    for i in range(trials):
        v = pos[i]
        if v < 0:
            continue
        for j in range(block):
            v = nbr[v, draws[i, j]]
            if v == 0:
                first[i] = t0 + j + 1
                v = -2
                break
            if v < 0:
                break
        pos[i] = v


def first_returns(kind: str, table: np.ndarray, start: np.ndarray, q: int, trials: int,
                  horizon: int, seed: int, use_numba: bool | None = None) -> np.ndarray:
    """First time each walk is back at vertex/distance 0, or -1 if not by ``horizon``.

    ``kind="radial"``: ``table[d]`` is the number of slots leading back
    from distance ``d``; the walk leaves through a slot drawn uniformly.
    ``kind="graph"``: ``table`` is an ``(n, q)`` neighbour table, ``-1``
    meaning the walk left the explored region for good.
    """
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if kind == "radial":
        kernel = _radial_block_nb if use_numba else _radial_block_py
        table = np.ascontiguousarray(table, dtype=np.int64)
    elif kind == "graph":
        kernel = _graph_block_nb if use_numba else _graph_block_py
        table = np.ascontiguousarray(table, dtype=np.int64)
    else:
        raise ValueError(f"unknown kernel {kind!r}")
    rng = np.random.default_rng(seed)
    pos = np.array(start, dtype=np.int64)
    first = np.full(trials, -1, dtype=np.int64)
    t = 0
    while t < horizon:
        block = min(BLOCK, horizon - t)
        draws = rng.integers(0, q, size=(trials, block), dtype=np.uint8)
        kernel(pos, first, table, draws, t)
        t += block
        if not (pos >= 0).any():
            break
    return first
