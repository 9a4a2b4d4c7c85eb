"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The planner runs a cost-to-goal sweep every tick of every episode, and the GP
destructive-testing loop runs tens of thousands of episodes, so this sweep is
where nearly all simulator time goes. Both implementations use the same
scan-min Dijkstra (pop lowest index on ties, relax N,E,S,W in that order) so
their float64 outputs are bit-identical; tests assert that.

Path selection: env var NEUROSIS_NUMBA=1 forces the jit path, =0 forces the
numpy path, unset picks numba when importable. `benchmarks/bench_kernels.py`
compares the two.
"""

from __future__ import annotations

import os

import numpy as np

INF = np.inf


def _sweep_py(cost, blocked, src, width):
    """Reference sweep; the numba path compiles exactly this function.

    cost[i] is paid on *entering* cell i. dist[i] is the cheapest sum of
    entered-cell costs from cell i to `src` (so sweeping from the goal yields
    cost-to-goal for every cell). blocked cells never relax.
    """
    n = cost.shape[0]
    dist = np.full(n, INF)
    done = np.zeros(n, dtype=np.bool_)
    if blocked[src]:
        return dist
    dist[src] = 0.0
    for _ in range(n):
        u = -1
        best = INF
        for i in range(n):
            if not done[i] and dist[i] < best:
                best = dist[i]
                u = i
        if u < 0:
            break
        done[u] = True
        cand = dist[u] + cost[u]
        row = u // width
        # N, E, S, W relative to (x, y) with y increasing northwards
        v = u + width
        if v < n and not blocked[v] and cand < dist[v]:
            dist[v] = cand
        v = u + 1
        if v // width == row and not blocked[v] and cand < dist[v]:
            dist[v] = cand
        v = u - width
        if v >= 0 and not blocked[v] and cand < dist[v]:
            dist[v] = cand
        v = u - 1
        if v >= 0 and v // width == row and not blocked[v] and cand < dist[v]:
            dist[v] = cand
    return dist


def _sweep_np(cost, blocked, src, width):
    """Numpy fallback: same pop order and relaxations as `_sweep_py`."""
    n = cost.shape[0]
    dist = np.full(n, INF)
    if blocked[src]:
        return dist
    dist[src] = 0.0
    open_dist = dist.copy()
    for _ in range(n):
        u = int(np.argmin(open_dist))
        if open_dist[u] == INF:
            break
        open_dist[u] = INF
        cand = dist[u] + cost[u]
        row = u // width
        for v in (u + width, u + 1, u - width, u - 1):
            if v < 0 or v >= n:
                continue
            if abs(v - u) == 1 and v // width != row:
                continue
            if not blocked[v] and cand < dist[v]:
                dist[v] = cand
                open_dist[v] = cand
    return dist


def _pick_impl():
    flag = os.environ.get("NEUROSIS_NUMBA", "").strip()
    if flag == "0":
        return _sweep_np, False
    try:
        from numba import njit
    except ImportError:
        if flag == "1":
            raise RuntimeError("NEUROSIS_NUMBA=1 but numba is not importable")
        return _sweep_np, False
    jitted = njit(cache=True)(_sweep_py)
    return jitted, True


_sweep_impl, USING_NUMBA = _pick_impl()


def value_sweep(cost: np.ndarray, blocked: np.ndarray, src_x: int, src_y: int) -> np.ndarray:
    """Cost-to-`src` for every cell of an (h, w) grid; INF where unreachable.

    `cost` and `blocked` are (h, w); the result is (h, w). Entering `src`
    itself is free by definition (paths pay for cells they enter, and a path
    ending at src paid for src when it stepped in; the sweep accounts for that
    by charging cost[u] on expansion).
    """
    h, w = cost.shape
    flat = _sweep_impl(
        np.ascontiguousarray(cost, dtype=np.float64).ravel(),
        np.ascontiguousarray(blocked, dtype=np.bool_).ravel(),
        src_y * w + src_x,
        w,
    )
    return flat.reshape(h, w)


def step_distance(blocked: np.ndarray, src_x: int, src_y: int) -> np.ndarray:
    """Unit-step distance field (value_sweep with unit costs)."""
    return value_sweep(np.ones(blocked.shape), blocked, src_x, src_y)
