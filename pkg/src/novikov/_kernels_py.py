"""NumPy fallback for the path-scanning kernels.

Same signatures and the same floating-point operation order as the compiled
``_kernels`` module: jump times are running sums ``U_n = U_{n-1} + E_n``
starting from 0.0, and barrier tests use the identical expressions, so the
two backends return the same records.

Paths are processed in vectorized blocks of draws; paths that have hit their
barrier drop out of the active set before the next block is drawn.
"""

from __future__ import annotations

import numpy as np

from novikov import rng

_FIRST_BLOCK = 8
_MAX_BLOCK = 1024


def _running_sums(u_prev: np.ndarray, steps: np.ndarray) -> np.ndarray:
    # prepend the carried value so accumulation stays strictly left to right
    acc = np.concatenate([u_prev[:, None], steps], axis=1)
    return np.cumsum(acc, axis=1)[:, 1:]


def _blocks(max_jumps: int):
    done, block = 0, _FIRST_BLOCK
    while done < max_jumps:
        m = min(block, max_jumps - done)
        yield done, m
        done += m
        block = min(2 * block, _MAX_BLOCK)


def interarrivals(master_seed: int, path_index: int, start: int, count: int) -> np.ndarray:
    keys = rng.path_keys(master_seed, [path_index])
    return rng.exponentials(keys, start, count)[0]


def jump_matrix(master_seed: int, first_index: int, count: int, k: int) -> np.ndarray:
    keys = rng.path_keys(master_seed, np.arange(first_index, first_index + count))
    steps = rng.exponentials(keys, 0, k)
    return _running_sums(np.zeros(count), steps)


def scan_lower(master_seed: int, first_index: int, count: int, b: float, max_jumps: int):
    """First n with U_n >= n/(1+b); passage at n/(1+b) with n-1 jumps."""
    keys = rng.path_keys(master_seed, np.arange(first_index, first_index + count))
    scale = 1.0 + b
    passage = np.full(count, np.nan)
    jumps = np.zeros(count, dtype=np.int64)
    hit = np.zeros(count, dtype=bool)
    scanned = np.full(count, max_jumps, dtype=np.int64)
    active = np.arange(count)
    u = np.zeros(count)
    for done, m in _blocks(max_jumps):
        if active.size == 0:
            break
        times = _running_sums(u[active], rng.exponentials(keys[active], done, m))
        n = np.arange(done + 1, done + m + 1, dtype=np.int64)
        barrier = n.astype(np.float64) / scale
        cond = times >= barrier[None, :]
        found = cond.any(axis=1)
        first = cond.argmax(axis=1)[found]
        idx = active[found]
        passage[idx] = barrier[first]
        jumps[idx] = n[first] - 1
        scanned[idx] = n[first]
        hit[idx] = True
        u[active] = times[:, -1]
        active = active[~found]
    return passage, jumps, hit, scanned


def scan_upper(master_seed: int, first_index: int, count: int, b: float, c: float, max_jumps: int):
    """First n with n - (1+b) U_n >= c; passage at U_n with n jumps."""
    keys = rng.path_keys(master_seed, np.arange(first_index, first_index + count))
    scale = 1.0 + b
    passage = np.full(count, np.nan)
    jumps = np.zeros(count, dtype=np.int64)
    hit = np.zeros(count, dtype=bool)
    scanned = np.full(count, max_jumps, dtype=np.int64)
    active = np.arange(count)
    u = np.zeros(count)
    for done, m in _blocks(max_jumps):
        if active.size == 0:
            break
        times = _running_sums(u[active], rng.exponentials(keys[active], done, m))
        n = np.arange(done + 1, done + m + 1, dtype=np.int64)
        cond = (n.astype(np.float64)[None, :] - scale * times) >= c
        found = cond.any(axis=1)
        first = cond.argmax(axis=1)[found]
        idx = active[found]
        passage[idx] = times[found, first]
        jumps[idx] = n[first]
        scanned[idx] = n[first]
        hit[idx] = True
        u[active] = times[:, -1]
        active = active[~found]
    return passage, jumps, hit, scanned


def count_jumps(master_seed: int, first_index: int, count: int, t: float, max_jumps: int):
    """N_t = #{n : U_n <= t}; censored when max_jumps draws all land in [0, t]."""
    keys = rng.path_keys(master_seed, np.arange(first_index, first_index + count))
    jumps = np.full(count, max_jumps, dtype=np.int64)
    censored = np.ones(count, dtype=bool)
    active = np.arange(count)
    u = np.zeros(count)
    for done, m in _blocks(max_jumps):
        if active.size == 0:
            break
        times = _running_sums(u[active], rng.exponentials(keys[active], done, m))
        beyond = times > t
        found = beyond.any(axis=1)
        idx = active[found]
        jumps[idx] = done + beyond.argmax(axis=1)[found]
        censored[idx] = False
        u[active] = times[:, -1]
        active = active[~found]
    return jumps, censored
