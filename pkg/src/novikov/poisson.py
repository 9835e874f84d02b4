"""Exact simulation of a standard Poisson process and first-passage detection.

Between jumps ``X_t = N_t - (1+b) t`` moves linearly, so barrier crossings are
located in closed form at the jump epochs and no time discretization enters:

* lower barrier (``b > 0``): X creeps down continuously and reaches -1 at
  ``n/(1+b)`` for the first n with ``U_n >= n/(1+b)``; then ``N = n - 1``.
* upper barrier (``-1 < b < 0``): X only moves up by jumping, so it first
  reaches ``c`` at the first jump epoch ``U_n`` with ``n - (1+b) U_n >= c``.

Per-path functions (``hit_lower``, ``hit_upper``) work on a ``PoissonPath``;
the batch function ``simulate`` runs the compiled (or NumPy) kernel over
fixed-size chunks of path indices. Both produce identical numbers for the
same seed.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence, TextIO, TypeVar, Union

import numpy as np

from novikov import rng
from novikov._backend import kernels

DEFAULT_MAX_JUMPS = 10_000_000
# fixed chunking: results never depend on the worker count
CHUNK_SIZE = 1 << 16


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    path_index: int = 0

    def __post_init__(self):
        if self.path_index < 0:
            raise ValueError("path_index must be nonnegative")


@dataclass(frozen=True)
class LowerBarrier:
    """Stop when ``N_t - (1+b) t`` first equals -1 (requires ``b > 0``)."""

    b: float

    def __post_init__(self):
        if not (math.isfinite(self.b) and self.b > 0):
            raise ValueError(f"lower barrier needs b > 0, got {self.b!r}")


@dataclass(frozen=True)
class UpperBarrier:
    """Stop when ``N_t - (1+b) t`` first reaches ``c`` (requires ``-1 < b < 0 < c``)."""

    b: float
    c: float

    def __post_init__(self):
        if not -1.0 < self.b < 0.0:
            raise ValueError(f"upper barrier needs -1 < b < 0, got {self.b!r}")
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError(f"upper barrier needs c > 0, got {self.c!r}")


@dataclass(frozen=True)
class FixedHorizon:
    """Deterministic stopping at ``t0``."""

    t0: float

    def __post_init__(self):
        if not (math.isfinite(self.t0) and self.t0 >= 0):
            raise ValueError(f"horizon must be finite and >= 0, got {self.t0!r}")


Stopping = Union[LowerBarrier, UpperBarrier, FixedHorizon]


@dataclass(frozen=True)
class StoppingRecord:
    """Outcome of one first-passage scan.

    For censored records (``hit`` false) ``passage_time`` is NaN and
    ``jumps_at_passage`` carries no meaning.
    """

    passage_time: float
    jumps_at_passage: int
    hit: bool
    jumps_scanned: int


class PoissonPath:
    """Jump times ``U_1 < U_2 < ...`` of a unit-rate Poisson process.

    Seeded paths are generated lazily from their ``SeedSpec`` and extended on
    demand. Explicit paths (``from_jump_times``) have finitely many jumps;
    beyond the last one ``jump_time`` returns ``inf``.
    """

    def __init__(self, seed: SeedSpec, max_jumps: int = DEFAULT_MAX_JUMPS):
        self.seed = seed
        self.max_jumps = int(max_jumps)
        self._times = np.empty(0)
        self._finite = False

    @classmethod
    def from_jump_times(cls, times: Sequence[float]) -> "PoissonPath":
        arr = np.asarray(times, dtype=np.float64)
        if arr.ndim != 1 or (arr.size and (arr[0] <= 0 or np.any(np.diff(arr) <= 0))):
            raise ValueError("jump times must be positive and strictly increasing")
        path = cls.__new__(cls)
        path.seed = None
        path.max_jumps = arr.size
        path._times = arr
        path._finite = True
        return path

    def __repr__(self):
        src = "explicit" if self._finite else f"{self.seed}"
        return f"PoissonPath({src}, generated={self._times.size})"

    def _extend(self, n: int) -> None:
        have = self._times.size
        if n <= have or self._finite:
            return
        want = min(max(n, 2 * have, 64), self.max_jumps)
        if want <= have:
            return
        steps = kernels.interarrivals(self.seed.master_seed, self.seed.path_index, have, want - have)
        last = self._times[-1] if have else 0.0
        # left-to-right accumulation, same as the kernels' running sum
        new = np.cumsum(np.concatenate([[last], steps]))[1:]
        self._times = np.concatenate([self._times, new])

    def jump_time(self, n: int) -> float:
        """``U_n`` for ``n >= 1``."""
        if n < 1:
            raise ValueError("jump numbering starts at 1")
        self._extend(n)
        if n > self._times.size:
            if self._finite:
                return math.inf
            raise IndexError(f"jump {n} exceeds max_jumps={self.max_jumps}")
        return float(self._times[n - 1])

    def jump_times(self, n: int) -> np.ndarray:
        """First ``n`` jump times (fewer for an exhausted explicit path)."""
        self._extend(n)
        return self._times[:n].copy()

    def count_until(self, t: float) -> int:
        """``N_t``, the number of jumps in ``[0, t]``."""
        while not self._finite and (self._times.size == 0 or self._times[-1] <= t):
            if self._times.size >= self.max_jumps:
                raise IndexError("path exhausted before reaching t")
            self._extend(self._times.size + 1)
        return int(np.searchsorted(self._times, t, side="right"))


def generate_path(seed: SeedSpec, max_jumps: int = DEFAULT_MAX_JUMPS) -> PoissonPath:
    return PoissonPath(seed, max_jumps=max_jumps)


def _scan_limit(path: PoissonPath, max_jumps: int) -> int:
    if max_jumps < 1:
        raise ValueError("max_jumps must be >= 1")
    return max_jumps if not path._finite else min(max_jumps, path.max_jumps + 1)


def hit_lower(b: float, path: PoissonPath, max_jumps: int = DEFAULT_MAX_JUMPS) -> StoppingRecord:
    """Passage of ``N_t - (1+b) t`` to -1 (``b > 0``)."""
    LowerBarrier(b)
    scale = 1.0 + b
    limit = _scan_limit(path, max_jumps)
    for n in range(1, limit + 1):
        barrier = float(n) / scale
        if path.jump_time(n) >= barrier:
            return StoppingRecord(barrier, n - 1, True, n)
    return StoppingRecord(math.nan, 0, False, limit)


def hit_upper(b: float, c: float, path: PoissonPath, max_jumps: int = DEFAULT_MAX_JUMPS) -> StoppingRecord:
    """Passage of ``N_t - (1+b) t`` above ``c`` (``-1 < b < 0``, ``c > 0``)."""
    UpperBarrier(b, c)
    scale = 1.0 + b
    limit = _scan_limit(path, max_jumps)
    for n in range(1, limit + 1):
        u = path.jump_time(n)
        if math.isinf(u):
            break
        if float(n) - scale * u >= c:
            return StoppingRecord(u, n, True, n)
    return StoppingRecord(math.nan, 0, False, limit)


def grid_oracle_passage(
    b: float,
    barrier: Literal["lower", "upper"],
    c: float,
    path: PoissonPath,
    dt: float,
    horizon: float = 1e3,
) -> StoppingRecord:
    """Brute-force passage time on the grid ``k * dt``.

    Test fixture only: evaluates ``N_t - (1+b) t`` at every grid time and
    returns the first one satisfying the barrier condition, with the jump
    count there. Agrees with the exact detectors up to one grid step except
    when a jump lands within ``dt`` after the true passage.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if barrier not in ("lower", "upper"):
        raise ValueError("barrier must be 'lower' or 'upper'")
    scale = 1.0 + b
    window = 1 << 16
    k0 = 0
    while k0 * dt <= horizon:
        t = np.arange(k0, k0 + window, dtype=np.float64) * dt
        if not path._finite:
            path.count_until(float(t[-1]))
        n = np.searchsorted(path._times, t, side="right")
        x = n - scale * t
        cond = x <= -1.0 if barrier == "lower" else x >= c
        cond &= t <= horizon
        if cond.any():
            k = int(cond.argmax())
            return StoppingRecord(float(t[k]), int(n[k]), True, int(n[k]))
        k0 += window
    return StoppingRecord(math.nan, 0, False, path._times.size)


@dataclass
class PassageBatch:
    """Stopping records for the consecutive path indices ``first_index, first_index+1, ...``."""

    first_index: int
    passage_time: np.ndarray
    jumps_at_passage: np.ndarray
    hit: np.ndarray
    jumps_scanned: np.ndarray

    def __len__(self) -> int:
        return self.hit.size

    @property
    def path_index(self) -> np.ndarray:
        return self.first_index + np.arange(len(self), dtype=np.int64)

    @property
    def n_censored(self) -> int:
        return int(np.count_nonzero(~self.hit))

    def hits(self) -> "PassageBatch":
        """Sub-batch of the paths that reached their stopping time (indices no longer consecutive)."""
        m = self.hit
        return PassageBatch(
            self.first_index, self.passage_time[m], self.jumps_at_passage[m], self.hit[m], self.jumps_scanned[m]
        )

    def record(self, i: int) -> StoppingRecord:
        return StoppingRecord(
            float(self.passage_time[i]), int(self.jumps_at_passage[i]), bool(self.hit[i]), int(self.jumps_scanned[i])
        )

    @classmethod
    def concat(cls, parts: Sequence["PassageBatch"]) -> "PassageBatch":
        return cls(
            parts[0].first_index,
            np.concatenate([p.passage_time for p in parts]),
            np.concatenate([p.jumps_at_passage for p in parts]),
            np.concatenate([p.hit for p in parts]),
            np.concatenate([p.jumps_scanned for p in parts]),
        )


T = TypeVar("T")


def map_chunks(
    fn: Callable[[int, int], T], n_paths: int, first_index: int = 0, workers: int = 1
) -> list[T]:
    """Apply ``fn(start, count)`` over fixed chunks of path indices, results in index order."""
    stop = first_index + n_paths
    tasks = [(s, min(CHUNK_SIZE, stop - s)) for s in range(first_index, stop, CHUNK_SIZE)]
    if workers <= 1 or len(tasks) <= 1:
        return [fn(s, n) for s, n in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda task: fn(*task), tasks))


def _simulate_chunk(stopping: Stopping, master_seed: int, start: int, count: int, max_jumps: int) -> PassageBatch:
    if isinstance(stopping, LowerBarrier):
        t, n, hit, scanned = kernels.scan_lower(master_seed, start, count, stopping.b, max_jumps)
    elif isinstance(stopping, UpperBarrier):
        t, n, hit, scanned = kernels.scan_upper(master_seed, start, count, stopping.b, stopping.c, max_jumps)
    elif isinstance(stopping, FixedHorizon):
        n, censored = kernels.count_jumps(master_seed, start, count, stopping.t0, max_jumps)
        hit = ~censored
        t = np.where(hit, stopping.t0, np.nan)
        scanned = np.where(hit, n + 1, max_jumps)
    else:
        raise TypeError(f"unsupported stopping rule {stopping!r}")
    return PassageBatch(start, t, n, hit, scanned)


def simulate(
    stopping: Stopping,
    n_paths: int,
    master_seed: int,
    *,
    max_jumps: int = DEFAULT_MAX_JUMPS,
    first_index: int = 0,
    workers: int = 1,
) -> PassageBatch:
    """Stopping records for paths ``first_index .. first_index + n_paths - 1``."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    parts = map_chunks(
        lambda s, n: _simulate_chunk(stopping, master_seed, s, n, max_jumps), n_paths, first_index, workers
    )
    return PassageBatch.concat(parts)


def simulate_jump_times(k: int, n_paths: int, master_seed: int, *, first_index: int = 0, workers: int = 1) -> np.ndarray:
    """Matrix of the first ``k`` jump times, one row per path."""
    parts = map_chunks(lambda s, n: kernels.jump_matrix(master_seed, s, n, k), n_paths, first_index, workers)
    return np.concatenate(parts, axis=0)


def dump_paths_csv(fp: TextIO, batch: PassageBatch, master_seed: int, limit: int | None = None) -> int:
    """Write ``path_index,n,U_n`` rows for the jumps each path examined.

    Returns the number of rows written. ``limit`` caps the number of paths.
    """
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["path_index", "n", "U_n"])
    rows = 0
    count = len(batch) if limit is None else min(limit, len(batch))
    for i in range(count):
        index = batch.first_index + i
        n = int(batch.jumps_scanned[i])
        times = PoissonPath(SeedSpec(master_seed, index), max_jumps=max(n, 1)).jump_times(n)
        for j, u in enumerate(times, start=1):
            writer.writerow([index, j, repr(float(u))])
        rows += times.size
    return rows


def stream_description() -> dict:
    """Provenance block describing how paths are derived from the master seed."""
    return {
        "generator": "splitmix64-counter",
        "key": "mix64(mix64(seed) + (path_index+1)*0x9E3779B97F4A7C15)",
        "draw": "mix64(key + (k+1)*0x9E3779B97F4A7C15) >> 12",
        "interarrival": "-log(1-u), fdlibm log from IEEE basic ops",
        "chunk_size": CHUNK_SIZE,
        "golden_gamma": hex(rng.GOLDEN),
    }
