"""Counter-based random streams keyed by (master_seed, path_index, draw_index).

Every draw is a pure function of its three coordinates, so any path can be
regenerated in isolation and chunked parallel runs cannot depend on the
order in which workers finish.

Construction (SplitMix64 used as a keyed counter hash):

    stream   = mix64(master_seed)
    key(i)   = mix64(stream + (i + 1) * GOLDEN)
    x(i, k)  = mix64(key(i) + (k + 1) * GOLDEN)
    j        = x >> 12                               # 52 random bits
    u(i, k)  = (j + 0.5) * 2**-52                    # in (0, 1), exact
    E(i, k)  = -log(1 - u)                           # Exp(1), strictly > 0

``1 - u`` is formed exactly as ``((2**52 - 1 - j) + 0.5) * 2**-52``. The
logarithm is ``portable_log``, built from IEEE basic operations and an exact
``frexp`` only, because platform ``log``/``log1p`` implementations disagree
in the last bit. All integer arithmetic is modulo 2**64. The compiled kernel
implements the same recipe in C with the same operation order.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV_2_52 = 2.0**-52
_TOP52 = (1 << 52) - 1

# fdlibm log constants
LN2_HI = 6.93147180369123816490e-01
LN2_LO = 1.90821492927058770002e-10
LG1 = 6.666666666666735130e-01
LG2 = 3.999999999940941908e-01
LG3 = 2.857142874366239149e-01
LG4 = 2.222219843214978396e-01
LG5 = 1.818357216161805012e-01
LG6 = 1.531383769920937332e-01
LG7 = 1.479819860511658591e-01
SQRT_HALF = 0.70710678118654752440

_U64_GOLDEN = np.uint64(GOLDEN)
_U64_M1 = np.uint64(_M1)
_U64_M2 = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S12 = np.uint64(12)
_U64_TOP52 = np.uint64(_TOP52)


def normalize_seed(master_seed: int) -> int:
    """Map any Python int onto the 64-bit seed space (two's complement)."""
    return int(master_seed) & MASK64


def mix64_int(z: int) -> int:
    """Scalar SplitMix64 finalizer on Python ints."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64(z: np.ndarray) -> np.ndarray:
    """Vectorized SplitMix64 finalizer; uint64 arrays wrap silently."""
    z = z ^ (z >> _S30)
    z = z * _U64_M1
    z = z ^ (z >> _S27)
    z = z * _U64_M2
    return z ^ (z >> _S31)


def stream_key(master_seed: int) -> int:
    return mix64_int(normalize_seed(master_seed))


def path_keys(master_seed: int, path_index) -> np.ndarray:
    """Per-path keys for an array (or scalar) of path indices."""
    idx = np.atleast_1d(np.asarray(path_index, dtype=np.uint64))
    stream = np.uint64(stream_key(master_seed))
    return mix64(stream + (idx + np.uint64(1)) * _U64_GOLDEN)


def portable_log(v: np.ndarray) -> np.ndarray:
    """Natural log of positive finite doubles (fdlibm reduction and polynomial).

    Error below one ulp; bit-reproducible wherever IEEE double arithmetic is
    evaluated without contraction.
    """
    mant, k = np.frexp(v)
    low = mant < SQRT_HALF
    mant = np.where(low, mant * 2.0, mant)
    dk = (k - low).astype(np.float64)
    f = mant - 1.0
    s = f / (2.0 + f)
    z = s * s
    w = z * z
    t1 = w * (LG2 + w * (LG4 + w * LG6))
    t2 = z * (LG1 + w * (LG3 + w * (LG5 + w * LG7)))
    r = t2 + t1
    hfsq = 0.5 * f * f
    return dk * LN2_HI - ((hfsq - (s * (hfsq + r) + dk * LN2_LO)) - f)


def _bits52(keys: np.ndarray, start: int, count: int) -> np.ndarray:
    k = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    return mix64(keys[:, None] + k[None, :] * _U64_GOLDEN) >> _S12


def uniforms(keys: np.ndarray, start: int, count: int) -> np.ndarray:
    """Uniforms u(i, k) for k in [start, start + count), shape (len(keys), count)."""
    return (_bits52(keys, start, count).astype(np.float64) + 0.5) * _INV_2_52


def exponentials(keys: np.ndarray, start: int, count: int) -> np.ndarray:
    """Unit-rate exponential interarrivals ``-log(1 - u)``, same shape as ``uniforms``."""
    complement = ((_U64_TOP52 - _bits52(keys, start, count)).astype(np.float64) + 0.5) * _INV_2_52
    return -portable_log(complement)
