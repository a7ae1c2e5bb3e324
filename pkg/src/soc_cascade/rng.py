"""Counter-based deterministic random numbers.

All randomness in the package flows through a SplitMix64-style hash of a
``(seed, a, b, c)`` key, so every draw is addressable: the value for firm
*i* at step *t* does not depend on evaluation order, worker count, or how
many other draws already happened. The same construction exists three
times — plain Python, vectorized uint64 numpy, and a uint64-only numba
helper — and all of them produce bit-identical doubles in [0, 1).
"""

import numpy as np

from .accel import HAVE_NUMBA, njit

GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
MASK64 = 0xFFFFFFFFFFFFFFFF
# 2^-53: doubles are built from the top 53 bits of the hash
_INV53 = 1.0 / 9007199254740992.0


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * _MIX1 & MASK64
    z = (z ^ (z >> 27)) * _MIX2 & MASK64
    return z ^ (z >> 31)


def key_hash(seed: int, a: int = 0, b: int = 0, c: int = 0) -> int:
    """64-bit hash of the four-component integer key."""
    h = _mix64((seed + GOLDEN) & MASK64)
    for k in (a, b, c):
        h = _mix64((h + k * GOLDEN) & MASK64)
    return h


def uniform(seed: int, a: int = 0, b: int = 0, c: int = 0) -> float:
    """One double in [0, 1) for key (seed, a, b, c)."""
    return (key_hash(seed, a, b, c) >> 11) * _INV53


def _mix64_np(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def uniform_array(seed: int, a: int, units, stream: int = 0) -> np.ndarray:
    """Vectorized draws keyed (seed, a, unit, stream) over an array of units."""
    g = np.uint64(GOLDEN)
    with np.errstate(over="ignore"):  # uint64 wraparound is the hash
        h = _mix64_np(np.uint64(seed & MASK64) + g)
        h = _mix64_np(h + np.uint64(a & MASK64) * g)
        u = np.asarray(units, dtype=np.uint64)
        h = _mix64_np(h + u * g)
        h = _mix64_np(h + np.uint64(stream & MASK64) * g)
        return (h >> np.uint64(11)).astype(np.float64) * _INV53


def _uniform_u64(seed, a, b, c):
    # uint64-only arithmetic: numba promotes mixed int64/uint64 to float64
    g = np.uint64(GOLDEN)
    m1 = np.uint64(_MIX1)
    m2 = np.uint64(_MIX2)
    h = seed + g
    h = (h ^ (h >> np.uint64(30))) * m1
    h = (h ^ (h >> np.uint64(27))) * m2
    h = h ^ (h >> np.uint64(31))
    for k in (a, b, c):
        h = h + k * g
        h = (h ^ (h >> np.uint64(30))) * m1
        h = (h ^ (h >> np.uint64(27))) * m2
        h = h ^ (h >> np.uint64(31))
    return np.float64(h >> np.uint64(11)) * _INV53


if HAVE_NUMBA:
    uniform_u64 = njit(_uniform_u64)
else:  # pragma: no cover
    uniform_u64 = _uniform_u64


def shuffled(n: int, seed: int, stream: int = 0) -> np.ndarray:
    """Deterministic permutation of range(n) via Fisher-Yates on keyed draws."""
    order = np.arange(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        j = int(uniform(seed, stream, i) * (i + 1))
        order[i], order[j] = order[j], order[i]
    return order


def sample_without_replacement(n: int, k: int, seed: int, stream: int = 0) -> list:
    """First k entries of the keyed partial shuffle of range(n)."""
    if k > n:
        raise ValueError(f"cannot sample {k} from {n} items")
    order = np.arange(n, dtype=np.int64)
    for i in range(k):
        j = i + int(uniform(seed, stream, i) * (n - i))
        order[i], order[j] = order[j], order[i]
    return [int(v) for v in order[:k]]
