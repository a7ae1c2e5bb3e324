"""Firm-name normalization, edit-distance similarity, and alias grouping.

Deduplication merges every pair of (normalized) names whose similarity
``1 - L/max(|a|,|b|)`` exceeds the threshold, then closes the relation
transitively with a union-find, so the resulting alias groups partition the
raw-name universe and do not depend on input order.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

import numpy as np

from .accel import HAVE_NUMBA, USE_NUMBA, njit

logger = logging.getLogger(__name__)

# trailing legal-form tokens stripped during normalization
LEGAL_SUFFIXES = (
    "corp",
    "corporation",
    "inc",
    "ltd",
    "co",
    "gmbh",
    "有限公司",
    "股份有限公司",
)

_WS = re.compile(r"\s+")


# longest first so 股份有限公司 is not half-eaten by its own suffix
_SUFFIXES_BY_LEN = sorted(LEGAL_SUFFIXES, key=len, reverse=True)


def normalize_name(raw: str) -> str:
    """Case-fold, collapse whitespace, strip trailing legal suffixes.

    Idempotent. If stripping would leave nothing, the case-folded original
    is kept and a warning is logged.
    """
    folded = _WS.sub(" ", raw.casefold()).strip()
    out = folded.rstrip(" .,")
    changed = True
    while changed:
        changed = False
        for suffix in _SUFFIXES_BY_LEN:
            candidate = None
            if out.endswith(" " + suffix):
                candidate = out[: -(len(suffix) + 1)]
            elif not suffix.isascii() and out.endswith(suffix):
                # CJK legal forms attach without whitespace
                candidate = out[: -len(suffix)]
            if candidate is not None:
                candidate = candidate.rstrip(" .,")
                if candidate:
                    out = candidate
                    changed = True
    if not out:
        logger.warning("name %r normalizes to empty; keeping case-fold", raw)
        return folded
    return out


def _levenshtein_codes_py(a, b):
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = np.arange(lb + 1, dtype=np.int64)
    cur = np.empty(lb + 1, dtype=np.int64)
    for i in range(la):
        cur[0] = i + 1
        ca = a[i]
        for j in range(lb):
            cost = 0 if ca == b[j] else 1
            d = prev[j] + cost
            if prev[j + 1] + 1 < d:
                d = prev[j + 1] + 1
            if cur[j] + 1 < d:
                d = cur[j] + 1
            cur[j + 1] = d
        prev, cur = cur, prev
    return int(prev[lb])


if HAVE_NUMBA:
    _levenshtein_codes_jit = njit(_levenshtein_codes_py)
else:  # pragma: no cover
    _levenshtein_codes_jit = _levenshtein_codes_py


def _levenshtein_codes_numpy(a, b):
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    ar = np.arange(lb + 1, dtype=np.int64)
    prev = ar.copy()
    row = np.empty(lb + 1, dtype=np.int64)
    for i in range(la):
        row[0] = i + 1
        np.minimum(prev[1:] + 1, prev[:-1] + (b != a[i]), out=row[1:])
        # propagate insertion chains: row[j] = min_k<=j (row[k] + (j-k))
        np.add(np.minimum.accumulate(row - ar), ar, out=row)
        prev, row = row, prev
    return int(prev[lb])


def _codes(s: str) -> np.ndarray:
    return np.array([ord(ch) for ch in s], dtype=np.int64)


def levenshtein(a: str, b: str) -> int:
    """Minimum insert/delete/substitute count over Unicode scalar values."""
    ca, cb = _codes(a), _codes(b)
    if USE_NUMBA:
        return int(_levenshtein_codes_jit(ca, cb))
    return _levenshtein_codes_numpy(ca, cb)


def name_similarity(a: str, b: str) -> float:
    """Similarity 1 - L/max(|a|,|b|) of the two names after normalization."""
    na, nb = normalize_name(a), normalize_name(b)
    longest = max(len(na), len(nb))
    if longest == 0:
        raise ValueError("similarity undefined: both names empty")
    return 1.0 - levenshtein(na, nb) / longest


@dataclass(frozen=True)
class AliasGroup:
    members: frozenset[str]  # raw names
    canonical: str


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            # root at the smaller index keeps merges order-independent
            if rj < ri:
                ri, rj = rj, ri
            self.parent[rj] = ri


def _candidate_pairs_blocked(norms: list[str]):
    """Pairs sharing a first character or any character 2-gram."""
    buckets: dict[str, list[int]] = {}
    for idx, s in enumerate(norms):
        keys = {s[:1]} | {s[k:k + 2] for k in range(len(s) - 1)}
        for key in keys:
            buckets.setdefault(key, []).append(idx)
    pairs = set()
    for members in buckets.values():
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                pairs.add((members[x], members[y]))
    return sorted(pairs)


def group_entities(
    names: list[str],
    threshold: float = 0.6,
    blocking: bool = False,
) -> list[AliasGroup]:
    """Partition raw names into alias groups via similarity > threshold.

    Canonical member: most frequent raw name in the group (frequency counted
    over the input list), ties broken by longest then lexicographically
    smallest. ``blocking`` restricts the O(n^2) comparison to pairs sharing
    a first character or 2-gram; exact whenever no cross-block pair clears
    the threshold.
    """
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    freq: dict[str, int] = {}
    for name in names:
        freq[name] = freq.get(name, 0) + 1
    uniq = sorted(freq)  # sort makes the result input-order independent
    norms = [normalize_name(u) for u in uniq]
    n = len(uniq)
    uf = _UnionFind(n)

    # identical normal forms always merge, regardless of threshold
    by_norm: dict[str, int] = {}
    for idx, norm in enumerate(norms):
        if norm in by_norm:
            uf.union(by_norm[norm], idx)
        else:
            by_norm[norm] = idx

    if blocking:
        pair_iter = _candidate_pairs_blocked(norms)
    else:
        pair_iter = ((x, y) for x in range(n) for y in range(x + 1, n))
    code_cache = [_codes(s) for s in norms]
    for x, y in pair_iter:
        if uf.find(x) == uf.find(y):
            continue
        sa, sb = norms[x], norms[y]
        longest = max(len(sa), len(sb))
        if longest == 0:
            continue
        # distance at least the length gap; skip pairs that cannot clear
        if abs(len(sa) - len(sb)) / longest >= 1 - threshold:
            continue
        if USE_NUMBA:
            dist = _levenshtein_codes_jit(code_cache[x], code_cache[y])
        else:
            dist = _levenshtein_codes_numpy(code_cache[x], code_cache[y])
        if 1.0 - dist / longest > threshold:
            uf.union(x, y)

    clusters: dict[int, list[str]] = {}
    for idx, name in enumerate(uniq):
        clusters.setdefault(uf.find(idx), []).append(name)
    groups = []
    for members in clusters.values():
        canonical = max(members, key=lambda s: (freq[s], len(s), _revlex(s)))
        groups.append(AliasGroup(frozenset(members), canonical))
    groups.sort(key=lambda g: g.canonical)
    return groups


def _revlex(s: str):
    # max() on this key picks the lexicographically smallest string
    return tuple(-ord(ch) for ch in s)
