"""Undirected simple-graph model of a firm cooperation network.

Firms carry a registered capital (unit: ten-thousand CNY) and its log
transform; the topology lives in CSR-style sorted adjacency arrays and is
immutable after construction, so any number of workers may read one
network concurrently.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np


class GraphConstructionError(ValueError):
    """Raised for inputs that cannot form a valid network."""


def log_capital(capital: float) -> float:
    """ln(1 + capital); the +1 keeps zero-capital firms finite at 0."""
    if capital < 0:
        raise GraphConstructionError(f"negative registered capital: {capital}")
    return math.log1p(capital)


@dataclass(frozen=True)
class Firm:
    id: int
    canonical_name: str
    aliases: frozenset[str]
    registered_capital: float

    def __post_init__(self):
        if not self.canonical_name:
            raise GraphConstructionError("firm name must be non-empty")
        if self.canonical_name not in self.aliases:
            object.__setattr__(
                self, "aliases", self.aliases | {self.canonical_name}
            )
        if self.registered_capital < 0:
            raise GraphConstructionError(
                f"negative capital for {self.canonical_name!r}"
            )

    @property
    def log_capital(self) -> float:
        return log_capital(self.registered_capital)


@dataclass(frozen=True)
class SupplyNetwork:
    """Immutable undirected simple graph over dense firm ids 0..n-1."""

    firms: tuple[Firm, ...]
    indptr: np.ndarray  # int64, len n+1
    indices: np.ndarray  # int64, sorted neighbor ids per row
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.firms)

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def degree(self, i: int) -> int:
        return int(self.indptr[i + 1] - self.indptr[i])

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def log_capitals(self) -> np.ndarray:
        if "logcap" not in self._cache:
            self._cache["logcap"] = np.array(
                [f.log_capital for f in self.firms], dtype=np.float64
            )
        return self._cache["logcap"]

    @property
    def capitals(self) -> np.ndarray:
        return np.array([f.registered_capital for f in self.firms])

    @property
    def edge_dst(self) -> np.ndarray:
        """Row id of each CSR slot (the node each directed slot points into)."""
        if "edge_dst" not in self._cache:
            self._cache["edge_dst"] = np.repeat(
                np.arange(self.n_nodes, dtype=np.int64), self.degrees
            )
        return self._cache["edge_dst"]

    def edge_set(self) -> set[tuple[int, int]]:
        return {
            (int(i), int(j))
            for i in range(self.n_nodes)
            for j in self.neighbors(i)
            if i < j
        }

    def names(self) -> list[str]:
        return [f.canonical_name for f in self.firms]


def _build_csr(n: int, pairs: set[tuple[int, int]]):
    counts = np.zeros(n, dtype=np.int64)
    for i, j in pairs:
        counts[i] += 1
        counts[j] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int64)
    fill = indptr[:-1].copy()
    for i, j in sorted(pairs):
        indices[fill[i]] = j
        fill[i] += 1
        indices[fill[j]] = i
        fill[j] += 1
    # rows already receive ascending neighbors from the sorted pair walk for
    # the i-side only; sort each row to cover the j-side insertions
    for v in range(n):
        indices[indptr[v]:indptr[v + 1]].sort()
    return indptr, indices


def from_edge_list(
    firms: list[tuple[str, float]],
    edges: list[tuple[str, str]],
) -> tuple[SupplyNetwork, int]:
    """Build a network from (name, capital) rows and name-pair edges.

    Duplicate edges collapse to one, self-loops are dropped (entity merging
    upstream is expected to create them), and the dropped-loop count is
    returned alongside the network.
    """
    ids: dict[str, int] = {}
    firm_objs: list[Firm] = []
    for name, capital in firms:
        if name in ids:
            raise GraphConstructionError(f"duplicate firm name: {name!r}")
        ids[name] = len(firm_objs)
        firm_objs.append(
            Firm(
                id=len(firm_objs),
                canonical_name=name,
                aliases=frozenset({name}),
                registered_capital=float(capital),
            )
        )
    pairs: set[tuple[int, int]] = set()
    dropped_self_loops = 0
    for a, b in edges:
        for endpoint in (a, b):
            if endpoint not in ids:
                raise GraphConstructionError(
                    f"edge endpoint {endpoint!r} is not a declared firm"
                )
        i, j = ids[a], ids[b]
        if i == j:
            dropped_self_loops += 1
            continue
        pairs.add((min(i, j), max(i, j)))
    indptr, indices = _build_csr(len(firm_objs), pairs)
    return SupplyNetwork(tuple(firm_objs), indptr, indices), dropped_self_loops


def build_network_from_ids(
    firms: list[Firm], pairs: set[tuple[int, int]]
) -> SupplyNetwork:
    """Assemble a network from pre-deduplicated id pairs (i < j, no loops)."""
    indptr, indices = _build_csr(len(firms), pairs)
    return SupplyNetwork(tuple(firms), indptr, indices)


def connected_components(net: SupplyNetwork) -> list[list[int]]:
    """Components as sorted id lists, ordered by smallest contained id."""
    n = net.n_nodes
    seen = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in net.neighbors(v):
                if not seen[w]:
                    seen[w] = True
                    comp.append(int(w))
                    queue.append(int(w))
        comp.sort()
        comps.append(comp)
    return comps


def is_connected(net: SupplyNetwork) -> bool:
    return net.n_nodes > 0 and len(connected_components(net)) == 1


def induced_subgraph(net: SupplyNetwork, nodes: list[int]) -> SupplyNetwork:
    """Subgraph on ``nodes`` with ids re-densified in ascending old-id order."""
    nodes = sorted(nodes)
    remap = {old: new for new, old in enumerate(nodes)}
    firms = []
    for new, old in enumerate(nodes):
        f = net.firms[old]
        firms.append(
            Firm(
                id=new,
                canonical_name=f.canonical_name,
                aliases=f.aliases,
                registered_capital=f.registered_capital,
            )
        )
    pairs = set()
    for old in nodes:
        for w in net.neighbors(old):
            w = int(w)
            if w in remap and old < w:
                pairs.add((remap[old], remap[w]))
    return build_network_from_ids(firms, pairs)


def largest_connected_component(net: SupplyNetwork) -> SupplyNetwork:
    """Induced subgraph of the largest component.

    Size ties go to the component containing the smallest original firm id,
    which is the first one component discovery emits.
    """
    if net.n_nodes == 0:
        raise GraphConstructionError("cannot take the LCC of an empty network")
    comps = connected_components(net)
    best = max(comps, key=len)  # max() keeps the earliest of equal sizes
    return induced_subgraph(net, best)
