"""Community structure: partition quality score and Louvain detection.

The quality score Q sums, over unordered node pairs sharing a community,
the observed-minus-expected edge indicator under the configuration null
model. Louvain greedily maximizes Q through local moves and graph
aggregation; all of its nondeterminism is routed through one seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import SupplyNetwork
from .rng import shuffled, uniform


class CommunityError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """Dense community ids, one per firm."""

    assignments: tuple[int, ...]

    @property
    def n_communities(self) -> int:
        return max(self.assignments) + 1 if self.assignments else 0

    @staticmethod
    def from_labels(labels) -> "Partition":
        """Relabel arbitrary ids densely, ordered by smallest member node."""
        first_seen: dict[int, int] = {}
        dense = []
        for lab in labels:
            if lab not in first_seen:
                first_seen[lab] = len(first_seen)
            dense.append(first_seen[lab])
        return Partition(tuple(dense))


def modularity(net: SupplyNetwork, partition: Partition) -> float:
    """Q of the partition on the (unweighted) network.

    Evaluated per community as e_c/m - (d_c/2m)^2, which equals the pairwise
    observed-minus-expected sum over same-community pairs.
    """
    m = net.n_edges
    if m == 0:
        raise CommunityError("modularity undefined on an edgeless network")
    labels = partition.assignments
    if len(labels) != net.n_nodes:
        raise CommunityError(
            f"partition covers {len(labels)} nodes, network has {net.n_nodes}"
        )
    k = max(labels) + 1
    intra = np.zeros(k, dtype=np.int64)
    dtot = np.zeros(k, dtype=np.int64)
    deg = net.degrees
    for v in range(net.n_nodes):
        dtot[labels[v]] += deg[v]
        for w in net.neighbors(v):
            if v < w and labels[v] == labels[w]:
                intra[labels[v]] += 1
    q = 0.0
    for c in range(k):
        q += intra[c] / m - (dtot[c] / (2.0 * m)) ** 2
    return q


class _LevelGraph:
    """Weighted graph used internally across aggregation levels."""

    def __init__(self, n, adj, self_weight, total_weight):
        self.n = n
        self.adj = adj  # list of dict: neighbor -> weight
        self.self_weight = self_weight  # intra weight folded into a node
        self.total_weight = total_weight  # m (sum of edge weights)
        self.strength = np.array(
            [sum(adj[i].values()) + 2.0 * self_weight[i] for i in range(n)]
        )

    @staticmethod
    def from_network(net: SupplyNetwork) -> "_LevelGraph":
        adj = [
            {int(w): 1.0 for w in net.neighbors(v)} for v in range(net.n_nodes)
        ]
        return _LevelGraph(
            net.n_nodes, adj, np.zeros(net.n_nodes), float(net.n_edges)
        )


def _one_level(g: _LevelGraph, seed: int, stream: int, init=None,
               first_improvement: bool = False):
    """Local-move phase; returns (labels, improved).

    ``init`` seeds the community labels (defaults to singletons). In
    best-move mode each node takes the highest-gain improving move, ties
    toward the lowest community id; in first-improvement mode it takes the
    first improving move in a shuffled candidate order, which lets restarts
    realize greedy trajectories best-move search never visits."""
    m = g.total_weight
    comm = list(range(g.n)) if init is None else list(init)
    sigma_tot = np.zeros(g.n)
    size = np.zeros(g.n, dtype=np.int64)
    for v in range(g.n):
        sigma_tot[comm[v]] += g.strength[v]
        size[comm[v]] += 1
    improved = False
    moved = True
    sweep = 0
    while moved:
        moved = False
        # a fresh visit order every sweep explores more greedy trajectories
        order = shuffled(g.n, seed, stream=stream * 1009 + sweep)
        for v in (int(x) for x in order):
            cv = comm[v]
            kv = g.strength[v]
            # weight from v into each neighboring community
            links: dict[int, float] = {}
            for w, wt in g.adj[v].items():
                links[comm[w]] = links.get(comm[w], 0.0) + wt
            # detach v before evaluating candidate gains
            sigma_tot[cv] -= kv
            size[cv] -= 1
            base = links.get(cv, 0.0) - sigma_tot[cv] * kv / (2.0 * m)
            cands = sorted(links)
            if first_improvement and len(cands) > 1:
                sub = int(uniform(seed, stream * 1009 + sweep, v) * 1e9)
                perm = shuffled(len(cands), sub, stream=3)
                cands = [cands[int(i)] for i in perm]
            best_comm, best_gain = cv, base
            for cand in cands:
                if cand == cv:
                    continue
                gain = links[cand] - sigma_tot[cand] * kv / (2.0 * m)
                if gain > best_gain + 1e-12:
                    best_comm, best_gain = cand, gain
                    if first_improvement:
                        break
            if 0.0 > best_gain + 1e-12 and size[cv] > 0:
                # splitting into a fresh singleton has gain 0 in the detached
                # frame; take it when every membership is a liability
                empty = np.flatnonzero(size == 0)
                if len(empty):
                    best_comm = int(empty[0])
            sigma_tot[best_comm] += kv
            size[best_comm] += 1
            if best_comm != cv:
                comm[v] = best_comm
                moved = True
                improved = True
        sweep += 1
        if sweep > 4 * g.n + 10:  # safety; every move strictly raises Q
            break
    return comm, improved


def _aggregate(g: _LevelGraph, comm: list[int]):
    """Collapse communities into nodes; returns (graph, dense labels)."""
    dense: dict[int, int] = {}
    labels = []
    for v in range(g.n):
        c = comm[v]
        if c not in dense:
            dense[c] = len(dense)
        labels.append(dense[c])
    k = len(dense)
    adj: list[dict[int, float]] = [{} for _ in range(k)]
    self_weight = np.zeros(k)
    for v in range(g.n):
        cv = labels[v]
        self_weight[cv] += g.self_weight[v]
        for w, wt in g.adj[v].items():
            cw = labels[w]
            if cv == cw:
                if v < w:
                    self_weight[cv] += wt
            else:
                adj[cv][cw] = adj[cv].get(cw, 0.0) + wt
    return _LevelGraph(k, adj, self_weight, g.total_weight), labels


def _louvain_once(net: SupplyNetwork, rng_seed: int, salt: int) -> Partition:
    # odd restarts explore with first-improvement moves
    fi = salt % 2 == 1
    g = _LevelGraph.from_network(net)
    node_to_group = list(range(net.n_nodes))
    level = 0
    while True:
        comm, improved = _one_level(g, rng_seed, stream=salt * 1000 + level,
                                    first_improvement=fi)
        if not improved and level > 0:
            break
        g, labels = _aggregate(g, comm)
        node_to_group = [labels[comm[c]] for c in node_to_group]
        level += 1
        if not improved:
            break
    # refinement: one more best-move sweep on the flat graph lets single
    # nodes escape blocks the aggregated levels froze them into
    flat = _LevelGraph.from_network(net)
    dense = Partition.from_labels(node_to_group).assignments
    comm, improved = _one_level(flat, rng_seed, stream=salt * 1000 + 999,
                                init=list(dense))
    if improved:
        node_to_group = comm
    return Partition.from_labels(node_to_group)


def louvain(net: SupplyNetwork, rng_seed: int = 0, restarts: int = 8) -> Partition:
    """Seed-deterministic Louvain partition of the network.

    Greedy local moves plus aggregation, repeated to a fixpoint, with a
    flat refinement sweep; the whole procedure restarts from ``restarts``
    seed-derived visit orders and the best-scoring partition wins. Move
    ties break toward the lowest community id.
    """
    if net.n_edges == 0:
        raise CommunityError("Louvain needs at least one edge")
    best: Partition | None = None
    best_q = -np.inf
    for salt in range(restarts):
        part = _louvain_once(net, rng_seed, salt)
        q = modularity(net, part)
        if q > best_q + 1e-14:
            best, best_q = part, q
    return best
