"""Topology metric suite for supply networks.

Per-firm centralities (degree, closeness, betweenness, eigenvector,
PageRank), local clustering, path statistics, distributions, and
cross-metric correlation. Betweenness and the all-pairs BFS run either as
numba kernels or as the vectorized numpy fallback, selected in accel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .accel import HAVE_NUMBA, USE_NUMBA, njit
from .graph import SupplyNetwork, is_connected

METRIC_COLUMNS = (
    "degree",
    "closeness",
    "betweenness",
    "eigenvector",
    "pagerank",
    "clustering",
    "triangles",
    "capital",
)


class TopologyError(ValueError):
    pass


def _require_connected(net: SupplyNetwork, what: str):
    if not is_connected(net):
        raise TopologyError(
            f"{what} needs a connected network; run on the largest connected "
            "component (largest_connected_component) first"
        )


# ---------------------------------------------------------------------------
# neighbor sums: the shared gather/accumulate primitive

def _neighbor_sums_seq(indptr, indices, vals):
    n = len(indptr) - 1
    out = np.zeros(n, dtype=np.float64)
    for i in range(n):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += vals[indices[k]]
        out[i] = acc
    return out


if HAVE_NUMBA:
    _neighbor_sums_jit = njit(_neighbor_sums_seq)
else:  # pragma: no cover
    _neighbor_sums_jit = _neighbor_sums_seq


def _neighbor_sums_vec(net: SupplyNetwork, vals):
    out = np.zeros(net.n_nodes, dtype=np.float64)
    # add.at applies in slot order, matching the sequential kernel bit for bit
    np.add.at(out, net.edge_dst, vals[net.indices])
    return out


def neighbor_sums(net: SupplyNetwork, vals: np.ndarray) -> np.ndarray:
    """out[i] = sum of vals[j] over neighbors j of i."""
    if USE_NUMBA:
        return _neighbor_sums_jit(net.indptr, net.indices, np.asarray(vals, dtype=np.float64))
    return _neighbor_sums_vec(net, np.asarray(vals, dtype=np.float64))


# ---------------------------------------------------------------------------
# all-pairs BFS statistics

def _all_bfs_seq(indptr, indices):
    n = len(indptr) - 1
    dist_sum = np.zeros(n, dtype=np.int64)
    ecc = np.zeros(n, dtype=np.int64)
    reach = np.zeros(n, dtype=np.int64)
    dist = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for s in range(n):
        dist[:] = -1
        dist[s] = 0
        queue[0] = s
        head, tail = 0, 1
        total = 0
        far = 0
        while head < tail:
            v = queue[head]
            head += 1
            dv = dist[v]
            total += dv
            if dv > far:
                far = dv
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    queue[tail] = w
                    tail += 1
        dist_sum[s] = total
        ecc[s] = far
        reach[s] = tail
    return dist_sum, ecc, reach


if HAVE_NUMBA:
    _all_bfs_jit = njit(_all_bfs_seq)
else:  # pragma: no cover
    _all_bfs_jit = _all_bfs_seq


def _all_bfs_vec(net: SupplyNetwork):
    n = net.n_nodes
    esrc, edst = net.edge_dst, net.indices
    dist_sum = np.zeros(n, dtype=np.int64)
    ecc = np.zeros(n, dtype=np.int64)
    reach = np.zeros(n, dtype=np.int64)
    for s in range(n):
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        frontier = np.zeros(n, dtype=bool)
        frontier[s] = True
        level = 0
        count = 1
        while frontier.any():
            hits = edst[frontier[esrc]]
            fresh = hits[dist[hits] < 0]
            level += 1
            dist[fresh] = level
            frontier = np.zeros(n, dtype=bool)
            frontier[fresh] = True
            count += len(np.unique(fresh))
        reached = dist >= 0
        dist_sum[s] = int(dist[reached].sum())
        ecc[s] = int(dist[reached].max())
        reach[s] = int(reached.sum())
    return dist_sum, ecc, reach


def _all_bfs(net: SupplyNetwork):
    if USE_NUMBA:
        return _all_bfs_jit(net.indptr, net.indices)
    return _all_bfs_vec(net)


def path_stats(net: SupplyNetwork) -> tuple[float, int]:
    """(average shortest-path length over unordered pairs, diameter)."""
    _require_connected(net, "path statistics")
    n = net.n_nodes
    if n == 1:
        return 0.0, 0
    dist_sum, ecc, _ = _all_bfs(net)
    pairs = n * (n - 1) // 2
    return float(dist_sum.sum()) / 2.0 / pairs, int(ecc.max())


def closeness(net: SupplyNetwork) -> np.ndarray:
    """closeness(v) = (n-1) / sum of distances from v; connected input only."""
    _require_connected(net, "closeness centrality")
    n = net.n_nodes
    if n == 1:
        return np.zeros(1)
    dist_sum, _, _ = _all_bfs(net)
    return (n - 1) / dist_sum.astype(np.float64)


# ---------------------------------------------------------------------------
# betweenness (Brandes accumulation over BFS DAGs)

def _brandes_seq(indptr, indices):
    n = len(indptr) - 1
    bc = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n, dtype=np.float64)
    delta = np.empty(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    for s in range(n):
        dist[:] = -1
        sigma[:] = 0.0
        delta[:] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head, tail = 0, 1
        while head < tail:
            v = order[head]
            head += 1
            dv = dist[v]
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
        for idx in range(tail - 1, 0, -1):
            w = order[idx]
            coeff = (1.0 + delta[w]) / sigma[w]
            dw = dist[w]
            for k in range(indptr[w], indptr[w + 1]):
                v = indices[k]
                if dist[v] == dw - 1:
                    delta[v] += sigma[v] * coeff
            bc[w] += delta[w]
    return bc


if HAVE_NUMBA:
    _brandes_jit = njit(_brandes_seq)
else:  # pragma: no cover
    _brandes_jit = _brandes_seq


def _brandes_vec(net: SupplyNetwork):
    n = net.n_nodes
    esrc, edst = net.edge_dst, net.indices
    bc = np.zeros(n, dtype=np.float64)
    for s in range(n):
        dist = np.full(n, -1, dtype=np.int64)
        sigma = np.zeros(n, dtype=np.float64)
        dist[s] = 0
        sigma[s] = 1.0
        level = 0
        while True:
            on_level = dist[esrc] == level
            hits = edst[on_level]
            fresh = np.unique(hits[dist[hits] < 0])
            if len(fresh) == 0:
                break
            dist[fresh] = level + 1
            down = on_level & (dist[edst] == level + 1)
            np.add.at(sigma, edst[down], sigma[esrc[down]])
            level += 1
        delta = np.zeros(n, dtype=np.float64)
        for lev in range(level, 0, -1):
            on_edge = (dist[esrc] == lev - 1) & (dist[edst] == lev)
            coeff = (1.0 + delta) / np.where(sigma > 0, sigma, 1.0)
            np.add.at(delta, esrc[on_edge], sigma[esrc[on_edge]] * coeff[edst[on_edge]])
        seen = dist >= 0
        seen[s] = False
        bc[seen] += delta[seen]
    return bc


def betweenness(net: SupplyNetwork) -> np.ndarray:
    """Unnormalized shortest-path betweenness, each unordered pair once."""
    if net.n_nodes == 0:
        return np.zeros(0)
    if USE_NUMBA:
        raw = _brandes_jit(net.indptr, net.indices)
    else:
        raw = _brandes_vec(net)
    return raw / 2.0


# ---------------------------------------------------------------------------
# triangles and local clustering

def _triangles_seq(indptr, indices):
    n = len(indptr) - 1
    tri = np.zeros(n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.uint8)
    for v in range(n):
        for k in range(indptr[v], indptr[v + 1]):
            mark[indices[k]] = 1
        cnt = 0
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            for k2 in range(indptr[u], indptr[u + 1]):
                if mark[indices[k2]] == 1:
                    cnt += 1
        tri[v] = cnt // 2
        for k in range(indptr[v], indptr[v + 1]):
            mark[indices[k]] = 0
    return tri


if HAVE_NUMBA:
    _triangles_jit = njit(_triangles_seq)
else:  # pragma: no cover
    _triangles_jit = _triangles_seq


def _triangles_vec(net: SupplyNetwork):
    n = net.n_nodes
    tri = np.zeros(n, dtype=np.int64)
    mark = np.zeros(n, dtype=bool)
    for v in range(n):
        nbrs = net.neighbors(v)
        if len(nbrs) < 2:
            continue
        mark[nbrs] = True
        cnt = 0
        for u in nbrs:
            cnt += int(mark[net.neighbors(int(u))].sum())
        tri[v] = cnt // 2
        mark[nbrs] = False
    return tri


def local_clustering(net: SupplyNetwork) -> tuple[np.ndarray, np.ndarray]:
    """Per-firm (clustering coefficient, triangle count); deg<=1 gives 0."""
    if USE_NUMBA:
        tri = _triangles_jit(net.indptr, net.indices)
    else:
        tri = _triangles_vec(net)
    deg = net.degrees.astype(np.float64)
    possible = deg * (deg - 1.0)
    coeff = np.where(possible > 0, 2.0 * tri / np.where(possible > 0, possible, 1.0), 0.0)
    return coeff, tri


# ---------------------------------------------------------------------------
# spectral scores

def eigenvector_centrality(
    net: SupplyNetwork, tol: float = 1e-10, max_iter: int = 1000
) -> np.ndarray:
    """Principal adjacency eigenvector, unit Euclidean norm, entries >= 0."""
    _require_connected(net, "eigenvector centrality")
    n = net.n_nodes
    x = np.full(n, 1.0 / math.sqrt(n))
    for _ in range(max_iter):
        # power iteration on A + I: keeps bipartite graphs from oscillating
        y = neighbor_sums(net, x) + x
        y /= np.linalg.norm(y)
        done = np.linalg.norm(y - x) < tol * np.linalg.norm(y)
        x = y
        if done:
            return x
    raise TopologyError(
        f"eigenvector power iteration did not converge in {max_iter} iterations"
    )


def pagerank(
    net: SupplyNetwork,
    damping: float = 0.85,
    tol: float = 1e-12,
    max_iter: int = 100000,
) -> np.ndarray:
    """Undirected PageRank (edges as arc pairs), L1-normalized.

    Rank mass of isolated (dangling) firms is spread uniformly each sweep.
    """
    if not 0 < damping < 1:
        raise TopologyError(f"damping must be in (0, 1), got {damping}")
    n = net.n_nodes
    if n == 0:
        return np.zeros(0)
    deg = net.degrees.astype(np.float64)
    dangling = deg == 0
    safe_deg = np.where(dangling, 1.0, deg)
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        share = np.where(dangling, 0.0, x) / safe_deg
        inflow = neighbor_sums(net, share)
        dangle_mass = float(x[dangling].sum())
        y = (1.0 - damping) / n + damping * (inflow + dangle_mass / n)
        if np.abs(y - x).sum() < tol:
            x = y
            break
        x = y
    return x / x.sum()


# ---------------------------------------------------------------------------
# metric table, distributions, correlations

@dataclass
class MetricTable:
    names: list[str]
    degree: np.ndarray
    closeness: np.ndarray
    betweenness: np.ndarray
    eigenvector: np.ndarray
    pagerank: np.ndarray
    clustering: np.ndarray
    triangles: np.ndarray
    capital: np.ndarray

    def column(self, name: str) -> np.ndarray:
        if name not in METRIC_COLUMNS:
            raise KeyError(name)
        return getattr(self, name)

    def to_csv(self) -> str:
        lines = ["firm,degree,closeness,betweenness,eigenvector,pagerank,clustering,triangles,capital"]
        for i, name in enumerate(self.names):
            lines.append(
                f"{_csv_quote(name)},{int(self.degree[i])},{self.closeness[i]!r},"
                f"{self.betweenness[i]!r},{self.eigenvector[i]!r},{self.pagerank[i]!r},"
                f"{self.clustering[i]!r},{int(self.triangles[i])},{self.capital[i]!r}"
            )
        return "\n".join(lines) + "\n"


def _csv_quote(s: str) -> str:
    if any(ch in s for ch in ',"\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def metric_table(net: SupplyNetwork) -> MetricTable:
    """All per-firm metrics on a connected network."""
    coeff, tri = local_clustering(net)
    return MetricTable(
        names=net.names(),
        degree=net.degrees.astype(np.int64),
        closeness=closeness(net),
        betweenness=betweenness(net),
        eigenvector=eigenvector_centrality(net),
        pagerank=pagerank(net),
        clustering=coeff,
        triangles=tri,
        capital=net.capitals,
    )


def degree_and_capital_distribution(net: SupplyNetwork):
    """(degree histogram, capital histogram over base-10 fifth-decade bins).

    Capital bins are [10^(k/5), 10^((k+1)/5)); zero capitals are counted
    separately since they have no finite log bin.
    """
    deg = net.degrees
    degree_hist: dict[int, int] = {}
    for d in deg:
        degree_hist[int(d)] = degree_hist.get(int(d), 0) + 1
    caps = net.capitals
    positive = caps[caps > 0]
    zero_count = int((caps == 0).sum())
    bins: list[tuple[float, float, int]] = []
    if len(positive):
        ks = np.floor(5 * np.log10(positive)).astype(np.int64)
        # values sitting exactly on an upper edge belong to the next bin
        for k in range(int(ks.min()), int(ks.max()) + 1):
            count = int((ks == k).sum())
            bins.append((10 ** (k / 5), 10 ** ((k + 1) / 5), count))
    return degree_hist, {"zero": zero_count, "bins": bins}


def _rankdata(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x), dtype=np.float64)
    sx = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0  # average rank, 1-based
        i = j + 1
    return ranks


def _pearson(a: np.ndarray, b: np.ndarray) -> float | None:
    da = a - a.mean()
    db = b - b.mean()
    na = float(np.sqrt((da * da).sum()))
    nb = float(np.sqrt((db * db).sum()))
    if na == 0.0 or nb == 0.0:
        return None
    r = float((da * db).sum() / (na * nb))
    return max(-1.0, min(1.0, r))


def metric_correlation(table: MetricTable, kind: str = "pearson"):
    """Symmetric correlation matrix over the metric columns.

    Entries are None where a column is constant (correlation undefined).
    Returns (column names, matrix as nested lists).
    """
    if kind not in ("pearson", "spearman"):
        raise TopologyError(f"unknown correlation kind: {kind}")
    if len(table.names) < 3:
        raise TopologyError("correlation needs at least 3 firms")
    cols = [np.asarray(table.column(c), dtype=np.float64) for c in METRIC_COLUMNS]
    if kind == "spearman":
        cols = [_rankdata(c) for c in cols]
    k = len(cols)
    matrix: list[list[float | None]] = [[None] * k for _ in range(k)]
    for i in range(k):
        for j in range(i, k):
            if i == j:
                # unit diagonal unless the column is degenerate
                val = None if cols[i].std() == 0 else 1.0
            else:
                val = _pearson(cols[i], cols[j])
            matrix[i][j] = val
            matrix[j][i] = val
    return list(METRIC_COLUMNS), matrix


def correlation_rows(table: MetricTable, kinds=("pearson", "spearman")) -> list[dict]:
    """Flat {metric_a, metric_b, kind, value|None} rows for JSON export."""
    rows = []
    for kind in kinds:
        names, matrix = metric_correlation(table, kind)
        for i in range(len(names)):
            for j in range(i, len(names)):
                rows.append(
                    {
                        "metric_a": names[i],
                        "metric_b": names[j],
                        "kind": kind,
                        "value": matrix[i][j],
                    }
                )
    return rows
