"""Supply-chain cooperation network toolkit.

Builds an undirected firm network from relationship triplets with fuzzy
entity deduplication, computes topology metrics and community structure,
and simulates cascade disruptions under recovery-capacity and
risk-transfer dynamics with targeted attack seeding.
"""

from .attack import AttackPlan, select_seeds
from .communities import Partition, louvain, modularity
from .graph import Firm, SupplyNetwork, from_edge_list, largest_connected_component
from .ingest import IngestReport, Triplet, build_network, ingest_files
from .names import group_entities, levenshtein, name_similarity, normalize_name
from .rc import RcConfig, RcState, beta_weights, rc_run, rc_step, recovery_sweep
from .rt import RtConfig, RtState, failure_probability, rt_run, rt_step
from .synth import CapitalSpec, assign_capital, barabasi_albert, erdos_renyi
from .topology import (
    MetricTable,
    betweenness,
    closeness,
    degree_and_capital_distribution,
    eigenvector_centrality,
    local_clustering,
    metric_correlation,
    metric_table,
    pagerank,
    path_stats,
)
from .trace import SimTrace

__version__ = "0.1.0"

__all__ = [
    "AttackPlan",
    "CapitalSpec",
    "Firm",
    "IngestReport",
    "MetricTable",
    "Partition",
    "RcConfig",
    "RcState",
    "RtConfig",
    "RtState",
    "SimTrace",
    "SupplyNetwork",
    "Triplet",
    "assign_capital",
    "barabasi_albert",
    "beta_weights",
    "betweenness",
    "build_network",
    "closeness",
    "degree_and_capital_distribution",
    "eigenvector_centrality",
    "erdos_renyi",
    "failure_probability",
    "from_edge_list",
    "group_entities",
    "ingest_files",
    "largest_connected_component",
    "levenshtein",
    "local_clustering",
    "louvain",
    "metric_correlation",
    "metric_table",
    "modularity",
    "name_similarity",
    "normalize_name",
    "pagerank",
    "path_stats",
    "rc_run",
    "rc_step",
    "recovery_sweep",
    "rt_run",
    "rt_step",
    "select_seeds",
]
