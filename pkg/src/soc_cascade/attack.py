"""Seed-set selection for disruption experiments.

Three targeted strategies rank firms by degree (HDA), closeness (HCA), or
log registered capital (HIA); RANDOM is the uniform baseline scale-free
networks are famously robust against. Seeds are chosen once, before the
cascade starts, and never re-ranked.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from . import topology
from .graph import SupplyNetwork
from .rng import sample_without_replacement

STRATEGIES = ("HDA", "HCA", "HIA", "RANDOM")


class AttackError(ValueError):
    pass


@dataclass(frozen=True)
class AttackPlan:
    strategy: str
    seed_fraction: float | None = None
    seed_count: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise AttackError(f"unknown strategy: {self.strategy!r}")
        if (self.seed_fraction is None) == (self.seed_count is None):
            raise AttackError(
                "exactly one of seed_fraction and seed_count must be set"
            )
        if self.seed_fraction is not None and not 0 < self.seed_fraction <= 1:
            raise AttackError(f"seed fraction must be in (0,1], got {self.seed_fraction}")
        if self.seed_count is not None and self.seed_count < 1:
            raise AttackError(f"seed count must be positive, got {self.seed_count}")

    def resolve_count(self, n_nodes: int) -> int:
        if self.seed_count is not None:
            count = self.seed_count
        else:
            # epsilon guards against 0.1 * 10 -> 1.0000000000000002
            count = math.ceil(self.seed_fraction * n_nodes - 1e-9)
        if count > n_nodes:
            raise AttackError(
                f"requested {count} seeds but the network has {n_nodes} firms"
            )
        return count

    def to_json(self) -> str:
        body: dict = {"strategy": self.strategy, "rng_seed": self.rng_seed}
        if self.seed_fraction is not None:
            body["p"] = self.seed_fraction
        else:
            body["n"] = self.seed_count
        return json.dumps(body, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "AttackPlan":
        body = json.loads(text)
        return AttackPlan(
            strategy=body["strategy"],
            seed_fraction=body.get("p"),
            seed_count=body.get("n"),
            rng_seed=body.get("rng_seed", 0),
        )


def select_seeds(net: SupplyNetwork, plan: AttackPlan) -> list[int]:
    """Ordered seed ids for the plan; ranking ties break toward lower ids."""
    count = plan.resolve_count(net.n_nodes)
    if plan.strategy == "RANDOM":
        return sample_without_replacement(net.n_nodes, count, plan.rng_seed)
    if plan.strategy == "HDA":
        score = net.degrees.astype(float)
    elif plan.strategy == "HCA":
        score = topology.closeness(net)
    else:  # HIA
        score = net.log_capitals
    ranked = sorted(range(net.n_nodes), key=lambda v: (-score[v], v))
    return ranked[:count]
