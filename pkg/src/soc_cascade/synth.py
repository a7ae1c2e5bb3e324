"""Synthetic network and capital generators.

Everything is driven by the package's SplitMix64 counter RNG, so fixtures
are bit-exact across platforms and numpy versions. The scale-free surrogate
is preferential attachment seeded from an m-clique; the Erdos-Renyi control
draws each unordered pair independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Firm, SupplyNetwork, build_network_from_ids
from .rng import uniform, uniform_array


class SynthError(ValueError):
    pass


def _firm(i: int, capital: float) -> Firm:
    name = f"firm-{i:05d}"
    return Firm(id=i, canonical_name=name, aliases=frozenset({name}),
                registered_capital=capital)


def barabasi_albert(n: int, m: int, seed: int = 0) -> SupplyNetwork:
    """Preferential-attachment graph: m-clique start, m edges per new node.

    Edge count is exactly C(m,2) + (n-m)*m and the graph is connected.
    """
    if not n >= m >= 1:
        raise SynthError(f"need n >= m >= 1, got n={n}, m={m}")
    pairs: set[tuple[int, int]] = set()
    repeated: list[int] = []
    for i in range(m):
        for j in range(i + 1, m):
            pairs.add((i, j))
            repeated += [i, j]
    if m == 1:
        repeated = [0]  # degree-0 clique start still needs an anchor
    draw = 0
    for v in range(m, n):
        targets: set[int] = set()
        while len(targets) < m:
            u = uniform(seed, 0, v, draw)
            draw += 1
            targets.add(repeated[int(u * len(repeated))])
        for t in sorted(targets):
            pairs.add((t, v))
            repeated += [t, v]
    firms = [_firm(i, 0.0) for i in range(n)]
    return build_network_from_ids(firms, pairs)


def erdos_renyi(n: int, p: float, seed: int = 0) -> SupplyNetwork:
    """G(n, p): every unordered pair is an edge with probability p."""
    if not 0 <= p <= 1:
        raise SynthError(f"edge probability must be in [0,1], got {p}")
    pairs: set[tuple[int, int]] = set()
    if p > 0:
        for i in range(n):
            if i + 1 < n:
                us = uniform_array(seed, i, np.arange(i + 1, n))
                for j in np.flatnonzero(us < p):
                    pairs.add((i, i + 1 + int(j)))
    firms = [_firm(i, 0.0) for i in range(n)]
    return build_network_from_ids(firms, pairs)


@dataclass(frozen=True)
class CapitalSpec:
    """Capital draw law: pareto(alpha, scale), lognormal(mu, sigma), constant(v)."""

    law: str
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.law not in ("pareto", "lognormal", "constant"):
            raise SynthError(f"unknown capital law: {self.law!r}")
        if self.law == "pareto" and self.a <= 1:
            raise SynthError("pareto alpha must exceed 1 for a finite mean")

    @staticmethod
    def parse(text: str) -> "CapitalSpec":
        """Parse 'pareto:2:50', 'lognormal:3:1' or 'constant:100'."""
        parts = text.split(":")
        law = parts[0]
        try:
            if law == "constant":
                return CapitalSpec(law, float(parts[1]))
            return CapitalSpec(law, float(parts[1]), float(parts[2]))
        except (IndexError, ValueError) as exc:
            if isinstance(exc, SynthError):
                raise
            raise SynthError(f"cannot parse capital spec {text!r}") from None


def draw_capitals(n: int, spec: CapitalSpec, seed: int = 0) -> np.ndarray:
    """n i.i.d. positive capital draws via inverse-CDF on keyed uniforms."""
    if spec.law == "constant":
        return np.full(n, float(spec.a))
    u = uniform_array(seed, 1, np.arange(n))
    if spec.law == "pareto":
        # survival inversion: X = scale * (1-U)^(-1/alpha)
        return spec.b * np.power(1.0 - u, -1.0 / spec.a)
    # lognormal via Box-Muller on two keyed uniform streams
    u2 = uniform_array(seed, 2, np.arange(n))
    z = np.sqrt(-2.0 * np.log(1.0 - u)) * np.cos(2.0 * math.pi * u2)
    return np.exp(spec.a + spec.b * z)


def assign_capital(
    net: SupplyNetwork, spec: CapitalSpec, seed: int = 0
) -> SupplyNetwork:
    """Same topology with capitals drawn independently of structure."""
    caps = draw_capitals(net.n_nodes, spec, seed)
    firms = [
        Firm(
            id=f.id,
            canonical_name=f.canonical_name,
            aliases=f.aliases,
            registered_capital=float(caps[f.id]),
        )
        for f in net.firms
    ]
    return SupplyNetwork(tuple(firms), net.indptr, net.indices)


def to_ingest_csv(net: SupplyNetwork) -> tuple[str, str]:
    """(triplet CSV, attribute CSV) so fixtures flow through ingestion."""
    lines = ["head,relation,tail,source"]
    for i in range(net.n_nodes):
        for j in net.neighbors(i):
            if i < j:
                lines.append(
                    f"{net.firms[i].canonical_name},supplies,"
                    f"{net.firms[int(j)].canonical_name},synthetic"
                )
    attr_lines = ["name,registered_capital"]
    for f in net.firms:
        attr_lines.append(f"{f.canonical_name},{f.registered_capital!r}")
    return "\n".join(lines) + "\n", "\n".join(attr_lines) + "\n"
