"""Network persistence as a human-diffable JSON document."""

from __future__ import annotations

import json

from .graph import Firm, SupplyNetwork, build_network_from_ids

FORMAT = "supply-network/1"


class NetworkFormatError(ValueError):
    pass


def network_to_json(net: SupplyNetwork) -> str:
    body = {
        "format": FORMAT,
        "firms": [
            {
                "id": f.id,
                "name": f.canonical_name,
                "capital": f.registered_capital,
                "aliases": sorted(f.aliases),
            }
            for f in net.firms
        ],
        "edges": sorted([int(i), int(j)] for i, j in net.edge_set()),
    }
    return json.dumps(body, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def network_from_json(text: str) -> SupplyNetwork:
    try:
        body = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"not valid JSON: {exc}") from None
    if body.get("format") != FORMAT:
        raise NetworkFormatError(
            f"expected format {FORMAT!r}, got {body.get('format')!r}"
        )
    rows = sorted(body["firms"], key=lambda r: r["id"])
    if [r["id"] for r in rows] != list(range(len(rows))):
        raise NetworkFormatError("firm ids must be dense 0..n-1")
    firms = [
        Firm(
            id=r["id"],
            canonical_name=r["name"],
            aliases=frozenset(r.get("aliases", [r["name"]])),
            registered_capital=float(r["capital"]),
        )
        for r in rows
    ]
    n = len(firms)
    pairs = set()
    for i, j in body["edges"]:
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise NetworkFormatError(f"bad edge [{i}, {j}]")
        pairs.add((min(i, j), max(i, j)))
    return build_network_from_ids(firms, pairs)
