"""Triplet-file ingestion: parse, deduplicate firm names, emit a network.

Input formats (UTF-8, RFC-4180 CSV):

* triplet file, header ``head,relation,tail,source``
* attribute file, header ``name,registered_capital`` with capital in
  ten-thousand-CNY units

Relation labels never reach the graph; the cooperation network is an
unlabeled undirected simple graph, so duplicate triplets collapse and
merge-induced self-loops are dropped (both counted in the report).
"""

from __future__ import annotations

import csv
import io
import logging
import statistics
from dataclasses import asdict, dataclass

from .graph import Firm, SupplyNetwork, build_network_from_ids
from .names import AliasGroup, group_entities, normalize_name

logger = logging.getLogger(__name__)

TRIPLET_HEADER = ["head", "relation", "tail", "source"]
ATTR_HEADER = ["name", "registered_capital"]

MAX_BAD_ROW_FRACTION = 0.10


class IngestError(ValueError):
    """Raised for unusable input files."""


@dataclass(frozen=True)
class Triplet:
    head: str
    relation: str
    tail: str
    source: str = ""


@dataclass
class IngestReport:
    raw_names: int = 0
    groups: int = 0
    merged: int = 0
    self_loops_dropped: int = 0
    duplicate_edges: int = 0
    bad_rows: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def parse_triplets(text: str) -> tuple[list[Triplet], int]:
    """Parse a triplet CSV; returns (rows, bad_row_count).

    Rows with missing/empty head or tail are logged with their line number
    and skipped; more than 10% bad rows aborts.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("triplet file is empty") from None
    if [h.strip() for h in header] != TRIPLET_HEADER:
        raise IngestError(
            f"triplet header must be {','.join(TRIPLET_HEADER)!r}, "
            f"got {','.join(header)!r}"
        )
    rows: list[Triplet] = []
    bad = 0
    total = 0
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        total += 1
        if len(row) != 4 or not row[0].strip() or not row[2].strip():
            logger.error("triplet line %d unparseable: %r", lineno, row)
            bad += 1
            continue
        rows.append(Triplet(row[0].strip(), row[1].strip(), row[2].strip(), row[3].strip()))
    if total and bad / total > MAX_BAD_ROW_FRACTION:
        raise IngestError(f"{bad} of {total} triplet rows are bad; aborting")
    return rows, bad


def parse_attributes(text: str) -> tuple[dict[str, float], int]:
    """Parse a name->capital CSV; returns (mapping, bad_row_count)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("attribute file is empty") from None
    if [h.strip() for h in header] != ATTR_HEADER:
        raise IngestError(
            f"attribute header must be {','.join(ATTR_HEADER)!r}, "
            f"got {','.join(header)!r}"
        )
    attrs: dict[str, float] = {}
    bad = 0
    total = 0
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        total += 1
        try:
            name, capital = row[0].strip(), float(row[1])
            if not name or capital < 0:
                raise ValueError
        except (ValueError, IndexError):
            logger.error("attribute line %d unparseable: %r", lineno, row)
            bad += 1
            continue
        attrs[name] = capital
    if total and bad / total > MAX_BAD_ROW_FRACTION:
        raise IngestError(f"{bad} of {total} attribute rows are bad; aborting")
    return attrs, bad


def _resolve_capital(
    group: AliasGroup, attrs_by_norm: dict[str, float]
) -> float | None:
    """Largest capital among attribute rows matching any group member."""
    found = [
        attrs_by_norm[normalize_name(m)]
        for m in group.members
        if normalize_name(m) in attrs_by_norm
    ]
    return max(found) if found else None


def build_network(
    triplets: list[Triplet],
    attrs: dict[str, float] | None = None,
    threshold: float = 0.6,
    default_capital: float | None = None,
    blocking: bool = False,
) -> tuple[SupplyNetwork, IngestReport]:
    """Group endpoint names and map triplets onto an undirected simple graph.

    Firms that no attribute row covers get ``default_capital``; when that is
    None, the median capital of covered firms is used (0 if none at all).
    """
    attrs = attrs or {}
    report = IngestReport()
    raw_names = [t.head for t in triplets] + [t.tail for t in triplets]
    report.raw_names = len(set(raw_names))
    groups = group_entities(raw_names, threshold=threshold, blocking=blocking)
    report.groups = len(groups)
    report.merged = report.raw_names - report.groups

    member_to_group: dict[str, int] = {}
    for gid, group in enumerate(groups):
        for m in group.members:
            member_to_group[m] = gid

    attrs_by_norm = {normalize_name(k): v for k, v in attrs.items()}
    capitals: list[float | None] = [
        _resolve_capital(g, attrs_by_norm) for g in groups
    ]
    known = [c for c in capitals if c is not None]
    if default_capital is None:
        default_capital = statistics.median(known) if known else 0.0
    firms = [
        Firm(
            id=gid,
            canonical_name=g.canonical,
            aliases=g.members,
            registered_capital=c if c is not None else default_capital,
        )
        for gid, (g, c) in enumerate(zip(groups, capitals))
    ]

    pairs: set[tuple[int, int]] = set()
    for t in triplets:
        i = member_to_group[t.head]
        j = member_to_group[t.tail]
        if i == j:
            report.self_loops_dropped += 1
            continue
        key = (min(i, j), max(i, j))
        if key in pairs:
            report.duplicate_edges += 1
        else:
            pairs.add(key)
    net = build_network_from_ids(firms, pairs)
    return net, report


def ingest_files(
    triplet_text: str,
    attr_text: str | None = None,
    threshold: float = 0.6,
    default_capital: float | None = None,
    blocking: bool = False,
) -> tuple[SupplyNetwork, IngestReport]:
    """End-to-end ingestion from file contents to network + report."""
    triplets, bad_t = parse_triplets(triplet_text)
    attrs: dict[str, float] = {}
    bad_a = 0
    if attr_text is not None:
        attrs, bad_a = parse_attributes(attr_text)
    net, report = build_network(
        triplets,
        attrs,
        threshold=threshold,
        default_capital=default_capital,
        blocking=blocking,
    )
    report.bad_rows = bad_t + bad_a
    return net, report
