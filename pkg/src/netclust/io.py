"""JSON file formats for networks, partitions and quotient recipes.

Files use 1-based vertex ids; everything in memory is 0-based.

Network::

    {"vertices": [{"id": 1, "mass": 1.0}, ...],
     "edges": [{"tail": 1, "head": 2, "weight": 1.0, "kind": "damper"}, ...],
     "inputs": [1, ...]}

Partition::

    {"cells": [[1, 3], [2]]}
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import InputError
from .graph import DAMPER, EDGE_KINDS, Edge, NetworkGraph
from .partition import Partition, QuotientSpec


def _load(path) -> object:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def network_from_dict(doc: dict) -> NetworkGraph:
    try:
        verts = sorted(doc["vertices"], key=lambda v: int(v["id"]))
        ids = [int(v["id"]) for v in verts]
        if ids != list(range(1, len(ids) + 1)):
            raise InputError(f"vertex ids must be 1..n without gaps, got {ids}")
        masses = [float(v["mass"]) for v in verts]
        edges = []
        for e in doc.get("edges", []):
            kind = e.get("kind", DAMPER)
            if kind not in EDGE_KINDS:
                raise InputError(f"unknown edge kind {kind!r}")
            edges.append(Edge(int(e["tail"]) - 1, int(e["head"]) - 1, float(e["weight"]), kind))
        forced = [int(i) - 1 for i in doc.get("inputs", [])]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed network document: {exc!r}") from exc
    return NetworkGraph(masses, edges, forced)


def network_to_dict(g: NetworkGraph) -> dict:
    return {
        "vertices": [{"id": i + 1, "mass": m} for i, m in enumerate(g.masses)],
        "edges": [{"tail": e.tail + 1, "head": e.head + 1, "weight": e.weight, "kind": e.kind}
                  for e in g.edges],
        "inputs": [i + 1 for i in g.forced],
    }


def partition_from_dict(doc: dict, n: int | None = None) -> Partition:
    try:
        cells = [[int(v) - 1 for v in c] for c in doc["cells"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed partition document: {exc!r}") from exc
    part = Partition(tuple(cells))
    if n is not None and part.n != n:
        raise InputError(f"partition covers {part.n} vertices, network has {n}")
    return part


def partition_to_dict(part: Partition) -> dict:
    return {"cells": [[v + 1 for v in c] for c in part.cells]}


def quotient_from_dict(doc: dict) -> QuotientSpec:
    """Recipe for ``synthesize_aep_graph``; cell numbers and vertex ids are 1-based."""
    try:
        def pairs(key):
            return {(int(x["cells"][0]) - 1, int(x["cells"][1]) - 1): float(x["weight"])
                    for x in doc.get(key, [])}

        intra = tuple((int(e["tail"]) - 1, int(e["head"]) - 1, float(e["weight"]),
                       e.get("kind", DAMPER)) for e in doc.get("intra_edges", []))
        return QuotientSpec(
            cell_sizes=tuple(int(s) for s in doc["cell_sizes"]),
            cell_masses=tuple(doc["cell_masses"]),
            damper_weights=pairs("dampers"),
            spring_weights=pairs("springs"),
            intra_edges=intra,
            forced=tuple(int(i) - 1 for i in doc.get("inputs", [])),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"malformed quotient document: {exc!r}") from exc


def read_network(path) -> NetworkGraph:
    return network_from_dict(_load(path))


def read_partition(path, n: int | None = None) -> Partition:
    return partition_from_dict(_load(path), n)


def read_quotient(path) -> QuotientSpec:
    return quotient_from_dict(_load(path))


def write_json(obj, path=None) -> str:
    text = dumps(obj)
    if path is not None:
        Path(path).write_text(text)
    return text
