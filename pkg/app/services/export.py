"""Flat-file exports: DOT graphs, tab-separated tables and report.json."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence

import networkx as nx

from app.services.complex import TruncGraph
from app.services.projections import ProjectionSystem

logger = logging.getLogger(__name__)

PALETTE = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
]


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: TruncGraph) -> str:
    """Graphviz text with one fill colour per coset."""
    cosets = sorted({graph.coset_of_node(node) for node in graph.graph.nodes()})
    colour = {coset: PALETTE[i % len(PALETTE)] for i, coset in enumerate(cosets)}
    name = graph.kind if graph.depth is None else f"{graph.kind}_depth{graph.depth}"
    lines = [f"graph {name}_K{graph.K} {{", "  node [style=filled, shape=circle];"]
    ordered = sorted(graph.graph.nodes(), key=graph.label)
    for node in ordered:
        lines.append(
            f"  {_quote(graph.label(node))} "
            f"[fillcolor={_quote(colour[graph.coset_of_node(node)])}];"
        )
    edges = sorted(
        tuple(sorted((graph.label(u), graph.label(v)))) for u, v in graph.graph.edges()
    )
    for u, v in edges:
        lines.append(f"  {_quote(u)} -- {_quote(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_tsv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        handle.write("\t".join(header) + "\n")
        for row in rows:
            handle.write("\t".join(str(cell) for cell in row) + "\n")
    logger.info("Wrote %s", path)
    return path


def write_projection_table(system: ProjectionSystem, path: Path) -> Path:
    return write_tsv(path, ("target", "source", "projection", "diameter"), system.export_rows())


def write_distance_table(graph: TruncGraph, path: Path) -> Path:
    rows = []
    for source, lengths in sorted(nx.all_pairs_shortest_path_length(graph.graph),
                                  key=lambda item: graph.label(item[0])):
        for target, d in sorted(lengths.items(), key=lambda item: graph.label(item[0])):
            rows.append((graph.label(source), graph.label(target), d))
    return write_tsv(path, ("source", "target", "distance"), rows)


def write_dot(graph: TruncGraph, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_dot(graph), encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def write_report(document: dict, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path
