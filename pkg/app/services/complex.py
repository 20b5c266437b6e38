"""Finite truncations of the projection complex and the quasi-tree of spaces.

Both graphs are stored as networkx graphs.  Projection-complex vertices are
CosetIds; quasi-tree vertices are (CosetId, word) pairs, one per point of the
coset within the truncation depth.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Hashable, Literal

import networkx as nx
import numpy as np

from app.config import get_settings
from app.core.errors import AxiomsFailed, CapacityExceeded, Disconnected, PointMissing
from app.services.groups import GroupElement, Word
from app.services.projections import AxiomReport, CosetId, ProjectionSystem

logger = logging.getLogger(__name__)

GraphKind = Literal["ProjectionComplex", "QuasiTreeOfSpaces"]


@dataclass
class TruncGraph:
    graph: nx.Graph
    kind: GraphKind
    K: int
    system: ProjectionSystem = field(repr=False)
    depth: int | None = None

    @property
    def base_coset(self) -> CosetId:
        return self.system.coset_of(self.system.group.identity_word)

    def label(self, node: Hashable) -> str:
        if self.kind == "ProjectionComplex":
            return str(node)
        coset, point = node
        return f"{coset}:{self.system.group.format(point)}"

    def coset_of_node(self, node: Hashable) -> CosetId:
        return node if self.kind == "ProjectionComplex" else node[0]


def default_K(p1_constant: int) -> int:
    return max(1, 4 * p1_constant + 1)


def _require_axioms(axioms: AxiomReport | None) -> None:
    if axioms is not None and axioms.p1_violations:
        raise AxiomsFailed(
            f"{len(axioms.p1_violations)} P1 violations, first {axioms.p1_violations[0]}"
        )


def complex_edges(ps: ProjectionSystem, K: int) -> list[tuple[CosetId, CosetId]]:
    """Pairs {X, Z} with d_Y(X, Z) <= K for every other coset Y."""
    edges = []
    for x, z in itertools.combinations(ps.cosets, 2):
        if all(ps.distance(y, x, z) <= K for y in ps.cosets if y != x and y != z):
            edges.append((x, z))
    return edges


def build_projection_complex(ps: ProjectionSystem, K: int,
                             axioms: AxiomReport | None = None) -> TruncGraph:
    if K < 1:
        raise ValueError("K must be positive")
    _require_axioms(axioms)
    graph = nx.Graph()
    graph.add_nodes_from(ps.cosets)
    graph.add_edges_from(complex_edges(ps, K))
    logger.info(
        "Projection complex K=%d: %d vertices, %d edges",
        K, graph.number_of_nodes(), graph.number_of_edges(),
    )
    return TruncGraph(graph, "ProjectionComplex", K, ps)


def tame_ball(ps: ProjectionSystem, depth: int) -> list[Word]:
    """Elements of T with T-length <= depth, built from the ⟨g⟩-coset reps of T_hat."""
    group, g = ps.group, ps.action.g
    points: set[Word] = set()
    for rep in ps.tame_reps:
        offset = 0 if rep == group.identity_word else 1
        for k in range(-(depth - offset), depth - offset + 1):
            points.add(group.mul(group.power(g, k), rep))
    return sorted(points, key=group.sort_key)


def build_quasi_tree_of_spaces(ps: ProjectionSystem, K: int, depth: int,
                               axioms: AxiomReport | None = None,
                               complex_graph: TruncGraph | None = None) -> TruncGraph:
    """Coset copies of T joined along the edges of the projection complex.

    A prebuilt complex for the same system and K is reused as is.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    if complex_graph is None:
        complex_graph = build_projection_complex(ps, K, axioms)
    elif complex_graph.K != K or complex_graph.system is not ps:
        raise ValueError("complex_graph was built for another system or K")
    else:
        _require_axioms(axioms)
    group = ps.group
    offsets = tame_ball(ps, depth)
    graph = nx.Graph()
    for coset in ps.cosets:
        points = [group.mul(coset.word, t) for t in offsets]
        graph.add_nodes_from(((coset, p) for p in points), coset=coset)
        for p, q in itertools.combinations(points, 2):
            if ps.t_distance(p, q) == 1:
                graph.add_edge((coset, p), (coset, q))
    inter = 0
    for x, y in complex_graph.graph.edges():
        for p in ps.projection(x, y):
            for q in ps.projection(y, x):
                u, v = (x, p.word), (y, q.word)
                if u in graph and v in graph:
                    graph.add_edge(u, v)
                    inter += 1
    logger.info(
        "Quasi-tree of spaces K=%d depth=%d: %d vertices, %d edges (%d between cosets)",
        K, depth, graph.number_of_nodes(), graph.number_of_edges(), inter,
    )
    return TruncGraph(graph, "QuasiTreeOfSpaces", K, ps, depth)


def _check_size(graph: nx.Graph) -> None:
    limit = get_settings().graph_vertex_limit
    if graph.number_of_nodes() > limit:
        raise CapacityExceeded(f"{graph.number_of_nodes()} vertices exceed the limit {limit}")
    if graph.number_of_nodes() and not nx.is_connected(graph):
        raise Disconnected(f"graph has {nx.number_connected_components(graph)} components")


def distance_matrix(graph: nx.Graph) -> tuple[list[Hashable], np.ndarray]:
    nodes = list(graph.nodes())
    position = {node: i for i, node in enumerate(nodes)}
    matrix = np.zeros((len(nodes), len(nodes)), dtype=np.int64)
    for source, lengths in nx.all_pairs_shortest_path_length(graph):
        row = position[source]
        for target, d in lengths.items():
            matrix[row, position[target]] = d
    return nodes, matrix


def hyperbolicity_delta(graph: TruncGraph | nx.Graph) -> float:
    """Least δ satisfying the four-point condition over all vertex quadruples."""
    graph = graph.graph if isinstance(graph, TruncGraph) else graph
    _check_size(graph)
    _, D = distance_matrix(graph)
    n = len(D)
    worst = 0
    for x in range(n):
        for y in range(x + 1, n):
            s1 = D[x, y] + D
            s2 = D[x][:, None] + D[y][None, :]
            s3 = D[y][:, None] + D[x][None, :]
            sums = np.sort(np.stack((s1, s2, s3)), axis=0)
            worst = max(worst, int((sums[2] - sums[1]).max()))
    return worst / 2


def bottleneck_check(graph: TruncGraph | nx.Graph, Delta: int) -> tuple[bool, tuple | None]:
    """Whether every u-v path meets B(m, Δ) for the BFS midpoint m of u and v."""
    graph = graph.graph if isinstance(graph, TruncGraph) else graph
    _check_size(graph)
    for u, v in itertools.combinations(graph.nodes(), 2):
        path = nx.shortest_path(graph, u, v)
        midpoint = path[len(path) // 2]
        blocked = nx.single_source_shortest_path_length(graph, midpoint, cutoff=Delta)
        if u in blocked or v in blocked:
            continue
        remainder = graph.subgraph(n for n in graph.nodes() if n not in blocked)
        if nx.has_path(remainder, u, v):
            return False, (u, v, midpoint)
    return True, None


def least_bottleneck(graph: TruncGraph | nx.Graph, max_delta: int = 2) -> int | None:
    for delta in range(max_delta + 1):
        if bottleneck_check(graph, delta)[0]:
            return delta
    return None


def translation_growth(graph: TruncGraph, g: GroupElement, n_max: int) -> list[int]:
    """[d(x₀, gⁿx₀)] for n = 1..n_max."""
    group = graph.system.group
    base = graph.base_coset
    if graph.kind == "ProjectionComplex":
        source = base
        targets = [graph.system.coset_of(group.power(g.word, n)) for n in range(1, n_max + 1)]
    else:
        source = (base, group.identity_word)
        targets = []
        for n in range(1, n_max + 1):
            point = group.power(g.word, n)
            targets.append((graph.system.coset_of(point), point))
    missing = [t for t in [source, *targets] if t not in graph.graph]
    if missing:
        raise PointMissing(f"{graph.label(missing[0])} is not in the truncated graph")
    lengths = nx.single_source_shortest_path_length(graph.graph, source)
    distances = []
    for target in targets:
        if target not in lengths:
            raise Disconnected(f"{graph.label(target)} is unreachable from the base point")
        distances.append(lengths[target])
    return distances
