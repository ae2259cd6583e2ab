"""Core AMR graph model: validation, complexity statistics, isomorphism.

An AMR is a rooted, labeled, directed acyclic graph.  Nodes carry concept
labels and edges carry relation labels.  Constant-valued facts (polarity
markers, quantities, quoted names) live in a separate attribute list, so
graph statistics count semantic variables only.

All types are immutable after construction and all operations are pure,
so graphs can be shared freely across threads.
"""

from __future__ import annotations

import re
from collections import Counter, deque
from dataclasses import dataclass

Edge = tuple[str, str, str]
Attribute = tuple[str, str, str]

SIZE_BUCKETS = ("1-10", "11-20", ">20")
DEPTH_BUCKETS = ("1-3", "4-6", ">6")
REENTRANCY_BUCKETS = ("0", "1-3", ">3")


@dataclass(frozen=True)
class Diagnostic:
    """One invariant violation reported by :func:`validate`."""

    code: str
    message: str


class InvalidGraphError(ValueError):
    """Raised by operations whose precondition is a valid graph."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__(
            "invalid graph: " + "; ".join(d.message for d in self.diagnostics)
        )


@dataclass(frozen=True, eq=True)
class AmrGraph:
    """A rooted labeled directed graph.

    Attributes:
        nodes: mapping from node id to concept label; insertion order is
            preserved and meaningful for deterministic traversal.
        edges: relation triples ``(source, relation, target)`` in
            source-document order.
        attributes: constant triples ``(source, relation, value)``; quoted
            string constants keep their quotes.
        root: id of the root node.

    Node ids are opaque strings: PENMAN variable names on ingest,
    ``z0, z1, ...`` when synthesized.
    """

    nodes: dict[str, str]
    edges: tuple[Edge, ...] = ()
    attributes: tuple[Attribute, ...] = ()
    root: str = ""

    def __post_init__(self):
        object.__setattr__(self, "nodes", dict(self.nodes))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        object.__setattr__(
            self, "attributes", tuple(tuple(a) for a in self.attributes)
        )

    def concept(self, node: str) -> str:
        return self.nodes[node]

    def out_edges(self) -> dict[str, list[tuple[int, str, str]]]:
        """Outgoing ``(edge_index, relation, target)`` per node, in stored order."""
        table: dict[str, list[tuple[int, str, str]]] = {n: [] for n in self.nodes}
        for i, (s, r, t) in enumerate(self.edges):
            if s in table:
                table[s].append((i, r, t))
        return table

    def node_attributes(self) -> dict[str, list[tuple[int, str, str]]]:
        table: dict[str, list[tuple[int, str, str]]] = {n: [] for n in self.nodes}
        for i, (s, r, v) in enumerate(self.attributes):
            if s in table:
                table[s].append((i, r, v))
        return table


@dataclass(frozen=True)
class GraphStats:
    """Graph complexity measures with their standard report buckets."""

    size: int
    depth: int
    reentrancies: int
    size_bucket: str
    depth_bucket: str
    reent_bucket: str


def validate(graph: AmrGraph) -> list[Diagnostic]:
    """Check every graph invariant, returning one diagnostic per violation.

    Violations are returned, never raised, so any structurally well-formed
    record can be inspected.  An empty list means the graph is valid:
    the root exists, all edge and attribute endpoints are known, there are
    no duplicate triples, the graph is connected, every node is reachable
    from the root along directed edges, and the graph is acyclic.
    """
    diags: list[Diagnostic] = []
    nodes = graph.nodes
    if not nodes:
        return [Diagnostic("missing-root", "graph has no nodes")]
    if graph.root not in nodes:
        diags.append(
            Diagnostic("missing-root", f"root {graph.root!r} is not a node")
        )

    anchored: list[Edge] = []
    for s, r, t in graph.edges:
        unknown = [v for v in (s, t) if v not in nodes]
        if unknown:
            diags.append(
                Diagnostic(
                    "dangling-edge",
                    f"edge ({s}, {r}, {t}) references unknown node(s) {unknown}",
                )
            )
        else:
            anchored.append((s, r, t))
    for s, r, v in graph.attributes:
        if s not in nodes:
            diags.append(
                Diagnostic(
                    "dangling-attribute",
                    f"attribute ({s}, {r}, {v}) references unknown node {s!r}",
                )
            )

    for triple, count in Counter(graph.edges).items():
        if count > 1:
            diags.append(
                Diagnostic("duplicate-edge", f"edge {triple} appears {count} times")
            )
    for triple, count in Counter(graph.attributes).items():
        if count > 1:
            diags.append(
                Diagnostic(
                    "duplicate-attribute", f"attribute {triple} appears {count} times"
                )
            )

    diags.extend(_check_symbols(graph))

    if graph.root in nodes:
        undirected: dict[str, set[str]] = {n: set() for n in nodes}
        for s, _, t in anchored:
            undirected[s].add(t)
            undirected[t].add(s)
        component = _closure({graph.root}, undirected)
        stray = [n for n in nodes if n not in component]
        while stray:
            group = _closure({stray[0]}, undirected)
            diags.append(
                Diagnostic(
                    "disconnected",
                    f"component {sorted(group)} is not connected to the root",
                )
            )
            stray = [n for n in stray if n not in group]

        directed: dict[str, set[str]] = {n: set() for n in nodes}
        for s, _, t in anchored:
            directed[s].add(t)
        reachable = _closure({graph.root}, directed)
        unreachable = sorted(n for n in component if n not in reachable)
        if unreachable:
            diags.append(
                Diagnostic(
                    "unreachable",
                    "nodes not reachable from the root along directed edges: "
                    f"{unreachable}",
                )
            )

    diags.extend(_find_cycles(nodes, anchored))
    return diags


# Characters that delimit tokens in both the PENMAN grammar and the token
# text form; symbols containing them cannot survive a round trip.
_BREAK_CHARS = set(' \t\r\n()/"')

_POINTER_SHAPE = re.compile(r"<Z\d+>\Z")


def _plain_symbol_ok(symbol: str) -> bool:
    return bool(symbol) and not any(c in _BREAK_CHARS for c in symbol)


def _value_ok(value: str) -> bool:
    # quoted constants may contain anything but a newline or stray quote
    if len(value) >= 2 and value.startswith('"') and value.endswith('"'):
        return "\n" not in value and '"' not in value[1:-1]
    return _plain_symbol_ok(value) and not _POINTER_SHAPE.match(value)


def _check_symbols(graph: AmrGraph) -> list[Diagnostic]:
    """Reject labels that collide with the serialization grammars.

    A node id or concept containing delimiter characters, a concept shaped
    like a pointer token, a relation without its leading colon, or an
    unquoted constant with delimiters would all serialize into text that
    no longer parses back to the same graph, so they are invalid.
    """
    diags: list[Diagnostic] = []
    for node, concept in graph.nodes.items():
        if not _plain_symbol_ok(node) or node.startswith(":"):
            diags.append(Diagnostic("bad-symbol", f"unusable node id {node!r}"))
        if not _value_ok(concept) or concept.startswith(":"):
            diags.append(
                Diagnostic(
                    "bad-symbol", f"unusable concept {concept!r} on node {node!r}"
                )
            )
    relations = [(s, r) for s, r, _ in graph.edges]
    relations += [(s, r) for s, r, _ in graph.attributes]
    for source, rel in relations:
        if len(rel) < 2 or not rel.startswith(":") or not _plain_symbol_ok(rel):
            diags.append(
                Diagnostic(
                    "bad-symbol", f"unusable relation {rel!r} on node {source!r}"
                )
            )
    for source, rel, value in graph.attributes:
        if not _value_ok(value) or value.startswith(":"):
            diags.append(
                Diagnostic(
                    "bad-symbol",
                    f"unusable constant {value!r} under ({source!r}, {rel!r})",
                )
            )
    return diags


def _closure(start: set[str], adjacency: dict[str, set[str]]) -> set[str]:
    seen = set(start)
    frontier = deque(start)
    while frontier:
        for nxt in adjacency[frontier.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def _find_cycles(nodes, edges) -> list[Diagnostic]:
    """Report one diagnostic per back edge found by depth-first search."""
    adjacency: dict[str, list[str]] = {n: [] for n in nodes}
    for s, _, t in edges:
        adjacency[s].append(t)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    diags: list[Diagnostic] = []
    for start in nodes:
        if color[start] != WHITE:
            continue
        path: list[str] = []
        stack: list[tuple[str, int]] = [(start, 0)]
        while stack:
            node, child_index = stack.pop()
            if child_index == 0:
                color[node] = GRAY
                path.append(node)
            if child_index < len(adjacency[node]):
                stack.append((node, child_index + 1))
                child = adjacency[node][child_index]
                if color[child] == GRAY:
                    cycle = path[path.index(child):] + [child]
                    diags.append(
                        Diagnostic("cycle", "cycle: " + " -> ".join(cycle))
                    )
                elif color[child] == WHITE:
                    stack.append((child, 0))
            else:
                color[node] = BLACK
                path.pop()
    return diags


def require_valid(graph: AmrGraph) -> None:
    diags = validate(graph)
    if diags:
        raise InvalidGraphError(diags)


def compute_stats(graph: AmrGraph) -> GraphStats:
    """Size, depth and reentrancy counts with their report buckets.

    Depth is the largest per-node distance from the root, where each
    node's distance is its shortest directed path (the minimum is used for
    reentrant nodes so the measure is well defined on any DAG).  Attribute
    constants are not nodes and contribute to none of the measures.
    """
    require_valid(graph)
    size = len(graph.nodes)

    distance = {graph.root: 0}
    frontier = deque([graph.root])
    out = graph.out_edges()
    while frontier:
        node = frontier.popleft()
        for _, _, target in out[node]:
            if target not in distance:
                distance[target] = distance[node] + 1
                frontier.append(target)
    depth = max(distance.values())

    in_degree = Counter(t for _, _, t in graph.edges)
    reentrancies = sum(1 for count in in_degree.values() if count > 1)

    return GraphStats(
        size=size,
        depth=depth,
        reentrancies=reentrancies,
        size_bucket=size_bucket(size),
        depth_bucket=depth_bucket(depth),
        reent_bucket=reentrancy_bucket(reentrancies),
    )


def size_bucket(size: int) -> str:
    if size <= 10:
        return SIZE_BUCKETS[0]
    if size <= 20:
        return SIZE_BUCKETS[1]
    return SIZE_BUCKETS[2]


def depth_bucket(depth: int) -> str:
    # Depth 0 (single-node graph) falls into the lowest group.
    if depth <= 3:
        return DEPTH_BUCKETS[0]
    if depth <= 6:
        return DEPTH_BUCKETS[1]
    return DEPTH_BUCKETS[2]


def reentrancy_bucket(reentrancies: int) -> str:
    if reentrancies == 0:
        return REENTRANCY_BUCKETS[0]
    if reentrancies <= 3:
        return REENTRANCY_BUCKETS[1]
    return REENTRANCY_BUCKETS[2]


def rename_nodes(graph: AmrGraph, mapping: dict[str, str]) -> AmrGraph:
    """Rebuild the graph with node ids renamed through ``mapping``."""
    missing = [n for n in graph.nodes if n not in mapping]
    if missing:
        raise ValueError(f"mapping does not cover nodes {missing}")
    if len(set(mapping[n] for n in graph.nodes)) != len(graph.nodes):
        raise ValueError("mapping is not injective")
    return AmrGraph(
        nodes={mapping[n]: c for n, c in graph.nodes.items()},
        edges=tuple((mapping[s], r, mapping[t]) for s, r, t in graph.edges),
        attributes=tuple((mapping[s], r, v) for s, r, v in graph.attributes),
        root=mapping[graph.root],
    )


def is_isomorphic(first: AmrGraph, second: AmrGraph) -> bool:
    """True iff some node-id bijection preserves root, concepts, edges and
    attributes.

    Node colors are refined jointly (a Weisfeiler-Leman style partition
    seeded with concept, root flag, degrees and attribute multiset); a
    mismatch of the refined color signatures rejects early, and any match
    is confirmed by an exact backtracking search restricted to same-color
    candidates, so the answer is exact at every size.  Runtime can
    degenerate only on automorphism-heavy graphs.
    """
    require_valid(first)
    require_valid(second)
    if len(first.nodes) != len(second.nodes):
        return False
    if len(first.edges) != len(second.edges):
        return False
    if len(first.attributes) != len(second.attributes):
        return False
    if Counter(first.nodes.values()) != Counter(second.nodes.values()):
        return False
    if Counter(r for _, r, _ in first.edges) != Counter(
        r for _, r, _ in second.edges
    ):
        return False
    if first.nodes[first.root] != second.nodes[second.root]:
        return False

    colors1, colors2 = _joint_colors(first, second)
    if _color_signature(first, colors1) != _color_signature(second, colors2):
        return False
    return _search_bijection(first, second, colors1, colors2)


def _attr_multisets(graph: AmrGraph) -> dict[str, tuple]:
    table: dict[str, list] = {n: [] for n in graph.nodes}
    for s, r, v in graph.attributes:
        table[s].append((r, v))
    return {n: tuple(sorted(pairs)) for n, pairs in table.items()}


def _joint_colors(first: AmrGraph, second: AmrGraph):
    interned: dict = {}

    def intern(key):
        value = interned.get(key)
        if value is None:
            value = len(interned)
            interned[key] = value
        return value

    def adjacency(graph):
        out: dict[str, list] = {n: [] for n in graph.nodes}
        inn: dict[str, list] = {n: [] for n in graph.nodes}
        for s, r, t in graph.edges:
            out[s].append((r, t))
            inn[t].append((r, s))
        return out, inn

    def initial(graph):
        out, inn = adjacency(graph)
        attrs = _attr_multisets(graph)
        colors = {
            n: intern(
                (
                    "node",
                    graph.nodes[n],
                    n == graph.root,
                    len(out[n]),
                    len(inn[n]),
                    attrs[n],
                )
            )
            for n in graph.nodes
        }
        return colors, out, inn

    colors1, out1, inn1 = initial(first)
    colors2, out2, inn2 = initial(second)

    def refine(colors, out, inn):
        return {
            n: intern(
                (
                    colors[n],
                    tuple(sorted((r, colors[t]) for r, t in out[n])),
                    tuple(sorted((r, colors[s]) for r, s in inn[n])),
                )
            )
            for n in colors
        }

    for _ in range(len(first.nodes) + 1):
        before = len(set(colors1.values()) | set(colors2.values()))
        colors1 = refine(colors1, out1, inn1)
        colors2 = refine(colors2, out2, inn2)
        after = len(set(colors1.values()) | set(colors2.values()))
        if after == before:
            break
    return colors1, colors2


def _color_signature(graph: AmrGraph, colors):
    return (
        colors[graph.root],
        tuple(sorted(Counter(colors.values()).items())),
        tuple(sorted((colors[s], r, colors[t]) for s, r, t in graph.edges)),
        tuple(sorted((colors[s], r, v) for s, r, v in graph.attributes)),
    )


def _search_bijection(first, second, colors1, colors2) -> bool:
    by_color: dict[int, list[str]] = {}
    for n in second.nodes:
        by_color.setdefault(colors2[n], []).append(n)
    candidates = {n: by_color.get(colors1[n], []) for n in first.nodes}
    if any(not c for c in candidates.values()):
        return False
    order = sorted(first.nodes, key=lambda n: len(candidates[n]))

    out1: dict[str, list] = {n: [] for n in first.nodes}
    inn1: dict[str, list] = {n: [] for n in first.nodes}
    for s, r, t in first.edges:
        out1[s].append((r, t))
        inn1[t].append((r, s))
    edge_set2 = set(second.edges)

    mapping: dict[str, str] = {}
    used: set[str] = set()

    def consistent(v1: str, v2: str) -> bool:
        for r, t in out1[v1]:
            image = mapping.get(t)
            if image is not None and (v2, r, image) not in edge_set2:
                return False
        for r, s in inn1[v1]:
            image = mapping.get(s)
            if image is not None and (image, r, v2) not in edge_set2:
                return False
        return True

    def extend(position: int) -> bool:
        if position == len(order):
            return True
        v1 = order[position]
        for v2 in candidates[v1]:
            if v2 in used or not consistent(v1, v2):
                continue
            mapping[v1] = v2
            used.add(v2)
            if extend(position + 1):
                return True
            del mapping[v1]
            used.discard(v2)
        return False

    return extend(0)
