"""DFS linearization of AMR graphs into pointer-token sequences, and back.

A graph flattens to a depth-first token walk in stored edge order.  Every
node receives one pointer token ``<Zk>`` (indices dense in first-visit
order); its first visit emits ``( <Zk> concept``, attribute and edge
relations, and a closing paren, while a reentrant re-visit emits only the
bare pointer.  :func:`delinearize` is the exact inverse up to node
renaming, and :func:`repair` coerces near-valid model output into a
sequence :func:`delinearize` accepts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import tokens as tk
from .amr import AmrGraph, require_valid
from .penman import EMPTY_CONCEPT

EMPTY_GRAPH_TOKENS = (tk.OPEN, tk.pointer(0), EMPTY_CONCEPT, tk.CLOSE)


class StructureError(ValueError):
    """A token sequence that does not encode a graph, with the position of
    the first offending token."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (token {position})")


class RepairError(ValueError):
    """No node could be salvaged; callers substitute EMPTY_GRAPH_TOKENS."""


@dataclass(frozen=True)
class LinearLayout:
    """Token positions produced by one linearization.

    Maps node ids and edge/attribute indices back into the token sequence,
    which is what targeted corruption and record keeping need.  ``span``
    covers a node's first visit from its open to its close paren,
    inclusive; ``intro_rel_pos`` is the position of the relation token
    introducing that span (None for the root).
    """

    pointer_of: dict[str, int]
    concept_pos: dict[str, int]
    edge_rel_pos: dict[int, int]
    attr_rel_pos: dict[int, int]
    span: dict[str, tuple[int, int]]
    intro_rel_pos: dict[str, int | None]
    ref_positions: list[tuple[int, str]] = field(default_factory=list)

    def node_of_pointer(self) -> dict[int, str]:
        return {k: node for node, k in self.pointer_of.items()}


def linearize(graph: AmrGraph) -> list[str]:
    return linearize_with_layout(graph)[0]


def linearize_with_layout(graph: AmrGraph) -> tuple[list[str], LinearLayout]:
    """Depth-first linearization plus the token-position layout."""
    require_valid(graph)
    out = graph.out_edges()
    attrs = graph.node_attributes()

    toks: list[str] = []
    pointer_of: dict[str, int] = {}
    concept_pos: dict[str, int] = {}
    edge_rel_pos: dict[int, int] = {}
    attr_rel_pos: dict[int, int] = {}
    span_open: dict[str, int] = {}
    span: dict[str, tuple[int, int]] = {}
    ref_positions: list[tuple[int, str]] = []

    # Explicit stack; whether a target expands or emits a bare pointer is
    # decided when its visit is popped, i.e. in textual order, so every
    # node is defined at its first occurrence in the depth-first walk.
    stack: list[tuple[str, object]] = [("visit", graph.root)]
    while stack:
        action, payload = stack.pop()
        if action == "close":
            span[payload] = (span_open[payload], len(toks))
            toks.append(tk.CLOSE)
            continue
        if action == "edge":
            index, rel = payload
            edge_rel_pos[index] = len(toks)
            toks.append(rel)
            continue
        node = payload
        if node in pointer_of:
            ref_positions.append((len(toks), node))
            toks.append(tk.pointer(pointer_of[node]))
            continue
        pointer_of[node] = len(pointer_of)
        span_open[node] = len(toks)
        toks.append(tk.OPEN)
        toks.append(tk.pointer(pointer_of[node]))
        concept_pos[node] = len(toks)
        toks.append(graph.concept(node))
        for index, rel, value in attrs[node]:
            attr_rel_pos[index] = len(toks)
            toks.append(rel)
            toks.append(value)
        tail: list[tuple[str, object]] = [("close", node)]
        for index, rel, target in reversed(out[node]):
            tail.append(("visit", target))
            tail.append(("edge", (index, rel)))
        stack.extend(tail)

    # A non-root span is always introduced by the edge relation emitted
    # immediately before its open paren.
    intro_rel_pos = {
        node: open_pos - 1
        if open_pos > 0 and tk.is_relation(toks[open_pos - 1])
        else None
        for node, (open_pos, _) in span.items()
    }

    layout = LinearLayout(
        pointer_of=pointer_of,
        concept_pos=concept_pos,
        edge_rel_pos=edge_rel_pos,
        attr_rel_pos=attr_rel_pos,
        span=span,
        intro_rel_pos=intro_rel_pos,
        ref_positions=ref_positions,
    )
    return toks, layout


def delinearize(toks: list[str]) -> AmrGraph:
    """Rebuild a graph from a linearized sequence.

    Node ids are synthesized from pointer indices (``<Z3>`` becomes
    ``z3``).  The sequence must be balanced and pointer-consistent: every
    pointer is defined once, before any bare reference to it, and the
    rebuilt graph must be valid (no duplicate triples, no cycles through
    back references).
    """
    if not toks:
        raise StructureError("empty sequence", 0)

    nodes: dict[str, str] = {}
    edges: list[tuple[str, str, str]] = []
    attributes: list[tuple[str, str, str]] = []
    edge_seen: set[tuple[str, str, str]] = set()
    attr_seen: set[tuple[str, str, str]] = set()
    reaches: dict[str, set[str]] = {}
    root: str | None = None
    stack: list[str] = []
    pending_rel: tuple[str, int] | None = None

    def add_edge(source: str, rel: str, target: str, position: int) -> None:
        if (source, rel, target) in edge_seen:
            raise StructureError(
                f"duplicate edge ({source}, {rel}, {target})", position
            )
        if target == source or target in reaches[source]:
            raise StructureError(
                f"edge ({source}, {rel}, {target}) would close a cycle", position
            )
        edges.append((source, rel, target))
        edge_seen.add((source, rel, target))
        _propagate_reach(reaches, source, target)

    i = 0
    n = len(toks)
    while i < n:
        token = toks[i]
        if token == tk.OPEN:
            if root is not None and not stack:
                raise StructureError("unexpected content after the graph", i)
            if stack and pending_rel is None:
                raise StructureError("node without an introducing relation", i)
            if i + 1 >= n or tk.pointer_index(toks[i + 1]) is None:
                raise StructureError("expected a pointer after '('", i + 1)
            if i + 2 >= n or tk.is_structural(toks[i + 2]):
                raise StructureError("missing concept after pointer", i + 2)
            node = f"z{tk.pointer_index(toks[i + 1])}"
            if node in nodes:
                raise StructureError(
                    f"pointer {toks[i + 1]} defined more than once", i + 1
                )
            nodes[node] = toks[i + 2]
            reaches[node] = set()
            if root is None:
                root = node
            if stack:
                rel, pos = pending_rel
                add_edge(stack[-1], rel, node, pos)
                pending_rel = None
            stack.append(node)
            i += 3
            continue
        if token == tk.CLOSE:
            if pending_rel is not None:
                raise StructureError(
                    f"relation {pending_rel[0]!r} has no target", pending_rel[1]
                )
            if not stack:
                raise StructureError("unbalanced ')'", i)
            stack.pop()
            i += 1
            continue
        if tk.is_relation(token):
            if not stack:
                raise StructureError("relation outside of a node", i)
            if pending_rel is not None:
                raise StructureError(
                    f"relation {pending_rel[0]!r} has no target", pending_rel[1]
                )
            pending_rel = (token, i)
            i += 1
            continue
        pointer = tk.pointer_index(token)
        if pointer is not None:
            node = f"z{pointer}"
            if node not in nodes:
                raise StructureError(f"pointer {token} used before definition", i)
            if not stack or pending_rel is None:
                raise StructureError(f"unexpected pointer {token}", i)
            rel, _ = pending_rel
            add_edge(stack[-1], rel, node, i)
            pending_rel = None
            i += 1
            continue
        # plain token: an attribute constant
        if not stack or pending_rel is None:
            raise StructureError(f"unexpected token {token!r}", i)
        triple = (stack[-1], pending_rel[0], token)
        if triple in attr_seen:
            raise StructureError(f"duplicate attribute {triple}", i)
        attributes.append(triple)
        attr_seen.add(triple)
        pending_rel = None
        i += 1

    if stack:
        raise StructureError("missing close-paren", n)
    if root is None:
        raise StructureError("sequence contains no node", 0)
    return AmrGraph(
        nodes=nodes, edges=tuple(edges), attributes=tuple(attributes), root=root
    )


def _propagate_reach(reaches: dict[str, set[str]], source: str, target: str) -> None:
    """Maintain, per node, the set of nodes that can reach it."""
    gained = {source} | reaches[source]
    reaches[target] |= gained
    for upstream in reaches.values():
        if target in upstream:
            upstream |= gained


def repair(toks: list[str]) -> list[str]:
    """Coerce an arbitrary token sequence into one delinearize accepts.

    Sequences that already delinearize are returned unchanged.  Otherwise
    a permissive rebuild closes unclosed nodes, drops trailing or
    target-less relations, drops references to pointers that were never
    defined (or not defined yet), keeps the first concept where a pointer
    is defined twice, and discards edges that would close a cycle; the
    salvaged graph is then re-linearized, which renumbers pointers
    densely.  Idempotent.  Raises :class:`RepairError` when no node
    survives; callers then substitute ``EMPTY_GRAPH_TOKENS``.
    """
    toks = list(toks)
    try:
        delinearize(toks)
        return toks
    except StructureError:
        pass
    return linearize(_salvage(toks))


_DROPPED = None  # stack sentinel for spans whose node could not be salvaged


def _salvage(toks: list[str]) -> AmrGraph:
    nodes: dict[str, str] = {}
    edges: list[tuple[str, str, str]] = []
    attributes: list[tuple[str, str, str]] = []
    edge_seen: set[tuple[str, str, str]] = set()
    attr_seen: set[tuple[str, str, str]] = set()
    reaches: dict[str, set[str]] = {}
    by_pointer: dict[int, str] = {}
    root: str | None = None
    stack: list[str | None] = []
    pending_rel: str | None = None

    def define(pointer: int, concept: str) -> str:
        nonlocal root
        node = f"z{pointer}"
        by_pointer[pointer] = node
        nodes[node] = concept
        reaches[node] = set()
        if root is None:
            root = node
        return node

    def fresh_pointer() -> int:
        k = 0
        while k in by_pointer:
            k += 1
        return k

    def attach(node: str) -> None:
        nonlocal pending_rel
        if pending_rel is not None and stack and stack[-1] is not None:
            try_edge(stack[-1], pending_rel, node)
        pending_rel = None

    def try_edge(source: str, rel: str, target: str) -> None:
        if (source, rel, target) in edge_seen:
            return
        if target == source or target in reaches[source]:
            return  # would close a cycle
        edges.append((source, rel, target))
        edge_seen.add((source, rel, target))
        _propagate_reach(reaches, source, target)

    i = 0
    n = len(toks)
    while i < n:
        token = toks[i]
        if token == tk.OPEN:
            pointer = tk.pointer_index(toks[i + 1]) if i + 1 < n else None
            if pointer is not None and pointer in by_pointer:
                # Re-definition: first concept wins, children attach to the
                # original node.
                node = by_pointer[pointer]
                attach(node)
                stack.append(node)
                i += 2
                if i < n and not tk.is_structural(toks[i]):
                    i += 1  # conflicting concept dropped
                continue
            if pointer is not None:
                if i + 2 < n and not tk.is_structural(toks[i + 2]):
                    node = define(pointer, toks[i + 2])
                    attach(node)
                    stack.append(node)
                    i += 3
                else:
                    # pointer without a concept: the span is dropped
                    pending_rel = None
                    stack.append(_DROPPED)
                    i += 2
                continue
            if i + 1 < n and not tk.is_structural(toks[i + 1]):
                node = define(fresh_pointer(), toks[i + 1])
                attach(node)
                stack.append(node)
                i += 2
                continue
            pending_rel = None
            stack.append(_DROPPED)  # '(' without a usable head
            i += 1
            continue
        if token == tk.CLOSE:
            pending_rel = None  # dangling relation dropped
            if stack:
                stack.pop()
            i += 1
            continue
        if tk.is_relation(token):
            pending_rel = token if stack else None
            i += 1
            continue
        pointer = tk.pointer_index(token)
        if pointer is not None:
            if pointer in by_pointer:
                attach(by_pointer[pointer])
            pending_rel = None  # undefined pointer references are dropped
            i += 1
            continue
        if pending_rel is not None and stack and stack[-1] is not None:
            triple = (stack[-1], pending_rel, token)
            if triple not in attr_seen:
                attributes.append(triple)
                attr_seen.add(triple)
        pending_rel = None
        i += 1

    if root is None:
        raise RepairError("no node could be salvaged")

    return _restrict_to_reachable(nodes, edges, attributes, root)


def _restrict_to_reachable(nodes, edges, attributes, root) -> AmrGraph:
    adjacency: dict[str, list[str]] = {n: [] for n in nodes}
    for s, _, t in edges:
        adjacency[s].append(t)
    keep = {root}
    queue = [root]
    while queue:
        for target in adjacency[queue.pop()]:
            if target not in keep:
                keep.add(target)
                queue.append(target)
    return AmrGraph(
        nodes={n: c for n, c in nodes.items() if n in keep},
        edges=tuple(e for e in edges if e[0] in keep and e[2] in keep),
        attributes=tuple(a for a in attributes if a[0] in keep),
        root=root,
    )
