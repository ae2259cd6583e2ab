"""Noise functions over linearized graphs and plain text.

Three corruptions are provided: masking individual node concepts and edge
relations, replacing a whole depth-first subtree span with one ``[mask]``,
and masking word tokens.  Every operation is pure given an explicit
``random.Random`` generator and returns the corrupted sequence together
with a :class:`CorruptionRecord` that is sufficient to restore the
original sequence exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from . import tokens as tk
from .amr import AmrGraph
from .linearize import LinearLayout, StructureError, linearize_with_layout

# One edit replaces the slice starting at position with a single [mask].
Edit = tuple[str, int, tuple[str, ...]]  # (kind, position, original tokens)


@dataclass(frozen=True)
class CorruptionConfig:
    """Masking rates (fractions of eligible elements) plus the corpus seed."""

    node_rate: float = 0.15
    edge_rate: float = 0.15
    subgraph_rate: float = 0.35
    text_rate: float = 0.15
    seed: int = 0

    def __post_init__(self):
        for name in ("node_rate", "edge_rate", "subgraph_rate", "text_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {value}")


@dataclass(frozen=True)
class CorruptionRecord:
    """What a corruption removed, and where.

    ``edits`` lists replacements in application order; applying them in
    reverse to the corrupted sequence reproduces the original input (see
    :func:`restore_tokens`).  The semantic fields name masked elements in
    graph terms and are filled in when the corruption ran directly on a
    graph.
    """

    edits: tuple[Edit, ...] = ()
    masked_node_ids: frozenset[str] = frozenset()
    masked_edge_indices: frozenset[int] = frozenset()
    removed_subgraph: AmrGraph | None = None
    masked_text_positions: frozenset[int] = frozenset()

    def is_empty(self) -> bool:
        return not self.edits

    def mask_count(self) -> int:
        return len(self.edits)


def merge_records(first: CorruptionRecord, second: CorruptionRecord) -> CorruptionRecord:
    if first.removed_subgraph is not None and second.removed_subgraph is not None:
        raise ValueError("cannot merge two sub-graph removals")
    return CorruptionRecord(
        edits=first.edits + second.edits,
        masked_node_ids=first.masked_node_ids | second.masked_node_ids,
        masked_edge_indices=first.masked_edge_indices | second.masked_edge_indices,
        removed_subgraph=first.removed_subgraph or second.removed_subgraph,
        masked_text_positions=first.masked_text_positions
        | second.masked_text_positions,
    )


def restore_tokens(corrupted: list[str], record: CorruptionRecord) -> list[str]:
    """Undo a corruption: the exact original token sequence."""
    out = list(corrupted)
    for _, position, original in reversed(record.edits):
        if out[position] != tk.MASK:
            raise ValueError(f"no [mask] at position {position}; record mismatch")
        out[position : position + 1] = list(original)
    return out


def derive_rng(seed: int, index: int) -> random.Random:
    """Per-example generator: corpus seed XOR example index."""
    return random.Random(seed ^ index)


def _half_up(x: float) -> int:
    # round-to-nearest with ties away from zero; x is never negative here
    return int(x + 0.5)


@dataclass(frozen=True)
class SequenceScan:
    """Structural positions of a linearized (possibly corrupted) sequence."""

    spans: dict[int, tuple[int, int]]  # pointer index -> (open, close)
    intro_rel: dict[int, int | None]
    def_pos: dict[int, int]
    refs: dict[int, list[int]]
    concept_pos: dict[int, int]
    edge_rel_positions: list[int]
    attr_rel_positions: list[int]


def scan_sequence(toks: list[str]) -> SequenceScan:
    """Locate node spans, pointer uses and relation tokens.

    The sequence must be structurally intact: masking concepts and
    relations one-for-one keeps it scannable, as does span removal.
    """
    spans: dict[int, tuple[int, int]] = {}
    intro_rel: dict[int, int | None] = {}
    def_pos: dict[int, int] = {}
    refs: dict[int, list[int]] = {}
    concept_pos: dict[int, int] = {}
    edge_rel_positions: list[int] = []
    attr_rel_positions: list[int] = []

    stack: list[tuple[int, int]] = []  # (pointer, open position)
    i = 0
    n = len(toks)
    while i < n:
        token = toks[i]
        if token == tk.OPEN:
            pointer = tk.pointer_index(toks[i + 1]) if i + 1 < n else None
            if pointer is None:
                raise StructureError("expected a pointer after '('", i + 1)
            if pointer in def_pos:
                raise StructureError(
                    f"pointer {toks[i + 1]} defined more than once", i + 1
                )
            if i + 2 >= n or tk.is_structural(toks[i + 2]):
                raise StructureError("missing concept after pointer", i + 2)
            def_pos[pointer] = i + 1
            concept_pos[pointer] = i + 2
            previous = toks[i - 1] if i > 0 else ""
            intro_rel[pointer] = (
                i - 1 if tk.is_relation(previous) or previous == tk.MASK else None
            )
            stack.append((pointer, i))
            i += 3
            continue
        if token == tk.CLOSE:
            if not stack:
                raise StructureError("unbalanced ')'", i)
            pointer, open_pos = stack.pop()
            spans[pointer] = (open_pos, i)
            i += 1
            continue
        if tk.is_relation(token):
            nxt = toks[i + 1] if i + 1 < n else ""
            if nxt == tk.OPEN or tk.is_pointer(nxt):
                edge_rel_positions.append(i)
            else:
                attr_rel_positions.append(i)
            i += 1
            continue
        pointer = tk.pointer_index(token)
        if pointer is not None:
            refs.setdefault(pointer, []).append(i)
        i += 1
    if stack:
        raise StructureError("missing close-paren", n)
    return SequenceScan(
        spans=spans,
        intro_rel=intro_rel,
        def_pos=def_pos,
        refs=refs,
        concept_pos=concept_pos,
        edge_rel_positions=edge_rel_positions,
        attr_rel_positions=attr_rel_positions,
    )


def node_edge_step(node_rate: float, edge_rate: float):
    """Corruption step masking concept and edge-relation tokens in place.

    Masks ``round(node_rate * N)`` of the N not-yet-masked concepts and
    ``round(edge_rate * E)`` of the E not-yet-masked edge relations,
    uniformly without replacement.  Parentheses and pointer tokens are
    untouched, one ``[mask]`` per masked element.
    """

    def step(toks: list[str], rng: random.Random):
        scan = scan_sequence(toks)
        concept_candidates = sorted(
            pos for pos in scan.concept_pos.values() if toks[pos] != tk.MASK
        )
        edge_candidates = sorted(scan.edge_rel_positions)
        node_picks = rng.sample(
            concept_candidates, _half_up(node_rate * len(concept_candidates))
        )
        edge_picks = rng.sample(
            edge_candidates, _half_up(edge_rate * len(edge_candidates))
        )
        out = list(toks)
        edits: list[Edit] = []
        node_set = set(node_picks)
        for pos in sorted(node_picks + edge_picks):
            kind = "node" if pos in node_set else "edge"
            edits.append((kind, pos, (toks[pos],)))
            out[pos] = tk.MASK
        return out, CorruptionRecord(edits=tuple(edits))

    return step


def subgraph_step(probability: float):
    """Corruption step replacing one depth-first subtree span by ``[mask]``.

    With the given probability, one eligible span is chosen uniformly and
    the whole ``:rel ( <Zk> ... )`` stretch collapses to a single mask
    token.  A span is eligible when it is not the root span and no pointer
    defined inside it is referenced outside it (removing such a span would
    orphan the reference).  Sequences with fewer than two nodes pass
    through unchanged.
    """

    def step(toks: list[str], rng: random.Random):
        scan = scan_sequence(toks)
        if len(scan.spans) < 2:
            return list(toks), CorruptionRecord()
        if rng.random() >= probability:
            return list(toks), CorruptionRecord()
        eligible: list[tuple[int, int]] = []
        for pointer, (open_pos, close_pos) in sorted(
            scan.spans.items(), key=lambda item: item[1][0]
        ):
            start = scan.intro_rel[pointer]
            if start is None:
                continue
            if _span_is_eligible(scan, open_pos, close_pos):
                eligible.append((start, close_pos))
        if not eligible:
            return list(toks), CorruptionRecord()
        start, end = eligible[rng.randrange(len(eligible))]
        removed = tuple(toks[start : end + 1])
        out = toks[:start] + [tk.MASK] + toks[end + 1 :]
        return out, CorruptionRecord(edits=(("subgraph", start, removed),))

    return step


def _span_is_eligible(scan: SequenceScan, open_pos: int, close_pos: int) -> bool:
    for pointer, definition in scan.def_pos.items():
        if open_pos <= definition <= close_pos:
            for ref in scan.refs.get(pointer, ()):
                if not (open_pos <= ref <= close_pos):
                    return False
    return True


def text_step(rate: float):
    """Corruption step masking word tokens that are not already masked."""

    def step(toks: list[str], rng: random.Random):
        candidates = [i for i, token in enumerate(toks) if token != tk.MASK]
        picks = sorted(rng.sample(candidates, _half_up(rate * len(candidates))))
        out = list(toks)
        edits: list[Edit] = []
        for pos in picks:
            edits.append(("text", pos, (toks[pos],)))
            out[pos] = tk.MASK
        return out, CorruptionRecord(
            edits=tuple(edits), masked_text_positions=frozenset(picks)
        )

    return step


def mask_text(toks: list[str], rate: float, rng: random.Random):
    """Replace ``round(rate * n)`` uniformly chosen word tokens by ``[mask]``."""
    for token in toks:
        if token in tk.MARKERS:
            raise ValueError(f"text to corrupt must not contain marker {token}")
    return text_step(rate)(list(toks), rng)


def compose(graph: AmrGraph, steps, rng: random.Random):
    """Apply corruption steps in order to the graph's linearization.

    Steps run on the running token sequence (sub-graph masking is
    conventionally first so later steps see the remaining elements);
    records merge disjointly.  Graph-level record fields are resolved for
    the first step, whose positions refer to the uncorrupted
    linearization.
    """
    toks, layout = linearize_with_layout(graph)
    record = CorruptionRecord()
    for index, step in enumerate(steps):
        toks, step_record = step(toks, rng)
        if index == 0:
            step_record = _attach_graph_info(step_record, graph, layout)
        record = merge_records(record, step_record)
    return toks, record


def mask_nodes_edges(graph: AmrGraph, config: CorruptionConfig, rng: random.Random):
    """Mask node concepts and edge relations of a graph's linearization."""
    return compose(graph, [node_edge_step(config.node_rate, config.edge_rate)], rng)


def mask_subgraph(graph: AmrGraph, config: CorruptionConfig, rng: random.Random):
    """Remove one random subtree span of a graph's linearization."""
    return compose(graph, [subgraph_step(config.subgraph_rate)], rng)


def corrupt_graph(graph: AmrGraph, config: CorruptionConfig, rng: random.Random):
    """The full graph noise: sub-graph masking, then node/edge masking on
    the remaining unmasked elements."""
    return compose(
        graph,
        [
            subgraph_step(config.subgraph_rate),
            node_edge_step(config.node_rate, config.edge_rate),
        ],
        rng,
    )


def mask_selected_nodes_edges(graph: AmrGraph, node_ids, edge_indices):
    """Deterministically mask the given nodes' concepts and edges' relations."""
    toks, layout = linearize_with_layout(graph)
    edits: list[Edit] = []
    positions: list[tuple[int, str]] = []
    for node in node_ids:
        if node not in layout.concept_pos:
            raise ValueError(f"unknown node {node!r}")
        positions.append((layout.concept_pos[node], "node"))
    for index in edge_indices:
        if index not in layout.edge_rel_pos:
            raise ValueError(f"unknown edge index {index}")
        positions.append((layout.edge_rel_pos[index], "edge"))
    out = list(toks)
    for pos, kind in sorted(positions):
        edits.append((kind, pos, (toks[pos],)))
        out[pos] = tk.MASK
    return out, CorruptionRecord(
        edits=tuple(edits),
        masked_node_ids=frozenset(node_ids),
        masked_edge_indices=frozenset(edge_indices),
    )


def remove_subtree(graph: AmrGraph, node: str):
    """Deterministically remove the subtree span rooted at ``node``.

    Raises ``ValueError`` for the root, for unknown nodes, and for spans
    that define a pointer referenced outside the span.
    """
    toks, layout = linearize_with_layout(graph)
    if node not in layout.span:
        raise ValueError(f"unknown node {node!r}")
    if node == graph.root:
        raise ValueError("cannot remove the root span")
    open_pos, close_pos = layout.span[node]
    inside = {
        other
        for other, (o, _) in layout.span.items()
        if open_pos <= o <= close_pos
    }
    for ref_pos, other in layout.ref_positions:
        if other in inside and not (open_pos <= ref_pos <= close_pos):
            raise ValueError(
                f"span of {node!r} defines a pointer referenced outside the span"
            )
    start = layout.intro_rel_pos[node]
    removed = tuple(toks[start : close_pos + 1])
    out = toks[:start] + [tk.MASK] + toks[close_pos + 1 :]
    record = CorruptionRecord(
        edits=(("subgraph", start, removed),),
        removed_subgraph=_induced_subgraph(graph, inside, node),
    )
    return out, record


def _induced_subgraph(graph: AmrGraph, keep: set[str], root: str) -> AmrGraph:
    return AmrGraph(
        nodes={n: c for n, c in graph.nodes.items() if n in keep},
        edges=tuple(e for e in graph.edges if e[0] in keep and e[2] in keep),
        attributes=tuple(a for a in graph.attributes if a[0] in keep),
        root=root,
    )


def _attach_graph_info(
    record: CorruptionRecord, graph: AmrGraph, layout: LinearLayout
) -> CorruptionRecord:
    node_of_concept = {pos: n for n, pos in layout.concept_pos.items()}
    edge_of_rel = {pos: i for i, pos in layout.edge_rel_pos.items()}
    node_of_pointer = layout.node_of_pointer()

    node_ids: set[str] = set()
    edge_indices: set[int] = set()
    removed = record.removed_subgraph
    for kind, pos, original in record.edits:
        if kind == "node":
            node_ids.add(node_of_concept[pos])
        elif kind == "edge":
            edge_indices.add(edge_of_rel[pos])
        elif kind == "subgraph":
            inside: list[str] = []
            for offset, token in enumerate(original):
                if token == tk.OPEN:
                    pointer = tk.pointer_index(original[offset + 1])
                    inside.append(node_of_pointer[pointer])
            removed = _induced_subgraph(graph, set(inside), inside[0])
    return replace(
        record,
        masked_node_ids=frozenset(node_ids),
        masked_edge_indices=frozenset(edge_indices),
        removed_subgraph=removed,
    )
