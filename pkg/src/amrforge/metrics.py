"""Evaluation: triple overlap F-scores for graphs, corpus BLEU for text.

Graph similarity is the F-score over matched triples under the best
variable mapping found.  The mapping search is hill-climbing over single
reassignments and pairwise swaps from several start mappings; a
brute-force oracle over all injective mappings is provided for small
graphs so the search quality is measurable.  Fine-grained variants score
specific phenomena (edge labels removed, senses ignored, reentrant edges
only, and so on).
"""

from __future__ import annotations

import itertools
import math
import random
import re
from collections import Counter
from dataclasses import dataclass, field

from .amr import AmrGraph, require_valid

_SENSE_RE = re.compile(r"-\d{2,}$")
_SRL_RE = re.compile(r":ARG\d", re.IGNORECASE)

TOP_RELATION = "TOP"
INSTANCE = "instance"


@dataclass(frozen=True)
class TripleSet:
    """A graph as instance, attribute and relation triples.

    Attribute triples include one ``(root, TOP, root concept)`` marker so
    root identity affects scores.  Triples are kept as multisets: label
    rewriting in fine-grained variants can introduce duplicates.
    """

    instances: tuple[tuple[str, str, str], ...]
    attributes: tuple[tuple[str, str, str], ...]
    relations: tuple[tuple[str, str, str], ...]

    @property
    def total(self) -> int:
        return len(self.instances) + len(self.attributes) + len(self.relations)


def to_triples(graph: AmrGraph) -> TripleSet:
    require_valid(graph)
    instances = tuple((n, INSTANCE, c) for n, c in graph.nodes.items())
    attributes = tuple(graph.attributes) + (
        (graph.root, TOP_RELATION, graph.nodes[graph.root]),
    )
    return TripleSet(
        instances=instances, attributes=attributes, relations=tuple(graph.edges)
    )


@dataclass(frozen=True)
class SmatchResult:
    precision: float
    recall: float
    f1: float
    matched: int
    left_total: int
    right_total: int
    mapping: dict[str, str] = field(default_factory=dict)


def _result(matched, left_total, right_total, mapping) -> SmatchResult:
    precision = matched / left_total if left_total else 0.0
    recall = matched / right_total if right_total else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return SmatchResult(
        precision=precision,
        recall=recall,
        f1=f1,
        matched=matched,
        left_total=left_total,
        right_total=right_total,
        mapping={k: v for k, v in mapping.items() if v is not None},
    )


class _MatchContext:
    """Left triples indexed by variable plus counters of the right triples.

    Move gains are computed from the triples touching the changed
    variables only.  That is exact: two left triples can map onto the same
    right triple (competing for its count) only if their mapped endpoints
    coincide, which under an injective mapping means they touch the same
    variables.
    """

    def __init__(self, left: TripleSet, right: TripleSet):
        self.left = left
        # kind tags keep instance/attribute/relation namespaces apart
        self.triples: list[tuple[str, tuple[str, str, str]]] = (
            [("i", t) for t in left.instances]
            + [("a", t) for t in left.attributes]
            + [("r", t) for t in left.relations]
        )
        self.by_var: dict[str, list[int]] = {}
        for index, (kind, (first, _, third)) in enumerate(self.triples):
            self.by_var.setdefault(first, []).append(index)
            if kind == "r" and third != first:
                self.by_var.setdefault(third, []).append(index)
        self.right: Counter = Counter()
        for kind, triples in (("i", right.instances), ("a", right.attributes),
                              ("r", right.relations)):
            for triple in triples:
                self.right[(kind, triple)] += 1
        self.concepts1 = {v: c for v, _, c in left.instances}
        self.concepts2 = {v: c for v, _, c in right.instances}

    def _form(self, index: int, lookup):
        kind, (first, rel, third) = self.triples[index]
        if kind == "r":
            return kind, (lookup(first), rel, lookup(third))
        return kind, (lookup(first), rel, third)

    def _local(self, indices, lookup) -> int:
        forms = Counter(self._form(i, lookup) for i in indices)
        return sum(
            min(count, self.right.get(form, 0)) for form, count in forms.items()
        )

    def count(self, mapping: dict[str, str | None]) -> int:
        return self._local(range(len(self.triples)), mapping.get)

    def delta(self, mapping: dict[str, str | None], changes, memo=None) -> int:
        # the pre-move side depends only on which variables change, so it
        # is shared by all candidate targets within one iteration
        key = frozenset(changes)
        cached = memo.get(key) if memo is not None else None
        if cached is None:
            affected: set[int] = set()
            for var in changes:
                affected.update(self.by_var.get(var, ()))
            cached = (affected, self._local(affected, mapping.get))
            if memo is not None:
                memo[key] = cached
        affected, before = cached
        if not affected:
            return 0

        def changed(var):
            return changes[var] if var in changes else mapping.get(var)

        return self._local(affected, changed) - before


def _name_seed(vars1, vars2) -> dict[str, str | None]:
    names2 = set(vars2)
    return {v: v if v in names2 else None for v in vars1}


def _greedy_mapping(context, vars1, vars2) -> dict[str, str | None]:
    """Match same-concept variables first; the rest stay unmapped."""
    pool: dict[str, list[str]] = {}
    for v2 in vars2:
        pool.setdefault(context.concepts2[v2], []).append(v2)
    taken: set[str] = set()
    mapping: dict[str, str | None] = {}
    for v1 in vars1:
        options = [v for v in pool.get(context.concepts1[v1], []) if v not in taken]
        if options:
            mapping[v1] = options[0]
            taken.add(options[0])
        else:
            mapping[v1] = None
    return mapping


def _random_mapping(vars1, vars2, rng) -> dict[str, str | None]:
    targets: list[str | None] = list(vars2)
    if len(targets) < len(vars1):
        targets += [None] * (len(vars1) - len(targets))
    rng.shuffle(targets)
    return dict(zip(vars1, targets))


def _hill_climb(
    context: _MatchContext,
    vars1: list[str],
    vars2: list[str],
    restarts: int,
    rng: random.Random,
    extra_seeds=(),
):
    seeds: list[dict[str, str | None]] = [
        _name_seed(vars1, vars2),
        _greedy_mapping(context, vars1, vars2),
    ]
    seeds.extend(dict(seed) for seed in extra_seeds)

    climbs = max(restarts, len(seeds))
    best_score = -1
    best_mapping: dict[str, str | None] = {v: None for v in vars1}
    for attempt in range(climbs):
        if attempt < len(seeds):
            mapping = dict(seeds[attempt])
        else:
            mapping = _random_mapping(vars1, vars2, rng)
        score, mapping = _climb_once(context, vars1, vars2, mapping)
        if score > best_score:
            best_score = score
            best_mapping = mapping
    return best_score, best_mapping


_SIDEWAYS_BUDGET = 8  # plateau steps allowed per climb before giving up


def _moves(mapping, vars1, vars2):
    """Single reassignments (with eviction) and pairwise swaps, expressed
    as sparse change dictionaries over the current mapping."""
    holder = {v: k for k, v in mapping.items() if v is not None}
    for v1 in vars1:
        current = mapping[v1]
        for candidate in itertools.chain(vars2, (None,)):
            if candidate == current:
                continue
            owner = holder.get(candidate) if candidate is not None else None
            if owner is not None and owner != v1:
                yield {v1: candidate, owner: None}  # evict the current holder
            else:
                yield {v1: candidate}
    for a, b in itertools.combinations(vars1, 2):
        if mapping[a] != mapping[b]:
            yield {a: mapping[b], b: mapping[a]}


def _climb_once(context, vars1, vars2, mapping):
    mapping = dict(mapping)
    score = context.count(mapping)
    sideways = _SIDEWAYS_BUDGET
    visited = {frozenset(mapping.items())}
    while True:
        memo: dict = {}
        best_gain = 0
        best_move = None
        for changes in _moves(mapping, vars1, vars2):
            gain = context.delta(mapping, changes, memo)
            if gain > best_gain:
                best_gain, best_move = gain, changes
        if best_move is not None:
            mapping.update(best_move)
            score += best_gain
            visited.add(frozenset(mapping.items()))
            continue
        # Stuck on a plateau: take an unvisited equal-score step, a few times.
        if sideways > 0:
            stepped = False
            for changes in _moves(mapping, vars1, vars2):
                if context.delta(mapping, changes, memo) != 0:
                    continue
                key = frozenset((mapping | changes).items())
                if key not in visited:
                    mapping.update(changes)
                    visited.add(key)
                    sideways -= 1
                    stepped = True
                    break
            if stepped:
                continue
        return score, mapping


def smatch(
    graph1: AmrGraph, graph2: AmrGraph, restarts: int = 4, seed: int = 0
) -> SmatchResult:
    """Triple-overlap F-score under the best mapping hill-climbing finds.

    Start mappings are a match-by-identical-name map, a concept-greedy
    map, and random injective maps up to ``restarts`` climbs; each climb
    repeatedly applies the single reassignment or pairwise swap with the
    largest gain in matched triples.  Precision is measured against
    ``graph1`` (the prediction side), recall against ``graph2``.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    require_valid(graph1)
    require_valid(graph2)
    left, right = to_triples(graph1), to_triples(graph2)
    context = _MatchContext(left, right)
    matched, mapping = _hill_climb(
        context,
        list(graph1.nodes),
        list(graph2.nodes),
        restarts,
        random.Random(seed),
    )
    return _result(matched, left.total, right.total, mapping)


def smatch_oracle(graph1: AmrGraph, graph2: AmrGraph) -> SmatchResult:
    """Globally optimal matched count by exhausting injective mappings.

    Only feasible for small graphs: the smaller variable set must have at
    most eight variables.
    """
    require_valid(graph1)
    require_valid(graph2)
    vars1, vars2 = list(graph1.nodes), list(graph2.nodes)
    if min(len(vars1), len(vars2)) > 8:
        raise ValueError("oracle requires one side with at most 8 variables")
    left, right = to_triples(graph1), to_triples(graph2)
    context = _MatchContext(left, right)

    best = -1
    best_mapping: dict[str, str | None] = {v: None for v in vars1}
    if len(vars1) <= len(vars2):
        for images in itertools.permutations(vars2, len(vars1)):
            mapping = dict(zip(vars1, images))
            score = context.count(mapping)
            if score > best:
                best, best_mapping = score, mapping
    else:
        for sources in itertools.permutations(vars1, len(vars2)):
            mapping = {v: None for v in vars1}
            mapping.update(zip(sources, vars2))
            score = context.count(mapping)
            if score > best:
                best, best_mapping = score, mapping
    return _result(best, left.total, right.total, best_mapping)


def _strip_sense(concept: str) -> str:
    return _SENSE_RE.sub("", concept)


def _unlabeled(triples: TripleSet) -> TripleSet:
    return TripleSet(
        instances=triples.instances,
        attributes=tuple(
            (v, r if r == TOP_RELATION else ":label", x)
            for v, r, x in triples.attributes
        ),
        relations=tuple((s, ":label", t) for s, _, t in triples.relations),
    )


def _no_wsd(triples: TripleSet) -> TripleSet:
    return TripleSet(
        instances=tuple((v, r, _strip_sense(c)) for v, r, c in triples.instances),
        attributes=tuple(
            (v, r, _strip_sense(x) if r == TOP_RELATION else x)
            for v, r, x in triples.attributes
        ),
        relations=triples.relations,
    )


def _reentrant_edges(graph: AmrGraph):
    in_degree = Counter(t for _, _, t in graph.edges)
    return tuple(e for e in graph.edges if in_degree[e[2]] > 1)


def _srl_edges(graph: AmrGraph):
    return tuple(e for e in graph.edges if _SRL_RE.match(e[1]))


def _restricted(graph: AmrGraph, edges) -> TripleSet:
    # Instance triples anchor the mapping; attributes and TOP are dropped.
    return TripleSet(
        instances=tuple((n, INSTANCE, c) for n, c in graph.nodes.items()),
        attributes=(),
        relations=tuple(edges),
    )


def _multiset_f(left: Counter, right: Counter) -> SmatchResult | None:
    if not right:
        return None  # reported as absent, never 0 or 1
    matched = sum(min(count, right.get(item, 0)) for item, count in left.items())
    return _result(matched, sum(left.values()), sum(right.values()), {})


def _concept_multiset(graph: AmrGraph) -> Counter:
    return Counter(graph.nodes.values())


def _wiki_multiset(graph: AmrGraph) -> Counter:
    return Counter(v for _, r, v in graph.attributes if r == ":wiki")


def _negation_multiset(graph: AmrGraph) -> Counter:
    marks = Counter()
    for s, r, v in graph.attributes:
        if r == ":polarity":
            marks[(graph.nodes[s], v)] += 1
    for s, r, t in graph.edges:
        if r == ":polarity":
            marks[(graph.nodes[s], graph.nodes[t])] += 1
    return marks


def _name_multiset(graph: AmrGraph) -> Counter:
    attrs_by_node: dict[str, list] = {}
    for s, r, v in graph.attributes:
        attrs_by_node.setdefault(s, []).append((r, v))
    names = Counter()
    for s, r, t in graph.edges:
        if r == ":name":
            signature = (
                graph.nodes[s],
                graph.nodes[t],
                tuple(sorted(attrs_by_node.get(t, []))),
            )
            names[signature] += 1
    return names


def _scored_smatch(
    left: TripleSet,
    right: TripleSet,
    vars1,
    vars2,
    restarts,
    rng,
    extra_seeds,
) -> SmatchResult:
    context = _MatchContext(left, right)
    matched, mapping = _hill_climb(
        context, vars1, vars2, restarts, rng, extra_seeds=extra_seeds
    )
    return _result(matched, left.total, right.total, mapping)


def fine_grained(
    graph1: AmrGraph, graph2: AmrGraph, restarts: int = 4, seed: int = 0
) -> dict[str, SmatchResult | None]:
    """Smatch plus the standard fine-grained sub-metrics.

    Sub-metrics whose reference subset is empty are reported as ``None``
    (absent) rather than 0 or 1.  The variants that re-run the mapping
    search are additionally seeded with the best base mapping, which
    guarantees that removing edge labels or senses never lowers the score
    below the base Smatch.
    """
    base = smatch(graph1, graph2, restarts=restarts, seed=seed)
    vars1, vars2 = list(graph1.nodes), list(graph2.nodes)
    rng = random.Random(seed)
    base_seed = [{v: base.mapping.get(v) for v in vars1}]
    left, right = to_triples(graph1), to_triples(graph2)

    results: dict[str, SmatchResult | None] = {"smatch": base}
    results["unlabeled"] = _scored_smatch(
        _unlabeled(left), _unlabeled(right), vars1, vars2, restarts, rng, base_seed
    )
    results["no_wsd"] = _scored_smatch(
        _no_wsd(left), _no_wsd(right), vars1, vars2, restarts, rng, base_seed
    )
    results["concepts"] = _multiset_f(
        _concept_multiset(graph1), _concept_multiset(graph2)
    )
    results["wikification"] = _multiset_f(
        _wiki_multiset(graph1), _wiki_multiset(graph2)
    )
    results["ner"] = _multiset_f(_name_multiset(graph1), _name_multiset(graph2))
    results["negation"] = _multiset_f(
        _negation_multiset(graph1), _negation_multiset(graph2)
    )

    reentrant2 = _reentrant_edges(graph2)
    if reentrant2:
        results["reentrancy"] = _scored_smatch(
            _restricted(graph1, _reentrant_edges(graph1)),
            _restricted(graph2, reentrant2),
            vars1,
            vars2,
            restarts,
            rng,
            base_seed,
        )
    else:
        results["reentrancy"] = None

    srl2 = _srl_edges(graph2)
    if srl2:
        results["srl"] = _scored_smatch(
            _restricted(graph1, _srl_edges(graph1)),
            _restricted(graph2, srl2),
            vars1,
            vars2,
            restarts,
            rng,
            base_seed,
        )
    else:
        results["srl"] = None
    return results


FINE_GRAINED_KEYS = (
    "smatch",
    "unlabeled",
    "no_wsd",
    "concepts",
    "wikification",
    "ner",
    "negation",
    "reentrancy",
    "srl",
)


def aggregate(results) -> SmatchResult | None:
    """Micro-average: matched and total counts summed across pairs."""
    matched = left_total = right_total = 0
    seen = False
    for result in results:
        if result is None:
            continue
        seen = True
        matched += result.matched
        left_total += result.left_total
        right_total += result.right_total
    if not seen:
        return None
    return _result(matched, left_total, right_total, {})


@dataclass(frozen=True)
class BleuResult:
    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    hypothesis_length: int
    reference_length: int


def corpus_bleu_details(
    hypotheses: list[list[str]], references: list[list[str]], max_order: int = 4
) -> BleuResult:
    """Corpus-level BLEU with uniform n-gram weights and no smoothing.

    Tokens are compared as given; modified n-gram counts are clipped per
    pair and pooled over the corpus before the geometric mean, and the
    brevity penalty uses pooled lengths.
    """
    if len(hypotheses) != len(references):
        raise ValueError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise ValueError("at least one hypothesis/reference pair is required")

    numerators = [0] * max_order
    denominators = [0] * max_order
    hyp_length = 0
    ref_length = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_length += len(hyp)
        ref_length += len(ref)
        for order in range(1, max_order + 1):
            hyp_ngrams = Counter(_ngrams(hyp, order))
            ref_ngrams = Counter(_ngrams(ref, order))
            clipped = sum(
                min(count, ref_ngrams.get(gram, 0))
                for gram, count in hyp_ngrams.items()
            )
            numerators[order - 1] += clipped
            denominators[order - 1] += max(len(hyp) - order + 1, 0)

    precisions = tuple(
        numerators[i] / denominators[i] if denominators[i] else 0.0
        for i in range(max_order)
    )
    if hyp_length == 0:
        brevity_penalty = 0.0
    elif hyp_length > ref_length:
        brevity_penalty = 1.0
    else:
        brevity_penalty = math.exp(1.0 - ref_length / hyp_length)
    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        log_mean = sum(math.log(p) for p in precisions) / max_order
        score = brevity_penalty * math.exp(log_mean)
    return BleuResult(
        score=score,
        precisions=precisions,
        brevity_penalty=brevity_penalty,
        hypothesis_length=hyp_length,
        reference_length=ref_length,
    )


def corpus_bleu(hypotheses: list[list[str]], references: list[list[str]]) -> float:
    return corpus_bleu_details(hypotheses, references).score


def _ngrams(toks: list[str], order: int):
    return (tuple(toks[i : i + order]) for i in range(len(toks) - order + 1))
