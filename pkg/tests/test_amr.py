import random
from collections import defaultdict

import pytest

from amrforge import (
    AmrGraph,
    InvalidGraphError,
    compute_stats,
    is_isomorphic,
    rename_nodes,
    validate,
)
from amrforge.amr import depth_bucket, reentrancy_bucket, size_bucket
from amrforge.synth import random_graph


def test_single_node_is_valid():
    assert validate(AmrGraph(nodes={"z0": "boy"}, root="z0")) == []


def test_self_edge_yields_one_cycle_diagnostic():
    graph = AmrGraph(
        nodes={"z1": "harm-01"}, edges=(("z1", ":ARG1", "z1"),), root="z1"
    )
    diags = validate(graph)
    assert len(diags) == 1
    assert diags[0].code == "cycle"
    assert "z1" in diags[0].message


def test_two_node_cycle_reports_node_sequence():
    graph = AmrGraph(
        nodes={"a": "x", "b": "y"},
        edges=(("a", ":r", "b"), ("b", ":s", "a")),
        root="a",
    )
    codes = [d.code for d in validate(graph)]
    assert codes == ["cycle"]


def test_disconnected_nodes_yield_one_connectivity_diagnostic():
    graph = AmrGraph(nodes={"a": "boy", "b": "girl"}, root="a")
    diags = validate(graph)
    assert len(diags) == 1
    assert diags[0].code == "disconnected"


def test_missing_root():
    diags = validate(AmrGraph(nodes={"a": "boy"}, root="x"))
    assert [d.code for d in diags] == ["missing-root"]


def test_dangling_edge():
    graph = AmrGraph(nodes={"a": "boy"}, edges=(("a", ":mod", "q"),), root="a")
    assert any(d.code == "dangling-edge" for d in validate(graph))


def test_dangling_attribute():
    graph = AmrGraph(
        nodes={"a": "boy"}, attributes=(("q", ":polarity", "-"),), root="a"
    )
    assert [d.code for d in validate(graph)] == ["dangling-attribute"]


def test_duplicate_edge_rejected_but_multi_edges_allowed():
    duplicated = AmrGraph(
        nodes={"a": "x", "b": "y"},
        edges=(("a", ":r", "b"), ("a", ":r", "b")),
        root="a",
    )
    assert any(d.code == "duplicate-edge" for d in validate(duplicated))
    multi = AmrGraph(
        nodes={"a": "x", "b": "y"},
        edges=(("a", ":r", "b"), ("a", ":s", "b")),
        root="a",
    )
    assert validate(multi) == []


def test_unreachable_node_is_flagged():
    # b is undirected-connected but cannot be reached from the root
    graph = AmrGraph(
        nodes={"a": "x", "b": "y"}, edges=(("b", ":r", "a"),), root="a"
    )
    assert [d.code for d in validate(graph)] == ["unreachable"]


def test_stats_on_modal_graph(golden):
    stats = compute_stats(golden)
    assert (stats.size, stats.depth, stats.reentrancies) == (4, 2, 0)
    assert stats.size_bucket == "1-10"
    assert stats.depth_bucket == "1-3"
    assert stats.reent_bucket == "0"


def test_stats_single_node():
    stats = compute_stats(AmrGraph(nodes={"z0": "boy"}, root="z0"))
    assert (stats.size, stats.depth, stats.reentrancies) == (1, 0, 0)


def test_stats_contrast_graph(contrast):
    assert compute_stats(contrast).reentrancies == 1


def test_stats_requires_valid_graph():
    graph = AmrGraph(nodes={"a": "x", "b": "y"}, root="a")
    with pytest.raises(InvalidGraphError):
        compute_stats(graph)


def test_bucket_boundaries():
    assert [size_bucket(n) for n in (10, 11, 20, 21)] == [
        "1-10",
        "11-20",
        "11-20",
        ">20",
    ]
    assert [depth_bucket(d) for d in (0, 3, 4, 6, 7)] == [
        "1-3",
        "1-3",
        "4-6",
        "4-6",
        ">6",
    ]
    assert [reentrancy_bucket(r) for r in (0, 1, 3, 4)] == ["0", "1-3", "1-3", ">3"]


def test_isomorphic_under_renaming():
    one = AmrGraph(nodes={"a": "boy"}, root="a")
    two = AmrGraph(nodes={"b": "boy"}, root="b")
    assert is_isomorphic(one, two)


def test_not_isomorphic_on_concept_mismatch():
    one = AmrGraph(nodes={"a": "boy"}, root="a")
    two = AmrGraph(nodes={"b": "girl"}, root="b")
    assert not is_isomorphic(one, two)


def test_modal_graph_isomorphic_to_shuffled_copy(golden):
    mapping = {"z0": "q7", "z1": "q3", "z2": "q9", "z3": "q1"}
    renamed = rename_nodes(golden, mapping)
    shuffled = AmrGraph(
        nodes=dict(reversed(list(renamed.nodes.items()))),
        edges=tuple(reversed(renamed.edges)),
        root=renamed.root,
    )
    assert is_isomorphic(golden, shuffled)


def test_not_isomorphic_on_edge_label_change(golden):
    edges = list(golden.edges)
    edges[0] = (edges[0][0], ":mod", edges[0][2])
    other = AmrGraph(nodes=golden.nodes, edges=edges, root=golden.root)
    assert not is_isomorphic(golden, other)


def test_isomorphism_beyond_exact_search_size():
    rng = random.Random(11)
    for _ in range(20):
        graph = random_graph(rng, 15, 30, max_reentrancies=4, attribute_prob=0.2)
        mapping = {n: f"w{i}" for i, n in enumerate(reversed(list(graph.nodes)))}
        renamed = rename_nodes(graph, mapping)
        shuffled = AmrGraph(
            nodes=dict(sorted(renamed.nodes.items())),
            edges=tuple(sorted(renamed.edges)),
            attributes=tuple(sorted(renamed.attributes)),
            root=renamed.root,
        )
        assert is_isomorphic(graph, shuffled)
        # flip one concept label: no bijection can exist any more
        victim = list(shuffled.nodes)[-1]
        nodes = dict(shuffled.nodes)
        nodes[victim] = nodes[victim] + "-distinct"
        assert not is_isomorphic(
            graph, AmrGraph(nodes=nodes, edges=shuffled.edges,
                            attributes=shuffled.attributes, root=shuffled.root)
        )


def test_attributes_affect_isomorphism():
    one = AmrGraph(
        nodes={"a": "x"}, attributes=(("a", ":polarity", "-"),), root="a"
    )
    two = AmrGraph(nodes={"b": "x"}, root="b")
    assert not is_isomorphic(one, two)


def test_stats_invariant_under_renaming():
    rng = random.Random(3)
    for _ in range(50):
        graph = random_graph(rng, 1, 20, max_reentrancies=3)
        stats = compute_stats(graph)
        mapping = {n: f"v{i}" for i, n in enumerate(reversed(list(graph.nodes)))}
        renamed_stats = compute_stats(rename_nodes(graph, mapping))
        assert (stats.size, stats.depth, stats.reentrancies) == (
            renamed_stats.size,
            renamed_stats.depth,
            renamed_stats.reentrancies,
        )


def _tree_height(graph: AmrGraph) -> int:
    children = defaultdict(list)
    for s, _, t in graph.edges:
        children[s].append(t)

    def height(node):
        if not children[node]:
            return 0
        return 1 + max(height(child) for child in children[node])

    return height(graph.root)


def test_tree_depth_matches_recursive_height_oracle():
    rng = random.Random(17)
    for _ in range(100):
        tree = random_graph(rng, 1, 25, max_reentrancies=0)
        assert compute_stats(tree).depth == _tree_height(tree)


def test_depth_and_reentrancy_bounds():
    rng = random.Random(23)
    for _ in range(100):
        graph = random_graph(rng, 1, 25, max_reentrancies=5)
        stats = compute_stats(graph)
        assert stats.depth <= stats.size - 1
        assert stats.reentrancies <= stats.size - 1


def test_generator_produces_valid_graphs():
    rng = random.Random(29)
    for _ in range(200):
        graph = random_graph(rng, 1, 30, max_reentrancies=5, attribute_prob=0.4)
        assert validate(graph) == []


def test_symbols_colliding_with_the_grammar_are_invalid():
    cases = [
        AmrGraph(nodes={"a b": "x"}, root="a b"),            # id with a space
        AmrGraph(nodes={"a": "<Z0>"}, root="a"),             # pointer-shaped concept
        AmrGraph(nodes={"a": "x y"}, root="a"),              # concept with a space
        AmrGraph(nodes={"a": "x", "b": "y"},
                 edges=(("a", "mod", "b"),), root="a"),      # relation missing ':'
        AmrGraph(nodes={"a": "x"},
                 attributes=(("a", ":op1", "<Z3>"),), root="a"),
        AmrGraph(nodes={"a": ""}, root="a"),                  # empty concept
    ]
    for graph in cases:
        assert any(d.code == "bad-symbol" for d in validate(graph)), graph


def test_quoted_constants_with_spaces_are_valid():
    graph = AmrGraph(
        nodes={"n": "name"},
        attributes=(("n", ":op1", '"New York"'),),
        root="n",
    )
    assert validate(graph) == []
