import json
import math

import pytest
from hypothesis import given, strategies as st

from llmcd.errors import ChunkBudgetError, ConfigError, DataError
from llmcd.graph import Graph, symmetrize
from llmcd.serialize import (
    chunk_plan_json,
    estimate_tokens,
    parse_graph_text,
    plan_chunks,
    serialize,
    serialize_nodes,
)


def small_graph():
    return Graph.from_edges([(0, 1), (0, 2), (1, 2), (3, 4)], nodes=range(6))


class TestSerialize:
    def test_line_format(self):
        text = serialize(small_graph())
        assert text.lines[0] == "Node 0 is connected to: 1, 2"
        assert text.lines[3] == "Node 3 is connected to: 4"

    def test_isolated_marker(self):
        text = serialize(small_graph())
        assert text.lines[5] == "Node 5 is connected to: (none)"

    def test_one_line_per_node_ascending(self):
        g = small_graph()
        text = serialize(g)
        assert len(text.lines) == g.node_count
        ids = [int(line.split()[1]) for line in text.lines]
        assert ids == sorted(ids)

    def test_full_text_joins_lines(self):
        text = serialize(small_graph())
        assert text.full_text == "\n".join(text.lines)
        assert text.char_count == len(text.full_text)

    def test_empty_graph_rejected(self):
        with pytest.raises(DataError):
            serialize(Graph.from_edges([], nodes=[]))

    def test_karate_golden(self, karate_graph):
        text = serialize(karate_graph)
        assert len(text.lines) == 34
        assert (
            text.lines[0]
            == "Node 0 is connected to: 1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 13, 17, 19, 21, 31"
        )

    def test_custom_token_estimator(self):
        text = serialize(small_graph(), token_estimator=lambda s: 99)
        assert text.estimated_tokens == 99

    def test_serialize_nodes_lines_match_full(self):
        g = small_graph()
        full = serialize(g)
        part = serialize_nodes(g, [3, 0])
        assert part.lines == (full.lines[0], full.lines[3])

    def test_serialize_nodes_empty_selection(self):
        with pytest.raises(DataError):
            serialize_nodes(small_graph(), [])


class TestEstimateTokens:
    def test_quarter_of_chars_rounded_up(self):
        assert estimate_tokens("abcd") == 1
        assert estimate_tokens("abcde") == 2

    def test_empty_is_zero(self):
        assert estimate_tokens("") == 0

    @given(st.text(max_size=200), st.text(max_size=200))
    def test_monotone_in_length(self, a, b):
        assert estimate_tokens(a) <= estimate_tokens(a + b)

    @given(st.text(max_size=500))
    def test_matches_ceiling(self, s):
        assert estimate_tokens(s) == math.ceil(len(s) / 4)


class TestRoundTrip:
    def test_karate_round_trip(self, karate_graph):
        text = serialize(karate_graph)
        assert parse_graph_text(text.full_text) == symmetrize(karate_graph)

    def test_directed_round_trips_to_symmetrized(self):
        g = Graph.from_edges([(0, 1), (2, 0)], directed=True)
        assert parse_graph_text(serialize(g).full_text) == symmetrize(g)

    @given(
        st.sets(
            st.tuples(st.integers(0, 25), st.integers(0, 25)).filter(
                lambda e: e[0] != e[1]
            ),
            min_size=1,
            max_size=40,
        )
    )
    def test_round_trip_property(self, edges):
        g = Graph.from_edges(edges)
        assert parse_graph_text(serialize(g).full_text) == g

    def test_bad_line_rejected(self):
        with pytest.raises(DataError):
            parse_graph_text("Node 0 has friends: 1")

    def test_bad_neighbor_token(self):
        with pytest.raises(DataError):
            parse_graph_text("Node 0 is connected to: 1, x")

    def test_self_loop_rejected(self):
        with pytest.raises(DataError):
            parse_graph_text("Node 0 is connected to: 0")

    def test_empty_text_rejected(self):
        with pytest.raises(DataError):
            parse_graph_text("\n\n")


class TestPlanChunks:
    def test_everything_fits_one_chunk(self, karate_graph):
        chunks = plan_chunks(karate_graph, 8000, 3)
        assert len(chunks) == 1
        assert chunks[0].member_nodes == karate_graph.node_ids
        assert chunks[0].anchor_nodes == ()

    def test_budget_respected_for_every_chunk(self, karate_graph):
        budget, overhead = 200, 20
        chunks = plan_chunks(karate_graph, budget, 2, overhead_tokens=overhead)
        assert len(chunks) > 1
        for c in chunks:
            assert c.chunk_text.estimated_tokens + overhead <= budget

    def test_members_partition_the_node_set(self, karate_graph):
        chunks = plan_chunks(karate_graph, 250, 3)
        seen = [n for c in chunks for n in c.member_nodes]
        assert sorted(seen) == list(karate_graph.node_ids)
        assert len(seen) == len(set(seen))

    def test_anchors_are_previous_chunk_tail(self, karate_graph):
        chunks = plan_chunks(karate_graph, 250, 3)
        for prev, cur in zip(chunks, chunks[1:]):
            assert cur.anchor_nodes == prev.member_nodes[-3:]

    def test_first_chunk_has_no_anchors(self, karate_graph):
        chunks = plan_chunks(karate_graph, 250, 3)
        assert chunks[0].anchor_nodes == ()

    def test_anchor_count_zero(self, karate_graph):
        chunks = plan_chunks(karate_graph, 250, 0)
        assert all(c.anchor_nodes == () for c in chunks)

    def test_indices_sequential(self, karate_graph):
        chunks = plan_chunks(karate_graph, 250, 3)
        assert [c.index for c in chunks] == list(range(len(chunks)))

    def test_chunk_text_is_members_plus_anchors(self, karate_graph):
        for c in plan_chunks(karate_graph, 250, 3):
            ids = [int(line.split()[1]) for line in c.chunk_text.lines]
            assert ids == sorted(set(c.member_nodes) | set(c.anchor_nodes))

    def test_oversized_line_names_the_node(self, karate_graph):
        with pytest.raises(ChunkBudgetError) as err:
            plan_chunks(karate_graph, 10, 0)
        assert err.value.node == 0

    def test_budget_below_overhead(self, karate_graph):
        with pytest.raises(ConfigError):
            plan_chunks(karate_graph, 50, 0, overhead_tokens=50)

    def test_negative_anchor_count(self, karate_graph):
        with pytest.raises(ConfigError):
            plan_chunks(karate_graph, 100, -1)

    def test_plan_json(self, karate_graph):
        chunks = plan_chunks(karate_graph, 250, 3)
        plan = json.loads(chunk_plan_json(chunks))
        assert len(plan) == len(chunks)
        assert plan[0]["index"] == 0
        assert plan[1]["anchor_ids"] == list(chunks[1].anchor_nodes)
        assert all("estimated_tokens" in entry for entry in plan)
