import itertools
import random

import pytest

from entmatch.clustering import (
    ClusteringError,
    EntityCluster,
    MatchGraph,
    assign_entity_ids,
    build_graph,
    connected_components,
    disjoint_cliques,
    edge_weight_loss,
    maximal_cliques,
)


def graph_from(edges):
    g = MatchGraph()
    for e in edges:
        g.add_edge(*e)
    return g


class TestBuildGraph:
    def test_minimal(self):
        g = build_graph([("A", "B", 0.9)])
        assert g.n_vertices() == 2
        assert g.n_edges() == 1
        assert g.weight("A", "B") == 0.9

    def test_empty(self):
        g = build_graph([])
        assert g.n_vertices() == 0

    def test_duplicate_edge_canonicalized(self):
        g = build_graph([("A", "B", 0.9), ("B", "A", 0.9)])
        assert g.n_edges() == 1

    def test_conflicting_duplicate_rejected(self):
        with pytest.raises(ClusteringError):
            build_graph([("A", "B", 0.9), ("B", "A", 0.8)])

    def test_self_loop_rejected(self):
        with pytest.raises(ClusteringError):
            build_graph([("A", "A", 0.9)])

    def test_unweighted_edges_get_unit_weight(self):
        g = build_graph([("A", "B")])
        assert g.weight("A", "B") == 1.0


class TestConnectedComponents:
    def test_transitive_component(self):
        g = graph_from([("A", "B", 1), ("A", "C", 1)])
        assert connected_components(g) == [{"A", "B", "C"}]

    def test_two_components(self):
        g = graph_from([(0, 1, 1), (2, 3, 1)])
        assert connected_components(g) == [{0, 1}, {2, 3}]

    def test_random_graph_vs_bfs_oracle(self):
        rng = random.Random(13)
        n = 1000
        edges = set()
        while len(edges) < 1200:
            a, b = rng.randrange(n), rng.randrange(n)
            if a != b:
                edges.add((min(a, b), max(a, b)))
        g = graph_from([(a, b, 1.0) for a, b in edges])

        # independent BFS reachability oracle
        adj = {}
        for a, b in edges:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        seen, oracle = set(), []
        for v in sorted(adj):
            if v in seen:
                continue
            comp, queue = {v}, [v]
            while queue:
                u = queue.pop()
                for w in adj[u]:
                    if w not in comp:
                        comp.add(w)
                        queue.append(w)
            seen |= comp
            oracle.append(comp)
        oracle.sort(key=min)
        assert connected_components(g) == oracle

    def test_partition_properties(self):
        g = graph_from([(0, 1, 1), (1, 2, 1), (5, 6, 1)])
        comps = connected_components(g)
        union = set().union(*comps)
        assert union == set(g.vertices)
        assert sum(len(c) for c in comps) == len(union)


class TestMaximalCliques:
    def test_triangle(self):
        g = graph_from([("A", "B", 1), ("B", "C", 1), ("A", "C", 1)])
        assert maximal_cliques(g) == [("A", "B", "C")]

    def test_path(self):
        g = graph_from([("A", "B", 1), ("B", "C", 1)])
        assert sorted(maximal_cliques(g)) == [("A", "B"), ("B", "C")]

    def test_overlapping_size4_cliques(self):
        # two 4-cliques sharing B and X, plus a triangle D-Y-Z
        edges = []
        for clique in (("A", "B", "W", "X"), ("B", "C", "X", "Y"), ("D", "Y", "Z")):
            for u, v in itertools.combinations(clique, 2):
                edges.append((u, v))
        g = build_graph(edges)
        cliques = maximal_cliques(g)
        four = sorted(c for c in cliques if len(c) == 4)
        assert four == [("A", "B", "W", "X"), ("B", "C", "X", "Y")]

    def test_vs_brute_force_maximal(self):
        rng = random.Random(3)
        for _ in range(30):
            n = rng.randrange(3, 10)
            vertices = list(range(n))
            edges = [
                (a, b, 1.0)
                for a, b in itertools.combinations(vertices, 2)
                if rng.random() < 0.5
            ]
            if not edges:
                continue
            g = build_graph(edges)
            present = set(g.vertices)
            adj = {v: set(g.adj[v]) for v in present}

            def is_clique(vs):
                return all(b in adj[a] for a, b in itertools.combinations(vs, 2))

            brute = set()
            for r in range(1, len(present) + 1):
                for vs in itertools.combinations(sorted(present), r):
                    if is_clique(vs) and not any(
                        all(u in adj[w] for u in vs) for w in present - set(vs)
                    ):
                        brute.add(vs)
            assert set(maximal_cliques(g)) == brute


class TestEdgeWeightLoss:
    def test_overlapping_four_cliques_loss(self):
        # two overlapping 4-cliques; the four edges joining {B,X} to {A,W} weigh 0.95 each
        edges = []
        for clique in (("A", "B", "W", "X"), ("B", "C", "X", "Y")):
            for u, v in itertools.combinations(clique, 2):
                edges.append((u, v, 0.95))
        g = build_graph(edges)
        loss = edge_weight_loss({"B", "C", "X", "Y"}, {"A", "B", "W", "X"}, g)
        assert loss == pytest.approx(3.80, abs=1e-9)

    def test_disjoint_sets_zero(self):
        g = graph_from([("A", "B", 1), ("C", "D", 1)])
        assert edge_weight_loss({"A", "B"}, {"C", "D"}, g) == 0.0

    def test_equal_sets_zero(self):
        g = graph_from([("A", "B", 1)])
        assert edge_weight_loss({"A", "B"}, {"A", "B"}, g) == 0.0


def brute_force_max_clique_size(g):
    vs = sorted(g.vertices)
    adj = {v: set(g.adj[v]) for v in vs}
    best = 1 if vs else 0
    for r in range(2, len(vs) + 1):
        found = False
        for combo in itertools.combinations(vs, r):
            if all(b in adj[a] for a, b in itertools.combinations(combo, 2)):
                best = r
                found = True
                break
        if not found:
            break
    return best


def random_weighted_graph(rng, max_n=12):
    n = rng.randrange(2, max_n + 1)
    g = MatchGraph()
    edges = [
        (a, b, round(rng.uniform(0.05, 1.0), 3))
        for a, b in itertools.combinations(range(n), 2)
        if rng.random() < rng.uniform(0.2, 0.8)
    ]
    for e in edges:
        g.add_edge(*e)
    return g


class TestDisjointCliques:
    def test_triangle_single_cluster(self):
        g = graph_from([("A", "B", 1), ("B", "C", 1), ("A", "C", 1)])
        result = disjoint_cliques(g)
        assert [c.members for c in result.clusters] == [("A", "B", "C")]

    def test_path_keeps_heavier_edge(self):
        g = graph_from([("A", "B", 0.99), ("B", "C", 0.60)])
        result = disjoint_cliques(g)
        assert [c.members for c in result.clusters] == [("A", "B"), ("C",)]

    def test_path_keeps_heavier_edge_reversed(self):
        g = graph_from([("A", "B", 0.60), ("B", "C", 0.99)])
        result = disjoint_cliques(g)
        assert [c.members for c in result.clusters] == [("B", "C"), ("A",)]

    def test_random_graphs_properties(self):
        rng = random.Random(17)
        for _ in range(100):
            g = random_weighted_graph(rng)
            vertices = set(g.vertices)
            snapshot = graph_from(list(g.edges()))
            result = disjoint_cliques(g)
            members = [set(c.members) for c in result.clusters]
            # disjoint and exhaustive
            assert sum(len(m) for m in members) == len(vertices)
            assert set().union(*members) == vertices
            # first cluster per component is a maximum clique of that component
            comps = connected_components(snapshot)
            for comp in comps:
                comp_clusters = [m for m in members if m <= comp]
                first = comp_clusters[0]
                sub = snapshot.subgraph(comp)
                assert len(first) == brute_force_max_clique_size(sub)
            # every cluster was a clique in the graph state at extraction
            remaining = graph_from(list(snapshot.edges()))
            for c in result.clusters:
                ms = list(c.members)
                for a, b in itertools.combinations(ms, 2):
                    assert remaining.weight(a, b) is not None
                remaining.remove_vertices(ms)

    def test_weight_scale_invariance(self):
        rng = random.Random(23)
        for _ in range(20):
            g1 = random_weighted_graph(rng, max_n=9)
            edges = list(g1.edges())
            g2 = graph_from([(a, b, w * 7.5) for a, b, w in edges])
            r1 = disjoint_cliques(graph_from(edges))
            r2 = disjoint_cliques(g2)
            assert [c.members for c in r1.clusters] == [c.members for c in r2.clusters]

    def test_per_component_equals_whole_graph(self):
        rng = random.Random(29)
        g = random_weighted_graph(rng, max_n=8)
        extra = graph_from([(a + 100, b + 100, w) for a, b, w in g.edges()])
        combined = graph_from(list(g.edges()) + list(extra.edges()))
        r_combined = disjoint_cliques(combined)
        r_parts = disjoint_cliques(graph_from(list(g.edges()))).clusters + disjoint_cliques(
            graph_from(list(extra.edges()))
        ).clusters
        assert sorted(c.members for c in r_combined.clusters) == sorted(c.members for c in r_parts)

    def test_component_limit_degradation(self):
        # a 30-vertex clique with one weak edge, limit 10: must still terminate
        edges = [(a, b, 0.9) for a, b in itertools.combinations(range(30), 2)]
        g = build_graph(edges)
        result = disjoint_cliques(g, component_limit=10)
        assert result.removed_edges
        members = [set(c.members) for c in result.clusters]
        assert set().union(*members) == set(range(30))
        assert any(s.degraded for s in result.steps)


class TestAssignEntityIds:
    def test_dense_ids_with_unmatched_singleton(self):
        clusters = [
            EntityCluster(0, ("a", "b"), 0.9),
            EntityCluster(1, ("c", "d", "e"), 2.0),
        ]
        rows = assign_entity_ids(clusters, all_record_ids=["a", "b", "c", "d", "e", "f"])
        ids = {rid: eid for rid, eid, _, _ in rows}
        assert ids == {"a": 0, "b": 0, "c": 1, "d": 1, "e": 1, "f": 2}

    def test_empty(self):
        assert assign_entity_ids([]) == []

    def test_overlap_rejected(self):
        clusters = [EntityCluster(0, ("a", "b"), 1.0), EntityCluster(1, ("b", "c"), 1.0)]
        with pytest.raises(ClusteringError):
            assign_entity_ids(clusters)

    def test_deterministic(self):
        clusters = [EntityCluster(0, (3, 4), 1.0)]
        r1 = assign_entity_ids(clusters, all_record_ids=[1, 2, 3, 4])
        r2 = assign_entity_ids(clusters, all_record_ids=[1, 2, 3, 4])
        assert r1 == r2
