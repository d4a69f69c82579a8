"""Weighted match graph, connected components, maximal cliques and disjoint-clique extraction."""

from dataclasses import dataclass, field

DEFAULT_COMPONENT_LIMIT = 500


class ClusteringError(Exception):
    pass


class MatchGraph:
    """Undirected weighted graph over record ids; no self-loops, no parallel edges."""

    def __init__(self):
        self.adj = {}  # vertex -> {neighbor: weight}

    @property
    def vertices(self):
        return self.adj.keys()

    def n_vertices(self):
        return len(self.adj)

    def n_edges(self):
        return sum(len(nb) for nb in self.adj.values()) // 2

    def add_edge(self, a, b, w):
        if a == b:
            raise ClusteringError(f"self-loop on vertex {a!r}")
        if w <= 0:
            raise ClusteringError(f"edge ({a!r}, {b!r}) has non-positive weight {w}")
        existing = self.adj.get(a, {}).get(b)
        if existing is not None:
            if existing != w:
                raise ClusteringError(f"duplicate edge ({a!r}, {b!r}) with conflicting weights")
            return
        self.adj.setdefault(a, {})[b] = w
        self.adj.setdefault(b, {})[a] = w

    def weight(self, a, b):
        return self.adj.get(a, {}).get(b)

    def remove_vertices(self, vs):
        for v in vs:
            for u in self.adj.pop(v, {}):
                self.adj[u].pop(v, None)

    def remove_edge(self, a, b):
        self.adj[a].pop(b, None)
        self.adj[b].pop(a, None)

    def subgraph(self, vs):
        vs = set(vs)
        g = MatchGraph()
        for v in vs:
            g.adj[v] = {u: w for u, w in self.adj.get(v, {}).items() if u in vs}
        return g

    def edges(self):
        seen = set()
        for a, nb in self.adj.items():
            for b, w in nb.items():
                key = (a, b) if a <= b else (b, a)
                if key not in seen:
                    seen.add(key)
                    yield key[0], key[1], w


def build_graph(scored_edges):
    """Graph from thresholded scored pairs (id_a, id_b, weight); weightless input gets w=1."""
    g = MatchGraph()
    for edge in scored_edges:
        if len(edge) == 2:
            a, b = edge
            w = 1.0
        else:
            a, b, w = edge
        g.add_edge(a, b, w)
    return g


class UnionFind:
    def __init__(self):
        self.parent = {}
        self.rank = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        self.rank.setdefault(x, 0)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


def connected_components(g):
    """Vertex partition, emitted in ascending minimum-vertex-id order."""
    uf = UnionFind()
    for v in g.vertices:
        uf.find(v)
    for a, b, _ in g.edges():
        uf.union(a, b)
    groups = {}
    for v in g.vertices:
        groups.setdefault(uf.find(v), set()).add(v)
    return sorted(groups.values(), key=lambda s: min(s))


def maximal_cliques(g):
    """All maximal cliques (Bron-Kerbosch with pivoting), as sorted vertex tuples."""
    adj = {v: set(nb) for v, nb in g.adj.items()}
    out = []

    def bk(r, p, x):
        if not p and not x:
            out.append(tuple(sorted(r)))
            return
        pivot = max(p | x, key=lambda v: len(adj[v] & p))
        for v in sorted(p - adj[pivot]):
            bk(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    bk(set(), set(adj), set())
    return out


def edge_weight_loss(a, b, g):
    """Sum of weights of edges joining a vertex in (a ∩ b) with a vertex in (b − a)."""
    inter = set(a) & set(b)
    diff = set(b) - set(a)
    loss = 0.0
    for u in inter:
        nb = g.adj.get(u, {})
        for v in diff:
            w = nb.get(v)
            if w is not None:
                loss += w
    return loss


@dataclass
class EntityCluster:
    entity_id: int
    members: tuple  # sorted vertex tuple
    internal_weight: float


def _internal_weight(members, g):
    total = 0.0
    ms = list(members)
    for i, u in enumerate(ms):
        nb = g.adj.get(u, {})
        for v in ms[i + 1 :]:
            w = nb.get(v)
            if w is not None:
                total += w
    return total


def _select_candidate(candidates, g):
    """Total-order selection among equal-size maximum cliques.

    Extracting clique c destroys edge_weight_loss(c, rival) in each overlapping
    rival; the selected candidate maximizes (loss suffered − loss inflicted)
    summed over rivals, i.e. it preserves the most weight. Ties break by larger
    internal weight, then lexicographically smallest member tuple.
    """
    if len(candidates) == 1:
        return candidates[0]
    scored = []
    for c in candidates:
        score = 0.0
        for other in candidates:
            if other is c:
                continue
            score += edge_weight_loss(other, c, g) - edge_weight_loss(c, other, g)
        scored.append((-score, -_internal_weight(c, g), c))
    scored.sort()
    return scored[0][2]


@dataclass
class ExtractionStep:
    members: tuple
    internal_weight: float
    n_candidates: int
    degraded: bool = False


def _shrink_component(g, limit, removed_log):
    """Drop lowest-weight edges until every component fits under the clique limit."""
    while True:
        comps = [c for c in connected_components(g) if len(c) > limit]
        if not comps:
            return
        for comp in comps:
            edges = [(w, a, b) for a, b, w in g.subgraph(comp).edges()]
            edges.sort(key=lambda e: (e[0], e[1], e[2]))
            w, a, b = edges[0]
            g.remove_edge(a, b)
            removed_log.append((a, b, w))


@dataclass
class ClusteringResult:
    clusters: list  # list[EntityCluster]
    steps: list  # list[ExtractionStep]
    removed_edges: list  # edges dropped by oversize-component degradation


def disjoint_cliques(g, component_limit=DEFAULT_COMPONENT_LIMIT):
    """Greedy disjoint-clique extraction: repeatedly remove the best maximum clique.

    Candidates are the maximum-cardinality maximal cliques of the current graph;
    the selected one minimizes the net edge weight destroyed in the rivals.
    Components larger than component_limit are first thinned by dropping their
    lowest-weight edges (logged and flagged).
    """
    clusters, steps, removed_edges = [], [], []
    for comp in connected_components(g):
        sub = g.subgraph(comp)
        degraded = False
        if len(comp) > component_limit:
            degraded = True
            _shrink_component(sub, component_limit, removed_edges)
        for sub2 in [sub.subgraph(c) for c in connected_components(sub)]:
            while sub2.n_vertices() > 0:
                cliques = maximal_cliques(sub2)
                n = max(len(c) for c in cliques)
                candidates = sorted(c for c in cliques if len(c) == n)
                chosen = _select_candidate(candidates, sub2)
                iw = _internal_weight(chosen, sub2)
                clusters.append(EntityCluster(len(clusters), tuple(chosen), iw))
                steps.append(ExtractionStep(tuple(chosen), iw, len(candidates), degraded))
                sub2.remove_vertices(chosen)
    return ClusteringResult(clusters, steps, removed_edges)


def assign_entity_ids(clusters, all_record_ids=None):
    """Dense entity ids in extraction order; unmatched records become singletons.

    Returns a sorted list of (record_id, entity_id, cluster_size, internal_weight).
    """
    seen = set()
    rows = []
    next_id = 0
    for c in clusters:
        for m in c.members:
            if m in seen:
                raise ClusteringError(f"record {m!r} appears in more than one cluster")
            seen.add(m)
            rows.append((m, next_id, len(c.members), c.internal_weight))
        next_id += 1
    if all_record_ids is not None:
        for rid in all_record_ids:
            if rid not in seen:
                rows.append((rid, next_id, 1, 0.0))
                next_id += 1
    rows.sort()
    return rows


def write_clusters(rows, path, delimiter=","):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"record_id{delimiter}entity_id{delimiter}cluster_size{delimiter}internal_weight\n")
        for rid, eid, size, iw in rows:
            fh.write(f"{rid}{delimiter}{eid}{delimiter}{size}{delimiter}{iw:.6f}\n")


def write_extraction_log(result, path, delimiter=","):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"step{delimiter}members{delimiter}internal_weight{delimiter}n_candidates{delimiter}degraded\n")
        for i, s in enumerate(result.steps):
            members = "|".join(str(m) for m in s.members)
            fh.write(f"{i}{delimiter}{members}{delimiter}{s.internal_weight:.6f}{delimiter}{s.n_candidates}{delimiter}{int(s.degraded)}\n")
