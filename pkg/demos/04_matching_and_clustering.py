"""
From feature vectors to entities
================================

The last two stages: a random forest scores each candidate pair with a match
probability, and the match graph built from the confident pairs is carved
into disjoint cliques -- one clique per real-world entity.
"""

from entmatch import matcher, similarity, synth
from entmatch.clustering import (
    assign_entity_ids,
    build_graph,
    connected_components,
    disjoint_cliques,
)
from entmatch.indexing import IndexingConfig, index_dataset
from entmatch.metrics import clusters_to_pairs, pairwise_metrics
from entmatch.tables import Attribute, AttributeSchema

schema = AttributeSchema(
    [
        Attribute("first_name", "scalar", ["first_name"]),
        Attribute("last_name", "scalar", ["last_name"]),
        Attribute("dob", "scalar", ["dob"]),
        Attribute("phone", "list", ["phone_1", "phone_2"]),
        Attribute("address", "list", ["address_1", "address_2"]),
    ]
)

# ---------------------------------------------------------------------------
# Candidates and features, as in the previous demos.

table, truth = synth.generate_synthetic(1500, 0.15, seed=5)
pairs, _ = index_dataset(table, schema, IndexingConfig(["last_name", "dob", "phone"]))
spec = similarity.build_feature_spec(schema)
pairs, X = similarity.featurize_pairs(pairs, table, table, schema, spec)
print(f"{len(pairs)} candidate pairs, {X.shape[1]} features each")

# ---------------------------------------------------------------------------
# Supervised matching.  Label the candidates against the known truth, hold
# out 30% for evaluation, and train the forest.  Training is deterministic:
# same data and seed give the byte-identical model at any worker count.

labeled = [(p, 1 if p in truth else 0) for p in pairs]
train_set, test_set = matcher.split_train_test(labeled, ratio=0.7, seed=5)
index_of = {p: i for i, p in enumerate(pairs)}
hp = matcher.Hyperparameters(n_trees=50, max_depth=10, min_leaf=2)
model = matcher.train(
    X[[index_of[p] for p, _ in train_set]],
    [y for _, y in train_set],
    spec.names,
    hp,
    seed=5,
)
print(f"out-of-bag accuracy: {model.oob_accuracy:.4f}")

# Probabilities are the fraction of trees voting "match"; thresholding keeps
# the confident pairs, whose probability becomes the graph edge weight.

scored = matcher.score_pairs(model, pairs, X)
matches = matcher.apply_threshold(scored, 0.5)
print(f"{len(matches)} pairs above threshold 0.5")

# ---------------------------------------------------------------------------
# Clustering.  Connected components first, then disjoint maximum cliques
# within each component.  When two candidate cliques overlap, the extraction
# keeps the one whose removal destroys the least edge weight -- a chain
# A-B-C with a strong A-B edge and a weak B-C edge yields {A,B} and {C}.

g = build_graph(matches)
print(f"match graph: {len(list(g.vertices))} vertices, "
      f"{len(connected_components(g))} components")
result = disjoint_cliques(g)
sizes = {}
for c in result.clusters:
    sizes[len(c.members)] = sizes.get(len(c.members), 0) + 1
print("cluster size histogram:", dict(sorted(sizes.items())))

# Every record gets an entity id; records with no confident match become
# singleton entities.

rows = assign_entity_ids(result.clusters, all_record_ids=table.row_ids)
print(f"{len({eid for _, eid, _, _ in rows})} entities over {len(rows)} records")

# ---------------------------------------------------------------------------
# How did we do?  Pairwise precision/recall/F1 against the planted truth.

predicted = clusters_to_pairs(result.clusters)
report = pairwise_metrics(predicted, truth)
print(report.to_text())
