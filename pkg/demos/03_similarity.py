"""
A tour of the similarity measures
=================================

Candidate pairs need numbers a classifier can learn from.  This demo walks
through the three measure families -- token, string, and numeric -- and then
shows how a whole record pair becomes one feature vector.
"""

from entmatch.similarity import (
    Tokenizer,
    build_feature_spec,
    featurize_pairs,
    numeric_similarity,
    string_similarity,
    token_similarity,
    tokenize,
)
from entmatch.tables import Attribute, AttributeSchema, Column, Table

# ---------------------------------------------------------------------------
# Token measures compare *sets* of tokens.  With q-gram tokenization (q=3,
# '#'-padded) even single words produce rich overlapping sets, which is what
# makes these measures robust to typos.

qgram = Tokenizer("qgram", 3)
a, b = tokenize("jonathan", qgram), tokenize("johnathan", qgram)
print("qgrams of 'jonathan':", sorted(a)[:6], "...")
for m in ("jaccard", "dice", "cosine", "overlap_coefficient"):
    print(f"  {m:>20}: {token_similarity(a, b, m):.3f}")

# ---------------------------------------------------------------------------
# String measures work on the characters directly.  Levenshtein counts edits;
# Jaro and Jaro-Winkler reward shared prefixes (made for person names);
# Monge-Elkan aligns multi-word strings token by token.

pairs = [("martha", "marhta"), ("smith", "smyth"), ("12 High St Leeds", "12 High Street Leeds")]
for x, y in pairs:
    print(f"{x!r} vs {y!r}")
    for m in ("levenshtein_sim", "jaro", "jaro_winkler", "monge_elkan"):
        print(f"  {m:>20}: {string_similarity(x, y, m):.4f}")

# Alignment scores (Needleman-Wunsch global, Smith-Waterman local) are raw
# +1/-1/-1 scores, useful when relative magnitude matters:
print("nw('karolin','kathrin') =", string_similarity("karolin", "kathrin", "needleman_wunsch"))
print("sw('karolin','kathrin') =", string_similarity("karolin", "kathrin", "smith_waterman"))

# ---------------------------------------------------------------------------
# Numeric measures: exact match and a normalized absolute difference.

print("abs_norm(100, 95) =", numeric_similarity(100, 95, "absolute_norm"))
print("abs_norm(100, 50) =", numeric_similarity(100, 50, "absolute_norm"))

# ---------------------------------------------------------------------------
# Putting it together: a feature spec expands a schema into named features
# ("attr__measure"), and featurize_pairs turns candidate pairs into a matrix.
# List attributes take the best score over the value cross product; a side
# with no value at all yields NaN, which the classifier handles natively.

schema = AttributeSchema(
    [
        Attribute("name", "scalar", ["name"]),
        Attribute("phone", "list", ["phone_1", "phone_2"]),
    ]
)
table = Table(
    "t",
    [0, 1],
    [
        Column("name", "text", ["Jonathan Smith", "Johnathan Smyth"]),
        Column("phone_1", "text", ["0412345678", "0499999999"]),
        Column("phone_2", "text", [None, "0412345678"]),
    ],
)
spec = build_feature_spec(schema)
pairs, X = featurize_pairs([(0, 1)], table, table, schema, spec)
for name, value in zip(spec.names, X[0]):
    print(f"  {name:>28}: {value:.4f}")
