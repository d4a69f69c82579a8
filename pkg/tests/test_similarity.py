import math
import random

import numpy as np
import pytest

from entmatch.similarity import (
    MISSING,
    STRING_MEASURES,
    TOKEN_MEASURES,
    PairFeaturizer,
    SimilarityError,
    Tokenizer,
    build_feature_spec,
    featurize_pairs,
    jaro,
    jaro_winkler,
    levenshtein_distance,
    monge_elkan,
    needleman_wunsch,
    numeric_similarity,
    read_feature_matrix,
    smith_waterman,
    string_similarity,
    token_similarity,
    tokenize,
    write_feature_matrix,
)
from entmatch.tables import Attribute, AttributeSchema, Column, Table

ALPHA = "abcde"


def rand_string(rng, max_len=12):
    return "".join(rng.choice(ALPHA) for _ in range(rng.randrange(0, max_len)))


def levenshtein_oracle(a, b):
    """Full-matrix DP, independent of the two-row production implementation."""
    m, n = len(a), len(b)
    d = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        d[i][0] = i
    for j in range(n + 1):
        d[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            d[i][j] = min(
                d[i - 1][j] + 1,
                d[i][j - 1] + 1,
                d[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
            )
    return d[m][n]


class TestTokenize:
    def test_whitespace(self):
        assert tokenize("2 Acadaca St", Tokenizer("whitespace")) == {"2", "Acadaca", "St"}

    def test_qgram_padding(self):
        assert tokenize("ab", Tokenizer("qgram", 3)) == {"##a", "#ab", "ab#", "b##"}

    def test_empty_string(self):
        assert tokenize("", Tokenizer("whitespace")) == frozenset()
        assert tokenize("", Tokenizer("qgram", 3)) == frozenset()

    def test_qgram_q_validation(self):
        with pytest.raises(SimilarityError):
            Tokenizer("qgram", 1)


class TestTokenSimilarity:
    def test_jaccard(self):
        assert token_similarity({"a", "b"}, {"b", "c"}, "jaccard") == pytest.approx(1 / 3)

    def test_dice_identity(self):
        assert token_similarity({"x", "y"}, {"x", "y"}, "dice") == 1.0

    def test_overlap_min_denominator(self):
        assert token_similarity({"a"}, {"a", "b", "c"}, "overlap_coefficient") == 1.0

    def test_cosine(self):
        assert token_similarity({"a", "b"}, {"a", "c"}, "cosine") == pytest.approx(0.5)

    def test_both_empty(self):
        for m in TOKEN_MEASURES:
            assert token_similarity(set(), set(), m) == 1.0

    def test_one_empty(self):
        for m in TOKEN_MEASURES:
            assert token_similarity({"a"}, set(), m) == 0.0

    def test_multiset_collapse_invariance(self):
        a = ["x", "x", "y"]
        b = ["y", "z", "z", "z"]
        for m in TOKEN_MEASURES:
            assert token_similarity(a, b, m) == token_similarity(set(a), set(b), m)

    def test_rejects_string_measure(self):
        with pytest.raises(SimilarityError):
            token_similarity({"a"}, {"b"}, "jaro")


class TestStringMeasures:
    def test_levenshtein_kitten_sitting(self):
        assert levenshtein_distance("kitten", "sitting") == 3
        assert string_similarity("kitten", "sitting", "levenshtein_sim") == pytest.approx(1 - 3 / 7)

    def test_levenshtein_vs_oracle(self):
        rng = random.Random(42)
        for _ in range(500):
            a = rand_string(rng, 40)
            b = rand_string(rng, 40)
            assert levenshtein_distance(a, b) == levenshtein_oracle(a, b)

    def test_jaro_martha(self):
        assert jaro("MARTHA", "MARHTA") == pytest.approx(0.944444, abs=1e-5)

    def test_jaro_winkler_martha(self):
        assert jaro_winkler("MARTHA", "MARHTA") == pytest.approx(0.961111, abs=1e-5)

    def test_jaro_known_pair_dwayne(self):
        assert jaro("DWAYNE", "DUANE") == pytest.approx(0.822222, abs=1e-5)

    def test_exact_match(self):
        assert string_similarity("abc", "abc", "exact_match") == 1.0
        assert string_similarity("abc", "abd", "exact_match") == 0.0

    def test_needleman_wunsch_known(self):
        # identical: every char matches
        assert needleman_wunsch("abc", "abc") == 3
        # fully different, same length: 3 mismatches beats gaps
        assert needleman_wunsch("aaa", "bbb") == -3
        assert needleman_wunsch("", "ab") == -2

    def test_smith_waterman_known(self):
        assert smith_waterman("abc", "abc") == 3
        assert smith_waterman("xxabcxx", "yyabcyy") == 3
        assert smith_waterman("aaa", "bbb") == 0

    def test_monge_elkan_identity(self):
        assert monge_elkan("john smith", "john smith") == 1.0

    def test_monge_elkan_token_reorder(self):
        assert monge_elkan("john smith", "smith john") == pytest.approx(1.0)

    def test_unknown_measure(self):
        with pytest.raises(SimilarityError):
            string_similarity("a", "b", "jaccard")


NORMALIZED_STRING = ("levenshtein_sim", "jaro", "jaro_winkler", "exact_match", "monge_elkan")


class TestMeasureProperties:
    def test_symmetry_range_identity_random(self):
        rng = random.Random(7)
        for _ in range(2000):
            a = rand_string(rng)
            b = rand_string(rng)
            ta = tokenize(a, Tokenizer("qgram", 3))
            tb = tokenize(b, Tokenizer("qgram", 3))
            for m in TOKEN_MEASURES:
                v = token_similarity(ta, tb, m)
                assert 0.0 <= v <= 1.0
                assert v == token_similarity(tb, ta, m)
                assert token_similarity(ta, ta, m) == 1.0
            for m in NORMALIZED_STRING:
                v = string_similarity(a, b, m)
                assert 0.0 <= v <= 1.0
                assert v == pytest.approx(string_similarity(b, a, m), abs=1e-12)
                assert string_similarity(a, a, m) == 1.0
            # alignment scores: symmetric, raw scale
            assert needleman_wunsch(a, b) == needleman_wunsch(b, a)
            assert smith_waterman(a, b) == smith_waterman(b, a)


class TestNumericSimilarity:
    def test_identity(self):
        assert numeric_similarity(1978, 1978, "absolute_norm") == 1.0

    def test_zero_zero(self):
        assert numeric_similarity(0, 0, "absolute_norm") == 1.0

    def test_half(self):
        assert numeric_similarity(10, 5, "absolute_norm") == pytest.approx(0.5)

    def test_clamped(self):
        assert numeric_similarity(5, -5, "absolute_norm") == 0.0

    def test_exact(self):
        assert numeric_similarity(2.5, 2.5, "exact_match") == 1.0
        assert numeric_similarity(2.5, 2.6, "exact_match") == 0.0

    def test_non_finite_rejected(self):
        with pytest.raises(SimilarityError):
            numeric_similarity(float("nan"), 1.0, "absolute_norm")

    def test_bad_measure(self):
        with pytest.raises(SimilarityError):
            numeric_similarity(1, 2, "jaro")


SCHEMA = AttributeSchema(
    [
        Attribute("name", "scalar", ["name"]),
        Attribute("phone", "list", ["phone_1", "phone_2"]),
        Attribute("year", "scalar", ["year"], "numeric"),
    ]
)


def make_table(rows, name="t"):
    cols = {k: [] for k in ["name", "phone_1", "phone_2", "year"]}
    for r in rows:
        for k in cols:
            cols[k].append(r.get(k))
    columns = [
        Column("name", "text", cols["name"]),
        Column("phone_1", "text", cols["phone_1"]),
        Column("phone_2", "text", cols["phone_2"]),
        Column("year", "numeric", cols["year"]),
    ]
    return Table(name, list(range(len(rows))), columns)


class TestFeatureVectors:
    def test_spec_layout(self):
        spec = build_feature_spec(SCHEMA)
        # text attrs: 4 token + 7 string measures; numeric: 2
        assert len(spec) == 11 + 11 + 2
        assert spec.names[0] == "name__overlap_coefficient"
        assert "year__absolute_norm" in spec.names

    def test_identical_records_all_ones(self):
        t = make_table([{"name": "ann lee", "phone_1": "04", "phone_2": None, "year": 1990.0}] * 2)
        spec = build_feature_spec(SCHEMA)
        fz = PairFeaturizer(SCHEMA, spec)
        vec = fz.vector(t, t, 0, 1)
        assert all(v == 1.0 for v in vec)

    def test_null_side_gives_missing(self):
        t = make_table(
            [
                {"name": "ann", "phone_1": None, "phone_2": None, "year": 1990.0},
                {"name": "ann", "phone_1": "04", "phone_2": None, "year": 1990.0},
            ]
        )
        spec = build_feature_spec(SCHEMA)
        vec = PairFeaturizer(SCHEMA, spec).vector(t, t, 0, 1)
        phone_slice = [v for f, v in zip(spec.features, vec) if f.attribute == "phone"]
        assert all(math.isnan(v) for v in phone_slice)
        name_slice = [v for f, v in zip(spec.features, vec) if f.attribute == "name"]
        assert all(not math.isnan(v) for v in name_slice)

    def test_list_attribute_max_over_cross_product(self):
        t = make_table(
            [
                {"name": "x", "phone_1": "p1", "phone_2": "p2", "year": 1.0},
                {"name": "x", "phone_1": "p2", "phone_2": None, "year": 1.0},
            ]
        )
        spec = build_feature_spec(SCHEMA)
        vec = PairFeaturizer(SCHEMA, spec).vector(t, t, 0, 1)
        em = {f.name: v for f, v in zip(spec.features, vec)}
        assert em["phone__exact_match"] == 1.0

    def test_featurize_pairs_sorted_and_matrix_shape(self):
        t = make_table(
            [
                {"name": "ann", "phone_1": "1", "phone_2": None, "year": 1.0},
                {"name": "bob", "phone_1": "2", "phone_2": None, "year": 2.0},
                {"name": "cid", "phone_1": "3", "phone_2": None, "year": 3.0},
            ]
        )
        spec = build_feature_spec(SCHEMA)
        pairs, mat = featurize_pairs({(1, 2), (0, 1)}, t, t, SCHEMA, spec)
        assert pairs == [(0, 1), (1, 2)]
        assert mat.shape == (2, len(spec))

    def test_unresolvable_id(self):
        t = make_table([{"name": "a", "phone_1": None, "phone_2": None, "year": 1.0}])
        spec = build_feature_spec(SCHEMA)
        with pytest.raises(SimilarityError):
            featurize_pairs({(0, 99)}, t, t, SCHEMA, spec)

    def test_matrix_roundtrip(self, tmp_path):
        t = make_table(
            [
                {"name": "ann", "phone_1": None, "phone_2": None, "year": 1.0},
                {"name": "ann b", "phone_1": "04", "phone_2": None, "year": 2.0},
            ]
        )
        spec = build_feature_spec(SCHEMA)
        pairs, mat = featurize_pairs({(0, 1)}, t, t, SCHEMA, spec)
        write_feature_matrix(tmp_path / "f.csv", pairs, mat, spec)
        pairs2, mat2, names = read_feature_matrix(tmp_path / "f.csv")
        assert pairs2 == pairs
        assert names == spec.names
        assert np.allclose(mat2, np.round(mat, 6), equal_nan=True)

    def test_header_stable_across_runs(self):
        s1 = build_feature_spec(SCHEMA)
        s2 = build_feature_spec(SCHEMA)
        assert s1.names == s2.names
