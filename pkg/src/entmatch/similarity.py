"""String, token and numeric similarity measures plus pairwise feature vectors."""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TOKEN_MEASURES = ("overlap_coefficient", "dice", "cosine", "jaccard")
STRING_MEASURES = (
    "levenshtein_sim",
    "jaro",
    "jaro_winkler",
    "exact_match",
    "needleman_wunsch",
    "smith_waterman",
    "monge_elkan",
)
NUMERIC_MEASURES = ("exact_match", "absolute_norm")

MISSING = float("nan")

QGRAM_PAD = "#"


class SimilarityError(Exception):
    pass


@dataclass(frozen=True)
class Tokenizer:
    kind: str  # whitespace | qgram
    q: int = 3

    def __post_init__(self):
        if self.kind not in ("whitespace", "qgram"):
            raise SimilarityError(f"unknown tokenizer {self.kind!r}")
        if self.kind == "qgram" and self.q < 2:
            raise SimilarityError("qgram tokenizer requires q >= 2")


def tokenize(s, tokenizer):
    """Distinct-token set; the empty string tokenizes to the empty set."""
    if s == "":
        return frozenset()
    if tokenizer.kind == "whitespace":
        return frozenset(s.split())
    q = tokenizer.q
    padded = QGRAM_PAD * (q - 1) + s + QGRAM_PAD * (q - 1)
    return frozenset(padded[i : i + q] for i in range(len(padded) - q + 1))


def token_similarity(a_tokens, b_tokens, measure):
    """Set-based token similarity; both empty -> 1.0, exactly one empty -> 0.0."""
    if measure not in TOKEN_MEASURES:
        raise SimilarityError(f"{measure!r} is not a token measure")
    a, b = set(a_tokens), set(b_tokens)
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    inter = len(a & b)
    if measure == "jaccard":
        return inter / len(a | b)
    if measure == "dice":
        return 2 * inter / (len(a) + len(b))
    if measure == "cosine":
        return inter / math.sqrt(len(a) * len(b))
    return inter / min(len(a), len(b))


def levenshtein_distance(a, b):
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def levenshtein_similarity(a, b):
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein_distance(a, b) / max(len(a), len(b))


def jaro(a, b):
    if a == b:
        return 1.0
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0.0
    window = max(la, lb) // 2 - 1
    matched_a = [False] * la
    matched_b = [False] * lb
    m = 0
    for i, ca in enumerate(a):
        lo = max(0, i - window)
        hi = min(lb, i + window + 1)
        for j in range(lo, hi):
            if not matched_b[j] and b[j] == ca:
                matched_a[i] = matched_b[j] = True
                m += 1
                break
    if m == 0:
        return 0.0
    # transpositions: mismatched order among matched characters
    b_matched = [b[j] for j in range(lb) if matched_b[j]]
    t = 0
    k = 0
    for i in range(la):
        if matched_a[i]:
            if a[i] != b_matched[k]:
                t += 1
            k += 1
    t //= 2
    return (m / la + m / lb + (m - t) / m) / 3


def jaro_winkler(a, b, prefix_scale=0.1, max_prefix=4):
    j = jaro(a, b)
    prefix = 0
    for ca, cb in zip(a[:max_prefix], b[:max_prefix]):
        if ca != cb:
            break
        prefix += 1
    return j + prefix * prefix_scale * (1 - j)


def needleman_wunsch(a, b, match=1, mismatch=-1, gap=-1):
    """Global alignment score (raw integer)."""
    la, lb = len(a), len(b)
    prev = [j * gap for j in range(lb + 1)]
    for i in range(1, la + 1):
        cur = [i * gap]
        ca = a[i - 1]
        for j in range(1, lb + 1):
            sub = prev[j - 1] + (match if ca == b[j - 1] else mismatch)
            cur.append(max(sub, prev[j] + gap, cur[j - 1] + gap))
        prev = cur
    return prev[-1]


def smith_waterman(a, b, match=1, mismatch=-1, gap=-1):
    """Local alignment score (raw integer, >= 0)."""
    la, lb = len(a), len(b)
    best = 0
    prev = [0] * (lb + 1)
    for i in range(1, la + 1):
        cur = [0]
        ca = a[i - 1]
        for j in range(1, lb + 1):
            sub = prev[j - 1] + (match if ca == b[j - 1] else mismatch)
            v = max(0, sub, prev[j] + gap, cur[j - 1] + gap)
            cur.append(v)
            if v > best:
                best = v
        prev = cur
    return best


_WHITESPACE = Tokenizer("whitespace")


def monge_elkan(a, b):
    """Symmetric Monge-Elkan over whitespace tokens with a Jaro-Winkler inner measure."""
    ta, tb = a.split(), b.split()
    if not ta and not tb:
        return 1.0
    if not ta or not tb:
        return 0.0

    def directed(xs, ys):
        return sum(max(jaro_winkler(x, y) for y in ys) for x in xs) / len(xs)

    return (directed(ta, tb) + directed(tb, ta)) / 2


def string_similarity(a, b, measure):
    if measure == "levenshtein_sim":
        return levenshtein_similarity(a, b)
    if measure == "jaro":
        return jaro(a, b)
    if measure == "jaro_winkler":
        return jaro_winkler(a, b)
    if measure == "exact_match":
        return 1.0 if a == b else 0.0
    if measure == "needleman_wunsch":
        return needleman_wunsch(a, b)
    if measure == "smith_waterman":
        return smith_waterman(a, b)
    if measure == "monge_elkan":
        return monge_elkan(a, b)
    raise SimilarityError(f"{measure!r} is not a string measure")


def numeric_similarity(x, y, measure):
    if measure not in NUMERIC_MEASURES:
        raise SimilarityError(f"{measure!r} is not a numeric measure")
    x, y = float(x), float(y)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise SimilarityError("numeric similarity requires finite inputs")
    if measure == "exact_match":
        return 1.0 if x == y else 0.0
    if x == y:
        return 1.0
    v = 1.0 - abs(x - y) / max(abs(x), abs(y))
    return min(1.0, max(0.0, v))


@dataclass(frozen=True)
class Feature:
    attribute: str
    measure: str
    tokenizer: Tokenizer = None

    @property
    def name(self):
        return f"{self.attribute}__{self.measure}"


@dataclass
class FeatureSpec:
    """Fixed-order feature layout; identical between training and scoring."""

    features: list  # list[Feature]

    @property
    def names(self):
        return [f.name for f in self.features]

    def __len__(self):
        return len(self.features)


DEFAULT_QGRAM = Tokenizer("qgram", 3)


def build_feature_spec(schema, tokenizer=DEFAULT_QGRAM):
    """All token and string measures for text attributes; exact/absolute-norm for the rest."""
    feats = []
    for attr in schema.attributes:
        if attr.datatype == "text":
            for m in TOKEN_MEASURES:
                feats.append(Feature(attr.name, m, tokenizer))
            for m in STRING_MEASURES:
                feats.append(Feature(attr.name, m))
        else:
            for m in NUMERIC_MEASURES:
                feats.append(Feature(attr.name, m))
    return FeatureSpec(feats)


def _clamp01(v):
    return min(1.0, max(0.0, v))


def _text_block(a, b, measures, tokenizer):
    """Feature values for one text value pair. Alignment scores are scaled by
    max string length and clamped so every entry lands in [0, 1]."""
    out = []
    ta = tb = None
    for m in measures:
        if m in TOKEN_MEASURES:
            if ta is None:
                ta, tb = tokenize(a, tokenizer), tokenize(b, tokenizer)
            out.append(token_similarity(ta, tb, m))
        elif m in ("needleman_wunsch", "smith_waterman"):
            if not a and not b:
                out.append(1.0)
            else:
                out.append(_clamp01(string_similarity(a, b, m) / max(len(a), len(b))))
        else:
            out.append(string_similarity(a, b, m))
    return out


class PairFeaturizer:
    """Computes feature vectors for candidate pairs against a fixed FeatureSpec."""

    def __init__(self, schema, spec, cache_size=200_000):
        self.schema = schema
        self.spec = spec
        # group spec entries by attribute, preserving spec order
        self._layout = []  # (attribute, kind, datatype, columns, measures, tokenizer)
        by_attr = {}
        for f in spec.features:
            by_attr.setdefault(f.attribute, []).append(f)
        for attr_name, feats in by_attr.items():
            attr = schema.attribute(attr_name)
            tok = next((f.tokenizer for f in feats if f.tokenizer is not None), None)
            self._layout.append((attr, [f.measure for f in feats], tok))
        self._text_cached = lru_cache(maxsize=cache_size)(self._text_uncached)

    def _text_uncached(self, a, b, measures, tokenizer):
        return _text_block(a, b, measures, tokenizer)

    def _attr_values(self, table, cols, row_pos):
        out, seen = [], set()
        for col in cols:
            v = col.values[row_pos]
            if v is not None and v not in seen:
                seen.add(v)
                out.append(v)
        return out

    def vector(self, left_table, right_table, pos_a, pos_b):
        """Feature vector for one pair, given positional row indices in each table."""
        values = []
        for attr, measures, tok in self._layout:
            cols_l = [left_table.column(c) for c in attr.columns]
            cols_r = [right_table.column(c) for c in attr.columns]
            va = self._attr_values(left_table, cols_l, pos_a)
            vb = self._attr_values(right_table, cols_r, pos_b)
            if not va or not vb:
                values.extend([MISSING] * len(measures))
                continue
            if attr.datatype == "text":
                # list attributes: maximum per measure over the value cross product
                block = None
                for x in va:
                    for y in vb:
                        if (x, y) <= (y, x):
                            vals = self._text_cached(x, y, tuple(measures), tok)
                        else:
                            vals = self._text_cached(y, x, tuple(measures), tok)
                        if block is None:
                            block = list(vals)
                        else:
                            block = [max(u, v) for u, v in zip(block, vals)]
                values.extend(block)
            else:
                for m in measures:
                    best = max(
                        numeric_similarity(float(x), float(y), m) for x in va for y in vb
                    )
                    values.append(best)
        return values


def featurize_pairs(pairs, left_table, right_table, schema, spec, workers=1):
    """Feature matrix (numpy, NaN = missing) for pairs in canonical sorted order.

    Returns (sorted pairs list, matrix). Output is independent of worker count.
    """
    pairs = sorted(pairs)
    pos_left = {rid: i for i, rid in enumerate(left_table.row_ids)}
    pos_right = {rid: i for i, rid in enumerate(right_table.row_ids)}
    for a, b in pairs:
        if a not in pos_left:
            raise SimilarityError(f"unresolvable record id {a}")
        if b not in pos_right:
            raise SimilarityError(f"unresolvable record id {b}")

    fz = PairFeaturizer(schema, spec)
    if workers <= 1 or len(pairs) < 2000:
        rows = [fz.vector(left_table, right_table, pos_left[a], pos_right[b]) for a, b in pairs]
    else:
        from concurrent.futures import ProcessPoolExecutor

        chunks = _chunk(pairs, workers)
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(
                ex.map(
                    _featurize_chunk,
                    [(c, left_table, right_table, schema, spec, pos_left, pos_right) for c in chunks],
                )
            )
        rows = [r for part in parts for r in part]
    mat = np.array(rows, dtype=np.float64).reshape(len(pairs), len(spec))
    return pairs, mat


def _chunk(items, n):
    size = max(1, (len(items) + n - 1) // n)
    return [items[i : i + size] for i in range(0, len(items), size)]


def _featurize_chunk(args):
    pairs, left, right, schema, spec, pos_left, pos_right = args
    fz = PairFeaturizer(schema, spec)
    return [fz.vector(left, right, pos_left[a], pos_right[b]) for a, b in pairs]


def write_feature_matrix(path, pairs, matrix, spec, delimiter=","):
    """Header: id_a, id_b, attr__measure...; missing serialized as empty field."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(delimiter.join(["id_a", "id_b"] + spec.names) + "\n")
        for (a, b), row in zip(pairs, matrix):
            cells = ["" if math.isnan(v) else f"{v:.6f}" for v in row]
            fh.write(delimiter.join([str(a), str(b)] + cells) + "\n")


def read_feature_matrix(path, delimiter=","):
    """Returns (pairs, matrix, feature names)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(delimiter)
        names = header[2:]
        pairs, rows = [], []
        for line in fh:
            parts = line.rstrip("\n").split(delimiter)
            pairs.append((int(parts[0]), int(parts[1])))
            rows.append([float(p) if p != "" else MISSING for p in parts[2:]])
    return pairs, np.array(rows, dtype=np.float64).reshape(len(pairs), len(names)), names
