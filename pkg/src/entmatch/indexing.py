"""Candidate pair generation: list-attribute row expansion, all-subsets blocking, maxrow pruning."""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .tables import Dictionary

MAX_FEATURES = 16  # subset enumeration is 2^F; keep F small
NULL_CODE = -1


class IndexingError(Exception):
    pass


@dataclass
class IndexingConfig:
    features: list
    maxrow: int = 1000
    mode: str = "dedup"  # dedup | link

    def __post_init__(self):
        if not 1 <= len(self.features) <= MAX_FEATURES:
            raise IndexingError(f"feature count must be in [1, {MAX_FEATURES}]")
        if len(set(self.features)) != len(self.features):
            raise IndexingError("duplicate blocking features")
        if self.maxrow < 2:
            raise IndexingError("maxrow must be >= 2")
        if self.mode not in ("dedup", "link"):
            raise IndexingError(f"unknown mode {self.mode!r}")


@dataclass
class ExpandedTable:
    """Integer-coded expansion of records over their list-attribute value combinations."""

    features: list
    row_ids: np.ndarray  # (m,) original record ids
    codes: np.ndarray  # (m, F) dictionary codes, NULL_CODE for null
    sources: np.ndarray = None  # (m,) 0=left 1=right, link mode only


@dataclass
class IndexingStats:
    subsets_evaluated: int = 0
    groups_per_subset: list = field(default_factory=list)
    groups_skipped_over_maxrow: int = 0
    pairs_emitted: int = 0

    def to_text(self):
        return (
            f"subsets evaluated: {self.subsets_evaluated}\n"
            f"groups per subset: {self.groups_per_subset}\n"
            f"groups skipped (> maxrow): {self.groups_skipped_over_maxrow}\n"
            f"pairs emitted: {self.pairs_emitted}\n"
        )


def build_attribute_dictionaries(tables, schema, features):
    """One shared Dictionary per blocking attribute, spanning all bound columns and tables."""

    def values():
        for t in tables:
            for col in attr.columns:
                yield from t.column(col).values

    dicts = {}
    for name in features:
        attr = schema.attribute(name)
        dicts[name] = Dictionary.build(name, values())
    return dicts


def record_feature_values(table, schema, feature, row_index):
    """Distinct non-null values of one attribute for the record at positional row_index."""
    attr = schema.attribute(feature)
    out, seen = [], set()
    for col in attr.columns:
        v = table.column(col).values[row_index]
        if v is not None and v not in seen:
            seen.add(v)
            out.append(v)
    return out


def expand_rows(table, schema, features, dictionaries, source=None):
    """Cartesian-expand each record over the distinct non-null values of its list attributes.

    A record whose list attribute is entirely null keeps a single null placeholder
    for that attribute, so the other features still participate in blocking.
    """
    for f in features:
        schema.attribute(f)  # raises on unknown feature
        if f not in dictionaries:
            raise IndexingError(f"no dictionary for feature {f!r}")
    schema.validate_against(table)

    col_values = {}
    for f in features:
        attr = schema.attribute(f)
        col_values[f] = [table.column(c).values for c in attr.columns]

    rid_out, code_rows = [], []
    for i, rid in enumerate(table.row_ids):
        per_feature = []
        for f in features:
            d = dictionaries[f]
            seen, codes = set(), []
            for col in col_values[f]:
                v = col[i]
                if v is not None and v not in seen:
                    seen.add(v)
                    codes.append(d.encode(v))
            per_feature.append(codes if codes else [NULL_CODE])
        for combo in itertools.product(*per_feature):
            rid_out.append(rid)
            code_rows.append(combo)

    codes = np.array(code_rows, dtype=np.int64).reshape(len(rid_out), len(features))
    sources = None
    if source is not None:
        sources = np.full(len(rid_out), source, dtype=np.int8)
    return ExpandedTable(list(features), np.array(rid_out, dtype=np.int64), codes, sources)


def feature_subsets(features):
    """All non-empty subsets, length-ascending then declaration order."""
    if len(features) < 1:
        raise IndexingError("need at least one feature")
    out = []
    for i in range(1, len(features) + 1):
        out.extend(itertools.combinations(features, i))
    return out


def _emit_group_pairs(rids, sources, maxrow, pairs):
    """Pairs for one group; group size is counted in distinct record ids."""
    if sources is None:
        distinct = np.unique(rids)
        if len(distinct) < 2:
            return False
        if len(distinct) > maxrow:
            return True
        ids = distinct.tolist()
        for k in range(len(ids)):
            a = ids[k]
            for b in ids[k + 1 :]:
                pairs.add((a, b))
        return False
    left = np.unique(rids[sources == 0])
    right = np.unique(rids[sources == 1])
    if len(left) + len(right) > maxrow:
        return True
    if len(left) == 0 or len(right) == 0:
        return False
    for a in left.tolist():
        for b in right.tolist():
            pairs.add((a, b))
    return False


def block_and_pair(expanded, config):
    """Group the expanded table by every feature subset and emit within-group pairs.

    Rows with a null code in any subset column are excluded from that subset's
    groups. Groups whose distinct-record count exceeds maxrow are skipped and
    counted. The pair set is globally deduplicated with canonical ordering.
    """
    if len(expanded.row_ids) == 0:
        raise IndexingError("expanded table is empty")
    feat_index = {f: j for j, f in enumerate(expanded.features)}
    subsets = feature_subsets(config.features)
    stats = IndexingStats(subsets_evaluated=len(subsets))
    pairs = set()

    rids = expanded.row_ids
    sources = expanded.sources
    for subset in subsets:
        cols = [expanded.codes[:, feat_index[f]] for f in subset]
        mask = cols[0] != NULL_CODE
        for c in cols[1:]:
            mask &= c != NULL_CODE
        if not mask.any():
            stats.groups_per_subset.append(0)
            continue
        sub_cols = [c[mask] for c in cols]
        sub_rids = rids[mask]
        sub_src = sources[mask] if sources is not None else None

        order = np.lexsort(sub_cols[::-1])
        sorted_cols = [c[order] for c in sub_cols]
        boundary = np.zeros(len(order), dtype=bool)
        boundary[0] = True
        for c in sorted_cols:
            boundary[1:] |= c[1:] != c[:-1]
        starts = np.flatnonzero(boundary)
        ends = np.append(starts[1:], len(order))
        stats.groups_per_subset.append(len(starts))

        srt_rids = sub_rids[order]
        srt_src = sub_src[order] if sub_src is not None else None
        for s, e in zip(starts.tolist(), ends.tolist()):
            if e - s < 2:
                continue
            g_src = srt_src[s:e] if srt_src is not None else None
            if _emit_group_pairs(srt_rids[s:e], g_src, config.maxrow, pairs):
                stats.groups_skipped_over_maxrow += 1

    stats.pairs_emitted = len(pairs)
    return pairs, stats


def index_dataset(tables, schema, config, dictionaries=None):
    """Full indexing stage: shared encoding, expansion, subset blocking.

    Dedup mode takes one table (or a 1-tuple); link mode takes (left, right).
    Returns (candidate pair set, IndexingStats). Link-mode pairs are
    (left_id, right_id); dedup pairs satisfy id_a < id_b.
    """
    if not isinstance(tables, (tuple, list)):
        tables = (tables,)
    if config.mode == "dedup" and len(tables) != 1:
        raise IndexingError("dedup mode takes exactly one table")
    if config.mode == "link":
        if len(tables) != 2:
            raise IndexingError("link mode takes exactly two tables")
        for f in config.features:
            attr = schema.attribute(f)
            dts = set()
            for t in tables:
                for c in attr.columns:
                    dts.add(t.column(c).datatype)
            if len(dts) > 1:
                raise IndexingError(f"feature {f!r} has mismatched datatypes across tables")

    if dictionaries is None:
        dictionaries = build_attribute_dictionaries(tables, schema, config.features)

    if config.mode == "dedup":
        expanded = expand_rows(tables[0], schema, config.features, dictionaries)
    else:
        left = expand_rows(tables[0], schema, config.features, dictionaries, source=0)
        right = expand_rows(tables[1], schema, config.features, dictionaries, source=1)
        expanded = ExpandedTable(
            list(config.features),
            np.concatenate([left.row_ids, right.row_ids]),
            np.vstack([left.codes, right.codes]),
            np.concatenate([left.sources, right.sources]),
        )
    return block_and_pair(expanded, config)


def write_pairs(pairs, path, mode="dedup", delimiter=","):
    """Persist candidate pairs sorted by (id_a, id_b)."""
    with open(path, "w", encoding="utf-8") as fh:
        if mode == "link":
            fh.write(f"left_id{delimiter}right_id\n")
        else:
            fh.write(f"id_a{delimiter}id_b\n")
        for a, b in sorted(pairs):
            fh.write(f"{a}{delimiter}{b}\n")


def read_pairs(path, delimiter=","):
    pairs = []
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            a, b = line.rstrip("\n").split(delimiter)
            pairs.append((int(a), int(b)))
    return pairs
