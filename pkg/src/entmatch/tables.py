"""Columnar tables: ingestion, profiling, regex cleaning and dictionary encoding."""

import csv
import re
from collections import Counter
from dataclasses import dataclass, field

VALID_DATATYPES = ("text", "numeric", "boolean")

_BOOL_TRUE = {"true", "t", "1", "yes", "y"}
_BOOL_FALSE = {"false", "f", "0", "no", "n"}


class TableError(Exception):
    pass


@dataclass
class Column:
    name: str
    datatype: str  # text | numeric | boolean
    values: list

    def __post_init__(self):
        if self.datatype not in VALID_DATATYPES:
            raise TableError(f"unknown datatype {self.datatype!r} for column {self.name!r}")


@dataclass
class Table:
    """Immutable-by-convention columnar table with one row_id per record."""

    name: str
    row_ids: list
    columns: list  # list[Column]
    parse_warnings: dict = field(default_factory=dict)  # column name -> failed-parse count

    def __post_init__(self):
        seen = set()
        for c in self.columns:
            if c.name in seen:
                raise TableError(f"duplicate column name {c.name!r}")
            seen.add(c.name)
            if len(c.values) != len(self.row_ids):
                raise TableError(f"column {c.name!r} length {len(c.values)} != {len(self.row_ids)} rows")
        if len(set(self.row_ids)) != len(self.row_ids):
            raise TableError("row_ids are not unique")
        if any(r < 0 for r in self.row_ids):
            raise TableError("row_ids must be non-negative")

    @property
    def n_rows(self):
        return len(self.row_ids)

    def column_names(self):
        return [c.name for c in self.columns]

    def column(self, name):
        for c in self.columns:
            if c.name == name:
                return c
        raise TableError(f"unknown column {name!r}")

    def has_column(self, name):
        return any(c.name == name for c in self.columns)


@dataclass
class Attribute:
    name: str
    kind: str  # scalar | list
    columns: list
    datatype: str = "text"


@dataclass
class AttributeSchema:
    """Maps logical attributes to table columns; list attributes span several columns."""

    attributes: list  # list[Attribute]

    def __post_init__(self):
        bound = set()
        for a in self.attributes:
            if a.kind == "scalar" and len(a.columns) != 1:
                raise TableError(f"scalar attribute {a.name!r} must bind exactly one column")
            if a.kind == "list" and len(a.columns) < 2:
                raise TableError(f"list attribute {a.name!r} must bind at least two columns")
            if a.kind not in ("scalar", "list"):
                raise TableError(f"attribute {a.name!r} has unknown kind {a.kind!r}")
            for c in a.columns:
                if c in bound:
                    raise TableError(f"column {c!r} bound to more than one attribute")
                bound.add(c)

    def attribute(self, name):
        for a in self.attributes:
            if a.name == name:
                return a
        raise TableError(f"unknown attribute {name!r}")

    def names(self):
        return [a.name for a in self.attributes]

    def validate_against(self, table):
        for a in self.attributes:
            for c in a.columns:
                if not table.has_column(c):
                    raise TableError(f"attribute {a.name!r} binds missing column {c!r}")


def _parse_cell(raw, datatype):
    """Returns (value, ok). Empty strings are nulls, never parse failures."""
    if raw is None or raw == "":
        return None, True
    if datatype == "text":
        return raw, True
    if datatype == "numeric":
        try:
            return float(raw), True
        except ValueError:
            return None, False
    low = raw.strip().lower()
    if low in _BOOL_TRUE:
        return True, True
    if low in _BOOL_FALSE:
        return False, True
    return None, False


def load_dataset(path, declared_types=None, delimiter=",", name=None, id_column=None):
    """Read a delimited UTF-8 file into a Table.

    Cells that fail their declared type parse become null and are counted in
    table.parse_warnings. Without an id_column, sequential row_ids are synthesized.
    """
    declared_types = declared_types or {}
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise TableError(f"cannot open {path}: {e}") from e
    with fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise TableError(f"{path}: empty file, header row required")
        if any(h == "" for h in header):
            raise TableError(f"{path}: malformed header (empty column name)")
        if len(set(header)) != len(header):
            dupes = [h for h, c in Counter(header).items() if c > 1]
            raise TableError(f"{path}: duplicate column names {dupes}")
        raw_cols = {h: [] for h in header}
        n = 0
        for row in reader:
            if len(row) < len(header):
                row = row + [""] * (len(header) - len(row))
            for h, cell in zip(header, row):
                raw_cols[h].append(cell)
            n += 1
    if n == 0:
        raise TableError(f"{path}: no data rows")

    if id_column is not None:
        if id_column not in header:
            raise TableError(f"id column {id_column!r} not in header")
        row_ids = [int(v) for v in raw_cols[id_column]]
        header = [h for h in header if h != id_column]
    else:
        row_ids = list(range(n))

    columns, warnings = [], {}
    for h in header:
        dt = declared_types.get(h, "text")
        vals, bad = [], 0
        for raw in raw_cols[h]:
            v, ok = _parse_cell(raw, dt)
            if not ok:
                bad += 1
            vals.append(v)
        columns.append(Column(h, dt, vals))
        if bad:
            warnings[h] = bad
    return Table(name or str(path), row_ids, columns, parse_warnings=warnings)


def write_dataset(table, path, delimiter=",", id_column="row_id"):
    """Persist a Table back to a delimited file with a row_id column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow([id_column] + table.column_names())
        cols = [c.values for c in table.columns]
        for i, rid in enumerate(table.row_ids):
            w.writerow([rid] + [_cell_to_text(col[i]) for col in cols])


def _cell_to_text(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


@dataclass
class ColumnProfile:
    name: str
    null_count: int
    unique_count: int
    top_k: list  # [(value, count)] most frequent first, value-ascending tie break
    count_histogram: dict  # occurrence count -> number of values with that count
    constant: bool


@dataclass
class ProfileReport:
    table_name: str
    n_rows: int
    columns: list  # list[ColumnProfile]

    def to_text(self):
        lines = [f"table: {self.table_name}  rows: {self.n_rows}"]
        for c in self.columns:
            lines.append(f"column: {c.name}")
            lines.append(f"  nulls: {c.null_count}  unique: {c.unique_count}  constant: {c.constant}")
            lines.append("  top values: " + ", ".join(f"{v!r} x{n}" for v, n in c.top_k))
            hist = ", ".join(f"{k}:{v}" for k, v in sorted(c.count_histogram.items()))
            lines.append(f"  count histogram: {hist}")
        return "\n".join(lines) + "\n"


def profile(table, k=20):
    """Per-column nulls, distinct counts, top-k values and value-count histogram."""
    if k < 1:
        raise TableError("k must be >= 1")
    if table.n_rows == 0:
        raise TableError("cannot profile an empty table")
    cols = []
    for c in table.columns:
        counts = Counter(v for v in c.values if v is not None)
        null_count = sum(1 for v in c.values if v is None)
        top = sorted(counts.items(), key=lambda kv: (-kv[1], str(kv[0])))[:k]
        hist = Counter(counts.values())
        cols.append(
            ColumnProfile(
                name=c.name,
                null_count=null_count,
                unique_count=len(counts),
                top_k=top,
                count_histogram=dict(hist),
                constant=len(counts) <= 1,
            )
        )
    return ProfileReport(table.name, table.n_rows, cols)


@dataclass
class CleaningRule:
    column_selector: str  # exact name or regex over column names
    match_pattern: str
    action: str  # replace | nullify
    replacement: str = ""

    def __post_init__(self):
        if self.action not in ("replace", "nullify"):
            raise TableError(f"unknown cleaning action {self.action!r}")
        try:
            self._selector = re.compile(self.column_selector)
            self._pattern = re.compile(self.match_pattern)
        except re.error as e:
            raise TableError(f"invalid regular expression: {e}") from e

    def selects(self, column_name):
        return column_name == self.column_selector or self._selector.fullmatch(column_name) is not None


def apply_cleaning_rules(table, rules):
    """Apply cleaning rules in order to text columns; returns (new table, per-rule applied counts).

    nullify blanks a cell when the pattern matches the whole cell; replace
    substitutes every occurrence. Cells left empty by a replace become null.
    """
    applied = [0] * len(rules)
    new_cols = []
    for c in table.columns:
        if c.datatype != "text" or not any(r.selects(c.name) for r in rules):
            new_cols.append(c)
            continue
        vals = list(c.values)
        for ri, rule in enumerate(rules):
            if not rule.selects(c.name):
                continue
            for i, v in enumerate(vals):
                if v is None:
                    continue
                if rule.action == "nullify":
                    if rule._pattern.fullmatch(v):
                        vals[i] = None
                        applied[ri] += 1
                else:
                    new_v, nsub = rule._pattern.subn(rule.replacement, v)
                    if nsub:
                        applied[ri] += 1
                        vals[i] = new_v if new_v != "" else None
        new_cols.append(Column(c.name, c.datatype, vals))
    return Table(table.name, list(table.row_ids), new_cols), applied


def drop_constant_columns(table):
    """Remove columns with <= 1 distinct non-null value; returns (new table, removed names)."""
    keep, removed = [], []
    for c in table.columns:
        distinct = {v for v in c.values if v is not None}
        if len(distinct) <= 1:
            removed.append(c.name)
        else:
            keep.append(c)
    return Table(table.name, list(table.row_ids), keep), removed


@dataclass
class Dictionary:
    """Dense integer codes for one column/attribute, assigned in first-occurrence order."""

    name: str
    value_to_code: dict
    code_to_value: list

    @classmethod
    def build(cls, name, values_iter):
        v2c, c2v = {}, []
        for v in values_iter:
            if v is None or v in v2c:
                continue
            v2c[v] = len(c2v)
            c2v.append(v)
        return cls(name, v2c, c2v)

    def encode(self, v):
        return None if v is None else self.value_to_code[v]

    def decode(self, code):
        return self.code_to_value[code]

    def __len__(self):
        return len(self.code_to_value)

    def save(self, path, delimiter=","):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, delimiter=delimiter)
            w.writerow(["code", "value"])
            for code, value in enumerate(self.code_to_value):
                w.writerow([code, _cell_to_text(value)])

    @classmethod
    def load(cls, name, path, delimiter=","):
        with open(path, newline="", encoding="utf-8") as fh:
            r = csv.reader(fh, delimiter=delimiter)
            next(r)
            c2v = [row[1] for row in r]
        return cls(name, {v: i for i, v in enumerate(c2v)}, c2v)


def encode_dictionary(table, column):
    """Encode one column as dense integer codes; nulls stay null."""
    c = table.column(column)
    d = Dictionary.build(column, c.values)
    codes = [d.encode(v) for v in c.values]
    return codes, d
