"""
Profiling and cleaning a messy table
====================================

Every matching project starts with the same two questions: what is actually
in these columns, and how much of it is junk?  This walkthrough generates a
small synthetic person table, injects a few classic data-quality problems,
and then uses the profiling and cleaning tools to find and fix them.
"""

from entmatch import synth, tables
from entmatch.tables import CleaningRule, Column, Table

# ---------------------------------------------------------------------------
# A small synthetic dataset to play with.  The generator plants duplicates,
# but for this demo we only care about the raw column contents.

table, _ = synth.generate_synthetic(200, 0.1, seed=7)

# Sneak in the kinds of problems real extracts ship with: a sentinel string
# pretending to be a null, stray whitespace, and a column that is the same
# for every record (an export artifact).
first = table.column("first_name").values[:]
first[3] = "N/A"
first[11] = "  " + first[11]
cols = [
    Column("first_name", "text", first) if c.name == "first_name" else c
    for c in table.columns
]
cols.append(Column("source_system", "text", ["crm"] * table.n_rows))
table = Table(table.name, table.row_ids, cols)

# ---------------------------------------------------------------------------
# Profile first.  The report shows, per column, the null share, distinct
# count, and the most common values -- "N/A" shows up immediately, and
# source_system is obviously constant.

report = tables.profile(table, k=5)
print(report.to_text())

# ---------------------------------------------------------------------------
# Cleaning is declarative: a rule selects columns (exact name or regex) and
# either nullifies full-cell matches or rewrites substrings.

rules = [
    # sentinel strings become real nulls
    CleaningRule(".*_name", r"(?i)n/?a", "nullify"),
    # collapse leading/trailing whitespace everywhere
    CleaningRule(".*", r"^\s+|\s+$", "replace", replacement=""),
]
cleaned, counts = tables.apply_cleaning_rules(table, rules)
for rule, n in zip(rules, counts):
    print(f"{rule.action} {rule.match_pattern!r}: {n} cells touched")

# ---------------------------------------------------------------------------
# Constant columns carry zero matching signal; drop them before indexing.

cleaned, removed = tables.drop_constant_columns(cleaned)
print("removed constant columns:", removed)

# ---------------------------------------------------------------------------
# Finally, dictionary-encode a column: values become dense integer codes and
# the mapping is kept separately.  This is what the blocking stage uses to
# compare values by integer instead of string.

codes, dictionary = tables.encode_dictionary(cleaned, "last_name")
print(f"last_name: {len(dictionary)} distinct values ->", codes[:8])
