import random

import pytest
import yaml

from entmatch import indexing, matcher, synth, tables
from entmatch.tables import Attribute, AttributeSchema

SCHEMA_ATTRIBUTES = [
    {"name": "first_name", "kind": "scalar", "columns": ["first_name"]},
    {"name": "last_name", "kind": "scalar", "columns": ["last_name"]},
    {"name": "dob", "kind": "scalar", "columns": ["dob"]},
    {"name": "phone", "kind": "list", "columns": ["phone_1", "phone_2"]},
    {"name": "address", "kind": "list", "columns": ["address_1", "address_2"]},
]

BLOCKING_FEATURES = ["last_name", "dob", "phone"]


def person_schema():
    return AttributeSchema(
        [Attribute(a["name"], a["kind"], a["columns"]) for a in SCHEMA_ATTRIBUTES]
    )


def sample_labels(table, truth, n_labels, seed=0, features=BLOCKING_FEATURES, maxrow=1000):
    """Candidate pairs labeled against truth: all positives plus sampled negatives."""
    cfg = indexing.IndexingConfig(list(features), maxrow=maxrow)
    pairs, _ = indexing.index_dataset(table, person_schema(), cfg)
    positives = sorted(pairs & truth)
    negatives = sorted(pairs - truth)
    rng = random.Random(seed)
    n_neg = min(len(negatives), max(0, n_labels - len(positives)))
    sampled_neg = sorted(rng.sample(negatives, n_neg))
    return [(p, 1) for p in positives] + [(p, 0) for p in sampled_neg]


def write_pipeline_inputs(tmp_path, n=300, dup_rate=0.2, seed=0, n_labels=2000):
    data_path = tmp_path / "data.csv"
    labels_path = tmp_path / "labels.csv"
    table, truth = synth.generate_synthetic(n, dup_rate, seed=seed)
    tables.write_dataset(table, data_path)
    labeled = sample_labels(table, truth, n_labels, seed=seed)
    matcher.write_labels(labeled, labels_path)
    return data_path, labels_path, truth


def base_config(tmp_path, data_path, labels_path=None, **overrides):
    doc = {
        "mode": "dedup",
        "inputs": [str(data_path)],
        "id_column": "row_id",
        "schema": {"attributes": SCHEMA_ATTRIBUTES},
        "indexing": {"features": list(BLOCKING_FEATURES), "maxrow": 1000},
        "matcher": {"n_trees": 30, "max_depth": 10, "min_leaf": 2, "train_ratio": 0.7},
        "threshold": 0.5,
        "seed": 0,
        "workers": 1,
        "output_dir": str(tmp_path / "out"),
    }
    if labels_path is not None:
        doc["labels"] = str(labels_path)
    doc.update(overrides)
    return doc


def write_config(tmp_path, doc, name="config.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return path


@pytest.fixture
def pipeline_setup(tmp_path):
    data_path, labels_path, truth = write_pipeline_inputs(tmp_path)
    doc = base_config(tmp_path, data_path, labels_path)
    return tmp_path, doc, truth
