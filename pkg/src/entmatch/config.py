"""Declarative pipeline configuration: YAML parsing and schema validation."""

from dataclasses import dataclass, field

import jsonschema
import yaml

from .indexing import MAX_FEATURES


class ConfigError(Exception):
    pass


CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["mode", "inputs", "schema", "indexing"],
    "properties": {
        "mode": {"enum": ["dedup", "link"]},
        "inputs": {
            "type": "array",
            "items": {"type": "string"},
            "minItems": 1,
            "maxItems": 2,
        },
        "delimiter": {"type": "string", "minLength": 1, "maxLength": 1},
        "id_column": {"type": ["string", "null"]},
        "declared_types": {
            "type": "object",
            "additionalProperties": {"enum": ["text", "numeric", "boolean"]},
        },
        "profile_top_k": {"type": "integer", "minimum": 1},
        "schema": {
            "type": "object",
            "additionalProperties": False,
            "required": ["attributes"],
            "properties": {
                "attributes": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["name", "kind", "columns"],
                        "properties": {
                            "name": {"type": "string"},
                            "kind": {"enum": ["scalar", "list"]},
                            "columns": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                            "datatype": {"enum": ["text", "numeric", "boolean"]},
                        },
                    },
                }
            },
        },
        "cleaning_rules": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["column", "pattern", "action"],
                "properties": {
                    "column": {"type": "string"},
                    "pattern": {"type": "string"},
                    "action": {"enum": ["replace", "nullify"]},
                    "replacement": {"type": "string"},
                },
            },
        },
        "indexing": {
            "type": "object",
            "additionalProperties": False,
            "required": ["features"],
            "properties": {
                "features": {
                    "type": "array",
                    "items": {"type": "string"},
                    "minItems": 1,
                    "maxItems": MAX_FEATURES,
                },
                "maxrow": {"type": "integer", "minimum": 2},
            },
        },
        "matcher": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_trees": {"type": "integer", "minimum": 1},
                "max_depth": {"type": "integer", "minimum": 1},
                "min_leaf": {"type": "integer", "minimum": 1},
                "train_ratio": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
        },
        "threshold": {"type": "number", "minimum": 0, "maximum": 1},
        "labels": {"type": ["string", "null"]},
        "model": {"type": ["string", "null"]},
        "seed": {"type": "integer"},
        "workers": {"type": "integer", "minimum": 1},
        "output_dir": {"type": "string"},
    },
}


@dataclass
class PipelineConfig:
    mode: str
    inputs: list
    schema: dict
    indexing: dict
    delimiter: str = ","
    id_column: str = None
    declared_types: dict = field(default_factory=dict)
    profile_top_k: int = 20
    cleaning_rules: list = field(default_factory=list)
    matcher: dict = field(default_factory=dict)
    threshold: float = 0.5
    labels: str = None
    model: str = None
    seed: int = 0
    workers: int = 1
    output_dir: str = "out"

    def as_dict(self):
        return {
            "mode": self.mode,
            "inputs": list(self.inputs),
            "schema": self.schema,
            "indexing": self.indexing,
            "delimiter": self.delimiter,
            "id_column": self.id_column,
            "declared_types": self.declared_types,
            "profile_top_k": self.profile_top_k,
            "cleaning_rules": self.cleaning_rules,
            "matcher": self.matcher,
            "threshold": self.threshold,
            "labels": self.labels,
            "model": self.model,
            "seed": self.seed,
            "workers": self.workers,
            "output_dir": self.output_dir,
        }


def validate_config(doc):
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"invalid config: {e.message}") from e
    if doc["mode"] == "link" and len(doc["inputs"]) != 2:
        raise ConfigError("link mode requires exactly two inputs")
    if doc["mode"] == "dedup" and len(doc["inputs"]) != 1:
        raise ConfigError("dedup mode requires exactly one input")
    attr_names = {a["name"] for a in doc["schema"]["attributes"]}
    for f in doc["indexing"]["features"]:
        if f not in attr_names:
            raise ConfigError(f"blocking feature {f!r} not declared in schema")
    return PipelineConfig(**doc)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return validate_config(doc)
