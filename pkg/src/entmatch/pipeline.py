"""End-to-end orchestration: staged execution with hashed artifacts and skip-if-fresh."""

import hashlib
import json
import os
import time

from . import clustering, indexing, matcher, metrics, similarity, tables
from .config import ConfigError
from .matcher import Hyperparameters
from .tables import AttributeSchema, Attribute, CleaningRule


class StageError(Exception):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _hash_obj(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()


def build_schema(config):
    attrs = [
        Attribute(
            a["name"],
            a["kind"],
            list(a["columns"]),
            a.get("datatype", "text"),
        )
        for a in config.schema["attributes"]
    ]
    return AttributeSchema(attrs)


def build_cleaning_rules(config):
    return [
        CleaningRule(r["column"], r["pattern"], r["action"], r.get("replacement", ""))
        for r in config.cleaning_rules
    ]


class PipelineRun:
    """Executes the pipeline stages against one output directory.

    Each stage records an input hash in the manifest; on re-runs a stage is
    skipped when its artifacts exist and the hash is unchanged (unless force).
    """

    STAGES = [
        "profile",
        "clean",
        "encode",
        "index",
        "featurize",
        "train",
        "score",
        "threshold",
        "cluster",
        "evaluate",
    ]

    def __init__(self, config, force=False):
        self.config = config
        self.force = force
        self.out = config.output_dir
        os.makedirs(self.out, exist_ok=True)
        self.manifest_path = os.path.join(self.out, "manifest.json")
        self.manifest = {"stages": {}, "artifacts": {}}
        if os.path.exists(self.manifest_path):
            with open(self.manifest_path) as fh:
                self.manifest = json.load(fh)
        self.schema = build_schema(config)
        self._tables = None  # cleaned tables, loaded lazily

    # -- bookkeeping -------------------------------------------------------

    def path(self, name):
        return os.path.join(self.out, name)

    def _register(self, *names):
        for name in names:
            p = self.path(name)
            self.manifest["artifacts"][name] = {"path": p, "sha256": _sha256_file(p)}

    def _save_manifest(self):
        with open(self.manifest_path, "w") as fh:
            json.dump(self.manifest, fh, indent=2, sort_keys=True)

    def _fresh(self, stage, input_hash, outputs):
        rec = self.manifest["stages"].get(stage)
        if self.force or rec is None or rec.get("input_hash") != input_hash:
            return False
        return all(os.path.exists(self.path(o)) for o in outputs)

    def _run_stage(self, stage, input_hash, outputs, fn):
        if self._fresh(stage, input_hash, outputs):
            self.manifest["stages"][stage]["status"] = "skipped (up-to-date)"
            self._save_manifest()
            return False
        t0 = time.monotonic()
        try:
            fn()
        except Exception as e:
            for o in outputs:
                p = self.path(o)
                if os.path.exists(p):
                    os.remove(p)
            if isinstance(e, StageError):
                raise
            raise StageError(stage, e) from e
        self._register(*outputs)
        self.manifest["stages"][stage] = {
            "status": "run",
            "input_hash": input_hash,
            "seconds": round(time.monotonic() - t0, 3),
        }
        self._save_manifest()
        return True

    def _input_files_hash(self):
        return [_sha256_file(p) for p in self.config.inputs]

    def _artifact_hash(self, name):
        return self.manifest["artifacts"].get(name, {}).get("sha256", "")

    # -- data access -------------------------------------------------------

    def _load_raw(self):
        cfg = self.config
        return [
            tables.load_dataset(
                p,
                declared_types=cfg.declared_types,
                delimiter=cfg.delimiter,
                id_column=cfg.id_column,
            )
            for p in cfg.inputs
        ]

    def _side_names(self):
        return ["left", "right"] if self.config.mode == "link" else ["data"]

    def cleaned_tables(self):
        if self._tables is None:
            self._tables = [
                tables.load_dataset(self.path(f"cleaned_{side}.csv"), id_column="row_id")
                for side in self._side_names()
            ]
        return self._tables

    # -- stages ------------------------------------------------------------

    def stage_profile(self):
        cfg = self.config
        outputs = [f"profile_{s}.txt" for s in self._side_names()]
        ih = _hash_obj(
            {"inputs": self._input_files_hash(), "k": cfg.profile_top_k, "types": cfg.declared_types}
        )

        def run():
            for t, out in zip(self._load_raw(), outputs):
                report = tables.profile(t, k=cfg.profile_top_k)
                with open(self.path(out), "w", encoding="utf-8") as fh:
                    fh.write(report.to_text())

        return self._run_stage("profile", ih, outputs, run)

    def stage_clean(self):
        cfg = self.config
        outputs = [f"cleaned_{s}.csv" for s in self._side_names()]
        ih = _hash_obj(
            {
                "inputs": self._input_files_hash(),
                "rules": cfg.cleaning_rules,
                "types": cfg.declared_types,
                "id_column": cfg.id_column,
            }
        )

        def run():
            rules = build_cleaning_rules(cfg)
            for t, out in zip(self._load_raw(), outputs):
                cleaned, _ = tables.apply_cleaning_rules(t, rules)
                cleaned, _ = tables.drop_constant_columns(cleaned)
                self.schema_columns_check(cleaned)
                tables.write_dataset(cleaned, self.path(out))
            self._tables = None

        return self._run_stage("clean", ih, outputs, run)

    def schema_columns_check(self, table):
        self.schema.validate_against(table)

    def stage_encode(self):
        cfg = self.config
        features = cfg.indexing["features"]
        outputs = [f"dictionary_{f}.csv" for f in features]
        ih = _hash_obj(
            {"cleaned": [self._artifact_hash(f"cleaned_{s}.csv") for s in self._side_names()], "features": features}
        )

        def run():
            dicts = indexing.build_attribute_dictionaries(self.cleaned_tables(), self.schema, features)
            for f in features:
                dicts[f].save(self.path(f"dictionary_{f}.csv"))

        return self._run_stage("encode", ih, outputs, run)

    def stage_index(self):
        cfg = self.config
        outputs = ["pairs.csv", "indexing_stats.txt"]
        ih = _hash_obj(
            {
                "cleaned": [self._artifact_hash(f"cleaned_{s}.csv") for s in self._side_names()],
                "indexing": cfg.indexing,
                "mode": cfg.mode,
            }
        )

        def run():
            config = indexing.IndexingConfig(
                features=list(cfg.indexing["features"]),
                maxrow=cfg.indexing.get("maxrow", 1000),
                mode=cfg.mode,
            )
            pairs, stats = indexing.index_dataset(tuple(self.cleaned_tables()), self.schema, config)
            indexing.write_pairs(pairs, self.path("pairs.csv"), mode=cfg.mode)
            with open(self.path("indexing_stats.txt"), "w", encoding="utf-8") as fh:
                fh.write(stats.to_text())

        return self._run_stage("index", ih, outputs, run)

    def stage_featurize(self):
        cfg = self.config
        outputs = ["features.csv"]
        ih = _hash_obj(
            {
                "pairs": self._artifact_hash("pairs.csv"),
                "cleaned": [self._artifact_hash(f"cleaned_{s}.csv") for s in self._side_names()],
                "schema": cfg.schema,
            }
        )

        def run():
            pairs = indexing.read_pairs(self.path("pairs.csv"))
            spec = similarity.build_feature_spec(self.schema)
            tabs = self.cleaned_tables()
            left = tabs[0]
            right = tabs[1] if cfg.mode == "link" else tabs[0]
            sorted_pairs, mat = similarity.featurize_pairs(
                pairs, left, right, self.schema, spec, workers=cfg.workers
            )
            similarity.write_feature_matrix(self.path("features.csv"), sorted_pairs, mat, spec)

        return self._run_stage("featurize", ih, outputs, run)

    def stage_train(self):
        cfg = self.config
        if cfg.labels is None:
            if cfg.model is None:
                raise StageError("train", "no model: supply labels or a trained model")
            return False  # external model, nothing to train
        outputs = ["model.json", "labels_train.csv", "labels_test.csv"]
        ih = _hash_obj(
            {
                "features": self._artifact_hash("features.csv"),
                "labels": _sha256_file(cfg.labels),
                "matcher": cfg.matcher,
                "seed": cfg.seed,
            }
        )

        def run():
            labeled = matcher.read_labels(cfg.labels)
            pairs, mat, names = similarity.read_feature_matrix(self.path("features.csv"))
            index = {p: i for i, p in enumerate(pairs)}
            missing = [p for p, _ in labeled if p not in index]
            if missing:
                raise ValueError(f"{len(missing)} labeled pairs absent from feature matrix, e.g. {missing[0]}")
            ratio = cfg.matcher.get("train_ratio", 0.7)
            train_set, test_set = matcher.split_train_test(labeled, ratio, seed=cfg.seed)
            matcher.write_labels(train_set, self.path("labels_train.csv"))
            matcher.write_labels(test_set, self.path("labels_test.csv"))
            hp = Hyperparameters(
                n_trees=cfg.matcher.get("n_trees", 100),
                max_depth=cfg.matcher.get("max_depth", 12),
                min_leaf=cfg.matcher.get("min_leaf", 5),
            )
            rows = [index[p] for p, _ in train_set]
            labels = [lab for _, lab in train_set]
            model = matcher.train(
                mat[rows], labels, names, hp, seed=cfg.seed, workers=cfg.workers
            )
            model.save(self.path("model.json"))

        return self._run_stage("train", ih, outputs, run)

    def _model_path(self):
        return self.config.model or self.path("model.json")

    def stage_score(self):
        cfg = self.config
        outputs = ["scores.csv"]
        ih = _hash_obj(
            {
                "features": self._artifact_hash("features.csv"),
                "model": _sha256_file(self._model_path()),
            }
        )

        def run():
            model = matcher.MatchModel.load(self._model_path())
            pairs, mat, names = similarity.read_feature_matrix(self.path("features.csv"))
            scored = matcher.score_pairs(model, pairs, mat, names, workers=cfg.workers)
            matcher.write_scores(scored, self.path("scores.csv"))

        return self._run_stage("score", ih, outputs, run)

    def stage_threshold(self):
        cfg = self.config
        outputs = ["matches.csv"]
        ih = _hash_obj({"scores": self._artifact_hash("scores.csv"), "threshold": cfg.threshold})

        def run():
            scored = matcher.read_scores(self.path("scores.csv"))
            edges = matcher.apply_threshold(scored, cfg.threshold)
            matcher.write_scores(edges, self.path("matches.csv"))

        return self._run_stage("threshold", ih, outputs, run)

    def stage_cluster(self):
        cfg = self.config
        if cfg.mode != "dedup":
            return False  # linkage stops at matching pairs
        outputs = ["clusters.csv", "extraction_log.csv"]
        ih = _hash_obj({"matches": self._artifact_hash("matches.csv")})

        def run():
            edges = matcher.read_scores(self.path("matches.csv"))
            g = clustering.build_graph(edges)
            result = clustering.disjoint_cliques(g)
            all_ids = self.cleaned_tables()[0].row_ids
            rows = clustering.assign_entity_ids(result.clusters, all_record_ids=all_ids)
            clustering.write_clusters(rows, self.path("clusters.csv"))
            clustering.write_extraction_log(result, self.path("extraction_log.csv"))

        return self._run_stage("cluster", ih, outputs, run)

    def stage_evaluate(self):
        cfg = self.config
        if cfg.labels is None:
            return False
        outputs = ["evaluation.txt"]
        ih = _hash_obj(
            {
                "scores": self._artifact_hash("scores.csv"),
                "test": self._artifact_hash("labels_test.csv"),
                "threshold": cfg.threshold,
            }
        )

        def run():
            test_set = matcher.read_labels(self.path("labels_test.csv"))
            scores = {(a, b): p for a, b, p in matcher.read_scores(self.path("scores.csv"))}
            predicted = {
                p for p, _ in test_set if scores.get(p, 0.0) >= cfg.threshold
            }
            truth = {p for p, lab in test_set if lab == 1}
            canonical = cfg.mode == "dedup"
            report = metrics.pairwise_metrics(predicted, truth, canonical=canonical)
            with open(self.path("evaluation.txt"), "w", encoding="utf-8") as fh:
                fh.write(report.to_text())

        return self._run_stage("evaluate", ih, outputs, run)

    def run(self):
        self.stage_profile()
        self.stage_clean()
        self.stage_encode()
        self.stage_index()
        self.stage_featurize()
        self.stage_train()
        self.stage_score()
        self.stage_threshold()
        self.stage_cluster()
        self.stage_evaluate()
        return self.manifest


def run_pipeline(config, force=False):
    """Run every stage; returns the artifact manifest."""
    return PipelineRun(config, force=force).run()
