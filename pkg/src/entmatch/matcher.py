"""Supervised pair classification: CART random forest with match-probability output."""

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

MODEL_FORMAT_VERSION = 1


class MatcherError(Exception):
    pass


@dataclass
class Hyperparameters:
    n_trees: int = 100
    max_depth: int = 12
    min_leaf: int = 5

    def as_dict(self):
        return {"n_trees": self.n_trees, "max_depth": self.max_depth, "min_leaf": self.min_leaf}


def _gini_from_counts(n1, n):
    if n == 0:
        return 0.0
    p = n1 / n
    return 2 * p * (1 - p)


def _best_split(X, y, feat_ids, min_leaf):
    """Best (feature, threshold, missing_goes_left) by weighted gini over non-missing rows."""
    best = (None, 0.0, True, math.inf)
    n_total = len(y)
    for f in feat_ids:
        col = X[:, f]
        ok = ~np.isnan(col)
        if ok.sum() < 2 * min_leaf:
            continue
        v = col[ok]
        t = y[ok]
        order = np.argsort(v, kind="mergesort")
        v = v[order]
        t = t[order]
        n = len(v)
        cum1 = np.cumsum(t)
        total1 = cum1[-1]
        # candidate boundaries between distinct consecutive values
        idx = np.flatnonzero(v[1:] != v[:-1]) + 1
        if len(idx) == 0:
            continue
        idx = idx[(idx >= min_leaf) & (idx <= n - min_leaf)]
        if len(idx) == 0:
            continue
        nl = idx
        l1 = cum1[idx - 1]
        nr = n - nl
        r1 = total1 - l1
        pl = l1 / nl
        pr = r1 / nr
        gini = (nl * 2 * pl * (1 - pl) + nr * 2 * pr * (1 - pr)) / n
        k = int(np.argmin(gini))
        if gini[k] < best[3] - 1e-12:
            thr = (v[idx[k] - 1] + v[idx[k]]) / 2
            missing_left = bool(nl[k] >= nr[k])
            best = (int(f), float(thr), missing_left, float(gini[k]))
    return best


def _grow_tree(X, y, hp, rng, depth=0):
    n = len(y)
    n1 = int(y.sum())
    if depth >= hp.max_depth or n < 2 * hp.min_leaf or n1 == 0 or n1 == n:
        return {"leaf": 1 if 2 * n1 >= n else 0}
    k = max(1, int(round(math.sqrt(X.shape[1]))))
    feat_ids = np.sort(rng.choice(X.shape[1], size=k, replace=False))
    f, thr, missing_left, gini = _best_split(X, y, feat_ids, hp.min_leaf)
    if f is None:
        return {"leaf": 1 if 2 * n1 >= n else 0}
    col = X[:, f]
    nanmask = np.isnan(col)
    left = (col <= thr) | (nanmask if missing_left else np.zeros(n, dtype=bool))
    right = ~left
    if left.sum() == 0 or right.sum() == 0:
        return {"leaf": 1 if 2 * n1 >= n else 0}
    return {
        "f": f,
        "t": thr,
        "ml": missing_left,
        "l": _grow_tree(X[left], y[left], hp, rng, depth + 1),
        "r": _grow_tree(X[right], y[right], hp, rng, depth + 1),
    }


def _tree_predict(tree, X):
    """Vectorized routing of all rows through one tree; returns 0/1 votes."""
    out = np.empty(len(X), dtype=np.int8)
    stack = [(tree, np.arange(len(X)))]
    while stack:
        node, idx = stack.pop()
        if "leaf" in node:
            out[idx] = node["leaf"]
            continue
        col = X[idx, node["f"]]
        nanmask = np.isnan(col)
        left = col <= node["t"]
        if node["ml"]:
            left |= nanmask
        else:
            left &= ~nanmask
        stack.append((node["l"], idx[left]))
        stack.append((node["r"], idx[~left]))
    return out


def _tree_seed(seed, t):
    return np.random.SeedSequence([seed, t])


def _fit_one_tree(args):
    X, y, hp, seed, t = args
    rng = np.random.default_rng(_tree_seed(seed, t))
    boot = rng.integers(0, len(y), size=len(y))
    tree = _grow_tree(X[boot], y[boot], hp, rng)
    oob = np.ones(len(y), dtype=bool)
    oob[boot] = False
    return tree, oob


@dataclass
class MatchModel:
    feature_names: list
    hyperparameters: Hyperparameters
    seed: int
    trees: list
    oob_accuracy: float = None
    dataset_hash: str = ""
    missing_policy: str = "majority_direction"

    def to_json(self):
        doc = {
            "version": MODEL_FORMAT_VERSION,
            "algorithm": "random_forest",
            "missing_policy": self.missing_policy,
            "hyperparameters": self.hyperparameters.as_dict(),
            "seed": self.seed,
            "feature_names": self.feature_names,
            "oob_accuracy": self.oob_accuracy,
            "dataset_hash": self.dataset_hash,
            "trees": self.trees,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("version") != MODEL_FORMAT_VERSION:
            raise MatcherError(f"unsupported model version {doc.get('version')!r}")
        return cls(
            feature_names=doc["feature_names"],
            hyperparameters=Hyperparameters(**doc["hyperparameters"]),
            seed=doc["seed"],
            trees=doc["trees"],
            oob_accuracy=doc["oob_accuracy"],
            dataset_hash=doc["dataset_hash"],
            missing_policy=doc["missing_policy"],
        )


def _matrix_hash(X, y):
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(X).tobytes())
    h.update(np.ascontiguousarray(y).tobytes())
    return h.hexdigest()[:16]


def train(X, labels, feature_names, hyperparameters=None, seed=0, workers=1):
    """Fit a random forest; identical model for identical inputs and seed, any worker count."""
    hp = hyperparameters or Hyperparameters()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int8)
    if X.ndim != 2 or len(X) != len(y):
        raise MatcherError("feature matrix and labels are misaligned")
    if len(feature_names) != X.shape[1]:
        raise MatcherError(
            f"feature-name arity {len(feature_names)} != matrix width {X.shape[1]}"
        )
    if y.min() == y.max():
        raise MatcherError("single-class training set: need both match and non-match labels")

    jobs = [(X, y, hp, seed, t) for t in range(hp.n_trees)]
    if workers <= 1:
        fitted = [_fit_one_tree(j) for j in jobs]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            fitted = list(ex.map(_fit_one_tree, jobs))

    trees = [t for t, _ in fitted]
    votes = np.zeros(len(y), dtype=np.int32)
    counts = np.zeros(len(y), dtype=np.int32)
    for tree, oob in fitted:
        if oob.any():
            votes[oob] += _tree_predict(tree, X[oob])
            counts[oob] += 1
    covered = counts > 0
    oob_acc = None
    if covered.any():
        pred = (2 * votes[covered] >= counts[covered]).astype(np.int8)
        oob_acc = float(np.mean(pred == y[covered]))
    return MatchModel(
        feature_names=list(feature_names),
        hyperparameters=hp,
        seed=seed,
        trees=trees,
        oob_accuracy=oob_acc,
        dataset_hash=_matrix_hash(X, y),
    )


def predict_proba(model, X, feature_names=None, workers=1):
    """Match probability per row: fraction of trees voting match."""
    X = np.asarray(X, dtype=np.float64)
    if feature_names is not None and list(feature_names) != list(model.feature_names):
        raise MatcherError("feature layout mismatch between model and matrix")
    if X.ndim != 2 or X.shape[1] != len(model.feature_names):
        raise MatcherError(
            f"matrix width {X.shape[1] if X.ndim == 2 else '?'} != model arity {len(model.feature_names)}"
        )
    if len(X) == 0:
        return np.zeros(0, dtype=np.float64)
    votes = np.zeros(len(X), dtype=np.int32)
    for tree in model.trees:
        votes += _tree_predict(tree, X)
    return votes / len(model.trees)


def score_pairs(model, pairs, X, feature_names=None, workers=1):
    """ScoredPair list [(id_a, id_b, probability)] in canonical pair order."""
    probs = predict_proba(model, X, feature_names, workers)
    scored = sorted(zip(pairs, probs.tolist()))
    return [(a, b, p) for (a, b), p in scored]


def apply_threshold(scored, threshold):
    """Keep pairs with probability >= threshold; probability becomes the edge weight."""
    if not 0.0 <= threshold <= 1.0:
        raise MatcherError(f"threshold {threshold} outside [0, 1]")
    return [(a, b, p) for a, b, p in scored if p >= threshold]


def split_train_test(labeled, ratio, seed=0):
    """Stratified, deterministic split of [(pair, label)] into (train, test)."""
    if not 0.0 < ratio < 1.0:
        raise MatcherError("ratio must be in (0, 1)")
    by_label = {}
    for item in labeled:
        by_label.setdefault(item[-1], []).append(item)
    rng = np.random.default_rng(seed)
    train_set, test_set = [], []
    for label in sorted(by_label, key=str):
        stratum = sorted(by_label[label])
        if len(stratum) < 2:
            raise MatcherError(f"stratum {label!r} has fewer than 2 members")
        order = rng.permutation(len(stratum))
        n_train = int(round(len(stratum) * ratio))
        n_train = min(max(n_train, 1), len(stratum) - 1)
        for k, i in enumerate(order):
            (train_set if k < n_train else test_set).append(stratum[i])
    train_set.sort()
    test_set.sort()
    return train_set, test_set


def write_scores(scored, path, delimiter=","):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"id_a{delimiter}id_b{delimiter}probability\n")
        for a, b, p in scored:
            fh.write(f"{a}{delimiter}{b}{delimiter}{p:.6f}\n")


def read_scores(path, delimiter=","):
    out = []
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            a, b, p = line.rstrip("\n").split(delimiter)
            out.append((int(a), int(b), float(p)))
    return out


def read_labels(path, delimiter=","):
    """Delimited labels file: id_a, id_b, label in {0,1}."""
    out = []
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            a, b, lab = line.rstrip("\n").split(delimiter)
            if lab not in ("0", "1"):
                raise MatcherError(f"label must be 0 or 1, got {lab!r}")
            out.append(((int(a), int(b)), int(lab)))
    return out


def write_labels(labeled, path, delimiter=","):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"id_a{delimiter}id_b{delimiter}label\n")
        for (a, b), lab in sorted(labeled):
            fh.write(f"{a}{delimiter}{b}{delimiter}{lab}\n")
