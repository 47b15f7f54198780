"""Random forest regression on CART trees (MSE criterion).

Trees are deliberately simple and fully deterministic: every feature is
considered at every split, thresholds are midpoints between consecutive
distinct sorted values, and impurity ties resolve to the lowest feature
index, then the lowest threshold. Bootstrap resampling uses per-tree seeds
derived from the master seed, so results do not depend on scheduling.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

# paper-tuned defaults for the VMAF and CRF predictors
DEFAULT_RF_PARAMS = {
    "n_estimators": 100,
    "max_depth": 14,
    "min_samples_split": 2,
    "min_samples_leaf": 1,
}


@dataclass
class DecisionTree:
    """Flat node arrays; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.feature)

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        cur = np.zeros(len(X), dtype=np.intp)
        while True:
            feat = self.feature[cur]
            rows = np.nonzero(feat >= 0)[0]
            if rows.size == 0:
                return self.value[cur]
            nodes = cur[rows]
            go_left = X[rows, feat[rows]] <= self.threshold[nodes]
            cur[rows] = np.where(go_left, self.left[nodes], self.right[nodes])

    def to_lists(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_lists(cls, doc: dict) -> "DecisionTree":
        return cls(
            feature=np.asarray(doc["feature"], dtype=np.int64),
            threshold=np.asarray(doc["threshold"], dtype=np.float64),
            left=np.asarray(doc["left"], dtype=np.int64),
            right=np.asarray(doc["right"], dtype=np.int64),
            value=np.asarray(doc["value"], dtype=np.float64),
        )


class _TreeBuilder:
    def __init__(self, X, y, max_depth, min_samples_split, min_samples_leaf):
        self.X = X
        self.y = y
        self.max_depth = max_depth
        self.min_split = min_samples_split
        self.min_leaf = min_samples_leaf
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []

    def _add_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def grow(self, idx: np.ndarray, depth: int) -> int:
        node = self._add_node()
        yn = self.y[idx]
        if (
            depth >= self.max_depth
            or len(idx) < self.min_split
            or yn.min() == yn.max()
        ):
            self.value[node] = float(yn.mean())
            return node
        Xn = self.X[idx]
        feat, thr, gain = _kernels.best_split(Xn, yn, self.min_leaf)
        if feat < 0:
            self.value[node] = float(yn.mean())
            return node
        mask = Xn[:, feat] <= thr
        self.feature[node] = int(feat)
        self.threshold[node] = float(thr)
        self.left[node] = self.grow(idx[mask], depth + 1)
        self.right[node] = self.grow(idx[~mask], depth + 1)
        return node

    def build(self) -> DecisionTree:
        self.grow(np.arange(len(self.y)), 0)
        return DecisionTree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            value=np.asarray(self.value, dtype=np.float64),
        )


@dataclass
class RandomForestModel:
    trees: list[DecisionTree]
    hyperparameters: dict
    feature_names: tuple[str, ...]
    target_name: str = ""
    resolution_tag: str = ""
    seed: int = 0
    n_samples: int = 0
    bootstrap: bool = True
    _arena: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def _node_arena(self):
        """All trees flattened into one node table for a joint batch walk.

        Leaf children point at the leaf itself so finished rows idle while
        deeper trees keep descending.
        """
        if self._arena is None:
            counts = [t.node_count for t in self.trees]
            offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
            feature = np.concatenate([t.feature for t in self.trees])
            threshold = np.concatenate([t.threshold for t in self.trees])
            value = np.concatenate([t.value for t in self.trees])
            self_idx = np.arange(len(feature))
            internal = feature >= 0
            left = np.where(
                internal,
                np.concatenate([t.left + o for t, o in zip(self.trees, offsets)]),
                self_idx,
            )
            right = np.where(
                internal,
                np.concatenate([t.right + o for t, o in zip(self.trees, offsets)]),
                self_idx,
            )
            feat_safe = np.where(internal, feature, 0)
            self._arena = (feature, feat_safe, threshold, left, right, value, offsets)
        return self._arena

    def predict(self, x) -> float:
        return float(self.predict_batch(np.asarray(x, dtype=np.float64)[None, :])[0])

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"expected {self.n_features} features, got shape {X.shape}"
            )
        feature, feat_safe, threshold, left, right, value, offsets = self._node_arena()
        n = len(X)
        Xc = np.ascontiguousarray(X.T)
        cols = np.arange(n)
        cur = np.repeat(offsets[:, None], n, axis=1)  # (trees, rows)
        while np.any(feature[cur] >= 0):
            go_left = Xc[feat_safe[cur], cols] <= threshold[cur]
            cur = np.where(go_left, left[cur], right[cur])
        return value[cur].mean(axis=0)


def rf_train(
    X,
    y,
    hyperparameters: dict | None = None,
    seed: int = 0,
    bootstrap: bool = True,
    feature_names: tuple[str, ...] | None = None,
    target_name: str = "",
    resolution_tag: str = "",
    threads: int = 1,
) -> RandomForestModel:
    """Train a forest of CART regression trees.

    Each tree fits a bootstrap resample (n draws with replacement) unless
    bootstrap is disabled for deterministic split verification.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one target per row")
    n, d = X.shape
    if n < 2 or d < 1:
        raise ValueError("need at least 2 samples and 1 feature")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("training data must be finite")

    params = dict(DEFAULT_RF_PARAMS)
    if hyperparameters:
        unknown = set(hyperparameters) - set(params)
        if unknown:
            raise ValueError(f"unknown hyperparameters {sorted(unknown)}")
        params.update(hyperparameters)
    if feature_names is None:
        feature_names = tuple(f"x{i}" for i in range(d))
    if len(feature_names) != d:
        raise ValueError("feature_names length mismatch")

    children = np.random.SeedSequence(seed).spawn(params["n_estimators"])

    def fit_one(child):
        if bootstrap:
            idx = np.random.default_rng(child).integers(0, n, size=n)
            Xb, yb = X[idx], y[idx]
        else:
            Xb, yb = X, y
        return _TreeBuilder(
            Xb,
            yb,
            params["max_depth"],
            params["min_samples_split"],
            params["min_samples_leaf"],
        ).build()

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trees = list(pool.map(fit_one, children))
    else:
        trees = [fit_one(c) for c in children]

    return RandomForestModel(
        trees=trees,
        hyperparameters=params,
        feature_names=tuple(feature_names),
        target_name=target_name,
        resolution_tag=resolution_tag,
        seed=seed,
        n_samples=n,
        bootstrap=bootstrap,
    )


def rf_predict(model: RandomForestModel, x) -> float:
    """Mean of the per-tree leaf values for one sample."""
    return model.predict(x)
