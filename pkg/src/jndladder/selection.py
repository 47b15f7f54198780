"""Forward sequential feature selection with cross-validated scoring."""

import numpy as np

from .scores import r2_score
from .svr import svr_train


def kfold_indices(n: int, folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded shuffled k-fold split; returns (train, test) index pairs."""
    if folds < 2 or n < folds:
        raise ValueError(f"need at least {folds} samples for {folds}-fold CV")
    perm = np.random.default_rng(seed).permutation(n)
    chunks = np.array_split(perm, folds)
    out = []
    for k in range(folds):
        test = chunks[k]
        train = np.concatenate([chunks[i] for i in range(folds) if i != k])
        out.append((train, test))
    return out


def svr_cv_score(X, y, folds: int = 5, seed: int = 0) -> float:
    """Mean cross-validated R^2 of the default-parameter SVR."""
    scores = []
    for train, test in kfold_indices(len(y), folds, seed):
        model = svr_train(X[train], y[train])
        scores.append(r2_score(y[test], model.predict_batch(X[test])))
    return float(np.mean(scores))


def forward_sfs(
    X,
    y,
    k: int,
    feature_names: tuple[str, ...] | None = None,
    folds: int = 5,
    seed: int = 0,
    scorer=None,
) -> list[str]:
    """Greedy forward selection of k features, in addition order.

    At each step the feature whose addition maximizes the cross-validated
    score is kept; ties resolve to the lowest feature index. The scorer is
    callable(X_subset, y, folds, seed) -> float and defaults to the SVR R^2.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    if k > d:
        raise ValueError(f"cannot select {k} of {d} features")
    if n < 2 * folds:
        raise ValueError(f"need at least {2 * folds} samples for {folds}-fold CV")
    if y.min() == y.max():
        raise ValueError("degenerate dataset: constant targets")
    if feature_names is None:
        feature_names = tuple(f"x{i}" for i in range(d))
    if scorer is None:
        scorer = svr_cv_score

    selected: list[int] = []
    remaining = list(range(d))
    for _ in range(k):
        best_idx, best_score = None, -np.inf
        for idx in remaining:
            cols = selected + [idx]
            score = scorer(X[:, cols], y, folds, seed)
            if score > best_score:
                best_idx, best_score = idx, score
        selected.append(best_idx)
        remaining.remove(best_idx)
    return [feature_names[i] for i in selected]
