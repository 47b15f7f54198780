"""Epsilon-insensitive support vector regression with an RBF kernel.

The dual is solved by SMO-style pairwise coordinate steps on the maximal
KKT-violating pair, terminating when the violation drops below tol or the
iteration cap is hit (the returned model is flagged either way). Inputs
are standardized internally; the scaler is part of the model.
"""

from dataclasses import dataclass

import numpy as np

# paper-tuned defaults for the JND threshold predictor
DEFAULT_C = 0.1
DEFAULT_EPSILON = 1e-4
DEFAULT_TOL = 1e-3


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """K(u, v) = exp(-gamma * ||u - v||^2) for all row pairs."""
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def svr_dual_objective(
    K: np.ndarray, y: np.ndarray, epsilon: float, beta: np.ndarray
) -> float:
    """Dual value W(beta) = -1/2 b'Kb - eps*||b||_1 + y'b (maximization form)."""
    return float(
        -0.5 * beta @ K @ beta - epsilon * np.abs(beta).sum() + y @ beta
    )


@dataclass
class SvrModel:
    support_vectors: np.ndarray  # standardized rows
    dual_coefficients: np.ndarray  # alpha - alpha*, nonzero entries only
    bias: float
    gamma: float
    C: float
    epsilon: float
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    feature_names: tuple[str, ...] | None = None
    converged: bool = True
    kkt_violation: float = 0.0
    iterations: int = 0

    @property
    def n_features(self) -> int:
        return len(self.feature_mean)

    def predict(self, x) -> float:
        return float(self.predict_batch(np.asarray(x, dtype=np.float64)[None, :])[0])

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"expected {self.n_features} features, got shape {X.shape}"
            )
        Xs = (X - self.feature_mean) / self.feature_scale
        if len(self.support_vectors) == 0:
            return np.full(len(X), self.bias)
        k = rbf_kernel(Xs, self.support_vectors, self.gamma)
        return k @ self.dual_coefficients + self.bias


def _standardize(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    return (X - mean) / scale, mean, scale


def svr_train(
    X,
    y,
    C: float = DEFAULT_C,
    epsilon: float = DEFAULT_EPSILON,
    gamma: float | str = "scale",
    tol: float = DEFAULT_TOL,
    max_iter: int = 100_000,
    feature_names: tuple[str, ...] | None = None,
) -> SvrModel:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one target per row")
    n, d = X.shape
    if n < 2:
        raise ValueError("need at least 2 samples")
    if C <= 0 or epsilon < 0:
        raise ValueError("require C > 0 and epsilon >= 0")

    Xs, mean, scale = _standardize(X)
    if gamma == "scale":
        var = float(Xs.var())
        gamma_value = 1.0 / (d * var) if var > 0 else 1.0
    else:
        gamma_value = float(gamma)

    K = rbf_kernel(Xs, Xs, gamma_value)

    # 2n-variable box QP: lam = [alpha; alpha*], signs s = [+1; -1],
    # minimize 1/2 lam'Q lam + p'lam subject to s'lam = 0, 0 <= lam <= C.
    lam = np.zeros(2 * n)
    grad = np.concatenate([epsilon - y, epsilon + y])
    neg_inf = -np.inf

    it = 0
    violation = np.inf
    m_val = M_val = 0.0
    while it < max_iter:
        ms = np.empty(2 * n)
        ms[:n] = -grad[:n]
        ms[n:] = grad[n:]
        up = np.concatenate([lam[:n] < C, lam[n:] > 0.0])
        low = np.concatenate([lam[:n] > 0.0, lam[n:] < C])

        up_vals = np.where(up, ms, neg_inf)
        low_vals = np.where(low, ms, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        m_val = up_vals[i]
        M_val = low_vals[j]
        violation = m_val - M_val
        if violation < tol:
            break

        i0, j0 = i % n, j % n
        eta = K[i0, i0] + K[j0, j0] - 2.0 * K[i0, j0]
        if eta <= 1e-12:
            eta = 1e-12
        t_star = violation / eta

        # box limits along the (i up, j down) direction, with exact snapping
        ti_max = (C - lam[i]) if i < n else lam[i]
        tj_max = lam[j] if j < n else (C - lam[j])
        t = min(t_star, ti_max, tj_max)
        if t == ti_max:
            lam[i] = C if i < n else 0.0
        else:
            lam[i] += t if i < n else -t
        if t == tj_max:
            lam[j] = 0.0 if j < n else C
        else:
            lam[j] += -t if j < n else t

        delta = t * (K[:, i0] - K[:, j0])
        grad[:n] += delta
        grad[n:] -= delta
        it += 1

    converged = bool(violation < tol)
    free = (lam > 0.0) & (lam < C)
    if free.any():
        ms = np.empty(2 * n)
        ms[:n] = -grad[:n]
        ms[n:] = grad[n:]
        bias = float(ms[free].mean())
    else:
        bias = float((m_val + M_val) / 2.0)

    beta = lam[:n] - lam[n:]
    sv = beta != 0.0
    return SvrModel(
        support_vectors=Xs[sv].copy(),
        dual_coefficients=beta[sv].copy(),
        bias=bias,
        gamma=gamma_value,
        C=C,
        epsilon=epsilon,
        feature_mean=mean,
        feature_scale=scale,
        feature_names=tuple(feature_names) if feature_names else None,
        converged=converged,
        kkt_violation=float(violation),
        iterations=it,
    )


def svr_predict(model: SvrModel, x) -> float:
    """Kernel expansion over the support vectors plus the bias."""
    return model.predict(x)
