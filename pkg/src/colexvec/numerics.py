"""Shared numerical kernels.

All kernels are pure functions over numpy arrays: cosine similarity, PCA
via SVD of the centered matrix, seeded randomized truncated SVD, Spearman
rank correlation with average-rank tie handling, and a one-feature
logistic regression fitted by plain gradient descent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .errors import ValidationError
from .graph import DenseMatrix


class ZeroVectorWarning(UserWarning):
    """Cosine similarity saw an all-zero vector and returned 0."""


def cosine_similarity(u, v) -> float:
    """u.v / (|u||v|); an all-zero vector yields 0 with a warning.

    Zero vectors come from unattested concepts, which should look maximally
    unrelated rather than raise.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValidationError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        warnings.warn("cosine of a zero vector is defined as 0", ZeroVectorWarning)
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def pca_reduce(m: DenseMatrix, d: int) -> DenseMatrix:
    """Project onto the top-d principal components of the centered input.

    Components are ordered by decreasing explained variance with a fixed
    sign convention (largest-magnitude loading positive), so the result is
    deterministic. If d exceeds the input's rank, the trailing components
    are null-space directions with zero variance and the result's meta
    carries rank_deficient/rank.
    """
    x = m.values
    n, dim = x.shape
    if d < 1 or d > min(n, dim):
        raise ValidationError(f"target dimension {d} not in [1, min(n={n}, D={dim})]")
    centered = x - x.mean(axis=0, keepdims=True)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    # sign convention: per component, largest-|loading| entry positive
    for k in range(len(s)):
        pivot = np.argmax(np.abs(vt[k]))
        if vt[k, pivot] < 0:
            vt[k] = -vt[k]
            u[:, k] = -u[:, k]
    scores = u[:, :d] * s[:d]
    meta = {}
    tol = max(n, dim) * np.finfo(float).eps * (s[0] if len(s) else 0.0)
    rank = int(np.sum(s > tol))
    if d > rank:
        meta = {"rank_deficient": True, "rank": rank}
    return DenseMatrix(values=scores, row_labels=m.row_labels, meta=meta)


def randomized_tsvd(m, d: int, seed: int, n_iter: int = 7, oversample: int = 10):
    """Top-d singular triplets of a (sparse) matrix via a seeded range finder.

    Returns (U, S) with U n x d (orthonormal columns) and S non-increasing.
    The Gaussian test matrix is drawn from a generator seeded with `seed`,
    so identical seeds give bit-identical results. Subspace (power)
    iterations with QR re-orthonormalization keep small cases accurate to
    dense-SVD levels.
    """
    if d <= 0:
        raise ValidationError(f"rank must be positive, got {d}")
    if scipy.sparse.issparse(m):
        n_rows, n_cols = m.shape
    else:
        m = np.asarray(m, dtype=float)
        n_rows, n_cols = m.shape
    if d > min(n_rows, n_cols):
        raise ValidationError(f"rank {d} exceeds min matrix dimension {min(n_rows, n_cols)}")

    rng = np.random.default_rng(seed)
    k = min(d + oversample, n_cols)
    omega = rng.standard_normal((n_cols, k))
    y = m @ omega
    q, _ = np.linalg.qr(y)
    for _ in range(n_iter):
        z = m.T @ q
        q, _ = np.linalg.qr(z)
        y = m @ q
        q, _ = np.linalg.qr(y)
    b = np.asarray((m.T @ q).T)  # == q.T @ m, but stays dense for sparse m
    ub, s, _ = np.linalg.svd(b, full_matrices=False)
    u = q @ ub[:, :d]
    return u, s[:d]


def _average_ranks(xs: np.ndarray) -> np.ndarray:
    order = np.argsort(xs, kind="stable")
    ranks = np.empty(len(xs), dtype=float)
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        # ranks are 1-based; ties share the average of their positions
        ranks[order[i: j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(xs, ys) -> float:
    """Spearman correlation as the Pearson correlation of average ranks.

    The Pearson-of-ranks form stays exact under ties, unlike the
    6*sum(d^2) shortcut.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValidationError("inputs must be 1-D and of equal length")
    if len(xs) < 3:
        raise ValidationError(f"need at least 3 observations, got {len(xs)}")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise ValidationError("degenerate input: all values tied")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    rho = np.dot(rx, ry) / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry))
    return float(np.clip(rho, -1.0, 1.0))


@dataclass(frozen=True)
class LogisticModel:
    """One-feature logistic classifier: predict 1 iff sigmoid(w*x + b) >= threshold."""

    weight: float
    bias: float
    threshold: float = 0.5

    def __post_init__(self):
        if not (np.isfinite(self.weight) and np.isfinite(self.bias)):
            raise ValidationError("weight and bias must be finite")

    def predict_proba(self, features) -> np.ndarray:
        z = self.weight * np.asarray(features, dtype=float) + self.bias
        return _sigmoid(z)

    def predict(self, features) -> np.ndarray:
        return (self.predict_proba(features) >= self.threshold).astype(int)

    def accuracy(self, features, labels) -> float:
        labels = np.asarray(labels, dtype=int)
        return float(np.mean(self.predict(features) == labels))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_log_loss(weight: float, bias: float, features, labels) -> float:
    """Mean negative log-likelihood, computed via the numerically safe log1p form."""
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    z = weight * x + bias
    # log(1 + exp(-|z|)) + max(z, 0) - y*z
    return float(np.mean(np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0.0) - y * z))


def logistic_gradient(weight: float, bias: float, features, labels):
    """Gradient of the mean log-loss with respect to (weight, bias)."""
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    err = _sigmoid(weight * x + bias) - y
    return float(np.mean(err * x)), float(np.mean(err))


def fit_logistic_1d(
    features,
    labels,
    learning_rate: float = 0.1,
    max_iter: int = 10_000,
    grad_tol: float = 1e-6,
) -> LogisticModel:
    """Fit the one-feature model by gradient descent on the mean log-loss.

    Stops when the gradient norm drops below grad_tol or at the iteration
    cap. A single input feature makes anything beyond plain gradient
    descent unnecessary.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("features and labels must be 1-D and of equal length")
    classes = set(np.unique(y))
    if not classes <= {0, 1}:
        raise ValidationError(f"labels must be 0/1, got {sorted(classes)}")
    if classes != {0, 1}:
        raise ValidationError("both classes must be present")

    w, b = 0.0, 0.0
    for _ in range(max_iter):
        gw, gb = logistic_gradient(w, b, x, y)
        if np.hypot(gw, gb) < grad_tol:
            break
        w -= learning_rate * gw
        b -= learning_rate * gb
    return LogisticModel(weight=w, bias=b)
