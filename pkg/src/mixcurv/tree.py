"""Greedy CART-style decision trees over product manifolds.

Every split pairs a non-special ambient dimension with its component's special
dimension. Candidates are the geometry-specific angular midpoints between
consecutive point angles, and the best one maximises information gain (Gini
impurity for classification, variance for regression).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from . import product as prod
from .manifolds import Kind
from .product import ProductSignature, as_signature
from .splits import SplitCandidate, candidates_from_sorted, point_angles, split_sign_values

TASKS = ("classification", "regression")

# gains within this fraction of the parent impurity count as ties
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class FitConfig:
    max_depth: int = 3
    min_samples_split: int = 2
    min_impurity_decrease: float = 0.0
    task: str = "classification"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if int(self.max_depth) != self.max_depth or self.max_depth < 1:
            raise ValueError("max_depth must be a positive integer")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be at least 2")
        if self.min_impurity_decrease < 0:
            raise ValueError("min_impurity_decrease must be nonnegative")


@dataclass
class Leaf:
    value: Union[np.ndarray, float]
    count: int


@dataclass
class Decision:
    dim: int
    angle: float
    left: "Node"
    right: "Node"
    gain: float
    count: int

    @property
    def candidate(self) -> SplitCandidate:
        return SplitCandidate(self.dim, self.angle)


Node = Union[Leaf, Decision]


def impurity(y, task: str = "classification") -> float:
    """Gini impurity ``1 - sum p_k^2`` or population variance."""
    y = np.asarray(y)
    if y.size == 0:
        raise ValueError("impurity of an empty set is undefined")
    if task == "regression":
        return float(np.var(y.astype(float)))
    _, counts = np.unique(y, return_counts=True)
    p = counts / y.size
    return float(1.0 - np.sum(p * p))


def information_gain(y, y_plus, y_minus, task: str = "classification") -> float:
    """Parent impurity minus the size-weighted child impurities."""
    y, y_plus, y_minus = (np.asarray(a) for a in (y, y_plus, y_minus))
    if y_plus.size + y_minus.size != y.size or not np.array_equal(
        np.sort(y), np.sort(np.concatenate([y_plus, y_minus]))
    ):
        raise ValueError("y_plus and y_minus must partition y")
    n = y.size
    gain = impurity(y, task)
    for part in (y_plus, y_minus):
        if part.size:
            gain -= part.size / n * impurity(part, task)
    return gain


def _weighted_impurity(S, n_s, task):
    """``n_s * impurity`` of each side, from per-side sums.

    Classification sums are class counts; regression sums are
    ``[sum y, sum y^2]`` of centred targets.
    """
    safe = np.where(n_s > 0, n_s, 1.0)
    if task == "classification":
        return n_s - np.sum(S * S, axis=-1) / safe
    return np.maximum(S[..., 1] - S[..., 0] ** 2 / safe, 0.0)


class _Grower:
    def __init__(self, sig, X, T, config, n_classes, feature_subsample, rng):
        self.config = config
        self.task = config.task
        self.T = T
        self.n_classes = n_classes
        self.dims = sig.non_special_dims
        self.specials = np.array([sig.special_for(d) for d in self.dims], dtype=int)
        self.kinds = [sig.component_for(d).kind for d in self.dims]
        self.xs = X[:, self.specials]
        self.xd = X[:, self.dims]
        # angles never change between nodes; one contiguous row per dimension
        self.theta = np.ascontiguousarray(point_angles(self.xs, self.xd).T)
        self.feature_subsample = feature_subsample
        self.rng = rng

    def leaf(self, idx):
        if self.task == "classification":
            counts = self.T[idx].sum(axis=0)
            return Leaf(counts / counts.sum(), int(idx.size))
        return Leaf(float(np.mean(self.T[idx])), int(idx.size))

    def parent_impurity(self, idx):
        if self.task == "classification":
            p = self.T[idx].sum(axis=0) / idx.size
            return float(1.0 - np.sum(p * p))
        return float(np.var(self.T[idx]))

    def scan(self, j, idx, T_node, parent):
        """Candidate angles and gains for column ``j`` of the non-special dims."""
        th = self.theta[j, idx]
        order = np.argsort(th, kind="stable")
        ths = th[order]
        fresh = np.empty(ths.size, dtype=bool)
        fresh[0] = True
        np.not_equal(ths[1:], ths[:-1], out=fresh[1:])
        first = np.flatnonzero(fresh)
        uniq = ths[first]
        kind = self.kinds[j]
        ratio = None
        if kind is Kind.FLAT:
            pts = idx[order[first]]
            ratio = self.xd[pts, j] / self.xs[pts, j]
        cands = candidates_from_sorted(kind, uniq, ratio)
        if cands.size == 0:
            return cands, cands

        if self.task == "classification":
            vals = T_node[order]
        else:
            y = T_node[order]
            y = y - y.mean()
            vals = np.stack([y, y * y], axis=1)
        n = idx.size
        P = np.vstack([np.zeros((1, vals.shape[1])), np.cumsum(vals, axis=0)])
        total = P[-1]

        # positive side is the open arc (theta - pi, theta)
        hi = np.searchsorted(ths, cands, side="left")
        lo = cands - np.pi
        wrapped = lo < 0
        lo_i = np.searchsorted(ths, np.where(wrapped, lo + 2 * np.pi, lo), side="right")
        S_plus = np.where(wrapped[:, None], P[hi] + total - P[lo_i], P[hi] - P[lo_i])
        n_plus = np.where(wrapped, hi + n - lo_i, hi - lo_i).astype(float)
        n_minus = n - n_plus
        w = _weighted_impurity(S_plus, n_plus, self.task) + _weighted_impurity(
            total - S_plus, n_minus, self.task
        )
        return cands, parent - w / n

    def dims_to_scan(self):
        q = self.feature_subsample
        if q is None or q >= self.dims.size:
            return range(self.dims.size)
        return np.sort(self.rng.choice(self.dims.size, size=q, replace=False))

    def grow(self, idx, depth):
        cfg = self.config
        if depth >= cfg.max_depth or idx.size < cfg.min_samples_split:
            return self.leaf(idx)
        parent = self.parent_impurity(idx)
        tol = TIE_RTOL * parent
        T_node = self.T[idx]
        scanned = [(j, *self.scan(j, idx, T_node, parent)) for j in self.dims_to_scan()]
        scanned = [t for t in scanned if t[1].size]
        if not scanned:
            return self.leaf(idx)
        top = max(float(g.max()) for _, _, g in scanned)
        if not top > cfg.min_impurity_decrease + tol:
            return self.leaf(idx)
        # first candidate in scan order within tol of the best gain
        j, cands, gains = next(t for t in scanned if t[2].max() >= top - tol)
        k = int(np.argmax(gains >= top - tol))
        theta, best_gain = float(cands[k]), float(gains[k])
        plus = split_sign_values(self.xs[idx, j], self.xd[idx, j], theta) > 0
        if plus.all() or not plus.any():
            return self.leaf(idx)
        return Decision(
            dim=int(self.dims[j]),
            angle=theta,
            left=self.grow(idx[~plus], depth + 1),
            right=self.grow(idx[plus], depth + 1),
            gain=best_gain,
            count=int(idx.size),
        )


@dataclass
class DecisionTree:
    signature: ProductSignature
    root: Node
    config: FitConfig
    classes: Optional[np.ndarray] = None

    @property
    def task(self) -> str:
        return self.config.task

    def _check_width(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.signature.width:
            raise ValueError(f"expected {self.signature.width} columns, got {X.shape[1]}")
        return X

    def leaf_values(self, X) -> np.ndarray:
        """Leaf probability vectors (classification) or means (regression) per row."""
        X = self._check_width(X)
        n = X.shape[0]
        if self.task == "classification":
            out = np.empty((n, len(self.classes)))
        else:
            out = np.empty(n)
        stack = [(self.root, np.arange(n))]
        while stack:
            node, idx = stack.pop()
            if isinstance(node, Leaf):
                out[idx] = node.value
                continue
            s = self.signature.special_for(node.dim)
            plus = split_sign_values(X[idx, s], X[idx, node.dim], node.angle) > 0
            stack.append((node.left, idx[~plus]))
            stack.append((node.right, idx[plus]))
        return out

    def predict_proba(self, X) -> np.ndarray:
        if self.task != "classification":
            raise ValueError("predict_proba is only defined for classification trees")
        return self.leaf_values(X)

    def predict(self, X) -> np.ndarray:
        vals = self.leaf_values(X)
        if self.task == "classification":
            return self.classes[np.argmax(vals, axis=1)]
        return vals

    def nodes(self):
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            yield node, depth
            if isinstance(node, Decision):
                stack.append((node.right, depth + 1))
                stack.append((node.left, depth + 1))

    @property
    def depth(self) -> int:
        return max(d for _, d in self.nodes())

    def to_dict(self) -> dict:
        return {
            "signature": str(self.signature),
            "task": self.task,
            "classes": None if self.classes is None else self.classes.tolist(),
            "config": asdict(self.config),
            "root": _node_to_dict(self.root),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DecisionTree":
        classes = doc.get("classes")
        return cls(
            signature=prod.parse_signature(doc["signature"]),
            root=_node_from_dict(doc["root"]),
            config=FitConfig(**doc["config"]),
            classes=None if classes is None else np.asarray(classes),
        )


def _node_to_dict(node: Node) -> dict:
    if isinstance(node, Leaf):
        if isinstance(node.value, np.ndarray):
            return {"probs": node.value.tolist(), "count": node.count}
        return {"mean": float(node.value), "count": node.count}
    return {
        "dim": node.dim,
        "angle": node.angle,
        "gain": node.gain,
        "count": node.count,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(d: dict) -> Node:
    if "probs" in d:
        return Leaf(np.asarray(d["probs"], dtype=float), int(d["count"]))
    if "mean" in d:
        return Leaf(float(d["mean"]), int(d["count"]))
    return Decision(
        dim=int(d["dim"]),
        angle=float(d["angle"]),
        left=_node_from_dict(d["left"]),
        right=_node_from_dict(d["right"]),
        gain=float(d.get("gain", 0.0)),
        count=int(d.get("count", 0)),
    )


def encode_labels(y, classes=None):
    """Class vocabulary and integer codes for ``y``."""
    y = np.asarray(y)
    classes = np.unique(y) if classes is None else np.asarray(classes)
    codes = np.searchsorted(classes, y)
    if np.any(codes >= classes.size) or not np.array_equal(classes[np.minimum(codes, classes.size - 1)], y):
        raise ValueError("labels outside the class vocabulary")
    return classes, codes


def fit(
    sig,
    X,
    y,
    config: FitConfig = FitConfig(),
    *,
    classes=None,
    feature_subsample: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    check: bool = True,
) -> DecisionTree:
    """Fit a product-space decision tree.

    Parameters
    ----------
    sig : ProductSignature or str
        Signature of the product manifold the rows of ``X`` live on.
    X : array of shape (n, sig.width)
        Points in ambient coordinates.
    y : array of shape (n,)
        Class labels or real targets, depending on ``config.task``.
    classes : array, optional
        Fixed class vocabulary; defaults to the sorted distinct labels. Forests
        pass the full vocabulary so bootstrap trees agree on columns.
    feature_subsample : int, optional
        Number of non-special dimensions drawn (with ``rng``) at each split.
    check : bool
        Verify that every row lies on the manifold.
    """
    sig = as_signature(sig)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("cannot fit a tree to an empty dataset")
    if X.shape[1] != sig.width:
        raise ValueError(f"expected {sig.width} columns for '{sig}', got {X.shape[1]}")
    if y.shape != (X.shape[0],):
        raise ValueError("y must be one-dimensional with one entry per row of X")
    if check:
        prod.check_membership(sig, X)
    if feature_subsample is not None:
        if not 1 <= feature_subsample <= sig.non_special_dims.size:
            raise ValueError("feature_subsample must be between 1 and the number of non-special dims")
        if rng is None:
            rng = np.random.default_rng()

    if config.task == "classification":
        classes, codes = encode_labels(y, classes)
        T = np.zeros((y.size, classes.size))
        T[np.arange(y.size), codes] = 1.0
        n_classes = classes.size
    else:
        classes, T, n_classes = None, y.astype(float), 0

    grower = _Grower(sig, X, T, config, n_classes, feature_subsample, rng)
    root = grower.grow(np.arange(X.shape[0]), 0)
    return DecisionTree(sig, root, config, classes)


def predict(tree: DecisionTree, X) -> np.ndarray:
    return tree.predict(X)


def predict_proba(tree: DecisionTree, X) -> np.ndarray:
    return tree.predict_proba(X)
