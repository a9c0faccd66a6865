"""Bagged ensembles of product-space trees."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import product as prod
from . import tree as tr
from .product import ProductSignature, as_signature
from .tree import DecisionTree, FitConfig


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 12
    bootstrap: bool = True
    feature_subsample: Optional[int] = None
    seed: int = 0
    tree_config: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("a forest needs at least one tree")
        if self.feature_subsample is not None and self.feature_subsample < 1:
            raise ValueError("feature_subsample must be positive")


def tree_seeds(seed: int, n_trees: int) -> list[np.random.SeedSequence]:
    """Child seed sequences, one per tree index."""
    return np.random.SeedSequence(seed).spawn(n_trees)


def bootstrap_indices(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, n, size=n)


@dataclass
class RandomForest:
    signature: ProductSignature
    trees: list[DecisionTree]
    config: ForestConfig
    classes: Optional[np.ndarray] = None

    @property
    def task(self) -> str:
        return self.config.tree_config.task

    def predict_proba(self, X) -> np.ndarray:
        if self.task != "classification":
            raise ValueError("predict_proba is only defined for classification forests")
        # fixed tree order keeps the float sum reproducible
        total = self.trees[0].leaf_values(X)
        for t in self.trees[1:]:
            total = total + t.leaf_values(X)
        return total / len(self.trees)

    def predict(self, X) -> np.ndarray:
        if self.task == "classification":
            return self.classes[np.argmax(self.predict_proba(X), axis=1)]
        total = self.trees[0].leaf_values(X)
        for t in self.trees[1:]:
            total = total + t.leaf_values(X)
        return total / len(self.trees)

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        return {
            "signature": str(self.signature),
            "task": self.task,
            "classes": None if self.classes is None else self.classes.tolist(),
            "config": cfg,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RandomForest":
        cfg = dict(doc["config"])
        cfg["tree_config"] = FitConfig(**cfg["tree_config"])
        classes = doc.get("classes")
        return cls(
            signature=prod.parse_signature(doc["signature"]),
            trees=[DecisionTree.from_dict(t) for t in doc["trees"]],
            config=ForestConfig(**cfg),
            classes=None if classes is None else np.asarray(classes),
        )


def fit_forest(sig, X, y, config: ForestConfig = ForestConfig(), n_jobs: int = 1) -> RandomForest:
    """Fit ``config.n_trees`` trees on bootstrap resamples.

    Tree ``i`` draws its rows (and any per-split feature subsets) from its own
    child of ``SeedSequence(config.seed)``, so the result does not depend on
    ``n_jobs``.
    """
    sig = as_signature(sig)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("cannot fit a forest to an empty dataset")
    if X.shape[1] != sig.width:
        raise ValueError(f"expected {sig.width} columns for '{sig}', got {X.shape[1]}")
    q = config.feature_subsample
    if q is not None and q > sig.non_special_dims.size:
        raise ValueError("feature_subsample exceeds the number of non-special dimensions")
    prod.check_membership(sig, X)

    tcfg = config.tree_config
    classes = tr.encode_labels(y)[0] if tcfg.task == "classification" else None
    n = X.shape[0]

    def one(child: np.random.SeedSequence) -> DecisionTree:
        rng = np.random.default_rng(child)
        idx = bootstrap_indices(rng, n) if config.bootstrap else np.arange(n)
        return tr.fit(sig, X[idx], y[idx], tcfg, classes=classes, feature_subsample=q, rng=rng, check=False)

    seeds = tree_seeds(config.seed, config.n_trees)
    if n_jobs == 1:
        trees = [one(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs if n_jobs > 0 else None) as ex:
            trees = list(ex.map(one, seeds))
    return RandomForest(sig, trees, config, classes)


def predict_forest(forest: RandomForest, X) -> np.ndarray:
    return forest.predict(X)
