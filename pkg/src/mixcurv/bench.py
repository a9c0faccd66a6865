"""Baselines, metrics and the synthetic benchmark runners.

Three feature spaces are compared, each with a single tree and a forest:

``product``
    the angular product-space model on the native coordinates;
``ambient``
    a flat-mode model on all ambient columns (classical threshold CART);
``tangent``
    a flat-mode model on log-map coordinates at the product origin.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

from . import manifolds as mf
from .forest import ForestConfig, RandomForest, fit_forest
from .product import ProductSignature, as_signature, parse_signature, tangent_features
from .sampler import MixtureConfig, sample_mixture
from .tree import DecisionTree, FitConfig, fit

SPACES = ("product", "ambient", "tangent")
METHODS = tuple(f"{space}_{model}" for model in ("dt", "rf") for space in SPACES)
MARKERS = {"product": "*", "ambient": "†", "tangent": "‡"}

FIGURE1_CURVATURES = tuple(np.round(np.arange(-4.0, 4.01, 0.5), 2).tolist())
TABLE1_TERMS = (
    "H5 x H5",
    "S5 x S5",
    "H5 x S5",
    "H2 x H2 x H2 x H2 x H2",
    "S2 x S2 x S2 x S2 x S2",
    "H2 x H2 x E2 x S2 x S2",
)

Estimator = Union[DecisionTree, RandomForest]


@dataclass
class SpaceModel:
    """A fitted estimator plus the feature map it was trained in."""

    space: str
    signature: Optional[ProductSignature]
    estimator: Estimator

    def features(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.space == "product":
            return X
        if self.signature is not None and X.shape[1] != self.signature.width:
            raise ValueError(f"expected {self.signature.width} columns, got {X.shape[1]}")
        if self.space == "ambient":
            return mf.lift(X)
        return mf.lift(tangent_features(self.signature, X))

    def predict(self, X) -> np.ndarray:
        return self.estimator.predict(self.features(X))

    def predict_proba(self, X) -> np.ndarray:
        return self.estimator.predict_proba(self.features(X))


def _fit_flat(F, y, config, n_jobs=1) -> Estimator:
    sig = as_signature(f"E{F.shape[1]}")
    if isinstance(config, ForestConfig):
        return fit_forest(sig, mf.lift(F), y, config, n_jobs=n_jobs)
    return fit(sig, mf.lift(F), y, config)


def product_model(sig, X, y, config: Union[FitConfig, ForestConfig] = FitConfig(), n_jobs=1) -> SpaceModel:
    sig = as_signature(sig)
    if isinstance(config, ForestConfig):
        est = fit_forest(sig, X, y, config, n_jobs=n_jobs)
    else:
        est = fit(sig, X, y, config)
    return SpaceModel("product", sig, est)


def ambient_baseline(X, y, config: Union[FitConfig, ForestConfig] = FitConfig(), sig=None, n_jobs=1) -> SpaceModel:
    """Flat-mode model on every ambient column, special ones included."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    sig = as_signature(sig) if sig is not None else None
    return SpaceModel("ambient", sig, _fit_flat(X, y, config, n_jobs))


def tangent_baseline(sig, X, y, config: Union[FitConfig, ForestConfig] = FitConfig(), n_jobs=1) -> SpaceModel:
    """Flat-mode model on log-map coordinates at the product origin."""
    sig = as_signature(sig)
    return SpaceModel("tangent", sig, _fit_flat(tangent_features(sig, X), y, config, n_jobs))


def fit_space(space: str, sig, X, y, config, n_jobs=1) -> SpaceModel:
    if space == "product":
        return product_model(sig, X, y, config, n_jobs)
    if space == "ambient":
        return ambient_baseline(X, y, config, sig=sig, n_jobs=n_jobs)
    if space == "tangent":
        return tangent_baseline(sig, X, y, config, n_jobs)
    raise ValueError(f"unknown feature space {space!r}; expected one of {SPACES}")


@dataclass
class MajorityModel:
    """Constant predictor of the most frequent training label."""

    label: object

    @classmethod
    def fit(cls, y):
        vals, counts = np.unique(np.asarray(y), return_counts=True)
        return cls(vals[np.argmax(counts)])

    def predict(self, X) -> np.ndarray:
        return np.full(len(X), self.label)


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have the same length")
    if y_true.size == 0:
        raise ValueError("no predictions to score")
    return float(np.mean(y_true == y_pred))


def micro_f1(y_true, y_pred) -> float:
    """F1 from true/false positives and false negatives pooled over classes."""
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have the same length")
    tp = fp = fn = 0
    for c in np.union1d(y_true, y_pred):
        tp += int(np.sum((y_pred == c) & (y_true == c)))
        fp += int(np.sum((y_pred == c) & (y_true != c)))
        fn += int(np.sum((y_pred != c) & (y_true == c)))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def metrics(y_true, y_pred) -> dict:
    return {"accuracy": accuracy(y_true, y_pred), "micro_f1": micro_f1(y_true, y_pred)}


def ci_halfwidth(scores) -> Optional[float]:
    """Half-width of the two-sided 95% t interval for the mean."""
    scores = np.asarray(scores, dtype=float)
    n = scores.size
    if n < 2:
        return None
    return float(stats.t.ppf(0.975, n - 1) * scores.std(ddof=1) / math.sqrt(n))


def paired_pvalue(a, b) -> Optional[float]:
    """Two-sided paired t-test p-value; identical score vectors give 1."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.size < 2:
        return None
    diff = a - b
    if np.all(diff == diff[0]):
        # constant differences: t is 0 (p = 1) or infinite (p = 0)
        return 1.0 if diff[0] == 0 else 0.0
    return float(stats.ttest_rel(a, b).pvalue)


def train_test_split(n: int, rng: np.random.Generator, test_fraction: float = 0.2):
    perm = rng.permutation(n)
    n_test = int(round(n * test_fraction))
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def derive_seed(*key: int) -> int:
    """A 63-bit integer seed determined by ``key``."""
    state = np.random.SeedSequence(list(key)).generate_state(2, np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def run_trial(
    sig,
    X,
    y,
    split_seed: int,
    forest_seed: int,
    max_depth: int = 3,
    n_trees: int = 12,
    methods: Sequence[str] = METHODS,
) -> dict:
    """Fit every method on one 80:20 split and score the test rows."""
    sig = as_signature(sig)
    train, test = train_test_split(len(y), np.random.default_rng(split_seed))
    tcfg = FitConfig(max_depth=max_depth)
    fcfg = ForestConfig(n_trees=n_trees, seed=forest_seed, tree_config=tcfg)
    out = {}
    for method in methods:
        space, model = method.rsplit("_", 1)
        cfg = fcfg if model == "rf" else tcfg
        m = fit_space(space, sig, X[train], y[train], cfg)
        out[method] = metrics(y[test], m.predict(X[test]))
    return out


def summarize(scores: dict, methods: Sequence[str] = METHODS, alpha: float = 0.05) -> list[dict]:
    """Per-method mean, CI, paired p-values and significance markers.

    Markers follow the product/ambient/tangent scheme: a method is marked for
    each same-family competitor it beats with ``p < alpha``.
    """
    rows = []
    for method in methods:
        space, model = method.rsplit("_", 1)
        s = np.asarray(scores[method], dtype=float)
        pvals, marks = {}, ""
        for other_space in SPACES:
            other = f"{other_space}_{model}"
            if other == method or other not in scores:
                continue
            p = paired_pvalue(s, scores[other])
            pvals[other] = p
            if p is not None and p < alpha and s.mean() > np.mean(scores[other]):
                marks += MARKERS[other_space]
        rows.append(
            {
                "method": method,
                "scores": s.tolist(),
                "mean": float(s.mean()),
                "ci95": ci_halfwidth(s),
                "pvalues": pvals,
                "markers": marks,
            }
        )
    return rows


def _run_rows(jobs, n_jobs):
    if n_jobs == 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=n_jobs if n_jobs > 0 else None) as ex:
        return list(ex.map(lambda job: job(), jobs))


def _collect(sig, trials, row, seed, n_points, n_clusters, variance_scale, max_depth, n_trees, metric, n_jobs):
    def job(t):
        def run():
            draw = sample_mixture(
                MixtureConfig(sig, n_clusters, n_points, variance_scale, derive_seed(seed, row, t, 0))
            )
            return run_trial(
                sig, draw.X, draw.labels, derive_seed(seed, row, t, 1), derive_seed(seed, row, t, 2), max_depth, n_trees
            )

        return run

    results = _run_rows([job(t) for t in range(trials)], n_jobs)
    return {m: [r[m][metric] for r in results] for m in METHODS}


def curvature_signature(k: float, dim: int = 2) -> ProductSignature:
    """Single-component signature with curvature ``k``."""
    if k < 0:
        return parse_signature(f"H{dim}:{k!r}")
    if k > 0:
        return parse_signature(f"S{dim}:{k!r}")
    return parse_signature(f"E{dim}")


def table1_signatures(curvature: float = 1.0) -> list[ProductSignature]:
    """The six ten-dimensional signatures with every curved factor at ``|K| = curvature``."""
    c = abs(float(curvature))
    out = []
    for terms in TABLE1_TERMS:
        parts = []
        for t in terms.split(" x "):
            k = {"H": -c, "S": c, "E": None}[t[0]]
            parts.append(t if k is None else f"{t}:{k!r}")
        out.append(parse_signature(" x ".join(parts)))
    return out


def run_figure1(
    trials: int = 20,
    curvatures: Sequence[float] = FIGURE1_CURVATURES,
    seed: int = 0,
    dim: int = 2,
    n_points: int = 1000,
    n_clusters: int = 10,
    variance_scale: float = 1.0,
    max_depth: int = 3,
    n_trees: int = 12,
    n_jobs: int = 1,
) -> dict:
    """Single-component mixtures across a curvature grid, scored by micro-F1."""
    rows = []
    for i, k in enumerate(curvatures):
        sig = curvature_signature(float(k), dim)
        scores = _collect(
            sig, trials, i, seed, n_points, n_clusters, variance_scale, max_depth, n_trees, "micro_f1", n_jobs
        )
        for r in summarize(scores):
            rows.append({"curvature": float(k), "signature": str(sig), **r})
    return {
        "format": "mixcurv-benchmark",
        "version": 1,
        "benchmark": "figure1",
        "metric": "micro_f1",
        "params": {
            "trials": trials,
            "seed": seed,
            "dim": dim,
            "n_points": n_points,
            "n_clusters": n_clusters,
            "variance_scale": variance_scale,
            "max_depth": max_depth,
            "n_trees": n_trees,
        },
        "rows": rows,
    }


def run_table1(
    trials: int = 10,
    signatures: Optional[Sequence] = None,
    seed: int = 0,
    curvature: float = 1.0,
    n_points: int = 1000,
    n_clusters: int = 4,
    variance_scale: float = 1.0,
    max_depth: int = 3,
    n_trees: int = 12,
    total_dim: Optional[int] = 10,
    n_jobs: int = 1,
) -> dict:
    """Product-manifold mixtures over a list of signatures, scored by accuracy."""
    sigs = table1_signatures(curvature) if signatures is None else [as_signature(s) for s in signatures]
    if total_dim is not None:
        for s in sigs:
            if s.intrinsic_dim != total_dim:
                raise ValueError(f"signature '{s}' has {s.intrinsic_dim} dimensions, expected {total_dim}")
    rows = []
    for i, sig in enumerate(sigs):
        scores = _collect(
            sig, trials, i, seed, n_points, n_clusters, variance_scale, max_depth, n_trees, "accuracy", n_jobs
        )
        for r in summarize(scores):
            rows.append({"signature": str(sig), **r})
    return {
        "format": "mixcurv-benchmark",
        "version": 1,
        "benchmark": "table1",
        "metric": "accuracy",
        "params": {
            "trials": trials,
            "seed": seed,
            "curvature": curvature,
            "n_points": n_points,
            "n_clusters": n_clusters,
            "variance_scale": variance_scale,
            "max_depth": max_depth,
            "n_trees": n_trees,
        },
        "rows": rows,
    }


def format_table(result: dict) -> str:
    """Plain-text rendering: one line per row with mean +/- CI in percent."""
    lines = []
    key = "curvature" if result["benchmark"] == "figure1" else "signature"
    for r in result["rows"]:
        ci = "n/a" if r["ci95"] is None else f"{100 * r['ci95']:.1f}"
        lines.append(f"{str(r[key]):<30} {r['method']:<11} {100 * r['mean']:5.1f} +/- {ci}{r['markers']}")
    return "\n".join(lines)
