"""Wrapped Gaussian mixtures on product manifolds.

Each curved component is sampled on the unit-curvature manifold of the same
kind and rescaled onto radius ``R = 1/sqrt(|K|)`` at the end; tangent-space
scales are multiplied by ``s = sqrt(|K|)`` (``s = 1`` for flat components).

Random stream order for one draw: cluster weights, assignments, then for each
component in signature order its means, covariances and points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import manifolds as mf
from .manifolds import ManifoldSpec
from .product import ProductSignature, as_signature


@dataclass(frozen=True)
class MixtureConfig:
    signature: ProductSignature
    n_clusters: int = 4
    n_samples: int = 1000
    variance_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "signature", as_signature(self.signature))
        if self.n_clusters < 1 or self.n_samples < 1:
            raise ValueError("need at least one cluster and one sample")
        if not self.variance_scale > 0:
            raise ValueError("variance_scale must be positive")


@dataclass
class MixtureDraw:
    X: np.ndarray
    labels: np.ndarray
    means: list[np.ndarray]
    weights: np.ndarray
    signature: ProductSignature


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator seeded through ``SeedSequence``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def sample_assignments(n: int, m: int, rng: np.random.Generator):
    """Draw ``n`` uniform weights, normalise them, then ``m`` categorical labels.

    Returns
    -------
    labels : int array of shape (m,)
    weights : float array of shape (n,), summing to 1
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    raw = rng.uniform(0.0, 1.0, size=n)
    weights = raw / raw.sum()
    labels = rng.choice(n, size=m, p=weights)
    return labels, weights


def wishart(scale: np.ndarray, df: int, rng: np.random.Generator) -> np.ndarray:
    """One Wishart(scale, df) draw by the Bartlett decomposition.

    ``W = L A A^T L^T`` with ``scale = L L^T``, ``A`` lower triangular,
    ``A_ii ~ sqrt(chi2(df - i))`` and standard normal entries below the
    diagonal.
    """
    p = scale.shape[0]
    if df < p:
        raise ValueError("Bartlett sampling needs df >= dimension")
    L = np.linalg.cholesky(scale)
    A = np.zeros((p, p))
    A[np.diag_indices(p)] = np.sqrt(rng.chisquare(df - np.arange(p)))
    rows, cols = np.tril_indices(p, -1)
    A[rows, cols] = rng.standard_normal(rows.size)
    LA = L @ A
    return LA @ LA.T


def curvature_scale(spec: ManifoldSpec) -> float:
    return math.sqrt(abs(spec.curvature)) if spec.curved else 1.0


def sample_component(
    spec: ManifoldSpec,
    labels: np.ndarray,
    n_clusters: int,
    variance_scale: float,
    rng: np.random.Generator,
):
    """Sample one component's points for the given cluster labels.

    Returns
    -------
    X : array of shape (len(labels), spec.ambient_dim)
        Points on ``spec`` at its true radius.
    means : array of shape (n_clusters, spec.ambient_dim)
        Cluster means on ``spec``.
    """
    D = spec.dim
    s = curvature_scale(spec)
    unit = spec.unit()
    # the flat "origin" of the tangent construction is the zero vector
    o = mf.origin(unit) if unit.curved else np.zeros(D + 1)

    mean_tan = mf.tangent_lift(rng.normal(0.0, math.sqrt(s), size=(n_clusters, D)))
    means = mf.exp_map(unit, o, mean_tan)

    covs = [wishart(variance_scale * s * np.eye(D), D, rng) for _ in range(n_clusters)]
    chols = np.stack([np.linalg.cholesky(c) for c in covs])
    z = rng.standard_normal((labels.size, D))
    x = np.einsum("mij,mj->mi", chols[labels], z)

    v = mf.parallel_transport(unit, o, means[labels], mf.tangent_lift(x))
    X = mf.exp_map(unit, means[labels], v, check=False)
    if spec.curved:
        X, means = X / s, means / s
    return mf.project(spec, X), mf.project(spec, means)


def sample_mixture(config: MixtureConfig) -> MixtureDraw:
    """Gaussian mixture on a product manifold, concatenated column-wise.

    All components share one label vector so each row has one cluster id.
    """
    sig = config.signature
    rng = make_rng(config.seed)
    labels, weights = sample_assignments(config.n_clusters, config.n_samples, rng)
    blocks, means = [], []
    for spec in sig.components:
        X, M = sample_component(spec, labels, config.n_clusters, config.variance_scale, rng)
        blocks.append(X)
        means.append(M)
    return MixtureDraw(np.concatenate(blocks, axis=1), labels, means, weights, sig)
