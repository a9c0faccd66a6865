"""Angular decision boundaries.

A split is a homogeneous hyperplane whose normal is nonzero only in a
component's special dimension ``s`` and one other dimension ``d`` of the same
component. Points are characterised by ``atan2(x_s, x_d)`` in ``[0, 2*pi)``
and a split at angle ``theta`` sends ``x`` to the positive side iff
``sin(theta)*x_d - cos(theta)*x_s > 0``. Points exactly on the boundary go
to the negative side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .manifolds import Kind, ManifoldSpec
from .product import ProductSignature

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SplitCandidate:
    global_dim: int
    angle: float

    def __post_init__(self):
        if not 0.0 <= self.angle < TWO_PI:
            raise ValueError(f"split angle must lie in [0, 2pi), got {self.angle}")


def _wrap(theta):
    theta = np.mod(theta, TWO_PI)
    # np.mod can round tiny negatives up to exactly 2*pi
    return np.where(theta >= TWO_PI, 0.0, theta)


def point_angles(x_special, x_d):
    """``atan2(x_special, x_d)`` mapped into ``[0, 2*pi)``."""
    return _wrap(np.arctan2(x_special, x_d))


def angle(x, global_dim: int, special_dim: int):
    """Angle of point(s) ``x`` in the (special, d) plane."""
    x = np.asarray(x, dtype=float)
    return point_angles(x[..., special_dim], x[..., global_dim])


def split_sign_values(x_special, x_d, theta):
    """+1 / -1 labels of the split at ``theta``; zeros go to -1."""
    val = np.sin(theta) * np.asarray(x_d) - np.cos(theta) * np.asarray(x_special)
    return np.where(val > 0, 1, -1)


def split_sign(x, c: SplitCandidate, special_dim: int):
    x = np.asarray(x, dtype=float)
    return split_sign_values(x[..., special_dim], x[..., c.global_dim], c.angle)


def midpoint_flat(u_d, v_d):
    """Boundary angle halfway between two lifted Euclidean points.

    Equal to ``arctan(2 / (u_d + v_d))`` taken in ``(0, pi)``, which is
    ``pi/2`` for a symmetric pair.
    """
    return np.arctan2(2.0, np.asarray(u_d, dtype=float) + np.asarray(v_d, dtype=float))


def midpoint_hyperbolic(theta_u, theta_v, eps: float = 1e-12):
    """Boundary angle geodesically equidistant to two hyperboloid points.

    With ``V = cos(theta_u - theta_v) / sin(theta_u + theta_v)`` the boundary
    angle is ``arccot(V - sqrt(V^2 - 1))`` when ``theta_u + theta_v < pi`` and
    ``arccot(V + sqrt(V^2 - 1))`` otherwise. The smaller-magnitude root is
    formed as ``1 / (V + sqrt(V^2 - 1))`` to avoid cancellation.
    """
    tu = np.asarray(theta_u, dtype=float)
    tv = np.asarray(theta_v, dtype=float)
    if np.any(tu == tv):
        raise ValueError("hyperbolic midpoint needs two distinct angles")
    total = tu + tv
    sin_total = np.sin(total)
    degenerate = np.abs(sin_total) < eps
    V = np.cos(tu - tv) / np.where(degenerate, 1.0, sin_total)
    root = np.sqrt(np.maximum(V * V - 1.0, 0.0))
    with np.errstate(divide="ignore"):
        lower = np.where(V > 0, 1.0 / (V + root), V - root)
        upper = np.where(V < 0, 1.0 / (V - root), V + root)
    cot_m = np.where(total < np.pi, lower, upper)
    return np.where(degenerate, np.pi / 2, np.arctan2(1.0, cot_m))


def midpoint_spherical(theta_u, theta_v):
    """Arithmetic mean of the two angles, reduced mod 2*pi."""
    return _wrap((np.asarray(theta_u, dtype=float) + np.asarray(theta_v, dtype=float)) / 2.0)


def threshold_to_angle(t):
    """``arccot(t)`` in ``(0, pi)``: the angle reproducing the threshold ``x_d > t``."""
    return np.arctan2(1.0, np.asarray(t, dtype=float))


def candidates_from_sorted(kind: Kind, uniq, ratio=None) -> np.ndarray:
    """Candidate angles from distinct point angles sorted ascending.

    ``ratio`` holds ``x_d / x_special`` for the point behind each angle and is
    only needed for flat components.
    """
    uniq = np.asarray(uniq, dtype=float)
    if uniq.size < 2:
        return np.empty(0)
    if kind is Kind.FLAT:
        cands = midpoint_flat(ratio[:-1], ratio[1:])
    elif kind is Kind.HYPERBOLIC:
        cands = midpoint_hyperbolic(uniq[:-1], uniq[1:])
    else:
        cands = midpoint_spherical(uniq[:-1], uniq[1:])
        wrap = midpoint_spherical(uniq[-1], uniq[0] + TWO_PI)
        cands = np.append(cands, wrap)
    return np.unique(cands)


def candidate_angles(spec: ManifoldSpec, x_special, x_d) -> np.ndarray:
    """Sorted, distinct candidate boundary angles for one (special, d) pair.

    Consecutive distinct point angles are bisected with the midpoint rule of
    the component's geometry. On the sphere the gap between the largest and
    smallest angle (through 0) adds one more candidate.
    """
    x_special = np.asarray(x_special, dtype=float)
    x_d = np.asarray(x_d, dtype=float)
    uniq, first = np.unique(point_angles(x_special, x_d), return_index=True)
    ratio = x_d[first] / x_special[first] if spec.kind is Kind.FLAT else None
    return candidates_from_sorted(spec.kind, uniq, ratio)


def get_candidates(sig: ProductSignature, X, global_dim: int) -> list[SplitCandidate]:
    """All candidate splits in ``global_dim``; empty for special dimensions."""
    if sig.is_special(global_dim):
        return []
    X = np.atleast_2d(np.asarray(X, dtype=float))
    s = sig.special_for(global_dim)
    spec = sig.component_for(global_dim)
    return [SplitCandidate(global_dim, float(a)) for a in candidate_angles(spec, X[:, s], X[:, global_dim])]
