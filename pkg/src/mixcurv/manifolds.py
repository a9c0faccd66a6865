"""Constant-curvature component manifolds.

Points are stored in ambient coordinates of length ``dim + 1``:

* hyperboloid points satisfy ``<x, x>_L = -R**2`` with ``x[0] > 0``,
* sphere points satisfy ``<x, x> = R**2``,
* Euclidean points are lifted to ``(1, x)``.

``R = 1 / sqrt(|K|)`` for the curved kinds. All functions are vectorised over
leading axes; the last axis holds the ambient coordinates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# relative tolerance on the norm constraint
MEMBERSHIP_RTOL = 1e-6


class Kind(str, enum.Enum):
    FLAT = "E"
    SPHERICAL = "S"
    HYPERBOLIC = "H"


@dataclass(frozen=True)
class ManifoldSpec:
    """One constant-curvature factor of a product manifold.

    Parameters
    ----------
    kind : Kind
        Flat, spherical or hyperbolic.
    dim : int
        Intrinsic dimension ``D``. Points live in ``R^(D+1)``.
    curvature : float
        ``K``; positive for spheres, negative for hyperboloids, zero for flat.
    """

    kind: Kind
    dim: int
    curvature: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "curvature", float(self.curvature))
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        k = self.curvature
        if not math.isfinite(k):
            raise ValueError("curvature must be finite")
        if self.kind is Kind.FLAT and k != 0.0:
            raise ValueError("flat components have zero curvature")
        if self.kind is Kind.SPHERICAL and not k > 0.0:
            raise ValueError(f"spherical components need K > 0, got {k}")
        if self.kind is Kind.HYPERBOLIC and not k < 0.0:
            raise ValueError(f"hyperbolic components need K < 0, got {k}")

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1

    @property
    def curved(self) -> bool:
        return self.kind is not Kind.FLAT

    @property
    def radius(self) -> float:
        """``1/sqrt(|K|)``; 1 for flat components (used only as a length unit)."""
        if not self.curved:
            return 1.0
        return 1.0 / math.sqrt(abs(self.curvature))

    def unit(self) -> "ManifoldSpec":
        """Same kind and dimension with ``|K| = 1``."""
        if not self.curved:
            return self
        return ManifoldSpec(self.kind, self.dim, math.copysign(1.0, self.curvature))

    def __str__(self) -> str:
        if not self.curved:
            return f"E{self.dim}"
        k = self.curvature
        ks = str(int(k)) if k.is_integer() else repr(k)
        return f"{self.kind.value}{self.dim}:{ks}"


def _check_pair(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1:] != v.shape[-1:]:
        raise ValueError(f"length mismatch: {u.shape[-1:]} vs {v.shape[-1:]}")
    return u, v


def euclidean_inner(u, v):
    """Dot product over the last axis."""
    u, v = _check_pair(u, v)
    return np.sum(u * v, axis=-1)


def minkowski_inner(u, v):
    """``-u0*v0 + sum_{i>=1} ui*vi`` over the last axis."""
    u, v = _check_pair(u, v)
    if u.shape[-1] < 1:
        raise ValueError("Minkowski inner product needs at least one coordinate")
    return np.sum(u[..., 1:] * v[..., 1:], axis=-1) - u[..., 0] * v[..., 0]


def inner(spec: ManifoldSpec, u, v):
    """The ambient bilinear form matching ``spec``."""
    if spec.kind is Kind.HYPERBOLIC:
        return minkowski_inner(u, v)
    return euclidean_inner(u, v)


def membership_error(spec: ManifoldSpec, x):
    """Relative violation of the norm constraint, per point.

    For flat components this is ``|x0 - 1|``. The hyperboloid constraint is
    measured against ``R^2 + x0^2``, the magnitude of the cancelling terms,
    and points on the lower sheet get ``inf``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.ambient_dim:
        raise ValueError(f"expected {spec.ambient_dim} ambient coordinates, got {x.shape[-1]}")
    r2 = spec.radius**2
    if spec.kind is Kind.FLAT:
        return np.abs(x[..., 0] - 1.0)
    if spec.kind is Kind.SPHERICAL:
        return np.abs(euclidean_inner(x, x) - r2) / r2
    err = np.abs(minkowski_inner(x, x) + r2) / (r2 + x[..., 0] ** 2)
    return np.where(x[..., 0] > 0, err, np.inf)


def project(spec: ManifoldSpec, x):
    """Snap points back onto ``spec`` to remove accumulated rounding.

    Hyperboloid: recompute ``x0`` from the spatial part. Sphere: rescale to
    norm ``R``. Flat: reset the lifted coordinate to 1.
    """
    x = np.array(x, dtype=float)
    if spec.kind is Kind.FLAT:
        x[..., 0] = 1.0
    elif spec.kind is Kind.HYPERBOLIC:
        x[..., 0] = np.sqrt(spec.radius**2 + np.sum(x[..., 1:] ** 2, axis=-1))
    else:
        x = spec.radius * x / np.linalg.norm(x, axis=-1, keepdims=True)
    return x


def on_manifold(spec: ManifoldSpec, x, tol: float = MEMBERSHIP_RTOL):
    return membership_error(spec, x) <= tol


def check_membership(spec: ManifoldSpec, x, tol: float = MEMBERSHIP_RTOL):
    ok = on_manifold(spec, x, tol)
    if not np.all(ok):
        bad = int(np.size(ok) - np.count_nonzero(ok))
        raise ValueError(f"{bad} point(s) are not on {spec} (tol={tol:g})")


def distance(spec: ManifoldSpec, u, v, check: bool = True):
    """Geodesic distance between points of ``spec``.

    Flat distances ignore the lifted coordinate. On the sphere this is
    ``R * arccos(<u, v> / R^2)``, on the hyperboloid
    ``R * arccosh(-<u, v>_L / R^2)``; both are evaluated in chord form
    (``atan2`` / ``asinh``) where the inverse cosine would lose precision
    near coincident points, so ``distance(u, u)`` is exactly 0.
    """
    u, v = _check_pair(u, v)
    if check:
        check_membership(spec, u)
        check_membership(spec, v)
    if spec.kind is Kind.FLAT:
        return np.linalg.norm(u[..., 1:] - v[..., 1:], axis=-1)
    R = spec.radius
    if spec.kind is Kind.SPHERICAL:
        chord = np.linalg.norm(u - v, axis=-1)
        return 2.0 * R * np.arctan2(chord, np.linalg.norm(u + v, axis=-1))
    alpha = np.maximum(-minkowski_inner(u, v) / R**2, 1.0)
    diff = u - v
    chord2 = np.maximum(minkowski_inner(diff, diff), 0.0)
    near = 2.0 * R * np.arcsinh(np.sqrt(chord2) / (2.0 * R))
    return np.where(alpha < 2.0, near, R * np.arccosh(alpha))


def origin(spec: ManifoldSpec) -> np.ndarray:
    """``(R, 0, ..., 0)`` for curved kinds, the lifted zero ``(1, 0, ..., 0)`` for flat."""
    o = np.zeros(spec.ambient_dim)
    o[0] = spec.radius
    return o


def lift(u) -> np.ndarray:
    """Euclidean lift ``u -> (1, u)``."""
    u = np.asarray(u, dtype=float)
    return np.concatenate([np.ones(u.shape[:-1] + (1,)), u], axis=-1)


def tangent_lift(u) -> np.ndarray:
    """``u -> (0, u)``: coordinates in the tangent space at the origin."""
    u = np.asarray(u, dtype=float)
    return np.concatenate([np.zeros(u.shape[:-1] + (1,)), u], axis=-1)


def tangent_norm(spec: ManifoldSpec, v):
    """Norm of tangent vectors under the metric matching ``spec``."""
    v = np.asarray(v, dtype=float)
    if spec.kind is Kind.HYPERBOLIC:
        return np.sqrt(np.maximum(minkowski_inner(v, v), 0.0))
    return np.linalg.norm(v, axis=-1)


def _check_tangent(spec, base, v, tol=1e-6):
    if not spec.curved:
        return
    # Euclidean magnitudes bound the rounding error of the ambient inner product
    scale = np.linalg.norm(base, axis=-1) * np.maximum(np.linalg.norm(v, axis=-1), 1.0)
    err = np.abs(inner(spec, base, v)) / scale
    if np.any(err > tol):
        raise ValueError(f"vector is not tangent to {spec} at the base point")


def exp_map(spec: ManifoldSpec, base, v, check: bool = True):
    """Exponential map at ``base``.

    Curved kinds follow the geodesic ``cosh``/``cos`` formulas at radius R. The
    flat map is the identity on ``v`` (translation by the base point is done
    by :func:`parallel_transport`, so the transport-then-exp pipeline yields
    ``base + v``).
    """
    base, v = _check_pair(base, v)
    if spec.kind is Kind.FLAT:
        return np.broadcast_to(v, np.broadcast_shapes(base.shape, v.shape)).copy()
    if check:
        _check_tangent(spec, base, v)
    R = spec.radius
    n = tangent_norm(spec, v)[..., None]
    safe = np.where(n > 0, n, 1.0)
    if spec.kind is Kind.HYPERBOLIC:
        out = np.cosh(n / R) * base + R * np.sinh(n / R) * v / safe
    else:
        out = np.cos(n / R) * base + R * np.sin(n / R) * v / safe
    return np.where(n > 0, out, base)


def log_map(spec: ManifoldSpec, base, target):
    """Inverse of :func:`exp_map`.

    The tangent norm of the result equals the geodesic distance. Flat
    components return ``target`` unchanged, matching the identity exp.

    Raises
    ------
    ValueError
        For antipodal pairs on the sphere, where the log is undefined.
    """
    base, target = _check_pair(base, target)
    if spec.kind is Kind.FLAT:
        return np.broadcast_to(target, np.broadcast_shapes(base.shape, target.shape)).copy()
    R2 = spec.radius**2
    if spec.kind is Kind.HYPERBOLIC:
        alpha = np.maximum(-minkowski_inner(base, target) / R2, 1.0)
        d = spec.radius * np.arccosh(alpha)
    else:
        alpha = np.clip(euclidean_inner(base, target) / R2, -1.0, 1.0)
        if np.any(alpha <= -1.0 + 1e-12):
            raise ValueError("log map is undefined for antipodal points")
        d = spec.radius * np.arccos(alpha)
    u = target - alpha[..., None] * base
    un = tangent_norm(spec, u)[..., None]
    safe = np.where(un > 0, un, 1.0)
    return np.where(un > 0, d[..., None] * u / safe, 0.0)


def parallel_transport(spec: ManifoldSpec, src, dst, v):
    """Transport tangent vectors at ``src`` along the geodesic to ``dst``.

    Hyperbolic: ``v + <dst, v>_L / (R^2 + alpha) * (src + dst)`` with
    ``alpha = -<src, dst>_L``. Spherical: rotate the component of ``v`` along
    the geodesic direction by the arc angle. Flat: ``v + dst - src``.
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    v = np.asarray(v, dtype=float)
    if spec.kind is Kind.FLAT:
        return v + dst - src
    R = spec.radius
    if spec.kind is Kind.HYPERBOLIC:
        alpha = -minkowski_inner(src, dst)
        coef = minkowski_inner(dst, v) / (R**2 + alpha)
        return v + coef[..., None] * (src + dst)

    c = np.clip(euclidean_inner(src, dst) / R**2, -1.0, 1.0)
    d = np.arccos(c)
    s = np.sin(d)
    if np.any((s < 1e-12) & (c < 0)):
        raise ValueError("parallel transport between antipodal points is undefined")
    moving = s >= 1e-12
    safe_s = np.where(moving, s, 1.0)[..., None]
    # unit direction of the geodesic at src
    e = (dst - c[..., None] * src) / (R * safe_s)
    ev = euclidean_inner(e, v)[..., None]
    out = v + ev * ((np.cos(d)[..., None] - 1.0) * e - s[..., None] * src / R)
    return np.where(moving[..., None], out, v)
