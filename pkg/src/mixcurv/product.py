"""Product manifolds: signatures, column bookkeeping, distances, tangent features."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import manifolds as mf
from .manifolds import Kind, ManifoldSpec

_TERM = re.compile(r"^([ESH])(\d+)(?::([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?))?$")
_DEFAULT_K = {Kind.FLAT: 0.0, Kind.SPHERICAL: 1.0, Kind.HYPERBOLIC: -1.0}


@dataclass(frozen=True)
class ProductSignature:
    """An ordered tuple of component manifolds.

    Component ``i`` owns the contiguous ambient columns ``slices[i]``; the
    first of them is its special dimension.
    """

    components: tuple[ManifoldSpec, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a signature needs at least one component")
        object.__setattr__(self, "components", comps)

    @cached_property
    def slices(self) -> tuple[slice, ...]:
        out, start = [], 0
        for c in self.components:
            out.append(slice(start, start + c.ambient_dim))
            start += c.ambient_dim
        return tuple(out)

    @property
    def width(self) -> int:
        return sum(c.ambient_dim for c in self.components)

    @property
    def intrinsic_dim(self) -> int:
        return sum(c.dim for c in self.components)

    @cached_property
    def special_dims(self) -> np.ndarray:
        return np.array([s.start for s in self.slices], dtype=int)

    @cached_property
    def component_index(self) -> np.ndarray:
        """Component owning each global ambient column."""
        return np.repeat(np.arange(len(self.components)), [c.ambient_dim for c in self.components])

    @cached_property
    def non_special_dims(self) -> np.ndarray:
        mask = np.ones(self.width, dtype=bool)
        mask[self.special_dims] = False
        return np.flatnonzero(mask)

    def special_for(self, global_dim: int) -> int:
        """Special dimension paired with ``global_dim``."""
        if not 0 <= global_dim < self.width:
            raise IndexError(f"dimension {global_dim} out of range for width {self.width}")
        return int(self.special_dims[self.component_index[global_dim]])

    def is_special(self, global_dim: int) -> bool:
        return self.special_for(global_dim) == global_dim

    def component_for(self, global_dim: int) -> ManifoldSpec:
        return self.components[int(self.component_index[global_dim])]

    def split(self, X) -> list[np.ndarray]:
        """Per-component column blocks of ``X``."""
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.width:
            raise ValueError(f"expected {self.width} columns for '{self}', got {X.shape[-1]}")
        return [X[..., s] for s in self.slices]

    def __str__(self) -> str:
        return " x ".join(str(c) for c in self.components)


def parse_signature(text: str) -> ProductSignature:
    """Parse e.g. ``"H5:-1 x S5:1"`` or ``"H2 x E2"``.

    Each term is ``E|S|H`` followed by the dimension and an optional
    ``:curvature``; omitted curvatures default to +1 (S), -1 (H) and 0 (E).
    """
    if not isinstance(text, str) or not text.strip():
        raise ValueError("empty signature")
    comps = []
    for raw in re.split(r"\s+x\s+", text.strip()):
        m = _TERM.match(raw.strip())
        if m is None:
            raise ValueError(f"malformed signature term {raw!r}")
        kind = Kind(m.group(1))
        dim = int(m.group(2))
        k = float(m.group(3)) if m.group(3) is not None else _DEFAULT_K[kind]
        comps.append(ManifoldSpec(kind, dim, k))
    return ProductSignature(tuple(comps))


def as_signature(sig) -> ProductSignature:
    if isinstance(sig, ProductSignature):
        return sig
    if isinstance(sig, ManifoldSpec):
        return ProductSignature((sig,))
    return parse_signature(sig)


def check_membership(sig: ProductSignature, X, tol: float = mf.MEMBERSHIP_RTOL):
    for spec, block in zip(sig.components, sig.split(X)):
        mf.check_membership(spec, block, tol)


def product_distance(sig: ProductSignature, u, v, check: bool = True):
    """l2 combination of the per-component geodesic distances."""
    sig = as_signature(sig)
    sq = 0.0
    for spec, a, b in zip(sig.components, sig.split(u), sig.split(v)):
        sq = sq + mf.distance(spec, a, b, check=check) ** 2
    return np.sqrt(sq)


def product_origin(sig: ProductSignature) -> np.ndarray:
    sig = as_signature(sig)
    return np.concatenate([mf.origin(c) for c in sig.components])


def tangent_features(sig: ProductSignature, X) -> np.ndarray:
    """Log-map coordinates at the product origin, ``sum(dim_i)`` columns wide.

    Curved components drop the tangent vector's coordinate 0, which is
    identically zero at the origin; flat components keep their non-lifted
    coordinates.
    """
    sig = as_signature(sig)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    parts = []
    for spec, block in zip(sig.components, sig.split(X)):
        if spec.curved:
            parts.append(mf.log_map(spec, mf.origin(spec), block)[:, 1:])
        else:
            parts.append(block[:, 1:])
    return np.concatenate(parts, axis=1)


def from_tangent_features(sig: ProductSignature, F) -> np.ndarray:
    """Inverse of :func:`tangent_features`."""
    sig = as_signature(sig)
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if F.shape[1] != sig.intrinsic_dim:
        raise ValueError(f"expected {sig.intrinsic_dim} feature columns, got {F.shape[1]}")
    parts, start = [], 0
    for spec in sig.components:
        f = F[:, start : start + spec.dim]
        start += spec.dim
        if spec.curved:
            parts.append(mf.exp_map(spec, mf.origin(spec), mf.tangent_lift(f)))
        else:
            parts.append(mf.lift(f))
    return np.concatenate(parts, axis=1)
