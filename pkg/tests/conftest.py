import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mixcurv import manifolds as mf  # noqa: E402
from mixcurv.manifolds import Kind, ManifoldSpec  # noqa: E402

KINDS = ("E", "S", "H")
DEFAULT_K = {"E": 0.0, "S": 1.0, "H": -1.0}


def spec_for(kind, dim=2, scale=1.0):
    """``kind`` component with ``|K| = scale`` (ignored for flat)."""
    return ManifoldSpec(kind, dim, DEFAULT_K[kind] * scale)


def random_points(spec, n, rng, spread=1.0):
    """``n`` points on ``spec``; ``spread`` bounds the typical geodesic scale."""
    D = spec.dim
    if spec.kind is Kind.FLAT:
        return mf.lift(rng.normal(scale=spread, size=(n, D)))
    if spec.kind is Kind.SPHERICAL:
        z = rng.normal(size=(n, D + 1))
        return spec.radius * z / np.linalg.norm(z, axis=1, keepdims=True)
    R = spec.radius
    v = mf.tangent_lift(rng.normal(scale=spread * R / np.sqrt(D), size=(n, D)))
    return mf.project(spec, mf.exp_map(spec, mf.origin(spec), v))


def random_tangent(spec, base, rng, max_norm=1.0):
    """Tangent vectors at ``base`` with norms uniform in ``[0, max_norm]``."""
    base = np.atleast_2d(base)
    z = rng.normal(size=base.shape)
    if spec.curved:
        coef = mf.inner(spec, z, base) / mf.inner(spec, base, base)
        z = z - coef[:, None] * base
    else:
        z[:, 0] = 0.0
    norm = mf.tangent_norm(spec, z)[:, None]
    return z / norm * rng.uniform(0.0, max_norm, size=(base.shape[0], 1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the test session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
