import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_points
from mixcurv import manifolds as mf
from mixcurv.product import (
    ProductSignature,
    check_membership,
    from_tangent_features,
    parse_signature,
    product_distance,
    product_origin,
    tangent_features,
)


def random_product(sig, n, rng):
    return np.concatenate([random_points(c, n, rng) for c in sig.components], axis=1)


class TestParse:
    def test_examples(self):
        sig = parse_signature("H5:-1 x S5:1")
        assert len(sig.components) == 2 and sig.width == 12
        sig = parse_signature("E2")
        assert sig.components[0].kind is mf.Kind.FLAT and sig.width == 3

    def test_defaults(self):
        sig = parse_signature("H2 x S3 x E1")
        assert [c.curvature for c in sig.components] == [-1.0, 1.0, 0.0]

    def test_decimal_curvature(self):
        assert parse_signature("S2:0.25").components[0].radius == 2.0
        assert parse_signature("H2:-2.5e-1").components[0].curvature == -0.25

    @pytest.mark.parametrize("text", ["S2:-1", "H2:1", "E2:1", "H0", "Q2", "H2 x", "H2xS2", "", "h2", "H-1"])
    def test_errors(self, text):
        with pytest.raises(ValueError):
            parse_signature(text)

    @given(
        st.lists(
            st.tuples(st.sampled_from("ESH"), st.integers(1, 6), st.floats(0.1, 10.0)),
            min_size=1,
            max_size=5,
        )
    )
    def test_str_round_trip(self, terms):
        parts = []
        for kind, dim, k in terms:
            parts.append(f"E{dim}" if kind == "E" else f"{kind}{dim}:{k if kind == 'S' else -k!r}")
        sig = parse_signature(" x ".join(parts))
        assert parse_signature(str(sig)) == sig


class TestColumns:
    def test_layout(self):
        sig = parse_signature("H2 x E1 x S3")
        assert sig.width == 3 + 2 + 4
        assert sig.intrinsic_dim == 6
        assert sig.special_dims.tolist() == [0, 3, 5]
        assert sig.non_special_dims.tolist() == [1, 2, 4, 6, 7, 8]
        covered = np.concatenate([np.arange(sl.start, sl.stop) for sl in sig.slices])
        assert covered.tolist() == list(range(sig.width))

    def test_special_for(self):
        sig = parse_signature("H2 x S3")
        assert [sig.special_for(d) for d in range(sig.width)] == [0, 0, 0, 3, 3, 3, 3]
        assert sig.is_special(3) and not sig.is_special(4)
        with pytest.raises(IndexError):
            sig.special_for(7)

    def test_empty_signature(self):
        with pytest.raises(ValueError):
            ProductSignature(())


class TestDistance:
    def test_l2_composition(self):
        sig = parse_signature("E1 x E1")
        u = np.array([1.0, 0.0, 1.0, 0.0])
        v = np.array([1.0, 3.0, 1.0, 4.0])
        assert product_distance(sig, u, v) == pytest.approx(5.0)
        assert product_distance(sig, u, u) == 0.0

    def test_single_component_matches_core(self, rng):
        sig = parse_signature("H3:-2")
        u, v = random_product(sig, 50, rng), random_product(sig, 50, rng)
        np.testing.assert_array_equal(product_distance(sig, u, v), mf.distance(sig.components[0], u, v))

    def test_membership_violation(self):
        sig = parse_signature("S1 x E1")
        with pytest.raises(ValueError):
            product_distance(sig, np.array([2.0, 0.0, 1.0, 0.0]), np.array([1.0, 0.0, 1.0, 0.0]))

    def test_metric_axioms(self, rng):
        sig = parse_signature("H2 x S2:4 x E3")
        u, v, w = (random_product(sig, 10**4, rng) for _ in range(3))
        duv = product_distance(sig, u, v)
        assert np.array_equal(duv, product_distance(sig, v, u))
        assert np.max(product_distance(sig, u, u)) <= 1e-9
        assert np.all(product_distance(sig, u, w) <= duv + product_distance(sig, v, w) + 1e-9)

    def test_permutation_invariance(self, rng):
        sig = parse_signature("H2 x S3 x E1")
        u, v = random_product(sig, 200, rng), random_product(sig, 200, rng)
        perm = [2, 0, 1]
        psig = ProductSignature(tuple(sig.components[i] for i in perm))
        pu = np.concatenate([sig.split(u)[i] for i in perm], axis=1)
        pv = np.concatenate([sig.split(v)[i] for i in perm], axis=1)
        np.testing.assert_allclose(product_distance(psig, pu, pv), product_distance(sig, u, v), rtol=1e-14)


class TestOrigin:
    def test_examples(self):
        np.testing.assert_array_equal(product_origin(parse_signature("H2:-1")), [1, 0, 0])
        np.testing.assert_array_equal(product_origin(parse_signature("E2")), [1, 0, 0])
        np.testing.assert_array_equal(product_origin(parse_signature("H2:-1 x E2")), [1, 0, 0, 1, 0, 0])

    def test_on_manifold(self):
        sig = parse_signature("H3:-4 x S2:0.25 x E2")
        check_membership(sig, product_origin(sig)[None, :])


class TestTangentFeatures:
    def test_origin_rows(self):
        sig = parse_signature("H2 x S3 x E2")
        X = np.tile(product_origin(sig), (4, 1))
        np.testing.assert_array_equal(tangent_features(sig, X), np.zeros((4, sig.intrinsic_dim)))

    def test_hyperbolic_example(self):
        F = tangent_features(parse_signature("H2"), np.array([[math.cosh(1), math.sinh(1), 0.0]]))
        np.testing.assert_allclose(F, [[1.0, 0.0]], atol=1e-15)

    def test_flat_is_coordinates(self, rng):
        sig = parse_signature("E4")
        X = random_product(sig, 20, rng)
        np.testing.assert_array_equal(tangent_features(sig, X), X[:, 1:])

    @pytest.mark.parametrize("text", ["H5 x S5", "H2 x H2 x E2 x S2:4 x S2", "S3:0.25"])
    def test_round_trip_and_width(self, text, rng):
        sig = parse_signature(text)
        X = random_product(sig, 500, rng)
        if any(c.kind is mf.Kind.SPHERICAL for c in sig.components):
            # keep rows away from the sphere's cut locus at the origin
            keep = np.ones(len(X), dtype=bool)
            for c, block in zip(sig.components, sig.split(X)):
                if c.kind is mf.Kind.SPHERICAL:
                    keep &= mf.distance(c, block, mf.origin(c)[None, :]) < math.pi * c.radius - 1e-3
            X = X[keep]
        F = tangent_features(sig, X)
        assert F.shape == (len(X), sig.intrinsic_dim)
        assert np.max(np.abs(from_tangent_features(sig, F) - X)) <= 1e-8

    def test_antipodal_rows_rejected(self):
        with pytest.raises(ValueError):
            tangent_features(parse_signature("S2"), np.array([[-1.0, 0.0, 0.0]]))
