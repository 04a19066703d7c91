import numpy as np
import pytest

from deltaforge.catalog import build_catalog
from deltaforge.errors import DomainError, EvalError
from deltaforge.immersion import ImmersionSpec, parse_spec
from deltaforge.jets import jet2_finite_difference, jet2_hyperdual
from deltaforge.spaceform import euclidean

CATALOG = [("EUCLID_T1", 4, {"a": 0.6}), ("SPHERE_T2", 4, {"a": 0.6}),
           ("HYP_A", 4, {"a": 0.0, "b": 1.0}), ("HYP_B", 5, {"a": 0.0, "b": 1.0}),
           ("HYP_C", 4, {"a": 0.0, "b": 2 ** 0.5})]


def test_euclid_point():
    spec = build_catalog("EUCLID_T1", 3, {"a": 0.6})
    jet = jet2_hyperdual(spec, [1.0, 0.0, 0.0])
    np.testing.assert_allclose(jet.point, [0.8, 0, 0, 0.6], atol=1e-15)


def test_identity_embedding_jet():
    spec = ImmersionSpec(euclidean(3), 3, ("x1", "x2", "x3"), {}, ((-1, 1),) * 3)
    jet = jet2_hyperdual(spec, [0.2, 0.3, 0.4])
    np.testing.assert_array_equal(jet.first, np.eye(3))
    np.testing.assert_array_equal(jet.second, np.zeros((3, 3, 3)))


def test_sphere_points_are_unit():
    spec = build_catalog("SPHERE_T2", 3, {"a": 0.6})
    rng = np.random.default_rng(2)
    for _ in range(50):
        x = np.array([rng.uniform(*b) for b in spec.domain])
        p = jet2_hyperdual(spec, x).point
        assert abs(p @ p - 1.0) <= 1e-14


@pytest.mark.parametrize("family, n, params", CATALOG)
def test_hyperdual_second_derivatives_exactly_symmetric(family, n, params):
    spec = build_catalog(family, n, params)
    jet = jet2_hyperdual(spec, spec.center() + 0.1)
    assert np.array_equal(jet.second, np.transpose(jet.second, (0, 2, 1)))


@pytest.mark.parametrize("family, n, params", CATALOG)
def test_hyperdual_matches_finite_differences(family, n, params):
    spec = build_catalog(family, n, params)
    rng = np.random.default_rng(3)
    lo = np.array([b[0] for b in spec.domain])
    hi = np.array([b[1] for b in spec.domain])
    for _ in range(10):
        x = lo + (0.05 + 0.9 * rng.random(n)) * (hi - lo)
        hd = jet2_hyperdual(spec, x)
        fd = jet2_finite_difference(spec, x)
        scale = max(1.0, np.max(np.abs(hd.second)) / 10.0)
        assert np.max(np.abs(hd.first - fd.first)) <= 1e-5 * scale
        assert np.max(np.abs(hd.second - fd.second)) <= 1e-5 * scale


def test_fd_example_value():
    spec = build_catalog("EUCLID_T1", 3, {"a": 0.6})
    x = [2.0, 0.5, 0.5]
    hd, fd = jet2_hyperdual(spec, x), jet2_finite_difference(spec, x)
    assert np.max(np.abs(hd.first - fd.first)) <= 1e-6
    assert np.max(np.abs(hd.second - fd.second)) <= 1e-6


def test_fd_symmetry_hyp_a_origin():
    spec = build_catalog("HYP_A", 4, {"a": 0.0, "b": 1.0})
    fd = jet2_finite_difference(spec, np.zeros(4))
    assert np.max(np.abs(fd.second - np.transpose(fd.second, (0, 2, 1)))) <= 1e-8


def test_constant_map():
    spec = ImmersionSpec(euclidean(3), 3, ("1", "2", "pi"), {}, ((-1, 1),) * 3)
    for jet in (jet2_hyperdual(spec, np.zeros(3)), jet2_finite_difference(spec, np.zeros(3))):
        assert not np.any(jet.first) and not np.any(jet.second)


def test_domain_errors():
    spec = build_catalog("EUCLID_T1", 3, {"a": 0.6})
    with pytest.raises(DomainError):
        jet2_hyperdual(spec, [0.1, 0.0, 0.0])
    with pytest.raises(DomainError):
        jet2_finite_difference(spec, [0.5, 0.0, 0.0])          # on the boundary
    with pytest.raises(DomainError):
        jet2_finite_difference(spec, [0.6, 0.0, 0.0], h=0.2)   # stencil leaves the box


def test_boundary_neighbourhood_shrinks_stencil():
    spec = build_catalog("EUCLID_T1", 3, {"a": 0.6})
    x = [0.5 + 1e-4, 0.0, 0.0]
    hd, fd = jet2_hyperdual(spec, x), jet2_finite_difference(spec, x)
    assert np.max(np.abs(hd.first - fd.first)) <= 1e-3
    assert np.max(np.abs(hd.second - fd.second)) <= 1e-3


def test_eval_error_from_user_expression():
    spec = parse_spec("""[spaceform] kind=euclidean m=3
[domain] n=3 x1=-1:1 x2=-1:1 x3=-1:1
[map] u1="log(x1)" u2="x2" u3="x3" """)
    with pytest.raises(EvalError):
        jet2_hyperdual(spec, [-0.5, 0.0, 0.0])
