import numpy as np
import pytest
from sklearn.base import clone

from nogo.convex_linear import (
    NotConvexLinear,
    NotConvexLinearError,
    PointSample,
    TranslatedLinearExtension,
    TranslatedLinearMap,
    affine_hull_basis,
    extend_translated_linear,
    is_convex_linear,
)
from nogo.bell_model import second_moment_matrix


def test_affine_hull_examples():
    u0, L = affine_hull_basis([[0, 1], [1, 0]])
    assert L.shape == (1, 2) and abs(abs(L[0] @ np.array([1, -1])) / np.sqrt(2) - 1) < 1e-12
    _, L = affine_hull_basis([[0, 1], [1, 0], [1, 1]])
    assert L.shape == (2, 2)
    u0, L = affine_hull_basis([[2.0, 3.0]])
    assert np.array_equal(u0, [2, 3]) and L.shape == (0, 2)


def test_worked_example_exact():
    g = extend_translated_linear(PointSample([[0, 1], [1, 0], [1, 1]], [1, 2, 4]))
    assert isinstance(g, TranslatedLinearMap)
    assert np.array_equal(g.h, [[3, 2]]) and np.array_equal(g.offset, [-1])
    assert g([0.5, 0.5])[0] == 1.5


def test_constant_one():
    g = extend_translated_linear(PointSample([[0, 1], [1, 0], [1, 1]], [1, 1, 1]))
    assert np.array_equal(g.w0, [1]) and np.allclose(g.h, 0)
    assert g([0, 0])[0] == 1


def test_zero_in_sample_gives_linear(rng):
    for _ in range(20):
        P = np.vstack([np.zeros(3), rng.normal(size=(4, 3))])
        H = rng.normal(size=(2, 3))
        g = extend_translated_linear(PointSample(P, P @ H.T))
        assert np.allclose(g.offset, 0, atol=1e-10)


def _random_affine_sample(rng):
    d, e = int(rng.integers(1, 6)), int(rng.integers(1, 4))
    k = int(rng.integers(1, d + 2))
    base = rng.normal(size=d)
    span = rng.normal(size=(k - 1, d))
    coeff = rng.normal(size=(int(rng.integers(k, k + 5)), k - 1))
    P = base + coeff @ span
    M, c = rng.normal(size=(e, d)), rng.normal(size=e)
    return P, M, c, base, span


def test_extension_reproduces_affine_maps(rng):
    for _ in range(200):
        P, M, c, base, span = _random_affine_sample(rng)
        g = extend_translated_linear(PointSample(P, P @ M.T + c))
        for _ in range(10):
            v = base + rng.normal(size=len(span)) @ span
            assert np.linalg.norm(g(v) - (M @ v + c)) <= 1e-8 * max(1, np.linalg.norm(M @ v + c))


def test_rebase_invariance(rng):
    for _ in range(50):
        P, M, c, base, span = _random_affine_sample(rng)
        g = extend_translated_linear(PointSample(P, P @ M.T + c))
        g2 = g.rebased(P[-1])
        v = base + rng.normal(size=len(span)) @ span
        assert np.allclose(g(v), g2(v), atol=1e-8)


def test_outside_hull_needs_extend():
    g = extend_translated_linear(PointSample([[0, 1], [1, 0]], [1, 2]))
    with pytest.raises(ValueError):
        g([0, 0])
    assert g.full_space_extension()["canonical"] is False
    assert np.isfinite(g([0, 0], extend=True)).all()


def test_witness_for_perturbed_midpoint():
    P = [[0, 0], [2, 0], [1, 0]]
    ok, w = is_convex_linear(PointSample(P, [0, 2, 1.5]))
    assert not ok and np.allclose(w.point, [1, 0])
    assert w.gap == pytest.approx(0.5)


def test_witness_is_a_genuine_violation(rng):
    for _ in range(100):
        P = rng.normal(size=(6, 2))
        F = rng.normal(size=(6, 1))
        w = extend_translated_linear(PointSample(P, F))
        assert isinstance(w, NotConvexLinear)
        assert np.isclose(w.alpha.sum(), 1) and np.isclose(w.beta.sum(), 1)
        assert np.allclose(w.alpha @ P, w.beta @ P, atol=1e-9)
        assert w.gap > 1e-6
        assert np.allclose(w.alpha @ F, w.value_alpha) and np.allclose(w.beta @ F, w.value_beta)


def test_restriction_of_affine_is_convex_linear(rng):
    P = rng.normal(size=(7, 3))
    assert is_convex_linear(PointSample(P, P @ [1.0, -2.0, 0.5] + 3))[0]


def test_bell_moments_are_not_convex_linear():
    """As a function of the hidden-variable measure, states +-x and +-z average to one state but not one moment."""
    pts = [[1, 0, 0], [-1, 0, 0], [0, 0, 1], [0, 0, -1]]
    vals = [second_moment_matrix([(1.0, p)]).ravel() for p in pts]
    ok, w = is_convex_linear(PointSample(pts, vals))
    assert not ok and w.gap > 1


def test_estimator_api():
    est = TranslatedLinearExtension()
    assert clone(est).get_params() == {"rtol": 1e-9, "strict": False}
    X = np.array([[0, 1], [1, 0], [1, 1]], dtype=float)
    est.fit(X, [1, 2, 4])
    assert np.allclose(est.coef_, [3, 2]) and est.intercept_ == pytest.approx(-1)
    assert np.allclose(est.predict([[0.5, 0.5], [2, 2]]), [1.5, 9])
    assert est.score(X, [1, 2, 4]) == pytest.approx(1)
    with pytest.raises(NotConvexLinearError):
        TranslatedLinearExtension().fit([[0.0], [1.0], [2.0]], [0, 1, 5])
    strict = TranslatedLinearExtension(strict=True).fit([[0, 1], [1, 0]], [1, 2])
    with pytest.raises(ValueError):
        strict.predict([[0, 0]])
