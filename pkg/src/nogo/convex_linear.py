"""Affine hulls and translated-linear extension of convex-linear functions.

A function on a finite sample ``S`` of ``R^d`` that respects weighted
averages extends uniquely to ``Aff(S)`` as ``f(v) = w0 + h(v - u0)``, where
``u0`` is any point of ``S`` and ``h`` is linear on the subspace
``L = Aff(S) - u0``. The extension exists iff the affine hull of the graph
of ``f`` is itself the graph of a function, i.e. iff stacking the value
differences onto the point differences does not raise the rank.

:class:`TranslatedLinearExtension` wraps the construction in the
scikit-learn estimator interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

RANK_RTOL = 1e-9


def _rank_and_basis(M: np.ndarray, rtol: float = RANK_RTOL):
    """Numerical rank of ``M`` (rows are vectors) and an orthonormal basis of its row space."""
    if M.size == 0:
        return 0, np.zeros((0, M.shape[1] if M.ndim == 2 else 0))
    _, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return 0, np.zeros((0, M.shape[1]))
    r = int(np.count_nonzero(s > rtol * s[0]))
    return r, Vt[:r]


@dataclass(frozen=True)
class PointSample:
    """Points of ``R^d`` (rows) and the values of ``f`` there (rows of ``R^e``)."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.points, dtype=float))
        V = np.asarray(self.values, dtype=float)
        if V.ndim == 1:
            V = V[:, None]
        if P.shape[0] != V.shape[0]:
            raise ValueError(f"{P.shape[0]} points but {V.shape[0]} values")
        if P.shape[0] == 0 or P.shape[1] == 0 or V.shape[1] == 0:
            raise ValueError("need at least one point and positive dimensions")
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "values", V)

    @classmethod
    def from_dict(cls, data: dict) -> "PointSample":
        try:
            return cls(data["points"], data["values"])
        except KeyError as exc:
            raise ValueError(f"point sample needs {exc}") from None


def affine_hull_basis(points, rtol: float = RANK_RTOL) -> tuple[np.ndarray, np.ndarray]:
    """``(u0, basis)``: the first point and an orthonormal basis (rows) of ``Aff(points) - u0``.

    Examples
    --------
    >>> u0, L = affine_hull_basis([[0, 1], [1, 0]])
    >>> np.allclose(abs(L @ [1, -1]) / np.sqrt(2), 1)
    True
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[0] == 0:
        raise ValueError("need at least one point")
    u0 = P[0]
    _, basis = _rank_and_basis(P[1:] - u0, rtol)
    return u0.copy(), basis


@dataclass(frozen=True)
class TranslatedLinearMap:
    """``v -> w0 + h (v - u0)`` with ``h`` given as an ``e x d`` matrix.

    ``h`` is determined on ``L`` (spanned by the rows of ``basis``); off
    ``L`` it is set to zero, which is one arbitrary completion and not
    canonical.
    """

    u0: np.ndarray
    w0: np.ndarray
    h: np.ndarray
    basis: np.ndarray
    tol: float = 1e-8

    def in_hull(self, v) -> bool:
        d = np.asarray(v, dtype=float) - self.u0
        resid = d - self.basis.T @ (self.basis @ d)
        return float(np.linalg.norm(resid)) <= self.tol * max(1.0, float(np.linalg.norm(d)))

    def __call__(self, v, extend: bool = False) -> np.ndarray:
        """Evaluate at ``v``; points off ``Aff(S)`` need ``extend=True``."""
        v = np.asarray(v, dtype=float)
        if not extend and not self.in_hull(v):
            raise ValueError("point lies outside the affine hull of the sample; pass extend=True "
                             "for the non-canonical zero completion")
        return self.w0 + self.h @ (v - self.u0)

    @property
    def offset(self) -> np.ndarray:
        """Value at the origin under the zero completion: ``w0 - h(u0)``."""
        return self.w0 - self.h @ self.u0

    def rebased(self, u_new) -> "TranslatedLinearMap":
        """The same map written around another base point of the hull."""
        u_new = np.asarray(u_new, dtype=float)
        return TranslatedLinearMap(u_new, self(u_new), self.h, self.basis, self.tol)

    def full_space_extension(self) -> dict:
        return {"offset": self.offset, "linear": self.h, "canonical": False}


@dataclass(frozen=True)
class NotConvexLinear:
    """Two affine combinations of the sample with the same point but different values.

    ``alpha`` and ``beta`` are coefficient vectors over the sample points,
    each summing to one.
    """

    alpha: np.ndarray
    beta: np.ndarray
    point: np.ndarray
    value_alpha: np.ndarray
    value_beta: np.ndarray

    @property
    def gap(self) -> float:
        return float(np.linalg.norm(self.value_alpha - self.value_beta))

    def to_dict(self) -> dict:
        return {k: np.asarray(getattr(self, k)).tolist() for k in ("alpha", "beta", "point", "value_alpha", "value_beta")} | {"gap": self.gap}


def _witness(ps: PointSample, rtol: float) -> NotConvexLinear:
    P, F = ps.points, ps.values
    D = P[1:] - P[0]
    G = F[1:] - F[0]
    # left null space of D: combinations c of difference rows with c @ D = 0
    _, s, Vt = np.linalg.svd(D.T, full_matrices=True)
    r = int(np.count_nonzero(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    null = Vt[r:]
    images = null @ G
    k = int(np.argmax(np.linalg.norm(images, axis=1)))
    c = null[k] / np.abs(null[k]).max()
    beta = np.zeros(len(P))
    beta[0] = 1.0
    alpha = beta.copy()
    alpha[0] -= c.sum()
    alpha[1:] += c
    return NotConvexLinear(alpha, beta, alpha @ P, alpha @ F, beta @ F)


def extend_translated_linear(ps: PointSample, rtol: float = RANK_RTOL):
    """Unique translated-linear extension, or a :class:`NotConvexLinear` witness.

    The graph's affine hull is a function graph iff
    ``rank([dP | dF]) == rank(dP)`` for the difference matrices relative to
    the first sample point.
    """
    P, F = ps.points, ps.values
    D = P[1:] - P[0]
    G = F[1:] - F[0]
    rank_d, basis = _rank_and_basis(D, rtol)
    rank_g, _ = _rank_and_basis(np.hstack([D, G]), rtol)
    if rank_g > rank_d:
        return _witness(ps, rtol)
    if D.shape[0] == 0:
        h = np.zeros((F.shape[1], P.shape[1]))
    elif rank_d == P.shape[1]:
        # full hull: solve on d independent difference rows (consistency is already checked)
        rows = qr(D.T, pivoting=True, mode="r")[1][:rank_d]
        h = np.linalg.solve(D[rows], G[rows]).T
    else:
        h = np.linalg.lstsq(D, G, rcond=None)[0].T
        # min-norm lstsq already vanishes off the row space; project to clear rounding
        h = h @ basis.T @ basis
    return TranslatedLinearMap(P[0].copy(), F[0].copy(), h, basis)


def is_convex_linear(ps: PointSample, trials: int = 100, seed: int = 0, tol: float = 1e-8):
    """Check whether ``f`` respects weighted averages on the sample.

    First every pair whose midpoint is itself a sample point is checked
    exactly; then the translated-linear extension is attempted and, if it
    exists, re-evaluated on the samples and on ``trials`` random convex
    combinations. Returns ``(ok, witness)``; ``witness`` is None when ok.
    """
    P, F = ps.points, ps.values
    n = len(P)
    for i in range(n):
        for j in range(i + 1, n):
            mid = (P[i] + P[j]) / 2
            hits = np.flatnonzero(np.linalg.norm(P - mid, axis=1) <= tol)
            for k in hits:
                if np.linalg.norm(F[k] - (F[i] + F[j]) / 2) > tol * max(1.0, np.abs(F).max()):
                    alpha = np.zeros(n)
                    alpha[[i, j]] += 0.5
                    beta = np.zeros(n)
                    beta[k] = 1.0
                    return False, NotConvexLinear(alpha, beta, mid, alpha @ F, F[k])
    g = extend_translated_linear(ps)
    if isinstance(g, NotConvexLinear):
        return False, g
    scale = max(1.0, float(np.abs(F).max()))
    rng = np.random.default_rng(seed)
    coeffs = np.vstack([np.eye(n), rng.dirichlet(np.ones(n), size=trials)])
    for c in coeffs:
        if np.linalg.norm(g(c @ P, extend=True) - c @ F) > tol * scale:
            beta = np.zeros(n)
            beta[0] = 1.0
            return False, NotConvexLinear(c, beta, c @ P, c @ F, g(c @ P, extend=True))
    return True, None


class NotConvexLinearError(ValueError):
    def __init__(self, witness: NotConvexLinear):
        self.witness = witness
        super().__init__(f"sample is not convex-linear (value gap {witness.gap:.3g})")


class TranslatedLinearExtension(RegressorMixin, BaseEstimator):
    """Estimator form of :func:`extend_translated_linear`.

    ``fit(X, y)`` takes sample points as rows of ``X`` and values in ``y``
    and raises :class:`NotConvexLinearError` when no extension exists.
    ``predict`` evaluates the fitted map; with ``strict=True`` it refuses
    points outside the affine hull of the training sample.

    Parameters
    ----------
    rtol : float
        Relative singular-value threshold for rank decisions.
    strict : bool
        Reject inputs outside ``Aff(X)`` instead of zero-completing ``h``.
    """

    def __init__(self, rtol=RANK_RTOL, strict=False):
        self.rtol = rtol
        self.strict = strict

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True, ensure_min_samples=1)
        self._single_output = y.ndim == 1
        result = extend_translated_linear(PointSample(X, y), self.rtol)
        if isinstance(result, NotConvexLinear):
            raise NotConvexLinearError(result)
        self.map_ = result
        self.coef_ = result.h[0] if self._single_output else result.h
        self.intercept_ = result.offset[0] if self._single_output else result.offset
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "map_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        out = np.array([self.map_(x, extend=not self.strict) for x in X])
        return out[:, 0] if self._single_output else out
