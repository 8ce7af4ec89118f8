"""Finite-dimensional Hermitian linear algebra.

Construction and validation of Hermitian operators and rays, commutation
tests, spectra, joint spectra of commuting families, Jordan (positive and
negative part) decomposition, the qubit Pauli parametrization of states and
effects, and tensor/embedding helpers.

Functions accept either plain ``numpy`` arrays or :class:`HermitianOperator`
instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-10
CLUSTER_TOL = 1e-8
RAY_EQ_TOL = 1e-9

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class NonCommutingError(ValueError):
    """Raised when an operation needs a commuting family and gets none.

    The offending pair of indices is kept on ``pair``.
    """

    def __init__(self, pair, message=None):
        self.pair = tuple(pair)
        super().__init__(message or f"operators {self.pair[0]} and {self.pair[1]} do not commute")


def _as_matrix(A) -> np.ndarray:
    if isinstance(A, HermitianOperator):
        return A.matrix
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


@dataclass(frozen=True)
class HermitianOperator:
    """A dense Hermitian matrix together with its comparison tolerance."""

    matrix: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        M = np.array(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
            raise ValueError(f"expected a non-empty square matrix, got shape {M.shape}")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        scale = max(1.0, np.abs(M).max())
        if np.abs(M - M.conj().T).max() > self.tol * scale:
            raise ValueError("matrix is not Hermitian within tolerance")
        M = (M + M.conj().T) / 2
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


@dataclass(frozen=True, eq=False)
class Ray:
    """A unit vector up to phase.

    Two rays compare equal when ``|<u, v>| >= 1 - 1e-9``.
    """

    vector: np.ndarray

    def __post_init__(self):
        v = np.array(self.vector, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if v.size == 0 or norm == 0:
            raise ValueError("a ray needs a non-zero vector")
        v = v / norm
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.vector.size

    def overlap(self, other: "Ray") -> float:
        return float(abs(np.vdot(self.vector, other.vector)))

    def __eq__(self, other):
        if not isinstance(other, Ray):
            return NotImplemented
        return self.dim == other.dim and self.overlap(other) >= 1 - RAY_EQ_TOL

    __hash__ = None

    def projector(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())


@dataclass(frozen=True)
class JointSpectrum:
    """Simultaneous eigenvalue tuples of a commuting family, sorted."""

    arity: int
    points: tuple

    def __contains__(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        return any(np.allclose(p, q, rtol=0, atol=CLUSTER_TOL) for q in self.points)

    def __len__(self):
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(len(self.points), self.arity)


@dataclass(frozen=True)
class JordanParts:
    """``A = b*B - c*C`` with ``B``, ``C`` positive trace-one (or None)."""

    b: float
    B: np.ndarray | None
    c: float
    C: np.ndarray | None

    def reconstruct(self, dim: int) -> np.ndarray:
        out = np.zeros((dim, dim), dtype=complex)
        if self.B is not None:
            out += self.b * self.B
        if self.C is not None:
            out -= self.c * self.C
        return out


@dataclass(frozen=True)
class PauliForm:
    """The qubit operator ``w*I + x . sigma``.

    For a state ``rho(x)`` we have ``w = 1/2`` and the Bloch vector is
    ``2*x``; for an effect ``E(m, p)`` we have ``w = m`` and ``x = p``.
    Use :meth:`state` and :meth:`effect` rather than building these by hand.
    """

    w: float
    x: tuple = field(default=(0.0, 0.0, 0.0))

    def __post_init__(self):
        x = tuple(float(t) for t in self.x)
        if len(x) != 3:
            raise ValueError("Pauli vector part must have three components")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "w", float(self.w))

    @classmethod
    def state(cls, bloch) -> "PauliForm":
        bloch = np.asarray(bloch, dtype=float)
        return cls(0.5, tuple(bloch / 2))

    @classmethod
    def effect(cls, m, p) -> "PauliForm":
        return cls(m, tuple(np.asarray(p, dtype=float)))

    @property
    def bloch(self) -> np.ndarray:
        return 2 * np.asarray(self.x)


def hermitian(A, tol: float = DEFAULT_TOL) -> HermitianOperator:
    """Wrap ``A`` as a validated :class:`HermitianOperator`."""
    if isinstance(A, HermitianOperator):
        return A
    return HermitianOperator(np.asarray(A, dtype=complex), tol)


def op_norm(A) -> float:
    """Spectral norm."""
    return float(np.linalg.norm(_as_matrix(A), 2))


def commute(A, B, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``||AB - BA|| <= tol * max(1, ||A|| ||B||)``."""
    MA, MB = _as_matrix(A), _as_matrix(B)
    if MA.shape != MB.shape:
        raise ValueError(f"dimension mismatch: {MA.shape} vs {MB.shape}")
    scale = max(1.0, op_norm(MA) * op_norm(MB))
    return op_norm(MA @ MB - MB @ MA) <= tol * scale


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    """Group indices of sorted ``values`` whose consecutive gaps are <= tol."""
    order = np.argsort(values, kind="stable")
    groups: list[list[int]] = []
    last = None
    for i in order:
        if last is None or values[i] - last > tol:
            groups.append([int(i)])
        else:
            groups[-1].append(int(i))
        last = values[i]
    return groups


def _cluster_tol(M: np.ndarray) -> float:
    return CLUSTER_TOL * max(1.0, op_norm(M))


def spectrum(A) -> np.ndarray:
    """Distinct eigenvalues of ``A`` in increasing order.

    Eigenvalues closer than ``1e-8 * max(1, ||A||)`` are merged; each
    cluster is represented by its mean.
    """
    M = _as_matrix(A)
    ev = np.linalg.eigvalsh(M)
    groups = _cluster(ev, _cluster_tol(M))
    return np.array([ev[g].mean() for g in groups])


def _snap(value: float, points: np.ndarray) -> float:
    return float(points[np.argmin(np.abs(points - value))])


def simultaneous_eigenbasis(ops: Sequence, tol: float = DEFAULT_TOL, seed: int = 0) -> np.ndarray:
    """Unitary whose columns are common eigenvectors of a commuting family.

    A random real combination of the family is diagonalized first; each
    (numerically) degenerate eigenspace is then refined by diagonalizing
    every operator restricted to it, recursively.
    """
    mats = [_as_matrix(A) for A in ops]
    if not mats:
        raise ValueError("empty operator family")
    n = mats[0].shape[0]
    for k, M in enumerate(mats):
        if M.shape != (n, n):
            raise ValueError(f"dimension mismatch at operator {k}")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if not commute(mats[i], mats[j], tol):
                raise NonCommutingError((i, j))

    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(0.5, 1.5, size=len(mats))
    combo = sum(c * M for c, M in zip(coeffs, mats))
    ev, vecs = np.linalg.eigh(combo)

    def refine(V: np.ndarray, k: int) -> np.ndarray:
        if V.shape[1] == 1 or k == len(mats):
            return V
        sub = V.conj().T @ mats[k] @ V
        sub = (sub + sub.conj().T) / 2
        w, U = np.linalg.eigh(sub)
        V = V @ U
        cols = []
        for g in _cluster(w, _cluster_tol(mats[k])):
            cols.append(refine(V[:, g], k + 1))
        return np.hstack(cols)

    blocks = [refine(vecs[:, g], 0) for g in _cluster(ev, _cluster_tol(combo))]
    return np.hstack(blocks)


def joint_spectrum(ops: Sequence, tol: float = DEFAULT_TOL) -> JointSpectrum:
    """Joint spectrum of a commuting family of Hermitian operators.

    Examples
    --------
    >>> P = [np.diag(v) for v in np.eye(3)]
    >>> joint_spectrum(P).points
    ((0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (1.0, 0.0, 0.0))
    """
    mats = [_as_matrix(A) for A in ops]
    V = simultaneous_eigenbasis(mats, tol)
    specs = [spectrum(M) for M in mats]
    pts = set()
    for col in range(V.shape[1]):
        v = V[:, col]
        pts.add(tuple(_snap(np.vdot(v, M @ v).real, s) for M, s in zip(mats, specs)))
    return JointSpectrum(len(mats), tuple(sorted(pts)))


def jordan_decompose(A, tol: float = DEFAULT_TOL) -> JordanParts:
    """Split Hermitian ``A`` into ``b*B - c*C`` with ``B``, ``C`` density operators.

    ``b`` is the sum of positive eigenvalues and ``c`` minus the sum of the
    negative ones, so ``tr A = b - c`` and the trace norm is ``b + c``.
    """
    M = hermitian(A, tol).matrix
    ev, V = np.linalg.eigh(M)
    thresh = tol * max(1.0, np.abs(ev).max())
    pos, neg = ev > thresh, ev < -thresh
    b = float(ev[pos].sum())
    c = float(-ev[neg].sum())
    B = (V[:, pos] * ev[pos]) @ V[:, pos].conj().T / b if b > 0 else None
    C = (V[:, neg] * -ev[neg]) @ V[:, neg].conj().T / c if c > 0 else None
    return JordanParts(b, B, c, C)


def trace_norm(A) -> float:
    return float(np.abs(np.linalg.eigvalsh(_as_matrix(A))).sum())


def check_pauli_form(p: PauliForm, kind: str, tol: float = DEFAULT_TOL) -> None:
    """Raise ValueError unless ``p`` is a valid state or effect."""
    r = float(np.linalg.norm(p.x))
    if kind == "state":
        if abs(p.w - 0.5) > tol:
            raise ValueError("a state has identity coefficient 1/2")
        if 2 * r > 1 + tol:
            raise ValueError(f"Bloch vector outside the unit ball (norm {2 * r:.6g})")
    elif kind == "effect":
        if not (r <= p.w + tol and p.w <= 1 - r + tol):
            raise ValueError(f"effect needs |p| <= m <= 1 - |p| (m={p.w:.6g}, |p|={r:.6g})")
    else:
        raise ValueError(f"unknown kind {kind!r}")


def pauli_to_operator(p: PauliForm, kind: str | None = None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Materialize ``w*I + x . sigma`` as a 2x2 matrix.

    When ``kind`` is ``"state"`` or ``"effect"`` the corresponding
    constraint is checked first.
    """
    if kind is not None:
        check_pauli_form(p, kind, tol)
    return p.w * IDENTITY2 + sum(c * s for c, s in zip(p.x, PAULI))


def operator_to_pauli(A, kind: str | None = None, tol: float = DEFAULT_TOL) -> PauliForm:
    """Inverse of :func:`pauli_to_operator`, using ``tr(sigma_i sigma_j) = 2 delta_ij``."""
    M = hermitian(A, tol).matrix
    if M.shape != (2, 2):
        raise ValueError("Pauli parametrization is for 2x2 operators")
    p = PauliForm(np.trace(M).real / 2, tuple(np.trace(s @ M).real / 2 for s in PAULI))
    if kind is not None:
        check_pauli_form(p, kind, tol)
    return p


def tensor(A, B) -> np.ndarray:
    """Kronecker product; Hermitian when both factors are."""
    return np.kron(_as_matrix(A), _as_matrix(B))


def is_orthonormal_frame(frame: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    F = np.asarray(frame, dtype=complex)
    return F.ndim == 2 and np.allclose(F.conj().T @ F, np.eye(F.shape[1]), atol=tol)


def embed_ray(r: Ray, bigger_dim: int, frame=None) -> Ray:
    """Send ``r`` to ``sum_k r_k * frame[:, k]`` in the larger space.

    ``frame`` defaults to the standard basis of ``C^bigger_dim``; only its
    first ``r.dim`` columns are used.
    """
    if bigger_dim < r.dim:
        raise ValueError(f"cannot embed dimension {r.dim} into {bigger_dim}")
    F = np.eye(bigger_dim, dtype=complex) if frame is None else np.asarray(frame, dtype=complex)
    if F.shape[0] != bigger_dim or F.shape[1] < r.dim:
        raise ValueError(f"frame of shape {F.shape} does not fit dimension {bigger_dim}")
    if not is_orthonormal_frame(F[:, : r.dim]):
        raise ValueError("frame columns are not orthonormal")
    return Ray(F[:, : r.dim] @ r.vector)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    G = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_effect(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Effect with spectrum drawn uniformly from [0, 1]."""
    U = random_unitary(dim, rng)
    return (U * rng.uniform(0, 1, dim)) @ U.conj().T


def min_eigenvalue(A) -> float:
    return float(np.linalg.eigvalsh(_as_matrix(A))[0])


def is_effect(A, tol: float = DEFAULT_TOL) -> bool:
    M = _as_matrix(A)
    if np.abs(M - M.conj().T).max() > tol * max(1.0, np.abs(M).max()):
        return False
    ev = np.linalg.eigvalsh(M)
    return ev[0] >= -tol and ev[-1] <= 1 + tol


def is_projection(A, tol: float = DEFAULT_TOL) -> bool:
    M = _as_matrix(A)
    return np.allclose(M, M.conj().T, atol=tol) and np.allclose(M @ M, M, atol=tol)


def is_density(A, tol: float = DEFAULT_TOL) -> bool:
    M = _as_matrix(A)
    return (
        np.allclose(M, M.conj().T, atol=tol)
        and abs(np.trace(M).real - 1) <= tol
        and np.linalg.eigvalsh((M + M.conj().T) / 2)[0] >= -tol
    )


def rank(A, tol: float = 1e-9) -> int:
    return int(np.linalg.matrix_rank(_as_matrix(A), tol=tol))


def parse_complex_matrix(rows: Iterable) -> np.ndarray:
    """Matrix from nested lists whose entries are numbers or ``[re, im]`` pairs."""
    out = []
    for row in rows:
        out.append([parse_complex(x) for x in row])
    return np.array(out, dtype=complex)


def parse_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex entries are [re, im] pairs, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValueError(f"not a number: {x!r}")
    return complex(float(x), 0.0)


def complex_to_json(z: complex):
    z = complex(z)
    return [z.real, z.imag]
