"""Moving states and effects from a subspace to a larger space.

An embedding is an isometry ``i: C^k -> C^n`` with adjoint ``p = i^dagger``,
so ``p i = I_k`` and ``i p`` projects onto the image. States go to
``i rho p``; rank-one projections go to ``i E p``; general effects go to
``i E p + c(E) (I - i p)`` where the scalar ``c(E)`` is either
``<alpha|E|alpha>`` for a fixed unit vector ``alpha`` or ``tr(E)/k``. The
compensating term keeps POVMs summing to the identity and leaves every
pairing ``tr(rho E)`` unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operator_core import DEFAULT_TOL, is_density, is_effect, is_projection, random_unitary, rank


@dataclass(frozen=True)
class SubspaceEmbedding:
    isometry: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.isometry, dtype=complex)
        if V.ndim != 2 or V.shape[0] < V.shape[1] or V.shape[1] < 1:
            raise ValueError(f"isometry must be n x k with n >= k >= 1, got {V.shape}")
        if not np.allclose(V.conj().T @ V, np.eye(V.shape[1]), atol=1e-10):
            raise ValueError("columns are not orthonormal")
        V.setflags(write=False)
        object.__setattr__(self, "isometry", V)

    @classmethod
    def standard(cls, small_dim: int, big_dim: int) -> "SubspaceEmbedding":
        return cls(np.eye(big_dim, small_dim, dtype=complex))

    @classmethod
    def random(cls, small_dim: int, big_dim: int, rng: np.random.Generator) -> "SubspaceEmbedding":
        return cls(random_unitary(big_dim, rng)[:, :small_dim])

    @property
    def small_dim(self) -> int:
        return self.isometry.shape[1]

    @property
    def big_dim(self) -> int:
        return self.isometry.shape[0]

    @property
    def projector(self) -> np.ndarray:
        """The adjoint map ``p``, a ``k x n`` matrix."""
        return self.isometry.conj().T

    @property
    def range_projection(self) -> np.ndarray:
        return self.isometry @ self.projector

    def conjugated(self, U) -> "SubspaceEmbedding":
        """The embedding ``U i`` for a unitary ``U`` of the big space."""
        return SubspaceEmbedding(np.asarray(U) @ self.isometry)


def _square(M, dim, what):
    M = np.asarray(M, dtype=complex)
    if M.shape != (dim, dim):
        raise ValueError(f"{what} must be {dim}x{dim}, got {M.shape}")
    return M


def _sandwich(M, emb: SubspaceEmbedding) -> np.ndarray:
    return emb.isometry @ M @ emb.projector


def expand_state(rho, emb: SubspaceEmbedding, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``i rho p``; positivity and unit trace carry over."""
    rho = _square(rho, emb.small_dim, "rho")
    if not is_density(rho, tol):
        raise ValueError("rho is not a density operator")
    return _sandwich(rho, emb)


def expand_effect_plain(E, emb: SubspaceEmbedding, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``i E p`` for a rank-one projection ``E``."""
    E = _square(E, emb.small_dim, "E")
    if not is_projection(E, tol) or rank(E) != 1:
        raise ValueError("E must be a rank-one projection")
    return _sandwich(E, emb)


def compensator(E, emb: SubspaceEmbedding, alpha=None, mode: str = "alpha") -> float:
    if mode == "alpha":
        if alpha is None:
            raise ValueError("mode 'alpha' needs a unit vector alpha")
        a = np.asarray(alpha, dtype=complex).ravel()
        if a.shape != (emb.small_dim,) or abs(np.linalg.norm(a) - 1) > 1e-10:
            raise ValueError("alpha must be a unit vector of the small space")
        return float(np.vdot(a, E @ a).real)
    if mode == "average":
        return float(np.trace(E).real / emb.small_dim)
    raise ValueError(f"unknown compensator mode {mode!r}")


def expand_effect_compensated(E, emb: SubspaceEmbedding, alpha=None, mode: str = "alpha",
                              tol: float = DEFAULT_TOL) -> np.ndarray:
    """``i E p + c(E) (I - i p)`` for an effect ``E``.

    ``mode="alpha"`` uses ``c(E) = <alpha|E|alpha>``; ``mode="average"``
    uses ``c(E) = tr(E) / k``. Either choice is linear in ``E`` with
    ``c(I) = 1``, so POVMs map to POVMs.

    Examples
    --------
    >>> emb = SubspaceEmbedding.standard(2, 3)
    >>> np.diag(expand_effect_compensated(np.diag([.5, .25]), emb, alpha=[1, 0])).real
    array([0.5 , 0.25, 0.5 ])
    """
    E = _square(E, emb.small_dim, "E")
    if not is_effect(E, tol):
        raise ValueError("E is not an effect")
    c = compensator(E, emb, alpha, mode)
    return _sandwich(E, emb) + c * (np.eye(emb.big_dim) - emb.range_projection)


def random_povm(dim: int, size: int, rng: np.random.Generator) -> list[np.ndarray]:
    """``size`` effects summing to the identity: ``S^{-1/2} G_k S^{-1/2}`` for random positive ``G_k``."""
    G = []
    for _ in range(size):
        X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        G.append(X @ X.conj().T)
    S = sum(G)
    w, V = np.linalg.eigh(S)
    root = (V / np.sqrt(w)) @ V.conj().T
    return [root @ g @ root for g in G]
