"""Coexistence of two effects and why it fails for non-commuting projections.

Classically any two [0, 1]-valued functions ``f, g`` coexist: ``h = min(f, g)``
makes ``h, f - h, g - h, 1 - f - g + h`` all nonnegative. A representation
of quantum effects that is linear and positive would carry this over to
operators, so every pair of rank-one projections ``A, B`` would admit a
Hermitian ``H`` making ``H, A - H, B - H, I - A - B + H`` positive. This
module measures how badly that fails.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .operator_core import DEFAULT_TOL, IDENTITY2, PAULI, is_projection, operator_to_pauli, rank

QUADRUPLE_NAMES = ("H", "A-H", "B-H", "I-A-B+H")
KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
DEFAULT_A = np.outer(KET0, KET0.conj())
DEFAULT_B = np.outer(KET_PLUS, KET_PLUS.conj())


def classical_coexist(f, g) -> np.ndarray:
    """Pointwise minimum of two [0, 1]-valued functions on a finite set."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise ValueError("f and g must have equal lengths")
    for name, v in (("f", f), ("g", g)):
        if ((v < 0) | (v > 1)).any():
            raise ValueError(f"{name} has values outside [0, 1]")
    return np.minimum(f, g)


def classical_quadruple(f, g, h) -> tuple[np.ndarray, ...]:
    f, g, h = (np.asarray(x, dtype=float) for x in (f, g, h))
    return h, f - h, g - h, 1 - f - g + h


@dataclass(frozen=True)
class CoexistenceQuadruple:
    H: np.ndarray
    A_minus_H: np.ndarray
    B_minus_H: np.ndarray
    rest: np.ndarray
    min_eigenvalues: tuple

    @property
    def operators(self) -> tuple:
        return self.H, self.A_minus_H, self.B_minus_H, self.rest

    @property
    def margin(self) -> float:
        return min(self.min_eigenvalues)


@dataclass(frozen=True)
class FeasibilityMargin:
    value: float
    argmax_H: np.ndarray


def quadruple(A, B, H) -> CoexistenceQuadruple:
    """The four operators ``H, A - H, B - H, I - A - B + H`` and their least eigenvalues."""
    A, B, H = (np.asarray(x, dtype=complex) for x in (A, B, H))
    if not (A.shape == B.shape == H.shape) or A.shape[0] != A.shape[1]:
        raise ValueError("A, B, H must be square matrices of equal size")
    I = np.eye(A.shape[0])
    ops = (H, A - H, B - H, I - A - B + H)
    mins = tuple(float(np.linalg.eigvalsh((X + X.conj().T) / 2)[0]) for X in ops)
    return CoexistenceQuadruple(*ops, mins)


def _check_rank_one_qubit(P, name):
    P = np.asarray(P, dtype=complex)
    if P.shape != (2, 2) or not is_projection(P) or rank(P) != 1:
        raise ValueError(f"{name} must be a rank-one projection on C^2")
    return P


def _rotation_to_canonical(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rotation sending ``a`` to z and ``b`` into the x-z half plane with ``x >= 0``."""
    e3 = a / np.linalg.norm(a)
    perp = b - np.dot(b, e3) * e3
    if np.linalg.norm(perp) < 1e-12:
        seed = np.eye(3)[np.argmin(np.abs(e3))]
        perp = seed - np.dot(seed, e3) * e3
    e1 = perp / np.linalg.norm(perp)
    e2 = np.cross(e3, e1)
    return np.vstack([e1, e2, e3])


def _t_batch(params: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Margin for ``H = h0 I + h . sigma`` in closed form.

    Every member of the quadruple is ``w I + v . sigma`` whose least
    eigenvalue is ``w - |v|``; ``A = (I + a.sigma)/2``, ``B = (I + b.sigma)/2``.
    """
    h0, h = params[:, 0], params[:, 1:]
    cols = (
        h0 - np.linalg.norm(h, axis=1),
        0.5 - h0 - np.linalg.norm(a / 2 - h, axis=1),
        0.5 - h0 - np.linalg.norm(b / 2 - h, axis=1),
        h0 - np.linalg.norm(h - a / 2 - b / 2, axis=1),
    )
    return np.minimum.reduce(cols)


def coexistence_margin(A, B, points: int = 9, levels: int = 5, shrink: float = 4.0,
                       extra_levels: int = 20) -> FeasibilityMargin:
    """Maximize over Hermitian ``H`` the least eigenvalue across the quadruple.

    The two projections are first rotated to a canonical frame (``A`` along
    z, ``B`` in the x-z plane), so the result does not depend on the basis.
    The objective is concave in the four real coordinates of ``H``; it is
    maximized by nested grid refinement with ``points`` per axis, starting
    on ``[-1, 1]^4`` and shrinking the box by ``shrink`` around the incumbent
    at each level. After the first ``levels`` levels, refinement continues
    for up to ``extra_levels`` more while the incumbent keeps improving.
    Ties go to the smallest lexicographic grid index.
    """
    A = _check_rank_one_qubit(A, "A")
    B = _check_rank_one_qubit(B, "B")
    a = operator_to_pauli(A).bloch
    b = operator_to_pauli(B).bloch
    R = _rotation_to_canonical(a, b)
    ca, cb = R @ a, R @ b

    axis = np.linspace(-1.0, 1.0, points)
    offsets = np.array(list(itertools.product(axis, repeat=4)))
    center = np.zeros(4)
    half = 1.0
    best_val = -np.inf
    for level in range(levels + extra_levels):
        cand = center + half * offsets
        vals = _t_batch(cand, ca, cb)
        k = int(np.argmax(vals))
        improved = vals[k] > best_val + 1e-15
        if vals[k] >= best_val:
            best_val, center = float(vals[k]), cand[k]
        if level >= levels and not improved:
            break
        half /= shrink
    h0, hv = center[0], R.T @ center[1:]
    H = h0 * IDENTITY2 + sum(c * s for c, s in zip(hv, PAULI))
    return FeasibilityMargin(best_val, H)


def witness_value() -> float:
    """``<0|(I - A - B)|0>`` for ``A = |0><0|``, ``B = |+><+|``.

    Since ``<0|B|0> = |<0|+>|^2 = 1/2`` this is ``-1/2``.
    """
    M = IDENTITY2 - DEFAULT_A - DEFAULT_B
    return float(np.vdot(KET0, M @ KET0).real)


def witness_min_eigenvalue() -> tuple[float, np.ndarray]:
    """Least eigenvalue of ``I - A - B = -(sigma_x + sigma_z)/2`` (``-1/sqrt(2)``) and its eigenvector."""
    w, V = np.linalg.eigh(IDENTITY2 - DEFAULT_A - DEFAULT_B)
    return float(w[0]), V[:, 0]


@dataclass(frozen=True)
class KernelReport:
    min_eigenvalues: tuple
    partial_margin: float
    near_feasible: bool
    first_violation: str | None
    norm_H_ket1: float
    norm_H_ketminus: float
    h00: float
    bound: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def forced_kernel_check(H, eps: float = 1e-3) -> KernelReport:
    """Trace the contradiction for ``A = |0><0|``, ``B = |+><+|`` at a given ``H``.

    Positivity of ``H`` and ``A - H`` squeezes ``H|1>`` to zero, and likewise
    ``B - H`` squeezes ``H|->``; with ``H|0> = 0`` the fourth operator has
    ``<0|(I - A - B + H)|0> = -1/2`` and least eigenvalue ``-1/sqrt(2)``. The report gives the least
    eigenvalues of the quadruple, the smallest of the first three
    (``partial_margin``), the two norms, ``<0|H|0>``, and the value
    ``bound = <0|(I - A - B + H)|0>``. ``first_violation`` names the first
    quadruple member whose least eigenvalue is below ``-eps``.
    """
    H = np.asarray(H, dtype=complex)
    if H.shape != (2, 2) or not np.allclose(H, H.conj().T, atol=DEFAULT_TOL):
        raise ValueError("H must be a 2x2 Hermitian matrix")
    q = quadruple(DEFAULT_A, DEFAULT_B, H)
    partial = min(q.min_eigenvalues[:3])
    viol = next((n for n, v in zip(QUADRUPLE_NAMES, q.min_eigenvalues) if v < -eps), None)
    h00 = float(np.vdot(KET0, H @ KET0).real)
    return KernelReport(
        min_eigenvalues=q.min_eigenvalues,
        partial_margin=partial,
        near_feasible=partial >= -eps,
        first_violation=viol,
        norm_H_ket1=float(np.linalg.norm(H @ KET1)),
        norm_H_ketminus=float(np.linalg.norm(H @ KET_MINUS)),
        h00=h00,
        bound=float(np.vdot(KET0, q.rest @ KET0).real),
    )
