"""Finite probability representations of a qubit and why none exists.

With Bloch-parametrized states ``rho(x) = (I + x.sigma)/2`` and effects
``E(m, p) = m I + p.sigma``, a convex-linear representation on a finite
sample space ``Lambda`` with weights ``w`` takes the form

    mu_x(l) = x . A(l) + C(l),        xi_{m,p}(l) = p . B(l) + m.

Nonnegativity over all states and effects, together with reproducing
``tr(rho(x) E(m, p)) = m + x.p``, amounts to six constraint families:

    N1  |B(l)| <= 1                    N2  |A(l)| <= C(l)
    E2  sum_l w B_i A_j = delta_ij      E3  sum_l w B_i C = 0
    E4  sum_l w A_i = 0                 E5  sum_l w C = 1

They are jointly infeasible: N1, N2 and E5 bound
``sum_i sum_l w B_i A_i`` by 1 (Cauchy-Schwarz), while E2 wants 3.

Indices in reports are zero-based: ``l`` indexes sample points and
``(i, j)`` the x, y, z axes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

DEFAULT_TOL = 1e-8
FAMILIES = ("N1", "N2", "E2", "E3", "E4", "E5")


class MalformedCandidate(ValueError):
    pass


class PreconditionError(ValueError):
    """A refutation precondition does not hold; ``report`` says which one."""

    def __init__(self, report: "RefutationReport"):
        self.report = report
        super().__init__(f"precondition {report.violated} fails at {report.location} "
                         f"(magnitude {report.magnitude:.3g})")


@dataclass(frozen=True)
class FiniteRepresentationCandidate:
    weights: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        try:
            w = np.asarray(self.weights, dtype=float).ravel()
            A = np.asarray(self.A, dtype=float)
            B = np.asarray(self.B, dtype=float)
            C = np.asarray(self.C, dtype=float).ravel()
        except (TypeError, ValueError) as exc:
            raise MalformedCandidate(f"non-numeric candidate data: {exc}") from None
        n = w.size
        if n == 0:
            raise MalformedCandidate("candidate needs at least one point")
        if A.shape != (n, 3) or B.shape != (n, 3) or C.shape != (n,):
            raise MalformedCandidate(
                f"shape mismatch: weights {w.shape}, A {A.shape}, B {B.shape}, C {C.shape}")
        if not all(np.isfinite(x).all() for x in (w, A, B, C)):
            raise MalformedCandidate("candidate contains non-finite values")
        if (w < 0).any():
            raise MalformedCandidate("weights must be nonnegative")
        for name, arr in (("weights", w), ("A", A), ("B", B), ("C", C)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def npoints(self) -> int:
        return self.weights.size

    @classmethod
    def from_dict(cls, data: dict) -> "FiniteRepresentationCandidate":
        try:
            return cls(data["weights"], data["A"], data["B"], data["C"])
        except KeyError as exc:
            raise MalformedCandidate(f"candidate is missing {exc}") from None

    @classmethod
    def load(cls, path) -> "FiniteRepresentationCandidate":
        if str(path) == "sample":
            text = resources.files("nogo.data").joinpath("candidate_single_point.json").read_text()
        else:
            text = Path(path).read_text()
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "A": self.A.tolist(),
                "B": self.B.tolist(), "C": self.C.tolist()}


@dataclass(frozen=True)
class RefutationReport:
    violated: str
    location: tuple
    magnitude: float

    def to_dict(self) -> dict:
        return {"violated": self.violated, "location": list(self.location), "magnitude": self.magnitude}


def _index(cand, lam):
    if not 0 <= lam < cand.npoints:
        raise IndexError(f"point index {lam} out of range for {cand.npoints} points")


def mu_value(x, cand: FiniteRepresentationCandidate, lam: int) -> float:
    """Density of state ``rho(x)`` at sample point ``lam``: ``x . A + C``."""
    _index(cand, lam)
    return float(np.dot(x, cand.A[lam]) + cand.C[lam])


def xi_value(m, p, cand: FiniteRepresentationCandidate, lam: int) -> float:
    """Response of effect ``E(m, p)`` at sample point ``lam``: ``p . B + m``."""
    _index(cand, lam)
    return float(np.dot(p, cand.B[lam]) + m)


def pauli_trace(x, m, p, tol: float = 1e-10) -> float:
    """``tr(rho(x) E(m, p)) = m + x . p`` after checking the parameters."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if x.shape != (3,) or p.shape != (3,):
        raise ValueError("x and p must be 3-vectors")
    if np.linalg.norm(x) > 1 + tol:
        raise ValueError("x lies outside the Bloch ball")
    r = np.linalg.norm(p)
    if not (r <= m + tol and m <= 1 - r + tol):
        raise ValueError("E(m, p) is not an effect: need |p| <= m <= 1 - |p|")
    return float(m + x @ p)


def residuals(cand: FiniteRepresentationCandidate) -> dict:
    """Signed violation amount for every constraint instance (positive = violated)."""
    w, A, B, C = cand.weights, cand.A, cand.B, cand.C
    live = w > 0
    return {
        "N1": np.where(live, np.linalg.norm(B, axis=1) - 1, -np.inf),
        "N2": np.where(live, np.linalg.norm(A, axis=1) - C, -np.inf),
        "E2": np.abs(np.einsum("l,li,lj->ij", w, B, A) - np.eye(3)),
        "E3": np.abs(np.einsum("l,li,l->i", w, B, C)),
        "E4": np.abs(w @ A),
        "E5": np.abs(np.array([w @ C - 1])),
    }


def _first(res: np.ndarray, tol: float):
    bad = np.argwhere(res > tol)
    if bad.size == 0:
        return None
    loc = tuple(int(i) for i in bad[0])
    return loc, float(res[loc])


def verify_candidate(cand: FiniteRepresentationCandidate, tol: float = DEFAULT_TOL):
    """First violated constraint in the order N1, N2, E2, E3, E4, E5, or None if all hold.

    Points of zero weight are exempt from the pointwise bounds N1 and N2.
    """
    res = residuals(cand)
    for fam in FAMILIES:
        hit = _first(res[fam], tol)
        if hit is not None:
            loc, mag = hit
            return RefutationReport(fam, () if fam == "E5" else loc, mag)
    return None


def satisfied_families(cand: FiniteRepresentationCandidate, tol: float = DEFAULT_TOL) -> set[str]:
    res = residuals(cand)
    return {fam for fam in FAMILIES if _first(res[fam], tol) is None}


def confirms(cand: FiniteRepresentationCandidate, report: RefutationReport, tol: float = DEFAULT_TOL) -> bool:
    """Re-evaluate a report's constraint instance independently of how it was found."""
    w, A, B, C = cand.weights, cand.A, cand.B, cand.C
    fam, loc = report.violated, report.location
    if fam == "N1":
        (l,) = loc
        amount = np.sqrt(sum(B[l, i] ** 2 for i in range(3))) - 1 if w[l] > 0 else -np.inf
    elif fam == "N2":
        (l,) = loc
        amount = np.sqrt(sum(A[l, i] ** 2 for i in range(3))) - C[l] if w[l] > 0 else -np.inf
    elif fam == "E2":
        i, j = loc
        amount = abs(sum(w[l] * B[l, i] * A[l, j] for l in range(len(w))) - (1.0 if i == j else 0.0))
    elif fam == "E3":
        (i,) = loc
        amount = abs(sum(w[l] * B[l, i] * C[l] for l in range(len(w))))
    elif fam == "E4":
        (i,) = loc
        amount = abs(sum(w[l] * A[l, i] for l in range(len(w))))
    elif fam == "E5":
        amount = abs(sum(w[l] * C[l] for l in range(len(w))) - 1)
    else:
        raise ValueError(f"unknown constraint tag {fam!r}")
    return amount > tol and amount >= report.magnitude - tol


def refute_by_chain(cand: FiniteRepresentationCandidate, tol: float = DEFAULT_TOL) -> RefutationReport:
    """Replay the impossibility argument on a candidate.

    Preconditions N2, E5 and E4 are checked first; a failure raises
    :class:`PreconditionError` carrying the failing instance. Otherwise
    ``|sum_l w B_i A_i| <= sum_l w |B_i| C``, so the diagonal of E2 can only
    hold if ``|B_i|`` averages at least 1 on the support of ``C``; if some
    diagonal entry is off by more than ``tol`` that entry is reported,
    otherwise the norm bound N1 must break at the point of largest
    ``|B(l)|`` where ``C(l) > tol``, and that point is reported.
    """
    res = residuals(cand)
    for fam in ("N2", "E5", "E4"):
        hit = _first(res[fam], tol)
        if hit is not None:
            loc, mag = hit
            raise PreconditionError(RefutationReport(fam, () if fam == "E5" else loc, mag))
    diag = np.diag(res["E2"])
    i = int(np.argmax(diag))
    if diag[i] > tol:
        return RefutationReport("E2", (i, i), float(diag[i]))
    support = (cand.weights > 0) & (cand.C > tol)
    if not support.any():
        raise PreconditionError(RefutationReport("E5", (), float(res["E5"][0])))
    norms = np.where(support, np.linalg.norm(cand.B, axis=1), -np.inf)
    lam = int(np.argmax(norms))
    return RefutationReport("N1", (lam,), float(norms[lam] - 1))


def refute(cand: FiniteRepresentationCandidate, tol: float = DEFAULT_TOL) -> RefutationReport:
    """A certified violation for any candidate: the chain when it applies, else the direct check."""
    try:
        report = refute_by_chain(cand, tol)
    except PreconditionError as exc:
        report = exc.report
    if not confirms(cand, report, tol):
        raise AssertionError(f"refutation {report} failed re-verification")
    return report


def _solve_columns(M: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Minimum-norm ``X`` with ``M.T @ X = targets``."""
    return np.linalg.lstsq(M.T, targets, rcond=None)[0]


def _centered(rng, n, w, scale=1.0):
    A = rng.standard_normal((n, 3)) * scale
    return A - (w @ A) / w.sum()


def _ball(rng, n):
    B = rng.standard_normal((n, 3))
    r = rng.uniform(0, 1, n) ** (1 / 3)
    return B / np.linalg.norm(B, axis=1, keepdims=True) * r[:, None]


def random_candidate(rng: np.random.Generator, npoints: int, drop: str) -> FiniteRepresentationCandidate:
    """Random candidate built to satisfy every family except ``drop``.

    For ``drop`` in N1, N2, E2, E5 the other five families hold exactly
    (up to rounding) whenever ``npoints`` is large enough for the linear
    constraints to be solvable. Dropping E3 or E4 leaves a set containing
    N1, N2, E2 and E5, which no candidate satisfies; for those the
    generator satisfies N1, E2, E3/E4 and E5 and lets the rest fall where
    they may.
    """
    if drop not in FAMILIES:
        raise ValueError(f"unknown family {drop!r}")
    n = npoints
    w = rng.dirichlet(np.ones(n))
    if drop == "N1":
        A = _centered(rng, n, w)
        C = np.linalg.norm(A, axis=1) + rng.uniform(0, 1, n)
        s = w @ C
        A, C = A / s, C / s
        M = np.column_stack([w[:, None] * A, w * C])
        B = _solve_columns(M, np.vstack([np.eye(3), np.zeros((1, 3))]))
    elif drop == "N2" or drop in ("E3", "E4"):
        B = _ball(rng, n)
        M = np.column_stack([w[:, None] * B, w])
        A = _solve_columns(M, np.vstack([np.eye(3), np.zeros((1, 3))]))
        C = _solve_columns(M, np.array([0.0, 0.0, 0.0, 1.0]))
        if drop == "E3":
            C = np.linalg.norm(A, axis=1) + np.abs(C)
            C = C / (w @ C)
        elif drop == "E4":
            A = A + rng.standard_normal(3) * 0.1
    elif drop == "E2":
        A = _centered(rng, n, w)
        C = np.linalg.norm(A, axis=1) + rng.uniform(0, 1, n)
        s = w @ C
        A, C = A / s, C / s
        B = rng.standard_normal((n, 3))
        wc = w * C
        B = B - np.outer(wc, wc @ B) / (wc @ wc)
        B = B / max(1.0, np.linalg.norm(B, axis=1).max())
    else:  # E5
        half = max(n // 2, 1)
        Bh = _ball(rng, half)
        wh = rng.dirichlet(np.ones(half)) / 2
        M = 2 * wh[:, None] * Bh
        Ah = _solve_columns(M, np.eye(3))
        w = np.concatenate([wh, wh])
        B = np.vstack([Bh, -Bh])
        A = np.vstack([Ah, -Ah])
        C = np.linalg.norm(A, axis=1)
    return FiniteRepresentationCandidate(w, A, B, C)


def quantum_candidate(npoints: int, seed: int = 0) -> FiniteRepresentationCandidate:
    """Candidate whose effect responses are genuine quantum probabilities.

    Sample points are pure states with Bloch vectors ``n_l`` drawn uniformly,
    so ``xi_{m,p}(l) = m + p . n_l = tr(|n_l><n_l| E(m, p))``. The state side
    ``A, C`` is the minimum-norm solution of E2 to E5.
    """
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((npoints, 3))
    B = g / np.linalg.norm(g, axis=1, keepdims=True)
    w = np.full(npoints, 1.0 / npoints)
    M = np.column_stack([w[:, None] * B, w])
    A = _solve_columns(M, np.vstack([np.eye(3), np.zeros((1, 3))]))
    C = _solve_columns(M, np.array([0.0, 0.0, 0.0, 1.0]))
    return FiniteRepresentationCandidate(w, A, B, C)
