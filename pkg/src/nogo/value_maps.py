"""Value maps on finite sets of projections.

A finite set of projections is compiled into boolean clauses, one family
per kind of commuting subfamily:

* an orthogonal pair may not both take value 1;
* a complete orthogonal family (summing to the identity) takes value 1 on
  exactly one member;
* an incomplete maximal orthogonal family takes value 1 on at most one.

Existence of a satisfying 0/1 assignment is decided by backtracking with
unit propagation, or by exhaustive enumeration. The module also carries the
dimension-lifting and tensor constructions that turn one uncolorable set
into another.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Sequence

import networkx as nx
import numpy as np

from .operator_core import Ray, parse_complex, rank

DEFAULT_BUDGET = 10**8
EXHAUSTIVE_MAX_VARS = 26
BUNDLED_CATALOGS = {
    "cabello18": "cabello18_dim4.json",
    "peres33": "peres33_dim3.json",
    "standard3": "standard_basis_dim3.json",
}

PAIR, EXACTLY_ONE, AT_MOST_ONE = "pair", "exactly_one", "at_most_one"


class DuplicateRayError(ValueError):
    def __init__(self, i, j):
        self.indices = (i, j)
        super().__init__(f"rays {i} and {j} coincide")


class BudgetExceeded(RuntimeError):
    """Search ran out of its node budget before reaching a verdict."""

    def __init__(self, budget, nodes):
        self.budget = budget
        self.nodes = nodes
        super().__init__(f"search budget of {budget} nodes exhausted")


class NotCertifiedError(ValueError):
    """Raised when a construction requires an uncolorable input and gets a colorable one."""


class ProjectionSet:
    """Finite family of orthogonal projections on ``C^dim``.

    Two members are orthogonal when ``||P Q|| <= tol``. A maximal orthogonal
    family is complete when its ranks add up to ``dim``.
    """

    def __init__(self, dim: int, projectors: Sequence, tol: float = 1e-9, name: str = ""):
        self.dim = int(dim)
        self.tol = float(tol)
        self.name = name
        self.projectors = [np.asarray(P, dtype=complex) for P in projectors]
        for k, P in enumerate(self.projectors):
            if P.shape != (self.dim, self.dim):
                raise ValueError(f"projector {k} has shape {P.shape}, expected dim {self.dim}")
        self._graph = None
        self._bases = None

    def __len__(self):
        return len(self.projectors)

    @property
    def ranks(self) -> list[int]:
        return [rank(P) for P in self.projectors]

    def _orthogonal_matrix(self) -> np.ndarray:
        n = len(self)
        G = np.zeros((n, n), dtype=bool)
        for i in range(n):
            for j in range(i + 1, n):
                G[i, j] = G[j, i] = np.linalg.norm(self.projectors[i] @ self.projectors[j], 2) <= self.tol
        return G

    def _coincident_pair(self):
        for i in range(len(self)):
            for j in range(i + 1, len(self)):
                if np.allclose(self.projectors[i], self.projectors[j], atol=self.tol):
                    return i, j
        return None

    @property
    def orthogonality_graph(self) -> nx.Graph:
        if self._graph is None:
            G = self._orthogonal_matrix()
            g = nx.Graph()
            g.add_nodes_from(range(len(self)))
            g.add_edges_from(zip(*np.nonzero(np.triu(G, 1))))
            self._graph = g
        return self._graph

    @property
    def bases(self) -> list[tuple[int, ...]]:
        """Maximal mutually orthogonal index sets, sorted."""
        if self._bases is None:
            cliques = nx.find_cliques(self.orthogonality_graph)
            self._bases = sorted(tuple(sorted(int(i) for i in c)) for c in cliques)
        return self._bases

    def is_complete(self, basis) -> bool:
        ranks = self.ranks
        return sum(ranks[i] for i in basis) == self.dim


class RaySet(ProjectionSet):
    """Finite set of rays, i.e. rank-one projections."""

    def __init__(self, dim: int, rays: Sequence, tol: float = 1e-9, name: str = "", expect: str = "unknown"):
        self.rays = [r if isinstance(r, Ray) else Ray(r) for r in rays]
        for k, r in enumerate(self.rays):
            if r.dim != dim:
                raise ValueError(f"ray {k} has dimension {r.dim}, expected {dim}")
        self.vectors = np.array([r.vector for r in self.rays], dtype=complex).reshape(len(self.rays), dim)
        self.expect = expect
        super().__init__(dim, [r.projector() for r in self.rays], tol, name)

    @property
    def ranks(self) -> list[int]:
        return [1] * len(self.rays)

    def _gram(self) -> np.ndarray:
        return np.abs(self.vectors.conj() @ self.vectors.T)

    def _orthogonal_matrix(self) -> np.ndarray:
        G = self._gram() <= self.tol
        np.fill_diagonal(G, False)
        return G

    def _coincident_pair(self):
        G = self._gram()
        for i in range(len(self)):
            for j in range(i + 1, len(self)):
                if G[i, j] >= 1 - 1e-9:
                    return i, j
        return None

    def permuted(self, order) -> "RaySet":
        return RaySet(self.dim, [self.rays[i] for i in order], self.tol, self.name, self.expect)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "tol": self.tol,
            "expect": self.expect,
            "rays": [[[float(z.real), float(z.imag)] for z in r.vector] for r in self.rays],
        }


def catalog_from_dict(data: dict) -> RaySet:
    """Build a :class:`RaySet` from the JSON catalog layout.

    Components may be plain numbers or ``[re, im]`` pairs; vectors are
    normalized on load.
    """
    try:
        dim = int(data["dim"])
        raw = data["rays"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"catalog needs 'dim' and 'rays': {exc}") from None
    if dim < 1:
        raise ValueError("catalog dimension must be positive")
    rays = []
    for k, comps in enumerate(raw):
        if len(comps) != dim:
            raise ValueError(f"ray {k} has {len(comps)} components, expected {dim}")
        v = np.array([parse_complex(c) for c in comps])
        if np.linalg.norm(v) == 0:
            raise ValueError(f"ray {k} is the zero vector")
        rays.append(Ray(v))
    expect = data.get("expect", "unknown")
    if expect not in ("colorable", "uncolorable", "unknown"):
        raise ValueError(f"bad 'expect' value {expect!r}")
    return RaySet(dim, rays, float(data.get("tol", 1e-9)), str(data.get("name", "")), expect)


def load_catalog(path) -> RaySet:
    """Load a ray catalog from a JSON file, or a bundled one by name."""
    if str(path) in BUNDLED_CATALOGS:
        text = resources.files("nogo.data").joinpath(BUNDLED_CATALOGS[str(path)]).read_text()
    else:
        text = Path(path).read_text()
    return catalog_from_dict(json.loads(text))


@dataclass(frozen=True)
class Clause:
    kind: str
    variables: tuple[int, ...]

    def violated(self, values) -> bool:
        ones = sum(values[v] for v in self.variables)
        if self.kind == EXACTLY_ONE:
            return ones != 1
        return ones > 1


@dataclass
class ValueConstraintSystem:
    """Boolean variables, one per projection, plus their clauses.

    ``order`` is the branching order used by both search methods: most
    basis memberships first, ties broken by index.
    """

    nvars: int
    clauses: list[Clause]
    order: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.order:
            counts = [0] * self.nvars
            for c in self.clauses:
                if c.kind != PAIR:
                    for v in c.variables:
                        counts[v] += 1
            self.order = sorted(range(self.nvars), key=lambda v: (-counts[v], v))

    def of_kind(self, kind) -> list[Clause]:
        return [c for c in self.clauses if c.kind == kind]

    def first_violation(self, values) -> Clause | None:
        for c in self.clauses:
            if c.violated(values):
                return c
        return None

    def structure(self) -> tuple:
        return tuple((c.kind, c.variables) for c in self.clauses)


def compile_constraints(ps: ProjectionSet) -> ValueConstraintSystem:
    """Clauses for every orthogonal pair and every maximal orthogonal family.

    Clause order is deterministic: pair clauses sorted by index, then the
    maximal families in sorted order.
    """
    dup = ps._coincident_pair()
    if dup is not None:
        raise DuplicateRayError(*dup)
    g = ps.orthogonality_graph
    clauses = [Clause(PAIR, tuple(sorted((int(i), int(j))))) for i, j in g.edges()]
    clauses.sort(key=lambda c: c.variables)
    for basis in ps.bases:
        if ps.is_complete(basis):
            clauses.append(Clause(EXACTLY_ONE, basis))
        elif len(basis) > 1:
            clauses.append(Clause(AT_MOST_ONE, basis))
    return ValueConstraintSystem(len(ps), clauses)


class _Search:
    def __init__(self, vcs: ValueConstraintSystem, budget: int):
        self.vcs = vcs
        self.budget = budget
        self.nodes = 0
        self.watch: list[list[int]] = [[] for _ in range(vcs.nvars)]
        for k, c in enumerate(vcs.clauses):
            for v in c.variables:
                self.watch[v].append(k)

    def propagate(self, values: list, trail: list, queue: list) -> bool:
        """Unit propagation; returns False on conflict."""
        clauses = self.vcs.clauses
        while queue:
            v = queue.pop()
            for k in self.watch[v]:
                c = clauses[k]
                ones = [u for u in c.variables if values[u] == 1]
                if len(ones) > 1:
                    return False
                free = [u for u in c.variables if values[u] is None]
                if ones:
                    for u in free:
                        values[u] = 0
                        trail.append(u)
                        queue.append(u)
                elif c.kind == EXACTLY_ONE:
                    if not free:
                        return False
                    if len(free) == 1:
                        u = free[0]
                        values[u] = 1
                        trail.append(u)
                        queue.append(u)
        return True

    def solutions(self) -> Iterator[tuple[int, ...]]:
        """Satisfying assignments in lexicographic order along ``vcs.order``."""
        n = self.vcs.nvars
        values: list = [None] * n
        trail: list[int] = []
        for c in self.vcs.clauses:
            if c.kind == EXACTLY_ONE and len(c.variables) == 1:
                u = c.variables[0]
                if values[u] == 0:
                    return
                if values[u] is None:
                    values[u] = 1
                    trail.append(u)
        if not self.propagate(values, trail, list(trail)):
            return
        yield from self._dfs(values, 0)

    def _dfs(self, values, pos):
        order = self.vcs.order
        while pos < len(order) and values[order[pos]] is not None:
            pos += 1
        if pos == len(order):
            yield tuple(values)
            return
        v = order[pos]
        for val in (0, 1):
            self.nodes += 1
            if self.nodes > self.budget:
                raise BudgetExceeded(self.budget, self.nodes)
            trail = [v]
            values[v] = val
            if self.propagate(values, trail, [v]):
                yield from self._dfs(values, pos + 1)
            for u in trail:
                values[u] = None


def iter_value_maps(vcs: ValueConstraintSystem, budget: int = DEFAULT_BUDGET) -> Iterator[tuple[int, ...]]:
    """Enumerate every satisfying 0/1 assignment."""
    return _Search(vcs, budget).solutions()


def _exhaustive(vcs: ValueConstraintSystem, budget: int):
    n = vcs.nvars
    if n > EXHAUSTIVE_MAX_VARS:
        raise ValueError(f"exhaustive search is limited to {EXHAUSTIVE_MAX_VARS} variables, got {n}")
    total = 1 << n
    if total > budget:
        raise BudgetExceeded(budget, total)
    # column k of the bit matrix is variable order[k]; bit n-1-k of the index, so index order is lex order
    shifts = np.array([n - 1 - vcs.order.index(v) for v in range(n)], dtype=np.int64)
    chunk = 1 << min(n, 20)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int8)
        ok = np.ones(len(idx), dtype=bool)
        for c in vcs.clauses:
            s = bits[:, list(c.variables)].sum(axis=1)
            ok &= (s == 1) if c.kind == EXACTLY_ONE else (s <= 1)
        hits = np.flatnonzero(ok)
        if hits.size:
            return tuple(int(b) for b in bits[hits[0]])
    return None


def find_value_map(vcs: ValueConstraintSystem, method: str = "backtracking", budget: int = DEFAULT_BUDGET):
    """Lexicographically least satisfying assignment, or None if there is none.

    Both methods scan assignments in the same order, so they return the same
    assignment whenever one exists. Running out of ``budget`` raises
    :class:`BudgetExceeded`; it never yields None.
    """
    if method == "backtracking":
        return next(iter_value_maps(vcs, budget), None)
    if method == "exhaustive":
        return _exhaustive(vcs, budget)
    raise ValueError(f"unknown search method {method!r}")


def verify_value_map(ps_or_vcs, assignment) -> tuple[bool, Clause | None]:
    """Check an assignment against every clause; returns ``(ok, first violated clause)``."""
    vcs = ps_or_vcs if isinstance(ps_or_vcs, ValueConstraintSystem) else compile_constraints(ps_or_vcs)
    values = list(assignment)
    if isinstance(assignment, dict):
        if sorted(assignment) != list(range(vcs.nvars)):
            raise ValueError("assignment does not cover every variable")
        values = [assignment[i] for i in range(vcs.nvars)]
    if len(values) != vcs.nvars:
        raise ValueError(f"assignment has {len(values)} entries, expected {vcs.nvars}")
    if any(v not in (0, 1) for v in values):
        raise ValueError("assignment values must be 0 or 1")
    bad = vcs.first_violation(values)
    return bad is None, bad


def has_value_map(ps: ProjectionSet, method: str = "backtracking", budget: int = DEFAULT_BUDGET) -> bool:
    return find_value_map(compile_constraints(ps), method, budget) is not None


def _dedupe(rays: list[Ray]) -> list[Ray]:
    out: list[Ray] = []
    for r in rays:
        if not any(r == s for s in out):
            out.append(r)
    return out


def lift_step(rs: RaySet, frame=None) -> tuple[RaySet, dict]:
    """One step ``d -> d+1`` of the lifting construction.

    ``psi`` is the last frame vector; a copy of ``rs`` is placed in its
    orthogonal complement (first ``d`` frame vectors) and ``psi`` is
    adjoined. The same is repeated with ``psi'`` = first frame vector, whose
    complement is spanned by the remaining frame vectors. The union of the
    two families is returned with coincident rays merged.
    """
    d = rs.dim
    F = np.eye(d + 1, dtype=complex) if frame is None else np.asarray(frame, dtype=complex)
    if F.shape != (d + 1, d + 1) or not np.allclose(F.conj().T @ F, np.eye(d + 1), atol=1e-10):
        raise ValueError(f"frame must be a unitary of size {d + 1}")
    psi, psi2 = F[:, d], F[:, 0]
    first = [Ray(F[:, :d] @ r.vector) for r in rs.rays] + [Ray(psi)]
    second = [Ray(F[:, 1:] @ r.vector) for r in rs.rays] + [Ray(psi2)]
    rays = _dedupe(first + second)
    lifted = RaySet(d + 1, rays, rs.tol, f"{rs.name}+lift{d + 1}".lstrip("+"), "uncolorable")
    info = {"dim": d + 1, "first": len(first), "second": len(second), "union": len(rays),
            "psi_index": next(i for i, r in enumerate(rays) if r == Ray(psi)),
            "psi2_index": next(i for i, r in enumerate(rays) if r == Ray(psi2))}
    return lifted, info


def lift_dimension(rs: RaySet, target_dim: int, budget: int = DEFAULT_BUDGET) -> tuple[RaySet, list]:
    """Lift an uncolorable ray set to ``target_dim``, certifying every stage by search.

    Raises :class:`NotCertifiedError` if the input admits a value map.
    """
    if isinstance(target_dim, bool) or not isinstance(target_dim, (int, np.integer)):
        raise ValueError("target_dim must be an integer")
    if target_dim <= rs.dim:
        raise ValueError(f"target_dim {target_dim} must exceed the input dimension {rs.dim}")
    if find_value_map(compile_constraints(rs), budget=budget) is not None:
        raise NotCertifiedError("input ray set admits a value map; lifting needs an uncolorable set")
    steps = []
    cur = rs
    while cur.dim < target_dim:
        cur, info = lift_step(cur)
        if find_value_map(compile_constraints(cur), budget=budget) is not None:
            raise AssertionError(f"lifted set in dimension {cur.dim} admits a value map")
        steps.append(info)
    return cur, steps


def lift_first_half(rs: RaySet) -> RaySet:
    """The first family of a lift step alone: a copy of ``rs`` in psi-perp plus psi."""
    d = rs.dim
    F = np.eye(d + 1, dtype=complex)
    return RaySet(d + 1, [Ray(F[:, :d] @ r.vector) for r in rs.rays] + [Ray(F[:, d])], rs.tol)


def tensor_lift(ps: ProjectionSet, k: int) -> ProjectionSet:
    """Replace every projection ``P`` by ``P (x) I_k``."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if k == 1:
        return ps
    I = np.eye(k)
    return ProjectionSet(ps.dim * k, [np.kron(P, I) for P in ps.projectors], ps.tol,
                         f"{ps.name}(x)I{k}" if ps.name else "")


def standard_basis(dim: int) -> RaySet:
    return RaySet(dim, list(np.eye(dim)), name=f"standard{dim}", expect="colorable")
