import itertools

import numpy as np
import pytest
from scipy.optimize import LinearConstraint, milp

from nogo.operator_core import Ray, random_unitary
from nogo.value_maps import (
    AT_MOST_ONE,
    EXACTLY_ONE,
    PAIR,
    BudgetExceeded,
    DuplicateRayError,
    NotCertifiedError,
    RaySet,
    compile_constraints,
    find_value_map,
    iter_value_maps,
    lift_dimension,
    lift_first_half,
    lift_step,
    load_catalog,
    standard_basis,
    tensor_lift,
    verify_value_map,
)


def oracle_colorable_bruteforce(rays, dim, tol=1e-9):
    """Independent check: enumerate every 0/1 assignment against the Gram matrix."""
    V = np.array([np.asarray(r, dtype=complex) / np.linalg.norm(r) for r in rays])
    n = len(V)
    orth = np.abs(V.conj() @ V.T) <= tol
    pairs = [(i, j) for i, j in itertools.combinations(range(n), 2) if orth[i, j]]
    bases = [c for c in itertools.combinations(range(n), dim)
             if all(orth[i, j] for i, j in itertools.combinations(c, 2))]
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n)) & 1
    ok = np.ones(len(idx), dtype=bool)
    for i, j in pairs:
        ok &= (bits[:, i] & bits[:, j]) == 0
    for b in bases:
        ok &= bits[:, list(b)].sum(axis=1) == 1
    return bool(ok.any())


def oracle_colorable_milp(rays, dim, tol=1e-9):
    """Independent check by 0/1 integer feasibility."""
    V = np.array([np.asarray(r, dtype=complex) / np.linalg.norm(r) for r in rays])
    n = len(V)
    orth = np.abs(V.conj() @ V.T) <= tol
    rows, lo, hi = [], [], []
    for i, j in itertools.combinations(range(n), 2):
        if orth[i, j]:
            r = np.zeros(n); r[[i, j]] = 1
            rows.append(r); lo.append(0); hi.append(1)
    for c in itertools.combinations(range(n), dim):
        if all(orth[i, j] for i, j in itertools.combinations(c, 2)):
            r = np.zeros(n); r[list(c)] = 1
            rows.append(r); lo.append(1); hi.append(1)
    res = milp(np.zeros(n), constraints=LinearConstraint(np.array(rows), lo, hi),
               integrality=np.ones(n), bounds=(0, 1))
    return res.status == 0


def test_standard_basis_compiles_to_one_exactly_one():
    vcs = compile_constraints(standard_basis(3))
    assert vcs.of_kind(EXACTLY_ONE)[0].variables == (0, 1, 2)
    assert len(vcs.of_kind(EXACTLY_ONE)) == 1 and not vcs.of_kind(AT_MOST_ONE)


def test_noncomplete_pair_compiles_to_at_most_one():
    vcs = compile_constraints(RaySet(3, [[1, 0, 0], [0, 1, 0]]))
    assert [c.variables for c in vcs.of_kind(AT_MOST_ONE)] == [(0, 1)]
    assert not vcs.of_kind(EXACTLY_ONE)


def test_duplicate_rays_rejected():
    with pytest.raises(DuplicateRayError) as info:
        compile_constraints(RaySet(3, [[1, 0, 0], [0, 1, 0], [1j, 0, 0]]))
    assert info.value.indices == (0, 2)


def test_cabello_structure():
    rs = load_catalog("cabello18")
    vcs = compile_constraints(rs)
    assert rs.dim == 4 and len(rs) == 18
    assert len(vcs.of_kind(EXACTLY_ONE)) == 9
    assert all(len(c.variables) == 4 for c in vcs.of_kind(EXACTLY_ONE))
    # each ray in exactly two of the nine bases
    counts = np.zeros(18, dtype=int)
    for c in vcs.of_kind(EXACTLY_ONE):
        counts[list(c.variables)] += 1
    assert (counts == 2).all()


def test_cabello_uncolorable_against_oracle():
    rs = load_catalog("cabello18")
    assert oracle_colorable_bruteforce([r.vector for r in rs.rays], 4) is False
    vcs = compile_constraints(rs)
    assert find_value_map(vcs) is None
    assert find_value_map(vcs, "exhaustive") is None


def test_peres_uncolorable_against_milp_oracle():
    rs = load_catalog("peres33")
    assert rs.dim == 3 and len(rs) == 33
    assert oracle_colorable_milp([r.vector for r in rs.rays], 3) is False
    assert find_value_map(compile_constraints(rs)) is None


def test_milp_oracle_sees_colorable_set():
    assert oracle_colorable_milp(list(np.eye(3)), 3) is True


def test_standard_basis_has_value_map():
    vcs = compile_constraints(standard_basis(3))
    va = find_value_map(vcs)
    assert sorted(va) == [0, 0, 1]
    assert verify_value_map(vcs, va) == (True, None)
    assert va == find_value_map(vcs, "exhaustive")
    assert sorted(iter_value_maps(vcs)) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


@pytest.mark.parametrize(
    "va, ok, kind, variables",
    [((1, 0, 0), True, None, None), ((1, 1, 0), False, PAIR, (0, 1)), ((0, 0, 0), False, EXACTLY_ONE, (0, 1, 2))],
)
def test_verify_examples(va, ok, kind, variables):
    good, bad = verify_value_map(standard_basis(3), va)
    assert good is ok
    if not ok:
        assert (bad.kind, bad.variables) == (kind, variables)


def test_verify_rejects_incomplete_assignment():
    with pytest.raises(ValueError):
        verify_value_map(standard_basis(3), (1, 0))
    with pytest.raises(ValueError):
        verify_value_map(standard_basis(3), {0: 1, 1: 0})


def test_budget_is_distinct_from_none():
    vcs = compile_constraints(load_catalog("cabello18"))
    with pytest.raises(BudgetExceeded):
        find_value_map(vcs, budget=5)
    with pytest.raises(BudgetExceeded):
        find_value_map(vcs, "exhaustive", budget=1000)


def _random_rayset(rng, dim, n):
    """Random rays drawn from a small grid so orthogonality actually happens."""
    pool = [v for v in itertools.product((-1, 0, 1), repeat=dim) if any(v)]
    # keep one representative per ray
    reps = []
    for v in pool:
        if not any(Ray(v) == Ray(r) for r in reps):
            reps.append(v)
    pick = rng.choice(len(reps), size=min(n, len(reps)), replace=False)
    return RaySet(dim, [reps[k] for k in pick])


def test_backtracking_matches_exhaustive_and_oracle(rng):
    for _ in range(60):
        dim = int(rng.integers(3, 5))
        rs = _random_rayset(rng, dim, int(rng.integers(3, 17)))
        vcs = compile_constraints(rs)
        bt = find_value_map(vcs)
        ex = find_value_map(vcs, "exhaustive")
        assert bt == ex
        assert (bt is not None) == oracle_colorable_bruteforce([r.vector for r in rs.rays], dim)
        if bt is not None:
            assert verify_value_map(vcs, bt)[0]


def test_permutation_invariance(rng):
    base = load_catalog("cabello18")
    for _ in range(5):
        perm = rng.permutation(len(base))
        assert find_value_map(compile_constraints(base.permuted(perm))) is None
    for _ in range(20):
        rs = _random_rayset(rng, 3, 10)
        verdict = find_value_map(compile_constraints(rs)) is not None
        assert (find_value_map(compile_constraints(rs.permuted(rng.permutation(len(rs))))) is not None) == verdict


def test_hyperplane_set_accepts_all_zeros(rng):
    for dim in (3, 4):
        Q = random_unitary(dim, rng)[:, : dim - 1]
        rays = [Q @ (rng.standard_normal(dim - 1) + 1j * rng.standard_normal(dim - 1)) for _ in range(6)]
        rays += [Q[:, k] for k in range(dim - 1)]
        rs = RaySet(dim, rays)
        assert verify_value_map(rs, (0,) * len(rs))[0]
        assert find_value_map(compile_constraints(rs)) is not None


def test_lift_step_counts_and_certificate():
    rs = load_catalog("peres33")
    lifted, info = lift_step(rs)
    assert lifted.dim == 4 and info["union"] <= 2 * (len(rs) + 1)
    assert find_value_map(compile_constraints(lifted)) is None


def test_lift_first_half_forces_psi():
    rs = load_catalog("peres33")
    half = lift_first_half(rs)
    sols = list(iter_value_maps(compile_constraints(half)))
    assert len(sols) == 1
    assert sols[0][-1] == 1 and sum(sols[0]) == 1


def test_lift_dimension_to_five():
    rs = load_catalog("peres33")
    out, steps = lift_dimension(rs, 5)
    assert out.dim == 5 and len(steps) == 2
    prev = len(rs)
    for s in steps:
        assert s["union"] <= 2 * (prev + 1)
        prev = s["union"]


def test_lift_rejects_bad_input():
    with pytest.raises(NotCertifiedError):
        lift_dimension(standard_basis(3), 4)
    with pytest.raises(ValueError):
        lift_dimension(load_catalog("peres33"), 3)
    with pytest.raises(ValueError):
        lift_dimension(load_catalog("peres33"), 4.5)


def test_tensor_lift_same_structure():
    for name in ("standard3", "cabello18"):
        rs = load_catalog(name)
        vcs = compile_constraints(rs)
        assert tensor_lift(rs, 1) is rs
        big = tensor_lift(rs, 2)
        assert big.dim == 2 * rs.dim and set(big.ranks) == {2}
        bvcs = compile_constraints(big)
        assert bvcs.structure() == vcs.structure()
        assert (find_value_map(bvcs) is None) == (find_value_map(vcs) is None)
