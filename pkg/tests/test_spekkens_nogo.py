import numpy as np
import pytest

from nogo.operator_core import PauliForm, pauli_to_operator
from nogo.spekkens_nogo import (
    FAMILIES,
    FiniteRepresentationCandidate,
    MalformedCandidate,
    PreconditionError,
    confirms,
    mu_value,
    pauli_trace,
    quantum_candidate,
    random_candidate,
    refute,
    refute_by_chain,
    satisfied_families,
    verify_candidate,
    xi_value,
)


def single_point(C=1.0, A=(0, 0, 0), B=(0, 0, 0)):
    return FiniteRepresentationCandidate([1.0], [A], [B], [C])


def test_mu_xi_examples(rng):
    cand = random_candidate(rng, 6, "N1")
    for lam in range(6):
        assert mu_value([0, 0, 0], cand, lam) == cand.C[lam]
        assert xi_value(1, [0, 0, 0], cand, lam) == 1
        assert xi_value(0, [0, 0, 0], cand, lam) == 0
    with pytest.raises(IndexError):
        mu_value([0, 0, 0], cand, 6)


def test_pauli_trace_examples():
    assert pauli_trace([0, 0, 1], 0.5, [0, 0, 0.5]) == 1
    assert pauli_trace([0.3, -0.2, 0.1], 1, [0, 0, 0]) == 1
    assert pauli_trace([0, 0, 0], 0.3, [0.1, 0.2, 0]) == 0.3
    with pytest.raises(ValueError):
        pauli_trace([0, 0, 1.5], 0.5, [0, 0, 0])
    with pytest.raises(ValueError):
        pauli_trace([0, 0, 1], 0.1, [0, 0, 0.5])


def test_pauli_trace_matches_dense(rng):
    for _ in range(200):
        x = rng.standard_normal(3)
        x *= rng.uniform() / np.linalg.norm(x)
        r = rng.uniform(0, 0.5)
        m = rng.uniform(r, 1 - r)
        p = rng.standard_normal(3)
        p *= r / np.linalg.norm(p)
        rho = pauli_to_operator(PauliForm.state(x), "state")
        E = pauli_to_operator(PauliForm.effect(m, p), "effect")
        assert abs(pauli_trace(x, m, p) - np.trace(rho @ E).real) <= 1e-10


def test_verify_examples():
    rep = verify_candidate(single_point())
    assert rep.violated == "E2" and rep.location == (0, 0) and rep.magnitude == pytest.approx(1)
    rep = verify_candidate(single_point(C=-1.0))
    assert rep.violated == "N2" and rep.location == (0,)


def test_malformed_candidate():
    with pytest.raises(MalformedCandidate):
        FiniteRepresentationCandidate([1.0, 0.5], [[0, 0, 0]], [[0, 0, 0]], [1.0])
    with pytest.raises(MalformedCandidate):
        FiniteRepresentationCandidate([-1.0], [[0, 0, 0]], [[0, 0, 0]], [1.0])
    with pytest.raises(MalformedCandidate):
        FiniteRepresentationCandidate([1.0], [[0, 0]], [[0, 0, 0]], [1.0])


def test_bundled_sample_violates_e2():
    rep = verify_candidate(FiniteRepresentationCandidate.load("sample"))
    assert rep.violated == "E2"


@pytest.mark.parametrize("drop", ["N1", "N2", "E2", "E5"])
def test_generators_satisfy_the_other_five(rng, drop):
    # E5 uses +/- pairs, so it needs at least three pairs for E2 to be solvable
    for n in (6, 9, 20, 64):
        cand = random_candidate(rng, n, drop)
        assert satisfied_families(cand) == set(FAMILIES) - {drop}
        rep = verify_candidate(cand)
        assert rep is not None and rep.violated == drop
        assert confirms(cand, rep)


@pytest.mark.parametrize("drop", FAMILIES)
def test_never_pass(rng, drop):
    for _ in range(200):
        cand = random_candidate(rng, int(rng.integers(1, 65)), drop)
        rep = verify_candidate(cand)
        assert rep is not None
        assert confirms(cand, refute(cand))


def test_chain_reports_n1_when_e2_holds(rng):
    for _ in range(50):
        cand = random_candidate(rng, int(rng.integers(4, 40)), "N1")
        rep = refute_by_chain(cand)
        assert rep.violated == "N1"
        assert cand.C[rep.location[0]] > 0
        assert confirms(cand, rep)


def test_chain_magnitude_at_least_sqrt3_minus_1():
    # eight sign patterns B = sqrt(3) s, A = s / sqrt(3), C = 1: every family holds except N1
    signs = np.array([[a, b, c] for a in (1, -1) for b in (1, -1) for c in (1, -1)], dtype=float)
    A = signs / np.sqrt(3)
    cand = FiniteRepresentationCandidate(np.full(8, 1 / 8), A, np.sqrt(3) * signs, np.linalg.norm(A, axis=1))
    assert satisfied_families(cand) == set(FAMILIES) - {"N1"}
    rep = refute_by_chain(cand)
    assert rep.violated == "N1" and rep.magnitude >= np.sqrt(3) - 1 - 1e-8
    assert confirms(cand, rep)


def test_chain_e5_precondition():
    with pytest.raises(PreconditionError) as info:
        refute_by_chain(single_point(C=0.0))
    assert info.value.report.violated == "E5"
    assert refute(single_point(C=0.0)).violated == "E5"


def test_chain_bound(rng):
    """Under N1, N2, E4, E5 the diagonal of E2 never exceeds 1 in absolute value."""
    for _ in range(200):
        cand = random_candidate(rng, int(rng.integers(2, 30)), "E2")
        diag = np.einsum("l,li,li->i", cand.weights, cand.B, cand.A)
        assert (np.abs(diag) <= cand.weights @ cand.C + 1e-12).all()


def test_quantum_candidate_refuted():
    for seed in range(5):
        cand = quantum_candidate(50, seed)
        rep = refute(cand)
        assert confirms(cand, rep)
        assert "N1" in satisfied_families(cand)


def test_json_round_trip(rng):
    cand = random_candidate(rng, 5, "E5")
    back = FiniteRepresentationCandidate.from_dict(cand.to_dict())
    assert np.array_equal(back.A, cand.A) and np.array_equal(back.weights, cand.weights)
