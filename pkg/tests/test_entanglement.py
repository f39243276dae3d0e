import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boson_sculpting.engine import apply_sculpting
from boson_sculpting.entanglement import (
    EntanglementKind,
    LogicalState,
    bipartitions,
    classify,
    cut_matrix,
    fidelity_up_to_phase,
    ghz_target,
    kron,
    product_target,
    schmidt_rank,
    to_logical_state,
    type5_target,
    w_target,
)
from boson_sculpting.errors import ContractError
from boson_sculpting.fock import FockState, fourier_internal
from boson_sculpting.schemes import bell_scheme, qudit_ghz_scheme, w_scheme

PM = tuple(tuple(fourier_internal(2, k)) for k in range(2))


def gauss_rank(m: np.ndarray, pivot_tol: float = 1e-8) -> int:
    """Row reduction with partial pivoting; pivots at or below the threshold count as zero."""
    a = np.array(m, dtype=complex)
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        p = rank + int(np.argmax(np.abs(a[rank:, c])))
        if abs(a[p, c]) <= pivot_tol:
            continue
        a[[rank, p]] = a[[p, rank]]
        a[rank + 1:] -= np.outer(a[rank + 1:, c] / a[rank, c], a[rank])
        rank += 1
    return rank


def random_state(rng, N, d=2, sparsity=None) -> LogicalState:
    v = rng.normal(size=d ** N) + 1j * rng.normal(size=d ** N)
    if sparsity:
        v[rng.random(d ** N) < sparsity] = 0
        if not v.any():
            v[0] = 1
    return LogicalState(N, d, v / np.linalg.norm(v))


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def apply_local(s: LogicalState, party: int, u: np.ndarray) -> LogicalState:
    t = np.moveaxis(np.tensordot(u, s.tensor(), axes=([1], [party])), 0, party)
    return LogicalState(s.N, s.d, t.reshape(-1))


def corpus(rng):
    states = [ghz_target(N) for N in range(2, 6)] + [w_target(N) for N in range(3, 6)]
    states += [type5_target(), ghz_target(3, 3), kron(ghz_target(2), product_target([0])),
               kron(product_target([1]), ghz_target(3)), product_target([0, 1, 1])]
    states += [random_state(rng, N, sparsity=0.6) for N in (2, 3, 4) for _ in range(4)]
    return states


# -- logical readout ----------------------------------------------------------------------

def test_bell_logical():
    d = bell_scheme()
    s, p = to_logical_state(apply_sculpting(d.operator, d.initial_state()), 2, 2, PM)
    assert np.allclose(s.amps, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])
    assert p == pytest.approx(0.5)


def test_w3_logical():
    d = w_scheme(3)
    s, _ = to_logical_state(apply_sculpting(d.operator, d.initial_state()), 3, 2, PM, K=1)
    assert fidelity_up_to_phase(s, w_target(3)) == pytest.approx(1, abs=1e-12)


def test_qutrit_ghz_logical():
    d = qudit_ghz_scheme(3, 3)
    basis = [tuple(fourier_internal(3, k)) for k in range(3)]
    s, p = to_logical_state(apply_sculpting(d.operator, d.initial_state()), 3, 3, basis)
    want = np.zeros(27)
    for k in range(3):
        want[k * 9 + k * 3 + k] = 1 / math.sqrt(3)
    assert fidelity_up_to_phase(s, LogicalState(3, 3, want)) == pytest.approx(1, abs=1e-12)
    assert p == pytest.approx(1 / 9)


def test_logical_rejects_bunched_and_zero():
    bunched = FockState(2, 2, {((0, 0, 2),): 1 + 0j})
    with pytest.raises(ContractError):
        to_logical_state(bunched, 2, 2, PM)
    with pytest.raises(ContractError):
        to_logical_state(FockState(2, 2, {}), 2, 2, PM)


def test_logical_state_validation():
    with pytest.raises(ValueError):
        LogicalState(2, 2, [1, 1, 0, 0])
    with pytest.raises(ValueError):
        LogicalState(2, 2, [1, 0, 0])
    s = LogicalState.from_terms(2, 2, {"00": 1, (1, 1): 1})
    assert np.allclose(s.amps, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])


def test_logical_json_round_trip():
    s = type5_target()
    back = LogicalState.from_json(s.to_json())
    assert np.array_equal(back.amps, s.amps)


# -- classification ---------------------------------------------------------------------------

def test_bipartition_count():
    for N in range(2, 7):
        cuts = bipartitions(N)
        assert len(cuts) == 2 ** (N - 1) - 1
        assert all(0 in left for left, _ in cuts)


def test_classification_examples():
    assert classify(product_target([0, 0])).kind is EntanglementKind.FULLY_SEPARABLE
    c = classify(kron(ghz_target(2), product_target([0])))
    assert c.kind is EntanglementKind.PARTIALLY_SEPARABLE
    assert c.witnesses == (((0, 1), (2,)),)
    for s in [ghz_target(N) for N in range(2, 7)] + [w_target(N) for N in range(3, 6)] + [type5_target()]:
        assert classify(s).kind is EntanglementKind.GENUINE
        assert classify(s).witnesses == ()


def test_classify_needs_two_parties():
    with pytest.raises(ValueError):
        classify(product_target([0]))


def test_local_unitary_invariance():
    rng = np.random.default_rng(11)
    states = corpus(rng)
    for trial in range(100):
        s = states[trial % len(states)]
        party = int(rng.integers(s.N))
        t = apply_local(s, party, random_unitary(rng, s.d))
        assert classify(t).kind is classify(s).kind


def test_schmidt_rank_matches_elimination_oracle():
    rng = np.random.default_rng(5)
    for s in corpus(rng):
        for left, right in bipartitions(s.N):
            assert schmidt_rank(s, left, right) == gauss_rank(cut_matrix(s, left, right))


@given(st.integers(2, 4), st.integers(0, 2 ** 31), st.floats(0, 0.9))
def test_schmidt_rank_oracle_property(N, seed, sparsity):
    s = random_state(np.random.default_rng(seed), N, sparsity=sparsity)
    for left, right in bipartitions(N):
        assert schmidt_rank(s, left, right) == gauss_rank(cut_matrix(s, left, right))


# -- fidelity --------------------------------------------------------------------------------------

def test_fidelity_examples():
    x = type5_target()
    assert fidelity_up_to_phase(x, x) == pytest.approx(1)
    assert fidelity_up_to_phase(x, LogicalState(3, 2, x.amps * np.exp(0.7j))) == pytest.approx(1)
    assert fidelity_up_to_phase(ghz_target(3), w_target(3)) == pytest.approx(0, abs=1e-15)
    with pytest.raises(ValueError):
        fidelity_up_to_phase(ghz_target(2), ghz_target(3))


@given(st.integers(1, 4), st.integers(0, 2 ** 31), st.integers(0, 2 ** 31))
def test_fidelity_symmetric_and_bounded(N, s1, s2):
    a = random_state(np.random.default_rng(s1), N)
    b = random_state(np.random.default_rng(s2), N)
    f = fidelity_up_to_phase(a, b)
    assert abs(f - fidelity_up_to_phase(b, a)) <= 1e-12
    assert -1e-12 <= f <= 1 + 1e-12


# -- standard targets --------------------------------------------------------------------------------

def test_targets():
    assert np.allclose(ghz_target(2, 2).amps, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])
    w = w_target(3).nonzero_terms()
    assert set(w) == {(0, 0, 1), (0, 1, 0), (1, 0, 0)}
    assert all(abs(a - 1 / math.sqrt(3)) < 1e-15 for a in w.values())
    t5 = type5_target().nonzero_terms()
    assert set(t5) == {(0, 0, 0), (1, 0, 0), (1, 0, 1), (1, 1, 0), (1, 1, 1)}
    assert all(abs(a - 1 / math.sqrt(5)) < 1e-15 for a in t5.values())


def test_kron_matches_numpy():
    a, b = w_target(3), ghz_target(2)
    assert np.allclose(kron(a, b).amps, np.kron(a.amps, b.amps))
    assert list(itertools.islice(kron(a, b).nonzero_terms(), 1))[0] == (0, 0, 1, 0, 0)
