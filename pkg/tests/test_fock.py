import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boson_sculpting.fock import (
    PRUNE_TOL,
    FockState,
    _build,
    apply_annihilation,
    apply_creation,
    basis_state,
    computational_internal,
    fourier_internal,
    inner_product,
    vacuum,
    zero_state,
)
from boson_sculpting.engine import maximally_symmetric_state

R2 = 1 / math.sqrt(2)


# -- strategies -------------------------------------------------------------------

def _cfg(spatial, d, counts):
    return tuple(sorted((j, s, n) for (j, s), n in counts.items() if n))


@st.composite
def fock_states(draw, spatial=2, d=2, max_terms=4, max_n=2):
    terms = {}
    for _ in range(draw(st.integers(1, max_terms))):
        counts = {(j, s): draw(st.integers(0, max_n)) for j in range(spatial) for s in range(d)}
        re = draw(st.floats(-1, 1, allow_nan=False))
        im = draw(st.floats(-1, 1, allow_nan=False))
        key = _cfg(spatial, d, counts)
        terms[key] = terms.get(key, 0) + complex(re, im)
    return _build(spatial, d, terms)


@st.composite
def unit_vectors(draw, d=2):
    parts = [complex(draw(st.floats(-1, 1, allow_nan=False)), draw(st.floats(-1, 1, allow_nan=False)))
             for _ in range(d)]
    v = np.array(parts)
    n = np.linalg.norm(v)
    if n < 1e-3:
        v = np.eye(d)[0].astype(complex)
    else:
        v = v / n
    return v


# -- construction -------------------------------------------------------------------

@pytest.mark.parametrize("n, d", [(2, 2), (3, 3)])
def test_vacuum_is_single_empty_config(n, d):
    v = vacuum(n, d)
    assert v.items() == [((), 1 + 0j)]
    assert inner_product(v, v) == pytest.approx(1.0)


@pytest.mark.parametrize("n, d", [(0, 2), (2, 1), (-1, 3)])
def test_vacuum_rejects_bad_dims(n, d):
    with pytest.raises(ValueError):
        vacuum(n, d)


def test_double_creation_has_sqrt2():
    s = apply_creation(apply_creation(vacuum(1, 2), 0, (1, 0)), 0, (1, 0))
    assert s.items() == [(((0, 0, 2),), pytest.approx(math.sqrt(2)))]


def test_symmetric_state_from_creations():
    s = vacuum(2, 2)
    for j in (1, 0):
        for lev in (1, 0):
            s = apply_creation(s, j, computational_internal(2, lev))
    assert s.allclose(maximally_symmetric_state(2, 2))
    assert len(s) == 1 and abs(s.items()[0][1] - 1) < 1e-15


def test_creation_is_linear_in_vector():
    s = apply_creation(vacuum(1, 2), 0, (R2, R2))
    assert dict(s.items()) == pytest.approx({((0, 0, 1),): R2, ((0, 1, 1),): R2})


# -- single-mode subtraction identities ----------------------------------------------

@pytest.mark.parametrize("j", [0, 1, 2])
@pytest.mark.parametrize("k, sign", [(0, 1), (1, -1)])
def test_subtraction_sign_identity(j, k, sign):
    sym = maximally_symmetric_state(3, 2)
    v = fourier_internal(2, k)
    got = apply_annihilation(sym, j, v)
    # remove the pair on mode j, put back one boson in state v
    rest = sym
    for lev in (0, 1):
        rest = apply_annihilation(rest, j, computational_internal(2, lev))
    want = apply_creation(rest, j, v).scaled(sign)
    assert got.max_abs_diff(want) <= 1e-12


@pytest.mark.parametrize("u, v", [(fourier_internal(2, 0), fourier_internal(2, 1)),
                                  ((1, 0), (1, 0)), ((0, 1), (0, 1))])
def test_pair_products_annihilate_the_pair(u, v):
    sym = maximally_symmetric_state(1, 2)
    out = apply_annihilation(apply_annihilation(sym, 0, v), 0, u)
    assert out.is_zero()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_repeated_level_annihilation_vanishes(n):
    sym = maximally_symmetric_state(1, 2)
    for lev in (0, 1):
        s = sym
        for _ in range(n):
            s = apply_annihilation(s, 0, computational_internal(2, lev))
        assert s.is_zero()


def test_qutrit_identities():
    f = [fourier_internal(3, k) for k in range(3)]
    sym, vac = maximally_symmetric_state(1, 3), vacuum(1, 3)
    two = lambda u, v: apply_annihilation(apply_annihilation(sym, 0, v), 0, u)
    assert two(f[0], f[0]).max_abs_diff(apply_creation(vac, 0, f[0]).scaled(2 / math.sqrt(3))) <= 1e-12
    assert two(f[0], f[2]).max_abs_diff(apply_creation(vac, 0, f[1]).scaled(-1 / math.sqrt(3))) <= 1e-12
    assert two(f[2], f[2]).max_abs_diff(apply_creation(vac, 0, f[2]).scaled(2 / math.sqrt(3))) <= 1e-12


@pytest.mark.parametrize("d", [3, 4])
def test_qudit_lowering_identities(d):
    lo, hi = fourier_internal(d, 0), fourier_internal(d, d - 1)
    sym, vac = maximally_symmetric_state(1, d), vacuum(1, d)

    def apply(l, m):
        s = sym
        for _ in range(m):
            s = apply_annihilation(s, 0, hi)
        for _ in range(l):
            s = apply_annihilation(s, 0, lo)
        return s

    for l in range(d):
        c = (-1) ** (d - 1 - l) * math.factorial(l) * math.factorial(d - 1 - l) / math.sqrt(d) ** (d - 2)
        want = apply_creation(vac, 0, fourier_internal(d, d - 1 - l)).scaled(c)
        assert apply(l, d - 1 - l).max_abs_diff(want) <= 1e-12
    for m in range(1, d):
        assert apply(m, d - m).is_zero() or apply(m, d - m).norm() <= 1e-12


# -- commutation and inner products ------------------------------------------------------

@given(fock_states(), unit_vectors(), unit_vectors(), st.integers(0, 1))
def test_commutator_is_overlap_times_identity(s, u, v, j):
    ab = apply_annihilation(apply_creation(s, j, u), j, v)
    ba = apply_creation(apply_annihilation(s, j, v), j, u)
    overlap = complex(np.vdot(v, u))
    assert (ab - ba).max_abs_diff(s.scaled(overlap)) <= 1e-9


@given(fock_states(), fock_states(), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_inner_product_sesquilinear(a, b, c):
    assert abs(inner_product(a.scaled(c), b) - c.conjugate() * inner_product(a, b)) <= 1e-9
    assert abs(inner_product(a, b.scaled(c)) - c * inner_product(a, b)) <= 1e-9
    assert abs(inner_product(a, b) - inner_product(b, a).conjugate()) <= 1e-12
    xx = inner_product(a, a)
    assert xx.real >= 0 and abs(xx.imag) <= 1e-12


def test_inner_product_examples():
    sym = maximally_symmetric_state(2, 2)
    assert inner_product(sym, sym) == pytest.approx(1)
    assert inner_product(vacuum(4, 2).with_spatial(4), vacuum(4, 2)) == pytest.approx(1)
    assert inner_product(FockState(2, 2, {(): 1 + 0j}), sym) == 0


def test_inner_product_dim_mismatch():
    with pytest.raises(ValueError):
        inner_product(vacuum(2, 2), vacuum(3, 2))


@given(fock_states(max_terms=6), fock_states(max_terms=6))
def test_pruning_bounded_effect_on_inner_products(a, b):
    tiny = {c: 1e-13 for c in b.terms}
    noisy = dict(b.terms)
    for c, x in tiny.items():
        noisy[c] = noisy[c] + x
    pruned_small = _build(b.spatial, b.internal, tiny)
    assert pruned_small.is_zero()
    bound = (len(a) + len(b)) * PRUNE_TOL
    assert abs(inner_product(a, _build(b.spatial, b.internal, noisy)) - inner_product(a, b)) <= \
        bound * max(1.0, a.norm())


# -- Fourier basis ---------------------------------------------------------------------

def test_fourier_examples():
    assert np.allclose(fourier_internal(2, 0), [R2, R2])
    assert np.allclose(fourier_internal(2, 1), [R2, -R2])
    w = cmath.exp(2j * math.pi / 3)
    assert np.allclose(fourier_internal(3, 1), np.array([1, w, w * w]) / math.sqrt(3))


@pytest.mark.parametrize("d, k", [(2, 2), (3, -1), (4, 7)])
def test_fourier_index_range(d, k):
    with pytest.raises(ValueError):
        fourier_internal(d, k)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_fourier_basis_orthonormal(d):
    m = np.array([fourier_internal(d, k) for k in range(d)])
    assert np.allclose(m.conj() @ m.T, np.eye(d))


# -- values and serialization ---------------------------------------------------------------

def test_zero_state_is_a_value():
    z = zero_state(2, 2)
    assert z.is_zero() and z.norm() == 0
    assert apply_annihilation(vacuum(2, 2), 0, (1, 0)).is_zero()


def test_basis_state_amplitudes():
    s = basis_state(2, 2, {(0, 0): 2, (1, 1): 1})
    assert s.items() == [(((0, 0, 2), (1, 1, 1)), 1 + 0j)]


@given(fock_states(spatial=3, d=3, max_terms=5))
def test_json_round_trip_and_ordering(s):
    data = s.to_json()
    back = FockState.from_json(data)
    assert back.max_abs_diff(s) == 0
    assert back.to_json() == data
    occs = [tuple(map(tuple, t["occ"])) for t in data["terms"]]
    assert occs == sorted(occs)


def test_identical_operations_identical_terms():
    def run():
        s = maximally_symmetric_state(3, 2)
        for j in range(3):
            s = apply_annihilation(s, j, fourier_internal(2, j % 2))
        return s.to_json()
    assert run() == run()


def test_braket_six_digits():
    s = apply_creation(vacuum(1, 2), 0, (1 / math.sqrt(3), math.sqrt(2 / 3)))
    assert "0.57735" in s.to_braket() and "0.816497" in s.to_braket()
