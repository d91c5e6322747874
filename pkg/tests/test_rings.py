import pytest
from hypothesis import given, settings, strategies as st

from ramanujan_bigraphs.errors import RamifiedPrime, ZeroElement
from ramanujan_bigraphs.rings import (EISENSTEIN, GAUSS, MUMFORD7, QuadInt, ideal_valuation,
                                      p_divides_matrix, qi_arith, qi_norm_conj, qmat_identity,
                                      reduce_mod_q)

RINGS = [EISENSTEIN, GAUSS, MUMFORD7]
coord = st.integers(-50, 50)


def qi(a, b, ring=EISENSTEIN):
    return QuadInt(a, b, ring)


def test_omega_squared():
    w = qi(0, 1)
    assert qi_arith(w, w, "mul") == qi(-1, -1)


def test_lambda_times_conjugate():
    lam = qi(0, 1, MUMFORD7)
    assert qi_arith(lam, lam.conj(), "mul") == qi(2, 0, MUMFORD7)


def test_i_squared():
    i = qi(0, 1, GAUSS)
    assert i * i == qi(-1, 0, GAUSS)


@pytest.mark.parametrize("x, norm, conj", [
    (qi(0, 1), 1, qi(-1, -1)),
    (qi(3, 1), 7, qi(2, -1)),
    (qi(1, 1, GAUSS), 2, qi(1, -1, GAUSS)),
])
def test_norm_conj_examples(x, norm, conj):
    assert qi_norm_conj(x) == (norm, conj)


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.label)
@settings(max_examples=300, deadline=None)
@given(a=coord, b=coord, c=coord, d=coord)
def test_norm_is_multiplicative(ring, a, b, c, d):
    x, y = qi(a, b, ring), qi(c, d, ring)
    assert (x * y).norm() == x.norm() * y.norm()
    assert (x * y).conj() == x.conj() * y.conj()
    n, xc = qi_norm_conj(x)
    assert x * xc == qi(n, 0, ring)
    assert n >= 0 and (n == 0) == x.is_zero()


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.label)
@given(a=coord, b=coord)
def test_conjugation_is_an_involution(ring, a, b):
    x = qi(a, b, ring)
    assert x.conj().conj() == x


def test_omega_mod_7_uses_smallest_root():
    assert reduce_mod_q(qi(0, 1), 7).code == 2


def test_omega_mod_5_is_the_extension_generator():
    r = reduce_mod_q(qi(0, 1), 5)
    assert r.field.degree == 2 and r.coords == (0, 1)


def test_omega_mod_2_generates_f4():
    r = reduce_mod_q(qi(0, 1), 2)
    assert r.field.size == 4
    assert r * r * r == reduce_mod_q(qi(1, 0), 2) and r.code != 1


@pytest.mark.parametrize("ring, q", [(EISENSTEIN, 3), (GAUSS, 2), (MUMFORD7, 7)])
def test_ramified_reduction_rejected(ring, q):
    with pytest.raises(RamifiedPrime):
        reduce_mod_q(qi(1, 1, ring), q)


@pytest.mark.parametrize("ring, q", [(EISENSTEIN, 2), (EISENSTEIN, 5), (EISENSTEIN, 7),
                                     (GAUSS, 3), (GAUSS, 5), (MUMFORD7, 3), (MUMFORD7, 11)])
@settings(max_examples=120, deadline=None)
@given(a=coord, b=coord, c=coord, d=coord)
def test_reduction_is_a_ring_homomorphism(ring, q, a, b, c, d):
    x, y = qi(a, b, ring), qi(c, d, ring)
    assert reduce_mod_q(x * y, q) == reduce_mod_q(x, q) * reduce_mod_q(y, q)
    assert reduce_mod_q(x + y, q) == reduce_mod_q(x, q) + reduce_mod_q(y, q)


@pytest.mark.parametrize("ring, q", [(EISENSTEIN, 2), (EISENSTEIN, 5), (GAUSS, 3), (MUMFORD7, 3)])
@given(a=coord, b=coord)
def test_frobenius_is_conjugation_for_inert_q(ring, q, a, b):
    x = qi(a, b, ring)
    assert reduce_mod_q(x, q).frobenius() == reduce_mod_q(x.conj(), q)


def test_p_divides_matrix():
    five_i = qmat_identity(5)
    assert p_divides_matrix(five_i, 5)
    assert not p_divides_matrix(qmat_identity(1), 5)
    m = five_i.copy()
    m[0, 1] = (0, 5)  # 5 omega
    assert p_divides_matrix(m, 5)


def test_valuation_examples():
    assert ideal_valuation(qi(-2, 1), 7, "p") == 1
    assert ideal_valuation(qi(7, 0), 7, "p") == 1
    assert ideal_valuation(qi(7, 0), 7, "conj") == 1
    assert ideal_valuation(qi(3, 0), 7, "p") == 0
    with pytest.raises(ZeroElement):
        ideal_valuation(qi(0, 0), 7)


def _vp(m, p):
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v


@pytest.mark.parametrize("ring, p", [(EISENSTEIN, 7), (EISENSTEIN, 13), (GAUSS, 5), (MUMFORD7, 11)])
@settings(max_examples=125, deadline=None)
@given(a=coord, b=coord)
def test_valuations_add_up_to_norm_valuation(ring, p, a, b):
    x = qi(a, b, ring)
    if x.is_zero():
        return
    total = ideal_valuation(x, p, "p") + ideal_valuation(x, p, "conj")
    assert total == _vp(x.norm(), p)
