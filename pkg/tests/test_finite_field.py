import itertools

import pytest
from hypothesis import given, strategies as st

from conftest import poly_mulmod
from sicmub.errors import (
    InverseOfZero,
    MixedFields,
    NonPrimeP,
    ReducibleModulus,
    SizeTooLarge,
)
from sicmub.finite_field import (
    FieldSpec,
    default_modulus,
    field_arith,
    field_trace,
    is_irreducible,
    make_field,
)

SMALL_FIELDS = [(2, 1), (3, 1), (5, 1), (7, 1), (2, 2), (2, 3), (3, 2), (2, 4), (2, 5), (5, 2), (7, 2), (2, 6), (3, 3)]


def test_prime_field_has_three_elements():
    f = make_field(3)
    assert f.size == 3
    assert [e.index for e in f.elements()] == [0, 1, 2]
    assert f.element_order[0] == (0,) and f.element_order[1] == (1,)


def test_gf9_x_squared(gf9):
    x = gf9([0, 1])
    assert (x * x) == gf9(2)


def test_guards():
    with pytest.raises(NonPrimeP):
        make_field(4)
    with pytest.raises(ReducibleModulus):
        make_field(3, 2, [2, 0, 1])  # x^2 + 2 = (x - 1)(x + 1)
    with pytest.raises(ReducibleModulus):
        make_field(3, 2, [1, 0, 2])  # not monic
    with pytest.raises(SizeTooLarge):
        make_field(3, 4)


def test_arith_examples(gf3, gf9):
    assert field_arith("add", gf3(1), gf3(2)) == gf3(0)
    assert field_arith("inv", gf3(2)) == gf3(2)
    assert field_arith("inv", gf9([0, 1])) == gf9([0, 2])
    with pytest.raises(InverseOfZero):
        gf3(0).inverse()
    with pytest.raises(ZeroDivisionError):
        gf3(1) / gf3(0)
    with pytest.raises(MixedFields):
        field_arith("add", gf3(1), make_field(5)(1))


def test_trace_examples(gf3, gf9):
    assert field_trace(gf3(2)) == 2
    assert field_trace(gf9(1)) == 2
    assert field_trace(gf9([0, 1])) == 0


def test_default_modulus_is_smallest_irreducible():
    assert default_modulus(3, 2) == (1, 0, 1)
    assert default_modulus(2, 2) == (1, 1, 1)
    assert default_modulus(5, 1) == (0, 1)
    assert make_field(3, 2) == make_field(3, 2, [1, 0, 1])


def test_irreducibility_against_root_count():
    # degree 2 and 3 polynomials are irreducible iff they have no root
    for p in (2, 3, 5):
        for n in (2, 3):
            for low in itertools.product(range(p), repeat=n):
                poly = list(low) + [1]
                has_root = any(sum(c * x**i for i, c in enumerate(poly)) % p == 0 for x in range(p))
                assert is_irreducible(poly, p) == (not has_root)


@pytest.mark.parametrize("p,n", SMALL_FIELDS)
def test_tables_match_polynomial_oracle(p, n):
    f = make_field(p, n)
    for a, b in itertools.product(f.elements(), repeat=2):
        want_add = [(x + y) % p for x, y in zip(a.coeffs, b.coeffs)]
        assert list((a + b).coeffs) == want_add
        assert list((a * b).coeffs) == poly_mulmod(list(a.coeffs), list(b.coeffs), list(f.modulus), p)


@pytest.mark.parametrize("p,n", SMALL_FIELDS)
def test_trace_is_sum_of_frobenius_images(p, n):
    f = make_field(p, n)
    for a in f.elements():
        total = f(0)
        for i in range(n):
            total = total + a ** (p**i)
        # the sum lies in the prime subfield
        assert total.coeffs[1:] == (0,) * (n - 1)
        assert field_trace(a) == total.coeffs[0]


@pytest.mark.parametrize("p,n", SMALL_FIELDS)
def test_trace_linear_and_surjective(p, n):
    f = make_field(p, n)
    els = f.elements()
    for a, b in itertools.product(els, repeat=2):
        assert field_trace(a + b) == (field_trace(a) + field_trace(b)) % p
    for c in range(p):
        for a in els:
            assert field_trace(f(c) * a) == c * field_trace(a) % p
    assert {field_trace(a) for a in els} == set(range(p))


@pytest.mark.parametrize("p,n", SMALL_FIELDS)
def test_multiplicative_group_is_cyclic(p, n):
    f = make_field(p, n)
    q = f.size
    nonzero = {a.index for a in f.elements()[1:]}
    gens = [g for g in f.elements()[1:] if {(g**k).index for k in range(q - 1)} == nonzero]
    assert gens


@pytest.mark.parametrize("p,n", SMALL_FIELDS)
def test_inverse_table(p, n):
    f = make_field(p, n)
    for a in f.elements()[1:]:
        assert (a * a.inverse()) == f(1)


def test_half_needs_odd_characteristic():
    assert make_field(5).half() == 3
    with pytest.raises(InverseOfZero):
        make_field(2).half()


def test_json_round_trip(gf9):
    data = gf9.to_json()
    assert data == {"p": 3, "n": 2, "modulus": [1, 0, 1]}
    assert FieldSpec.from_json(data) == gf9
    assert gf9([2, 1]).to_json() == [2, 1]


@given(st.sampled_from(SMALL_FIELDS), st.data())
def test_field_axioms(pn, data):
    f = make_field(*pn)
    idx = st.integers(0, f.size - 1)
    a, b, c = (f.elements()[data.draw(idx)] for _ in range(3))
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + (-a) == f(0)
    assert a - b == a + (-b)
