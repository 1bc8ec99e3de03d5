import itertools

import pytest
import sympy
from hypothesis import given, strategies as st
from sympy.functions.combinatorial.numbers import stirling
from sympy.polys.specialpolys import symmetric_poly

from artifact.groebner import groebner, standard_monomials
from artifact.poly import MonomialOrder
from artifact.symcomb import (
    Partition,
    binomial,
    check_sigma_h_relation,
    complete_h,
    default_context,
    elementary_sigma,
    h_partial,
    multinomial,
    multiset_coeff,
    phi,
    phi_basis,
    prop_basis_by_substitution,
    prop_basis_expansion,
    sigma_lambda,
    stirling2,
    stirling2_by_compositions,
    tilde_basis_map,
    tilde_context,
    verify_alternating_multiset_sum,
    verify_stirling_alternating,
)


def _sym(f, n):
    xs = sympy.symbols(f"x1:{n + 1}")
    return sympy.expand(sympy.sympify(f.to_str().replace("^", "**"), locals={str(x): x for x in xs}))


def test_partition_normalizes_and_validates():
    assert Partition([3, 1, 0, 0]) == (3, 1)
    assert Partition([2, 2, 1]).size == 5
    with pytest.raises(ValueError):
        Partition([1, 2])
    with pytest.raises(ValueError):
        Partition([2, -1])


def test_symmetric_examples():
    c2, c3 = default_context(2), default_context(3)
    assert elementary_sigma(2, 1, c2) == c2.parse("x1 + x2")
    assert elementary_sigma(3, 2, c3) == c3.parse("x1*x2 + x1*x3 + x2*x3")
    assert sigma_lambda(2, [2, 1], c2) == c2.parse("x1*x2*(x1 + x2)")
    assert complete_h(2, 2, c2) == c2.parse("x1^2 + x1*x2 + x2^2")
    assert complete_h(3, 0, c3) == c3.const(1)
    assert h_partial(2, 1, c2) == c2.parse("x1^2")
    with pytest.raises(ValueError):
        elementary_sigma(2, 3)
    with pytest.raises(ValueError):
        complete_h(2, -1)


@pytest.mark.parametrize("n", range(1, 6))
def test_elementary_and_complete_match_sympy(n):
    xs = sympy.symbols(f"x1:{n + 1}")
    for l in range(0, n + 1):
        assert _sym(elementary_sigma(n, l), n) == sympy.expand(symmetric_poly(l, *xs))
    for l in range(0, 5):
        expected = sum(sympy.prod(c) for c in itertools.combinations_with_replacement(xs, l))
        assert _sym(complete_h(n, l), n) == sympy.expand(expected)


def test_phi_examples():
    c = default_context(2)
    assert phi(2, 1, 1, c) == c.parse("x1 + x2")
    assert phi(2, 2, 2, c) == c.parse("x1^2")
    assert phi(2, 2, 1, c) == complete_h(2, 2, c)
    with pytest.raises(ValueError):
        phi(2, 1, 2)


def test_coefficient_examples():
    assert multiset_coeff(3, 2) == 6
    assert multiset_coeff(2, -1) == 0
    assert multinomial(4, 2, 1, 1) == 12
    assert multinomial(4, 2, 1) == 0
    assert stirling2(4, 2) == 7
    assert binomial(3, 5) == 0 and binomial(3, -1) == 0


@given(st.integers(0, 30), st.integers(-3, 33))
def test_binomial_matches_sympy(n, k):
    assert binomial(n, k) == (int(sympy.binomial(n, k)) if 0 <= k <= n else 0)


@given(st.integers(0, 20), st.integers(0, 20))
def test_stirling_matches_sympy_and_compositions(n, m):
    assert stirling2(n, m) == int(stirling(n, m, kind=2))
    if m >= 1:
        assert stirling2_by_compositions(n, m) == sympy.factorial(m) * stirling2(n, m)


def _set_partitions(n):
    if n == 0:
        yield []
        return
    for part in _set_partitions(n - 1):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [n]] + part[i + 1:]
        yield part + [[n]]


@pytest.mark.parametrize("n", range(1, 8))
def test_stirling_counts_set_partitions(n):
    counts = {}
    for p in _set_partitions(n):
        counts[len(p)] = counts.get(len(p), 0) + 1
    assert all(stirling2(n, m) == counts.get(m, 0) for m in range(n + 1))


def test_identity_examples():
    assert 1 * 3 - 2 * 2 + 1 * 1 == 0 and verify_alternating_multiset_sum(2, 2)
    assert -1 + 6 - 6 == -1 and verify_stirling_alternating(3)
    assert all(verify_alternating_multiset_sum(1, m) for m in range(1, 20))


def test_identity_grids():
    assert all(verify_alternating_multiset_sum(n, m) for n in range(1, 13) for m in range(1, 13))
    assert all(verify_stirling_alternating(n) for n in range(1, 16))


def test_sigma_h_relation_grid():
    assert check_sigma_h_relation(2, 2) and check_sigma_h_relation(3, 2) and check_sigma_h_relation(1, 1)
    assert all(check_sigma_h_relation(n, m) for n in range(1, 7) for m in range(1, n + 1))
    with pytest.raises(ValueError):
        check_sigma_h_relation(2, 3)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_phi_is_reduced_basis_of_complete_ideal(n):
    ctx = default_context(n)
    order = MonomialOrder.lex(ctx)
    G = groebner([complete_h(n, k, ctx) for k in range(1, n + 1)], order)
    assert sorted(G.strings()) == sorted(f.to_str(order) for f in phi_basis(n, ctx))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_phi_quotient_rank_is_factorial(n):
    ctx = default_context(n)
    G = groebner(phi_basis(n, ctx), MonomialOrder.lex(ctx))
    assert len(standard_monomials(G, n * n)) == sympy.factorial(n)


def test_tilde_map_shape():
    m = tilde_basis_map(3)
    T = tilde_context(3)
    assert m["c1"] == T.parse("g1 - gb") and m["c2"] == T.parse("g2 - gb")
    assert m["c3"] == T.parse("3*gb - g1 - g2") and m["c4"] == T.parse("-gb")
    total = sum(m.values(), T.zero())
    assert total.is_zero()


def test_prop_basis_examples():
    T = tilde_context(3)
    assert prop_basis_expansion(3, 2, signed=True) == T.parse(
        "g2^2 + g1*g2 + g1^2 + 4*(g2 + g1)*gb + 6*gb^2")
    assert prop_basis_expansion(3, 4, signed=True) == T.parse("gb^4")
    with pytest.raises(ValueError):
        prop_basis_expansion(3, 1)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("signed", [False, True])
def test_prop_basis_matches_substitution(n, signed):
    for l in range(2, n + 2):
        assert prop_basis_expansion(n, l, signed) == prop_basis_by_substitution(n, l, signed)


def test_su4_base_quotient_rank():
    T = tilde_context(3)
    G = groebner([prop_basis_expansion(3, l, True) for l in (2, 3, 4)], MonomialOrder.lex(T))
    assert len(standard_monomials(G, 12)) == 24
