import itertools
import json

import pytest
import sympy
from hypothesis import assume, given, strategies as st

from artifact import intlinalg as la
from artifact.groebner import (
    GroebnerBasis,
    NonTermination,
    NotHomogeneous,
    ReservedVariable,
    Truncation,
    buchberger,
    divmod_nonneg,
    e_reduce_step,
    ext_gcd,
    g_polynomial,
    groebner,
    ideal_contains,
    ideal_equal,
    ideal_intersect,
    is_groebner,
    normal_form,
    reduce_basis,
    s_polynomial,
    standard_monomials,
    track_reduction,
)
from artifact.poly import MonomialOrder, Polynomial, VarContext
from artifact.symcomb import complete_h, default_context, phi_basis

XY = VarContext(["x", "y"])
OXY = MonomialOrder.lex(XY)
P = XY.parse
X21 = VarContext(["x2", "x1"])
O21 = MonomialOrder.lex(X21)
Q = X21.parse


# division convention ------------------------------------------------------

@given(st.integers(-10**6, 10**6), st.integers(-999, 999).filter(bool))
def test_divmod_least_nonnegative(a, c):
    q, r = divmod_nonneg(a, c)
    assert a == q * c + r and 0 <= r < abs(c)


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_ext_gcd_bezout(a, b):
    g, s, t = ext_gcd(a, b)
    assert g == sympy.gcd(a, b) and s * a + t * b == g


def test_e_reduce_step_examples():
    assert e_reduce_step(P("5*x^2"), P("2*x"), OXY) == P("x^2")
    assert e_reduce_step(P("x^2"), P("2*x"), OXY) is None
    assert e_reduce_step(P("4*x*y"), P("2*x"), OXY) == XY.zero()
    with pytest.raises(ValueError):
        e_reduce_step(P("x"), XY.zero(), OXY)


# critical pairs ---------------------------------------------------------------

def test_s_polynomial_examples():
    assert s_polynomial(P("2*x^2+y"), P("3*x*y+x"), OXY) == P("3*y^2 - 2*x^2")
    g = P("2*x^2+y")
    assert s_polynomial(g, g, OXY).is_zero()
    assert s_polynomial(P("x"), P("y"), OXY).is_zero()


def test_g_polynomial_examples():
    assert g_polynomial(P("2*x^2"), P("3*x*y"), OXY) == P("x^2*y")
    assert g_polynomial(P("2*x"), P("4*y"), OXY) == P("2*x*y")
    out = g_polynomial(P("x+1"), P("y"), OXY)
    assert out.leading(OXY)[1] == 1


def test_is_groebner_examples():
    assert is_groebner([Q("x2+x1"), Q("x1^2")], O21)
    assert not is_groebner([P("2*x^2+y"), P("3*x*y+x")], OXY)


def test_two_x_three_y_is_not_a_groebner_basis():
    # the G-polynomial x*y lies in the ideal but no leading term E-reduces it
    assert not is_groebner([P("2*x"), P("3*y")], OXY)
    G = groebner([P("2*x"), P("3*y")], OXY)
    assert sorted(G.strings()) == sorted(["2*x", "3*y", "x*y"])


# completion ---------------------------------------------------------------------

def test_buchberger_examples():
    assert groebner([Q("x2+x1"), Q("x2^2+x2*x1+x1^2")], O21).strings() == ["x1^2", "x2 + x1"]
    ctx = default_context(3)
    o = MonomialOrder.lex(ctx)
    hs = [complete_h(3, l, ctx) for l in (1, 2, 3)]
    assert sorted(groebner(hs, o).strings()) == sorted(p.to_str(o) for p in phi_basis(3, ctx))
    assert groebner([P("2*x"), P("3*x")], OXY).strings() == ["x"]


def test_buchberger_errors():
    with pytest.raises(ValueError):
        buchberger([XY.zero()], OXY)
    with pytest.raises(NotHomogeneous):
        buchberger([P("x^2+y")], OXY, Truncation((1, 1), 3))
    with pytest.raises(NonTermination):
        buchberger([P("x^3-y"), P("x*y^2-x")], OXY, max_pairs=1)


def test_reduce_basis_examples():
    G = reduce_basis(GroebnerBasis([Q("x2+x1"), Q("x2^2")], O21))
    assert G.strings() == ["x1^2", "x2 + x1"]
    assert reduce_basis(G).strings() == G.strings()
    assert reduce_basis(GroebnerBasis([P("-x")], OXY)).strings() == ["x"]


def test_single_generator_sign_normalized():
    assert groebner([P("-2*x + 4*y")], OXY).strings() == ["2*x - 4*y"]


def test_normal_form_examples():
    G = groebner([Q("x2+x1"), Q("x1^2")], O21)
    assert normal_form(Q("x2"), G) == Q("-x1")
    assert normal_form(Q("x1^3"), G).is_zero()
    assert normal_form(Q("(x2+x1)*(x2-7)"), G).is_zero()


def test_track_reduction_examples():
    G = groebner([Q("x2+x1"), Q("x1^2")], O21)
    tr = track_reduction(Q("x2^2*x1 + 3*x1^3 + 5"), G)
    assert tr.remainder == Q("5")
    assert tr.replay() == Q("x2^2*x1 + 3*x1^3 + 5")
    assert sum((q * g for q, g in zip(tr.quotients(), G)), X21.zero()) + tr.remainder == \
        Q("x2^2*x1 + 3*x1^3 + 5")
    empty = track_reduction(X21.zero(), G)
    assert empty.steps == [] and empty.remainder.is_zero()


def test_standard_monomials_examples():
    G = groebner([Q("x2+x1"), Q("x1^2")], O21)
    assert sorted(standard_monomials(G, 1)) == [(0, 0), (0, 1)]
    ctx = default_context(3)
    G3 = groebner(phi_basis(3, ctx), MonomialOrder.lex(ctx))
    got = sorted(standard_monomials(G3, 9))
    assert got == sorted([(0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1), (0, 0, 2), (0, 1, 2)])


def test_basis_json_round_trip():
    G = groebner([Q("x2+x1"), Q("x1^2")], O21)
    H = GroebnerBasis.from_json(G.to_json())
    assert H.strings() == G.strings() and H.order.describe() == G.order.describe()
    assert json.loads(G.to_json())["order"]["kind"] == "lex"


# intersections and ideal comparison --------------------------------------------------

def test_intersection_examples():
    ctx = VarContext(["x", "z"])
    o = MonomialOrder.lex(ctx)
    assert ideal_intersect([ctx.var("x")], [ctx.var("z")], o).strings() == ["x*z"]
    assert ideal_intersect([ctx.const(2)], [ctx.const(3)], o).strings() == ["6"]
    A = [ctx.parse("x^2"), ctx.parse("x*z")]
    assert ideal_equal(ideal_intersect(A, A, o), A, o)


def test_intersection_rejects_reserved_variable():
    with pytest.raises(ReservedVariable):
        ideal_intersect([P("x")], [P("y")], OXY)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_complete_and_phi_ideals_equal(n):
    ctx = default_context(n)
    o = MonomialOrder.lex(ctx)
    assert ideal_equal([complete_h(n, l, ctx) for l in range(1, n + 1)], phi_basis(n, ctx), o)


@pytest.mark.parametrize("n", [2, 3])
def test_partial_elimination_ideals_equal(n):
    from artifact.symcomb import h_partial

    ctx = default_context(n)
    o = MonomialOrder.lex(ctx)
    A = [h_partial(l, n, ctx) for l in range(1, n + 1)]
    B = [h_partial(1, n, ctx)] + [h_partial(l, n - 1, ctx) for l in range(2, n + 1)]
    assert ideal_equal(A, B, o)


def test_proper_containment():
    ctx = VarContext(["x"])
    o = MonomialOrder.lex(ctx)
    assert not ideal_equal([ctx.parse("x")], [ctx.parse("x^2")], o)
    assert ideal_contains([ctx.parse("x")], [ctx.parse("x^2")], o)


# properties ------------------------------------------------------------------

# Random lex completions over Z in three variables can swell without bound, so
# the general-purpose strategies use two variables; three-variable properties
# use homogeneous generators, the class the spectral-sequence rows produce.
XYZ = VarContext(["x", "y", "z"])
OXYZ = MonomialOrder.lex(XYZ)
XW = VarContext(["x", "w"])
OXW = MonomialOrder.lex(XW)
small_exp = st.tuples(*[st.integers(0, 2)] * 2)
small_poly = st.dictionaries(small_exp, st.integers(-6, 6).filter(bool), min_size=1, max_size=3).map(
    lambda d: Polynomial(XW, d))
gens = st.lists(small_poly, min_size=1, max_size=3)


def _homogeneous(deg):
    mons = [e for e in itertools.product(range(deg + 1), repeat=3) if sum(e) == deg]
    return st.dictionaries(st.sampled_from(mons), st.integers(-6, 6).filter(bool), min_size=1,
                           max_size=3).map(lambda d: Polynomial(XYZ, d))


hom_gens = st.lists(st.integers(1, 2).flatmap(_homogeneous), min_size=1, max_size=3)


@given(gens)
def test_completion_is_sound(F):
    G = groebner(F, OXW, max_pairs=20_000)
    assert is_groebner(G, OXW)
    assert ideal_equal(F, G, OXW)
    assert all(g.leading(OXW)[1] > 0 for g in G)


@given(gens, st.randoms(use_true_random=False))
def test_reduced_basis_unique(F, rnd):
    G = groebner(F, OXW, max_pairs=20_000)
    F2 = [(-f if rnd.random() < 0.5 else f) for f in F]
    rnd.shuffle(F2)
    assert groebner(F2, OXW, max_pairs=20_000).strings() == G.strings()


@given(gens, small_poly, small_poly)
def test_normal_form_linear(F, f, g):
    G = groebner(F, OXW, max_pairs=20_000)
    lhs = normal_form(f + g, G)
    assert lhs == normal_form(normal_form(f, G) + normal_form(g, G), G)
    assert normal_form(lhs, G) == lhs


@given(gens, st.lists(small_poly, min_size=3, max_size=3))
def test_ideal_members_reduce_to_zero(F, cofs):
    G = groebner(F, OXW, max_pairs=20_000)
    member = sum((c * f for c, f in zip(cofs, F)), XW.zero())
    assert normal_form(member, G).is_zero()


@given(gens, small_poly)
def test_trace_replays(F, f):
    G = groebner(F, OXW, max_pairs=20_000)
    tr = track_reduction(f, G)
    assert tr.replay() == f
    assert tr.remainder == normal_form(f, G)


@given(gens)
def test_tracked_cofactors_express_basis(F):
    G = buchberger(F, OXW, track=True, max_pairs=20_000)
    for g, cof in zip(G.generators, G.cofactors):
        assert sum((c * f for c, f in zip(cof, F)), XW.zero()) == g


@given(gens)
def test_rational_ideal_matches_sympy(F):
    x, w = sympy.symbols("x w")
    ex = [sympy.Poly.from_dict(f.terms, x, w).as_expr() for f in F]
    ours = [sympy.Poly.from_dict(g.terms, x, w).as_expr() for g in groebner(F, OXW, max_pairs=20_000)]
    GQ = sympy.groebner(ex, x, w, order="lex", domain="QQ")
    GQ2 = sympy.groebner(ours, x, w, order="lex", domain="QQ")
    assert list(GQ.exprs) == list(GQ2.exprs)


def _lattice_piece(F, deg):
    """Integer span of all monomial multiples of ``F`` in degree ``deg``."""
    mons = [e for e in itertools.product(range(deg + 1), repeat=3) if sum(e) == deg]
    idx = {e: i for i, e in enumerate(mons)}
    rows = []
    for f in F:
        d = f.total_degree()
        if d > deg:
            continue
        for m in mons:
            if sum(m) == deg - d:
                row = [0] * len(mons)
                for e, c in f.mul_term(m, 1).terms.items():
                    row[idx[e]] += c
                rows.append(row)
    return mons, la.hnf(rows, len(mons))


@given(hom_gens, st.integers(1, 4), st.tuples(*[st.integers(0, 2)] * 3), st.integers(-5, 5))
def test_membership_matches_degreewise_lattice(F, deg, e, c):
    G = groebner(F, OXYZ, max_pairs=20_000)
    mons, L = _lattice_piece(F, deg)
    vec = [0] * len(mons)
    if sum(e) == deg:
        vec[mons.index(e)] = c
    # random element of the degree piece plus an ideal member
    f = Polynomial(XYZ, {m: v for m, v in zip(mons, vec) if v})
    for row in L[:2]:
        f = f + Polynomial(XYZ, {m: v for m, v in zip(mons, row) if v})
    w = [f.coefficient(m) for m in mons]
    assert normal_form(f, G).is_zero() == la.contains(L, w)


@given(hom_gens)
def test_truncation_agrees_below_bound(F):
    trunc = Truncation((1, 1, 1), 3)
    Gt = buchberger(F, OXYZ, trunc, max_pairs=20_000)
    G = groebner(F, OXYZ, max_pairs=20_000)
    for g in G:
        if g.total_degree() <= 3:
            assert normal_form(g, Gt).is_zero()
    for g in Gt:
        assert normal_form(g, G).is_zero()


small_gens = st.lists(
    st.dictionaries(small_exp, st.integers(-3, 3).filter(bool), min_size=1, max_size=2).map(
        lambda d: Polynomial(XW, d)), min_size=1, max_size=2)


@given(small_gens, small_gens)
def test_intersection_symmetric(A, B):
    AB = ideal_intersect(A, B, OXW)
    assert ideal_equal(AB, ideal_intersect(B, A, OXW), OXW)
    assert ideal_contains(A, AB, OXW) and ideal_contains(B, AB, OXW)
    assert ideal_equal(ideal_intersect(A, A, OXW), A, OXW)


@given(hom_gens)
def test_homogeneous_completion_sound(F):
    G = groebner(F, OXYZ)
    assert is_groebner(G, OXYZ) and ideal_equal(F, G, OXYZ)
