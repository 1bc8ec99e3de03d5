import json
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from artifact import intlinalg as la
from artifact import ss_engine as sse
from artifact.flag_diff import SIGNED_TILDE, differential_image, loop_context
from artifact.ss_engine import GradedElement

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def pages1():
    return sse.run_pages(1, 8)


@pytest.fixture(scope="module")
def pages2():
    return sse.run_pages(2, 16)


def _el(engine, X, Y, poly="1"):
    return GradedElement.make(engine.n, engine.base.ctx, X, Y, engine.base.ctx.parse(poly))


def _d(engine, j):
    return sse.element_from_loop_poly(engine.n, engine.base.ctx, (0,) * engine.n, engine.D[j])


# ---------------------------------------------------------------------------
# graded elements


def test_divided_power_product_rule(engine3):
    x = _el(engine3, (1, 0, 0), ())
    assert x * x == _el(engine3, (2, 0, 0), ()).scale(2)
    assert _el(engine3, (2, 0, 0), ()) * _el(engine3, (1, 0, 0), ()) == _el(engine3, (3, 0, 0), ()).scale(3)
    assert _el(engine3, (1, 1, 0), ()) * _el(engine3, (1, 0, 1), ()) == _el(engine3, (2, 1, 1), ()).scale(2)


def test_exterior_rules(engine3):
    y1, y2 = _el(engine3, (0, 0, 0), (1,)), _el(engine3, (0, 0, 0), (2,))
    assert (y1 * y1).is_zero()
    assert y2 * y1 == -(y1 * y2)
    assert _el(engine3, (0, 0, 0), (2, 1)) == -_el(engine3, (0, 0, 0), (1, 2))
    assert _el(engine3, (0, 0, 0), (1, 1)).is_zero()


def test_bidegree(engine3):
    assert _el(engine3, (1, 0, 0), (1, 2), "g1*gb").bidegree() == (4, 4)
    assert _el(engine3, (0, 2, 1), (), "1").bidegree() == (0, 14)
    with pytest.raises(ValueError):
        (_el(engine3, (1, 0, 0), ()) + _el(engine3, (0, 0, 0), (1,))).bidegree()


def test_loop_poly_round_trip(engine3):
    e = sse.element_from_loop_poly(3, engine3.base.ctx, (1, 0, 0), engine3.D[2])
    back = sse.element_to_loop_poly(e, engine3.loop_ctx)
    assert back == {(1, 0, 0): engine3.D[2]}


# ---------------------------------------------------------------------------
# differentials


def test_differential_images_are_signed_tilde(engine3):
    assert engine3.D[1] == loop_context(3).parse("y1*g1 - y2*g2 - y3*(g2 + g1 + 4*gb)")
    for j in (1, 2, 3):
        assert engine3.D[j] == differential_image(3, j + 1, SIGNED_TILDE)


def test_leibniz_examples(engine3):
    e = _el(engine3, (2, 0, 0), (1,))
    expected = _el(engine3, (1, 0, 0), ()) * _d(engine3, 1) * _el(engine3, (0, 0, 0), (1,))
    assert sse.leibniz_differential(e, 2, engine3) == expected
    assert sse.leibniz_differential(_el(engine3, (1, 0, 0), ()), 4, engine3).is_zero()
    assert sse.leibniz_differential(_el(engine3, (0, 0, 0), (1, 2, 3)), 2, engine3).is_zero()
    with pytest.raises(ValueError):
        sse.leibniz_differential(e, 3, engine3)


_basis_elt = st.tuples(st.tuples(*[st.integers(0, 2)] * 3),
                       st.sets(st.integers(1, 3)).map(lambda s: tuple(sorted(s))),
                       st.sampled_from(["1", "g1", "gb", "g2*gb", "g1^2"]))


@given(_basis_elt, _basis_elt, st.integers(1, 3))
def test_leibniz_is_a_derivation(engine3, a, b, j):
    A, B = _el(engine3, *a), _el(engine3, *b)
    d = lambda e: sse.leibniz_differential(e, 2 * j, engine3)
    sign = -1 if len(a[1]) % 2 else 1
    assert d(A * B) == d(A) * B + (A * d(B)).scale(sign)


@given(_basis_elt, st.integers(1, 3))
def test_leibniz_squares_to_zero_mod_base(engine3, a, j):
    e = _el(engine3, *a)
    dd = sse.leibniz_differential(sse.leibniz_differential(e, 2 * j, engine3), 2 * j, engine3)
    assert all(engine3.base.nf(P).is_zero() for P in dd.terms.values())


def test_row_matrix_single_generator(pages3):
    M = sse.row_matrix(pages3[0], 2, ((1, 0, 0), 0, 0))
    assert M.row_labels == ["(x2)_1"]
    assert M.col_labels == ["y1*g2", "y1*g1", "y1*gb", "y2*g2", "y2*g1", "y2*gb", "y3*g2", "y3*g1", "y3*gb"]
    assert M.rows == [[0, 1, 0, -1, 0, 0, -1, -1, -4]]
    zero = sse.row_matrix(pages3[0], 4, ((1, 0, 0), 0, 0))
    assert zero.col_labels == [] and zero.rows == [[]]


def test_row_matrix_exterior_row(pages3):
    M = sse.row_matrix(pages3[0], 2, ((1, 0, 0), 1, 0))
    assert M.row_labels == ["(x2)_1*y1", "(x2)_1*y2", "(x2)_1*y3"]
    assert len(M.rows) == 3 and all(len(r) == 9 for r in M.rows)
    # D1*y1 = -y2*g2*y1 - y3*(g2+g1+4gb)*y1 = y1*y2*g2 + y1*y3*(g2+g1+4gb)
    assert M.rows[0] == [1, 0, 0, 1, 1, 4, 0, 0, 0]


def test_d_composites_vanish(engine3, pages2, pages1):
    for eng in (engine3, pages2[0].engine, pages1[0].engine):
        assert sse.check_d_squared(eng) == []


# ---------------------------------------------------------------------------
# pages


def test_e2_shape(pages3, pages1):
    eng = pages3[0].engine
    assert eng.base.rank == 24 and eng.base.top == 6
    assert sum(eng.dim(((0, 0, 0), 0, p)) for p in range(7)) == 24
    row3 = {(X, k) for X, k, p in eng.keys if eng.total((X, k, p)) == 3 and p == 0}
    assert ((0, 0, 0), 3) in row3 and ((1, 0, 0), 1) in row3
    e1 = pages1[0].engine
    assert [str(g) for g in e1.base.basis.generators] == ["gb^2"]
    assert e1.D[1] == e1.loop_ctx.parse("-2*y1*gb")


def _e2_euler_oracle(engine, cap):
    out = {}
    for c in engine.keys:
        W, Q = engine.bigrading(c)
        if 2 * Q + engine.n > cap:
            continue
        out[(W, Q)] = out.get((W, Q), 0) + (-1) ** c[1] * engine.dim(c)
    return out


@pytest.mark.parametrize("which", ["pages1", "pages2", "pages3"])
def test_euler_characteristic_preserved(request, which):
    pages = request.getfixturevalue(which)
    oracle = _e2_euler_oracle(pages[0].engine, pages[0].cap)
    for st_ in pages:
        assert sse.euler_characteristics(st_) == oracle


def test_boundaries_inside_cycles(final3):
    for c in final3.reported_keys():
        Z = la.hnf(final3.Z[c], final3.engine.dim(c))
        assert la.is_sublattice(final3.B[c], Z)


def test_final_pages(pages1, pages2, pages3):
    for pages, n in ((pages1, 1), (pages2, 2), (pages3, 3)):
        assert pages[-1].page == 2 * n + 1 and pages[-1].is_final()


def _free_rank(state):
    return sum(state.invariants(c)[0] for c in state.reported_keys())


def test_torsion_and_ranks(pages1, pages2, final3):
    assert sse.torsion_summary(pages1[-1]).to_json() == {"2": [[3, 1], [5, 1], [7, 1]]}
    assert _free_rank(pages1[-1]) == 9
    assert sse.torsion_summary(pages2[-1]).order_set() == {3}
    assert _free_rank(pages2[-1]) == 93
    t3 = sse.torsion_summary(final3)
    assert t3.order_set() == {2, 4}
    assert sum(c for _, c in t3.orders[2]) == 244 and sum(c for _, c in t3.orders[4]) == 320
    assert _free_rank(final3) == 941


def test_truncation_safety(final3):
    lower = sse.assemble_final_page(3, 22)
    for c in lower.reported_keys():
        if final3.engine.total(c) < 22:
            assert lower.invariants(c) == final3.invariants(c)


def test_workers_do_not_change_results(pages2):
    par = sse.run_pages(2, 16, workers=2)[-1]
    assert sse.dumps(sse.state_to_json(par)) == sse.dumps(sse.state_to_json(pages2[-1]))


def test_cap_and_support_errors():
    with pytest.raises(sse.CapTooSmall) as exc:
        sse.init_e2(3, 11)
    assert exc.value.needed == 12 and "12" in str(exc.value)
    with pytest.raises(sse.Unsupported):
        sse.init_e2(4)
    with pytest.raises(ValueError):
        sse.advance(sse.run_pages(1)[-1])


# ---------------------------------------------------------------------------
# the two kernel routes


@pytest.mark.parametrize("j", [1, 2, 3])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_kernel_routes_agree_n3(pages3, j, k):
    rk = sse.kernel_generators(pages3[j - 1], j, k)
    assert rk.lattice == rk.linear and len(rk.preimages) == len(rk.intersection)


@pytest.mark.parametrize("j,k", [(1, 0), (1, 1), (2, 0), (2, 1)])
def test_kernel_routes_agree_n2(pages2, j, k):
    rk = sse.kernel_generators(pages2[j - 1], j, k)
    assert rk.lattice == rk.linear


def test_kernel_contains_cycle_times_differential(pages3):
    eng = pages3[0].engine
    rk = sse.kernel_generators(pages3[0], 1, 1)
    elt = _el(eng, (1, 0, 0), ()) * _d(eng, 1)
    key = ((1, 0, 0), 1, 1)
    assert la.contains(rk.lattice[1], eng.vector(elt, key))


def test_kernel_generators_requires_matching_page(pages3):
    with pytest.raises(ValueError):
        sse.kernel_generators(pages3[0], 2, 0)


def test_top_row_intersection_has_three_generators(pages3):
    rk = sse.kernel_generators(pages3[2], 3, 0)
    assert len(rk.intersection) == 3


# ---------------------------------------------------------------------------
# serialization


def test_json_round_trip(final3):
    data = sse.state_to_json(final3)
    back = sse.state_from_json(json.loads(sse.dumps(data)))
    assert back.page == final3.page
    for c in final3.reported_keys():
        assert back.invariants(c) == final3.invariants(c)
    assert sse.dumps(sse.state_to_json(back)) == sse.dumps(data)
    with pytest.raises(ValueError):
        sse.state_from_json(dict(data, schema=2))


def test_component_records(final3):
    comps = sse.state_to_json(final3)["components"]
    c = next(c for c in comps if c["x"] == [1, 0, 0] and c["k"] == 1 and c["p"] == 2)
    assert c["total"] == 7 and c["bidegree"] == [4, 3]
    assert len(c["basis"]) == final3.engine.dim(((1, 0, 0), 1, 2))


def test_n1_matches_golden(pages1):
    golden = (DATA / "flagloop_n1.json").read_text()
    assert sse.dumps(sse.state_to_json(pages1[-1])) == golden
