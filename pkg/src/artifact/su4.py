"""Comparison of a computed n=3 final page with the closed-form SU(4) answer.

The closed form is a free graded-commutative algebra ``A`` on a list of
generator families modulo an ideal ``I``.  Families are read from
``data/su4_closed_form.json``; each family is a divided-power pattern times a
fixed polynomial in ``y1..y3, g2, g1, gb``.

Pattern letters: ``m`` marks a subscript of which at least one must be
positive, ``b`` a subscript that may be zero, and an absent symbol is zero.
A family with ``variants`` carries a corrected polynomial; the variants are
checked too and reported without failing the check.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from itertools import product
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import intlinalg as la
from .flag_diff import exterior_multiply, y_names
from .groebner import Truncation, buchberger, ideal_equal, normal_form
from .poly import MonomialOrder, Polynomial, VarContext
from .ss_engine import (
    Engine,
    Key,
    PageState,
    element_from_loop_poly,
    row_intersection,
    row_truncation,
    torsion_summary,
)

X_SYMBOLS = ("x2", "x4", "x6")
ALLOWED_TORSION = {2, 4}


@dataclass(frozen=True)
class Family:
    name: str
    pattern: Dict[str, str]
    poly: Polynomial
    variants: Tuple[Polynomial, ...] = ()

    def admissible(self, X: Sequence[int]) -> bool:
        marks = [self.pattern.get(s) for s in X_SYMBOLS]
        if any(m is None and a for m, a in zip(marks, X)):
            return False
        if "m" in marks:
            return any(a for m, a in zip(marks, X) if m == "m")
        return not any(X)


@dataclass
class ClosedForm:
    ctx: VarContext
    symmetric: List[Polynomial]
    families: List[Family]
    differential_relations: Dict[int, Polynomial]
    substitution: Dict[str, Polynomial]


def load_closed_form(path: Optional[str] = None) -> ClosedForm:
    if path is None:
        text = resources.files("artifact").joinpath("data/su4_closed_form.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = json.loads(text)
    ctx = VarContext(raw["variables"])
    fams = [Family(f["name"], dict(f["x"]), ctx.parse(f["poly"]),
                   tuple(ctx.parse(t) for t in f.get("variants", ()))) for f in raw["families"]]
    rels = raw["relations"]
    return ClosedForm(
        ctx=ctx,
        symmetric=[ctx.parse(s) for s in raw["symmetric"]],
        families=fams,
        differential_relations={r["j"]: ctx.parse(r["poly"]) for r in rels["differential"]},
        substitution={k: ctx.parse(v) for k, v in rels["differential_substitution"].items()},
    )


# ---------------------------------------------------------------------------
# report


@dataclass
class CheckItem:
    name: str
    passed: bool
    details: List[str] = field(default_factory=list)


@dataclass
class Report:
    items: List[CheckItem]
    bidegree_ranks: Dict[Tuple[int, int], int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.items)

    def item(self, name: str) -> CheckItem:
        return next(i for i in self.items if i.name == name)

    def to_text(self, max_details: int = 8) -> str:
        lines = []
        for it in self.items:
            lines.append(f"{'PASS' if it.passed else 'FAIL'} {it.name}")
            for d in it.details[:max_details]:
                lines.append(f"    {d}")
            if len(it.details) > max_details:
                lines.append(f"    ... {len(it.details) - max_details} more")
        lines.append("PASS all checks" if self.passed else "FAIL some checks")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [{"name": i.name, "passed": i.passed, "details": i.details} for i in self.items],
            "bidegree_ranks": [[p, q, r] for (p, q), r in sorted(self.bidegree_ranks.items())],
        }


# ---------------------------------------------------------------------------
# instances


def _x_vectors(engine: Engine, limit: int, unit_only: bool) -> List[Tuple[int, ...]]:
    out = []
    rng = range(2) if unit_only else range(limit // 2 + 1)
    for X in product(rng, repeat=engine.n):
        if sum(2 * (j + 1) * a for j, a in enumerate(X)) <= limit:
            out.append(X)
    return out


def family_instances(engine: Engine, fam: Family, unit_only: bool = False
                     ) -> List[Tuple[Tuple[int, ...], Optional[Key], Optional[List[int]]]]:
    """``(X, key, vector)`` per admissible divided-power part within the cap.

    ``key`` and ``vector`` are None when the instance is zero in E2.
    """
    out = []
    base = element_from_loop_poly(engine.n, engine.base.ctx, (0,) * engine.n, fam.poly.map_context(engine.loop_ctx))
    fibre0, = {len(Y) for (_, Y) in base.terms} or {0}
    for X in _x_vectors(engine, engine.cap, unit_only):
        if not fam.admissible(X):
            continue
        el = element_from_loop_poly(engine.n, engine.base.ctx, X, fam.poly.map_context(engine.loop_ctx))
        pieces = engine.split(el)
        pieces = {c: v for c, v in pieces.items() if any(v)}
        if not pieces:
            deg = sum(2 * (j + 1) * a for j, a in enumerate(X)) + fibre0 + 2 * fam.poly.total_degree()
            if deg <= engine.cap:
                out.append((X, None, None))
            continue
        if len(pieces) != 1:
            raise ValueError(f"family {fam.name} is not homogeneous")
        (c, v), = pieces.items()
        if engine.total(c) <= engine.cap:
            out.append((X, c, v))
    return out


def _xstr(X: Sequence[int]) -> str:
    parts = [f"(x{2 * (j + 1)})_{a}" for j, a in enumerate(X) if a]
    return "*".join(parts) if parts else "1"


# ---------------------------------------------------------------------------
# individual checks


def check_base_relations(engine: Engine, data: ClosedForm) -> CheckItem:
    ctx = engine.base.ctx
    sym = [_to_base(s, ctx) for s in data.symmetric]
    ok = ideal_equal(sym, engine.base.basis.generators, engine.base.order)
    details = [] if ok else ["listed symmetric generators differ from the base relations"]
    return CheckItem("symmetric relations generate the base ideal", ok, details)


def _to_base(f: Polynomial, ctx: VarContext) -> Polynomial:
    return Polynomial(ctx, {tuple(e[f.ctx.index(nm)] for nm in ctx.names): c for e, c in f.terms.items()})


def check_differential_relations(engine: Engine, data: ClosedForm) -> CheckItem:
    details = []
    ok = True
    for j, rel in sorted(data.differential_relations.items()):
        mapped = rel.substitute_many(data.substitution, target=data.ctx).map_context(engine.loop_ctx)
        d = engine.D[j]
        if mapped == d or mapped == -d:
            details.append(f"d{2 * j}: relation matches the image of x{2 * j} after substitution")
        else:
            ok = False
            details.append(f"d{2 * j}: relation does not match the image of x{2 * j}")
    return CheckItem("differential relations match the differential images", ok, details)


def check_presence(state: PageState, data: ClosedForm) -> CheckItem:
    eng = state.engine
    details = []
    ok = True
    for fam in data.families:
        insts = family_instances(eng, fam, unit_only=True)
        zero = nonzero = 0
        missing = []
        for X, c, v in insts:
            if c is None:
                zero += 1
                continue
            if not la.contains(state.Z[c], v):
                missing.append(_xstr(X))
            elif not la.contains(la.hnf(state.B[c], eng.dim(c)) if state.B[c] else [], v):
                nonzero += 1
        if missing:
            ok = False
            details.append(f"{fam.name}: not a permanent cycle at {', '.join(missing[:4])}")
        elif not insts:
            details.append(f"{fam.name}: no instance within the cap")
        else:
            details.append(f"{fam.name}: {len(insts)} instances, {nonzero} nonzero classes, {zero} zero in E2")
        for i, alt in enumerate(fam.variants):
            variant = Family(fam.name, fam.pattern, alt)
            bad = [X for X, c, v in family_instances(eng, variant, unit_only=True)
                   if c is not None and not la.contains(state.Z[c], v)]
            verdict = "is not a permanent cycle" if bad else "is a permanent cycle"
            details.append(f"{fam.name}: variant {i + 1} {verdict}; corrected form used")
    return CheckItem("every generator family is a permanent cycle", ok, details)


def _instance_vectors(state: PageState, data: ClosedForm) -> List[Tuple[Key, List[int]]]:
    eng = state.engine
    out = []
    for fam in data.families:
        for X, c, v in family_instances(eng, fam):
            if c is not None:
                out.append((c, v))
    return out


def product_lattices(state: PageState, gens: Sequence[Tuple[Key, List[int]]],
                     extend: bool = False) -> Tuple[Dict[Key, la.Matrix], List[Tuple[Key, List[int]]]]:
    """Lattices spanned by the unit and products of ``gens``, per component.

    With ``extend`` every permanent cycle that is neither such a product nor a
    boundary is adopted as a further generator; those are returned as well.
    """
    eng = state.engine
    keys = state.reported_keys()
    P: Dict[Key, list] = {c: [] for c in keys}
    P[((0,) * eng.n, 0, 0)].append([1])
    gens = sorted(gens, key=lambda t: eng.total(t[0]))
    for c, v in gens:
        P[c].append(v)
    extra: List[Tuple[Key, List[int]]] = []
    for c in keys:
        P[c] = la.hnf(P[c], eng.dim(c)) if P[c] else []
        if extend:
            span = la.lattice_sum(P[c], state.B[c], eng.dim(c))
            new = [z for z in state.Z[c] if not la.contains(span, z)]
            for z in new:
                if not la.contains(span, z):
                    extra.append((c, z))
                    span = la.lattice_sum(span, [z], eng.dim(c))
            if new:
                P[c] = la.lattice_sum(P[c], [z for cc, z in extra if cc == c], eng.dim(c))
        if not P[c]:
            continue
        room = state.cap - eng.total(c)
        X, k, p = c
        for cg, g in gens + extra:
            if eng.total(cg) > room:
                continue
            if k + cg[1] > eng.n or p + cg[2] > eng.base.top:
                continue
            for row in P[c]:
                res = eng.multiply(row, c, g, cg)
                if res is not None and any(res[1]):
                    P[res[0]].append(res[1])
    return P, extra


def check_generation(state: PageState, P: Dict[Key, la.Matrix],
                     extra: Sequence[Tuple[Key, List[int]]] = ()) -> CheckItem:
    eng = state.engine
    details = []
    ok = True
    deficit: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for c in state.reported_keys():
        Z = state.Z[c]
        if not la.is_sublattice(P[c], Z):
            ok = False
            details.append(f"{_key_str(c)}: a product of generators is not a permanent cycle")
            continue
        span = la.lattice_sum(P[c], state.B[c], eng.dim(c))
        if span != Z:
            ok = False
            free, tors = la.quotient_invariants(Z, span)
            bd = _bidegree(eng, c)
            f0, t0 = deficit.get(bd, (0, 0))
            deficit[bd] = (f0 + free, t0 + len(tors))
    if deficit:
        details.append("ungenerated classes by (base, fibre) degree as (rank, torsion summands): "
                       + ", ".join(f"{bd}: {r}" for bd, r in sorted(deficit.items())))
    if extra:
        details.append(f"{len(extra)} additional generators complete the list, the lowest being:")
        for c, z in extra[:12]:
            details.append(f"  {eng.element(z, c).to_str()}")
    return CheckItem("generator families and boundaries span the permanent cycles", ok, details)


def _bidegree(eng: Engine, c: Key) -> Tuple[int, int]:
    X, k, p = c
    return 2 * p, k + sum(2 * (j + 1) * a for j, a in enumerate(X))


def _key_str(c: Key) -> str:
    X, k, p = c
    return f"{_xstr(X)} y^{k} g^{p}"


def relation_instances(state: PageState, P: Dict[Key, la.Matrix]) -> List[Tuple[Key, List[int]]]:
    """``(x)_a * d^{2j}(x_{2j})`` for every divided-power part that makes it an
    element of the generated algebra."""
    eng = state.engine
    out = []
    for j in range(1, eng.n + 1):
        for X in _x_vectors(eng, state.cap, unit_only=False):
            c = (X, 1, j)
            if c not in P or eng.total(c) > state.cap:
                continue
            el = element_from_loop_poly(eng.n, eng.base.ctx, X, eng.D[j])
            v = eng.vector(el, c)
            if any(v) and la.contains(P[c], v):
                out.append((c, v))
    return out


def relation_lattices(state: PageState, P: Dict[Key, la.Matrix]) -> Dict[Key, la.Matrix]:
    """Per component, the ideal generated by :func:`relation_instances` inside
    the algebra spanned by ``P``."""
    eng = state.engine
    rows: Dict[Key, list] = {c: [] for c in P}
    rels = relation_instances(state, P)
    for c in state.reported_keys():
        if not P[c]:
            continue
        for cr, r in rels:
            if eng.total(c) + eng.total(cr) > state.cap:
                continue
            for q in P[c]:
                res = eng.multiply(r, cr, q, c)
                if res is not None and any(res[1]) and res[0] in rows:
                    rows[res[0]].append(res[1])
    return {c: (la.hnf(v, eng.dim(c)) if v else []) for c, v in rows.items()}


def check_relations(state: PageState, P: Dict[Key, la.Matrix]) -> CheckItem:
    """The listed relations vanish on the final page and account for every
    product of generators that vanishes there."""
    eng = state.engine
    ok = True
    details = []
    lattices = relation_lattices(state, P)
    for c in state.reported_keys():
        dim = eng.dim(c)
        I = lattices[c]
        B = la.hnf(state.B[c], dim) if state.B[c] else []
        if not la.is_sublattice(I, B):
            ok = False
            details.append(f"{_key_str(c)}: a listed relation is nonzero on the final page")
        vanishing = la.lattice_intersection(P[c], B, dim) if P[c] and B else []
        if not la.is_sublattice(vanishing, I):
            ok = False
            free, tors = la.quotient_invariants(la.lattice_sum(vanishing, I, dim), I)
            details.append(f"{_key_str(c)}: products vanish beyond the listed relations "
                           f"(rank {free}, torsion {tors})")
    return CheckItem("listed relations generate the kernel onto the final page", ok, details)


def check_torsion(state: PageState, recorded: Optional[Dict[Key, List[int]]] = None) -> CheckItem:
    eng = state.engine
    details = []
    ok = True
    computed = {c: state.invariants(c)[1] for c in state.reported_keys()}
    if recorded is not None:
        for c in state.reported_keys():
            if list(recorded.get(c, [])) != computed[c]:
                ok = False
                details.append(f"{_key_str(c)}: recorded torsion {recorded.get(c, [])} but recomputed {computed[c]}")
    orders = set()
    for src in ([computed] + ([recorded] if recorded is not None else [])):
        for v in src.values():
            orders.update(v)
    if not orders <= ALLOWED_TORSION:
        ok = False
        details.append(f"torsion orders {sorted(orders)} are not within {{2, 4}}")
    if 4 not in orders:
        ok = False
        details.append("no order-4 torsion found")
    summary = torsion_summary(state)
    details.append("orders: " + ", ".join(f"{d} (x{sum(n for _, n in v)})" for d, v in summary.orders.items()))
    return CheckItem("torsion orders lie in {2, 4} with order 4 present", ok, details)


def bidegree_ranks(state: PageState) -> Dict[Tuple[int, int], int]:
    eng = state.engine
    out: Dict[Tuple[int, int], int] = {}
    for c in state.reported_keys():
        bd = _bidegree(eng, c)
        out[bd] = out.get(bd, 0) + state.invariants(c)[0]
    return out


def verify_su4(state: PageState, recorded_torsion: Optional[Dict[Key, List[int]]] = None,
               data: Optional[ClosedForm] = None) -> Report:
    if state.n != 3:
        raise ValueError("the comparison applies to n = 3 only")
    if not state.is_final():
        raise ValueError("the state is not the final page")
    data = data or load_closed_form()
    eng = state.engine
    P, extra = product_lattices(state, _instance_vectors(state, data), extend=True)
    P_listed, _ = product_lattices(state, _instance_vectors(state, data)) if extra else (P, [])
    items = [
        check_base_relations(eng, data),
        check_differential_relations(eng, data),
        check_presence(state, data),
        check_relations(state, P_listed),
        check_torsion(state, recorded_torsion),
        check_generation(state, P_listed, extra),
    ]
    return Report(items, bidegree_ranks(state))


# ---------------------------------------------------------------------------
# row intersections against a listed generator set


@dataclass
class IntersectionComparison:
    """Ideal comparison of listed ``q * D_j`` elements with a computed row intersection.

    Both ideals are compared with polynomial degree truncated at the top
    degree of the base ring, where the listed elements live.
    """
    j: int
    k: int
    listed_in_computed: bool
    computed_in_listed: bool
    missing: List[str]
    extra: List[str]

    @property
    def equal(self) -> bool:
        return self.listed_in_computed and self.computed_in_listed


def compare_intersection(engine: Engine, j: int, k: int,
                         multipliers: Sequence[str]) -> IntersectionComparison:
    """Compare ``{q * D_j}`` for the given multipliers with the computed intersection.

    The computed side is ``im(D_j wedge) ∩ (J + lower images)`` on exterior
    degree ``k+1``; ``missing`` lists multipliers outside it and ``extra``
    the computed generators outside the listed ideal.
    """
    ctx = engine.loop_ctx
    order = MonomialOrder.lex(ctx)
    ys = y_names(engine.n)
    full = row_truncation(engine, k, j)
    trunc = Truncation(full.weights, full.bound - j)
    listed = [exterior_multiply(ctx.parse(q), engine.D[j], ys) for q in multipliers]
    computed = [h for h in row_intersection(engine, j, k).generators
                if h.weighted_degree(trunc.weights) <= trunc.bound]
    G_computed = buchberger(computed, order, trunc)
    missing = [q for q, f in zip(multipliers, listed) if not normal_form(f, G_computed).is_zero()]
    G_listed = buchberger(listed, order, trunc)
    extra = [h.to_str(order) for h in computed if not normal_form(h, G_listed).is_zero()]
    return IntersectionComparison(j, k, not missing, not extra, missing, extra)
