"""Gröbner bases over the integers.

Completion handles both critical-pair kinds needed over a Euclidean domain:
S-polynomials cancel leading terms and G-polynomials realise the gcd of the
leading coefficients.  Integer division always uses the least non-negative
remainder, which makes reduced bases (positive leading coefficients) unique.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .poly import Exp, MonomialOrder, Polynomial, VarContext, default_order

RESERVED = "y"


class NonTermination(RuntimeError):
    """Completion exceeded its pair budget."""


class NotHomogeneous(ValueError):
    pass


class ReservedVariable(ValueError):
    pass


@dataclass(frozen=True)
class Truncation:
    """Discard critical pairs whose lcm has weighted degree above ``bound``."""

    weights: Tuple[int, ...]
    bound: int

    def degree(self, e: Exp) -> int:
        return sum(w * k for w, k in zip(self.weights, e))

    def describe(self) -> dict:
        return {"weights": list(self.weights), "bound": self.bound}


@dataclass
class GroebnerBasis:
    generators: List[Polynomial]
    order: MonomialOrder
    reduced: bool = False
    truncation: Optional[Truncation] = None
    cofactors: Optional[List[List[Polynomial]]] = None

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, i: int) -> Polynomial:
        return self.generators[i]

    @property
    def ctx(self) -> VarContext:
        return self.order.ctx

    def leading_terms(self) -> List[Tuple[Exp, int]]:
        return [g.leading(self.order) for g in self.generators]

    def strings(self) -> List[str]:
        return [g.to_str(self.order) for g in self.generators]

    def to_json(self) -> str:
        return json.dumps({
            "variables": list(self.ctx.names),
            "order": self.order.describe(),
            "reduced": self.reduced,
            "truncation": self.truncation.describe() if self.truncation else None,
            "generators": self.strings(),
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "GroebnerBasis":
        data = json.loads(text)
        ctx = VarContext(data["variables"])
        order = MonomialOrder.from_description(ctx, data["order"])
        tr = data.get("truncation")
        trunc = Truncation(tuple(tr["weights"]), tr["bound"]) if tr else None
        gens = [ctx.parse(s) for s in data["generators"]]
        return cls(gens, order, data.get("reduced", False), trunc)


@dataclass
class ReductionTrace:
    """``input == remainder + sum(q * x^s * basis[i] for i, q, s in steps)``."""

    steps: List[Tuple[int, int, Exp]]
    remainder: Polynomial
    basis: List[Polynomial] = field(repr=False, default_factory=list)

    def replay(self) -> Polynomial:
        total = self.remainder
        for i, q, s in self.steps:
            total = total + self.basis[i].mul_term(s, q)
        return total

    def quotients(self) -> List[Polynomial]:
        """Per-generator cofactors accumulated from the steps."""
        ctx = self.remainder.ctx
        out: List[Dict[Exp, int]] = [dict() for _ in self.basis]
        for i, q, s in self.steps:
            d = out[i]
            v = d.get(s, 0) + q
            if v:
                d[s] = v
            else:
                d.pop(s, None)
        return [Polynomial(ctx, d) for d in out]


# ---------------------------------------------------------------------------
# arithmetic helpers


def divmod_nonneg(a: int, c: int) -> Tuple[int, int]:
    """Quotient and remainder with ``0 <= r < |c|``."""
    r = a % abs(c)
    return (a - r) // c, r


def ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """(g, x, y) with ``a*x + b*y = g = gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _divides(a: Exp, b: Exp) -> bool:
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def _lcm_exp(a: Exp, b: Exp) -> Exp:
    return tuple([x if x > y else y for x, y in zip(a, b)])


def _sub_exp(a: Exp, b: Exp) -> Exp:
    return tuple([x - y for x, y in zip(a, b)])


def _coprime(a: Exp, b: Exp) -> bool:
    for x, y in zip(a, b):
        if x and y:
            return False
    return True


def _lcm(a: int, b: int) -> int:
    return abs(a * b) // gcd(a, b)


def _nonzero(p: Polynomial) -> None:
    if p.is_zero():
        raise ValueError("zero polynomial where a nonzero one is required")


def _basis_list(G) -> List[Polynomial]:
    return list(G.generators) if isinstance(G, GroebnerBasis) else list(G)


# ---------------------------------------------------------------------------
# reduction


def e_reduce_step(f: Polynomial, p: Polynomial, order: MonomialOrder) -> Optional[Polynomial]:
    """One E-reduction of ``f`` by ``p`` at the largest eligible term, or None."""
    _nonzero(p)
    lt, lc = p.leading(order)
    for e, a in f.sorted_terms(order):
        if _divides(lt, e):
            q, _ = divmod_nonneg(a, lc)
            if q:
                return f - p.mul_term(_sub_exp(e, lt), q)
    return None


class _Reducer:
    """Deterministic full E-reduction against a fixed list of polynomials."""

    def __init__(self, polys: Sequence[Polynomial], order: MonomialOrder):
        self.order = order
        self.key = order.key
        self.polys = list(polys)
        self.lead = [p.leading(order) for p in self.polys]
        self.skip: set = set()

    def append(self, p: Polynomial) -> None:
        self.polys.append(p)
        self.lead.append(p.leading(self.order))

    def reduce(self, f: Polynomial, steps: Optional[list] = None, top_only: bool = False) -> Polynomial:
        key = self.key
        work = dict(f.terms)
        heap = [(_neg(key(e)), e) for e in work]
        heapq.heapify(heap)
        rem: Dict[Exp, int] = {}
        lead = self.lead
        polys = self.polys
        skip = self.skip
        while heap:
            _, e = heapq.heappop(heap)
            a = work.pop(e, 0)
            if not a:
                continue
            for i, (lt, lc) in enumerate(lead):
                if not _divides(lt, e) or i in skip:
                    continue
                q, r = divmod_nonneg(a, lc)
                if not q:
                    continue
                s = _sub_exp(e, lt)
                if steps is not None:
                    steps.append((i, q, s))
                for pe, pc in polys[i].terms.items():
                    if pe == lt:
                        continue
                    ne = tuple([x + y for x, y in zip(pe, s)])
                    old = work.get(ne)
                    if old is None:
                        work[ne] = -q * pc
                        heapq.heappush(heap, (_neg(key(ne)), ne))
                    else:
                        v = old - q * pc
                        work[ne] = v
                a = r
                if not a:
                    break
            if a:
                if top_only:
                    rem[e] = a
                    for ee, cc in work.items():
                        if cc:
                            rem[ee] = cc
                    return Polynomial._wrap(f.ctx, rem)
                rem[e] = a
        return Polynomial._wrap(f.ctx, rem)


def _neg(k: Exp) -> Exp:
    return tuple([-x for x in k])


def normal_form(f: Polynomial, G, order: Optional[MonomialOrder] = None) -> Polynomial:
    """Fully E-reduced representative of ``f`` modulo ``G``."""
    if isinstance(G, GroebnerBasis):
        order = G.order
    if order is None:
        raise ValueError("an order is required when G is a plain list")
    polys = _basis_list(G)
    if not polys:
        return f
    return _Reducer(polys, order).reduce(f)


def track_reduction(f: Polynomial, G, order: Optional[MonomialOrder] = None) -> ReductionTrace:
    if isinstance(G, GroebnerBasis):
        order = G.order
    polys = _basis_list(G)
    steps: list = []
    rem = _Reducer(polys, order).reduce(f, steps) if polys else f
    return ReductionTrace(steps, rem, polys)


# ---------------------------------------------------------------------------
# critical pairs


def _pair_data(g1: Polynomial, g2: Polynomial, order: MonomialOrder):
    _nonzero(g1)
    _nonzero(g2)
    t1, c1 = g1.leading(order)
    t2, c2 = g2.leading(order)
    l = _lcm_exp(t1, t2)
    return t1, c1, t2, c2, _sub_exp(l, t1), _sub_exp(l, t2)


def s_polynomial(g1: Polynomial, g2: Polynomial, order: MonomialOrder) -> Polynomial:
    t1, c1, t2, c2, s1, s2 = _pair_data(g1, g2, order)
    m = _lcm(c1, c2)
    return g1.mul_term(s1, m // c1) - g2.mul_term(s2, m // c2)


def _bezout(c1: int, c2: int) -> Tuple[int, int, int]:
    return ext_gcd(c1, c2)


def g_polynomial(g1: Polynomial, g2: Polynomial, order: MonomialOrder) -> Polynomial:
    t1, c1, t2, c2, s1, s2 = _pair_data(g1, g2, order)
    _, d1, d2 = _bezout(c1, c2)
    return g1.mul_term(s1, d1) + g2.mul_term(s2, d2)


def _top_reducible(lt: Exp, lc: int, leads: Sequence[Tuple[Exp, int]]) -> bool:
    for t, c in leads:
        if lc % c == 0 and _divides(t, lt):
            return True
    return False


def is_groebner(G, order: Optional[MonomialOrder] = None) -> bool:
    """Both completion conditions on every pair: S-polynomials reduce to 0 and
    G-polynomials are reducible in their leading term."""
    if isinstance(G, GroebnerBasis):
        order = G.order
    polys = _basis_list(G)
    for p in polys:
        _nonzero(p)
    red = _Reducer(polys, order)
    leads = red.lead
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            if not red.reduce(s_polynomial(polys[i], polys[j], order)).is_zero():
                return False
            gp = g_polynomial(polys[i], polys[j], order)
            if gp.is_zero():
                continue
            lt, lc = gp.leading(order)
            if not _top_reducible(lt, lc, leads):
                return False
    return True


# ---------------------------------------------------------------------------
# completion


def _check_truncation(F: Sequence[Polynomial], trunc: Optional[Truncation]) -> None:
    if trunc is None:
        return
    for f in F:
        if not f.is_homogeneous(trunc.weights):
            raise NotHomogeneous(f"truncation requires homogeneous input; {f} is not")


def buchberger(F: Sequence[Polynomial], order: MonomialOrder,
               truncation: Optional[Truncation] = None, track: bool = False,
               max_pairs: int = 2_000_000) -> GroebnerBasis:
    """Complete ``F`` to a Gröbner basis (not yet reduced).

    With ``track`` each basis element carries its cofactors with respect to
    the input list, so that ``g == sum(cof[k] * F[k])``.
    """
    F = list(F)
    if not F:
        return GroebnerBasis([], order, False, truncation, [] if track else None)
    for f in F:
        _nonzero(f)
        f._check_order(order)
    _check_truncation(F, truncation)
    ctx = order.ctx
    n_in = len(F)
    one = ctx.one_exp()

    basis: List[Polynomial] = []
    cofs: List[List[Polynomial]] = []
    red = _Reducer([], order)
    pairs: list = []
    redundant: set = red.skip

    def degree(e: Exp) -> int:
        return truncation.degree(e) if truncation else sum(e)

    def cof_combination(parts) -> List[Polynomial]:
        out = [ctx.zero() for _ in range(n_in)]
        for k, q, s in parts:
            for m in range(n_in):
                if not cofs[k][m].is_zero():
                    out[m] = out[m] + cofs[k][m].mul_term(s, q)
        return out

    def add(p: Polynomial, cof: Optional[List[Polynomial]]) -> None:
        if p.leading(order)[1] < 0:
            p = -p
            if cof is not None:
                cof = [-c for c in cof]
        idx = len(basis)
        basis.append(p)
        red.append(p)
        if track:
            cofs.append(cof)
        lt_new, lc_new = red.lead[idx]
        superseded = []
        for j in range(idx):
            if j in redundant:
                continue
            lt_j, lc_j = red.lead[j]
            if _divides(lt_new, lt_j) and lc_j % lc_new == 0:
                redundant.add(j)
                superseded.append(j)
                continue
            l = _lcm_exp(lt_j, lt_new)
            if truncation and truncation.degree(l) > truncation.bound:
                continue
            heapq.heappush(pairs, (degree(l), order.key(l), j, idx))
        # an element whose leading term the new one strongly reduces takes no
        # further part in pairs; its remainder modulo the basis replaces it
        for j in superseded:
            reduce_and_add(basis[j], [(j, 1, one)])

    def reduce_and_add(h: Polynomial, parts) -> None:
        steps: Optional[list] = [] if track else None
        r = red.reduce(h, steps)
        if r.is_zero():
            return
        cof = None
        if track:
            cof = cof_combination(parts + [(k, -q, s) for k, q, s in steps])
        add(r, cof)

    for k, f in enumerate(F):
        steps = [] if track else None
        r = red.reduce(f, steps)
        if r.is_zero():
            continue
        cof = None
        if track:
            cof = [ctx.const(1) if m == k else ctx.zero() for m in range(n_in)]
            for i, q, s in steps:
                for m in range(n_in):
                    if not cofs[i][m].is_zero():
                        cof[m] = cof[m] - cofs[i][m].mul_term(s, q)
        add(r, cof)

    processed = 0
    while pairs:
        _, _, i, j = heapq.heappop(pairs)
        if i in redundant or j in redundant:
            continue
        processed += 1
        if processed > max_pairs:
            raise NonTermination(f"pair budget {max_pairs} exceeded")
        gi, gj = basis[i], basis[j]
        t1, c1 = red.lead[i]
        t2, c2 = red.lead[j]
        l = _lcm_exp(t1, t2)
        s1, s2 = _sub_exp(l, t1), _sub_exp(l, t2)
        # G-polynomial: only needed when neither coefficient divides the other
        if c2 % c1 and c1 % c2:
            _, d1, d2 = _bezout(c1, c2)
            gp = gi.mul_term(s1, d1) + gj.mul_term(s2, d2)
            if not gp.is_zero():
                lt, lc = gp.leading(order)
                if not _top_reducible(lt, lc, red.lead):
                    reduce_and_add(gp, [(i, d1, s1), (j, d2, s2)])
        # S-polynomial, skipped by the product criterion
        if _coprime(t1, t2) and gcd(c1, c2) == 1:
            continue
        m = _lcm(c1, c2)
        b1, b2 = m // c1, m // c2
        sp = gi.mul_term(s1, b1) - gj.mul_term(s2, b2)
        if not sp.is_zero():
            reduce_and_add(sp, [(i, b1, s1), (j, -b2, s2)])

    return GroebnerBasis(basis, order, False, truncation, cofs if track else None)


def reduce_basis(G: GroebnerBasis) -> GroebnerBasis:
    """The unique reduced basis with positive leading coefficients."""
    order = G.order
    polys = [(-g if g.leading(order)[1] < 0 else g) for g in G.generators if not g.is_zero()]
    # replace elements whose leading term is strongly reducible by another one
    # with their normal form modulo the rest, dropping those that vanish
    changed = True
    while changed:
        changed = False
        leads = [p.leading(order) for p in polys]
        for i, (t, c) in enumerate(leads):
            for j, (t2, c2) in enumerate(leads):
                if i != j and _divides(t2, t) and c % c2 == 0 and (t2 != t or c2 != c or j < i):
                    r = _Reducer(polys[:i] + polys[i + 1:], order).reduce(polys[i])
                    if r.is_zero():
                        del polys[i]
                    else:
                        polys[i] = -r if r.leading(order)[1] < 0 else r
                    changed = True
                    break
            if changed:
                break
    # inter-reduce until stable
    changed = True
    while changed:
        changed = False
        for i in range(len(polys)):
            others = polys[:i] + polys[i + 1:]
            if not others:
                continue
            r = _Reducer(others, order).reduce(polys[i])
            if r != polys[i]:
                if r.is_zero():
                    raise AssertionError("reduced basis element vanished; input was not minimal")
                if r.leading(order)[1] < 0:
                    r = -r
                polys[i] = r
                changed = True
    key = order.key
    polys.sort(key=lambda p: (key(p.leading(order)[0]), p.leading(order)[1]))
    return GroebnerBasis(polys, order, True, G.truncation)


def groebner(F: Sequence[Polynomial], order: MonomialOrder,
             truncation: Optional[Truncation] = None, max_pairs: int = 2_000_000) -> GroebnerBasis:
    """Reduced Gröbner basis of ``F``."""
    return reduce_basis(buchberger(F, order, truncation, max_pairs=max_pairs))


# ---------------------------------------------------------------------------
# ideal operations


def ideal_intersect(A: Sequence[Polynomial], B: Sequence[Polynomial], order: MonomialOrder,
                    truncation: Optional[Truncation] = None) -> GroebnerBasis:
    """Reduced basis of <A> ∩ <B> by eliminating an auxiliary variable."""
    ctx = order.ctx
    if RESERVED in ctx:
        raise ReservedVariable(f"context already contains the reserved variable {RESERVED!r}")
    A = [a for a in A if not a.is_zero()]
    B = [b for b in B if not b.is_zero()]
    if not A or not B:
        return GroebnerBasis([], order, True, truncation)
    big, inj = ctx.extend([RESERVED])
    big_order = order.with_block(big, [RESERVED])
    t = big.var(RESERVED)
    F = [t * inj(a) for a in A] + [(1 - t) * inj(b) for b in B]
    big_trunc = None
    if truncation is not None:
        big_trunc = Truncation((0,) + tuple(truncation.weights), truncation.bound)
    G = buchberger(F, big_order, big_trunc)
    keep = [inj.restrict(g) for g in G.generators if g.degree_in(RESERVED) <= 0]
    if not keep:
        return GroebnerBasis([], order, True, truncation)
    return reduce_basis(GroebnerBasis(keep, order, False, truncation))


def ideal_equal(A, B, order: MonomialOrder, truncation: Optional[Truncation] = None) -> bool:
    """Mutual containment checked by normal forms against completed bases."""
    A = [a for a in _basis_list(A) if not a.is_zero()]
    B = [b for b in _basis_list(B) if not b.is_zero()]
    return ideal_contains(A, B, order, truncation) and ideal_contains(B, A, order, truncation)


def ideal_contains(A, B, order: MonomialOrder, truncation: Optional[Truncation] = None) -> bool:
    """True iff every element of ``B`` lies in <A> (up to the truncation bound)."""
    A = [a for a in _basis_list(A) if not a.is_zero()]
    B = [b for b in _basis_list(B) if not b.is_zero()]
    if not B:
        return True
    if not A:
        return False
    GA = buchberger(A, order, truncation)
    red = _Reducer(GA.generators, order)
    for b in B:
        if truncation is not None and b.weighted_degree(truncation.weights) > truncation.bound:
            continue
        if not red.reduce(b).is_zero():
            return False
    return True


def standard_monomials(G, degree_bound: int, weights: Optional[Sequence[int]] = None,
                       order: Optional[MonomialOrder] = None) -> List[Exp]:
    """Power products of weighted degree <= bound divisible by no leading power product.

    Leading coefficients other than one still cut the free part; over the
    integers such power products carry torsion and are excluded here only when
    the coefficient is a unit.
    """
    if isinstance(G, GroebnerBasis):
        order = G.order
    polys = _basis_list(G)
    ctx = order.ctx
    n = len(ctx)
    if weights is None:
        weights = (1,) * n
    leads = [p.leading(order) for p in polys]
    unit_leads = [t for t, c in leads if abs(c) == 1]
    if len(unit_leads) != len(leads):
        raise ValueError("standard monomials need a basis with unit leading coefficients")
    out: List[Exp] = []

    def rec(i: int, prefix: List[int], deg: int) -> None:
        if i == n:
            e = tuple(prefix)
            if not any(_divides(t, e) for t in unit_leads):
                out.append(e)
            return
        w = weights[i]
        k = 0
        while deg + w * k <= degree_bound:
            prefix.append(k)
            rec(i + 1, prefix, deg + w * k)
            prefix.pop()
            if w == 0:
                raise ValueError("zero weight makes the monomial scan infinite")
            k += 1

    rec(0, [], 0)
    key = order.key
    out.sort(key=lambda e: (sum(w * k for w, k in zip(weights, e)), key(e)))
    return out
