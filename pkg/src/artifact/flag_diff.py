"""Flag-manifold presentations, diagonal-fibration S-elements and loop-space differentials."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product
from math import factorial, gcd, prod
from typing import Dict, List, Optional, Sequence, Tuple

from .groebner import Truncation, groebner, ideal_equal, ideal_intersect, normal_form
from .poly import MonomialOrder, Polynomial, VarContext
from .symcomb import (
    binomial,
    elementary_sigma,
    prop_basis_expansion,
    standard_context,
    tilde_basis_map,
    tilde_context,
)

STANDARD = "standard"
TILDE = "tilde"


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class FlagPresentation:
    n: int
    kind: str
    signed: bool
    ctx: VarContext
    generators: Tuple[Polynomial, ...]

    def order(self) -> MonomialOrder:
        return MonomialOrder.lex(self.ctx)


def flag_presentation(n: int, kind: str = STANDARD, signed: bool = False) -> FlagPresentation:
    """``Z[c1..c_{n+1}]/<sigma_1..sigma_{n+1}>`` or its n-variable tilde form."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if kind == STANDARD:
        ctx = standard_context(n)
        vs = [ctx.var(f"c{i}") for i in range(1, n + 2)]
        gens = tuple(elementary_sigma(n + 1, l, variables=vs) for l in range(1, n + 2))
    elif kind == TILDE:
        ctx = tilde_context(n)
        gens = tuple(prop_basis_expansion(n, l, signed) for l in range(2, n + 2))
    else:
        raise ValueError(f"unknown basis kind {kind!r}")
    return FlagPresentation(n, kind, signed, ctx, gens)


# ---------------------------------------------------------------------------
# index vectors and orbits


@dataclass(frozen=True)
class IndexVector:
    entries: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))
        if any(e < 0 for e in self.entries):
            raise ValueError("index vector entries must be non-negative")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def L(self) -> int:
        return sum(1 for e in self.entries if e)

    @property
    def x(self) -> int:
        """1-based position of the first positive entry."""
        for i, e in enumerate(self.entries):
            if e > 0:
                return i + 1
        raise ValueError("x is undefined for the zero vector")

    @property
    def size(self) -> int:
        return sum(self.entries)

    def permuted(self, perm: Sequence[int]) -> "IndexVector":
        return IndexVector(tuple(self.entries[p] for p in perm))


def _iv(v) -> IndexVector:
    return v if isinstance(v, IndexVector) else IndexVector(tuple(v))


def zeta_orbit(a, b) -> List[Tuple[IndexVector, IndexVector]]:
    """Distinct pairs ``(a o pi, b o pi)`` over all permutations pi."""
    a, b = _iv(a), _iv(b)
    if len(a) != len(b):
        raise ValueError("index vectors must have equal length")
    seen: Dict[Tuple[tuple, tuple], None] = {}
    for perm in permutations(range(len(a))):
        seen.setdefault((a.permuted(perm).entries, b.permuted(perm).entries), None)
    return [(IndexVector(p), IndexVector(q)) for p, q in seen]


# ---------------------------------------------------------------------------
# diagonal fibration elements


def uv_context(n: int) -> VarContext:
    return VarContext([f"v{i}" for i in range(1, n + 1)] + [f"u{i}" for i in range(1, n + 1)])


def ab_context(n: int) -> VarContext:
    return VarContext([f"a{i}" for i in range(1, n + 1)] + [f"b{i}" for i in range(1, n + 1)])


def uv_to_ab(n: int) -> Dict[str, Polynomial]:
    """``v_i = a_i - b_i`` and ``u_i = b_i``."""
    A = ab_context(n)
    out = {}
    for i in range(1, n + 1):
        out[f"v{i}"] = A.var(f"a{i}") - A.var(f"b{i}")
        out[f"u{i}"] = A.var(f"b{i}")
    return out


def ab_to_uv(n: int) -> Dict[str, Polynomial]:
    """Inverse change of basis: ``a_i = v_i + u_i`` and ``b_i = u_i``."""
    U = uv_context(n)
    out = {}
    for i in range(1, n + 1):
        out[f"a{i}"] = U.var(f"v{i}") + U.var(f"u{i}")
        out[f"b{i}"] = U.var(f"u{i}")
    return out


@dataclass
class DiagonalElement:
    """``sum_k y'_k * p_k`` with ``p_k`` a polynomial in ``v``, ``u``."""

    n: int
    parts: Dict[int, Polynomial] = field(default_factory=dict)

    def add_term(self, k: int, p: Polynomial) -> None:
        q = self.parts.get(k, uv_context(self.n).zero()) + p
        if q.is_zero():
            self.parts.pop(k, None)
        else:
            self.parts[k] = q

    def __add__(self, other: "DiagonalElement") -> "DiagonalElement":
        out = DiagonalElement(self.n, dict(self.parts))
        for k, p in other.parts.items():
            out.add_term(k, p)
        return out

    def scale(self, c: int) -> "DiagonalElement":
        if c == 0:
            return DiagonalElement(self.n)
        return DiagonalElement(self.n, {k: p.scale(c) for k, p in self.parts.items()})

    def is_zero(self) -> bool:
        return not self.parts

    def d2(self) -> Polynomial:
        """Second differential in ``a``, ``b`` coordinates, from ``y'_k -> v_k``."""
        U = uv_context(self.n)
        total = U.zero()
        for k, p in self.parts.items():
            total = total + U.var(f"v{k}") * p
        return total.substitute_many(uv_to_ab(self.n), target=ab_context(self.n))

    def loop_image(self, ctx: VarContext) -> Polynomial:
        """Image in ``Z[y, c]``: ``y'_k -> y_k``, ``u_i -> c_i``, ``v_i -> 0``."""
        sub = {}
        for i in range(1, self.n + 1):
            sub[f"v{i}"] = ctx.zero()
            sub[f"u{i}"] = ctx.var(f"c{i}")
        total = ctx.zero()
        for k, p in self.parts.items():
            total = total + ctx.var(f"y{k}") * p.substitute_many(sub, target=ctx)
        return total

    def __eq__(self, other) -> bool:
        return isinstance(other, DiagonalElement) and self.n == other.n and self.parts == other.parts


def build_s_lower(a, b) -> DiagonalElement:
    a, b = _iv(a), _iv(b)
    if a.size == 0:
        raise ValueError("s needs some positive entry in a")
    n = len(a)
    U = uv_context(n)
    out = DiagonalElement(n)
    for ap, bp in zeta_orbit(a, b):
        x = ap.x
        e = list(ap.entries) + list(bp.entries)
        e[x - 1] -= 1
        out.add_term(x, U.monomial(tuple(e)))
    return out


def small_s_closed_form(a, b) -> Polynomial:
    """Binomially expanded differential of ``s``, written directly in ``a``, ``b``."""
    a, b = _iv(a), _iv(b)
    n = len(a)
    A = ab_context(n)
    total = A.zero()
    for ap, bp in zeta_orbit(a, b):
        for t in product(*(range(k + 1) for k in ap)):
            coeff = prod((-1) ** (ak - tk) * binomial(ak, tk) for ak, tk in zip(ap, t))
            e = tuple(t) + tuple(bk + ak - tk for ak, bk, tk in zip(ap, bp, t))
            total = total + A.monomial(e).scale(coeff)
    return total


def verify_small_s_differential(a, b) -> bool:
    return build_s_lower(a, b).d2() == small_s_closed_form(a, b)


def _zero_trailing_sequences(length: int, total: int):
    """Non-negative sequences of the given length and sum whose zeros only trail."""
    if length == 0:
        if total == 0:
            yield ()
        return

    def rec(prefix: List[int], left: int):
        if len(prefix) == length:
            if left == 0:
                yield tuple(prefix)
            return
        if prefix and prefix[-1] == 0:
            if left == 0:
                yield tuple(prefix) + (0,) * (length - len(prefix))
            return
        for v in range(left, -1, -1):
            prefix.append(v)
            yield from rec(prefix, left - v)
            prefix.pop()

    yield from rec([], total)


def truncated_multinomial_sum(c: int, t: int) -> int:
    """``sum (-1)^(t+L(a)) c!/(a_1!..a_c! t!)`` over zero-trailing ``a`` of sum ``c-t``."""
    total = 0
    for a in _zero_trailing_sequences(c, c - t):
        L = sum(1 for x in a if x)
        coeff = factorial(c) // (prod(factorial(x) for x in a) * factorial(t))
        total += (-1) ** (t + L) * coeff
    return total


def build_S_upper(c) -> DiagonalElement:
    """Combination of ``s`` elements whose differential separates ``a`` from ``b``.

    Each distinct ``s`` element is taken once, so ``t`` runs over orbit
    representatives of the symmetries of ``c``.
    """
    c = _iv(c)
    if c.size == 0:
        raise ValueError("S needs a nonzero index vector")
    n = len(c)
    out = DiagonalElement(n)
    seen = set()
    for t in product(*(range(k + 1) for k in c)):
        if not any(t):
            continue
        rest = tuple(ci - ti for ci, ti in zip(c, t))
        key = frozenset((p.entries, q.entries) for p, q in zeta_orbit(t, rest))
        if key in seen:
            continue
        seen.add(key)
        coeff = prod(truncated_multinomial_sum(ci, ti) for ci, ti in zip(c, t))
        if coeff:
            out = out + build_s_lower(t, rest).scale(coeff)
    return out


def d2_bigS_closed_form(c) -> Polynomial:
    """``(-1)^|c| (sum_orbit a^c - sum_orbit b^c)``."""
    c = _iv(c)
    n = len(c)
    A = ab_context(n)
    total = A.zero()
    for cp, _ in zeta_orbit(c, c):
        total = total + A.monomial(cp.entries + (0,) * n) - A.monomial((0,) * n + cp.entries)
    return total.scale((-1) ** c.size)


def verify_d2_bigS(c) -> bool:
    return build_S_upper(c).d2() == d2_bigS_closed_form(c)


def _sorted_compositions(n: int, l: int):
    """Weakly decreasing length-n vectors of sum l: one per permutation class."""
    def rec(prefix, left, cap):
        if len(prefix) == n:
            if left == 0:
                yield tuple(prefix)
            return
        for v in range(min(left, cap), -1, -1):
            yield from rec(prefix + [v], left - v, v)
    yield from rec([], l, l)


def diagonal_differential(n: int, l: int) -> DiagonalElement:
    """Sum of ``S^c`` over the permutation classes of ``c`` with ``|c| = l``."""
    out = DiagonalElement(n)
    for c in _sorted_compositions(n, l):
        out = out + build_S_upper(c)
    return out


def verify_diagonal_differential(n: int, l: int) -> bool:
    """The summed S-elements map to ``(-1)^l (h_l(a) - h_l(b))``."""
    from .symcomb import complete_h
    A = ab_context(n)
    ha = complete_h(n, l, variables=[A.var(f"a{i}") for i in range(1, n + 1)])
    hb = complete_h(n, l, variables=[A.var(f"b{i}") for i in range(1, n + 1)])
    return diagonal_differential(n, l).d2() == (ha - hb).scale((-1) ** l)


# ---------------------------------------------------------------------------
# loop-space differentials

RAW = "raw"
TILDE_UNREDUCED = "tilde-unreduced"
TILDE_FORM = "tilde"
SIGNED_TILDE = "signed-tilde"
SIGNED_TILDE_UNREDUCED = "signed-tilde-unreduced"
FORMS = (RAW, TILDE_UNREDUCED, TILDE_FORM, SIGNED_TILDE, SIGNED_TILDE_UNREDUCED)


def y_names(n: int) -> List[str]:
    return [f"y{i}" for i in range(1, n + 1)]


def raw_context(n: int) -> VarContext:
    return VarContext(y_names(n) + [f"c{i}" for i in range(n, 0, -1)])


def loop_context(n: int) -> VarContext:
    """``y1 .. yn`` followed by the tilde variables; lex gives ``y1 > .. > gb``."""
    return VarContext(y_names(n) + list(tilde_context(n).names))


def gamma_tilde(n: int, i: int, ctx: VarContext, signed: bool = False) -> Polynomial:
    """``g_i`` for i < n and ``(n+1)*gb - sum g`` for i = n; ``signed`` flips gb."""
    gb = ctx.var("gb") * (-1 if signed else 1)
    if i < n:
        return ctx.var(f"g{i}")
    return gb * (n + 1) - sum((ctx.var(f"g{k}") for k in range(1, n)), ctx.zero())


def differential_image(n: int, l: int, form: str = TILDE_FORM) -> Polynomial:
    """Image of ``x_{2(l-1)}`` under ``d^{2(l-1)}``, for ``2 <= l <= n+1``."""
    if not 2 <= l <= n + 1:
        raise ValueError(f"need 2 <= l <= n+1, got l={l}, n={n}")
    if form not in FORMS:
        raise ValueError(f"unknown form {form!r}; expected one of {FORMS}")
    if form == RAW:
        ctx = raw_context(n)
        total = ctx.zero()
        width = len(ctx)
        for c in product(range(l + 1), repeat=n):
            if sum(c) != l:
                continue
            for j in range(1, n + 1):
                if c[j - 1] == 0:
                    continue
                e = [0] * width
                e[ctx.index(f"y{j}")] = 1
                for i in range(1, n + 1):
                    e[ctx.index(f"c{i}")] += c[i - 1] - (1 if i == j else 0)
                total = total + ctx.monomial(tuple(e)).scale(c[j - 1])
        return total
    ctx = loop_context(n)
    signed = form in (SIGNED_TILDE,)
    alternate = form in (SIGNED_TILDE, SIGNED_TILDE_UNREDUCED)
    unreduced = form in (TILDE_UNREDUCED, SIGNED_TILDE_UNREDUCED)
    gb = ctx.var("gb")
    total = ctx.zero()
    for i in range(1, n + 1):
        gt = gamma_tilde(n, i, ctx, signed)
        body = (gt - gb) ** (l - 2) * gt if unreduced else gt ** (l - 1)
        sign = (-1) ** (i + 1) if alternate else 1
        total = total + ctx.var(f"y{i}") * body.scale(sign)
    return total


def raw_to_tilde(p: Polynomial, n: int) -> Polynomial:
    """Rewrite a ``Z[y, c1..cn]`` polynomial in the tilde variables."""
    ctx = loop_context(n)
    tmap = tilde_basis_map(n)
    sub = {name: q.map_context(ctx) for name, q in tmap.items() if name != f"c{n + 1}"}
    for y in y_names(n):
        sub[y] = ctx.var(y)
    return p.substitute_many(sub, target=ctx)


def _y_linear_ideal_gb(n: int, gens: Sequence[Polynomial], degree: int):
    """Truncated basis for a y-linear homogeneous module presented as an ideal."""
    ctx = loop_context(n)
    heavy = degree + 2
    weights = tuple(heavy if nm.startswith("y") else 1 for nm in ctx.names)
    trunc = Truncation(weights, heavy + degree - 1)
    return groebner(list(gens), MonomialOrder.lex(ctx), truncation=trunc)


def symmetric_y_multiples(n: int) -> List[Polynomial]:
    ctx = loop_context(n)
    J = [g.map_context(ctx) for g in flag_presentation(n, TILDE).generators]
    return [ctx.var(y) * g for y in y_names(n) for g in J]


def verify_inductive_diff(n: int, l: int) -> Dict[str, bool]:
    """Check the raw image against the tilde forms.

    ``unreduced``: the raw image rewritten in tilde variables equals the
    unreduced form up to sign, modulo the symmetric relations.
    ``reduced``: the unreduced and reduced forms agree up to sign modulo the
    symmetric relations and the lower differentials.
    """
    raw = raw_to_tilde(differential_image(n, l, RAW), n)
    unred = differential_image(n, l, TILDE_UNREDUCED)
    red = differential_image(n, l, TILDE_FORM)
    J = symmetric_y_multiples(n)
    lower = [differential_image(n, t, TILDE_UNREDUCED) for t in range(2, l)]
    G1 = _y_linear_ideal_gb(n, J, l)
    G2 = _y_linear_ideal_gb(n, J + lower, l)

    def zero_mod(G, p):
        return normal_form(p, G.generators, G.order).is_zero()

    return {
        "unreduced": any(zero_mod(G1, raw - unred.scale(s)) for s in (1, -1)),
        "reduced": any(zero_mod(G2, unred - red.scale(s)) for s in (1, -1)),
    }


# ---------------------------------------------------------------------------
# exterior products of y-monomials inside a commutative context


def exterior_multiply(p: Polynomial, q: Polynomial, names: Sequence[str]) -> Polynomial:
    """Product with the named variables anticommuting and squaring to zero."""
    ctx = p.ctx
    idx = [ctx.index(nm) for nm in names]
    terms: Dict[tuple, int] = {}
    for e1, c1 in p.terms.items():
        ys1 = [k for k, i in enumerate(idx) if e1[i]]
        for e2, c2 in q.terms.items():
            ys2 = [k for k, i in enumerate(idx) if e2[i]]
            if set(ys1) & set(ys2):
                continue
            inversions = sum(1 for a in ys1 for b in ys2 if a > b)
            e = tuple(x + y for x, y in zip(e1, e2))
            c = c1 * c2 * (-1) ** inversions
            terms[e] = terms.get(e, 0) + c
    return Polynomial(ctx, {e: c for e, c in terms.items() if c})


def y_hat(n: int, omit: Sequence[int], ctx: Optional[VarContext] = None) -> Polynomial:
    """``y1 .. yn`` in ascending order with the listed indices removed."""
    ctx = ctx or loop_context(n)
    out = ctx.const(1)
    for i in range(1, n + 1):
        if i not in omit:
            out = out * ctx.var(f"y{i}")
    return out


# ---------------------------------------------------------------------------
# top-row ideal identities

COEFFICIENT_RULES = ("lcm-next-binomial", "lcm-binomial", "exact")


@dataclass(frozen=True)
class IdealsSides:
    part: int
    n: int
    l: int
    jp: Optional[int]
    lhs: Tuple[Tuple[Polynomial, ...], ...]
    rhs: Tuple[Polynomial, ...]


def _top_row_differentials(n: int, l: int) -> List[Polynomial]:
    """``y-hat_j * d^{2l}(x_{2l})`` for j = 1..n, computed exteriorly."""
    ctx = loop_context(n)
    d = differential_image(n, l + 1, SIGNED_TILDE_UNREDUCED)
    return [exterior_multiply(y_hat(n, [j], ctx), d, y_names(n)) for j in range(1, n + 1)]


def _top_row_symmetric(n: int, jps: Sequence[int]) -> List[Polynomial]:
    ctx = loop_context(n)
    top = y_hat(n, [], ctx)
    return [top * prop_basis_expansion(n, jp).map_context(ctx) for jp in jps]


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b) if a and b else 0


def top_row_ideal_sides(n: int, l: int, jp: Optional[int] = None, part: int = 1,
                         coefficient_rule: str = "exact") -> IdealsSides:
    """Generator lists for the two top-row ideal identities.

    Part 1: ``lhs[0]`` holds the top-row images of ``d^2 .. d^{2l}`` together
    with the symmetric relations, ``rhs`` the monomial-type generators.
    Part 2: ``lhs`` holds the two ideals to intersect, ``rhs`` the predicted
    intersection.  ``jp=None`` takes every symmetric relation.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 1 <= l <= n:
        raise ValueError(f"need 1 <= l <= n, got l={l}")
    if jp is not None and not 2 <= jp <= n + 1:
        raise ValueError(f"need 2 <= j' <= n+1, got j'={jp}")
    if coefficient_rule not in COEFFICIENT_RULES:
        raise ValueError(f"unknown coefficient rule {coefficient_rule!r}")
    ctx = loop_context(n)
    top = y_hat(n, [], ctx)
    jps = list(range(2, n + 2)) if jp is None else [jp]
    sym = _top_row_symmetric(n, jps)
    if part == 1:
        lhs = [p for t in range(1, l + 1) for p in _top_row_differentials(n, t)] + sym
        rhs = [top * ctx.var(f"g{i}") for i in range(1, n)]
        rhs += [top * ctx.var("gb") ** k * binomial(n + 1, k) for k in range(1, n + 2)]
        return IdealsSides(1, n, l, jp, (tuple(lhs),), tuple(rhs))
    if part != 2:
        raise ValueError("part must be 1 or 2")
    left = _top_row_differentials(n, l)
    right = [p for t in range(1, l) for p in _top_row_differentials(n, t)] + sym
    if l > 1:
        return IdealsSides(2, n, l, jp, (tuple(left), tuple(right)), tuple(left))
    pred: List[Polynomial] = []
    for j, h in zip(jps, sym):
        if coefficient_rule == "lcm-next-binomial":
            coeff = _lcm(n + 1, binomial(n + 1, l + 1))
        elif coefficient_rule == "lcm-binomial":
            coeff = _lcm(n + 1, binomial(n + 1, l))
        else:
            coeff = (n + 1) // gcd(n + 1, binomial(n + 1, j))
        pred.append(h.scale(coeff))
        pred += [h * ctx.var(f"g{i}") for i in range(1, n)]
        pred.append(h * ctx.var("gb") * (n + 1))
    return IdealsSides(2, n, l, jp, (tuple(left), tuple(right)), tuple(pred))


def _top_order(n: int) -> MonomialOrder:
    return MonomialOrder.lex(loop_context(n))


def verify_ideals_part1(n: int, l: int, jp: Optional[int] = None) -> bool:
    sides = top_row_ideal_sides(n, l, jp, part=1)
    return ideal_equal(list(sides.lhs[0]), list(sides.rhs), _top_order(n))


def top_row_intersection(n: int, l: int, jp: Optional[int] = None) -> List[Polynomial]:
    sides = top_row_ideal_sides(n, l, jp, part=2)
    left, right = sides.lhs
    return ideal_intersect(list(left), list(right), _top_order(n)).generators


def verify_ideals_part2(n: int, l: int, jp: Optional[int] = None,
                        coefficient_rule: str = "exact") -> bool:
    sides = top_row_ideal_sides(n, l, jp, part=2, coefficient_rule=coefficient_rule)
    return ideal_equal(top_row_intersection(n, l, jp), list(sides.rhs), _top_order(n))
