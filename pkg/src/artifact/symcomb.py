"""Symmetric polynomials, the tilde change of basis, and counting identities."""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations, combinations_with_replacement
from math import comb, factorial, prod
from typing import Dict, List, Optional, Sequence

from .poly import Polynomial, VarContext


# ---------------------------------------------------------------------------
# partitions and coefficient families


class Partition(tuple):
    """Weakly decreasing positive parts; trailing zeros are dropped."""

    def __new__(cls, parts: Sequence[int]):
        parts = [int(p) for p in parts]
        if any(p < 0 for p in parts):
            raise ValueError("partition parts must be non-negative")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts {parts} are not weakly decreasing")
        return super().__new__(cls, [p for p in parts if p])

    @property
    def size(self) -> int:
        return sum(self)


def binomial(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


def multinomial(n: int, *parts: int) -> int:
    if any(p < 0 for p in parts) or sum(parts) != n:
        return 0
    return factorial(n) // prod(factorial(p) for p in parts)


def multiset_coeff(n: int, k: int) -> int:
    """Number of size-k multisets from n kinds, ``C(n+k-1, k)``; zero for k < 0."""
    if k < 0:
        return 0
    if n == 0:
        return 1 if k == 0 else 0
    return comb(n + k - 1, k)


@lru_cache(maxsize=None)
def stirling2(n: int, m: int) -> int:
    if n == m:
        return 1
    if m <= 0 or m > n:
        return 0
    return stirling2(n - 1, m - 1) + m * stirling2(n - 1, m)


def stirling2_by_compositions(n: int, m: int) -> int:
    """``m! S(n, m)`` as a sum of multinomials over compositions with parts >= 1."""
    total = 0

    def rec(left: int, slots: int, acc: List[int]) -> None:
        nonlocal total
        if slots == 0:
            if left == 0:
                total += multinomial(n, *acc)
            return
        for a in range(1, left - slots + 2):
            acc.append(a)
            rec(left - a, slots - 1, acc)
            acc.pop()

    if m >= 1:
        rec(n, m, [])
    return total


def verify_alternating_multiset_sum(n: int, m: int) -> bool:
    return sum((-1) ** k * binomial(n, k) * multiset_coeff(n, m - k) for k in range(n + 1)) == 0


def verify_stirling_alternating(n: int) -> bool:
    return sum((-1) ** m * factorial(m) * stirling2(n, m) for m in range(1, n + 1)) == (-1) ** n


# ---------------------------------------------------------------------------
# symmetric polynomials


def default_context(n: int, prefix: str = "x") -> VarContext:
    """``prefix1 .. prefixn`` listed from the largest index down, so the
    default lex order has ``x1 < x2 < ... < xn``."""
    return VarContext([f"{prefix}{i}" for i in range(n, 0, -1)])


def _vars(n: int, ctx: Optional[VarContext], variables: Optional[Sequence[Polynomial]]) -> List[Polynomial]:
    if variables is not None:
        if len(variables) < n:
            raise ValueError("not enough variables supplied")
        return list(variables[:n])
    if ctx is None:
        ctx = default_context(n)
    return [ctx.var(f"x{i}") for i in range(1, n + 1)]


def _monomial_sum(vs: Sequence[Polynomial], l: int, ctx: VarContext, strict: bool) -> Polynomial:
    if l == 0:
        return ctx.const(1)
    width = len(ctx)
    idx = [next(iter(v.terms)).index(1) for v in vs]
    terms: Dict[tuple, int] = {}
    chooser = combinations if strict else combinations_with_replacement
    for tup in chooser(range(len(vs)), l):
        e = [0] * width
        for t in tup:
            e[idx[t]] += 1
        e = tuple(e)
        terms[e] = terms.get(e, 0) + 1
    return Polynomial(ctx, terms)


def _ctx_of(vs: Sequence[Polynomial], ctx: Optional[VarContext]) -> VarContext:
    if vs:
        return vs[0].ctx
    return ctx if ctx is not None else VarContext([])


def elementary_sigma(n: int, l: int, ctx: Optional[VarContext] = None,
                     variables: Optional[Sequence[Polynomial]] = None) -> Polynomial:
    if not 0 <= l <= n:
        raise ValueError(f"need 0 <= l <= n, got l={l}, n={n}")
    vs = _vars(n, ctx, variables)
    return _monomial_sum(vs, l, _ctx_of(vs, ctx), strict=True)


def sigma_lambda(n: int, lam: Sequence[int], ctx: Optional[VarContext] = None,
                 variables: Optional[Sequence[Polynomial]] = None) -> Polynomial:
    vs = _vars(n, ctx, variables)
    c = _ctx_of(vs, ctx)
    out = c.const(1)
    for part in Partition(sorted(lam, reverse=True)):
        out = out * elementary_sigma(n, part, c, vs)
    return out


def complete_h(n: int, l: int, ctx: Optional[VarContext] = None,
               variables: Optional[Sequence[Polynomial]] = None) -> Polynomial:
    if l < 0 or n < 0:
        raise ValueError(f"need l, n >= 0, got l={l}, n={n}")
    vs = _vars(n, ctx, variables) if n else []
    return _monomial_sum(vs, l, _ctx_of(vs, ctx) if vs else (ctx or default_context(max(n, 1))), strict=False)


def h_partial(a: int, b: int, ctx: Optional[VarContext] = None,
              variables: Optional[Sequence[Polynomial]] = None) -> Polynomial:
    """Complete homogeneous polynomial of degree ``a`` in the first ``b`` variables."""
    if a < 0 or b < 0:
        raise ValueError(f"need a, b >= 0, got a={a}, b={b}")
    if variables is None:
        if ctx is None:
            ctx = default_context(max(b, 1))
        variables = [ctx.var(f"x{i}") for i in range(1, b + 1)]
    elif len(variables) < b:
        raise ValueError("not enough variables supplied")
    vs = list(variables[:b])
    c = vs[0].ctx if vs else (ctx or variables[0].ctx if variables else ctx)
    if c is None:
        c = default_context(1)
    return _monomial_sum(vs, a, c, strict=False)


def check_sigma_h_relation(n: int, m: int) -> bool:
    """``sum_{t=0}^{m} (-1)^t sigma_t h_{n-t} == 0`` in ``m`` variables, ``1 <= m <= n``."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    ctx = default_context(m)
    total = ctx.zero()
    for t in range(m + 1):
        total = total + elementary_sigma(m, t, ctx) * complete_h(m, n - t, ctx) * (-1) ** t
    return total.is_zero()


def phi(n: int, k: int, kp: int, ctx: Optional[VarContext] = None) -> Polynomial:
    """Sum of all degree-k monomials in ``x1 .. x_{n-kp+1}``."""
    if not 1 <= kp <= k <= n:
        raise ValueError(f"need 1 <= k' <= k <= n, got k={k}, k'={kp}, n={n}")
    if ctx is None:
        ctx = default_context(n)
    vs = [ctx.var(f"x{i}") for i in range(1, n - kp + 2)]
    return _monomial_sum(vs, k, ctx, strict=False)


def phi_basis(n: int, ctx: Optional[VarContext] = None) -> List[Polynomial]:
    return [phi(n, k, k, ctx) for k in range(1, n + 1)]


# ---------------------------------------------------------------------------
# tilde basis
#
# Standard flag variables are c1 .. c_{n+1} (c_i stands for gamma_i); the
# tilde variables are g1 .. g_{n-1} and gb.  Modulo sigma_1 the last standard
# variable equals -gb, which is how c_{n+1} enters the map below.


def standard_context(n: int) -> VarContext:
    return VarContext([f"c{i}" for i in range(n + 1, 0, -1)])


def tilde_context(n: int) -> VarContext:
    return VarContext([f"g{i}" for i in range(n - 1, 0, -1)] + ["gb"])


def tilde_order(ctx: VarContext):
    """``g_{n-1} > ... > g1 > gb``; the ordering used for the loop-space engine."""
    from .poly import MonomialOrder
    return MonomialOrder.lex(ctx)


def tilde_order_gb_top(ctx: VarContext):
    """``g1 < ... < g_{n-1} < gb``."""
    from .poly import MonomialOrder
    gs = sorted((nm for nm in ctx.names if nm != "gb"), key=lambda s: int(s[1:]), reverse=True)
    return MonomialOrder.lex(ctx, ["gb"] + gs)


def tilde_basis_map(n: int, signed: bool = False) -> Dict[str, Polynomial]:
    """Images of ``c1 .. c_{n+1}`` in the tilde variables.

    ``c_i -> g_i - gb`` for i < n, ``c_n -> n*gb - sum g_i`` and
    ``c_{n+1} -> -gb``; ``signed`` composes with ``gb -> -gb``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    T = tilde_context(n)
    gb = T.var("gb") * (-1 if signed else 1)
    gs = [T.var(f"g{i}") for i in range(1, n)]
    out = {f"c{i}": gs[i - 1] - gb for i in range(1, n)}
    out[f"c{n}"] = gb * n - sum(gs, T.zero())
    out[f"c{n + 1}"] = -gb
    return out


def flag_variable_sequence(n: int) -> List[Polynomial]:
    """``c_{n+1}, c_1, c_2, ..., c_n``: the variable order in which the
    truncated complete homogeneous generators take their tilde form."""
    S = standard_context(n)
    return [S.var(f"c{n + 1}")] + [S.var(f"c{i}") for i in range(1, n + 1)]


def prop_basis_expansion(n: int, l: int, signed: bool = False) -> Polynomial:
    """``sum_k (-1)^(l-k) C(n+1, l-k) h_k(g1 .. g_{n-l+1}) gb^(l-k)``.

    ``signed`` applies ``gb -> -gb``, which turns every sign positive.
    """
    if not 2 <= l <= n + 1:
        raise ValueError(f"need 2 <= l <= n+1, got l={l}, n={n}")
    T = tilde_context(n)
    gb = T.var("gb")
    gs = [T.var(f"g{i}") for i in range(1, n - l + 2)]
    total = T.zero()
    for k in range(l + 1):
        sign = 1 if signed else (-1) ** (l - k)
        hk = _monomial_sum(gs, k, T, strict=False) if gs or k == 0 else T.zero()
        total = total + hk * (gb ** (l - k)) * (sign * binomial(n + 1, l - k))
    return total


def prop_basis_by_substitution(n: int, l: int, signed: bool = False) -> Polynomial:
    """The same generator computed by substituting the tilde map into ``h_l`` of
    the first ``n-l+2`` entries of :func:`flag_variable_sequence`."""
    h = h_partial(l, n - l + 2, variables=flag_variable_sequence(n))
    return h.substitute_many(tilde_basis_map(n, signed), target=tilde_context(n))
