"""Sparse multivariate polynomials over the integers.

A polynomial is an immutable map from exponent tuples to nonzero Python
ints, bound to a :class:`VarContext`.  Monomial orders are lexicographic
over a variable ranking, optionally with an elimination block placed above
every other variable.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

Exp = Tuple[int, ...]

LT, EQ, GT = -1, 0, 1


class ContextMismatch(ValueError):
    pass


class ParseError(ValueError):
    """Raised by :func:`parse` with the offending position and expected token class."""

    def __init__(self, text: str, pos: int, expected: str):
        self.text = text
        self.pos = pos
        self.expected = expected
        super().__init__(f"parse error at position {pos}: expected {expected} in {text!r}")


class VarContext:
    """An ordered, immutable list of variable names."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        for name in names:
            if not _NAME_RE.fullmatch(name):
                raise ValueError(f"invalid variable name {name!r}")
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other) -> bool:
        return isinstance(other, VarContext) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"VarContext({list(self.names)})"

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def var(self, name: str) -> "Polynomial":
        e = [0] * len(self.names)
        e[self.index(name)] = 1
        return Polynomial(self, {tuple(e): 1})

    def gens(self) -> List["Polynomial"]:
        return [self.var(n) for n in self.names]

    def const(self, c: int) -> "Polynomial":
        return Polynomial(self, {self.one_exp(): c} if c else {})

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one_exp(self) -> Exp:
        return (0,) * len(self.names)

    def monomial(self, exp: Exp, coef: int = 1) -> "Polynomial":
        return Polynomial(self, {tuple(exp): coef} if coef else {})

    def extend(self, new_names: Sequence[str], front: bool = True) -> Tuple["VarContext", "Injection"]:
        """Return a larger context and the injection from this one into it."""
        names = (tuple(new_names) + self.names) if front else (self.names + tuple(new_names))
        ctx = VarContext(names)
        return ctx, Injection(self, ctx)

    def parse(self, text: str) -> "Polynomial":
        return parse(text, self)


class Injection:
    """Map polynomials from a context into a larger one by variable name."""

    def __init__(self, source: VarContext, target: VarContext):
        self.source = source
        self.target = target
        self._pos = [target.index(n) for n in source.names]

    def __call__(self, f: "Polynomial") -> "Polynomial":
        if f.ctx != self.source:
            raise ContextMismatch("polynomial is not in the source context")
        width = len(self.target)
        terms = {}
        for e, c in f.terms.items():
            ne = [0] * width
            for i, k in enumerate(e):
                if k:
                    ne[self._pos[i]] = k
            terms[tuple(ne)] = c
        return Polynomial(self.target, terms)

    def restrict(self, f: "Polynomial") -> "Polynomial":
        """Inverse map; fails if f uses a variable outside the source."""
        keep = set(self._pos)
        terms = {}
        for e, c in f.terms.items():
            if any(k and i not in keep for i, k in enumerate(e)):
                raise ValueError("polynomial involves variables outside the source context")
            terms[tuple(e[p] for p in self._pos)] = c
        return Polynomial(self.source, terms)


@dataclass(frozen=True)
class MonomialOrder:
    """Lexicographic order on a context.

    ``ranking`` lists variable indices from most to least significant.  An
    elimination block is a set of variables placed ahead of all others; it is
    stored separately so the order can describe itself.
    """

    ctx: VarContext
    ranking: Tuple[int, ...]
    block: Tuple[int, ...] = ()

    @classmethod
    def lex(cls, ctx: VarContext, ranking: Optional[Sequence[str]] = None,
            block: Sequence[str] = ()) -> "MonomialOrder":
        """Lex order with ``ranking`` given from the largest variable down.

        Variables not named in ``ranking`` follow in context order.  Names in
        ``block`` are moved in front of everything else.
        """
        names = list(ranking) if ranking is not None else list(ctx.names)
        for n in ctx.names:
            if n not in names:
                names.append(n)
        if len(names) != len(ctx) or set(names) != set(ctx.names):
            raise ValueError(f"ranking {names} does not match context {ctx.names}")
        blk = [ctx.index(n) for n in block]
        rest = [ctx.index(n) for n in names if n not in block]
        return cls(ctx, tuple(blk + rest), tuple(blk))

    def key(self, e: Exp) -> Exp:
        return tuple([e[i] for i in self.ranking])

    def compare(self, a: Exp, b: Exp) -> int:
        if len(a) != len(self.ctx) or len(b) != len(self.ctx):
            raise ContextMismatch("power product length does not match the order's context")
        ka, kb = self.key(a), self.key(b)
        return GT if ka > kb else (LT if ka < kb else EQ)

    def with_block(self, ctx: VarContext, block: Sequence[str]) -> "MonomialOrder":
        """The same ranking transported to ``ctx`` with ``block`` on top."""
        names = [self.ctx.names[i] for i in self.ranking]
        return MonomialOrder.lex(ctx, list(block) + names, block)

    def describe(self) -> dict:
        return {
            "kind": "lex",
            "ranking": [self.ctx.names[i] for i in self.ranking],
            "block": [self.ctx.names[i] for i in self.block],
        }

    @classmethod
    def from_description(cls, ctx: VarContext, desc: Mapping) -> "MonomialOrder":
        if desc.get("kind", "lex") != "lex":
            raise ValueError(f"unsupported order kind {desc.get('kind')!r}")
        return cls.lex(ctx, desc["ranking"], desc.get("block", ()))


class Polynomial:
    __slots__ = ("ctx", "terms", "_hash")

    def __init__(self, ctx: VarContext, terms: Mapping[Exp, int]):
        self.ctx = ctx
        self.terms: Dict[Exp, int] = {e: c for e, c in terms.items() if c}
        self._hash = None

    # construction helpers -------------------------------------------------
    @staticmethod
    def _wrap(ctx: VarContext, terms: Dict[Exp, int]) -> "Polynomial":
        p = Polynomial.__new__(Polynomial)
        p.ctx = ctx
        p.terms = terms
        p._hash = None
        return p

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ctx != self.ctx:
                raise ContextMismatch(f"{self.ctx} vs {other.ctx}")
            return other
        if isinstance(other, int):
            return self.ctx.const(other)
        return NotImplemented

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for e, c in other.terms.items():
            v = terms.get(e, 0) + c
            if v:
                terms[e] = v
            else:
                terms.pop(e, None)
        return Polynomial._wrap(self.ctx, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._wrap(self.ctx, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: Dict[Exp, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple([a + b for a, b in zip(e1, e2)])
                v = terms.get(e, 0) + c1 * c2
                if v:
                    terms[e] = v
                else:
                    del terms[e]
        return Polynomial._wrap(self.ctx, terms)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = self.ctx.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c: int) -> "Polynomial":
        if not c:
            return Polynomial._wrap(self.ctx, {})
        return Polynomial._wrap(self.ctx, {e: c * v for e, v in self.terms.items()})

    def mul_term(self, exp: Exp, c: int) -> "Polynomial":
        """Multiply by the single term ``c * x^exp``."""
        if not c:
            return Polynomial._wrap(self.ctx, {})
        return Polynomial._wrap(
            self.ctx, {tuple([a + b for a, b in zip(e, exp)]): c * v for e, v in self.terms.items()})

    # comparison -------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = self.ctx.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ctx, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # order-dependent views --------------------------------------------------
    def sorted_terms(self, order: MonomialOrder) -> List[Tuple[Exp, int]]:
        """Terms in strictly descending order under ``order``."""
        self._check_order(order)
        key = order.key
        return sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)

    def __iter__(self) -> Iterator[Tuple[Exp, int]]:
        return iter(self.sorted_terms(default_order(self.ctx)))

    def leading(self, order: MonomialOrder) -> Tuple[Exp, int]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        self._check_order(order)
        key = order.key
        e = max(self.terms, key=key)
        return e, self.terms[e]

    def _check_order(self, order: MonomialOrder) -> None:
        if order.ctx != self.ctx:
            raise ContextMismatch("order and polynomial use different contexts")

    # degrees ----------------------------------------------------------------
    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def weighted_degrees(self, weights: Sequence[int]) -> set:
        return {sum(w * k for w, k in zip(weights, e)) for e in self.terms}

    def weighted_degree(self, weights: Sequence[int]) -> int:
        degs = self.weighted_degrees(weights)
        return max(degs) if degs else -1

    def is_homogeneous(self, weights: Optional[Sequence[int]] = None) -> bool:
        if weights is None:
            weights = [1] * len(self.ctx)
        return len(self.weighted_degrees(weights)) <= 1

    def degree_in(self, name: str) -> int:
        i = self.ctx.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def variables(self) -> List[str]:
        used = set()
        for e in self.terms:
            used.update(i for i, k in enumerate(e) if k)
        return [self.ctx.names[i] for i in sorted(used)]

    def content(self) -> int:
        """GCD of the absolute coefficient values (0 for the zero polynomial)."""
        from math import gcd
        g = 0
        for c in self.terms.values():
            g = gcd(g, c)
        return abs(g)

    def coefficient(self, exp: Exp) -> int:
        return self.terms.get(tuple(exp), 0)

    # substitution -----------------------------------------------------------
    def substitute(self, var: str, replacement: "Polynomial") -> "Polynomial":
        return self.substitute_many({var: replacement})

    def substitute_many(self, mapping: Mapping[str, "Polynomial"],
                        target: Optional[VarContext] = None) -> "Polynomial":
        """Apply the ring map sending each named variable to its image.

        Variables not in ``mapping`` are sent to the same-named variable of
        ``target`` (which defaults to the context of the images).
        """
        if target is None:
            ctxs = {p.ctx for p in mapping.values()}
            if len(ctxs) > 1:
                raise ContextMismatch("replacements live in different contexts")
            target = ctxs.pop() if ctxs else self.ctx
        for name in mapping:
            self.ctx.index(name)
        images = []
        for name in self.ctx.names:
            if name in mapping:
                img = mapping[name]
                if img.ctx != target:
                    raise ContextMismatch(f"image of {name} is not in the target context")
            else:
                img = target.var(name)
            images.append(img)
        result = target.zero()
        cache: Dict[Tuple[int, int], Polynomial] = {}
        for e, c in self.terms.items():
            term = target.const(c)
            for i, k in enumerate(e):
                if k:
                    p = cache.get((i, k))
                    if p is None:
                        p = cache[(i, k)] = images[i] ** k
                    term = term * p
            result = result + term
        return result

    def map_context(self, target: VarContext) -> "Polynomial":
        """Move to another context that contains every variable used here."""
        pos = [target.index(n) if n in target else None for n in self.ctx.names]
        terms = {}
        for e, c in self.terms.items():
            ne = [0] * len(target)
            for i, k in enumerate(e):
                if k:
                    if pos[i] is None:
                        raise ContextMismatch(f"variable {self.ctx.names[i]} missing from target")
                    ne[pos[i]] = k
            terms[tuple(ne)] = c
        return Polynomial(target, terms)

    # printing ---------------------------------------------------------------
    def to_str(self, order: Optional[MonomialOrder] = None) -> str:
        if order is None:
            order = default_order(self.ctx)
        terms = self.sorted_terms(order)
        if not terms:
            return "0"
        parts = []
        for idx, (e, c) in enumerate(terms):
            mono = "*".join(
                self.ctx.names[i] + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k)
            a = abs(c)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            if idx == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"Polynomial({self.to_str()!r})"


_DEFAULT_ORDERS: Dict[VarContext, MonomialOrder] = {}


def default_order(ctx: VarContext) -> MonomialOrder:
    """Lex with the first context variable largest."""
    o = _DEFAULT_ORDERS.get(ctx)
    if o is None:
        o = _DEFAULT_ORDERS[ctx] = MonomialOrder.lex(ctx)
    return o


def compare(a: Exp, b: Exp, order: MonomialOrder) -> int:
    return order.compare(a, b)


def leading(f: Polynomial, order: MonomialOrder) -> Tuple[Exp, int]:
    return f.leading(order)


def substitute(f: Polynomial, var: str, replacement: Polynomial) -> Polynomial:
    return f.substitute(var, replacement)


def total_degree(f: Polynomial) -> int:
    return f.total_degree()


def is_homogeneous(f: Polynomial, weights: Optional[Sequence[int]] = None) -> bool:
    return f.is_homogeneous(weights)


def weights_for(ctx: VarContext, by_name: Mapping[str, int], default: int = 1) -> Tuple[int, ...]:
    """Weight vector for ``ctx`` from a name map; unnamed variables get ``default``."""
    return tuple(by_name.get(n, default) for n in ctx.names)


# ---------------------------------------------------------------------------
# text grammar
#
#   expr   := ['+'|'-'] term (('+'|'-') term)*
#   term   := factor ('*' factor)*
#   factor := atom ('^' INT)?
#   atom   := INT | NAME | '(' expr ')'
# ---------------------------------------------------------------------------

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN_RE = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^()]))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(text, pos, "integer, variable name or operator")
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, ctx: VarContext):
        self.text = text
        self.ctx = ctx
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Polynomial:
        if self.peek()[0] == "end":
            raise ParseError(self.text, self.peek()[2], "polynomial expression")
        p = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(self.text, pos, "'+', '-', '*' or end of input")
        return p

    def expr(self) -> Polynomial:
        sign = 1
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        result = self.term().scale(sign)
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                result = result + t if val == "+" else result - t
            else:
                return result

    def term(self) -> Polynomial:
        result = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                result = result * self.factor()
            else:
                return result

    def factor(self) -> Polynomial:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "int":
                raise ParseError(self.text, pos, "non-negative integer exponent")
            base = base ** int(val)
        return base

    def atom(self) -> Polynomial:
        kind, val, pos = self.take()
        if kind == "int":
            return self.ctx.const(int(val))
        if kind == "name":
            if val not in self.ctx:
                raise ParseError(self.text, pos, f"variable from {list(self.ctx.names)}")
            return self.ctx.var(val)
        if kind == "op" and val == "(":
            inner = self.expr()
            kind, val, pos = self.take()
            if not (kind == "op" and val == ")"):
                raise ParseError(self.text, pos, "')'")
            return inner
        raise ParseError(self.text, pos, "integer, variable name or '('")


def parse(text: str, ctx: VarContext) -> Polynomial:
    """Parse ``text`` in the polynomial grammar over ``ctx``."""
    return _Parser(text, ctx).parse()
