"""Page-by-page computation of the evaluation-fibration spectral sequence.

The E2 page is ``Lambda(y_1..y_n) (x) Gamma[x_2..x_2n] (x) B`` with ``B`` the
tilde presentation of the flag-manifold cohomology.  The differential
``d^{2j}`` is the derivation sending ``(x_2j)_m`` to ``(x_2j)_{m-1} D_j`` where
``D_j`` is the signed tilde image.  Each page is stored degreewise as a pair
of integer lattices ``B ⊆ Z`` inside the E2 component, so ``E_r = Z/B``.

A component is keyed by ``(X, k, p)``: divided-power exponents
``X = (a_1..a_n)`` of ``x_2..x_2n``, the number ``k`` of exterior factors and
the polynomial degree ``p``.  Its total degree is ``2p + k + sum 2j a_j``.
"""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb, gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import intlinalg as la
from .flag_diff import (
    SIGNED_TILDE,
    TILDE,
    differential_image,
    exterior_multiply,
    flag_presentation,
    loop_context,
    y_names,
)
from .groebner import (
    GroebnerBasis,
    Truncation,
    buchberger,
    groebner,
    ideal_intersect,
    normal_form,
    standard_monomials,
    track_reduction,
)
from .poly import MonomialOrder, Polynomial, VarContext

Key = Tuple[Tuple[int, ...], int, int]
YSet = Tuple[int, ...]

SCHEMA = 1
SUPPORTED_N = (1, 2, 3)
THREADS_ENV = "ARTIFACT_THREADS"


class CapTooSmall(ValueError):
    def __init__(self, cap: int, needed: int):
        self.cap = cap
        self.needed = needed
        super().__init__(f"degree cap {cap} is below {needed}, the degree of the top base class")


class Unsupported(ValueError):
    pass


class RouteMismatch(AssertionError):
    """The lattice and Gröbner kernels disagree."""


class EngineInconsistency(AssertionError):
    pass


# ---------------------------------------------------------------------------
# base ring


class BaseRing:
    """``Z[g_{n-1}..g1, gb]`` modulo the signed tilde symmetric relations."""

    def __init__(self, n: int):
        pres = flag_presentation(n, TILDE, signed=True)
        self.n = n
        self.ctx: VarContext = pres.ctx
        self.order = MonomialOrder.lex(self.ctx)
        self.relations: Tuple[Polynomial, ...] = pres.generators
        self.basis: GroebnerBasis = groebner(list(pres.generators), self.order)
        bound = n * (n + 1) // 2 + 1
        mons = standard_monomials(self.basis, bound)
        self.std: Dict[int, List[tuple]] = {}
        for e in mons:
            self.std.setdefault(sum(e), []).append(e)
        if bound in self.std:
            raise EngineInconsistency("base ring is not finite in the expected degrees")
        key = self.order.key
        for p in self.std:
            self.std[p].sort(key=key, reverse=True)
        self.top = max(self.std)
        self.pos: Dict[tuple, int] = {e: i for p in self.std for i, e in enumerate(self.std[p])}
        self._mult_cache: Dict[Tuple[Polynomial, int], la.Matrix] = {}

    def dim(self, p: int) -> int:
        return len(self.std.get(p, ()))

    @property
    def rank(self) -> int:
        return sum(len(v) for v in self.std.values())

    def nf(self, f: Polynomial) -> Polynomial:
        return normal_form(f, self.basis)

    def vector(self, f: Polynomial, p: int) -> List[int]:
        """Coordinates of a degree-p polynomial in the standard basis."""
        out = [0] * self.dim(p)
        for e, c in self.nf(f).terms.items():
            if sum(e) != p:
                raise ValueError(f"expected a homogeneous polynomial of degree {p}")
            out[self.pos[e]] += c
        return out

    def poly(self, vec: Sequence[int], p: int) -> Polynomial:
        return Polynomial(self.ctx, {e: c for e, c in zip(self.std.get(p, ()), vec) if c})

    def mult_matrix(self, q: Polynomial, p: int, deg_q: int) -> la.Matrix:
        """Matrix of multiplication by ``q`` from degree p to degree p + deg_q."""
        key = (q, p)
        m = self._mult_cache.get(key)
        if m is None:
            tgt = p + deg_q
            m = [self.vector(q * self.ctx.monomial(e), tgt) if self.dim(tgt) else []
                 for e in self.std.get(p, ())]
            self._mult_cache[key] = m
        return m


# ---------------------------------------------------------------------------
# graded elements


def _ext_sign(Y: YSet, i: int) -> int:
    return -1 if sum(1 for y in Y if y < i) % 2 else 1


def ext_concat(Y1: YSet, Y2: YSet) -> Tuple[int, Optional[YSet]]:
    """Sign and sorted union of ``y_Y1 * y_Y2``; ``None`` when they overlap."""
    if set(Y1) & set(Y2):
        return 0, None
    inv = sum(1 for a in Y1 for b in Y2 if a > b)
    return (-1 if inv % 2 else 1), tuple(sorted(Y1 + Y2))


@dataclass
class GradedElement:
    """Finite sum of ``(x_2)_{a_1}..(x_2n)_{a_n} * y_Y * P``.

    ``terms`` maps ``(X, Y)`` to a base polynomial; ``Y`` is ascending.
    """

    n: int
    ctx: VarContext
    terms: Dict[Tuple[Tuple[int, ...], YSet], Polynomial] = field(default_factory=dict)

    @classmethod
    def make(cls, n: int, ctx: VarContext, X: Sequence[int], Y: Sequence[int],
             P: Polynomial) -> "GradedElement":
        Y = tuple(Y)
        if len(set(Y)) != len(Y):
            return cls(n, ctx)
        sign = 1
        ys = list(Y)
        for i in range(len(ys)):
            for j in range(len(ys) - 1 - i):
                if ys[j] > ys[j + 1]:
                    ys[j], ys[j + 1] = ys[j + 1], ys[j]
                    sign = -sign
        out = cls(n, ctx)
        out._add(tuple(X), tuple(ys), P.scale(sign))
        return out

    def _add(self, X, Y, P: Polynomial) -> None:
        if P.is_zero():
            return
        q = self.terms.get((X, Y))
        q = P if q is None else q + P
        if q.is_zero():
            self.terms.pop((X, Y), None)
        else:
            self.terms[(X, Y)] = q

    def copy(self) -> "GradedElement":
        return GradedElement(self.n, self.ctx, dict(self.terms))

    def __add__(self, other: "GradedElement") -> "GradedElement":
        out = self.copy()
        for (X, Y), P in other.terms.items():
            out._add(X, Y, P)
        return out

    def __neg__(self) -> "GradedElement":
        return self.scale(-1)

    def __sub__(self, other: "GradedElement") -> "GradedElement":
        return self + (-other)

    def scale(self, c: int) -> "GradedElement":
        out = GradedElement(self.n, self.ctx)
        for (X, Y), P in self.terms.items():
            out._add(X, Y, P.scale(c))
        return out

    def __mul__(self, other: "GradedElement") -> "GradedElement":
        out = GradedElement(self.n, self.ctx)
        for (X1, Y1), P1 in self.terms.items():
            for (X2, Y2), P2 in other.terms.items():
                sign, Y = ext_concat(Y1, Y2)
                if Y is None:
                    continue
                c = sign
                for a, b in zip(X1, X2):
                    c *= comb(a + b, a)
                out._add(tuple(a + b for a, b in zip(X1, X2)), Y, (P1 * P2).scale(c))
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def keys(self) -> List[Key]:
        return sorted({(X, len(Y), _hom_degree(P)) for (X, Y), P in self.terms.items()})

    def bidegree(self) -> Tuple[int, int]:
        """``(base degree, fibre degree)``; requires a homogeneous element."""
        degs = {(2 * _hom_degree(P), len(Y) + sum(2 * (j + 1) * a for j, a in enumerate(X)))
                for (X, Y), P in self.terms.items()}
        if len(degs) != 1:
            raise ValueError("element is not bihomogeneous")
        return degs.pop()

    def to_str(self, order: Optional[MonomialOrder] = None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (X, Y), P in sorted(self.terms.items(), key=lambda t: (t[0][0], t[0][1])):
            fac = [f"(x{2 * (j + 1)})_{a}" for j, a in enumerate(X) if a]
            fac += [f"y{i}" for i in Y]
            body = P.to_str(order)
            if body != "1":
                fac.append(f"({body})" if len(P.terms) > 1 else body)
            parts.append("*".join(fac) if fac else body)
        return " + ".join(parts)

    def __eq__(self, other) -> bool:
        return isinstance(other, GradedElement) and self.terms == other.terms


def _hom_degree(P: Polynomial) -> int:
    degs = {sum(e) for e in P.terms}
    if len(degs) != 1:
        raise ValueError("polynomial part is not homogeneous")
    return degs.pop()


def element_from_loop_poly(n: int, base_ctx: VarContext, X: Sequence[int], f: Polynomial) -> GradedElement:
    """Read a commutative ``Z[y, g]`` polynomial, squarefree in ``y``, as ``X * f``
    with each y-monomial taken in ascending order."""
    out = GradedElement(n, base_ctx)
    ys = y_names(n)
    yi = [f.ctx.index(y) for y in ys]
    gi = [f.ctx.index(nm) for nm in base_ctx.names]
    for e, c in f.terms.items():
        if any(e[i] > 1 for i in yi):
            raise ValueError("y variables must appear at most once per term")
        Y = tuple(k + 1 for k, i in enumerate(yi) if e[i])
        out._add(tuple(X), Y, base_ctx.monomial(tuple(e[i] for i in gi), c))
    return out


def element_to_loop_poly(e: GradedElement, ctx: VarContext) -> Dict[Tuple[int, ...], Polynomial]:
    """Split by divided-power part into commutative ``Z[y, g]`` polynomials."""
    out: Dict[Tuple[int, ...], Polynomial] = {}
    for (X, Y), P in e.terms.items():
        ymon = ctx.const(1)
        for i in Y:
            ymon = ymon * ctx.var(f"y{i}")
        out[X] = out.get(X, ctx.zero()) + ymon * P.map_context(ctx)
    return out


# ---------------------------------------------------------------------------
# engine


def required_cap(n: int, top: int) -> int:
    return 2 * top


class Engine:
    """Component bookkeeping and differential matrices for one ``n``."""

    def __init__(self, n: int, cap: int):
        if n not in SUPPORTED_N:
            raise Unsupported(f"n={n} is not supported; supported values are {SUPPORTED_N}")
        self.n = n
        self.cap = cap
        self.base = BaseRing(n)
        need = required_cap(n, self.base.top)
        if cap < need:
            raise CapTooSmall(cap, need)
        self.loop_ctx = loop_context(n)
        self.ycombos: Dict[int, List[YSet]] = {
            k: list(combinations(range(1, n + 1), k)) for k in range(n + 1)}
        self.D: Dict[int, Polynomial] = {
            j: differential_image(n, j + 1, SIGNED_TILDE) for j in range(1, n + 1)}
        self.D_parts: Dict[int, Dict[int, Polynomial]] = {}
        for j, d in self.D.items():
            parts: Dict[int, Polynomial] = {}
            for e, c in d.terms.items():
                i = next(k + 1 for k in range(n) if e[k])
                mono = self.base.ctx.monomial(e[n:], c)
                parts[i] = parts.get(i, self.base.ctx.zero()) + mono
            self.D_parts[j] = parts
        self.keys: List[Key] = self._enumerate()
        self.key_set = set(self.keys)
        self._matrix_cache: Dict[Tuple[int, int, int], la.Matrix] = {}
        self._ptab: Dict[Tuple[tuple, tuple], List[int]] = {}

    # components -------------------------------------------------------------
    def total(self, key: Key) -> int:
        X, k, p = key
        return 2 * p + k + sum(2 * (j + 1) * a for j, a in enumerate(X))

    def bigrading(self, key: Key) -> Tuple[int, int]:
        """``(W, Q)``: preserved by every differential."""
        X, k, p = key
        return sum(X) + k, p + sum((j + 1) * a for j, a in enumerate(X))

    def _enumerate(self) -> List[Key]:
        n, top = self.n, self.base.top
        limit = self.cap + 1
        xs = []

        def rec(j, prefix, deg):
            if j == n:
                xs.append(tuple(prefix))
                return
            w = 2 * (j + 1)
            a = 0
            while deg + w * a <= limit:
                rec(j + 1, prefix + [a], deg + w * a)
                a += 1

        rec(0, [], 0)
        keys = []
        for X in xs:
            for k in range(n + 1):
                for p in range(top + 1):
                    key = (X, k, p)
                    if self.total(key) <= limit and self.base.dim(p):
                        keys.append(key)
        keys.sort(key=lambda c: (self.total(c), c))
        return keys

    def basis(self, key: Key) -> List[Tuple[YSet, tuple]]:
        X, k, p = key
        return [(Y, e) for Y in self.ycombos[k] for e in self.base.std[p]]

    def dim(self, key: Key) -> int:
        X, k, p = key
        return len(self.ycombos[k]) * self.base.dim(p)

    def target(self, j: int, key: Key) -> Optional[Key]:
        X, k, p = key
        if X[j - 1] == 0 or k == self.n:
            return None
        t = (tuple(a - (1 if i == j - 1 else 0) for i, a in enumerate(X)), k + 1, p + j)
        return t if t in self.key_set else None

    def wedge_matrix(self, j: int, k: int, p: int) -> la.Matrix:
        """Matrix of ``v -> D_j * v`` from ``Lambda^k (x) B_p`` to ``Lambda^{k+1} (x) B_{p+j}``."""
        ck = (j, k, p)
        m = self._matrix_cache.get(ck)
        if m is not None:
            return m
        dp = self.base.dim(p)
        dt = self.base.dim(p + j)
        m = []
        if k < self.n and dt:
            tys = {Y: i for i, Y in enumerate(self.ycombos[k + 1])}
            width = len(tys) * dt
            blocks = {i: self.base.mult_matrix(P, p, j) for i, P in self.D_parts[j].items()}
            for Y in self.ycombos[k]:
                for r in range(dp):
                    row = [0] * width
                    for i, M in blocks.items():
                        if i in Y:
                            continue
                        sign = _ext_sign(Y, i)
                        off = tys[tuple(sorted(Y + (i,)))] * dt
                        for col, v in enumerate(M[r]):
                            if v:
                                row[off + col] += sign * v
                    m.append(row)
        self._matrix_cache[ck] = m
        return m

    def delta_matrix(self, j: int, key: Key) -> la.Matrix:
        """Matrix of ``d^{2j}`` from ``key`` to :meth:`target` (rows: source basis)."""
        if self.target(j, key) is None:
            return []
        X, k, p = key
        return self.wedge_matrix(j, k, p)

    # products -----------------------------------------------------------------
    def product_vector(self, e1: tuple, e2: tuple) -> List[int]:
        """Standard coordinates of the product of two standard monomials."""
        key = (e1, e2) if e1 <= e2 else (e2, e1)
        v = self._ptab.get(key)
        if v is None:
            p = sum(e1) + sum(e2)
            if self.base.dim(p):
                prod_ = self.base.ctx.monomial(tuple(a + b for a, b in zip(e1, e2)))
                v = self.base.vector(prod_, p)
            else:
                v = []
            self._ptab[key] = v
        return v

    def multiply(self, v: Sequence[int], c1: Key, w: Sequence[int], c2: Key) -> Optional[Tuple[Key, List[int]]]:
        """Product of two component vectors, or None when it lies outside the enumerated range."""
        (X1, k1, p1), (X2, k2, p2) = c1, c2
        c = (tuple(a + b for a, b in zip(X1, X2)), k1 + k2, p1 + p2)
        if c not in self.key_set:
            return None
        factor = 1
        for a, b in zip(X1, X2):
            factor *= comb(a + b, a)
        out = [0] * self.dim(c)
        dt = self.base.dim(c[2])
        tys = {Y: i for i, Y in enumerate(self.ycombos[c[1]])}
        b1 = self.basis(c1)
        b2 = self.basis(c2)
        for x, (Y1, e1) in zip(v, b1):
            if not x:
                continue
            for y, (Y2, e2) in zip(w, b2):
                if not y:
                    continue
                sign, Y = ext_concat(Y1, Y2)
                if Y is None:
                    continue
                off = tys[Y] * dt
                coef = sign * factor * x * y
                for i, z in enumerate(self.product_vector(e1, e2)):
                    if z:
                        out[off + i] += coef * z
        return c, out

    # element conversion -------------------------------------------------------
    def vector(self, e: GradedElement, key: Key) -> List[int]:
        X, k, p = key
        out = [0] * self.dim(key)
        dp = self.base.dim(p)
        yi = {Y: i for i, Y in enumerate(self.ycombos[k])}
        for (X2, Y), P in e.terms.items():
            if X2 != X or len(Y) != k:
                raise ValueError("element has terms outside the component")
            v = self.base.vector(P, p)
            off = yi[Y] * dp
            for i, c in enumerate(v):
                out[off + i] += c
        return out

    def element(self, vec: Sequence[int], key: Key) -> GradedElement:
        X, k, p = key
        dp = self.base.dim(p)
        out = GradedElement(self.n, self.base.ctx)
        for b, Y in enumerate(self.ycombos[k]):
            P = self.base.poly(vec[b * dp:(b + 1) * dp], p)
            out._add(X, Y, P)
        return out

    def split(self, e: GradedElement) -> Dict[Key, List[int]]:
        """Reduce modulo the base relations and split into component vectors."""
        pieces: Dict[Key, GradedElement] = {}
        for (X, Y), P in e.terms.items():
            P = self.base.nf(P)
            by_deg: Dict[int, Dict[tuple, int]] = {}
            for ex, c in P.terms.items():
                by_deg.setdefault(sum(ex), {})[ex] = c
            for p, terms in by_deg.items():
                key = (X, len(Y), p)
                pieces.setdefault(key, GradedElement(self.n, self.base.ctx))._add(
                    X, Y, Polynomial(self.base.ctx, terms))
        return {key: self.vector(el, key) for key, el in pieces.items()}


# ---------------------------------------------------------------------------
# pages


@dataclass
class PageState:
    n: int
    cap: int
    page: int
    Z: Dict[Key, la.Matrix]
    B: Dict[Key, la.Matrix]
    engine: Engine = field(repr=False, compare=False)
    timings: Dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def next_j(self) -> int:
        return (self.page + 1) // 2

    def is_final(self) -> bool:
        return self.next_j > self.n

    def reported_keys(self) -> List[Key]:
        return [c for c in self.engine.keys if self.engine.total(c) <= self.cap]

    def invariants(self, key: Key) -> Tuple[int, List[int]]:
        return la.quotient_invariants(self.Z[key], self.B[key])


def init_e2(n: int, degree_cap: Optional[int] = None) -> PageState:
    """The E2 page: every component is all cycles and no boundaries."""
    eng = Engine(n, default_cap(n) if degree_cap is None else degree_cap)
    Z = {c: la.identity(eng.dim(c)) for c in eng.keys}
    B = {c: [] for c in eng.keys}
    return PageState(n, eng.cap, 2, Z, B, eng)


def default_cap(n: int) -> int:
    return {1: 8, 2: 16, 3: 24}.get(n, 24)


def _page_task(args):
    Zc, M, Bt, dsrc, dtgt = args
    newZ = la.relative_kernel(Zc, M, Bt, dsrc, dtgt)
    img = la.image(Zc, M, dtgt)
    return newZ, img


def _workers(workers: Optional[int]) -> int:
    if workers is None:
        try:
            workers = int(os.environ.get(THREADS_ENV, "1"))
        except ValueError:
            workers = 1
    return max(1, workers)


def advance(state: PageState, workers: Optional[int] = None) -> PageState:
    """Take homology with respect to the next differential."""
    eng = state.engine
    j = state.next_j
    if j > state.n:
        raise ValueError("the spectral sequence has already collapsed")
    t0 = time.perf_counter()
    jobs = []
    for c in eng.keys:
        t = eng.target(j, c)
        M = eng.delta_matrix(j, c) if t is not None else []
        if t is None or not any(any(r) for r in M):
            continue
        if eng.total(c) > state.cap:
            continue
        jobs.append((c, t, (state.Z[c], M, state.B[t], eng.dim(c), eng.dim(t))))
    nw = _workers(workers)
    if nw > 1 and len(jobs) > 8:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            results = list(pool.map(_page_task, [a for _, _, a in jobs], chunksize=8))
    else:
        results = [_page_task(a) for _, _, a in jobs]
    Z = dict(state.Z)
    B = {c: list(b) for c, b in state.B.items()}
    for (c, t, (Zc, M, Bt, ds, dt)), (newZ, img) in zip(jobs, results):
        if not la.is_sublattice(img, la.hnf(state.Z[t], dt) if state.Z[t] else []):
            raise EngineInconsistency(f"d^{2 * j} does not preserve cycles at {c}")
        if state.B[c] and not la.is_sublattice(la.image(state.B[c], M, dt), la.hnf(state.B[t], dt)):
            raise EngineInconsistency(f"d^{2 * j} is not well defined on {c}")
        Z[c] = newZ
        B[t] = la.lattice_sum(B[t], img, dt)
    new = PageState(state.n, state.cap, 2 * j + 1, Z, B, eng, dict(state.timings))
    new.timings[f"d{2 * j}"] = round(time.perf_counter() - t0, 3)
    return new


def run_pages(n: int, degree_cap: Optional[int] = None, workers: Optional[int] = None) -> List[PageState]:
    pages = [init_e2(n, degree_cap)]
    while not pages[-1].is_final():
        pages.append(advance(pages[-1], workers))
    return pages


def assemble_final_page(n: int, degree_cap: Optional[int] = None,
                        workers: Optional[int] = None) -> PageState:
    return run_pages(n, degree_cap, workers)[-1]


# ---------------------------------------------------------------------------
# element-level operations


def leibniz_differential(e: GradedElement, r: int, engine: Engine) -> GradedElement:
    """``d^r`` of an E2 element, expanded by the Leibniz rule."""
    if r % 2 or not 2 <= r <= 2 * engine.n:
        raise ValueError(f"r must be even with 2 <= r <= {2 * engine.n}")
    j = r // 2
    out = GradedElement(engine.n, engine.base.ctx)
    for (X, Y), P in e.terms.items():
        if X[j - 1] == 0:
            continue
        X2 = tuple(a - (1 if i == j - 1 else 0) for i, a in enumerate(X))
        for i, Q in engine.D_parts[j].items():
            if i in Y:
                continue
            out._add(X2, tuple(sorted(Y + (i,))), (Q * P).scale(_ext_sign(Y, i)))
    return out


@dataclass
class IntegerMatrix:
    rows: la.Matrix
    row_labels: List[str]
    col_labels: List[str]


def _labels(eng: Engine, key: Key) -> List[str]:
    X, k, p = key
    out = []
    for Y, e in eng.basis(key):
        el = GradedElement(eng.n, eng.base.ctx)
        el._add(X, Y, eng.base.ctx.monomial(e))
        out.append(el.to_str(eng.base.order) if (any(X) or Y or any(e)) else "1")
    return out


def row_matrix(state: PageState, r: int, key: Key) -> IntegerMatrix:
    eng = state.engine
    j = r // 2
    t = eng.target(j, key)
    rows = eng.delta_matrix(j, key) if t is not None else [[] for _ in range(eng.dim(key))]
    return IntegerMatrix(rows, _labels(eng, key), _labels(eng, t) if t else [])


# ---------------------------------------------------------------------------
# Euler characteristic, d∘d, torsion


def euler_characteristics(state: PageState) -> Dict[Tuple[int, int], int]:
    """``sum_k (-1)^k rank`` per preserved bigrading, for complete bigradings only."""
    eng = state.engine
    out: Dict[Tuple[int, int], int] = {}
    for c in eng.keys:
        W, Q = eng.bigrading(c)
        if 2 * Q + eng.n > state.cap:
            continue
        rank, _ = state.invariants(c)
        out[(W, Q)] = out.get((W, Q), 0) + (-1) ** c[1] * rank
    return out


def check_d_squared(engine: Engine) -> List[str]:
    """Failures of ``d^a d^b + d^b d^a = 0`` (including a == b) on every component."""
    bad = []
    for c in engine.keys:
        for a in range(1, engine.n + 1):
            for b in range(a, engine.n + 1):
                t1 = engine.target(a, c)
                t2 = engine.target(b, c)
                acc: Dict[Key, la.Matrix] = {}
                for first, second, mid in ((a, b, t1), (b, a, t2)):
                    if mid is None:
                        continue
                    end = engine.target(second, mid)
                    if end is None:
                        continue
                    prod_ = la.mat_mul(engine.delta_matrix(first, c), engine.delta_matrix(second, mid))
                    if a == b:
                        prod_ = [[2 * x for x in r] for r in prod_]
                    if end in acc:
                        acc[end] = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(acc[end], prod_)]
                    else:
                        acc[end] = prod_
                    if a == b:
                        break
                for end, M in acc.items():
                    if any(any(r) for r in M):
                        bad.append(f"d{2 * a} d{2 * b} on {c}")
    return bad


@dataclass
class TorsionSummary:
    orders: Dict[int, List[Tuple[int, int]]]

    def order_set(self) -> set:
        return set(self.orders)

    def to_json(self) -> dict:
        return {str(d): [list(x) for x in v] for d, v in sorted(self.orders.items())}


def torsion_summary(state: PageState) -> TorsionSummary:
    eng = state.engine
    acc: Dict[int, Dict[int, int]] = {}
    for c in state.reported_keys():
        _, tors = state.invariants(c)
        for d in tors:
            row = acc.setdefault(d, {})
            row[eng.total(c)] = row.get(eng.total(c), 0) + 1
    return TorsionSummary({d: sorted(v.items()) for d, v in sorted(acc.items())})


# ---------------------------------------------------------------------------
# Gröbner route on rows with a single divided-power generator


def row_truncation(engine: Engine, k: int, j: int) -> Truncation:
    """Keep exterior degree ``k+1`` and polynomial degree up to ``top + j``."""
    ctx = engine.loop_ctx
    W = engine.base.top + j + 2
    weights = tuple(W if nm.startswith("y") else 1 for nm in ctx.names)
    return Truncation(weights, (k + 1) * W + engine.base.top + j)


def _ymono(ctx: VarContext, Y: YSet) -> Polynomial:
    out = ctx.const(1)
    for i in Y:
        out = out * ctx.var(f"y{i}")
    return out


def row_image_generators(engine: Engine, j: int, k: int) -> List[Polynomial]:
    """``D_j * y_Y`` for every k-subset Y, exterior signs folded into coefficients."""
    ctx = engine.loop_ctx
    ys = y_names(engine.n)
    return [exterior_multiply(engine.D[j], _ymono(ctx, Y), ys) for Y in engine.ycombos[k]]


def row_relations(engine: Engine, j: int, k: int, lower: bool = True) -> List[Polynomial]:
    """Symmetric relations on exterior degree ``k+1``, plus lower images if asked."""
    ctx = engine.loop_ctx
    ys = y_names(engine.n)
    rels = [_ymono(ctx, Y) * g.map_context(ctx)
            for Y in engine.ycombos[k + 1] for g in engine.base.relations]
    if lower:
        for i in range(1, j):
            rels += [exterior_multiply(engine.D[i], _ymono(ctx, Y), ys) for Y in engine.ycombos[k]]
    return [r for r in rels if not r.is_zero()]


def row_intersection(engine: Engine, j: int, k: int, lower: bool = True) -> GroebnerBasis:
    ctx = engine.loop_ctx
    order = MonomialOrder.lex(ctx)
    return ideal_intersect(row_image_generators(engine, j, k), row_relations(engine, j, k, lower),
                           order, row_truncation(engine, k, j))


def _ydeg(f: Polynomial, n: int) -> int:
    return max(sum(e[:n]) for e in f.terms)


@dataclass
class RowKernel:
    j: int
    k: int
    intersection: List[Polynomial]
    preimages: List[GradedElement]
    syzygies: List[GradedElement]
    lattice: Dict[int, la.Matrix]
    linear: Dict[int, la.Matrix]


def _free_monomials(ctx: VarContext, p: int) -> List[tuple]:
    n = len(ctx)
    out = []

    def rec(i, prefix, left):
        if i == n - 1:
            out.append(tuple(prefix + [left]))
            return
        for a in range(left, -1, -1):
            rec(i + 1, prefix + [a], left - a)

    if n == 0:
        return [()] if p == 0 else []
    rec(0, [], p)
    return out


def row_syzygies(engine: Engine, j: int, k: int) -> List[GradedElement]:
    """Degreewise integer kernel of ``P -> D_j * P`` on ``Lambda^k (x) Z[g]`` (no relations)."""
    base = engine.base
    ctx = base.ctx
    X = tuple(1 if i == j - 1 else 0 for i in range(engine.n))
    src_Y = engine.ycombos[k]
    tgt_Y = {Y: i for i, Y in enumerate(engine.ycombos[k + 1])}
    out = []
    for p in range(base.top + 1):
        mons = _free_monomials(ctx, p)
        tmons = {e: i for i, e in enumerate(_free_monomials(ctx, p + j))}
        width = len(tgt_Y) * len(tmons)
        rows = []
        for Y in src_Y:
            for e in mons:
                row = [0] * width
                for i, Q in engine.D_parts[j].items():
                    if i in Y:
                        continue
                    sign = _ext_sign(Y, i)
                    off = tgt_Y[tuple(sorted(Y + (i,)))] * len(tmons)
                    for ex, c in Q.mul_term(e, 1).terms.items():
                        row[off + tmons[ex]] += sign * c
                rows.append(row)
        for vec in la.left_kernel(rows, width):
            el = GradedElement(engine.n, ctx)
            for b, Y in enumerate(src_Y):
                P = Polynomial(ctx, {e: c for e, c in zip(mons, vec[b * len(mons):(b + 1) * len(mons)]) if c})
                el._add(X, Y, P)
            if not el.is_zero():
                out.append(el)
    return out


def _preimages(engine: Engine, j: int, k: int, targets: Sequence[Polynomial]) -> List[GradedElement]:
    ctx = engine.loop_ctx
    order = MonomialOrder.lex(ctx)
    gens = row_image_generators(engine, j, k)
    G = buchberger(gens, order, row_truncation(engine, k, j), track=True)
    X = tuple(1 if i == j - 1 else 0 for i in range(engine.n))
    gi = [ctx.index(nm) for nm in engine.base.ctx.names]
    out = []
    for h in targets:
        tr = track_reduction(h, G)
        if not tr.remainder.is_zero():
            raise RouteMismatch(f"intersection element {h.to_str(order)} is not in the image")
        qs = tr.quotients()
        coeffs = [ctx.zero() for _ in gens]
        for q, cof in zip(qs, G.cofactors):
            if q.is_zero():
                continue
            for m, c in enumerate(cof):
                if not c.is_zero():
                    coeffs[m] = coeffs[m] + q * c
        el = GradedElement(engine.n, engine.base.ctx)
        for Y, c in zip(engine.ycombos[k], coeffs):
            if c.is_zero():
                continue
            if any(sum(e[:engine.n]) for e in c.terms):
                raise RouteMismatch("preimage cofactor involves exterior variables")
            el._add(X, Y, Polynomial(engine.base.ctx, {tuple(e[i] for i in gi): v for e, v in c.terms.items()}))
        out.append(el)
    return out


def module_lattice(engine: Engine, gens: Iterable[GradedElement], key: Key) -> la.Matrix:
    """Degree-p part of the B-module spanned by ``gens`` inside one component."""
    X, k, p = key
    rows = []
    base = engine.base
    for g in gens:
        degs = {_hom_degree(P) for P in g.terms.values()}
        d = degs.pop()
        if d > p:
            continue
        for e in _free_monomials(base.ctx, p - d):
            m = base.ctx.monomial(e)
            el = GradedElement(engine.n, base.ctx)
            for (X2, Y), P in g.terms.items():
                el._add(X, Y, P * m)
            rows.append(engine.vector(el, key))
    return la.hnf(rows, engine.dim(key))


def kernel_generators(state: PageState, j: int, k: int) -> RowKernel:
    """Kernel of ``d^{2j}`` on ``(x_2j)_1 * Lambda^k * B`` by both routes.

    Raises :class:`RouteMismatch` if the lattice kernel and the Gröbner
    kernel differ in any polynomial degree.
    """
    eng = state.engine
    if state.next_j != j:
        raise ValueError(f"state is page {state.page}; d^{2 * j} acts on page {2 * j - 1 if j > 1 else 2}")
    X = tuple(1 if i == j - 1 else 0 for i in range(eng.n))
    inter = [h for h in row_intersection(eng, j, k).generators if _ydeg(h, eng.n) == k + 1]
    pre = _preimages(eng, j, k, inter)
    syz = row_syzygies(eng, j, k)
    lattice, linear = {}, {}
    for p in range(eng.base.top + 1):
        key = (X, k, p)
        if key not in eng.key_set:
            continue
        t = eng.target(j, key)
        if t is None:
            lin = la.hnf(state.Z[key], eng.dim(key))
        else:
            lin = la.relative_kernel(state.Z[key], eng.delta_matrix(j, key), state.B[t],
                                     eng.dim(key), eng.dim(t))
        grob = module_lattice(eng, pre + syz, key)
        if t is None:
            grob = la.hnf(la.identity(eng.dim(key)), eng.dim(key))
        if grob != lin:
            raise RouteMismatch(f"kernels differ on component {key}")
        lattice[p] = grob
        linear[p] = lin
    return RowKernel(j, k, inter, pre, syz, lattice, linear)


# ---------------------------------------------------------------------------
# serialization


def _key_json(c: Key) -> dict:
    X, k, p = c
    return {"x": list(X), "k": k, "p": p}


def state_to_json(state: PageState) -> dict:
    eng = state.engine
    comps = []
    for c in state.reported_keys():
        rank, tors = state.invariants(c)
        d = _key_json(c)
        X, k, p = c
        bidegree = [2 * p, k + sum(2 * (i + 1) * a for i, a in enumerate(X))]
        d.update(total=eng.total(c), bidegree=bidegree, rank=rank, torsion=tors,
                 basis=_labels(eng, c), Z=state.Z[c], B=state.B[c])
        comps.append(d)
    return {
        "schema": SCHEMA,
        "n": state.n,
        "cap": state.cap,
        "page": state.page,
        "base": {
            "variables": list(eng.base.ctx.names),
            "order": eng.base.order.describe(),
            "relations": [g.to_str(eng.base.order) for g in eng.base.basis.generators],
        },
        "differentials": {f"d{2 * j}": d.to_str(MonomialOrder.lex(eng.loop_ctx)) for j, d in eng.D.items()},
        "components": comps,
        "torsion": torsion_summary(state).to_json(),
    }


def state_from_json(data: dict, workers: Optional[int] = None) -> PageState:
    if data.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {data.get('schema')!r}")
    eng = Engine(data["n"], data["cap"])
    Z = {c: la.identity(eng.dim(c)) for c in eng.keys}
    B = {c: [] for c in eng.keys}
    for comp in data["components"]:
        c = (tuple(comp["x"]), comp["k"], comp["p"])
        if c not in eng.key_set:
            raise ValueError(f"unknown component {c}")
        Z[c] = [list(r) for r in comp["Z"]]
        B[c] = [list(r) for r in comp["B"]]
    return PageState(data["n"], data["cap"], data["page"], Z, B, eng)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
