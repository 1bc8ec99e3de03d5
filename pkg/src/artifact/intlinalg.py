"""Exact integer lattice algebra on row vectors.

A lattice is the row span of a list of integer vectors.  A matrix ``A`` of
shape ``m x n`` acts on row vectors of length ``m`` by ``v -> v A``.
"""
from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

Vector = List[int]
Matrix = List[List[int]]


class LatticeError(ArithmeticError):
    pass


def zeros(m: int, n: int) -> Matrix:
    return [[0] * n for _ in range(m)]


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]], inner: Optional[int] = None) -> Matrix:
    if not A:
        return []
    n = len(B[0]) if B else 0
    out = []
    for row in A:
        acc = [0] * n
        for k, a in enumerate(row):
            if a:
                bk = B[k]
                for j in range(n):
                    if bk[j]:
                        acc[j] += a * bk[j]
        out.append(acc)
    return out


def vec_mat(v: Sequence[int], A: Sequence[Sequence[int]], width: int) -> Vector:
    acc = [0] * width
    for k, a in enumerate(v):
        if a:
            for j, x in enumerate(A[k]):
                if x:
                    acc[j] += a * x
    return acc


def _echelon(rows: Matrix, width: int, track: Optional[Matrix] = None) -> Tuple[Matrix, Optional[Matrix]]:
    """Reduced row echelon form over Z by Euclidean row steps; zero rows kept last.

    Each column is cleared by repeatedly pivoting on its smallest nonzero
    entry, which keeps intermediate entries (and the tracked transform) small.
    """
    rows = [list(r) for r in rows]
    T = [list(t) for t in track] if track is not None else None
    m = len(rows)
    r = 0

    def swap(a: int, b: int) -> None:
        rows[a], rows[b] = rows[b], rows[a]
        if T is not None:
            T[a], T[b] = T[b], T[a]

    def sub(i: int, q: int, k: int) -> None:
        rows[i] = [x - q * y for x, y in zip(rows[i], rows[k])]
        if T is not None:
            T[i] = [x - q * y for x, y in zip(T[i], T[k])]

    for col in range(width):
        if r >= m:
            break
        while True:
            nz = [i for i in range(r, m) if rows[i][col]]
            if not nz:
                break
            piv = min(nz, key=lambda i: (abs(rows[i][col]), sum(map(abs, rows[i]))))
            swap(r, piv)
            p = rows[r][col]
            clear = True
            for i in range(r + 1, m):
                if not rows[i][col]:
                    continue
                q = rows[i][col] // p
                if q:
                    sub(i, q, r)
                if rows[i][col]:
                    clear = False
            if clear:
                break
        if not rows[r][col]:
            continue
        if rows[r][col] < 0:
            rows[r] = [-x for x in rows[r]]
            if T is not None:
                T[r] = [-x for x in T[r]]
        pv = rows[r][col]
        for i in range(r):
            q = rows[i][col] // pv
            if q:
                sub(i, q, r)
        r += 1
    return rows, T


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def hnf(rows: Sequence[Sequence[int]], width: Optional[int] = None) -> Matrix:
    """Canonical Hermite normal form basis of the row lattice (zero rows dropped)."""
    rows = [list(r) for r in rows]
    if width is None:
        width = len(rows[0]) if rows else 0
    ech, _ = _echelon(rows, width)
    return [r for r in ech if any(r)]


def left_kernel(rows: Sequence[Sequence[int]], width: int) -> Matrix:
    """Basis of integer relations ``c`` with ``c * rows == 0``."""
    m = len(rows)
    if m == 0:
        return []
    ech, T = _echelon([list(r) for r in rows], width, identity(m))
    return hnf([T[i] for i in range(m) if not any(ech[i])], m)


def rank(rows: Sequence[Sequence[int]], width: int) -> int:
    return len(hnf(rows, width))


def lattice_sum(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]], width: int) -> Matrix:
    return hnf(list(A) + list(B), width)


def lattice_intersection(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]], width: int) -> Matrix:
    """``span(A) ∩ span(B)`` from the relations of the stacked rows."""
    A = hnf(A, width)
    B = hnf(B, width)
    if not A or not B:
        return []
    rel = left_kernel(A + B, width)
    out = [vec_mat(c[:len(A)], A, width) for c in rel]
    return hnf(out, width)


def coordinates(v: Sequence[int], basis: Sequence[Sequence[int]]) -> Optional[Vector]:
    """Integer ``x`` with ``x * basis == v`` for an echelon basis, or None."""
    width = len(v)
    rest = list(v)
    out = []
    for b in basis:
        col = next(j for j, x in enumerate(b) if x)
        if rest[col] % b[col]:
            return None
        q = rest[col] // b[col]
        out.append(q)
        if q:
            rest = [x - q * y for x, y in zip(rest, b)]
    if any(rest):
        return None
    return out


def contains(L: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    return coordinates(v, L) is not None


def is_sublattice(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> bool:
    """Whether ``span(A) ⊆ span(B)``; ``B`` must be an echelon basis."""
    return all(coordinates(a, B) is not None for a in A)


def relative_kernel(Z: Sequence[Sequence[int]], A: Sequence[Sequence[int]],
                    B: Sequence[Sequence[int]], width_src: int, width_tgt: int) -> Matrix:
    """``{z in span(Z) : z A in span(B)}`` as an HNF basis."""
    Z = [list(z) for z in Z]
    if not Z:
        return []
    images = [vec_mat(z, A, width_tgt) for z in Z]
    rel = left_kernel(images + [list(b) for b in B], width_tgt)
    out = [vec_mat(c[:len(Z)], Z, width_src) for c in rel]
    return hnf(out, width_src)


def image(Z: Sequence[Sequence[int]], A: Sequence[Sequence[int]], width_tgt: int) -> Matrix:
    return hnf([vec_mat(z, A, width_tgt) for z in Z], width_tgt)


def smith_invariants(rows: Sequence[Sequence[int]], width: int) -> List[int]:
    """Nonzero invariant factors ``d1 | d2 | ...`` of an integer matrix."""
    M = [list(r) for r in rows if any(r)]
    if not M:
        return []
    m, n = len(M), width
    diag = []
    t = 0
    while t < min(m, n):
        # locate a nonzero pivot of minimal absolute value in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if M[i][j] and (best is None or abs(M[i][j]) < abs(M[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        M[t], M[i] = M[i], M[t]
        for row in M:
            row[t], row[j] = row[j], row[t]
        while True:
            p = M[t][t]
            done = True
            for i in range(t + 1, m):
                if M[i][t]:
                    q = M[i][t] // p
                    M[i] = [x - q * y for x, y in zip(M[i], M[t])]
                    if M[i][t]:
                        done = False
            for j in range(t + 1, n):
                if M[t][j]:
                    q = M[t][j] // p
                    for row in M:
                        row[j] -= q * row[t]
                    if M[t][j]:
                        done = False
            if done:
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if M[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                M[t] = [x + y for x, y in zip(M[t], M[bad])]
                continue
            # move the smallest nonzero entry of row/column t to the pivot
            best = (t, t)
            for i in range(t, m):
                if M[i][t] and abs(M[i][t]) < abs(M[best[0]][best[1]]):
                    best = (i, t)
            for j in range(t, n):
                if M[t][j] and abs(M[t][j]) < abs(M[best[0]][best[1]]):
                    best = (t, j)
            i, j = best
            M[t], M[i] = M[i], M[t]
            for row in M:
                row[t], row[j] = row[j], row[t]
        diag.append(abs(M[t][t]))
        t += 1
    return diag


def quotient_invariants(Z: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> Tuple[int, List[int]]:
    """Free rank and torsion orders of ``span(Z)/span(B)`` for ``B ⊆ Z``."""
    Z = [list(z) for z in Z]
    coords = []
    for b in B:
        x = coordinates(b, Z)
        if x is None:
            raise LatticeError("boundary lattice is not contained in the cycle lattice")
        coords.append(x)
    inv = smith_invariants(coords, len(Z)) if Z else []
    return len(Z) - len(inv), [d for d in inv if d > 1]
