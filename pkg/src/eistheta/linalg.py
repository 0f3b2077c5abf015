"""Exact linear algebra over the integers and rationals.

Matrices are plain lists of lists of ints (or Fractions where stated).
Sizes here are tiny (rank <= 8), so clarity wins over vectorization.
"""

from __future__ import annotations

import math
from fractions import Fraction

__all__ = [
    "identity",
    "transpose",
    "mat_mul",
    "mat_vec",
    "bareiss_det",
    "exact_rank",
    "adjugate",
    "smith_normal_form",
    "kernel_basis",
    "unimodular_extension",
    "extends_to_basis",
    "solve_mod_prime_power",
]


def identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(A):
    return [list(row) for row in zip(*A)]


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    assert len(A[0]) == k
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def mat_vec(A, v):
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def bareiss_det(A) -> int:
    """Determinant of an integer matrix by fraction-free elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = [list(map(int, row)) for row in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def exact_rank(A) -> int:
    """Rank of a matrix with int or Fraction entries."""
    if not A:
        return 0
    M = [[Fraction(x) for x in row] for row in A]
    rows, cols = len(M), len(M[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        r += 1
        if r == rows:
            break
    return r


def adjugate(A) -> list[list[int]]:
    """Adjugate of an integer matrix: A @ adj(A) = det(A) * I."""
    n = len(A)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[A[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            adj[j][i] = (-1) ** (i + j) * bareiss_det(minor)
    return adj


def smith_normal_form(A):
    """Smith normal form with transforms: returns (S, U, V) with S = U A V,
    U and V unimodular, S diagonal with d1 | d2 | ... ."""
    S = [list(map(int, row)) for row in A]
    rows = len(S)
    cols = len(S[0]) if rows else 0
    U = identity(rows)
    V = identity(cols)

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in S:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):
        S[dst] = [x + c * y for x, y in zip(S[dst], S[src])]
        U[dst] = [x + c * y for x, y in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        for row in S:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    t = 0
    while t < min(rows, cols):
        # move a nonzero pivot of smallest magnitude to (t, t)
        piv = None
        for i in range(t, rows):
            for j in range(t, cols):
                if S[i][j] and (piv is None or abs(S[i][j]) < abs(S[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, rows):
                if S[i][t]:
                    add_row(t, i, -(S[i][t] // S[t][t]))
                    if S[i][t]:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, cols):
                if S[t][j]:
                    add_col(t, j, -(S[t][j] // S[t][t]))
                    if S[t][j]:
                        swap_cols(t, j)
                        dirty = True
        t += 1

    # enforce the divisibility chain
    n = min(rows, cols)
    changed = True
    while changed:
        changed = False
        for i in range(n - 1):
            a, b = S[i][i], S[i + 1][i + 1]
            if a == 0 or b % a == 0:
                continue
            # fold S[i+1][i+1] into position (i, i) and re-reduce
            add_col(i + 1, i, 1)
            dirty = True
            while dirty:
                dirty = False
                for r in range(i + 1, rows):
                    if S[r][i]:
                        add_row(i, r, -(S[r][i] // S[i][i]))
                        if S[r][i]:
                            swap_rows(i, r)
                            dirty = True
                for c in range(i + 1, cols):
                    if S[i][c]:
                        add_col(i, c, -(S[i][c] // S[i][i]))
                        if S[i][c]:
                            swap_cols(i, c)
                            dirty = True
            changed = True
    for i in range(n):
        if S[i][i] < 0:
            for j in range(cols):
                S[i][j] = -S[i][j]
            for j in range(rows):
                U[i][j] = -U[i][j]
    return S, U, V


def kernel_basis(A) -> list[list[int]]:
    """Saturated basis of the integer kernel {x : A x = 0}, as a list of
    column vectors.  Saturated means the basis extends to a basis of Z^n."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    if rows == 0:
        return [list(col) for col in identity(cols)]
    S, _, V = smith_normal_form(A)
    out = []
    for j in range(cols):
        if j >= rows or S[j][j] == 0:
            out.append([V[i][j] for i in range(cols)])
    return out


def unimodular_extension(K: list[list[int]]) -> list[list[int]]:
    """Given independent saturated columns K (n x s), return a unimodular
    n x n matrix whose first s columns span the same sublattice."""
    n = len(K)
    s = len(K[0]) if K else 0
    if s == 0:
        return identity(n)
    S, U, _ = smith_normal_form(K)
    for i in range(s):
        if S[i][i] != 1:
            raise ValueError("columns do not form a saturated sublattice")
    # K = U^{-1} S V^{-1}; the first s columns of U^{-1} span the lattice.
    Uinv = _invert_unimodular(U)
    return Uinv


def _invert_unimodular(U):
    n = len(U)
    adj = adjugate(U)
    d = bareiss_det(U)
    if d not in (1, -1):
        raise ValueError("matrix is not unimodular")
    return [[x * d for x in row] for row in adj]


def extends_to_basis(vectors: list[list[int]], n: int) -> bool:
    """Whether the given independent column vectors extend to a basis of Z^n
    (all Smith invariant factors equal to 1)."""
    if not vectors:
        return True
    K = [[vec[i] for vec in vectors] for i in range(n)]
    S, _, _ = smith_normal_form(K)
    k = len(vectors)
    return all(i < min(len(S), n) and S[i][i] == 1 for i in range(k))


def solve_mod_prime_power(A, b, p: int, C: int) -> list[int]:
    """Solve A x = b (mod p**C) by Gaussian elimination with p-unit pivots.

    Raises ArithmeticError when the reduction mod p is not uniquely
    solvable (pivot missing), which is the caller's cue that the chosen
    equations do not pin the unknowns down.
    """
    q = p**C
    rows = len(A)
    cols = len(A[0])
    M = [[A[i][j] % q for j in range(cols)] + [b[i] % q] for i in range(rows)]
    where = [-1] * cols
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] % p), None)
        if piv is None:
            raise ArithmeticError(f"no unit pivot for column {c} mod {p}")
        M[r], M[piv] = M[piv], M[r]
        inv = pow(M[r][c], -1, q)
        M[r] = [x * inv % q for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [(x - f * y) % q for x, y in zip(M[i], M[r])]
        where[c] = r
        r += 1
    for i in range(r, rows):
        if M[i][cols] % q:
            raise ArithmeticError("inconsistent system mod p**C")
    return [M[where[c]][cols] for c in range(cols)]
