"""Truncated Fourier expansions indexed by half-integral matrices.

A degree-n expansion stores rational coefficients a(T) for canonical
positive semidefinite T with tr(T) <= trace_bound.  Zero coefficients
may be omitted; lookups inside the window return 0, lookups beyond the
window raise (truncation is never silent).  All "for all T" predicates
below are evaluated on the stored window and are window-relative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .exactnum import divisors, v_p
from .lattice import (
    Mat,
    as_mat,
    form_det,
    form_rank,
    form_trace,
    is_psd,
    minkowski_reduce,
    pad_zero,
)


@dataclass(frozen=True)
class QExpansion:
    degree: int
    trace_bound: int
    coeffs: dict
    class_invariant: bool = True

    def __post_init__(self):
        clean = {}
        for T, a in self.coeffs.items():
            T = as_mat(T)
            a = Fraction(a)
            if not a:
                continue
            if len(T) != self.degree:
                raise ValueError("index degree mismatch")
            if form_trace(T) > self.trace_bound:
                raise ValueError("index beyond trace bound")
            if minkowski_reduce(T) != T:
                raise ValueError("index not canonical")
            clean[T] = a
        object.__setattr__(self, "coeffs", clean)

    def __eq__(self, other):
        if not isinstance(other, QExpansion):
            return NotImplemented
        return (
            self.degree == other.degree
            and self.trace_bound == other.trace_bound
            and self.class_invariant == other.class_invariant
            and self.coeffs == other.coeffs
        )

    def indices(self):
        return sorted(self.coeffs, key=lambda T: (form_trace(T), T))


def coeff(F: QExpansion, T) -> Fraction:
    """a_F(T); canonicalizes T first when F is class-invariant."""
    T = as_mat(T)
    if len(T) != F.degree:
        raise ValueError("index degree mismatch")
    if not is_psd(T):
        raise ValueError("index not positive semidefinite")
    if form_trace(T) > F.trace_bound:
        raise ValueError(
            f"index trace {form_trace(T)} beyond stored bound {F.trace_bound}"
        )
    if F.class_invariant:
        T = minkowski_reduce(T)
    elif minkowski_reduce(T) != T:
        raise ValueError("expansion not class-invariant; pass a canonical index")
    return F.coeffs.get(T, Fraction(0))


def qexp_scale(F: QExpansion, c) -> QExpansion:
    c = Fraction(c)
    return QExpansion(
        F.degree,
        F.trace_bound,
        {T: c * a for T, a in F.coeffs.items()},
        F.class_invariant,
    )


def qexp_add(*terms) -> QExpansion:
    """Sum of expansions of one degree, truncated to the smallest bound."""
    degrees = {F.degree for F in terms}
    if len(degrees) != 1:
        raise ValueError("degree mismatch")
    bound = min(F.trace_bound for F in terms)
    acc: dict = {}
    for F in terms:
        for T, a in F.coeffs.items():
            if form_trace(T) <= bound:
                acc[T] = acc.get(T, Fraction(0)) + a
    return QExpansion(
        degrees.pop(), bound, acc, all(F.class_invariant for F in terms)
    )


@dataclass(frozen=True)
class CongruenceResult:
    ok: bool
    witness: Mat | None = None

    def __bool__(self):
        return self.ok


def congruent_mod(F: QExpansion, G: QExpansion, p: int, m: int) -> CongruenceResult:
    """Window-relative test of a_F(T) = a_G(T) mod p^m for all stored T.

    Compares over the smaller of the two trace bounds; the first failing
    index (in (trace, lex) order) is returned as a witness.
    """
    if F.degree != G.degree:
        raise ValueError("degree mismatch")
    if m <= 0:
        raise ValueError("m must be positive")
    bound = min(F.trace_bound, G.trace_bound)
    keys = {T for T in F.coeffs if form_trace(T) <= bound}
    keys |= {T for T in G.coeffs if form_trace(T) <= bound}
    for H in (F, G):
        for T in keys:
            a = H.coeffs.get(T)
            if a is not None and v_p(a, p) < 0:
                raise ValueError(f"coefficient at {T} is not {p}-integral")
    for T in sorted(keys, key=lambda T: (form_trace(T), T)):
        d = F.coeffs.get(T, Fraction(0)) - G.coeffs.get(T, Fraction(0))
        if v_p(d, p) < m:
            return CongruenceResult(False, T)
    return CongruenceResult(True, None)


def rank_filter(F: QExpansion, r: int) -> QExpansion:
    """The sub-expansion supported on indices of rank exactly r."""
    if r < 0 or r > F.degree:
        raise ValueError("rank out of range")
    kept = {T: a for T, a in F.coeffs.items() if form_rank(T) == r}
    return QExpansion(F.degree, F.trace_bound, kept, F.class_invariant)


def v_p_rank(F: QExpansion, p: int, r: int):
    """min of v_p over stored rank-r coefficients (window-relative inf)."""
    best = math.inf
    for T, a in F.coeffs.items():
        if form_rank(T) == r:
            best = min(best, v_p(a, p))
    return best


def mod_pm_singular_rank(F: QExpansion, p: int, m: int):
    """The p-rank r of a mod-p^m singular expansion, else None.

    r is the largest rank carrying a p-unit coefficient; it qualifies
    only when r < degree and every stored coefficient of rank > r has
    v_p >= m.  Window-relative, like every predicate here.
    """
    if m <= 0:
        raise ValueError("m must be positive")
    by_rank: dict[int, list] = {}
    for T, a in F.coeffs.items():
        v = v_p(a, p)
        if v < 0:
            raise ValueError(f"coefficient at {T} is not {p}-integral")
        by_rank.setdefault(form_rank(T), []).append(v)
    unit_ranks = [r for r, vs in by_rank.items() if min(vs) == 0]
    if not unit_ranks:
        return None
    r = max(unit_ranks)
    if r == F.degree:
        return None
    for rr, vs in by_rank.items():
        if rr > r and min(vs) < m:
            return None
    return r


def check_weight_rank_congruence(k: int, r: int, p: int, m: int) -> bool:
    """Necessary condition relating weight and p-rank: 2k - r = 0
    mod (p-1)p^(m-1)."""
    return (2 * k - r) % ((p - 1) * p ** (m - 1)) == 0


def u_p(F: QExpansion, p: int) -> QExpansion:
    """Hecke operator at level p on expansions: a(T) -> a(pT)."""
    bound = F.trace_bound // p
    out: dict = {}
    for T, a in F.coeffs.items():
        tr = form_trace(T)
        if tr % p == 0 and tr // p <= bound:
            scaled = tuple(tuple(x // p for x in row) for row in T)
            if all(x % p == 0 for row in T for x in row):
                out[scaled] = a
    return QExpansion(F.degree, bound, out, F.class_invariant)


def phi_restrict(F: QExpansion) -> QExpansion:
    """Siegel Phi operator as an index-restriction view: degree drops by
    one, a(T') = a(T' + 0)."""
    if F.degree == 0:
        raise ValueError("degree is already 0")
    out: dict = {}
    for T, a in F.coeffs.items():
        if all(x == 0 for x in T[-1]):
            out[tuple(row[:-1] for row in T[:-1])] = a
    return QExpansion(F.degree - 1, F.trace_bound, out, F.class_invariant)


# -------------------------------------------------------- primitive part

def _hnf_matrices(r: int, d: int):
    """All upper-triangular Hermite forms of determinant d (row style:
    positive pivots, entries above a pivot reduced mod the pivot)."""
    def diag_splits(rem, length):
        if length == 1:
            yield (rem,)
            return
        for first in divisors(rem):
            for rest in diag_splits(rem // first, length - 1):
                yield (first,) + rest

    for dg in diag_splits(d, r):
        cols = []
        for j in range(r):
            opts = []
            for vals in _tuples(dg[j], j):
                opts.append(vals)
            cols.append(opts)

        def build(j, rows):
            if j == r:
                H = [[0] * r for _ in range(r)]
                for c, col in enumerate(rows):
                    for i in range(c):
                        H[i][c] = col[i]
                    H[c][c] = dg[c]
                yield tuple(tuple(row) for row in H)
                return
            for col in cols[j]:
                yield from build(j + 1, rows + [col])

        yield from build(0, [])


def _tuples(top, length):
    if length == 0:
        yield ()
        return
    for head in range(top):
        for rest in _tuples(top, length - 1):
            yield (head,) + rest


def _transform_by_inverse(twoT: Mat, D) -> Mat | None:
    """(D^{-1})^t (2T) D^{-1} when it lands in even integral matrices."""
    r = len(twoT)
    det = 1
    for i in range(r):
        det *= D[i][i]
    inv = [[Fraction(0)] * r for _ in range(r)]
    for i in range(r):
        inv[i][i] = Fraction(1, D[i][i])
    for j in range(r - 1, -1, -1):
        for i in range(j - 1, -1, -1):
            s = Fraction(0)
            for t in range(i + 1, j + 1):
                s += D[i][t] * inv[t][j]
            inv[i][j] = -s / D[i][i]
    out = [[Fraction(0)] * r for _ in range(r)]
    for i in range(r):
        for j in range(r):
            s = Fraction(0)
            for a in range(r):
                if inv[a][i]:
                    s += inv[a][i] * sum(twoT[a][b] * inv[b][j] for b in range(r))
            out[i][j] = s
    rows = []
    for i in range(r):
        row = []
        for j in range(r):
            v = out[i][j]
            if v.denominator != 1:
                return None
            row.append(v.numerator)
        if row[i] % 2:
            return None
        rows.append(tuple(row))
    return tuple(rows)


def primitive_coeffs(F: QExpansion, r: int, bound: int) -> dict:
    """Rank-r primitive coefficients a*(T) for definite T with tr <= bound.

    Inverts a(T + 0) = sum over sublattice shapes D of a*(T[D^{-1}]) by
    induction on det(2T): subtract the contributions of all non-unimodular
    Hermite forms D with det(D)^2 | det(2T) and T[D^{-1}] still even
    integral positive definite.
    """
    if not F.class_invariant:
        raise ValueError("primitive coefficients need a class-invariant expansion")
    if r <= 0 or r > F.degree:
        raise ValueError("rank out of range")
    if bound > F.trace_bound:
        raise ValueError("bound exceeds stored trace bound")
    memo: dict[Mat, Fraction] = {}

    def star(T: Mat) -> Fraction:
        got = memo.get(T)
        if got is not None:
            return got
        total = coeff(F, pad_zero(T, F.degree))
        det2T = form_det(T)
        for d in divisors(det2T):
            if d == 1 or det2T % (d * d):
                continue
            for D in _hnf_matrices(r, d):
                T2 = _transform_by_inverse(T, D)
                if T2 is None:
                    continue
                total -= star(minkowski_reduce(T2))
        memo[T] = total
        return total

    out = {}
    for T in _definite_indices(r, bound):
        out[T] = star(T)
    return out


def _definite_indices(r: int, bound: int):
    from .lattice import enumerate_psd_indices

    return [
        T for T in enumerate_psd_indices(r, bound) if form_rank(T) == r
    ]


# ------------------------------------------------------------ dump format

def dump_qexp(F: QExpansion) -> dict:
    entries = []
    for T in sorted(F.coeffs):
        a = F.coeffs[T]
        entries.append(
            {
                "twoT": [list(row) for row in T],
                "num": str(a.numerator),
                "den": str(a.denominator),
            }
        )
    return {
        "degree": F.degree,
        "trace_bound": F.trace_bound,
        "class_invariant": F.class_invariant,
        "coeffs": entries,
    }


def load_qexp(doc) -> QExpansion:
    coeffs = {
        as_mat(e["twoT"]): Fraction(int(e["num"]), int(e["den"]))
        for e in doc["coeffs"]
    }
    return QExpansion(
        int(doc["degree"]),
        int(doc["trace_bound"]),
        coeffs,
        bool(doc["class_invariant"]),
    )
