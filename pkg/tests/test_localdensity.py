"""Local density engine tests.

Oracle layers, from gold to broad:
  * brute_density: literal count of representing matrices mod q^e (the
    definition), affordable only for small lattices and levels;
  * ysum_density: an independent implementation of the symmetric character
    sum (explicit enumeration of Y, integer Smith form, cyclotomic fold);
  * classical Fourier coefficients and E8 representation numbers, the latter
    recomputed here from the root system.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from eistheta.eisenstein import eisenstein_qexp
from eistheta.lattice import bareiss_det, short_vectors
from eistheta.localdensity import (
    _beta_2_n1,
    _beta_2_n2,
    _beta_odd_on,
    _density1_odd,
    _density2_odd,
    _diagonalize_odd,
    _generic_factor,
    local_density_coeff,
)

E8 = [
    [2, -1, 0, 0, 0, 0, 0, 0],
    [-1, 2, -1, 0, 0, 0, 0, 0],
    [0, -1, 2, -1, 0, 0, 0, 0],
    [0, 0, -1, 2, -1, 0, 0, 0],
    [0, 0, 0, -1, 2, -1, 0, -1],
    [0, 0, 0, 0, -1, 2, -1, 0],
    [0, 0, 0, 0, 0, -1, 2, 0],
    [0, 0, 0, 0, -1, 0, 0, 2],
]

A2A2 = [[2, -1, 0, 0], [-1, 2, 0, 0], [0, 0, 2, -1], [0, 0, -1, 2]]
A2B7 = [[2, -1, 0, 0], [-1, 2, 0, 0], [0, 0, 2, 1], [0, 0, 1, 4]]


def hyperbolic(planes):
    G = [[0] * (2 * planes) for _ in range(2 * planes)]
    for i in range(planes):
        G[2 * i][2 * i + 1] = G[2 * i + 1][2 * i] = 1
    return G


def brute_density(twoG, twoT, q, e):
    """Count X in M_{m x n}(Z/q^e) with (1/2) X^t G X = T mod q^e, normalized."""
    m, n = len(twoG), len(twoT)
    qe = q**e
    G = np.array(twoG, dtype=np.int64)
    X = np.indices((qe,) * m).reshape(m, -1).T
    Q = (((X @ G) * X).sum(axis=1) // 2) % qe
    norm = qe ** (m * n - n * (n + 1) // 2)
    if n == 1:
        cnt = int((Q == (twoT[0][0] // 2) % qe).sum())
        return Fraction(cnt, norm)
    X1 = X[Q == (twoT[0][0] // 2) % qe]
    X2 = X[Q == (twoT[1][1] // 2) % qe]
    if len(X1) == 0 or len(X2) == 0:
        return Fraction(0)
    B = (X1 @ G @ X2.T) % qe
    return Fraction(int((B == twoT[0][1] % qe).sum()), norm)


_YS_CACHE = {}


def ysum_density(q, e, n, kexp, twoT):
    """Split-lattice density of rank 2*kexp by direct symmetric enumeration."""
    qe = q**e
    key = (q, e, n, tuple(tuple(r) for r in twoT))
    if key not in _YS_CACHE:
        pairs = [(i, j) for i in range(n) for j in range(i, n)]
        hist = {}  # (smith sum, phase) -> count of Y
        for vals in itertools.product(range(qe), repeat=len(pairs)):
            Y = [[0] * n for _ in range(n)]
            for (i, j), v in zip(pairs, vals):
                Y[i][j] = Y[j][i] = v
            ph = sum(Y[i][i] * (twoT[i][i] // 2) for i in range(n))
            ph += sum(Y[i][j] * twoT[i][j] for i in range(n) for j in range(i + 1, n))
            hk = (_capped_smith_sum(Y, q, e), ph % qe)
            hist[hk] = hist.get(hk, 0) + 1
        _YS_CACHE[key] = hist
    weights = [0] * qe  # accumulated q^{kexp * smith} per phase residue
    for (smith, ph), cnt in _YS_CACHE[key].items():
        weights[ph] += cnt * q ** (kexp * smith)
    # fold out the prime-power cyclotomic relation and require rationality
    step = qe // q
    for b in range(step):
        top = weights[(q - 1) * step + b]
        if top:
            for i in range(q - 1):
                weights[i * step + b] -= top
            weights[(q - 1) * step + b] = 0
    assert all(w == 0 for w in weights[1 : qe - step]), "sum is not rational"
    return Fraction(weights[0], q ** (e * n * kexp))


def _capped_smith_sum(Y, q, e):
    n = len(Y)
    if e == 1:
        return n - _rank_mod_q(Y, q)
    big = 10**9
    dv = [0]
    for k in range(1, n + 1):
        g = 0
        for rows in itertools.combinations(range(n), k):
            for cols in itertools.combinations(range(n), k):
                sub = [[Y[r][c] for c in cols] for r in rows]
                g = math.gcd(g, abs(bareiss_det(sub)))
        if g == 0:
            dv.append(big)
        else:
            v = 0
            while g % q == 0:
                g //= q
                v += 1
            dv.append(v)
    total = 0
    for j in range(1, n + 1):
        cj = e if dv[j] >= big else min(e, dv[j] - dv[j - 1])
        total += cj
    return total


def _rank_mod_q(Y, q):
    A = [row[:] for row in Y]
    n = len(A)
    rank, col = 0, 0
    for col in range(n):
        piv = next((r for r in range(rank, n) if A[r][col] % q), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][col] % q, -1, q)
        for r in range(rank + 1, n):
            f = (A[r][col] * inv) % q
            if f:
                for c in range(col, n):
                    A[r][c] = (A[r][c] - f * A[rank][c]) % q
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# odd q, one column
# ---------------------------------------------------------------------------


def test_single_column_odd_matches_brute():
    # diag lattices 2*diag(1,..,1,c): disc class chi(c)
    for q, c, r, e in [
        (3, 1, 2, 2),
        (3, 1, 3, 2),
        (3, 2, 3, 2),
        (3, 1, 4, 2),
        (3, 2, 4, 2),
        (5, 1, 3, 2),
        (5, 2, 2, 2),
        (3, 1, 5, 1),
    ]:
        G = [[0] * r for _ in range(r)]
        for i in range(r):
            G[i][i] = 2 if i < r - 1 else 2 * c
        delta = 1 if pow(c, (q - 1) // 2, q) == 1 else -1
        for a in [1, 2, q, 2 * q, q * q, 0]:
            want = brute_density(G, [[2 * a]], q, e)
            got = _density1_odd(q, e, r, delta, a)
            assert got == want, (q, c, r, e, a)


def test_single_column_odd_deeper_level():
    # level e = 3 on a rank-2 lattice, all valuation classes
    for a in [1, 2, 3, 6, 9, 18, 27, 0]:
        want = brute_density([[2, 0], [0, 2]], [[2 * a]], 3, 3)
        assert _density1_odd(3, 3, 2, 1, a) == want, a


# ---------------------------------------------------------------------------
# odd q, two columns
# ---------------------------------------------------------------------------


def test_pair_odd_matches_brute_rank2():
    for c, delta in [(1, 1), (2, -1)]:
        G = [[2, 0], [0, 2 * c]]
        for e in (1, 2, 3):
            for da, db in [(2, 2), (2, 4), (2, 6), (6, 6), (6, 18), (18, 18), (4, 12)]:
                want = brute_density(G, [[da, 0], [0, db]], 3, e)
                got = _density2_odd(3, e, 2, delta, da, db)
                assert got == want, (c, e, da, db)


def test_pair_odd_matches_brute_rank4():
    for c, delta in [(1, 1), (2, -1)]:
        G = [[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2 * c]]
        for e in (1, 2):
            for da, db in [(2, 2), (2, 6), (6, 6), (6, 18)]:
                want = brute_density(G, [[da, 0], [0, db]], 3, e)
                got = _density2_odd(3, e, 4, delta, da, db)
                assert got == want, (c, e, da, db)


def test_pair_odd_matches_ysum_deeper():
    # independent character-sum route reaches levels brute force cannot
    for e in (2, 3):
        for kexp in (2, 3):
            for T in [[[2, 0], [0, 2]], [[2, 0], [0, 6]], [[6, 0], [0, 18]]]:
                want = ysum_density(3, e, 2, kexp, T)
                got = _beta_odd_on(3, e, 2 * kexp, (-1) ** kexp if 3 % 4 == 3 else 1, T)
                assert got == want, (e, kexp, T)


def test_pair_odd_offdiagonal_target_via_diagonalization():
    # non-diagonal input is diagonalized over Z_q before the radial engine
    A2 = [[2, -1], [-1, 2]]
    for e in (1, 2):
        want = brute_density([[2, 0], [0, 2]], A2, 3, e)
        got = _beta_odd_on(3, e, 2, 1, A2)
        assert got == want, e


def test_diagonalize_odd_preserves_determinant_valuation():
    for q in (3, 7):
        for T in [A2A2, A2B7, [[2, 1], [1, 4]]]:
            det = bareiss_det([r[:] for r in T])
            prec = 8
            diag = _diagonalize_odd(T, q, prec)
            v = sum(min(prec, _v(d, q)) for d in diag)
            assert v == _v(det, q)


def _v(x, q):
    v = 0
    while x % q == 0:
        x //= q
        v += 1
    return v


# ---------------------------------------------------------------------------
# odd q, peel recursion to rank 3/4
# ---------------------------------------------------------------------------


def test_peel_matches_ysum_rank4():
    for T in [A2A2, [[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 6, 0], [0, 0, 0, 6]]]:
        for kexp in (2, 3):
            want = ysum_density(3, 1, 4, kexp, T)
            delta0 = (1 if kexp % 2 == 0 else -1)  # chi_3(-1) = -1
            got = _beta_odd_on(3, 1, 2 * kexp, delta0, T)
            assert got == want, (T, kexp)


def test_rank1_on_split_lattice_matches_brute():
    # sanity for the peel's base counts on an actual hyperbolic Gram
    G = hyperbolic(2)
    for a in (0, 1, 2, 3, 9):
        assert _density1_odd(3, 2, 4, 1, a) == brute_density(G, [[2 * a]], 3, 2)


# ---------------------------------------------------------------------------
# q = 2
# ---------------------------------------------------------------------------


def test_single_column_2adic_matches_brute():
    for planes in (2, 3):
        G = hyperbolic(planes)
        for e in (2, 3):
            for t in range(0, 9):
                want = brute_density(G, [[2 * t]], 2, e)
                got = _beta_2_n1(planes, t, e)
                assert got == want, (planes, e, t)


def test_pair_2adic_matches_brute():
    targets = [
        [[2, -1], [-1, 2]],
        [[2, 0], [0, 2]],
        [[2, 0], [0, 4]],
        [[4, 2], [2, 4]],
        [[4, 0], [0, 8]],
        [[2, 1], [1, 4]],
    ]
    for planes in (2, 3):
        G = hyperbolic(planes)
        for e in (2, 3):
            if planes == 3 and e == 3:
                continue
            for T in targets:
                want = brute_density(G, T, 2, e)
                got = _beta_2_n2(planes, tuple(tuple(r) for r in T), e)
                assert got == want, (planes, e, T)


def test_pair_2adic_matches_ysum_deeper():
    for e in (4, 5):
        for T in [[[2, -1], [-1, 2]], [[4, 0], [0, 8]], [[4, 2], [2, 4]]]:
            want = ysum_density(2, e, 2, 2, T)
            got = _beta_2_n2(2, tuple(tuple(r) for r in T), e)
            assert got == want, (e, T)


def test_unramified_prime_equals_generic_factor():
    # at a good odd prime the stabilized density is the closed Euler factor
    for T, n in [([[2]], 1), ([[2, -1], [-1, 2]], 2)]:
        det2T = bareiss_det([r[:] for r in T])
        for q in (5, 7):
            got = _beta_odd_on(q, 2, 8, 1, T)
            assert got == _generic_factor(n, q, 4, det2T), (T, q)


# ---------------------------------------------------------------------------
# assembled coefficients
# ---------------------------------------------------------------------------


def test_classical_degree1_values():
    assert local_density_coeff([[2]], 4) == 240
    assert local_density_coeff([[4]], 4) == 2160
    assert local_density_coeff([[6]], 4) == 6720
    assert local_density_coeff([[2]], 6) == -504
    assert local_density_coeff([[12]], 6) == -504 * (1 + 2**5 + 3**5 + 6**5)


def test_classical_degree2_values():
    assert local_density_coeff([[2, -1], [-1, 2]], 4) == 13440
    assert local_density_coeff([[2, 0], [0, 2]], 4) == 30240
    assert local_density_coeff([[2, 1], [1, 4]], 4) == 138240
    assert local_density_coeff([[2, 0], [0, 4]], 4) == 181440
    assert local_density_coeff([[4, 0], [0, 4]], 4) == 1239840


def test_dual_route_against_closed_forms():
    for k in (4, 6):
        F = eisenstein_qexp(k, 2, 5)
        checked = 0
        for idx, want in sorted(F.coeffs.items()):
            M = [list(r) for r in idx]
            if M[0][0] == 0:
                continue  # the constant term is not a density product
            if M[0][0] * M[1][1] - M[0][1] ** 2 == 0:
                # a singular index carries the degree-1 coefficient
                T = [[M[0][0]]]
            else:
                T = M
            assert local_density_coeff(T, k) == want, (k, idx)
            checked += 1
        # 5 singular classes and 14 binary classes up to trace 5
        assert checked == 19


def test_dual_route_large_weight_smoke():
    F = eisenstein_qexp(44, 2, 3)
    for idx in [((2, -1), (-1, 2)), ((2, 0), (0, 2)), ((2, -1), (-1, 4))]:
        T = [list(r) for r in idx]
        assert local_density_coeff(T, 44) == F.coeffs[idx]


def test_e8_representation_numbers_degree2():
    roots = [v for v, q in short_vectors(E8, 1, both_signs=True) if q == 1]
    V = np.array(roots, dtype=np.int64)
    B = V @ np.array(E8, dtype=np.int64) @ V.T
    assert len(roots) == 240
    assert int((B == -1).sum()) == local_density_coeff([[2, -1], [-1, 2]], 4)
    assert int((B == 0).sum()) == local_density_coeff([[2, 0], [0, 2]], 4)


def test_e8_representation_numbers_degree4():
    # four-tuples of roots realizing two orthogonal hexagonal pairs; the
    # lattice has one class in its genus so the theta coefficient is the
    # Eisenstein coefficient
    roots = [v for v, q in short_vectors(E8, 1, both_signs=True) if q == 1]
    V = np.array(roots, dtype=np.int64)
    B = (V @ np.array(E8, dtype=np.int64) @ V.T).astype(np.int8)
    total = 0
    for i, j in np.argwhere(B == -1):
        idx = ((B[i] == 0) & (B[j] == 0)).nonzero()[0]
        sub = B[np.ix_(idx, idx)]
        total += int((sub == -1).sum())
    assert total == 19353600
    assert local_density_coeff(A2A2, 4) == 19353600


def test_e8_representation_numbers_degree4_mixed():
    sv = short_vectors(E8, 2, both_signs=True)
    R = np.array([v for v, q in sv if q == 1], dtype=np.int64)
    W = np.array([v for v, q in sv if q == 2], dtype=np.int64)
    G = np.array(E8, dtype=np.int64)
    BRR = (R @ G @ R.T).astype(np.int8)
    BRW = (R @ G @ W.T).astype(np.int8)
    total = 0
    for i, j in np.argwhere(BRR == -1):
        m1 = ((BRR[i] == 0) & (BRR[j] == 0)).nonzero()[0]
        m2 = ((BRW[i] == 0) & (BRW[j] == 0)).nonzero()[0]
        total += int((BRW[np.ix_(m1, m2)] == 1).sum())
    assert total == 58060800
    assert local_density_coeff(A2B7, 4) == 58060800


def test_class_invariance():
    # congruent inputs give the same coefficient
    assert local_density_coeff([[2, 1], [1, 2]], 4) == 13440
    assert local_density_coeff([[4, 1], [1, 2]], 4) == local_density_coeff(
        [[2, -1], [-1, 4]], 4
    )


def test_rejected_inputs():
    with pytest.raises(ValueError):
        local_density_coeff([[2]], 5)
    with pytest.raises(ValueError):
        local_density_coeff([[2]], 2)
    with pytest.raises(ValueError):
        local_density_coeff([[2, 0], [0, -2]], 4)
    with pytest.raises(NotImplementedError):
        local_density_coeff([[2, 0, 0], [0, 2, 0], [0, 0, 2]], 4)
    with pytest.raises(NotImplementedError):
        # rank 4 with even det(2T)
        local_density_coeff(
            [[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2]], 4
        )
    with pytest.raises(NotImplementedError):
        # det(2T) = 3^4: more than two non-unit Jordan scales at q = 3
        local_density_coeff(
            [[2, -1, 0, 0], [-1, 2, 0, 0], [0, 0, 6, -3], [0, 0, -3, 6]], 4
        )
