"""Siegel-type Fourier coefficients via products of local representation densities.

This is the independent oracle for the coefficients produced by
``eisenstein.eisenstein_qexp``: for a positive definite half-integral index T
of rank n (given as twoT) and an even weight k,

    a_k(T) = alpha_inf(T, k) * prod_q beta_q(T, k),

where beta_q is the representation density of T by the rank-2k split
(hyperbolic) quadratic form over Z_q and alpha_inf is the archimedean density
(explicit Gamma/pi constants).  The product over unramified primes is closed
into zeta and Dirichlet L-values; the finitely many primes dividing 2*det(2T)
are evaluated by exact counting.

Counting never enumerates representing matrices.  By orthogonality of
additive characters, the number of X in M_{m x n}(Z/q^e) with (1/2) X^t G X
congruent to T (G a sum of m/2 hyperbolic planes) equals

    q^{-e n(n+1)/2} sum_Y psi(-<Y, T>) (q^{en + sum_j min(c_j(Y), e)})^{m/2}

with Y running over symmetric n x n matrices mod q^e and c_j(Y) its
elementary-divisor valuations: each hyperbolic plane contributes the kernel
size of Y.  The rank m = 2k enters only as an exponent, so large weights cost
nothing.  For odd q the Y-sum collapses into closed valuation strata
(Ramanujan sums; quadratic Gauss sums only appear squared via g^2 = chi(-1)q,
so the arithmetic stays rational).  For q = 2 and n = 2 the strata are
accumulated exactly with numpy and folded in the cyclotomic basis of the
2-power roots of unity; rationality of the assembled value is asserted.

Each local density is accepted only after two consecutive truncation levels
agree; otherwise the computation fails with a "did not stabilize" error.

Scope: ranks 1 and 2 are fully supported.  Rank 3, and rank 4 with even
det(2T), would need a 2-adic engine for ramified targets, which is not
implemented.  Rank 4 with odd det(2T) is supported whenever each odd
ramified prime q satisfies v_q(det 2T) <= 2 (at most two non-unit Jordan
scales), which covers direct sums of binary forms of small determinant.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .exactnum import (
    bernoulli,
    dirichlet_L_neg,
    factorize,
    fund_disc_decompose,
    kronecker,
    v_p,
)
from .lattice import bareiss_det, check_form, is_positive_definite, minkowski_reduce

__all__ = ["local_density_coeff"]

_STABLE_MARGIN = 8


# ---------------------------------------------------------------------------
# symbolic accumulator: Fraction * pi^(half_pi/2) * sqrt(rad), rad squarefree
# ---------------------------------------------------------------------------


def _split_square(x: int) -> tuple[int, int]:
    """x = s^2 * r with r squarefree; returns (s, r)."""
    s, r, d = 1, x, 2
    while d * d <= r:
        while r % (d * d) == 0:
            r //= d * d
            s *= d
        d += 1
    return s, r


class _Sym:
    __slots__ = ("frac", "half_pi", "rad")

    def __init__(self) -> None:
        self.frac = Fraction(1)
        self.half_pi = 0
        self.rad = 1

    def mul_frac(self, x) -> None:
        self.frac *= x

    def mul_pi_half(self, h: int) -> None:
        self.half_pi += h

    def mul_sqrt(self, base: int, h: int) -> None:
        """Multiply by base^(h/2), base a positive integer, h any integer."""
        if base <= 0:
            raise ValueError("radicand must be positive")
        if h % 2 == 0:
            self.frac *= Fraction(base) ** (h // 2)
            return
        self.frac *= Fraction(base) ** ((h - 1) // 2)
        s, r = _split_square(self.rad * base)
        self.frac *= s
        self.rad = r

    def mul_gamma_half(self, twice_arg: int) -> None:
        """Multiply by Gamma(twice_arg / 2)."""
        if twice_arg % 2 == 0:
            n = twice_arg // 2
            if n <= 0:
                raise ValueError("Gamma pole")
            self.frac *= math.factorial(n - 1)
            return
        j = (1 - twice_arg) // 2
        if j >= 0:
            # Gamma(1/2 - j) = (-4)^j j! / (2j)! sqrt(pi)
            self.frac *= Fraction((-4) ** j * math.factorial(j), math.factorial(2 * j))
        else:
            # Gamma(1/2 + i) = (2i)! / (4^i i!) sqrt(pi)
            i = -j
            self.frac *= Fraction(math.factorial(2 * i), 4**i * math.factorial(i))
        self.half_pi += 1

    def div_gamma_half(self, twice_arg: int) -> None:
        t = _Sym()
        t.mul_gamma_half(twice_arg)
        self.frac /= t.frac
        self.half_pi -= t.half_pi

    def mul_zeta_even(self, s: int) -> None:
        # zeta(2j) = (-1)^(j+1) B_{2j} (2 pi)^{2j} / (2 (2j)!)
        if s <= 0 or s % 2:
            raise ValueError("need a positive even zeta argument")
        j = s // 2
        self.frac *= (
            Fraction((-1) ** (j + 1))
            * bernoulli(2 * j)
            * Fraction(2 ** (2 * j), 2 * math.factorial(2 * j))
        )
        self.half_pi += 2 * s

    def div_zeta_even(self, s: int) -> None:
        t = _Sym()
        t.mul_zeta_even(s)
        self.frac /= t.frac
        self.half_pi -= t.half_pi

    def mul_L_value(self, s: int, D0: int) -> None:
        """Multiply by L(s, chi_{D0}) for fundamental D0 with chi(-1) = (-1)^s."""
        if D0 == 1:
            self.mul_zeta_even(s)
            return
        delta = 0 if D0 > 0 else 1
        if (s - delta) % 2:
            raise ValueError("L-value parity mismatch")
        f = abs(D0)
        # completed functional equation for real primitive chi:
        # L(s) = L(1-s) (f/pi)^((1-2s)/2) Gamma((1-s+delta)/2)/Gamma((s+delta)/2)
        self.mul_frac(dirichlet_L_neg(s, D0))
        self.mul_sqrt(f, 1 - 2 * s)
        self.mul_pi_half(2 * s - 1)
        self.mul_gamma_half(1 - s + delta)
        self.div_gamma_half(s + delta)

    def as_fraction(self) -> Fraction:
        if self.half_pi != 0 or self.rad != 1:
            raise AssertionError(
                f"non-rational assembly: pi^({self.half_pi}/2), sqrt({self.rad})"
            )
        return self.frac


# ---------------------------------------------------------------------------
# generic (good-reduction) local factors and their global closures
# ---------------------------------------------------------------------------


def _eta_disc(n: int, det2T: int) -> int:
    """Fundamental discriminant attached to an even-rank index."""
    disc = -det2T if n % 4 == 2 else det2T
    return fund_disc_decompose(disc)[0]


def _generic_factor(n: int, q: int, k: int, det2T: int) -> Fraction:
    out = Fraction(1) - Fraction(1, q**k)
    if n >= 3:
        out *= 1 - Fraction(1, q ** (2 * k - 2))
    if n in (2, 4):
        D0 = _eta_disc(n, det2T)
        out *= 1 + Fraction(kronecker(D0, q), q ** (k - n // 2))
    return out


def _closure(n: int, k: int, det2T: int) -> _Sym:
    sym = _Sym()
    sym.div_zeta_even(k)
    if n >= 3:
        sym.div_zeta_even(2 * k - 2)
    if n in (2, 4):
        D0 = _eta_disc(n, det2T)
        s = k - n // 2
        sym.mul_L_value(s, D0)
        sym.div_zeta_even(2 * s)
        for q in factorize(abs(D0)):
            sym.frac /= 1 - Fraction(1, q ** (2 * s))
    return sym


def _alpha_inf(n: int, k: int, det2T: int, sym: _Sym) -> None:
    m = 2 * k
    # i^{-nk} from the confluent integral; real since k is even
    if (n * k // 2) % 2:
        sym.mul_frac(-1)
    # 2^{mn/2} from the split Gram determinant, over the Jacobian
    # 2^{n(n-1)/2} between matrix and half-integral target coordinates
    sym.mul_frac(Fraction(2) ** (m * n // 2 - n * (n - 1) // 2))
    h = m - n - 1
    sym.mul_sqrt(det2T, h)
    sym.mul_sqrt(2, -n * h)
    for j in range(n):
        sym.mul_pi_half(m - j)
        sym.div_gamma_half(m - j)


# ---------------------------------------------------------------------------
# odd q: closed counts for one vector on a unimodular lattice
# ---------------------------------------------------------------------------


def _quadric_count(q: int, r: int, delta: int, a: int) -> int:
    """#{x in F_q^r : phi(x) = a}, phi unimodular of rank r, disc class delta."""
    a %= q
    if r % 2 == 0:
        s = r // 2
        eps = kronecker(-1, q) ** s * delta
        if a:
            return q ** (r - 1) - eps * q ** (s - 1)
        return q ** (r - 1) + eps * (q**s - q ** (s - 1))
    s = (r - 1) // 2
    if a:
        return q ** (r - 1) + q**s * kronecker((-1) ** s * a, q) * delta
    return q ** (r - 1)


def _count1_odd(q: int, e: int, r: int, delta: int, a: int) -> int:
    """#{x in (Z/q^e)^r : phi(x) = a mod q^e} for unimodular phi, odd q."""
    if e == 0:
        return 1
    a %= q**e
    j = e if a == 0 else min(v_p(a, q), e)
    if j == 0:
        return q ** ((e - 1) * (r - 1)) * _quadric_count(q, r, delta, a)
    if e == 1:
        return _quadric_count(q, r, delta, 0)
    prim = (_quadric_count(q, r, delta, 0) - 1) * q ** ((e - 1) * (r - 1))
    if j < 2:
        return prim
    return prim + q**r * _count1_odd(q, e - 2, r, delta, a // (q * q))


def _density1_odd(q: int, e: int, r: int, delta: int, a: int) -> Fraction:
    return Fraction(_count1_odd(q, e, r, delta, a), q ** (e * (r - 1)))


# ---------------------------------------------------------------------------
# odd q, two columns: closed radial evaluation of the character sum
# ---------------------------------------------------------------------------


def _ramanujan(q: int, N: int, v: int) -> int:
    """Sum of psi(u t / q^N) over units u mod q^N, where v = min(v_q(t), N)."""
    if N == 0:
        return 1
    if v >= N:
        return q ** (N - 1) * (q - 1)
    if v == N - 1:
        return -(q ** (N - 1))
    return 0


def _density2_odd(q: int, e: int, r: int, delta: int, da: int, db: int) -> Fraction:
    """Density of the diagonal pair diag(da, db) (twoT scales); r must be even."""
    if r % 2:
        raise NotImplementedError("pair densities on odd-rank lattices")
    qe = q**e
    inv2 = pow(2, -1, qe)
    ta, tb = (da * inv2) % qe, (db * inv2) % qe
    va = e if ta == 0 else min(v_p(ta, q), e)
    vb = e if tb == 0 else min(v_p(tb, q), e)

    def gauss_pair(N1: int, N2: int) -> int:
        # product of the two chi-twisted unit sums; each vanishes unless the
        # phase valuation is exactly N-1, and g^2 = chi(-1) q keeps it rational
        if va != N1 - 1 or vb != N2 - 1:
            return 0
        c = kronecker((ta // q**va) % q, q) * kronecker((tb // q**vb) % q, q)
        return c * kronecker(-1, q) * q ** (N1 + N2 - 1)

    bins: dict[tuple[int, int], Fraction] = {}

    def add(c1: int, vd, w) -> None:
        if w == 0:
            return
        c2 = e if vd is None else min(e, vd - c1)
        key = (c1, c2)
        bins[key] = bins.get(key, Fraction(0)) + w

    for s1 in range(e + 1):
        R1 = _ramanujan(q, e - s1, va) if s1 < e else 1
        for s2 in range(e + 1):
            R2 = _ramanujan(q, e - s2, vb) if s2 < e else 1
            p12 = s1 + s2 if (s1 < e and s2 < e) else None
            for s3 in range(e + 1):
                n3 = q ** (e - s3 - 1) * (q - 1) if s3 < e else 1
                d33 = 2 * s3 if s3 < e else None
                c1 = min(s1, s2, s3)
                coupled = p12 is not None and d33 is not None and p12 == d33
                if not coupled:
                    if R1 == 0 or R2 == 0:
                        continue
                    if p12 is None:
                        vd = d33  # may itself be None: the zero matrix cell
                    elif d33 is None:
                        vd = p12
                    else:
                        vd = min(p12, d33)
                    add(c1, vd, Fraction(R1 * R2 * n3))
                    continue
                N3 = e - s3
                rr = Fraction(R1 * R2)
                gg = Fraction(gauss_pair(e - s1, e - s2))
                wm = (rr - gg) / 2  # chi(u1 u2) = -1: u1 u2 - w^2 stays a unit
                wp = (rr + gg) / 2  # chi(u1 u2) = +1: fine strata around +-sqrt
                if wm:
                    add(c1, 2 * s3, wm * (q ** (N3 - 1) * (q - 1)))
                if wp:
                    add(c1, 2 * s3, wp * (q ** (N3 - 1) * (q - 3)))
                    for d in range(1, N3):
                        add(
                            c1,
                            2 * s3 + d,
                            wp * (2 * (q ** (N3 - d) - q ** (N3 - d - 1))),
                        )
                    add(c1, 2 * s3 + N3, wp * 2)

    total = Fraction(0)
    sign = kronecker(-1, q) ** (r // 2) * delta
    for (c1, c2), w in bins.items():
        xfac = Fraction(1)
        for cj in (c1, c2):
            wj = e - cj
            xfac *= Fraction(q) ** (r * (cj + wj // 2))
            if wj % 2:
                xfac *= sign * q ** (r // 2)
        total += w * xfac
    return total / Fraction(q) ** (3 * e + e * (2 * r - 3))


# ---------------------------------------------------------------------------
# odd q: diagonalization over Z_q and the unit-peel recursion
# ---------------------------------------------------------------------------


def _diagonalize_odd(twoT, q: int, prec: int) -> list[int]:
    """Diagonal twoT-scales of the form over Z_q (odd q), entries mod q^prec."""
    n = len(twoT)
    P = q**prec
    A = [[twoT[i][j] % P for j in range(n)] for i in range(n)]
    out = []
    idx = list(range(n))
    while idx:
        best = None
        for i in idx:
            for j in idx:
                x = A[i][j] % P
                v = prec if x == 0 else v_p(x, q)
                if (
                    best is None
                    or v < best[0]
                    or (v == best[0] and i == j and best[1] != best[2])
                ):
                    best = (v, i, j)
        v, i, j = best
        if i != j:
            # fold the minimal off-diagonal entry onto the diagonal: e_i += e_j;
            # the new A[i][i] then has valuation exactly v, since both old
            # diagonal entries sit strictly above it (diagonal wins ties)
            for t in idx:
                A[i][t] = (A[i][t] + A[j][t]) % P
            for t in idx:
                A[t][i] = (A[t][i] + A[t][j]) % P
        piv = A[i][i] % P
        vp = prec if piv == 0 else v_p(piv, q)
        if vp >= prec:
            raise ValueError("diagonalization lost all working precision")
        uinv = pow(piv // q**vp, -1, P)
        out.append(piv)
        idx.remove(i)
        for s in idx:
            if A[s][i] % q**vp:
                raise AssertionError("pivot was not minimal")
            f = (A[s][i] // q**vp * uinv) % P
            for t in idx:
                A[s][t] = (A[s][t] - f * A[i][t]) % P
            A[s][i] = A[i][s] = 0
    return out


def _beta_odd_on(q: int, e: int, r0: int, delta0: int, twoT) -> Fraction:
    """Density of twoT on a rank-r0 unimodular lattice of disc class delta0."""
    n = len(twoT)
    det2T = bareiss_det([list(row) for row in twoT])
    prec = e + v_p(det2T, q) + 4
    diag = _diagonalize_odd(twoT, q, prec)
    diag.sort(key=lambda d: v_p(d, q))
    qe = q**e
    inv2e = pow(2, -1, qe)
    inv2q = pow(2, -1, q)
    if n == 1:
        return _density1_odd(q, e, r0, delta0, diag[0] * inv2e % qe)
    r, delta = r0, delta0
    dens = Fraction(1)
    while len(diag) > 2:
        d0 = diag.pop(0)
        if v_p(d0, q) != 0:
            raise NotImplementedError(
                f"more than two non-unit Jordan scales at q={q}; this index "
                "is outside the supported rank-4 range"
            )
        dens *= _density1_odd(q, e, r, delta, d0 * inv2e % qe)
        delta *= kronecker(d0 * inv2q % q, q)
        r -= 1
    return dens * _density2_odd(q, e, r, delta, diag[0] % qe, diag[1] % qe)


# ---------------------------------------------------------------------------
# q = 2: closed formula for one column, exact strata tables for two columns
# ---------------------------------------------------------------------------


def _beta_2_n1(k: int, t: int, e: int) -> Fraction:
    out = Fraction(1)
    vt = min(v_p(t, 2), e) if t else e
    for s in range(1, e + 1):
        if vt >= s:
            c = 1 << (s - 1)
        elif vt == s - 1:
            c = -(1 << (s - 1))
        else:
            c = 0
        out += Fraction(c, 1 << (k * s))
    return out


_Q2_TABLE_CACHE: dict = {}


def _v2_arr(x: np.ndarray, cap: int) -> np.ndarray:
    low = x & (-x)
    v = np.full(x.shape, cap, dtype=np.int64)
    nz = x != 0
    v[nz] = np.log2(low[nz].astype(np.float64)).astype(np.int64)
    np.minimum(v, cap, out=v)
    return v


def _q2_pair_components(twoT: tuple, e: int) -> dict[int, tuple[int, ...]]:
    """Folded cyclotomic components of the pair character sum, per Smith bin.

    Returns {c: components} where c = c1 + c2 is the capped sum of the
    elementary-divisor valuations of Y and the components are coordinates of
    sum_Y psi(<Y, T>) in the basis zeta^j, j < 2^(e-1), of Q(zeta_{2^e}).
    """
    key = (twoT, e)
    if key in _Q2_TABLE_CACHE:
        return _Q2_TABLE_CACHE[key]
    E = 1 << e
    t1 = (twoT[0][0] // 2) % E
    t2 = (twoT[1][1] // 2) % E
    t3 = twoT[0][1] % E
    nbins = 2 * e + 1
    acc = np.zeros(nbins * E, dtype=np.int64)
    y = np.arange(E, dtype=np.int64)
    y2f = np.repeat(y, E)
    y3f = np.tile(y, E)
    v23 = np.minimum(_v2_arr(y2f, e), _v2_arr(y3f, e))
    sq3 = y3f * y3f
    base_phase = (y2f * t2 + y3f * t3) % E
    for y1 in range(E):
        v1 = min(v_p(y1, 2), e) if y1 else e
        c1 = np.minimum(v23, v1)
        det = y1 * y2f - sq3
        vd = _v2_arr(det, 2 * e + 2)
        np.minimum(vd, c1 + e, out=vd)
        cbin = c1 + np.minimum(e, vd - c1)
        phase = (base_phase + y1 * t1) % E
        acc += np.bincount(cbin * E + phase, minlength=nbins * E)
    acc = acc.reshape(nbins, E)
    half = E // 2
    comp = {}
    for c in range(nbins):
        row = acc[c]
        if row.any():
            comp[c] = tuple(int(row[j]) - int(row[j + half]) for j in range(half))
    _Q2_TABLE_CACHE[key] = comp
    return comp


def _beta_2_n2(k: int, twoT: tuple, e: int) -> Fraction:
    comp = _q2_pair_components(twoT, e)
    width = 1 << (e - 1)
    for j in range(1, width):
        if sum((1 << (k * c)) * v[j] for c, v in comp.items()) != 0:
            raise AssertionError("pair density did not assemble to a rational")
    num = sum((1 << (k * c)) * v[0] for c, v in comp.items())
    return Fraction(num, 1 << (2 * e * k))


# ---------------------------------------------------------------------------
# stabilized local densities and the full assembly
# ---------------------------------------------------------------------------


def _beta_q(q: int, k: int, twoT, det2T: int) -> Fraction:
    n = len(twoT)
    v = v_p(2 * det2T, q)
    e0 = max(2, v + 2)
    if q == 2:
        if n == 1:
            fn = lambda ee: _beta_2_n1(k, twoT[0][0] // 2, ee)
        elif n == 2:
            tt = tuple(tuple(row) for row in twoT)
            fn = lambda ee: _beta_2_n2(k, tt, ee)
        elif det2T % 2:
            # twoT is 2-adically even unimodular, so its factor at 2 is the
            # same closed good-reduction value as at odd unramified primes
            return _generic_factor(n, 2, k, det2T)
        else:
            raise NotImplementedError(
                "2-adic density for ramified targets of rank >= 3 is not implemented"
            )
    else:
        r0, delta0 = 2 * k, kronecker(-1, q) ** k
        fn = lambda ee: _beta_odd_on(q, ee, r0, delta0, twoT)
    prev = fn(e0)
    for ee in range(e0 + 1, v + _STABLE_MARGIN + 2):
        cur = fn(ee)
        if cur == prev:
            return cur
        prev = cur
    raise RuntimeError(
        f"local density at q={q} did not stabilize below level {v + _STABLE_MARGIN + 1}"
    )


_COEFF_CACHE: dict = {}


def local_density_coeff(twoT, k: int) -> Fraction:
    """Eisenstein coefficient of a rank 1..4 index from local densities."""
    M = [list(row) for row in twoT]
    check_form(M)
    n = len(M)
    if k % 2 or k < 4:
        raise ValueError("weight must be even and at least 4")
    if n > 4:
        raise ValueError("index rank must be at most 4")
    if not is_positive_definite(M):
        raise ValueError("index must be positive definite")
    if n == 3:
        raise NotImplementedError(
            "2-adic density for degree-3 indices is not implemented"
        )
    M = minkowski_reduce(M)
    key = (tuple(tuple(row) for row in M), k)
    if key in _COEFF_CACHE:
        return _COEFF_CACHE[key]
    det2T = bareiss_det([row[:] for row in M])
    if n == 4 and det2T % 2 == 0:
        raise NotImplementedError(
            "2-adic density for rank-4 indices with even det(2T) is not implemented"
        )
    sym = _closure(n, k, det2T)
    _alpha_inf(n, k, det2T, sym)
    out = sym.as_fraction()
    for q in sorted(factorize(2 * det2T)):
        out *= _beta_q(q, k, M, det2T) / _generic_factor(n, q, k, det2T)
    _COEFF_CACHE[key] = out
    return out
