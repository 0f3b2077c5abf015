"""Weight ladders of Eisenstein expansions and their p-adic limits.

An odd prime p and a weight pair (k, j) determine weights
k_j(m) = k + a_j * p^{b(m)} with a_j the least positive residue of
(p-1)/2^j mod (p-1).  Along such a ladder the Eisenstein coefficients
converge p-adically, and the limit window is a linear combination of
weighted genus theta series of even lattices of rank 2k with level
dividing p and matching character.  This module computes the finite
rungs, certifies the observed convergence index by index, fits the
genus coefficients on a minimal training set of indices, and verifies
the congruence on everything held out.  Nothing is extrapolated: each
reported residue carries the congruence exponent actually observed,
capped at the working precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .eisenstein import eisenstein_qexp
from .exactnum import divisors, factorize, v_p
from .fourier import (
    QExpansion,
    _hnf_matrices,
    _transform_by_inverse,
    check_weight_rank_congruence,
    dump_qexp,
    mod_pm_singular_rank,
    qexp_add,
    qexp_scale,
    u_p,
)
from .genus import cached_genera, genera_to_doc
from .lattice import (
    QuadCharacter,
    as_mat,
    automorphism_count,
    check_form,
    eta_S,
    form_det,
    form_trace,
    level,
    minkowski_reduce,
)
from .localdensity import local_density_coeff
from .theta import genus_theta

__all__ = [
    "WeightTarget",
    "WeightSequence",
    "default_sequence",
    "weight_at",
    "LimitLadder",
    "empirical_limit",
    "SingularRankAudit",
    "singular_rank_audit",
    "primitive_density_coeff",
    "DirectLadder",
    "direct_limit_coefficient",
    "FitRung",
    "VerificationReport",
    "fit_and_verify",
    "PipelineError",
]


class PipelineError(RuntimeError):
    """Failure in a named stage of the verification pipeline."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


def _is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == {n: 1}


# ---------------------------------------------------------------------------
# weight targets and schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightTarget:
    """Limit weight (k, j) at the odd prime p.

    j = 0 aims at the pair (k, k) and needs k even; j = 1 aims at
    (k, k + (p-1)/2) and needs k = (p-1)/2 mod 2 so that every rung
    k_j(m) is an even weight.
    """

    p: int
    k: int
    j: int

    def __post_init__(self):
        if not _is_prime(self.p) or self.p == 2:
            raise ValueError("p must be an odd prime")
        if self.k <= 0:
            raise ValueError("k must be positive")
        if self.j not in (0, 1):
            raise ValueError("j must be 0 or 1")
        if self.j == 0 and self.k % 2:
            raise ValueError("j = 0 needs an even k")
        if self.j == 1 and (self.k - (self.p - 1) // 2) % 2:
            raise ValueError("j = 1 needs k = (p-1)/2 mod 2")

    @property
    def a_step(self) -> int:
        """Least positive a with a = (p-1)/2^j mod (p-1)."""
        return (self.p - 1) // 2 if self.j else self.p - 1

    @property
    def character(self) -> QuadCharacter:
        """chi_p^j as a real character: trivial for j = 0, else the
        quadratic character of conductor p."""
        if self.j == 0:
            return QuadCharacter(1)
        star = self.p if self.p % 4 == 1 else -self.p
        return QuadCharacter(star)

    def in_theorem_range(self) -> bool:
        return self.p > 2 * self.k + 1


@dataclass(frozen=True)
class WeightSequence:
    target: WeightTarget
    b_schedule: tuple

    def __post_init__(self):
        b = tuple(int(x) for x in self.b_schedule)
        object.__setattr__(self, "b_schedule", b)
        if not b or b[0] <= 0 or any(y <= x for x, y in zip(b, b[1:])):
            raise ValueError("b schedule must be strictly increasing and positive")

    def __len__(self):
        return len(self.b_schedule)


def default_sequence(target: WeightTarget, m_max: int) -> WeightSequence:
    """The schedule b(m) = m, m = 1..m_max."""
    if m_max <= 0:
        raise ValueError("m_max must be positive")
    return WeightSequence(target, tuple(range(1, m_max + 1)))


def weight_at(seq: WeightSequence, m: int) -> int:
    """k_j(m) = k + a_j * p^{b(m)}; m is 1-based into the schedule."""
    if not 1 <= m <= len(seq.b_schedule):
        raise ValueError("m outside the schedule")
    t = seq.target
    return t.k + t.a_step * t.p ** seq.b_schedule[m - 1]


def _residue(x: Fraction, p: int, c: int) -> int:
    """x mod p^c for x with a p-unit denominator."""
    x = Fraction(x)
    P = p**c
    if x.denominator % p == 0:
        raise ValueError("residue of a non p-integral value")
    return x.numerator * pow(x.denominator, -1, P) % P


def _capped_val(x: Fraction, p: int, cap: int) -> int:
    v = v_p(x, p)  # math.inf at 0, so the cap absorbs exact zeros
    return cap if v >= cap else v


# ---------------------------------------------------------------------------
# empirical limits of coefficient windows along a ladder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitLadder:
    """Per-index convergence record of a weight ladder.

    certificates[T] lists v_p of consecutive rung differences (capped);
    residues[T] = (r, M) means the coefficient at T is r mod p^M, with M
    the last observed certificate.  flagged collects indices whose
    certificates ever decreased.
    """

    target: WeightTarget
    degree: int
    trace_bound: int
    b_schedule: tuple
    weights: tuple
    rungs: tuple
    nu_hat: int
    certificates: dict
    residues: dict
    flagged: tuple
    cap: int

    @property
    def final(self) -> QExpansion:
        return self.rungs[-1]

    def to_doc(self) -> dict:
        idx = sorted(self.residues, key=lambda T: (form_trace(T), T))
        return {
            "p": self.target.p,
            "k": self.target.k,
            "j": self.target.j,
            "degree": self.degree,
            "trace_bound": self.trace_bound,
            "b_schedule": list(self.b_schedule),
            "weights": list(self.weights),
            "nu_hat": self.nu_hat,
            "precision_cap": self.cap,
            "indices": [
                {
                    "twoT": [list(row) for row in T],
                    "certificates": list(self.certificates[T]),
                    "residue": self.residues[T][0],
                    "mod_exponent": self.residues[T][1],
                }
                for T in idx
            ],
            "flagged": [[list(row) for row in T] for T in self.flagged],
        }


def empirical_limit(seq: WeightSequence, n: int, B: int, source=None) -> LimitLadder:
    """Compute every rung of the ladder and certify coefficientwise
    convergence on the degree-n window of trace bound B.

    The result is never an extrapolated rational: residues are reported
    exactly to the precision the certificates support.  An index whose
    certificate sequence decreases is flagged, not fatal.
    """
    if len(seq) < 2:
        raise ValueError("need at least two rungs to certify convergence")
    if source is None:
        source = eisenstein_qexp
    t = seq.target
    p = t.p
    weights = tuple(weight_at(seq, m) for m in range(1, len(seq) + 1))
    rungs = tuple(source(k, n, B) for k in weights)
    cap = seq.b_schedule[-1] + 2
    nu = min(
        [0] + [v_p(a, p) for F in rungs for a in F.coeffs.values() if v_p(a, p) < 0]
    )
    keys = set()
    for F in rungs:
        keys |= set(F.coeffs)
    certificates, residues, flagged = {}, {}, []
    scale = Fraction(p) ** (-nu)  # identity when nu = 0
    for T in keys:
        vals = [scale * F.coeffs.get(T, Fraction(0)) for F in rungs]
        certs = tuple(
            _capped_val(b - a, p, cap) for a, b in zip(vals, vals[1:])
        )
        certificates[T] = certs
        if any(y < x for x, y in zip(certs, certs[1:])):
            flagged.append(T)
        M = certs[-1]
        residues[T] = (_residue(vals[-1], p, M) if M else 0, M)
    flagged.sort(key=lambda T: (form_trace(T), T))
    return LimitLadder(
        target=t,
        degree=n,
        trace_bound=B,
        b_schedule=seq.b_schedule,
        weights=weights,
        rungs=rungs,
        nu_hat=nu,
        certificates=certificates,
        residues=residues,
        flagged=tuple(flagged),
        cap=cap,
    )


# ---------------------------------------------------------------------------
# weight/rank congruence audit for mod-p^m singular windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingularRankAudit:
    """Outcome of the necessary-condition check on a singular window.

    A window that is singular mod p^m of even p-rank r must satisfy
    2k - r = 0 mod (p-1)p^(m-1).  ok = False therefore indicates an
    inconsistency in the inputs, not a counterexample.
    """

    p: int
    m: int
    weight: int
    rank: int | None
    applicable: bool
    congruence_ok: bool | None
    ok: bool

    def to_doc(self) -> dict:
        return {
            "p": self.p,
            "m": self.m,
            "weight": self.weight,
            "rank": self.rank,
            "applicable": self.applicable,
            "congruence_ok": self.congruence_ok,
            "ok": self.ok,
        }


def singular_rank_audit(F: QExpansion, k: int, p: int, m: int) -> SingularRankAudit:
    """Detect mod-p^m singularity of F and audit the weight condition."""
    r = mod_pm_singular_rank(F, p, m)
    if r is None:
        return SingularRankAudit(p, m, k, None, False, None, True)
    if r % 2:
        # the necessary condition only speaks about even p-rank
        return SingularRankAudit(p, m, k, r, False, None, True)
    good = check_weight_rank_congruence(k, r, p, m)
    return SingularRankAudit(p, m, k, r, True, good, good)


# ---------------------------------------------------------------------------
# primitive coefficients of full-rank indices via local densities
# ---------------------------------------------------------------------------


def primitive_density_coeff(S, k: int) -> Fraction:
    """Primitive Eisenstein coefficient a*(S) of a full-rank index S.

    Inverts a(T) = sum_D a*(T[D^{-1}]) over sublattice shapes D by
    induction on det(2T), with every plain coefficient supplied by
    local_density_coeff; rank(S) must be within its supported range.
    """
    S = minkowski_reduce(check_form(S))
    r = len(S)
    memo: dict = {}

    def star(T) -> Fraction:
        got = memo.get(T)
        if got is not None:
            return got
        total = local_density_coeff(T, k)
        det2T = form_det(T)
        for d in divisors(det2T):
            if d == 1 or det2T % (d * d):
                continue
            for D in _hnf_matrices(r, d):
                T2 = _transform_by_inverse(T, D)
                if T2 is not None:
                    total -= star(minkowski_reduce(T2))
        memo[T] = total
        return total

    return star(S)


@dataclass(frozen=True)
class DirectLadder:
    """Residue ladder of primitive rank-2k coefficients a*_{k_j(m)}(S)."""

    target: WeightTarget
    S: tuple
    weights: tuple
    values: tuple
    certificates: tuple
    residues: tuple  # per rung: (residue, exponent) mod p^{b(m)+2}

    def to_doc(self) -> dict:
        return {
            "p": self.target.p,
            "k": self.target.k,
            "j": self.target.j,
            "twoS": [list(row) for row in self.S],
            "weights": list(self.weights),
            "values": [
                {"num": str(v.numerator), "den": str(v.denominator)}
                for v in self.values
            ],
            "certificates": list(self.certificates),
            "residues": [{"residue": r, "mod_exponent": c} for r, c in self.residues],
        }


def direct_limit_coefficient(S, target: WeightTarget, seq=None) -> DirectLadder:
    """Ladder of a*_{k_j(m)}(S) for a rank-2k index S.

    The limit of this ladder is the genus coefficient that fit_and_verify
    recovers by fitting; a lattice whose level does not divide p, or whose
    character differs from chi_p^j, must ladder to 0.
    """
    S = minkowski_reduce(check_form(S))
    if len(S) != 2 * target.k:
        raise ValueError("S must have rank 2k")
    if seq is None:
        seq = default_sequence(target, 2)
    p = target.p
    weights = tuple(weight_at(seq, m) for m in range(1, len(seq) + 1))
    values = tuple(primitive_density_coeff(S, k) for k in weights)
    caps = [b + 2 for b in seq.b_schedule]
    certs = tuple(
        _capped_val(b - a, p, caps[i])
        for i, (a, b) in enumerate(zip(values, values[1:]))
    )
    residues = tuple(
        (_residue(v, p, c), c) for v, c in zip(values, caps)
    )
    return DirectLadder(target, S, weights, values, certs, residues)


# ---------------------------------------------------------------------------
# fit the genus coefficients, verify the congruence on held-out indices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitRung:
    m: int
    b: int
    weight: int
    c: int
    a_tilde: tuple  # residues mod p^c of the scaled coefficients
    residual_exponent: int
    witness: tuple | None
    u_p_exponent: int
    coherence_exponent: int | None
    audit: SingularRankAudit
    passed: bool

    def to_doc(self) -> dict:
        return {
            "m": self.m,
            "b": self.b,
            "weight": self.weight,
            "precision": self.c,
            "a_tilde": list(self.a_tilde),
            "residual_exponent": self.residual_exponent,
            "witness": None
            if self.witness is None
            else [list(row) for row in self.witness],
            "u_p_exponent": self.u_p_exponent,
            "coherence_exponent": self.coherence_exponent,
            "audit": self.audit.to_doc(),
            "passed": self.passed,
        }


@dataclass(frozen=True)
class VerificationReport:
    mode: str
    target: WeightTarget
    degree: int
    trace_bound: int
    b_schedule: tuple
    genera: tuple
    train: tuple
    nu_hat: int
    rungs: tuple
    passed: bool

    def __bool__(self):
        return self.passed

    def to_doc(self) -> dict:
        return {
            "mode": self.mode,
            "p": self.target.p,
            "k": self.target.k,
            "j": self.target.j,
            "degree": self.degree,
            "trace_bound": self.trace_bound,
            "b_schedule": list(self.b_schedule),
            "dictionary": genera_to_doc(2 * self.target.k, self.target.p, self.genera)[
                "genera"
            ],
            "train_indices": [[list(row) for row in T] for T in self.train],
            "nu_hat": self.nu_hat,
            "rungs": [r.to_doc() for r in self.rungs],
            "passed": self.passed,
        }


def _validate_dictionary(genera, target: WeightTarget):
    """Recompute every cached invariant of the genus dictionary."""
    for g in genera:
        mass = Fraction(0)
        for rec in g.classes:
            M = check_form(rec.rep)
            if minkowski_reduce(M) != as_mat(rec.rep):
                raise PipelineError("fit", "genus dictionary rep not canonical")
            lev = level(M)
            if target.p % lev:
                raise PipelineError(
                    "fit", f"dictionary lattice has level {lev}, not dividing p"
                )
            if lev != g.level:
                raise PipelineError("fit", "cached level disagrees with the rep")
            if eta_S(M) != g.character:
                raise PipelineError("fit", "cached character disagrees with the rep")
            eps = automorphism_count(M)
            if eps != rec.epsilon:
                raise PipelineError(
                    "fit",
                    f"cached automorphism count {rec.epsilon} is wrong (got {eps})",
                )
            mass += Fraction(1, eps)
        if mass != g.mass:
            raise PipelineError("fit", "cached mass disagrees with the classes")


def _select_training(indices, columns, n_unknowns, p):
    """Greedy smallest-trace subset whose rows are independent mod p."""
    basis = []  # reduced rows over F_p, with pivot positions
    train = []
    for T in indices:
        row = [c.get(T, Fraction(0)) for c in columns]
        try:
            red = [_residue(x, p, 1) for x in row]
        except ValueError:
            continue  # non p-unit denominators cannot pivot
        for piv, brow in basis:
            if red[piv]:
                f = red[piv] * pow(brow[piv], -1, p) % p
                red = [(x - f * y) % p for x, y in zip(red, brow)]
        piv = next((i for i, x in enumerate(red) if x), None)
        if piv is None:
            continue
        basis.append((piv, red))
        train.append(T)
        if len(train) == n_unknowns:
            return train
    raise PipelineError(
        "fit",
        "training system is singular mod p: the window has too few "
        "independent indices for the genus dictionary; enlarge the window",
    )


def _solve_mod(rows, rhs, p, c):
    """Solve a square system with a mod-p invertible matrix over Z/p^c."""
    P = p**c
    n = len(rows)
    A = [[_residue(x, p, c) for x in row] + [_residue(b, p, c)] for row, b in zip(rows, rhs)]
    for i in range(n):
        piv = next(r for r in range(i, n) if A[r][i] % p)
        A[i], A[piv] = A[piv], A[i]
        inv = pow(A[i][i], -1, P)
        A[i] = [x * inv % P for x in A[i]]
        for r in range(n):
            if r != i and A[r][i]:
                f = A[r][i]
                A[r] = [(x - f * y) % P for x, y in zip(A[r], A[i])]
    return tuple(A[i][n] for i in range(n))


def fit_and_verify(
    target: WeightTarget,
    n: int,
    B: int,
    m_max: int = 2,
    b_schedule=None,
    exploratory: bool = False,
    cache_dir=None,
    source=None,
) -> VerificationReport:
    """Fit genus coefficients at every rung and verify the congruence.

    For each m the Eisenstein window of weight k_j(m) is matched against
    the dictionary of weighted genus theta series (rank 2k, level
    dividing p, character chi_p^j).  Coefficients are solved for on the
    smallest-trace unisolvent training indices over Z/p^{b(m)+2} and the
    congruence is then measured on every held-out index; a rung passes
    when the worst held-out exponent reaches b(m) and the coefficients
    are coherent with the previous rung.
    """
    if source is None:
        source = eisenstein_qexp
    seq = (
        WeightSequence(target, tuple(b_schedule))
        if b_schedule is not None
        else default_sequence(target, m_max)
    )
    mode = "theorem" if target.in_theorem_range() else "exploratory"
    if mode == "exploratory" and not exploratory:
        raise PipelineError(
            "weights",
            f"p = {target.p} is not above 2k+1 = {2 * target.k + 1}; "
            "pass exploratory=True to run outside the proven range",
        )
    p = target.p
    genera = _dictionary(target, cache_dir)
    if not genera:
        raise PipelineError(
            "genera",
            f"no even lattices of rank {2 * target.k} with level dividing "
            f"{p} and the requested character",
        )
    _validate_dictionary(genera, target)

    try:
        thetas = [genus_theta(g, n, B)[1] for g in genera]  # unnormalized sums
    except Exception as exc:
        raise PipelineError("theta", str(exc)) from exc
    columns = [F.coeffs for F in thetas]

    weights = tuple(weight_at(seq, m) for m in range(1, len(seq) + 1))
    try:
        windows = [source(k_m, n, B) for k_m in weights]
    except Exception as exc:
        raise PipelineError("fit", f"coefficient source failed: {exc}") from exc
    # one scaling for the whole ladder, so rungs stay comparable; windows
    # and dictionary are cleared separately or the training pivots would
    # stop being p-units
    nu_w = min(
        [0]
        + [
            v_p(a, p)
            for F in windows
            for a in F.coeffs.values()
            if v_p(a, p) < 0
        ]
    )
    nu_c = min(
        [0] + [v_p(a, p) for col in columns for a in col.values() if v_p(a, p) < 0]
    )
    nu_hat = min(nu_w, nu_c)
    if nu_w:
        windows = [qexp_scale(F, Fraction(p) ** (-nu_w)) for F in windows]
    if nu_c:
        thetas = [qexp_scale(F, Fraction(p) ** (-nu_c)) for F in thetas]
        columns = [F.coeffs for F in thetas]

    rungs = []
    prev = None
    for m in range(1, len(seq) + 1):
        b = seq.b_schedule[m - 1]
        c = b + 2
        k_m = weights[m - 1]
        Es = windows[m - 1]
        indices = sorted(
            set(Es.coeffs) | {T for col in columns for T in col},
            key=lambda T: (form_trace(T), T),
        )
        if m == 1:
            train = _select_training(indices, columns, len(genera), p)
        a_tilde = _solve_mod(
            [[col.get(T, Fraction(0)) for col in columns] for T in train],
            [Es.coeffs.get(T, Fraction(0)) for T in train],
            p,
            c,
        )
        fitted = qexp_add(
            *[qexp_scale(F, lift) for F, lift in zip(thetas, a_tilde)]
        )
        worst, witness = c, None
        for T in indices:
            if T in train:
                continue
            r = Es.coeffs.get(T, Fraction(0)) - fitted.coeffs.get(T, Fraction(0))
            val = _capped_val(r, p, c)
            if val < worst:
                worst, witness = val, T
        u = u_p(fitted, p)
        u_exp = c
        for T in set(u.coeffs) | {
            T for T in fitted.coeffs if form_trace(T) <= u.trace_bound
        }:
            d = u.coeffs.get(T, Fraction(0)) - fitted.coeffs.get(T, Fraction(0))
            u_exp = min(u_exp, _capped_val(d, p, c))
        if prev is None:
            coh = None
            coherent = True
        else:
            prev_vals, prev_c = prev
            coh = min(
                _capped_val(Fraction(x - y), p, prev_c)
                for x, y in zip(a_tilde, prev_vals)
            )
            coherent = coh >= seq.b_schedule[m - 2]
        audit = singular_rank_audit(Es, k_m, p, 1)
        passed = worst >= b and coherent and audit.ok
        rungs.append(
            FitRung(
                m=m,
                b=b,
                weight=k_m,
                c=c,
                a_tilde=a_tilde,
                residual_exponent=worst,
                witness=witness,
                u_p_exponent=u_exp,
                coherence_exponent=coh,
                audit=audit,
                passed=passed,
            )
        )
        prev = (a_tilde, c)
    return VerificationReport(
        mode=mode,
        target=target,
        degree=n,
        trace_bound=B,
        b_schedule=seq.b_schedule,
        genera=tuple(genera),
        train=tuple(train),
        nu_hat=nu_hat,
        rungs=tuple(rungs),
        passed=all(r.passed for r in rungs),
    )


_DICT_CACHE: dict = {}


def _dictionary(target: WeightTarget, cache_dir=None):
    """Genera of rank 2k, level dividing p, character chi_p^j."""
    key = (2 * target.k, target.p, cache_dir)
    if key not in _DICT_CACHE:
        try:
            genera = cached_genera(2 * target.k, target.p, cache_dir)
        except Exception as exc:
            raise PipelineError("genera", str(exc)) from exc
        _DICT_CACHE[key] = genera
    want = target.character
    return [g for g in _DICT_CACHE[key] if g.character == want]
