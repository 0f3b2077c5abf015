from fractions import Fraction

import pytest

from eistheta.eisenstein import eisenstein_qexp
from eistheta.exactnum import bernoulli, sigma, v_p
from eistheta.fourier import coeff, phi_restrict


def test_degree1_weight4_classical_values():
    # E_4 = 1 + 240 q + 2160 q^2 + 6720 q^3 + 17520 q^4 + 30240 q^5 + ...
    F = eisenstein_qexp(4, 1, 5)
    assert coeff(F, ((0,),)) == 1
    expected = [240, 2160, 6720, 17520, 30240]
    for t, val in enumerate(expected, start=1):
        assert coeff(F, ((2 * t,),)) == val


def test_degree1_weight6_classical_values():
    # E_6 = 1 - 504 q - 16632 q^2 - ...
    F = eisenstein_qexp(6, 1, 2)
    assert coeff(F, ((2,),)) == -504
    assert coeff(F, ((4,),)) == -16632


def test_degree1_matches_divisor_sum_formula():
    for k in (4, 6, 8, 44):
        F = eisenstein_qexp(k, 1, 6)
        c = Fraction(-2 * k) / bernoulli(k)
        for t in range(1, 7):
            assert coeff(F, ((2 * t,),)) == c * sigma(k - 1, t)


def test_degree2_constant_term():
    F = eisenstein_qexp(4, 2, 2)
    assert coeff(F, ((0, 0), (0, 0))) == 1


def test_degree2_weight4_rank2_anchors():
    # det(2T) = 3, 4, 7, 8 at content 1; the values are 240 times the
    # coefficients 56, 126, 576, 756 of the weight-4 index-1 Jacobi
    # Eisenstein series (Eichler-Zagier tables).
    F = eisenstein_qexp(4, 2, 3)
    assert coeff(F, ((2, -1), (-1, 2))) == 13440
    assert coeff(F, ((2, 0), (0, 2))) == 30240
    assert coeff(F, ((2, -1), (-1, 4))) == 138240
    assert coeff(F, ((2, 0), (0, 4))) == 181440


def test_degree2_content_two_index():
    # T = 2*I: divisor sum over d | 2 with H(3, 16) = -33/2 and H(3, 4) = -1/2,
    # scale 2/(zeta(-3) zeta(-5)) = -60480, so -60480*(-33/2 - 8*1/2) = 1239840.
    F = eisenstein_qexp(4, 2, 4)
    assert coeff(F, ((4, 0), (0, 4))) == 1239840


def test_degree2_rank1_reduces_to_degree1():
    for k in (4, 6, 44):
        F2 = eisenstein_qexp(k, 2, 4)
        F1 = eisenstein_qexp(k, 1, 4)
        assert phi_restrict(F2) == F1
        # content-2 rank-1 index carries the sigma value of its content
        assert coeff(F2, ((4, 0), (0, 0))) == coeff(F1, ((4,),))


def test_class_invariance_of_lookup():
    F = eisenstein_qexp(4, 2, 3)
    # ((2,1),(1,2)) is equivalent to the stored representative ((2,-1),(-1,2))
    assert coeff(F, ((2, 1), (1, 2))) == 13440


def test_coefficients_p_integral_for_large_p():
    for k, n in ((4, 1), (6, 1), (4, 2), (6, 2)):
        F = eisenstein_qexp(k, n, 4)
        for val in F.coeffs.values():
            for p in (7, 11, 13):
                if p > k:
                    assert v_p(val, p) >= 0


def test_large_weight_degree2_runs():
    F = eisenstein_qexp(296, 2, 2)
    assert coeff(F, ((0, 0), (0, 0))) == 1
    assert coeff(F, ((2, 0), (0, 0))) == Fraction(-2 * 296) / bernoulli(296)


def test_rejects_bad_weight_or_degree():
    with pytest.raises(ValueError):
        eisenstein_qexp(5, 1, 3)
    with pytest.raises(ValueError):
        eisenstein_qexp(2, 1, 3)
    with pytest.raises(ValueError):
        eisenstein_qexp(2, 2, 3)
    with pytest.raises(ValueError):
        eisenstein_qexp(4, 3, 3)
    with pytest.raises(ValueError):
        eisenstein_qexp(4, 1, -1)
