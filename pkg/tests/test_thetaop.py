import random
from fractions import Fraction

import pytest

from thetakernel import bqf, qexp, thetaop
from thetakernel.lattice import GramMatrix, a_root_lattice

A2 = GramMatrix(((2, 1), (1, 2)))


def _theta_pair(p, bound=12):
    reps = bqf.gl_class_representatives(-p)
    return reps, [qexp.theta_expansion(c.even_gram(), 2, bound) for c in reps]


def test_rank1_operator_on_degree1_multiplies_by_the_index():
    f = qexp.theta_expansion(A2, 1, 8)
    op = thetaop.theta_operator(f, 1)
    for (m,), value in f.coeffs.items():
        assert op.coeffs[(m,)] == ((Fraction(m, 2) * value,),)
    assert op.coeffs[(0,)] == ((Fraction(0),),)


def test_operator_kills_the_zero_index():
    f = qexp.theta_expansion(A2, 2, 6)
    for r in (1, 2):
        op = thetaop.theta_operator(f, r)
        zero = op.coeffs[(0, 0, 0)]
        assert all(x == 0 for row in zero for x in row)


def test_rank2_coefficient_at_the_class_index():
    reps, thetas = _theta_pair(23)
    op = thetaop.theta_operator(thetas[0], 2)
    key = qexp.key_for_index(reps[0].half_matrix())
    assert op.coeffs[key] == ((Fraction(23),),)  # det(T) * 4 = (23/4) * 4


def test_operator_requires_plain_series():
    m = qexp.mixed_theta(A2, 1, 1, 5)
    with pytest.raises(ValueError):
        thetaop.theta_operator(m, 1)
    f = qexp.theta_expansion(A2, 2, 4)
    with pytest.raises(ValueError):
        thetaop.theta_operator(f, 3)


def test_operator_is_linear():
    rng = random.Random(8)
    _, thetas = _theta_pair(23, bound=8)
    f, g = thetas[0], thetas[1]
    for _ in range(5):
        alpha, beta = Fraction(rng.randint(-9, 9)), Fraction(rng.randint(-9, 9))
        combo = qexp.linear_combination([alpha, beta], [f, g])
        lhs = thetaop.theta_operator(combo, 1)
        op_f = thetaop.theta_operator(f, 1)
        op_g = thetaop.theta_operator(g, 1)
        zero = ((Fraction(0),) * 2,) * 2
        for key in set(op_f.coeffs) | set(op_g.coeffs):
            a = op_f.coeffs.get(key, zero)
            b = op_g.coeffs.get(key, zero)
            want = tuple(
                tuple(alpha * a[i][j] + beta * b[i][j] for j in range(2))
                for i in range(2)
            )
            got = lhs.coeffs.get(key, zero)
            assert got == want


def test_product_rule_degree1():
    f = qexp.theta_expansion(A2, 1, 8)
    g = qexp.theta_expansion(a_root_lattice(5).gram, 1, 8)

    def ramanujan(h):
        return {
            k: Fraction(k[0], 2) * v for k, v in h.coeffs.items() if k[0]
        }

    product = qexp.multiply_degree1(f, g)
    lhs = ramanujan(product)
    rhs = {}
    for (a,), va in f.coeffs.items():
        for (b,), vb in g.coeffs.items():
            if a + b > 2 * product.bound or a + b == 0:
                continue
            key = (a + b,)
            contribution = Fraction(a, 2) * va * vb + va * Fraction(b, 2) * vb
            rhs[key] = rhs.get(key, Fraction(0)) + contribution
    rhs = {k: v for k, v in rhs.items() if v}
    assert lhs == rhs


def test_kernel_certificates_pass_and_fail():
    for p in (23, 31, 47):
        reps, thetas = _theta_pair(p)
        for cls, f in zip(reps, thetas):
            top = thetaop.kernel_check(f, 2, p)
            assert top.passed and top.nonzero_mod_p
            low = thetaop.kernel_check(f, 1, p)
            assert not low.passed and low.nonzero_mod_p
            assert low.witness is not None


def test_kernel_on_det_series():
    for p in (23, 31, 47):
        reps = bqf.gl_class_representatives(-p)
        for cls in reps:
            f = qexp.theta_det_expansion(cls.even_gram(), 2, 12)
            cert = thetaop.kernel_check(f, 2, p)
            if cls.ambiguous:
                assert not cert.passed and not cert.nonzero_mod_p
            else:
                assert cert.passed


def test_kernel_witness_is_canonical_first_failure():
    reps, thetas = _theta_pair(23)
    low = thetaop.kernel_check(thetas[1], 1, 23)
    # first failing index in (trace, lex) order: diag(0, 2) with value 2
    assert low.witness["index_2T"] == [[0, 0], [0, 4]]
    assert low.witness["value"] == "4/1"


def test_leading_coefficient_pins_the_intended_witness():
    for p in (23, 31, 47):
        reps = bqf.gl_class_representatives(-p)
        for cls in reps:
            assert thetaop.leading_coefficient_check(cls.half_matrix(), 1, p, 12)
            assert thetaop.leading_coefficient_check(cls.half_matrix(), 2, p, 12)


def test_dilated_series_passes_all_ranks():
    reps, thetas = _theta_pair(23, bound=6)
    dil = qexp.dilate(thetas[0], 23)
    assert thetaop.kernel_check(dil, 1, 23).passed
    assert thetaop.kernel_check(dil, 2, 23).passed
    assert thetaop.kernel_monotonicity_check(dil, 1, 23)


def test_monotonicity():
    reps, thetas = _theta_pair(23)
    # passes at 2 (nothing above to check), fails at 1: no violation
    assert thetaop.kernel_monotonicity_check(thetas[0], 2, 23)
    assert thetaop.kernel_monotonicity_check(thetas[0], 1, 23)


def test_fail_witness_persists_at_larger_bound():
    reps = bqf.gl_class_representatives(-23)
    small = qexp.theta_expansion(reps[1].even_gram(), 2, 8)
    large = qexp.theta_expansion(reps[1].even_gram(), 2, 16)
    w_small = thetaop.kernel_check(small, 1, 23).witness
    w_large = thetaop.kernel_check(large, 1, 23).witness
    assert w_small == w_large


def test_kernel_check_on_zero_series():
    zero = qexp.QExpansion(degree=2, bound=6)
    cert = thetaop.kernel_check(zero, 1, 23)
    assert not cert.passed and not cert.nonzero_mod_p and cert.witness is None


def test_certificate_serialization():
    reps, thetas = _theta_pair(23, bound=8)
    cert = thetaop.kernel_check(thetas[0], 2, 23)
    doc = cert.to_json()
    assert doc["verdict"] == "pass" and doc["witness"] is None
    assert doc["r"] == 2 and doc["p"] == 23 and doc["bound"] == 8


def test_singular_rank_detection():
    reps, thetas = _theta_pair(23)
    result = thetaop.singular_rank_mod_p(thetas[0], 23, 12, 1)
    assert result.status == "not_singular"
    constant = qexp.constant_series(2, 12, 1)
    result2 = thetaop.singular_rank_mod_p(constant, 23, 12, 0)
    assert result2.status == "singular" and result2.rank == 0
    assert result2.weight_congruent
    wiped = qexp.linear_combination([23], [thetas[0]])
    result3 = thetaop.singular_rank_mod_p(wiped, 23, 12, 1)
    assert result3.status == "zero"


def test_singular_rank_weight_flag():
    # a rank-1 singular series: weight 11 has 2*11 - 1 = 21 = 0 mod 22
    f = qexp.QExpansion(
        degree=2,
        bound=6,
        coeffs={(0, 0, 0): Fraction(1), (2, 0, 0): Fraction(3)},
    )
    res = thetaop.singular_rank_mod_p(f, 23, 6, 11)
    assert res.status == "singular" and res.rank == 1 and res.weight_congruent
    res2 = thetaop.singular_rank_mod_p(f, 23, 6, 5)
    assert res2.status == "singular" and not res2.weight_congruent
