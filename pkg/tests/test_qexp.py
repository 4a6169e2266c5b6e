import json
import random
from fractions import Fraction
from itertools import product
from math import isqrt

import pytest

from thetakernel import bqf, qexp
from thetakernel.exactmath import PadicValue
from thetakernel.lattice import (
    GramMatrix,
    a_root_lattice,
    automorphisms,
    direct_sum,
    enumerate_vectors,
    invert_exact,
    p_special_lattice,
)

A2 = GramMatrix(((2, 1), (1, 2)))
E8 = GramMatrix(
    (
        (2, -1, 0, 0, 0, 0, 0, 0),
        (-1, 2, -1, 0, 0, 0, 0, 0),
        (0, -1, 2, -1, 0, 0, 0, 0),
        (0, 0, -1, 2, -1, 0, 0, 0),
        (0, 0, 0, -1, 2, -1, 0, -1),
        (0, 0, 0, 0, -1, 2, -1, 0),
        (0, 0, 0, 0, 0, -1, 2, 0),
        (0, 0, 0, 0, -1, 0, 0, 2),
    )
)


def _column_box(gram, cap):
    inv = invert_exact(gram.entries)
    n = gram.size
    caps = []
    for i in range(n):
        f = Fraction(cap) * inv[i][i]
        caps.append(isqrt(f.numerator * f.denominator) // f.denominator)
    return [
        x
        for x in product(*[range(-c, c + 1) for c in caps])
        if gram.norm(x) <= cap
    ]


def _theta_bruteforce(gram, degree, bound, weighted=False):
    """Independent oracle: assemble X column by column from a box."""
    cap = 2 * bound
    columns = _column_box(gram, cap)
    coeffs = {}
    for cols in product(columns, repeat=degree):
        if sum(gram.norm(c) for c in cols) > cap:
            continue
        rows = [[0] * degree for _ in range(degree)]
        for i in range(degree):
            for j in range(degree):
                rows[i][j] = gram.inner(cols[i], cols[j])
        key = qexp.key_from_rows(rows)
        if weighted:
            det = cols[0][0] * cols[1][1] - cols[0][1] * cols[1][0]
            coeffs[key] = coeffs.get(key, 0) + det
        else:
            coeffs[key] = coeffs.get(key, 0) + 1
    return {k: Fraction(v) for k, v in coeffs.items() if v}


def test_theta_degree1_examples():
    f = qexp.theta_expansion(A2, 1, 10)
    assert f.coefficient((0,)) == 1
    assert f.coefficient((2,)) == 6  # the six root vectors
    # partial sums agree with raw vector counts
    assert sum(f.coeffs.values()) == len(enumerate_vectors(A2, 20))


def test_theta_degree1_e8_matches_vector_counts():
    f = qexp.theta_expansion(E8, 1, 4)
    by_norm = {}
    for v in enumerate_vectors(E8, 8):
        key = (E8.norm(v),)
        by_norm[key] = by_norm.get(key, 0) + 1
    assert {k: int(v) for k, v in f.coeffs.items()} == by_norm
    assert f.coefficient((2,)) == 240


def test_theta_degree2_matches_bruteforce():
    for cls in (bqf.reduce(1, 1, 6)[0], bqf.reduce(2, 1, 3)[0]):
        gram = cls.even_gram()
        mine = qexp.theta_expansion(gram, 2, 6).coeffs
        oracle = _theta_bruteforce(gram, 2, 6)
        assert mine == oracle
    mine3 = qexp.theta_expansion(A2, 3, 3).coeffs
    oracle3 = _theta_bruteforce(A2, 3, 3)
    assert mine3 == oracle3


def test_theta_det_matches_bruteforce():
    gram = bqf.reduce(2, 1, 3)[0].even_gram()
    mine = qexp.theta_det_expansion(gram, 2, 6).coeffs
    oracle = _theta_bruteforce(gram, 2, 6, weighted=True)
    assert mine == oracle


def test_coefficient_table_at_class_indices():
    reps = bqf.gl_class_representatives(-23)
    thetas = [qexp.theta_expansion(c.even_gram(), 2, 12) for c in reps]
    values = [
        [t.coefficient_at(c.half_matrix()) for c in reps] for t in thetas
    ]
    assert values == [[4, 0], [0, 2]]
    # the GL-partner carries the same theta series
    plain = bqf.class_representatives(-23)
    assert (
        qexp.theta_expansion(plain[1].even_gram(), 2, 8).coeffs
        == qexp.theta_expansion(plain[2].even_gram(), 2, 8).coeffs
    )


def test_theta_det_vanishing_criterion():
    # improper automorphism forces the det-weighted series to vanish
    square = GramMatrix(((2, 0), (0, 2)))
    assert automorphisms(square).has_improper
    assert qexp.theta_det_expansion(square, 2, 8).is_zero()
    ambiguous = bqf.reduce(1, 1, 6)[0].even_gram()
    assert qexp.theta_det_expansion(ambiguous, 2, 10).is_zero()
    generic = bqf.reduce(2, 1, 3)[0]
    series = qexp.theta_det_expansion(generic.even_gram(), 2, 10)
    assert not series.is_zero()
    assert series.coefficient((0, 0, 0)) == 0
    assert series.coefficient_at(generic.half_matrix()) == 2
    # reflecting the form negates the series
    partner = bqf.reduce(2, -1, 3)[0]
    reflected = qexp.theta_det_expansion(partner.even_gram(), 2, 10)
    assert reflected.coeffs == {k: -v for k, v in series.coeffs.items()}


def test_theta_coefficients_are_class_functions():
    rng = random.Random(4)
    f = qexp.theta_expansion(bqf.reduce(1, 1, 6)[0].even_gram(), 2, 14)
    keys = [k for k in f.coeffs if qexp.key_diagonal_sum(k, 2) <= 10]
    for _ in range(30):
        key = rng.choice(keys)
        rows = qexp.rows_from_key(key, 2)
        # a random small unimodular substitution on the index
        c = rng.randint(-1, 1)
        u = ((1, c), (0, 1)) if rng.random() < 0.5 else ((1, 0), (c, 1))
        transformed = [
            [
                sum(u[k][i] * rows[k][l] * u[l][j] for k in range(2) for l in range(2))
                for j in range(2)
            ]
            for i in range(2)
        ]
        new_key = qexp.key_from_rows(transformed)
        if qexp.key_diagonal_sum(new_key, 2) <= 2 * f.bound:
            assert f.coefficient(new_key) == f.coefficient(key), (key, u)


def test_mixed_theta_examples():
    assert qexp.mixed_theta(A2, 1, 0, 5).coeffs == qexp.theta_expansion(A2, 1, 5).coeffs
    m = qexp.mixed_theta(A2, 1, 1, 5)
    assert m.denominator == 3
    assert m.coefficient((0,)) == 1
    # six dual vectors of norm 2/3: index 1/3, key 2*3*(1/3) = 2
    assert m.coefficient((2,)) == 6
    two = qexp.mixed_theta(A2, 2, 1, 4)
    assert two.coefficient((0, 0, 0)) == 1
    with pytest.raises(ValueError):
        qexp.mixed_theta(A2, 1, 2, 5)
    with pytest.raises(ValueError):
        qexp.mixed_theta(E8, 1, 1, 5)  # level 1 is not an odd prime
    with pytest.raises(ValueError):
        qexp.mixed_theta(GramMatrix(((2, 0), (0, 2))), 1, 1, 5)  # level 4


def test_mixed_theta_dual_counts_match_dual_lattice():
    # the dual block of the mixed series counts dual vectors by norm
    m = qexp.mixed_theta(A2, 1, 1, 4)
    dual_gram_rows = tuple(
        tuple(int(3 * x) for x in row) for row in invert_exact(A2.entries)
    )
    counts = {}
    for v in enumerate_vectors(GramMatrix(dual_gram_rows), 24):
        norm = GramMatrix(dual_gram_rows).norm(v)
        counts[(norm,)] = counts.get((norm,), 0) + 1
    assert {k: int(v) for k, v in m.coeffs.items()} == counts


def test_slash_cusp_prefactors():
    s0 = qexp.slash_cusp(bqf.reduce(1, 1, 6)[0].even_gram(), 2, 0, 6)
    assert s0.prefactor == PadicValue.zero()
    # det p^2 with prime level: two orthogonal det-7 planes
    plane = bqf.reduce(1, 1, 2)[0].even_gram()
    block = direct_sum(plane, plane)
    sc = qexp.slash_cusp(block, 1, 1, 4)
    assert sc.prefactor == PadicValue(-2)  # exponent -j at j = 1
    assert sc.gamma is None  # square determinant keeps the unit tag trivial
    # odd determinant exponent gives a half-integer prefactor
    l1 = p_special_lattice(5, 3)
    sc2 = qexp.slash_cusp(l1.gram, 1, 1, 4)
    assert sc2.prefactor == PadicValue(-3)
    assert sc2.prefactor.halves % 2 == 1
    assert sc2.gamma is not None


def test_linear_combination_identities():
    f = qexp.theta_expansion(A2, 2, 6)
    g = qexp.theta_expansion(bqf.reduce(1, 1, 6)[0].even_gram(), 2, 8)
    assert qexp.linear_combination([1, 0], [f, g]).coeffs == qexp.truncate(f, 6).coeffs
    assert qexp.linear_combination([1, -1], [f, f]).is_zero()
    reps = bqf.gl_class_representatives(-23)
    t0 = qexp.theta_expansion(reps[0].even_gram(), 2, 8)
    t1 = qexp.theta_expansion(reps[1].even_gram(), 2, 8)
    combo = qexp.linear_combination([12, -12], [t0, t1])
    assert combo.coefficient_at(reps[0].half_matrix()) == 48


def test_linear_combination_shape_errors():
    f = qexp.theta_expansion(A2, 1, 5)
    g = qexp.theta_expansion(A2, 2, 5)
    with pytest.raises(ValueError):
        qexp.linear_combination([1, 1], [f, g])
    m = qexp.mixed_theta(A2, 1, 1, 5)
    with pytest.raises(ValueError):
        qexp.linear_combination([1, 1], [f, m])  # denominators differ


def test_reduce_mod_p_examples():
    a4 = a_root_lattice(5).gram
    reduced = qexp.reduce_mod_p(qexp.theta_expansion(a4, 1, 50), 5)
    assert reduced.coeffs == {(0,): Fraction(1)}
    f = qexp.theta_expansion(A2, 2, 6)
    scaled = qexp.linear_combination([7], [f])
    assert qexp.reduce_mod_p(scaled, 7).is_zero()
    reps = bqf.gl_class_representatives(-23)
    t0 = qexp.reduce_mod_p(qexp.theta_expansion(reps[0].even_gram(), 2, 12), 23)
    assert t0.coefficient_at(reps[0].half_matrix()) == 4


def test_reduce_mod_p_rejects_denominators():
    f = qexp.QExpansion(degree=1, bound=2, coeffs={(2,): Fraction(1, 5)})
    with pytest.raises(ValueError):
        qexp.reduce_mod_p(f, 5)


def test_dilate():
    f = qexp.theta_expansion(A2, 2, 6)
    d = qexp.dilate(f, 5)
    assert d.bound == 30
    assert d.coefficient((0, 0, 0)) == 1
    for key in d.coeffs:
        assert all(x % 5 == 0 for x in key)
    assert qexp.dilate(f, 5, bound=7).bound == 7


def test_dilate_and_reduce_commute():
    f = qexp.theta_expansion(A2, 2, 6)
    lhs = qexp.dilate(qexp.reduce_mod_p(f, 5), 5)
    rhs = qexp.reduce_mod_p(qexp.dilate(f, 5), 5)
    assert lhs.coeffs == rhs.coeffs


def test_nu_p():
    reps = bqf.gl_class_representatives(-23)
    f = qexp.theta_expansion(reps[0].even_gram(), 2, 8)
    assert qexp.nu_p(f, 23) == PadicValue.zero()
    assert qexp.nu_p(qexp.linear_combination([23], [f]), 23) == PadicValue(2)
    plane = bqf.reduce(1, 1, 2)[0].even_gram()
    block = direct_sum(plane, plane)  # det 49, level 7
    sc = qexp.slash_cusp(block, 1, 1, 4)
    assert qexp.nu_p(sc, 7) == PadicValue(-2)  # nu = -j at det p^2
    empty = qexp.QExpansion(degree=1, bound=3)
    assert qexp.nu_p(empty, 5).infinite


def test_multiply_degree1_is_commutative_and_truncates():
    f = qexp.theta_expansion(A2, 1, 6)
    g = qexp.theta_expansion(E8, 1, 4)
    fg = qexp.multiply_degree1(f, g)
    gf = qexp.multiply_degree1(g, f)
    assert fg.coeffs == gf.coeffs and fg.bound == 4
    assert fg.coefficient((0,)) == 1


def test_serialization_round_trip_and_order():
    m = qexp.mixed_theta(A2, 1, 1, 5)
    doc = qexp.expansion_to_json(m)
    assert doc["denominator"] == 3
    traces = []
    for item in doc["coeffs"]:
        entry = item["index_2T"][0][0]
        value = Fraction(entry) if isinstance(entry, str) else Fraction(entry)
        traces.append(value)
    assert traces == sorted(traces)
    back = qexp.expansion_from_json(doc)
    assert back.coeffs == m.coeffs
    assert json.dumps(doc, sort_keys=True) == json.dumps(
        qexp.expansion_to_json(qexp.mixed_theta(A2, 1, 1, 5)), sort_keys=True
    )


def test_slash_cusp_sign_enters_coefficients():
    # the rank-2 invariant at p = 3 of the hexagonal plane is -1, so the
    # cusp series is the negated mixed series
    from thetakernel.lattice import hasse_witt

    sign = hasse_witt(A2, 3)
    m = qexp.mixed_theta(A2, 1, 1, 5)
    sc = qexp.slash_cusp(A2, 1, 1, 5)
    assert sc.coeffs == {k: sign * v for k, v in m.coeffs.items()}
