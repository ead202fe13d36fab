import random
from fractions import Fraction

import pytest

from tcert.errors import BallMismatch, RadiusTooSmall, ShapeMismatch
from tcert.groups import enumerate_ball, parse_presentation
from tcert.ring import (
    GroupRingElement,
    GroupRingMatrix,
    augmentation,
    gr_add,
    gr_mul,
    gr_scale,
    gr_star,
    l1_norm,
    mat_add,
    mat_l1_norm,
    mat_mul,
    mat_scale,
    mat_star,
    parse_element,
    serialize_element,
)


def z_ball(radius):
    p = parse_presentation("gens t; backend free")
    return enumerate_ball(p, radius)


def cyclic_ball(n):
    p = parse_presentation(f"gens t; backend cyclic {n}")
    return enumerate_ball(p, "full")


def elem(ball, pairs):
    return GroupRingElement.from_pairs(
        ball, [(i, Fraction(q)) for i, q in pairs])


def one_minus_t(ball):
    t = ball.index_of(ball.presentation.backend.generator(0))
    return elem(ball, [(0, 1), (t, -1)])


def random_element(ball, rng, size=3):
    pairs = [(rng.randrange(len(ball)), Fraction(rng.randint(-4, 4), rng.randint(1, 3)))
             for _ in range(size)]
    return GroupRingElement.from_pairs(ball, pairs)


def test_add_collects_and_drops_zeros():
    ball = z_ball(1)
    a = one_minus_t(ball)
    b = gr_star(a)  # 1 - t^-1
    s = gr_add(a, b)
    assert s.coeffs[0] == 2
    assert len(s.coeffs) == 3
    assert gr_add(a, gr_scale(a, -1)).is_zero()
    half = elem(ball, [(0, Fraction(3, 2))])
    other = elem(ball, [(0, Fraction(1, 2))])
    assert gr_add(half, other) == elem(ball, [(0, 2)])


def test_add_ball_mismatch():
    with pytest.raises(BallMismatch):
        gr_add(one_minus_t(z_ball(1)), one_minus_t(z_ball(1)))


def test_mul_z_expansion():
    small = z_ball(1)
    big = z_ball(2)
    a = one_minus_t(small)
    b = gr_star(a)
    prod = gr_mul(a, b, big)
    t = big.index_of((("t",),) if False else big.presentation.backend.generator(0))
    tinv = big.inverse_index[t]
    assert prod == elem(big, [(0, 2), (t, -1), (tinv, -1)])


def test_mul_unit():
    ball = z_ball(2)
    a = elem(ball, [(1, Fraction(5, 3)), (2, -1)])
    assert gr_mul(GroupRingElement.unit(ball), a, ball) == a


def test_mul_norm_squared_cyclic():
    ball = cyclic_ball(3)
    norm = elem(ball, [(0, 1), (1, 1), (2, 1)])
    sq = gr_mul(norm, norm, ball)
    assert sq == gr_scale(norm, 3)


def test_mul_radius_guard():
    ball = z_ball(1)
    a = one_minus_t(ball)
    with pytest.raises(RadiusTooSmall):
        gr_mul(a, a, ball)


def test_star_examples():
    ball = z_ball(1)
    t = ball.index_of(ball.presentation.backend.generator(0))
    tinv = ball.inverse_index[t]
    assert gr_star(elem(ball, [(t, 2)])) == elem(ball, [(tinv, 2)])
    lap = elem(ball, [(0, 2), (t, -1), (tinv, -1)])
    assert gr_star(lap) == lap


def test_star_antiautomorphism_random():
    p = parse_presentation(
        "gens a b; rel a a; rel b b; rel a b a b a b; backend perm a=(1 2) b=(2 3)")
    ball = enumerate_ball(p, "full")
    rng = random.Random(3)
    for _ in range(20):
        a = random_element(ball, rng)
        b = random_element(ball, rng)
        lhs = gr_star(gr_mul(a, b, ball))
        rhs = gr_mul(gr_star(b), gr_star(a), ball)
        assert lhs == rhs
        assert gr_star(gr_star(a)) == a


def test_ring_axioms_random():
    ball = cyclic_ball(5)
    rng = random.Random(5)
    for _ in range(20):
        a, b, c = (random_element(ball, rng) for _ in range(3))
        assert gr_mul(gr_mul(a, b, ball), c, ball) == gr_mul(a, gr_mul(b, c, ball), ball)
        assert gr_mul(a, gr_add(b, c), ball) == gr_add(gr_mul(a, b, ball), gr_mul(a, c, ball))


def test_l1_norm():
    ball = z_ball(1)
    t = ball.index_of(ball.presentation.backend.generator(0))
    tinv = ball.inverse_index[t]
    assert l1_norm(elem(ball, [(0, 2), (t, -1), (tinv, -1)])) == 4
    assert l1_norm(GroupRingElement.zero(ball)) == 0


def test_l1_norm_properties_random():
    ball = cyclic_ball(4)
    rng = random.Random(9)
    for _ in range(20):
        a = random_element(ball, rng)
        b = random_element(ball, rng)
        assert l1_norm(gr_add(a, b)) <= l1_norm(a) + l1_norm(b)
        assert l1_norm(gr_mul(a, b, ball)) <= l1_norm(a) * l1_norm(b)
        assert l1_norm(gr_star(a)) == l1_norm(a)


def test_augmentation():
    ball = z_ball(1)
    assert augmentation(one_minus_t(ball)) == 0
    t = ball.index_of(ball.presentation.backend.generator(0))
    tinv = ball.inverse_index[t]
    assert augmentation(elem(ball, [(0, 2), (t, -1), (tinv, -1)])) == 0


def test_augmentation_multiplicative_random():
    ball = cyclic_ball(6)
    rng = random.Random(13)
    for _ in range(20):
        a = random_element(ball, rng)
        b = random_element(ball, rng)
        assert augmentation(gr_mul(a, b, ball)) == augmentation(a) * augmentation(b)
        assert augmentation(gr_star(a)) == augmentation(a)


def test_element_serialization_roundtrip():
    ball = cyclic_ball(5)
    rng = random.Random(17)
    for _ in range(10):
        a = random_element(ball, rng)
        assert parse_element(serialize_element(a), ball) == a
    assert serialize_element(GroupRingElement.zero(ball)) == "0"


# --- matrices ---------------------------------------------------------------


def random_matrix(ball, rng, rows, cols):
    return GroupRingMatrix(
        ball,
        [[random_element(ball, rng, 2) for _ in range(cols)] for _ in range(rows)],
        rows, cols)


def test_mat_identity_law():
    ball = cyclic_ball(3)
    rng = random.Random(23)
    a = random_matrix(ball, rng, 2, 2)
    eye = GroupRingMatrix.identity(ball, 2)
    assert mat_mul(eye, a, ball) == a
    assert mat_mul(a, eye, ball) == a


def test_mat_star_involution():
    ball = cyclic_ball(3)
    rng = random.Random(29)
    a = random_matrix(ball, rng, 2, 3)
    assert mat_star(mat_star(a)) == a


def test_mat_product_star_rule():
    ball = cyclic_ball(3)
    rng = random.Random(31)
    for _ in range(10):
        a = random_matrix(ball, rng, 2, 2)
        b = random_matrix(ball, rng, 2, 2)
        assert mat_star(mat_mul(a, b, ball)) == mat_mul(mat_star(b), mat_star(a), ball)


def test_mat_product_star_rule_noncommutative():
    p = parse_presentation(
        "gens a b; rel a a; rel b b; rel a b a b a b; backend perm a=(1 2) b=(2 3)")
    ball = enumerate_ball(p, "full")
    rng = random.Random(37)
    for _ in range(10):
        a = random_matrix(ball, rng, 2, 2)
        b = random_matrix(ball, rng, 2, 2)
        assert mat_star(mat_mul(a, b, ball)) == mat_mul(mat_star(b), mat_star(a), ball)
        c = random_matrix(ball, rng, 2, 2)
        assert mat_mul(mat_mul(a, b, ball), c, ball) == mat_mul(a, mat_mul(b, c, ball), ball)


def test_mat_shape_mismatch():
    ball = cyclic_ball(3)
    rng = random.Random(41)
    a = random_matrix(ball, rng, 2, 3)
    b = random_matrix(ball, rng, 2, 3)
    with pytest.raises(ShapeMismatch):
        mat_mul(a, b, ball)
    with pytest.raises(ShapeMismatch):
        mat_add(a, mat_star(b))


def test_mat_l1_norm():
    ball = z_ball(2)
    a = one_minus_t(ball)
    m = GroupRingMatrix(ball, [[a, gr_scale(a, 2)], [GroupRingElement.zero(ball), a]])
    assert mat_l1_norm(m) == 6  # first row: 2 + 4


def test_mat_scale_distributes():
    ball = cyclic_ball(4)
    rng = random.Random(43)
    a = random_matrix(ball, rng, 2, 2)
    twice = mat_scale(a, 2)
    assert mat_add(a, a) == twice


def test_zero_dimension_matrices():
    ball = cyclic_ball(3)
    wide = GroupRingMatrix.zero(ball, 1, 0)
    tall = GroupRingMatrix.zero(ball, 0, 1)
    prod = mat_mul(wide, tall, ball)
    assert (prod.rows, prod.cols) == (1, 1)
    assert prod.is_zero()
