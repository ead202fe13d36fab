import random

import pytest

from tcert.errors import (
    BackendRelatorViolation,
    BallBudgetExceeded,
    RadiusTooSmall,
    UndeclaredGenerator,
    UnreducedRelator,
)
from tcert.groups import (
    enumerate_ball,
    eval_word,
    parse_presentation,
    product_index,
    word_from_text,
)

Z2_TEXT = "gens a b; rel a b a^-1 b^-1; backend free-abelian"
S3_TEXT = "gens a b; rel a a; rel b b; rel a b a b a b; backend perm a=(1 2) b=(2 3)"


def test_parse_free_abelian():
    p = parse_presentation(Z2_TEXT)
    assert p.generators == ("a", "b")
    assert len(p.relators) == 1
    assert p.backend.name == "free-abelian"


def test_parse_cyclic_implicit_relator():
    p = parse_presentation("gens t; backend cyclic 3")
    assert len(p.relators) == 1
    assert p.relators[0].letters == ((0, 1),) * 3


def test_parse_undeclared_generator():
    with pytest.raises(UndeclaredGenerator):
        parse_presentation("gens a; rel b")


def test_parse_rejects_unreduced_relator():
    with pytest.raises(UnreducedRelator):
        parse_presentation("gens a b; rel a b b^-1 a")


def test_parse_backend_relator_violation():
    # (1 2) and (2 3) do not commute
    with pytest.raises(BackendRelatorViolation):
        parse_presentation("gens a b; rel a b a^-1 b^-1; backend perm a=(1 2) b=(2 3)")


def test_parse_free_backend_rejects_relators():
    with pytest.raises(BackendRelatorViolation):
        parse_presentation("gens a; rel a a; backend free")


def test_parse_comments_and_lines():
    p = parse_presentation("# a comment\ngens t  # trailing\nbackend cyclic 4\n")
    assert p.backend.n == 4


def test_eval_word_cyclic():
    p = parse_presentation("gens t; backend cyclic 3")
    w = word_from_text("t^4", p.generators)
    assert eval_word(p, w) == eval_word(p, word_from_text("t", p.generators))


def test_eval_word_free_reduction():
    p = parse_presentation("gens a b; backend free")
    w = word_from_text("a b b^-1", p.generators)
    assert eval_word(p, w) == eval_word(p, word_from_text("a", p.generators))


def test_eval_word_s3_product_of_transpositions():
    p = parse_presentation(S3_TEXT)
    ab3 = word_from_text("a b a b a b", p.generators)
    assert eval_word(p, ab3) == p.backend.identity()


def test_ball_cyclic_3():
    p = parse_presentation("gens t; backend cyclic 3")
    ball = enumerate_ball(p, 1)
    assert len(ball) == 3
    assert ball.word_length == [0, 1, 1]


def test_ball_z_radius_2():
    p = parse_presentation("gens t; backend free")
    ball = enumerate_ball(p, 2)
    assert len(ball) == 5
    assert ball.elements[0] == ()
    assert sorted(ball.word_length) == [0, 1, 1, 2, 2]


def test_ball_s3_full():
    p = parse_presentation(S3_TEXT)
    ball = enumerate_ball(p, "full")
    assert len(ball) == 6
    assert ball.is_full


def test_ball_full_stabilizes():
    p = parse_presentation("gens t; backend cyclic 5")
    b2 = enumerate_ball(p, 2)
    b9 = enumerate_ball(p, 9)
    assert b2.elements == b9.elements
    assert b9.is_full


def test_ball_budget():
    p = parse_presentation("gens a b; backend free")
    with pytest.raises(BallBudgetExceeded):
        enumerate_ball(p, 8, cap=100)


def test_ball_closed_under_inversion():
    p = parse_presentation("gens a b; backend free")
    ball = enumerate_ball(p, 3)
    for i in range(len(ball)):
        j = ball.inverse_index[i]
        assert ball.word_length[i] == ball.word_length[j]
        assert ball.inverse_index[j] == i


def test_product_index_identity_and_inverses():
    p = parse_presentation(Z2_TEXT)
    ball = enumerate_ball(p, 2)
    for i in range(len(ball)):
        if ball.word_length[i] <= 1:
            assert product_index(ball, 0, i) == i
            assert product_index(ball, i, ball.inverse_index[i]) == 0


def test_product_index_cyclic():
    p = parse_presentation("gens t; backend cyclic 3")
    ball = enumerate_ball(p, "full")
    t = ball.index_of(1)
    t2 = ball.index_of(2)
    assert product_index(ball, t, t2) == 0


def test_product_index_radius_guard():
    p = parse_presentation("gens t; backend free")
    ball = enumerate_ball(p, 2)
    far = [i for i in range(len(ball)) if ball.word_length[i] == 2]
    with pytest.raises(RadiusTooSmall):
        product_index(ball, far[0], far[0])


def test_product_associativity_s3():
    p = parse_presentation(S3_TEXT)
    ball = enumerate_ball(p, "full")
    rng = random.Random(7)
    for _ in range(50):
        x, y, z = (rng.randrange(6) for _ in range(3))
        xy = product_index(ball, x, y)
        yz = product_index(ball, y, z)
        assert product_index(ball, xy, z) == product_index(ball, x, yz)


def test_eval_word_respects_concatenation():
    p = parse_presentation(S3_TEXT)
    rng = random.Random(11)
    names = p.generators
    for _ in range(30):
        u = " ".join(rng.choice(names) for _ in range(rng.randrange(4)))
        v = " ".join(rng.choice(names) for _ in range(rng.randrange(4)))
        w = (u + " " + v).strip()
        lhs = eval_word(p, word_from_text(w, names)) if w else p.backend.identity()
        rhs = p.backend.multiply(
            eval_word(p, word_from_text(u, names)),
            eval_word(p, word_from_text(v, names)),
        )
        assert lhs == rhs


def test_zmat_backend_heisenberg_ball():
    text = "gens x y; backend zmat x=1,1,0,0,1,0,0,0,1 y=1,0,0,0,1,1,0,0,1"
    p = parse_presentation(text)
    ball = enumerate_ball(p, 2)
    # 1 + 4 + growth layer; x and y generate distinct elements
    assert ball.word_length[0] == 0
    assert len(set(ball.elements)) == len(ball)


def test_zmat_rejects_singular():
    with pytest.raises(Exception):
        parse_presentation("gens x; backend zmat x=1,0,0,0")


def test_trivial_presentation_empty_gens():
    p = parse_presentation("backend free")
    ball = enumerate_ball(p, "full")
    assert len(ball) == 1
