import random
import warnings
from fractions import Fraction

import pytest

from tcert.encoder import (
    SOSMode,
    build_support_basis,
    encode,
    gram_expansion,
    prepare_encoding,
    target_matrix,
)
from tcert.errors import RadiusTooSmall, TruncatedDegree
from tcert.groups import enumerate_ball, parse_presentation
from tcert.resolution import build_presentation_complex, cyclic_resolution
from tcert.ring import gr_star, mat_star, reindex
from tcert.sdpa import export_sdpa, import_sdpa


def cyclic_complex(n, top=2):
    p = parse_presentation(f"gens t; backend cyclic {n}")
    return cyclic_resolution(n, top, enumerate_ball(p, "full"))


def z_complex():
    p = parse_presentation("gens t; backend free")
    return build_presentation_complex(p, enumerate_ball(p, 1))


def z2_complex():
    p = parse_presentation("gens a b; rel a b a^-1 b^-1; backend free-abelian")
    return build_presentation_complex(p, enumerate_ball(p, 4))


def test_mode_validation():
    with pytest.raises(ValueError):
        SOSMode("ozawa", 1)
    with pytest.raises(ValueError):
        SOSMode("bracket", 0)
    assert SOSMode("paren", 0).uses_ideal_basis


def test_support_basis_shapes():
    c = cyclic_complex(3)
    ball = c.ball
    ideal = build_support_basis(ball, SOSMode("ozawa"), 1, 1)
    assert len(ideal) == 2
    assert [e.ball_index for e in ideal.entries] == [1, 2]

    p = parse_presentation("gens t; backend free")
    zball = enumerate_ball(p, 1)
    plain = build_support_basis(zball, SOSMode("bracket", 1), 1, 1)
    assert len(plain) == 3
    assert [e.ball_index for e in plain.entries] == [0, 1, 2]

    paren2 = build_support_basis(zball, SOSMode("paren", 1), 2, 1)
    assert len(paren2) == 4  # (3 - 1) * 2


def test_encode_cyclic3_ozawa_constraint_table():
    problem = encode(cyclic_complex(3), SOSMode("ozawa"))
    assert problem.gram_size == 2
    assert len(problem.constraints) == 3  # e, t, t^2
    by_g = {c.element: c for c in problem.constraints}
    e_row = by_g[0]
    assert e_row.coeffs == [(0, 0, 2), (0, 1, 2), (1, 1, 2)]
    assert (e_row.c0, e_row.c1) == (6, -2)
    t_row = by_g[1]
    assert t_row.coeffs == [(0, 0, -1), (0, 1, -1), (1, 1, -1)]
    assert (t_row.c0, t_row.c1) == (-3, 1)
    assert by_g[2].coeffs == t_row.coeffs
    assert not problem.degenerate
    assert problem.epsilon_cap == 8  # 2 * l1(2 - t - t^2)


def test_encode_cyclic3_bracket_degree1():
    problem = encode(cyclic_complex(3), SOSMode("bracket", 1))
    assert problem.gram_size == 3
    by_g = {c.element: c for c in problem.constraints}
    assert (by_g[0].c0, by_g[0].c1) == (5, -1)
    assert (by_g[1].c0, by_g[1].c1) == (2, 0)


def test_encode_trivial_group_degenerate():
    p = parse_presentation("gens t; backend cyclic 1")
    c = cyclic_complex(1)
    problem = encode(c, SOSMode("ozawa"))
    assert problem.degenerate
    assert all(cc.c0 == 0 and cc.c1 == 0 for cc in problem.constraints)


def test_encode_truncated_degree_gate():
    with pytest.raises(TruncatedDegree):
        encode(z_complex(), SOSMode("bracket", 1))
    problem = encode(z_complex(), SOSMode("bracket", 1), assert_resolution=True)
    assert problem.gram_size == 3

    with pytest.raises(TruncatedDegree):
        encode(z2_complex(), SOSMode("bracket", 2))


def test_encode_radius_too_small_reports_minimal():
    with pytest.raises(RadiusTooSmall) as info:
        encode(z2_complex(), SOSMode("paren", 1), half_radius=1)
    assert info.value.minimal == 2
    problem = encode(z2_complex(), SOSMode("paren", 1), half_radius=2)
    assert problem.half_radius == 2


def test_encode_default_half_radius_grows_epsilon_basis():
    small = encode(z_complex(), SOSMode("ozawa"))
    assert small.half_radius == 1
    big = encode(z_complex(), SOSMode("ozawa"), half_radius=2)
    assert big.gram_size == 4  # radius-2 ball minus identity


def test_constraint_symmetry_under_flip():
    problem = encode(z2_complex(), SOSMode("bracket", 1), assert_resolution=True)
    ball = problem.ball
    basis = problem.basis
    rng = random.Random(3)
    sample = rng.sample(problem.constraints, min(8, len(problem.constraints)))
    table = {c.key: {(p, q): v for p, q, v in c.coeffs} for c in problem.constraints}
    for con in sample:
        i, j, g = con.key
        flipped = (i, j, ball.inverse_index[g]) if i == j else None
        if flipped and flipped in table:
            assert table[flipped] == table[con.key]


def test_gram_expansion_matches_target_cyclic3_bracket():
    problem = encode(cyclic_complex(3), SOSMode("bracket", 1))
    third = Fraction(2, 3)
    q = [[third] * 3 for _ in range(3)]
    expansion = gram_expansion(problem, q)
    ctx = prepare_encoding(cyclic_complex(3), SOSMode("bracket", 1))
    target = target_matrix(ctx, Fraction(3))
    assert expansion.entries[0][0] == reindex(target.entries[0][0], problem.ball)


def test_expansion_is_self_adjoint():
    problem = encode(z2_complex(), SOSMode("bracket", 1), assert_resolution=True)
    n = problem.gram_size
    rng = random.Random(5)
    q = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            q[i][j] = q[j][i] = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
    expansion = gram_expansion(problem, q)
    assert mat_star(expansion) == expansion


def test_ideal_basis_elements_have_zero_augmentation():
    problem = encode(cyclic_complex(5), SOSMode("ozawa"))
    from tcert.ring import augmentation
    for p in range(problem.gram_size):
        w = problem.basis.element(problem.ball, p)
        assert augmentation(w) == 0


def test_constraints_consistent_with_expansion():
    # random Q: the constraint LHS must equal the expansion coefficients
    problem = encode(cyclic_complex(4), SOSMode("ozawa"))
    n = problem.gram_size
    rng = random.Random(11)
    q = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            q[i][j] = q[j][i] = Fraction(rng.randint(-2, 2), rng.randint(1, 3))
    expansion = gram_expansion(problem, q)
    for con in problem.constraints:
        lhs = sum(
            (v * q[p][qq] for p, qq, v in con.coeffs), Fraction(0))
        got = expansion.entries[con.block_row][con.block_col].coeffs.get(
            con.element, Fraction(0))
        assert lhs == got


def test_sdpa_roundtrip_basic():
    problem = encode(cyclic_complex(3), SOSMode("ozawa"))
    text = export_sdpa(problem)
    assert text == export_sdpa(problem)  # deterministic
    back = import_sdpa(text)
    assert back == problem
    assert "1 1 1 1 2" in text  # first constraint touches Q[0][0] with coeff 2


def test_sdpa_roundtrip_degenerate_header_only():
    problem = encode(cyclic_complex(1), SOSMode("ozawa"))
    text = export_sdpa(problem)
    back = import_sdpa(text)
    assert back.degenerate
    body = [ln for ln in text.splitlines() if not ln.startswith("*")]
    assert body[0] == "0"
    assert len(body) <= 4


def test_sdpa_roundtrip_random_modes():
    rng = random.Random(17)
    complexes = [cyclic_complex(3, 3), cyclic_complex(4, 3), cyclic_complex(5, 3)]
    modes = [SOSMode("ozawa"), SOSMode("bracket", 1), SOSMode("bracket", 2),
             SOSMode("paren", 1)]
    for _ in range(8):
        c = rng.choice(complexes)
        mode = rng.choice(modes)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            problem = encode(c, mode)
        assert import_sdpa(export_sdpa(problem)) == problem
