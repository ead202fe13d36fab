import numpy as np
import pytest

from tcert.errors import CapExceeded, NotUnitary
from tcert.groups import enumerate_ball, parse_presentation
from tcert.oracle import (
    ModuleAction,
    augmentation_kernel_module,
    bar_cohomology,
    builtin_module,
    cross_check,
    extend_resolution,
    invariants_dimension,
    laplacian_spectrum,
    regular_module,
    sign_module,
    trivial_module,
)
from tcert.resolution import (
    attach_user_differential,
    build_presentation_complex,
    cyclic_resolution,
)
from tcert.ring import GroupRingMatrix

S3_TEXT = "gens a b; rel a a; rel b b; rel a b a b a b; backend perm a=(1 2) b=(2 3)"


def cyclic_setup(n, top=3):
    p = parse_presentation(f"gens t; backend cyclic {n}")
    ball = enumerate_ball(p, "full")
    return ball, cyclic_resolution(n, top, ball)


def s3_complex():
    p = parse_presentation(S3_TEXT)
    ball = enumerate_ball(p, "full")
    return build_presentation_complex(p, ball)


def approx_sorted(values, expect, tol=1e-8):
    assert len(values) == len(expect)
    for got, want in zip(sorted(values), sorted(expect)):
        assert abs(got - want) <= tol, (values, expect)


def test_regular_module_is_unitary_permutation():
    ball, _ = cyclic_setup(4)
    reg = regular_module(ball)
    for m in reg.action:
        assert np.abs(m @ m.T - np.eye(4)).max() < 1e-14


def test_module_validation_rejects_bad_action():
    p = parse_presentation("gens t; backend cyclic 3")
    from tcert.oracle import FiniteModule

    bad = FiniteModule("bad", 1, [np.array([[-1.0]])], True)
    with pytest.raises(ValueError):
        bad.validate(p)  # (-1)^3 != 1


def test_spectrum_cyclic3_regular_degree0():
    ball, c = cyclic_setup(3)
    approx_sorted(laplacian_spectrum(c, regular_module(ball), 0), [0, 3, 3])


def test_spectrum_cyclic3_reg0_degree0():
    ball, c = cyclic_setup(3)
    approx_sorted(laplacian_spectrum(c, augmentation_kernel_module(ball), 0), [3, 3])


def test_spectrum_cyclic3_regular_degree1():
    ball, c = cyclic_setup(3)
    approx_sorted(laplacian_spectrum(c, regular_module(ball), 1), [3, 3, 9])


def test_spectrum_cyclic3_trivial_degree1():
    ball, c = cyclic_setup(3)
    approx_sorted(laplacian_spectrum(c, trivial_module(ball.presentation), 1), [9])


def test_spectrum_requires_unitary():
    ball, c = cyclic_setup(3)
    mod = regular_module(ball)
    mod.is_unitary = False
    with pytest.raises(NotUnitary):
        laplacian_spectrum(c, mod, 0)


def test_bar_cohomology_z2_trivial():
    p = parse_presentation("gens t; backend cyclic 2")
    ball = enumerate_ball(p, "full")
    triv = trivial_module(p)
    assert bar_cohomology(ball, triv, 0) == 1
    assert bar_cohomology(ball, triv, 1) == 0
    assert bar_cohomology(ball, triv, 2) == 0


def test_bar_cohomology_cyclic3_reg0():
    ball, _ = cyclic_setup(3)
    reg0 = augmentation_kernel_module(ball)
    assert bar_cohomology(ball, reg0, 0) == 0
    assert bar_cohomology(ball, reg0, 1) == 0


def test_bar_cap():
    ball, _ = cyclic_setup(6)
    with pytest.raises(CapExceeded):
        bar_cohomology(ball, regular_module(ball), 2, cap=10)


def test_invariants_dimension():
    ball, _ = cyclic_setup(5)
    assert invariants_dimension(ball, regular_module(ball)) == 1
    assert invariants_dimension(ball, augmentation_kernel_module(ball)) == 0
    assert invariants_dimension(ball, trivial_module(ball.presentation)) == 1


def test_sign_module_s3():
    p = parse_presentation(S3_TEXT)
    sign = sign_module(p)
    assert sign.action[0][0, 0] == -1.0
    assert sign.action[1][0, 0] == -1.0


def test_cross_check_cyclic_reg0_passes():
    for n in (2, 3, 4, 5, 6):
        ball, c = cyclic_setup(n)
        report = cross_check(c, augmentation_kernel_module(ball), [0, 1, 2])
        assert report.all_pass, report.render()
        for d in report.degrees:
            assert d.dim_cohomology == 0
            assert d.min_spectrum > 0


def test_cross_check_cyclic3_trivial():
    ball, c = cyclic_setup(3)
    report = cross_check(c, trivial_module(ball.presentation), [0, 1, 2])
    assert report.all_pass, report.render()
    by_degree = {d.degree: d for d in report.degrees}
    assert by_degree[0].dim_cohomology == 1
    assert by_degree[0].kernel_dim == 1
    assert by_degree[1].dim_cohomology == 0


def test_cross_check_s3_reg0_with_extension():
    c = s3_complex()
    report = cross_check(c, augmentation_kernel_module(c.ball), [0, 1, 2])
    assert report.all_pass, report.render()


def test_cross_check_s3_regular():
    c = s3_complex()
    report = cross_check(c, regular_module(c.ball), [0, 1])
    assert report.all_pass, report.render()
    by_degree = {d.degree: d for d in report.degrees}
    assert by_degree[0].dim_cohomology == 1  # invariants of the regular rep
    assert by_degree[0].kernel_dim == 1


def test_cross_check_detects_non_exact_complex():
    # valid complex (d.d = 0) that is not exact: zero d_2 over Z/4
    p = parse_presentation("gens t; backend cyclic 4")
    ball = enumerate_ball(p, "full")
    c = cyclic_resolution(4, 1, ball)
    c = attach_user_differential(c, 2, GroupRingMatrix.zero(ball, 1, 1))
    report = cross_check(c, regular_module(ball), [1])
    assert not report.all_pass
    failing = [v for d in report.degrees for v in d.verdicts if not v.ok]
    assert failing and any("ker" in v.detail for v in failing)


def test_extend_resolution_s3():
    c = s3_complex()
    extended = extend_resolution(c, 3)
    assert extended.top_degree == 3
    assert extended.has_differential(3)
    # exactness at degree 2: harmonic space must vanish for every module
    reg0 = augmentation_kernel_module(c.ball)
    spec = laplacian_spectrum(extended, reg0, 2)
    assert min(abs(v) for v in spec) > 1e-10


def test_extend_resolution_idempotent_for_exact_kernel():
    ball, c = cyclic_setup(3, top=1)
    extended = extend_resolution(c, 3)
    assert extended.top_degree == 3
    report = cross_check(extended, augmentation_kernel_module(ball), [0, 1, 2])
    assert report.all_pass, report.render()


def test_builtin_module_names():
    ball, _ = cyclic_setup(4)
    for name in ("trivial", "reg", "reg0", "sign"):
        mod = builtin_module(name, ball)
        assert mod.name == name
    with pytest.raises(ValueError):
        builtin_module("nope", ball)


def test_report_rendering_and_summary():
    ball, c = cyclic_setup(3)
    report = cross_check(c, augmentation_kernel_module(ball), [0, 1])
    text = report.render()
    assert "PASS" in text and "degree 1" in text
    summary = report.to_summary()
    assert summary["all_pass"] is True
    assert len(summary["degrees"]) == 2
