"""The preset group zoo used by the command line and the acceptance suite."""

from __future__ import annotations

from .groups import DEFAULT_BALL_CAP, Presentation, enumerate_ball, parse_presentation
from .resolution import (
    ChainComplexData,
    build_presentation_complex,
    cyclic_resolution,
)

_FINITE_BACKENDS = ("cyclic", "perm")


def preset_text(name: str) -> str:
    if name == "trivial":
        return "backend free"
    if name == "z":
        return "gens t\nbackend free"
    if name == "z2":
        return "gens a b\nrel a b a^-1 b^-1\nbackend free-abelian"
    if name == "s3":
        return ("gens a b\nrel a a\nrel b b\nrel a b a b a b\n"
                "backend perm a=(1 2) b=(2 3)")
    if name.startswith("cyclic:"):
        n = int(name.split(":", 1)[1])
        if n < 1:
            raise ValueError("cyclic preset needs a positive order")
        return f"gens t\nbackend cyclic {n}"
    if name.startswith("free:"):
        k = int(name.split(":", 1)[1])
        if k < 1:
            raise ValueError("free preset needs a positive rank")
        names = " ".join(f"x{i}" for i in range(1, k + 1))
        return f"gens {names}\nbackend free"
    raise ValueError(f"unknown preset {name!r}; expected trivial, cyclic:n, "
                     "z, z2, s3, or free:k")


def preset_presentation(name: str, ball_cap: int = DEFAULT_BALL_CAP) -> Presentation:
    return parse_presentation(preset_text(name), ball_cap)


def build_complex(p: Presentation, degree: int = 0,
                  ball_cap: int = DEFAULT_BALL_CAP) -> ChainComplexData:
    """Default complex for a presentation.

    Cyclic backends get the periodic resolution deep enough for the
    requested degree; everything else gets the presentation complex.
    """
    backend = p.backend.name
    if backend == "cyclic":
        ball = enumerate_ball(p, "full", ball_cap)
        top = max(2, degree + 1)
        return cyclic_resolution(p.backend.n, top, ball)
    if backend in _FINITE_BACKENDS:
        ball = enumerate_ball(p, "full", ball_cap)
    else:
        radius = max((len(r) for r in p.relators), default=0)
        ball = enumerate_ball(p, max(radius, 1), ball_cap)
    return build_presentation_complex(p, ball)
