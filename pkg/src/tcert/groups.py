"""Finite presentations, element backends with canonical forms, and Cayley balls.

Every backend provides exact group arithmetic with a canonical (hashable)
form per element, so handle equality is equality in the group.  Supported
backends: free, free-abelian, cyclic n, permutation images, integer-matrix
images.  Word problems outside these families are out of scope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    BackendRelatorViolation,
    BallBudgetExceeded,
    PresentationSyntaxError,
    RadiusTooSmall,
    UndeclaredGenerator,
    UnreducedRelator,
)

DEFAULT_BALL_CAP = 200_000

_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class FreeWord:
    """Freely reduced word: a sequence of (generator index, +1/-1) letters."""

    letters: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.letters)

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple((g, -s) for g, s in reversed(self.letters)))

    def is_reduced(self) -> bool:
        for (g1, s1), (g2, s2) in zip(self.letters, self.letters[1:]):
            if g1 == g2 and s1 == -s2:
                return False
        return True


def word_from_text(text: str, generators: Sequence[str],
                   require_reduced: bool = False) -> FreeWord:
    """Parse "a b a^-1 b^-1" style syntax against a generator list.

    Raises UndeclaredGenerator for unknown letters.  With
    ``require_reduced`` (the relator path) an adjacent x x^-1 pair raises
    UnreducedRelator instead of being silently cancelled.
    """
    index = {name: i for i, name in enumerate(generators)}
    letters: list[tuple[int, int]] = []
    for token in text.split():
        if "^" in token:
            name, _, exp = token.partition("^")
            try:
                e = int(exp)
            except ValueError:
                raise PresentationSyntaxError(f"bad exponent in token {token!r}")
        else:
            name, e = token, 1
        if name not in index:
            raise UndeclaredGenerator(f"letter {name!r} is not a declared generator")
        sign = 1 if e > 0 else -1
        letters.extend((index[name], sign) for _ in range(abs(e)))
    word = FreeWord(tuple(letters))
    if require_reduced and not word.is_reduced():
        raise UnreducedRelator(f"word {text!r} is not freely reduced")
    return word


def word_to_text(word: FreeWord, generators: Sequence[str]) -> str:
    if not word.letters:
        return ""
    parts = []
    for g, s in word.letters:
        parts.append(generators[g] if s > 0 else f"{generators[g]}^-1")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Backends.  A handle is a hashable canonical form; arithmetic goes through
# the backend so downstream code never inspects the representation.
# ---------------------------------------------------------------------------


class Backend:
    """Exact group arithmetic on canonical-form handles."""

    name = "abstract"

    def identity(self):
        raise NotImplementedError

    def generator(self, i: int):
        raise NotImplementedError

    def multiply(self, x, y):
        raise NotImplementedError

    def invert(self, x):
        raise NotImplementedError

    def spec_text(self) -> str:
        """Canonical backend clause for serialized presentations."""
        raise NotImplementedError


class FreeBackend(Backend):
    name = "free"

    def __init__(self, n_gens: int):
        self.n_gens = n_gens

    def identity(self):
        return ()

    def generator(self, i):
        return ((i, 1),)

    def multiply(self, x, y):
        out = list(x)
        for letter in y:
            if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
                out.pop()
            else:
                out.append(letter)
        return tuple(out)

    def invert(self, x):
        return tuple((g, -s) for g, s in reversed(x))

    def spec_text(self):
        return "free"


class FreeAbelianBackend(Backend):
    name = "free-abelian"

    def __init__(self, n_gens: int):
        self.n_gens = n_gens

    def identity(self):
        return (0,) * self.n_gens

    def generator(self, i):
        v = [0] * self.n_gens
        v[i] = 1
        return tuple(v)

    def multiply(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def invert(self, x):
        return tuple(-a for a in x)

    def spec_text(self):
        return "free-abelian"


class CyclicBackend(Backend):
    name = "cyclic"

    def __init__(self, n: int):
        if n < 1:
            raise PresentationSyntaxError("cyclic order must be positive")
        self.n = n

    def identity(self):
        return 0

    def generator(self, i):
        return 1 % self.n

    def multiply(self, x, y):
        return (x + y) % self.n

    def invert(self, x):
        return (-x) % self.n

    def spec_text(self):
        return f"cyclic {self.n}"


class PermutationBackend(Backend):
    name = "perm"

    def __init__(self, images: Sequence[tuple[int, ...]], source: Sequence[str]):
        self.degree = len(images[0]) if images else 1
        for img in images:
            if sorted(img) != list(range(self.degree)):
                raise PresentationSyntaxError("generator image is not a permutation")
        self.images = [tuple(img) for img in images]
        self.source = list(source)

    def identity(self):
        return tuple(range(self.degree))

    def generator(self, i):
        return self.images[i]

    def multiply(self, x, y):
        # (x.y)(p) = x(y(p)): apply y first.
        return tuple(x[y[p]] for p in range(self.degree))

    def invert(self, x):
        out = [0] * self.degree
        for p, q in enumerate(x):
            out[q] = p
        return tuple(out)

    def spec_text(self):
        return "perm " + " ".join(self.source)


class IntegerMatrixBackend(Backend):
    name = "zmat"

    def __init__(self, images: Sequence[tuple[tuple[int, ...], ...]], source: Sequence[str]):
        self.k = len(images[0]) if images else 1
        self.images = [tuple(tuple(row) for row in m) for m in images]
        self.source = list(source)
        for m in self.images:
            if _int_det(m) not in (1, -1):
                raise PresentationSyntaxError(
                    "matrix generator is not invertible over the integers (det != +-1)"
                )

    def identity(self):
        return tuple(tuple(1 if i == j else 0 for j in range(self.k)) for i in range(self.k))

    def generator(self, i):
        return self.images[i]

    def multiply(self, x, y):
        k = self.k
        return tuple(
            tuple(sum(x[i][l] * y[l][j] for l in range(k)) for j in range(k))
            for i in range(k)
        )

    def invert(self, x):
        return _int_inverse(x)

    def spec_text(self):
        return "zmat " + " ".join(self.source)


def _int_det(m) -> int:
    k = len(m)
    rows = [[Fraction(v) for v in row] for row in m]
    det = Fraction(1)
    for col in range(k):
        pivot = next((r for r in range(col, k) if rows[r][col] != 0), None)
        if pivot is None:
            return 0
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        det *= rows[col][col]
        inv = 1 / rows[col][col]
        for r in range(col + 1, k):
            factor = rows[r][col] * inv
            if factor:
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    assert det.denominator == 1
    return int(det)


def _int_inverse(m):
    k = len(m)
    aug = [[Fraction(m[i][j]) for j in range(k)] + [Fraction(int(i == j)) for j in range(k)]
           for i in range(k)]
    for col in range(k):
        pivot = next(r for r in range(col, k) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(k):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    out = []
    for i in range(k):
        row = aug[i][k:]
        assert all(v.denominator == 1 for v in row)
        out.append(tuple(int(v) for v in row))
    return tuple(out)


# ---------------------------------------------------------------------------
# Presentations.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Presentation:
    """Generators, freely reduced relators, and a validated backend."""

    generators: tuple[str, ...]
    relators: tuple[FreeWord, ...]
    backend: Backend
    source: str = field(compare=False, default="")

    @property
    def n_gens(self) -> int:
        return len(self.generators)

    def canonical_text(self) -> str:
        """Normalized single-spacing serialization; used for fingerprints."""
        lines = []
        if self.generators:
            lines.append("gens " + " ".join(self.generators))
        for rel in self.relators:
            lines.append("rel " + word_to_text(rel, self.generators))
        lines.append("backend " + self.backend.spec_text())
        return "\n".join(lines)


def eval_word(p: Presentation, w: FreeWord):
    """Canonical handle of the image of w in the group."""
    backend = p.backend
    x = backend.identity()
    for g, s in w.letters:
        if not 0 <= g < p.n_gens:
            raise UndeclaredGenerator(f"letter index {g} out of range")
        img = backend.generator(g)
        x = backend.multiply(x, img if s > 0 else backend.invert(img))
    return x


def _parse_perm_images(rest: str, generators: Sequence[str]):
    clauses = re.findall(r"([A-Za-z]\w*)\s*=\s*((?:\(\s*[^()]*\)\s*)+|\(\))", rest)
    consumed = "".join(name + "=" + body for name, body in clauses)
    if re.sub(r"\s+", "", consumed) != re.sub(r"\s+", "", rest):
        raise PresentationSyntaxError(f"bad perm clause in {rest!r}")
    by_name = {}
    for name, cycles in clauses:
        if name not in generators:
            raise UndeclaredGenerator(f"perm image for unknown generator {name!r}")
        by_name[name] = cycles
    missing = [g for g in generators if g not in by_name]
    if missing:
        raise PresentationSyntaxError(f"missing perm images for {missing}")
    parsed = {}
    degree = 1
    for name, text in by_name.items():
        cycles = []
        for m in re.finditer(r"\(([^()]*)\)", text):
            body = m.group(1).replace(",", " ").split()
            cycle = [int(v) for v in body]
            if any(v < 1 for v in cycle):
                raise PresentationSyntaxError("permutation points are 1-based positive integers")
            cycles.append(cycle)
        if text.strip() and not cycles and text.strip() != "()":
            raise PresentationSyntaxError(f"bad cycle notation {text!r}")
        parsed[name] = cycles
        for cycle in cycles:
            degree = max(degree, max(cycle, default=1))
    images = []
    for name in generators:
        img = list(range(degree))
        for cycle in parsed[name]:
            if len(set(cycle)) != len(cycle):
                raise PresentationSyntaxError(f"repeated point in cycle for {name!r}")
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                img[a - 1] = b - 1
        images.append(tuple(img))
    source = [f"{name}={by_name[name].strip()}" for name in generators]
    return images, source


def _parse_zmat_images(parts: list[str], generators: Sequence[str]):
    by_name = {}
    for part in parts:
        if "=" not in part:
            raise PresentationSyntaxError(f"bad zmat clause {part!r}")
        name, _, body = part.partition("=")
        if name not in generators:
            raise UndeclaredGenerator(f"zmat image for unknown generator {name!r}")
        try:
            flat = [int(v) for v in body.split(",")]
        except ValueError:
            raise PresentationSyntaxError(f"bad integer matrix {body!r}")
        k = round(len(flat) ** 0.5)
        if k * k != len(flat) or k == 0:
            raise PresentationSyntaxError(f"matrix for {name!r} is not square row-major")
        by_name[name] = tuple(tuple(flat[i * k:(i + 1) * k]) for i in range(k))
    missing = [g for g in generators if g not in by_name]
    if missing:
        raise PresentationSyntaxError(f"missing zmat images for {missing}")
    sizes = {len(m) for m in by_name.values()}
    if len(sizes) > 1:
        raise PresentationSyntaxError("zmat images have mixed sizes")
    images = [by_name[name] for name in generators]
    source = [
        name + "=" + ",".join(str(v) for row in by_name[name] for v in row)
        for name in generators
    ]
    return images, source


def parse_presentation(text: str, ball_cap: int = DEFAULT_BALL_CAP) -> Presentation:
    """Parse presentation source (statements split on newlines/semicolons).

    Grammar per statement:
      gens <name>+
      rel <word>
      backend free | free-abelian | cyclic <n> | perm <g>=<cycles>... | zmat <g>=<ints>...
    '#' starts a comment.  Relators must arrive freely reduced, and the
    backend images must satisfy every relator.
    """
    statements = []
    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0]
        for stmt in line.split(";"):
            stmt = stmt.strip()
            if stmt:
                statements.append(stmt)

    generators: list[str] = []
    relator_texts: list[str] = []
    backend_clause: Optional[str] = None
    for stmt in statements:
        head, _, rest = stmt.partition(" ")
        rest = rest.strip()
        if head == "gens":
            if generators:
                raise PresentationSyntaxError("duplicate gens statement")
            names = rest.split()
            for name in names:
                if not _NAME_RE.match(name):
                    raise PresentationSyntaxError(f"bad generator name {name!r}")
            if len(set(names)) != len(names):
                raise PresentationSyntaxError("repeated generator name")
            generators = names
        elif head == "rel":
            relator_texts.append(rest)
        elif head == "backend":
            if backend_clause is not None:
                raise PresentationSyntaxError("duplicate backend statement")
            backend_clause = rest
        else:
            raise PresentationSyntaxError(f"unknown statement {stmt!r}")

    relators = [word_from_text(t, generators, require_reduced=True)
                for t in relator_texts]
    for rel in relators:
        if not rel.letters:
            raise UnreducedRelator("empty relator")

    clause = (backend_clause or "free").split()
    kind = clause[0] if clause else "free"
    if kind == "free":
        backend: Backend = FreeBackend(len(generators))
    elif kind == "free-abelian":
        backend = FreeAbelianBackend(len(generators))
    elif kind == "cyclic":
        if len(clause) != 2 or not clause[1].isdigit():
            raise PresentationSyntaxError("backend cyclic needs a positive integer order")
        if len(generators) != 1:
            raise PresentationSyntaxError("cyclic backend needs exactly one generator")
        n = int(clause[1])
        backend = CyclicBackend(n)
        power = FreeWord(((0, 1),) * n)
        if power.letters and power not in relators:
            relators.append(power)
    elif kind == "perm":
        rest = (backend_clause or "").partition(" ")[2]
        images, source = _parse_perm_images(rest, generators)
        backend = PermutationBackend(images, source)
    elif kind == "zmat":
        images, source = _parse_zmat_images(clause[1:], generators)
        backend = IntegerMatrixBackend(images, source)
    else:
        raise PresentationSyntaxError(f"unknown backend {kind!r}")

    p = Presentation(tuple(generators), tuple(relators), backend, source=text)
    identity = backend.identity()
    for rel in relators:
        if eval_word(p, rel) != identity:
            raise BackendRelatorViolation(
                f"backend images violate relator {word_to_text(rel, generators)!r}"
            )
    return p


# ---------------------------------------------------------------------------
# Cayley balls.
# ---------------------------------------------------------------------------


class Ball:
    """Breadth-first ball around the identity, symmetrized generating set.

    Elements are ordered by (word length, discovery order), identity first;
    all downstream matrices and coefficient maps index into this ordering.
    """

    def __init__(self, presentation: Presentation, radius, elements, word_length,
                 generator_edges, inverse_index, is_full: bool):
        self.presentation = presentation
        self.radius = radius
        self.elements = elements
        self.word_length = word_length
        self.generator_edges = generator_edges
        self.inverse_index = inverse_index
        self.is_full = is_full
        self.index = {h: i for i, h in enumerate(elements)}

    def __len__(self):
        return len(self.elements)

    def index_of(self, handle) -> Optional[int]:
        return self.index.get(handle)

    def radius_text(self) -> str:
        return "full" if self.is_full else str(self.radius)


def symmetrized_alphabet(p: Presentation):
    """Generator images followed by their inverses (multiset, fixed order)."""
    backend = p.backend
    gens = [backend.generator(i) for i in range(p.n_gens)]
    return gens + [backend.invert(g) for g in gens]


def enumerate_ball(p: Presentation, radius, cap: int = DEFAULT_BALL_CAP) -> Ball:
    """BFS ball of the given radius; radius="full" closes a finite group.

    Raises BallBudgetExceeded past ``cap`` elements.
    """
    full = radius == "full"
    if not full and (not isinstance(radius, int) or radius < 0):
        raise ValueError("radius must be a non-negative integer or 'full'")
    backend = p.backend
    alphabet = symmetrized_alphabet(p)
    identity = backend.identity()
    elements = [identity]
    word_length = [0]
    index = {identity: 0}
    frontier_start = 0
    level = 0
    while full or level < radius:
        next_start = len(elements)
        for i in range(frontier_start, next_start):
            x = elements[i]
            for s in alphabet:
                y = backend.multiply(x, s)
                if y not in index:
                    index[y] = len(elements)
                    elements.append(y)
                    word_length.append(level + 1)
                    if len(elements) > cap:
                        raise BallBudgetExceeded(
                            f"ball enumeration passed the cap of {cap} elements"
                        )
        if len(elements) == next_start:
            # stabilized: the whole group was enumerated
            break
        frontier_start = next_start
        level += 1

    stabilized = full or _is_closed(backend, alphabet, elements, index)
    achieved = word_length[-1] if elements else 0
    generator_edges = [
        [index.get(backend.multiply(x, s)) for s in alphabet] for x in elements
    ]
    inverse_index = []
    for x in elements:
        inv = index.get(backend.invert(x))
        assert inv is not None, "ball must be closed under inversion"
        inverse_index.append(inv)
    return Ball(
        presentation=p,
        radius=achieved if full else radius,
        elements=elements,
        word_length=word_length,
        generator_edges=generator_edges,
        inverse_index=inverse_index,
        is_full=stabilized,
    )


def _is_closed(backend, alphabet, elements, index) -> bool:
    for x in elements:
        for s in alphabet:
            if backend.multiply(x, s) not in index:
                return False
    return True


def product_index(ball: Ball, x: int, y: int) -> int:
    """Index of elements[x] * elements[y]; total under the radius precondition."""
    if not ball.is_full:
        if ball.word_length[x] + ball.word_length[y] > ball.radius:
            raise RadiusTooSmall(
                f"product of word lengths {ball.word_length[x]}+{ball.word_length[y]} "
                f"exceeds ball radius {ball.radius}",
                minimal=ball.word_length[x] + ball.word_length[y],
            )
    h = ball.presentation.backend.multiply(ball.elements[x], ball.elements[y])
    idx = ball.index_of(h)
    assert idx is not None
    return idx
