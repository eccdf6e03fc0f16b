"""Finitely generated groups as metric spaces.

Two concrete families are supported: free abelian lattices Z^d (elements are
integer vectors) and free groups F_k (elements are reduced words).  A
``GeneratingSet`` turns a group into a metric space: it enumerates Cayley
balls by breadth-first search, memoizes word lengths, and certifies
bi-Lipschitz behaviour of maps on those balls.

All values are immutable; the only mutable state is the per-generating-set
BFS memo, which is guarded by a lock.
"""
from __future__ import annotations

import itertools
import threading
from typing import Callable, Iterable

_SYMBOLS = "abcdefghijklmnopqrstuvwxyz"


class BudgetExceeded(RuntimeError):
    """The BFS search budget ran out before the requested element was reached."""


class LatticeGroup:
    """The lattice Z^d under componentwise addition."""

    __slots__ = ("dimension",)

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError("lattice dimension must be >= 1")
        self.dimension = dimension

    def __eq__(self, other):
        return isinstance(other, LatticeGroup) and other.dimension == self.dimension

    def __hash__(self):
        return hash(("lattice", self.dimension))

    def __repr__(self):
        return f"LatticeGroup({self.dimension})"

    def identity(self) -> "LatticeElement":
        return LatticeElement(self, (0,) * self.dimension)

    def element(self, coords: Iterable[int]) -> "LatticeElement":
        return LatticeElement(self, tuple(int(c) for c in coords))

    def basis_vector(self, i: int, scale: int = 1) -> "LatticeElement":
        coords = [0] * self.dimension
        coords[i] = scale
        return LatticeElement(self, tuple(coords))

    def standard_generators(self, **kwargs) -> "GeneratingSet":
        gens = [self.basis_vector(i, s) for i in range(self.dimension) for s in (1, -1)]
        return GeneratingSet(gens, **kwargs)


class LatticeElement:
    __slots__ = ("group", "coords")

    def __init__(self, group: LatticeGroup, coords: tuple[int, ...]):
        if len(coords) != group.dimension:
            raise ValueError(f"expected {group.dimension} coordinates, got {len(coords)}")
        self.group = group
        self.coords = coords

    def __mul__(self, other: "LatticeElement") -> "LatticeElement":
        if not isinstance(other, LatticeElement) or other.group != self.group:
            raise ValueError("cannot multiply elements of different groups")
        return LatticeElement(self.group, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def inverse(self) -> "LatticeElement":
        return LatticeElement(self.group, tuple(-a for a in self.coords))

    __invert__ = inverse

    def is_identity(self) -> bool:
        return all(c == 0 for c in self.coords)

    def l1_norm(self) -> int:
        return sum(abs(c) for c in self.coords)

    def sort_key(self):
        return (0, self.coords)

    def __eq__(self, other):
        return (
            isinstance(other, LatticeElement)
            and other.group == self.group
            and other.coords == self.coords
        )

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return f"({', '.join(map(str, self.coords))})"

    def to_json(self):
        return list(self.coords)


class FreeGroup:
    """The free group on ``rank`` generators; elements are reduced words."""

    __slots__ = ("rank",)

    def __init__(self, rank: int):
        if not 1 <= rank <= len(_SYMBOLS):
            raise ValueError(f"free group rank must be between 1 and {len(_SYMBOLS)}")
        self.rank = rank

    def __eq__(self, other):
        return isinstance(other, FreeGroup) and other.rank == self.rank

    def __hash__(self):
        return hash(("free", self.rank))

    def __repr__(self):
        return f"FreeGroup({self.rank})"

    def identity(self) -> "FreeWord":
        return FreeWord(self, ())

    def generator(self, i: int) -> "FreeWord":
        if not 0 <= i < self.rank:
            raise ValueError(f"generator index {i} out of range")
        return FreeWord(self, (i + 1,))

    def word(self, text: str) -> "FreeWord":
        """Parse "abA": lowercase letters are generators, uppercase their inverses."""
        letters = []
        for ch in text:
            idx = _SYMBOLS.find(ch.lower())
            if idx < 0 or idx >= self.rank:
                raise ValueError(f"unknown generator symbol {ch!r}")
            letters.append(idx + 1 if ch.islower() else -(idx + 1))
        return FreeWord(self, _reduce(letters))

    def standard_generators(self, **kwargs) -> "GeneratingSet":
        gens = [FreeWord(self, (s * (i + 1),)) for i in range(self.rank) for s in (1, -1)]
        return GeneratingSet(gens, **kwargs)


def _reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for letter in letters:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


class FreeWord:
    """A reduced word; letters are signed 1-based generator indices."""

    __slots__ = ("group", "letters")

    def __init__(self, group: FreeGroup, letters: tuple[int, ...]):
        self.group = group
        self.letters = letters

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        if not isinstance(other, FreeWord) or other.group != self.group:
            raise ValueError("cannot multiply elements of different groups")
        return FreeWord(self.group, _reduce(self.letters + other.letters))

    def inverse(self) -> "FreeWord":
        return FreeWord(self.group, tuple(-x for x in reversed(self.letters)))

    __invert__ = inverse

    def is_identity(self) -> bool:
        return not self.letters

    def sort_key(self):
        return (len(self.letters), self.letters)

    def __eq__(self, other):
        return (
            isinstance(other, FreeWord)
            and other.group == self.group
            and other.letters == self.letters
        )

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        return self.to_json() or "e"

    def to_json(self) -> str:
        return "".join(
            _SYMBOLS[abs(s) - 1] if s > 0 else _SYMBOLS[abs(s) - 1].upper()
            for s in self.letters
        )


def element_from_json(group, data):
    if isinstance(group, LatticeGroup):
        return group.element(data)
    return group.word(data)


class GeneratingSet:
    """A finite symmetric generating set with BFS word metrics.

    Word lengths are exact minimal factorization lengths.  The BFS memo grows
    on demand up to ``ball_budget``; asking for an element beyond that radius
    raises :class:`BudgetExceeded`.  For the standard generators of Z^d
    (resp. F_k) a closed form is used: the L1 norm (resp. the reduced word
    length); the BFS route stays available through :meth:`bfs_word_length`
    and the two are cross-checked in the test suite.
    """

    def __init__(self, elements, *, ball_budget: int = 32, generation_check_radius: int = 2):
        elements = tuple(elements)
        if not elements:
            raise ValueError("generating set must be nonempty")
        group = elements[0].group
        if any(e.group != group for e in elements):
            raise ValueError("generators must belong to one group")
        if any(e.is_identity() for e in elements):
            raise ValueError("generating set must not contain the identity")
        pool = set(elements)
        if {e.inverse() for e in elements} != pool:
            raise ValueError("generating set must be symmetric")
        self.group = group
        self.elements = tuple(sorted(pool, key=lambda e: e.sort_key()))
        self.ball_budget = ball_budget
        self._is_standard = self._detect_standard()
        self._lock = threading.Lock()
        self._lengths: dict = {group.identity(): 0}
        self._frontier: list = [group.identity()]
        self._explored = 0
        self._check_generates(generation_check_radius)

    def _detect_standard(self) -> bool:
        if isinstance(self.group, LatticeGroup):
            expected = {
                self.group.basis_vector(i, s)
                for i in range(self.group.dimension)
                for s in (1, -1)
            }
            return set(self.elements) == expected
        expected = {
            FreeWord(self.group, (s * (i + 1),))
            for i in range(self.group.rank)
            for s in (1, -1)
        }
        return set(self.elements) == expected

    def _check_generates(self, radius: int) -> None:
        # Generation is only certified at ball scale: for lattices the BFS
        # ball must reach every vector of L1 norm <= radius.  Standard sets
        # are exempt (they generate by construction).
        if radius <= 0 or self._is_standard or not isinstance(self.group, LatticeGroup):
            return
        reached = set(self._expand(min(radius * 4, self.ball_budget)))
        d = self.group.dimension
        for coords in itertools.product(range(-radius, radius + 1), repeat=d):
            if sum(abs(c) for c in coords) <= radius:
                if self.group.element(coords) not in reached:
                    raise ValueError(
                        f"set does not generate at ball scale: {coords} unreached"
                    )

    def _expand(self, radius: int):
        """Grow the BFS memo to the given radius; returns the memo dict."""
        with self._lock:
            while self._explored < radius and self._frontier:
                next_frontier = []
                for g in self._frontier:
                    for s in self.elements:
                        h = g * s
                        if h not in self._lengths:
                            self._lengths[h] = self._explored + 1
                            next_frontier.append(h)
                self._frontier = next_frontier
                self._explored += 1
            return self._lengths

    def ball(self, radius: int) -> tuple:
        """All elements of word length <= radius, in deterministic (lexicographic) order."""
        if radius < 0:
            raise ValueError("radius must be >= 0")
        if radius > self.ball_budget:
            raise BudgetExceeded(f"radius {radius} exceeds budget {self.ball_budget}")
        lengths = self._expand(radius)
        members = [g for g, n in lengths.items() if n <= radius]
        return tuple(sorted(members, key=lambda e: e.sort_key()))

    def sphere(self, radius: int) -> tuple:
        lengths = self._expand(radius)
        return tuple(sorted((g for g, n in lengths.items() if n == radius), key=lambda e: e.sort_key()))

    def bfs_word_length(self, g) -> int:
        """Word length by pure BFS, ignoring closed forms (budget applies)."""
        if g.group != self.group:
            raise ValueError("element belongs to a different group")
        lengths = self._lengths
        if g in lengths:
            return lengths[g]
        radius = self._explored
        while radius < self.ball_budget:
            radius += 1
            lengths = self._expand(radius)
            if g in lengths:
                return lengths[g]
        raise BudgetExceeded(f"{g!r} not reached within radius {self.ball_budget}")

    def word_length(self, g) -> int:
        if g.group != self.group:
            raise ValueError("element belongs to a different group")
        if self._is_standard:
            if isinstance(g, LatticeElement):
                return g.l1_norm()
            return len(g.letters)
        return self.bfs_word_length(g)

    def word_metric(self, g, h) -> int:
        """Left-invariant distance: the length of g^-1 h."""
        return self.word_length(g.inverse() * h)

    def to_json(self):
        return [e.to_json() for e in self.elements]


class BiLipschitzReport:
    """Outcome of a two-sided Lipschitz sweep over a ball.

    ``lower``/``upper`` are the tightest empirical constants: the min and max
    of d(f(g), f(h)) / d(g, h) over distinct pairs.  ``witness`` is a pair
    violating one of the two inequalities for the requested constant.
    """

    __slots__ = ("passed", "radius", "constant", "lower", "upper", "witness")

    def __init__(self, passed, radius, constant, lower, upper, witness):
        self.passed = passed
        self.radius = radius
        self.constant = constant
        self.lower = lower
        self.upper = upper
        self.witness = witness

    def __bool__(self):
        return self.passed

    def __repr__(self):
        status = "pass" if self.passed else f"fail at {self.witness}"
        return f"BiLipschitzReport({status}, lower={self.lower}, upper={self.upper})"

    def to_json(self):
        return {
            "pass": self.passed,
            "radius": self.radius,
            "constant": float(self.constant),
            "lower": self.lower,
            "upper": self.upper,
            "witness": None
            if self.witness is None
            else [self.witness[0].to_json(), self.witness[1].to_json()],
        }


def is_bilipschitz_on_ball(
    f: Callable,
    radius: int,
    constant: float,
    source: GeneratingSet,
    target: GeneratingSet,
) -> BiLipschitzReport:
    """Check C^-1 d(g,h) <= d(f g, f h) <= C d(g,h) for all pairs in the ball.

    Returns a report carrying the first witness pair on failure and the
    empirical distortion range either way.  Raises ValueError if ``f`` is
    undefined on some ball element.
    """
    if constant <= 0:
        raise ValueError("Lipschitz constant must be positive")
    members = source.ball(radius)
    images = {}
    for g in members:
        try:
            images[g] = f(g)
        except (KeyError, ValueError) as exc:
            raise ValueError(f"map undefined on ball element {g!r}: {exc}") from exc
    lower = None
    upper = None
    witness = None
    passed = True
    for a, b in itertools.combinations(members, 2):
        d_src = source.word_metric(a, b)
        d_tgt = target.word_metric(images[a], images[b])
        ratio = d_tgt / d_src
        lower = ratio if lower is None else min(lower, ratio)
        upper = ratio if upper is None else max(upper, ratio)
        if passed and not (d_src <= constant * d_tgt and d_tgt <= constant * d_src):
            passed = False
            witness = (a, b)
    return BiLipschitzReport(passed, radius, constant, lower, upper, witness)
