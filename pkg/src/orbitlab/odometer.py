"""Product p-adic odometers with exact digit arithmetic.

A space is a product of d odometers with bases p_1..p_d, truncated at depth
N.  A point stores N digits per coordinate, least-significant first, so a
depth-N point is the cylinder of all its extensions; adding an integer
vector and acting by a unimodular integer matrix are both well defined on
truncations because they only depend on the value mod p^N.

Clopen sets are finite disjoint unions of cylinders (per-coordinate digit
prefixes) and carry an exact rational Haar measure.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import linalg


class OdometerSpace:
    __slots__ = ("bases", "depth")

    def __init__(self, bases: Sequence[int], depth: int):
        bases = tuple(int(p) for p in bases)
        if not bases or any(p < 2 for p in bases):
            raise ValueError("all bases must be >= 2")
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.bases = bases
        self.depth = depth

    @property
    def dimension(self) -> int:
        return len(self.bases)

    @property
    def moduli(self) -> tuple[int, ...]:
        return tuple(p**self.depth for p in self.bases)

    def __eq__(self, other):
        return (
            isinstance(other, OdometerSpace)
            and other.bases == self.bases
            and other.depth == self.depth
        )

    def __hash__(self):
        return hash((self.bases, self.depth))

    def __repr__(self):
        return f"OdometerSpace(bases={self.bases}, depth={self.depth})"

    def digits_of(self, value: int, coord: int, length: int | None = None) -> tuple[int, ...]:
        """Base-p digit string of value mod p^length, least-significant first."""
        length = self.depth if length is None else length
        p = self.bases[coord]
        value %= p**length
        out = []
        for _ in range(length):
            out.append(value % p)
            value //= p
        return tuple(out)

    def point_from_values(self, values: Sequence[int]) -> "DigitPoint":
        if len(values) != self.dimension:
            raise ValueError("value vector has wrong dimension")
        return DigitPoint(tuple(self.digits_of(v, i) for i, v in enumerate(values)))

    def values_of(self, point: "DigitPoint") -> tuple[int, ...]:
        return tuple(
            sum(d * p**k for k, d in enumerate(digits))
            for p, digits in zip(self.bases, point.digits)
        )

    def zero(self) -> "DigitPoint":
        return self.point_from_values((0,) * self.dimension)

    def point_count(self) -> int:
        n = 1
        for m in self.moduli:
            n *= m
        return n

    def all_points(self, budget: int = 1 << 20):
        """Iterate every depth-N point; refuses spaces larger than the budget."""
        if self.point_count() > budget:
            raise ValueError(f"space has {self.point_count()} points, over budget {budget}")
        for values in itertools.product(*(range(m) for m in self.moduli)):
            yield self.point_from_values(values)

    def random_point(self, rng) -> "DigitPoint":
        return self.point_from_values([rng.randrange(m) for m in self.moduli])

    def validate_point(self, point: "DigitPoint") -> None:
        if len(point.digits) != self.dimension:
            raise ValueError("point has wrong dimension")
        for digits, p in zip(point.digits, self.bases):
            if len(digits) != self.depth:
                raise ValueError("point has wrong depth")
            if any(not 0 <= d < p for d in digits):
                raise ValueError("digit out of range")

    def whole_space(self) -> "ClopenSet":
        return ClopenSet((Cylinder(((),) * self.dimension),))

    def depth_cylinder(self, point: "DigitPoint", k: int) -> "Cylinder":
        """The depth-k cylinder containing a point."""
        return Cylinder(tuple(digits[:k] for digits in point.digits))


@dataclass(frozen=True)
class DigitPoint:
    """Digit strings per coordinate, least-significant first."""

    digits: tuple[tuple[int, ...], ...]

    def to_json(self):
        return ["".join(_digit_char(d) for d in coord) for coord in self.digits]

    @staticmethod
    def from_json(data) -> "DigitPoint":
        return DigitPoint(tuple(tuple(int(ch, 36) for ch in coord) for coord in data))


def _digit_char(d: int) -> str:
    if d > 9:
        raise ValueError("digit serialization supports bases up to 10")
    return str(d)


@dataclass(frozen=True)
class Cylinder:
    """Per-coordinate digit prefixes; an empty prefix leaves a coordinate free."""

    prefixes: tuple[tuple[int, ...], ...]

    def contains(self, point: DigitPoint) -> bool:
        return all(
            digits[: len(prefix)] == prefix
            for prefix, digits in zip(self.prefixes, point.digits)
        )

    def intersect(self, other: "Cylinder") -> "Cylinder | None":
        out = []
        for a, b in zip(self.prefixes, other.prefixes):
            short, long = (a, b) if len(a) <= len(b) else (b, a)
            if long[: len(short)] != short:
                return None
            out.append(long)
        return Cylinder(tuple(out))

    def overlaps(self, other: "Cylinder") -> bool:
        return self.intersect(other) is not None

    def measure(self, space: OdometerSpace) -> Fraction:
        m = Fraction(1)
        for p, prefix in zip(space.bases, self.prefixes):
            m /= p ** len(prefix)
        return m

    def translate(self, vector: Sequence[int], space: OdometerSpace) -> "Cylinder":
        """Image under adding ``vector``: prefixes shift mod p^len, exactly."""
        out = []
        for prefix, v, p, coord in zip(self.prefixes, vector, space.bases, range(space.dimension)):
            if not prefix:
                out.append(())
                continue
            value = sum(d * p**k for k, d in enumerate(prefix))
            out.append(space.digits_of(value + int(v), coord, len(prefix)))
        return Cylinder(tuple(out))

    def validate(self, space: OdometerSpace) -> None:
        if len(self.prefixes) != space.dimension:
            raise ValueError("cylinder has wrong dimension")
        for prefix, p in zip(self.prefixes, space.bases):
            if len(prefix) > space.depth:
                raise ValueError("prefix longer than truncation depth")
            if any(not 0 <= d < p for d in prefix):
                raise ValueError("digit out of range in prefix")

    def sort_key(self):
        return tuple((len(p), p) for p in self.prefixes)

    def to_json(self):
        return [list(p) for p in self.prefixes]


class ClopenSet:
    """A finite union of pairwise disjoint cylinders."""

    __slots__ = ("cylinders",)

    def __init__(self, cylinders: Iterable[Cylinder]):
        cylinders = tuple(sorted(cylinders, key=Cylinder.sort_key))
        for a, b in itertools.combinations(cylinders, 2):
            if a.overlaps(b):
                raise ValueError(f"cylinders overlap: {a} and {b}")
        self.cylinders = cylinders

    def is_empty(self) -> bool:
        return not self.cylinders

    def contains(self, point: DigitPoint) -> bool:
        return any(c.contains(point) for c in self.cylinders)

    def measure(self, space: OdometerSpace) -> Fraction:
        return sum((c.measure(space) for c in self.cylinders), Fraction(0))

    def translate(self, vector: Sequence[int], space: OdometerSpace) -> "ClopenSet":
        return ClopenSet(c.translate(vector, space) for c in self.cylinders)

    def intersect(self, other: "ClopenSet") -> "ClopenSet":
        pieces = []
        for a in self.cylinders:
            for b in other.cylinders:
                c = a.intersect(b)
                if c is not None:
                    pieces.append(c)
        return ClopenSet(pieces)

    def overlaps(self, other: "ClopenSet") -> bool:
        return any(a.overlaps(b) for a in self.cylinders for b in other.cylinders)

    def validate(self, space: OdometerSpace) -> None:
        for c in self.cylinders:
            c.validate(space)

    def __eq__(self, other):
        return isinstance(other, ClopenSet) and other.cylinders == self.cylinders

    def __hash__(self):
        return hash(self.cylinders)

    def __repr__(self):
        return f"ClopenSet({list(self.cylinders)!r})"

    def to_json(self):
        return [c.to_json() for c in self.cylinders]


def measure_to_json(measure: Fraction) -> str:
    return f"{measure.numerator}/{measure.denominator}"


def measure_from_json(text: str) -> Fraction:
    return Fraction(text)


def odometer_add(x: DigitPoint, vector: Sequence[int], space: OdometerSpace) -> DigitPoint:
    """Add an integer vector coordinatewise, with carry, exactly mod p^N."""
    if len(vector) != space.dimension:
        raise ValueError("vector has wrong dimension")
    space.validate_point(x)
    values = space.values_of(x)
    return space.point_from_values([v + int(g) for v, g in zip(values, vector)])


def haar_measure(clopen: ClopenSet, space: OdometerSpace) -> Fraction:
    clopen.validate(space)
    return clopen.measure(space)


def _check_partition(parts: Sequence[ClopenSet], space: OdometerSpace) -> None:
    total = Fraction(0)
    for part in parts:
        part.validate(space)
        total += part.measure(space)
    for a, b in itertools.combinations(parts, 2):
        if a.overlaps(b):
            raise ValueError("partition members overlap")
    if total != 1:
        raise ValueError(f"partition measures sum to {total}, not 1")


def refine_common(partitions: Sequence[Sequence[ClopenSet]], space: OdometerSpace) -> list[ClopenSet]:
    """Coarsest common refinement of several clopen partitions of the space.

    Atoms are the nonempty intersections of one member from each input;
    inputs are validated as genuine partitions first.
    """
    for partition in partitions:
        _check_partition(partition, space)
    atoms = [space.whole_space()]
    for partition in partitions:
        atoms = [
            piece
            for atom in atoms
            for member in partition
            if not (piece := atom.intersect(member)).is_empty()
        ]
    return atoms


def matrix_act(matrix, x: DigitPoint, space: OdometerSpace) -> DigitPoint:
    """Act by a det +-1 integer matrix on truncated values, mod p^N.

    Requires a single base across coordinates, since the matrix mixes them.
    """
    mat = linalg.as_matrix(matrix)
    if len(set(space.bases)) != 1:
        raise ValueError("matrix action needs equal bases in all coordinates")
    if len(mat) != space.dimension:
        raise ValueError("matrix dimension mismatch")
    if not linalg.is_integral(mat):
        raise ValueError("matrix must have integer entries")
    if abs(linalg.det(mat)) != 1:
        raise ValueError(f"matrix determinant {linalg.det(mat)} is not +-1")
    space.validate_point(x)
    values = space.values_of(x)
    image = linalg.mat_vec(mat, values)
    return space.point_from_values([int(v) for v in image])


@dataclass(frozen=True)
class Verdict:
    passed: bool
    detail: str
    witness: object = None

    def __bool__(self):
        return self.passed

    def to_json(self):
        witness = self.witness
        if witness is not None and hasattr(witness, "to_json"):
            witness = witness.to_json()
        return {"pass": self.passed, "detail": self.detail, "witness": witness}


def bijectivity_check_at_depth(matrix, space: OdometerSpace, budget: int = 1 << 20) -> Verdict:
    """Verify the matrix action permutes all p^(N d) depth-N points.

    A permutation at depth N means every depth-k cylinder pulls back to a set
    of equal Haar measure, which is the truncated form of measure preservation.
    """
    mat = linalg.as_matrix(matrix)
    if not linalg.is_integral(mat):
        raise ValueError("matrix must have integer entries")
    if abs(linalg.det(mat)) != 1:
        raise ValueError(f"matrix determinant {linalg.det(mat)} is not +-1")
    count = space.point_count()
    if count > budget:
        raise ValueError(f"depth sweep needs {count} points, over budget {budget}")
    if len(set(space.bases)) != 1:
        raise ValueError("matrix action needs equal bases in all coordinates")
    modulus = space.moduli[0]
    rows = [[int(v) for v in row] for row in mat]
    seen = set()
    for values in itertools.product(range(modulus), repeat=space.dimension):
        image = tuple(
            sum(r * v for r, v in zip(row, values)) % modulus for row in rows
        )
        if image in seen:
            return Verdict(False, "collision at depth-N image", witness=values)
        seen.add(image)
    return Verdict(True, f"permutation of {count} depth-{space.depth} points")


def minimality_witness(space: OdometerSpace, k: int, budget: int = 1 << 20) -> Verdict:
    """Walk the orbit of zero and confirm every depth-k cylinder is visited.

    The odometer orbit is a full cyclic group mod p_i^k in each coordinate, so
    prod p_i^k steps per coordinate suffice.
    """
    if k < 0 or k > space.depth:
        raise ValueError("depth k must lie in [0, N]")
    if k == 0:
        return Verdict(True, "depth 0 has a single cylinder")
    ranges = [p**k for p in space.bases]
    total = 1
    for r in ranges:
        total *= r
    if total > budget:
        raise ValueError(f"sweep needs {total} cylinders, over budget {budget}")
    zero = space.zero()
    visited = set()
    for steps in itertools.product(*(range(r) for r in ranges)):
        point = odometer_add(zero, steps, space)
        visited.add(tuple(digits[:k] for digits in point.digits))
    if len(visited) != total:
        return Verdict(False, f"only {len(visited)} of {total} depth-{k} cylinders visited")
    return Verdict(True, f"all {total} depth-{k} cylinders visited")


def wandering_check(clopen: ClopenSet, radius: int, space: OdometerSpace):
    """Search the L1 ball for g != 0 with (U + g) meeting U.

    Returns the witness vector, or None when no witness exists within the
    radius (the report is honest about its bounded search).  For nonempty U a
    witness always exists once the radius reaches max p_i^N.
    """
    clopen.validate(space)
    if clopen.is_empty():
        raise ValueError("wandering check expects a nonempty clopen set")
    d = space.dimension
    candidates = sorted(
        (
            coords
            for coords in itertools.product(range(-radius, radius + 1), repeat=d)
            if 0 < sum(abs(c) for c in coords) <= radius
        ),
        key=lambda c: (sum(abs(x) for x in c), c),
    )
    for coords in candidates:
        if clopen.translate(coords, space).overlaps(clopen):
            return coords
    return None
