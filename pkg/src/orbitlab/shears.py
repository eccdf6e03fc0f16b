"""Floor-shear bijections of Z^d realizing determinant +-1 matrices.

``decompose_unimodular`` writes a matrix with |det| = 1 as a product of
elementary shear matrices and coordinate sign flips (row swaps needed by
pivoting are emitted as three shears plus a sign flip).  Each shear is
realized on the lattice by flooring, v_i += floor(coeff * v_j), which is
bijective coordinate surgery; the composite is a lattice bijection at
bounded distance from the matrix.

Arithmetic is exact: coefficients are Fractions (floats convert to the
binary rational they are), floors are integer floor divisions, and the
reconstruction check compares matrices entrywise over the rationals.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .groups import GeneratingSet, is_bilipschitz_on_ball

_PIVOT_FLOOR = Fraction(1, 10**12)
_INT64_SAFE = 1 << 62


@dataclass(frozen=True)
class Shear:
    """v[i] += floor(coeff * v[j]); linear part has ``coeff`` at (i, j)."""

    i: int
    j: int
    coeff: Fraction

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("shear needs distinct coordinates")
        object.__setattr__(self, "coeff", linalg.as_scalar(self.coeff))

    def matrix(self, d: int) -> linalg.Matrix:
        rows = [list(row) for row in linalg.identity(d)]
        rows[self.i][self.j] = self.coeff
        return tuple(tuple(row) for row in rows)

    def apply_int(self, v: tuple[int, ...]) -> tuple[int, ...]:
        p, q = self.coeff.numerator, self.coeff.denominator
        out = list(v)
        out[self.i] += (p * v[self.j]) // q
        return tuple(out)

    def unapply_int(self, w: tuple[int, ...]) -> tuple[int, ...]:
        # Exact inverse: coordinate j is untouched by the shear, so the same
        # floor can be subtracted back.
        p, q = self.coeff.numerator, self.coeff.denominator
        out = list(w)
        out[self.i] -= (p * w[self.j]) // q
        return tuple(out)

    def inverse_op(self) -> "Shear":
        return Shear(self.i, self.j, -self.coeff)

    def to_json(self):
        return {"shear": [self.i + 1, self.j + 1, linalg.scalar_to_str(self.coeff)]}


@dataclass(frozen=True)
class SignFlip:
    """v[i] *= -1."""

    i: int

    def matrix(self, d: int) -> linalg.Matrix:
        rows = [list(row) for row in linalg.identity(d)]
        rows[self.i][self.i] = Fraction(-1)
        return tuple(tuple(row) for row in rows)

    def apply_int(self, v: tuple[int, ...]) -> tuple[int, ...]:
        out = list(v)
        out[self.i] = -out[self.i]
        return tuple(out)

    unapply_int = apply_int

    def inverse_op(self) -> "SignFlip":
        return self

    def to_json(self):
        return {"sign_flip": self.i + 1}


ElementaryOp = Shear | SignFlip


def op_from_json(data) -> ElementaryOp:
    if "shear" in data:
        i, j, coeff = data["shear"]
        return Shear(i - 1, j - 1, linalg.as_scalar(coeff))
    return SignFlip(data["sign_flip"] - 1)


def product_matrix(ops: Sequence[ElementaryOp], d: int) -> linalg.Matrix:
    out = linalg.identity(d)
    for op in ops:
        out = linalg.mat_mul(out, op.matrix(d))
    return out


def floor_shear_apply(op: Shear, v: Sequence[int]) -> tuple[int, ...]:
    return op.apply_int(tuple(int(c) for c in v))


def decompose_unimodular(matrix, tol=1e-9) -> list[ElementaryOp]:
    """Write a |det| = 1 matrix as shears and sign flips, in product order.

    Gaussian elimination with partial pivoting; pivot-driven row swaps are
    emitted through the identity  swap = shear * shear * shear * sign_flip,
    and the diagonal left over after elimination is cleared with paired
    shears.  The emitted factors multiply back to the input within ``tol``
    (exactly, for exact input).
    """
    a = linalg.as_matrix(matrix)
    d = len(a)
    tol = Fraction(tol) if not isinstance(tol, Fraction) else tol
    determinant = linalg.det(a)
    if abs(abs(determinant) - 1) > tol:
        raise ValueError(f"matrix determinant {float(determinant)} is not +-1 within {float(tol)}")

    rows = [list(row) for row in a]
    record: list[ElementaryOp] = []

    def left_shear(i, j, lam):
        if lam == 0:
            return
        for k in range(d):
            rows[i][k] += lam * rows[j][k]
        record.append(Shear(i, j, lam))

    def left_flip(i):
        for k in range(d):
            rows[i][k] = -rows[i][k]
        record.append(SignFlip(i))

    def swap_rows(i, j):
        # P_{ij} = E_ij(1) E_ji(-1) E_ij(1) F_i; left-applied rightmost first.
        left_flip(i)
        left_shear(i, j, Fraction(1))
        left_shear(j, i, Fraction(-1))
        left_shear(i, j, Fraction(1))

    for c in range(d):
        pivot_row = max(range(c, d), key=lambda r: abs(rows[r][c]))
        if abs(rows[pivot_row][c]) < _PIVOT_FLOOR:
            raise ValueError("degenerate pivot; input is numerically singular")
        if pivot_row != c:
            swap_rows(c, pivot_row)
        for r in range(c + 1, d):
            left_shear(r, c, -rows[r][c] / rows[c][c])
    for c in range(d - 1, 0, -1):
        for r in range(c):
            left_shear(r, c, -rows[r][c] / rows[c][c])

    # rows is now diagonal; clear it pairwise with diag(s, 1/s) built from
    # six shears, pushing the remaining factor to the last coordinate.
    for c in range(d - 1):
        u = rows[c][c]
        if u == 1:
            continue
        s = 1 / u
        left_shear(c, c + 1, Fraction(-1))
        left_shear(c + 1, c, Fraction(1))
        left_shear(c, c + 1, Fraction(-1))
        left_shear(c, c + 1, s)
        left_shear(c + 1, c, -1 / s)
        left_shear(c, c + 1, s)
    if rows[d - 1][d - 1] < 0:
        left_flip(d - 1)

    emitted = [op.inverse_op() for op in record]
    reconstructed = product_matrix(emitted, d)
    gap = linalg.max_abs_diff(reconstructed, a)
    if gap > tol:
        raise ValueError(f"reconstruction drift {float(gap)} exceeds tolerance")
    return emitted


class FloorMap:
    """A bijection of Z^d given by a sequence of floor shears and sign flips.

    ``ops`` are in product order: the linear parts multiply left to right to
    the target matrix, and evaluation applies the rightmost op first.  The
    inverse reverses the sequence and undoes each floor exactly.
    """

    def __init__(self, ops: Sequence[ElementaryOp], dimension: int, target=None):
        self.ops = tuple(ops)
        self.dimension = dimension
        self.linear_part = product_matrix(self.ops, dimension)
        self.target = self.linear_part if target is None else linalg.as_matrix(target)

    def __call__(self, v: Sequence[int]) -> tuple[int, ...]:
        out = tuple(int(c) for c in v)
        if len(out) != self.dimension:
            raise ValueError("vector has wrong dimension")
        for op in reversed(self.ops):
            out = op.apply_int(out)
        return out

    def inverse(self, w: Sequence[int]) -> tuple[int, ...]:
        out = tuple(int(c) for c in w)
        for op in self.ops:
            out = op.unapply_int(out)
        return out

    def apply_array(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on an (M, d) integer array.

        Uses int64 when a static magnitude bound proves it safe, otherwise
        falls back to exact per-row Python integers.
        """
        bounds = [int(np.max(np.abs(points[:, k]))) if len(points) else 0 for k in range(self.dimension)]
        safe = True
        for op in reversed(self.ops):
            if isinstance(op, Shear):
                p, q = op.coeff.numerator, op.coeff.denominator
                if abs(p) * bounds[op.j] >= _INT64_SAFE:
                    safe = False
                    break
                bounds[op.i] += (abs(p) * bounds[op.j]) // q + 1
                if bounds[op.i] >= _INT64_SAFE:
                    safe = False
                    break
        if not safe:
            return np.array([self(tuple(row)) for row in points.tolist()], dtype=object)
        out = points.astype(np.int64).copy()
        for op in reversed(self.ops):
            if isinstance(op, Shear):
                p, q = op.coeff.numerator, op.coeff.denominator
                out[:, op.i] += (p * out[:, op.j]) // q
            else:
                out[:, op.i] = -out[:, op.i]
        return out

    def to_json(self):
        return {
            "dimension": self.dimension,
            "ops": [op.to_json() for op in self.ops],
            "target": linalg.matrix_to_json(self.target),
        }


def realize_bilipschitz(matrix, tol=1e-9) -> FloorMap:
    """Floor-shear realization of a |det| = 1 matrix as a lattice bijection."""
    a = linalg.as_matrix(matrix)
    ops = decompose_unimodular(a, tol)
    return FloorMap(ops, len(a), target=a)


def box_points(radius: int, dimension: int) -> np.ndarray:
    """All integer points of the sup-norm ball [-radius, radius]^d."""
    axes = [np.arange(-radius, radius + 1, dtype=np.int64)] * dimension
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


@dataclass(frozen=True)
class DistanceCertificate:
    """Max sup-norm gap between the realized map and its matrix on boxes.

    ``by_radius`` reports the max on nested boxes; a stable value across
    radii is the desk-scale evidence that the gap is uniformly bounded.
    """

    constant: float
    radius: int
    by_radius: dict
    witness: tuple[int, ...] | None
    exact_constant: Fraction = Fraction(0)

    def to_json(self):
        return {
            "R": self.radius,
            "constant": self.constant,
            "by_radius": {str(k): v for k, v in sorted(self.by_radius.items())},
            "witness": None if self.witness is None else list(self.witness),
        }


def bounded_distance_constant(
    floor_map: FloorMap, matrix, radius: int, probes: Sequence[int] = (10, 25, 50)
) -> DistanceCertificate:
    """max over the radius-R sup-norm ball of |f(v) - A v|_inf, exactly."""
    a = linalg.as_matrix(matrix)
    d = len(a)
    points = box_points(radius, d)
    images = floor_map.apply_array(points)

    common_den = 1
    for row in a:
        for x in row:
            common_den = common_den * x.denominator // _gcd(common_den, x.denominator)
    int_a = [[int(x * common_den) for x in row] for row in a]
    max_entry = max((abs(e) for row in int_a for e in row), default=0)

    fast = (
        images.dtype == np.int64
        and common_den * int(np.max(np.abs(images), initial=0)) < _INT64_SAFE
        and max_entry * radius * d < _INT64_SAFE
    )
    if fast:
        scaled = common_den * images - points @ np.array(int_a, dtype=np.int64).T
        gap_inf = np.max(np.abs(scaled), axis=1)
    else:
        gaps = []
        for row, img in zip(points.tolist(), images.tolist()):
            scaled = [
                common_den * int(iv) - sum(e * int(c) for e, c in zip(arow, row))
                for iv, arow in zip(img, int_a)
            ]
            gaps.append(max(abs(s) for s in scaled))
        gap_inf = np.array(gaps, dtype=object)

    by_radius = {}
    exact = {}
    for r in sorted({p for p in probes if p <= radius} | {radius}):
        mask = np.max(np.abs(points), axis=1) <= r
        exact[r] = Fraction(int(max(gap_inf[mask]))) / common_den
        by_radius[r] = float(exact[r])
    best = int(np.argmax(gap_inf))
    return DistanceCertificate(
        constant=by_radius[radius],
        radius=radius,
        by_radius=by_radius,
        witness=tuple(int(c) for c in points[best]),
        exact_constant=exact[radius],
    )


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


@dataclass(frozen=True)
class InjectivityReport:
    passed: bool
    radius: int
    witness: tuple | None

    def __bool__(self):
        return self.passed

    def to_json(self):
        return {
            "pass": self.passed,
            "R": self.radius,
            "witness": None if self.witness is None else [list(v) for v in self.witness],
        }


def injectivity_check_on_box(f, radius: int, dimension: int | None = None) -> InjectivityReport:
    """Exhaustively check injectivity of an integer map on [-R, R]^d.

    Accepts a FloorMap or any callable on integer tuples (the falsifiable
    route; FloorMaps are bijective by construction).
    """
    if dimension is None:
        if not isinstance(f, FloorMap):
            raise ValueError("dimension is required for a bare callable")
        dimension = f.dimension
    points = box_points(radius, dimension)
    if isinstance(f, FloorMap):
        images = [tuple(int(c) for c in row) for row in f.apply_array(points)]
    else:
        images = [tuple(int(c) for c in f(tuple(row))) for row in points.tolist()]
    seen: dict[tuple, tuple] = {}
    for row, image in zip(points.tolist(), images):
        if image in seen:
            return InjectivityReport(False, radius, (seen[image], tuple(row)))
        seen[image] = tuple(row)
    return InjectivityReport(True, radius, None)


@dataclass(frozen=True)
class ExtractedMap:
    """A map recovered from an orbit cocycle, with its Lipschitz certificate."""

    mapping: dict
    constant: int
    report: object

    def __call__(self, g):
        return self.mapping[g]

    def to_json(self):
        return {
            "constant": self.constant,
            "report": self.report.to_json(),
            "map": [[g.to_json(), v.to_json()] for g, v in self.mapping.items()],
        }


def extract_bilipschitz_from_cocycle(
    cocycle,
    basepoint,
    radius: int,
    source: GeneratingSet | None = None,
    target: GeneratingSet | None = None,
) -> ExtractedMap:
    """Recover g -> cocycle(g^-1, basepoint)^-1 on a ball and certify it.

    The certificate constant is the longest target word the cocycle assigns
    to a source generator anywhere on its tabled points; the returned report
    is a two-sided Lipschitz sweep with that constant.
    """
    source = source if source is not None else cocycle.source_gens
    target = target if target is not None else cocycle.target_gens
    mapping = {g: cocycle.evaluate(g.inverse(), basepoint).inverse() for g in source.ball(radius)}
    constant = 0
    for s in source.elements:
        for x in cocycle.points():
            constant = max(constant, target.word_length(cocycle.evaluate(s, x)))
    constant = max(constant, 1)
    report = is_bilipschitz_on_ball(mapping.__getitem__, radius, constant, source, target)
    return ExtractedMap(mapping=mapping, constant=constant, report=report)
