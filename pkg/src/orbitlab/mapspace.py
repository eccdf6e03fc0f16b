"""Truncated translate-closure map spaces and orbit-equivalence cocycles.

Starting from a seed bi-Lipschitz map between two finitely generated groups,
the translate closure is approximated at finite truncation: the space holds
every distinct restriction to a source ball of radius R of the translated
seeds (g, lam) . seed over a translate ball of radius R_t, with the target
offset lam parameterized around the normalizing value so that the slice of
maps fixing the identity is explicit.

Germs act under three actions: the raw translate action, the normalized
source-group action (which preserves the slice), and the normalized
target-group action.  The two orbit cocycles read off values of the germ
tables; every operation tracks the remaining reliable domain radius and
raises :class:`TruncationError` instead of extrapolating.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .groups import GeneratingSet, LatticeGroup, is_bilipschitz_on_ball
from .odometer import OdometerSpace, odometer_add
from .shears import FloorMap


class TruncationError(ValueError):
    """The requested value lies outside the reliably known truncation."""


# ---------------------------------------------------------------------------
# seeds


class IdentitySeed:
    """The identity map of a group, defined everywhere."""

    is_global = True

    def __init__(self, group):
        self.source_group = group
        self.target_group = group

    def value(self, g):
        return g

    def invert_value(self, lam):
        return lam

    def describe(self):
        return "identity"


class FloorMapSeed:
    """A floor-shear lattice bijection as a seed, defined everywhere."""

    is_global = True

    def __init__(self, floor_map: FloorMap):
        self.floor_map = floor_map
        group = LatticeGroup(floor_map.dimension)
        self.source_group = group
        self.target_group = group

    def value(self, g):
        return self.source_group.element(self.floor_map(g.coords))

    def invert_value(self, lam):
        return self.source_group.element(self.floor_map.inverse(lam.coords))

    def describe(self):
        return "floor-shear map"


class TableSeed:
    """A finite map table; honest about its bounded domain."""

    is_global = False

    def __init__(self, table: dict, source_group, target_group):
        self.table = dict(table)
        self.source_group = source_group
        self.target_group = target_group

    def value(self, g):
        try:
            return self.table[g]
        except KeyError:
            raise TruncationError(f"seed table undefined at {g!r}") from None

    def invert_value(self, lam):
        for g, v in self.table.items():
            if v == lam:
                return g
        raise TruncationError(f"{lam!r} not in seed image")

    def describe(self):
        return f"table of {len(self.table)} entries"


# ---------------------------------------------------------------------------
# germs


class MapGerm:
    """A map from a source ball into the target group, known exactly there.

    ``provenance`` records the translate data (g0, value at identity) when
    the germ arose from a globally defined seed, which lets large-scale
    cocycle values be recomputed exactly; table lookups never leave the
    stated radius.
    """

    __slots__ = ("gens", "radius", "table", "provenance", "_key")

    def __init__(self, gens: GeneratingSet, radius: int, table: dict, provenance=None):
        self.gens = gens
        self.radius = radius
        self.table = table
        self.provenance = provenance
        self._key = None

    def value(self, g):
        try:
            return self.table[g]
        except KeyError:
            raise TruncationError(
                f"germ of radius {self.radius} undefined at {g!r}"
            ) from None

    def value_at_identity(self):
        return self.table[self.gens.group.identity()]

    def is_normalized(self) -> bool:
        return self.value_at_identity().is_identity()

    def key(self):
        if self._key is None:
            items = sorted(self.table.items(), key=lambda kv: kv[0].sort_key())
            self._key = (
                self.radius,
                tuple((g.sort_key(), v.sort_key()) for g, v in items),
            )
        return self._key

    def restricted(self, radius: int) -> "MapGerm":
        if radius > self.radius:
            raise TruncationError("cannot grow a germ by restriction")
        table = {g: self.table[g] for g in self.gens.ball(radius)}
        return MapGerm(self.gens, radius, table, self.provenance)

    def matches(self, other: "MapGerm") -> bool:
        """Agreement on the common ball (the truncated notion of equality)."""
        r = min(self.radius, other.radius)
        return all(self.table[g] == other.table[g] for g in self.gens.ball(r))

    def __eq__(self, other):
        return isinstance(other, MapGerm) and other.key() == self.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        prov = "" if self.provenance is None else f", from translate {self.provenance[0]!r}"
        return f"MapGerm(radius={self.radius}{prov})"

    def to_json(self):
        return {
            "radius": self.radius,
            "table": [[g.to_json(), v.to_json()] for g, v in sorted(
                self.table.items(), key=lambda kv: kv[0].sort_key()
            )],
        }


@dataclass
class CheckResult:
    name: str
    passed: bool
    checked: int
    witnesses: list = field(default_factory=list)
    coverage: dict = field(default_factory=dict)
    notes: str = ""

    def __bool__(self):
        return self.passed

    def to_json(self):
        return {
            "id": self.name,
            "pass": self.passed,
            "checked": self.checked,
            "witnesses": [repr(w) for w in self.witnesses[:5]],
            "coverage": self.coverage,
            "notes": self.notes,
        }


# ---------------------------------------------------------------------------
# the truncated space


class TruncatedMapSpace:
    def __init__(self, seed, radius, translate_radius, offset_radius, source_gens, target_gens):
        self.seed = seed
        self.radius = radius
        self.translate_radius = translate_radius
        self.offset_radius = offset_radius
        self.source_gens = source_gens
        self.target_gens = target_gens
        self.members: tuple[MapGerm, ...] = ()
        self.slice_members: tuple[MapGerm, ...] = ()
        self._by_key: dict = {}
        self._seed_values: dict = {}
        self._lipschitz: Fraction | None = None

    # -- construction

    def _seed_value(self, g):
        if g not in self._seed_values:
            self._seed_values[g] = self.seed.value(g)
        return self._seed_values[g]

    def _normalized_translate_table(self, g0, radius) -> dict:
        """Table of the seed translated by g0 and normalized to fix identity."""
        prefix = self._seed_value(g0.inverse()).inverse()
        return {
            h: prefix * self._seed_value(g0.inverse() * h)
            for h in self.source_gens.ball(radius)
        }

    def _build(self):
        identity_target = self.target_gens.group.identity()
        germs = []
        for g0 in self.source_gens.ball(self.translate_radius):
            base = self._normalized_translate_table(g0, self.radius)
            for delta in self.target_gens.ball(self.offset_radius):
                if delta == identity_target:
                    table = base
                else:
                    table = {h: delta * v for h, v in base.items()}
                germs.append(
                    MapGerm(self.source_gens, self.radius, table, provenance=(g0, delta))
                )
        by_key = {}
        for germ in germs:
            by_key.setdefault(germ.key(), germ)
        self._by_key = by_key
        self.members = tuple(sorted(by_key.values(), key=MapGerm.key))
        self.slice_members = tuple(m for m in self.members if m.is_normalized())
        if not self.slice_members:
            raise ValueError("slice is empty; seed does not normalize")

    # -- seed Lipschitz constant (exact, over the enumeration domain)

    def lipschitz_constant(self) -> Fraction:
        if self._lipschitz is None:
            members = self.source_gens.ball(self.radius + self.translate_radius)
            values = {g: self._seed_value(g) for g in members}
            upper = Fraction(0)
            lower = None
            for a, b in itertools.combinations(members, 2):
                d_src = self.source_gens.word_metric(a, b)
                d_tgt = self.target_gens.word_metric(values[a], values[b])
                ratio = Fraction(d_tgt, d_src)
                upper = max(upper, ratio)
                lower = ratio if lower is None else min(lower, ratio)
            if lower is None or lower == 0:
                raise ValueError("seed collapses distances; not bi-Lipschitz")
            self._lipschitz = max(upper, 1 / lower, Fraction(1))
        return self._lipschitz

    # -- actions

    def act_source(self, g, germ: MapGerm) -> MapGerm:
        """Normalized source action (g . psi)(h) = psi(g^-1)^-1 psi(g^-1 h).

        Shrinks the reliable domain by the word length of g; the result
        fixes the identity, so the slice is closed under this action.
        """
        step = self.source_gens.word_length(g)
        if step > germ.radius:
            raise TruncationError(f"domain exhausted acting by {g!r}")
        prefix = germ.value(g.inverse()).inverse()
        table = {
            h: prefix * germ.value(g.inverse() * h)
            for h in self.source_gens.ball(germ.radius - step)
        }
        provenance = None
        if germ.provenance is not None:
            provenance = (g * germ.provenance[0], self.target_gens.group.identity())
        return MapGerm(self.source_gens, germ.radius - step, table, provenance)

    def act_target(self, lam, germ: MapGerm) -> MapGerm:
        """Normalized target action (lam . psi)(h) = lam psi(psi^-1(lam^-1) h)."""
        anchor = self.partial_inverse(germ, lam.inverse())
        step = self.source_gens.word_length(anchor)
        if step > germ.radius:
            raise TruncationError(f"domain exhausted acting by {lam!r}")
        table = {}
        for h in self.source_gens.ball(germ.radius - step):
            arg = anchor * h
            table[h] = lam * germ.value(arg)
        provenance = None
        if germ.provenance is not None:
            provenance = (
                anchor.inverse() * germ.provenance[0],
                self.target_gens.group.identity(),
            )
        return MapGerm(self.source_gens, germ.radius - step, table, provenance)

    def raw_translate(self, g, lam, germ: MapGerm) -> MapGerm:
        """The raw translate action ((g, lam) psi)(h) = lam psi(g^-1 h)."""
        step = self.source_gens.word_length(g)
        if step > germ.radius:
            raise TruncationError(f"domain exhausted translating by {g!r}")
        table = {
            h: lam * germ.value(g.inverse() * h)
            for h in self.source_gens.ball(germ.radius - step)
        }
        provenance = None
        if germ.provenance is not None:
            new_g0 = g * germ.provenance[0]
            provenance = (new_g0, table[self.source_gens.group.identity()])
        return MapGerm(self.source_gens, germ.radius - step, table, provenance)

    def partial_inverse(self, germ: MapGerm, target_value):
        """The unique ball element mapped to ``target_value`` by the germ."""
        for g, v in germ.table.items():
            if v == target_value:
                return g
        raise TruncationError(f"{target_value!r} not in germ image at this truncation")

    # -- cocycles

    def forward_cocycle(self, g, germ: MapGerm):
        """Source-to-target cocycle: psi(g^-1)^-1."""
        return germ.value(g.inverse()).inverse()

    def backward_cocycle(self, lam, germ: MapGerm):
        """Target-to-source cocycle: (psi^-1(lam^-1))^-1."""
        return self.partial_inverse(germ, lam.inverse()).inverse()

    def global_forward_cocycle(self, g, germ: MapGerm):
        """Forward cocycle through the recorded translate, exact at any g."""
        if germ.provenance is None or not self.seed.is_global:
            raise TruncationError("germ has no globally defined representative")
        g0, delta = germ.provenance
        value = delta * self._seed_value(g0.inverse()).inverse() * self._seed_value(
            g0.inverse() * g.inverse()
        )
        return value.inverse()

    def global_act_source(self, g, germ: MapGerm) -> MapGerm:
        """Source action through the recorded translate: full-radius result."""
        if germ.provenance is None or not self.seed.is_global:
            raise TruncationError("germ has no globally defined representative")
        g0, _ = germ.provenance
        new_g0 = g * g0
        table = self._normalized_translate_table(new_g0, self.radius)
        return MapGerm(
            self.source_gens,
            self.radius,
            table,
            provenance=(new_g0, self.target_gens.group.identity()),
        )

    def find_member(self, germ: MapGerm) -> MapGerm | None:
        """Locate a stored germ agreeing with ``germ`` on the common ball."""
        exact = self._by_key.get(germ.key())
        if exact is not None:
            return exact
        for member in self.members:
            if member.matches(germ):
                return member
        return None

    def find_slice_match(self, germ: MapGerm) -> MapGerm | None:
        for member in self.slice_members:
            if member.matches(germ):
                return member
        return None

    def stabilization_report(self, translate_radii: Sequence[int]) -> dict[int, int]:
        """|members| as the translate radius grows (closure approximation)."""
        sizes = {}
        for rt in sorted(translate_radii):
            sub = build_translate_space(
                self.seed,
                self.radius,
                rt,
                offset_radius=self.offset_radius,
                source_gens=self.source_gens,
                target_gens=self.target_gens,
            )
            sizes[rt] = len(sub.members)
        return sizes

    def to_json(self):
        return {
            "seed": self.seed.describe(),
            "R": self.radius,
            "R_t": self.translate_radius,
            "offset_radius": self.offset_radius,
            "members": len(self.members),
            "slice": len(self.slice_members),
            "lipschitz_constant": float(self.lipschitz_constant()),
        }


def build_translate_space(
    seed,
    radius: int,
    translate_radius: int,
    offset_radius: int | None = None,
    source_gens: GeneratingSet | None = None,
    target_gens: GeneratingSet | None = None,
) -> TruncatedMapSpace:
    """Enumerate distinct translated-seed restrictions and their slice.

    The seed must be defined on the ball of radius R + R_t.  Offsets of the
    target coordinate range over the ball of ``offset_radius`` (default R_t)
    around the normalizing value, so the slice is always reachable.
    """
    if radius < 0 or translate_radius < 0:
        raise ValueError("radii must be >= 0")
    offset_radius = translate_radius if offset_radius is None else offset_radius
    source_gens = source_gens or seed.source_group.standard_generators()
    target_gens = target_gens or seed.target_group.standard_generators()
    if not seed.is_global:
        needed = source_gens.ball(radius + translate_radius)
        for g in needed:
            seed.value(g)  # raises TruncationError if the table is too small
    space = TruncatedMapSpace(
        seed, radius, translate_radius, offset_radius, source_gens, target_gens
    )
    space._build()
    return space


# ---------------------------------------------------------------------------
# cocycle tables


class CocycleTable:
    """A finite exact table of a cocycle, with optional exact extension.

    Entries are cached per (group element, point key).  ``evaluate`` consults
    corruption overrides first (negative controls), then the cache, then the
    exact evaluator; a missing entry with no evaluator is a truncation error.
    """

    def __init__(
        self,
        kind: str,
        source_gens: GeneratingSet,
        target_gens: GeneratingSet,
        points: Sequence,
        evaluator: Callable | None,
        point_action: Callable | None,
        radius: int,
        point_key: Callable = lambda x: x,
        meta: dict | None = None,
    ):
        self.kind = kind
        self.source_gens = source_gens
        self.target_gens = target_gens
        self._points = tuple(points)
        self._evaluator = evaluator
        self._point_action = point_action
        self.radius = radius
        self._point_key = point_key
        self.meta = dict(meta or {})
        self._entries: dict = {}
        self._overrides: dict = {}

    def points(self) -> tuple:
        return self._points

    def materialize(self, radius: int | None = None) -> "CocycleTable":
        radius = self.radius if radius is None else radius
        for g in self.source_gens.ball(radius):
            for x in self._points:
                self.evaluate(g, x)
        return self

    def evaluate(self, g, x):
        key = (g, self._point_key(x))
        if key in self._overrides:
            return self._overrides[key]
        if key in self._entries:
            return self._entries[key]
        if self._evaluator is None:
            raise TruncationError(f"cocycle table has no entry for {key!r}")
        value = self._evaluator(g, x)
        self._entries[key] = value
        return value

    def act(self, g, x):
        if self._point_action is None:
            raise TruncationError("cocycle table has no point action")
        return self._point_action(g, x)

    def with_override(self, g, x, value) -> "CocycleTable":
        clone = CocycleTable(
            self.kind + "+corrupted",
            self.source_gens,
            self.target_gens,
            self._points,
            self._evaluator,
            self._point_action,
            self.radius,
            self._point_key,
            self.meta,
        )
        clone._entries = dict(self._entries)
        clone._overrides = dict(self._overrides)
        clone._overrides[(g, self._point_key(x))] = value
        return clone

    def to_json(self):
        return {
            "kind": self.kind,
            "radius": self.radius,
            "points": len(self._points),
            "entries": len(self._entries),
            "corrupted": bool(self._overrides),
        }


class TrivialPoint:
    """The single point of the trivial one-point system."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "<point>"

    def to_json(self):
        return "point"


def trivial_cocycle_table(gens: GeneratingSet, radius: int = 8) -> CocycleTable:
    point = TrivialPoint()
    return CocycleTable(
        kind="trivial",
        source_gens=gens,
        target_gens=gens,
        points=(point,),
        evaluator=lambda g, x: g,
        point_action=lambda g, x: x,
        radius=radius,
        meta={"constant": 0},
    )


def constant_matrix_cocycle_table(
    matrix, space: OdometerSpace, points: Sequence, radius: int = 8
) -> CocycleTable:
    """The cocycle of a matrix automorphism of the odometer: g -> A g, exactly."""
    from . import linalg

    mat = linalg.as_matrix(matrix)
    if not linalg.is_integral(mat):
        raise ValueError("constant odometer cocycle needs an integer matrix")
    if abs(linalg.det(mat)) != 1:
        raise ValueError("matrix determinant must be +-1")
    d = space.dimension
    group = LatticeGroup(d)
    gens = group.standard_generators()

    def evaluate(g, x):
        image = linalg.mat_vec(mat, g.coords)
        return group.element(int(v) for v in image)

    return CocycleTable(
        kind="constant",
        source_gens=gens,
        target_gens=gens,
        points=tuple(points),
        evaluator=evaluate,
        point_action=lambda g, x: odometer_add(x, g.coords, space),
        radius=radius,
        point_key=lambda x: x.digits,
        meta={"matrix": mat, "constant": 0},
    )


def source_point_action(space: TruncatedMapSpace):
    """Source action on germs: exact through provenance for global seeds,
    truncated (with promotion back to a stored full-radius slice member when
    one matches) otherwise."""

    def act(g, germ):
        if space.seed.is_global and germ.provenance is not None:
            return space.global_act_source(g, germ)
        moved = space.act_source(g, germ)
        match = space.find_slice_match(moved)
        return match if match is not None else moved

    return act


def forward_cocycle_table(space: TruncatedMapSpace, radius: int, constant=None) -> CocycleTable:
    """Source-to-target orbit cocycle over the slice, exact on the stated ball
    and extended exactly through translate provenance beyond it."""

    def evaluate(g, germ):
        if space.source_gens.word_length(g) <= germ.radius:
            return space.forward_cocycle(g, germ)
        return space.global_forward_cocycle(g, germ)

    meta = {"constant": constant}
    if isinstance(space.seed, FloorMapSeed):
        meta["matrix"] = space.seed.floor_map.target
    return CocycleTable(
        kind="orbit-forward",
        source_gens=space.source_gens,
        target_gens=space.target_gens,
        points=space.slice_members,
        evaluator=evaluate,
        point_action=source_point_action(space),
        radius=radius,
        point_key=MapGerm.key,
        meta=meta,
    )


def backward_cocycle_table(space: TruncatedMapSpace, radius: int, constant=None) -> CocycleTable:
    """Target-to-source orbit cocycle over the slice."""

    def evaluate(lam, germ):
        try:
            return space.backward_cocycle(lam, germ)
        except TruncationError:
            if germ.provenance is None or not space.seed.is_global:
                raise
            g0, delta = germ.provenance
            if not delta.is_identity():
                raise
            # psi^-1(mu) = g0 * seed^-1(seed(g0^-1) * mu); cocycle inverts it.
            mu = lam.inverse()
            anchor = g0 * space.seed.invert_value(
                space._seed_value(g0.inverse()) * mu
            )
            return anchor.inverse()

    meta = {"constant": constant}
    forward_act = source_point_action(space)

    def act(lam, germ):
        # lam . psi equals b . psi for b the backward cocycle value.
        return forward_act(evaluate(lam, germ), germ)

    return CocycleTable(
        kind="orbit-backward",
        source_gens=space.target_gens,
        target_gens=space.source_gens,
        points=space.slice_members,
        evaluator=evaluate,
        point_action=act,
        radius=radius,
        point_key=MapGerm.key,
        meta=meta,
    )


# ---------------------------------------------------------------------------
# checks


def check_lipschitz_closure(space: TruncatedMapSpace) -> CheckResult:
    """Every member germ satisfies the seed's two-sided Lipschitz bound."""
    constant = space.lipschitz_constant()
    witnesses = []
    for germ in space.members:
        report = is_bilipschitz_on_ball(
            germ.value, germ.radius, constant, space.source_gens, space.target_gens
        )
        if not report.passed:
            witnesses.append((germ, report.witness))
    return CheckResult(
        name="lipschitz-closure",
        passed=not witnesses,
        checked=len(space.members),
        witnesses=witnesses,
        coverage={"R": space.radius, "R_t": space.translate_radius},
        notes=f"constant {float(constant):.4g}",
    )


def check_action_law(space: TruncatedMapSpace, window: int) -> CheckResult:
    """(g h) . psi == g . (h . psi) wherever both sides are defined."""
    checked = 0
    witnesses = []
    ball = space.source_gens.ball(window)
    for psi in space.slice_members:
        for g, h in itertools.product(ball, repeat=2):
            if space.source_gens.word_length(g) + space.source_gens.word_length(h) > psi.radius:
                continue
            combined = space.act_source(g * h, psi)
            stepwise = space.act_source(g, space.act_source(h, psi))
            checked += 1
            if not combined.matches(stepwise):
                witnesses.append((g, h, psi))
    return CheckResult(
        name="action-law",
        passed=not witnesses,
        checked=checked,
        witnesses=witnesses,
        coverage={"W": window},
    )


def check_cocycle_identity(
    space: TruncatedMapSpace, table: CocycleTable, radius: int
) -> CheckResult:
    """cocycle(g h, psi) == cocycle(g, h . psi) * cocycle(h, psi), exhaustively."""
    if table.radius < 2 * radius:
        raise TruncationError(
            f"table covers radius {table.radius}, identity sweep needs {2 * radius}"
        )
    ball = space.source_gens.ball(radius)
    checked = 0
    witnesses = []
    for psi in space.slice_members:
        for g, h in itertools.product(ball, repeat=2):
            acted = space.act_source(h, psi)
            lhs = table.evaluate(g * h, psi)
            rhs = table.evaluate(g, acted) * table.evaluate(h, psi)
            checked += 1
            if lhs != rhs:
                witnesses.append((g, h, psi))
    return CheckResult(
        name="cocycle-identity",
        passed=not witnesses,
        checked=checked,
        witnesses=witnesses,
        coverage={"R": radius, "table_radius": table.radius},
    )


def check_fundamental_domain(space: TruncatedMapSpace, window: int) -> CheckResult:
    """Windowed orbits of members meet the slice exactly once, both actions.

    Uniqueness is checked for every member; existence is asserted for the
    members whose predicted slice hit lies inside the window (computed
    through the seed when it is globally invertible).
    """
    if window > space.radius:
        raise TruncationError("window exceeds the truncation radius")
    ball = space.source_gens.ball(window)
    identity_target = space.target_gens.group.identity()
    checked = 0
    witnesses = []
    interior_checked = 0
    for omega in space.members:
        hits = []
        for g in ball:
            if omega.value(g.inverse()) == identity_target:
                translated = space.raw_translate(g, identity_target, omega)
                if space.find_slice_match(translated) is None:
                    witnesses.append(("source-hit-not-in-slice", g, omega))
                hits.append(g)
        checked += 1
        if len(hits) > 1:
            witnesses.append(("source-multiple-hits", omega, hits))
        expected = _predicted_source_hit(space, omega)
        if expected is not None and space.source_gens.word_length(expected) <= window:
            interior_checked += 1
            if len(hits) != 1:
                witnesses.append(("source-missing-hit", omega, expected))

        # Target direction: the unique candidate is the inverse of the value
        # at the identity; it hits inside the window iff that value is short.
        delta = omega.value_at_identity()
        if space.target_gens.word_length(delta) <= window:
            interior_checked += 1
            normalized = space.raw_translate(
                space.source_gens.group.identity(), delta.inverse(), omega
            )
            if space.find_slice_match(normalized) is None:
                witnesses.append(("target-hit-not-in-slice", delta, omega))
        lam_hits = [
            lam
            for lam in space.target_gens.ball(window)
            if (lam * delta).is_identity()
        ]
        if len(lam_hits) > 1:
            witnesses.append(("target-multiple-hits", omega, lam_hits))
    return CheckResult(
        name="fundamental-domain",
        passed=not witnesses,
        checked=checked,
        witnesses=witnesses,
        coverage={"W": window, "interior": interior_checked},
    )


def _predicted_source_hit(space: TruncatedMapSpace, omega: MapGerm):
    if omega.provenance is None or not space.seed.is_global:
        return None
    g0, delta = omega.provenance
    try:
        anchor = g0 * space.seed.invert_value(
            space._seed_value(g0.inverse()) * delta.inverse()
        )
    except TruncationError:
        return None
    return anchor.inverse()


def check_orbit_equality(space: TruncatedMapSpace, psi: MapGerm, window: int) -> CheckResult:
    """The windowed source orbit of a slice point equals its target orbit.

    Source germs g . psi correspond to target germs lam . psi at
    lam = psi(g^-1)^-1; at truncation the two germ sets agree verbatim.
    The sweep also round-trips each forward cocycle value through the
    backward cocycle.
    """
    source_orbit = {}
    for g in space.source_gens.ball(window):
        germ = space.act_source(g, psi)
        source_orbit[germ.key()] = g
    target_orbit = {}
    for h in space.source_gens.ball(window):
        lam = psi.value(h).inverse()
        germ = space.act_target(lam, psi)
        target_orbit[germ.key()] = lam

    consistent = 0
    witnesses = []
    for g in space.source_gens.ball(window):
        lam = space.forward_cocycle(g, psi)
        back = space.backward_cocycle(lam, psi)
        consistent += 1
        if back != g:
            witnesses.append(("cocycle-roundtrip", g, lam, back))
    if set(source_orbit) != set(target_orbit):
        witnesses.append(
            (
                "orbit-sets-differ",
                sorted(map(repr, source_orbit.values())),
                sorted(map(repr, target_orbit.values())),
            )
        )
    return CheckResult(
        name="orbit-equality",
        passed=not witnesses,
        checked=len(source_orbit) + consistent,
        witnesses=witnesses,
        coverage={
            "W": window,
            "source_orbit": len(source_orbit),
            "target_orbit": len(target_orbit),
            "source_set": sorted(repr(g) for g in source_orbit.values()),
            "target_set": sorted(repr(lam) for lam in target_orbit.values()),
        },
    )


# ---------------------------------------------------------------------------
# freeness-forcing product


class ProductSystem:
    """Diagonal product of the truncated space with an odometer.

    The odometer must have one coordinate per source and target lattice
    coordinate; the source group moves the germ and adds (g, cocycle value)
    on the odometer side, which destroys every finite-window fixed point.
    """

    def __init__(self, space: TruncatedMapSpace, odometer: OdometerSpace):
        src = space.source_gens.group
        tgt = space.target_gens.group
        if not isinstance(src, LatticeGroup) or not isinstance(tgt, LatticeGroup):
            raise ValueError("freeness forcing is implemented for lattice groups")
        if odometer.dimension != src.dimension + tgt.dimension:
            raise ValueError(
                f"odometer dimension {odometer.dimension} != "
                f"{src.dimension} + {tgt.dimension}"
            )
        self.space = space
        self.odometer = odometer

    def slice_pairs(self, points: Iterable) -> list:
        return [(psi, y) for psi in self.space.slice_members for y in points]

    def act(self, g, pair):
        psi, y = pair
        lam = self.space.forward_cocycle(g, psi)
        moved = self.space.act_source(g, psi)
        vector = tuple(g.coords) + tuple(lam.coords)
        return moved, odometer_add(y, vector, self.odometer)

    def freeness_check(self, window: int, pairs: Sequence) -> CheckResult:
        identity = self.space.source_gens.group.identity()
        checked = 0
        witnesses = []
        for g in self.space.source_gens.ball(window):
            if g == identity:
                continue
            for psi, y in pairs:
                moved_psi, moved_y = self.act(g, (psi, y))
                checked += 1
                if moved_y == y and moved_psi.matches(psi):
                    witnesses.append((g, psi, y))
        return CheckResult(
            name="forced-freeness",
            passed=not witnesses,
            checked=checked,
            witnesses=witnesses,
            coverage={"W": window, "pairs": len(list(pairs))},
        )


def force_freeness(
    space: TruncatedMapSpace,
    odometer: OdometerSpace,
    window: int,
    sample_points: Sequence | None = None,
) -> tuple[ProductSystem, CheckResult]:
    """Build the diagonal product and certify window-freeness on sample pairs."""
    product = ProductSystem(space, odometer)
    if sample_points is None:
        sample_points = [odometer.zero()]
    pairs = product.slice_pairs(sample_points)
    verdict = product.freeness_check(window, pairs)
    return product, verdict
