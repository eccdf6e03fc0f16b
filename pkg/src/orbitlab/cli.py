"""Batch driver: configure experiments, run verification suites, emit JSON.

Each subcommand builds one report: a single JSON document with a stable
schema, one entry per check, and an aggregate verdict.  Exit codes: 0 when
every check passes, 1 on a verification failure, 2 on configuration or
precondition errors.  Identical configuration and seed produce a
byte-identical report.
"""
from __future__ import annotations

import json
import random
import sys
from fractions import Fraction

import click

from . import linalg
from .fullgroup import FullGroupElement, ad_realization_check
from .groups import LatticeGroup
from .invariants import (
    check_det_pm1,
    functoriality_check,
    multiplicativity_check,
    recover_invariant_matrix,
)
from .mapspace import (
    FloorMapSeed,
    IdentitySeed,
    build_translate_space,
    check_action_law,
    check_cocycle_identity,
    check_fundamental_domain,
    check_lipschitz_closure,
    check_orbit_equality,
    force_freeness,
    forward_cocycle_table,
)
from .morphisms import (
    check_equivariance,
    check_inverse_equivariance,
    check_inverse_identities,
    matrix_morphism,
    orbit_morphism,
)
from .odometer import (
    Cylinder,
    OdometerSpace,
    bijectivity_check_at_depth,
    matrix_act,
    minimality_witness,
    odometer_add,
)
from .shears import bounded_distance_constant, decompose_unimodular, realize_bilipschitz

SCHEMA = "orbitlab-report/1"


class CheckFailure(Exception):
    pass


def _emit(report: dict, out, as_json: bool) -> int:
    text = json.dumps(report, sort_keys=True, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    if as_json:
        click.echo(text)
    else:
        for check in report["checks"]:
            status = "PASS" if check["pass"] else "FAIL"
            click.echo(f"{status}  {check['id']}  {check.get('notes', '')}".rstrip())
        click.echo(("all checks passed" if report["pass"] else "FAILURES present"))
    return 0 if report["pass"] else 1


def _report(command: str, config: dict, checks: list) -> dict:
    entries = [c.to_json() if hasattr(c, "to_json") else c for c in checks]
    return {
        "schema": SCHEMA,
        "command": command,
        "config": config,
        "checks": entries,
        "pass": all(c["pass"] for c in entries),
    }


@click.group()
def main():
    """Verification experiments for orbit equivalence at desk scale."""


def _common(fn):
    fn = click.option("--out", type=click.Path(), default=None, help="write the JSON report here")(fn)
    fn = click.option("--json", "as_json", is_flag=True, help="print the JSON report to stdout")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True, help="random seed")(fn)
    fn = click.option("--tol", type=str, default="1e-9", show_default=True, help="tolerance (exact decimal)")(fn)
    return fn


@main.command()
@click.option("--matrix", required=True, help='rows split by ";", entries by spaces, e.g. "1 0.5; 0 1"')
@click.option("--n", type=int, default=1024, show_default=True, help="growth scale for the invariant")
@click.option("--samples", type=int, default=8, show_default=True, help="max sample points")
@click.option("--radius", type=int, default=50, show_default=True, help="box radius for the distance certificate")
@_common
def realize(matrix, n, samples, radius, tol, seed, as_json, out):
    """Decompose a matrix, realize it on the lattice, recover the invariant."""
    config = {
        "matrix": matrix, "n": n, "samples": samples, "radius": radius,
        "tol": tol, "seed": seed,
    }
    try:
        a = linalg.parse_matrix(matrix)
        d = len(a)
        ops = decompose_unimodular(a, Fraction(tol))
        floor_map = realize_bilipschitz(a, Fraction(tol))
        cert = bounded_distance_constant(floor_map, a, radius)
        space = build_translate_space(FloorMapSeed(floor_map), 2, 2, offset_radius=0)
        table = forward_cocycle_table(space, 2, constant=cert.exact_constant)
        points = space.slice_members[:samples]
        invariant = recover_invariant_matrix(table, n, points, constant=cert.exact_constant)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    gap = linalg.max_abs_diff(invariant.matrix, a)
    bound = cert.exact_constant / n
    recovery = {
        "id": "matrix-recovery",
        "pass": gap <= bound,
        "gap": float(gap),
        "bound": float(bound),
        "notes": f"|M - A|max = {float(gap):.3g} <= C/n = {float(bound):.3g}",
    }
    det_tol = Fraction(10 * d) * cert.exact_constant / n
    det_check = check_det_pm1(invariant, det_tol if det_tol > 0 else Fraction(tol))
    mult = multiplicativity_check(invariant)
    checks = [recovery, det_check, mult]
    report = _report("realize", config, checks)
    report["decomposition"] = [op.to_json() for op in ops]
    report["certificate"] = cert.to_json()
    report["invariant"] = invariant.to_json()
    sys.exit(_emit(report, out, as_json))


@main.command(name="gromov-check")
@click.option("--matrix", default=None, help="seed matrix; identity seed when omitted")
@click.option("--dimension", type=int, default=1, show_default=True, help="lattice rank for the identity seed")
@click.option("--radius", type=int, default=6, show_default=True, help="germ domain radius R")
@click.option("--translate-radius", type=int, default=6, show_default=True, help="translate radius R_t")
@click.option("--window", type=int, default=2, show_default=True, help="orbit window W")
@click.option("--inject-corruption", is_flag=True, help="negative control: corrupt one table entry")
@_common
def gromov_check(matrix, dimension, radius, translate_radius, window, inject_corruption, tol, seed, as_json, out):
    """Run the translate-space battery: Lipschitz closure, cocycle identity,
    fundamental domain, orbit equality, inverse identities, forced freeness."""
    config = {
        "matrix": matrix, "dimension": dimension, "radius": radius,
        "translate_radius": translate_radius, "window": window,
        "inject_corruption": inject_corruption, "tol": tol, "seed": seed,
    }
    try:
        if matrix is None:
            seed_map = IdentitySeed(LatticeGroup(dimension))
        else:
            a = linalg.parse_matrix(matrix)
            seed_map = FloorMapSeed(realize_bilipschitz(a, Fraction(tol)))
        space = build_translate_space(
            seed_map, radius, translate_radius, offset_radius=window
        )
        table = forward_cocycle_table(space, 2 * window)
        if inject_corruption:
            corrupt_g = next(g for g in space.source_gens.ball(window) if not g.is_identity())
            wrong = space.forward_cocycle(corrupt_g, space.slice_members[0]) * _offset_element(space)
            table = table.with_override(corrupt_g, space.slice_members[0], wrong)
        eta = orbit_morphism(space, radius=window)
        d_src = space.source_gens.group.dimension if isinstance(space.source_gens.group, LatticeGroup) else None
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    checks = [
        check_lipschitz_closure(space),
        check_action_law(space, window),
        check_cocycle_identity(space, table, window),
        check_fundamental_domain(space, window),
    ]
    for index, psi in enumerate(space.slice_members):
        result = check_orbit_equality(space, psi, window)
        result.name = f"orbit-equality[{index}]"
        checks.append(result)
    checks.append(check_inverse_identities(eta, eta.inverse(), window))
    checks.append(check_equivariance(eta, window))
    checks.append(check_inverse_equivariance(eta, window))
    if d_src is not None:
        odo = OdometerSpace((2,) * (2 * d_src), 3)
        _, freeness = force_freeness(space, odo, window)
        checks.append(freeness)
    report = _report("gromov-check", config, checks)
    report["space"] = space.to_json()
    sys.exit(_emit(report, out, as_json))


def _offset_element(space):
    gens = space.target_gens
    return gens.elements[0]


@main.command(name="odometer")
@click.option("--matrix", default="1 1; 0 1", show_default=True, help="integer unimodular matrix")
@click.option("--p", type=int, default=3, show_default=True, help="odometer base")
@click.option("--depth", type=int, default=4, show_default=True, help="truncation depth N")
@click.option("--samples", type=int, default=1000, show_default=True, help="random points for equivariance")
@click.option("--window", type=int, default=3, show_default=True, help="group ball radius for sweeps")
@_common
def odometer_cmd(matrix, p, depth, samples, window, tol, seed, as_json, out):
    """Odometer battery: depth-level bijectivity, equivariance, minimality,
    measure invariance, full-group conjugation realization, exact invariant."""
    config = {
        "matrix": matrix, "p": p, "depth": depth, "samples": samples,
        "window": window, "tol": tol, "seed": seed,
    }
    try:
        a = linalg.parse_matrix(matrix)
        d = len(a)
        space = OdometerSpace((p,) * d, depth)
        if not linalg.is_integral(a) or abs(linalg.det(a)) != 1:
            raise ValueError("odometer automorphisms need an integer matrix with det +-1")
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    rng = random.Random(seed)
    group = LatticeGroup(d)
    gens = group.standard_generators()
    checks = [bijectivity_check_at_depth(a, space).to_json() | {"id": "depth-bijectivity"}]

    witnesses = []
    tested = 0
    points = [space.random_point(rng) for _ in range(samples)]
    for g in gens.ball(window):
        image_g = [int(v) for v in linalg.mat_vec(a, g.coords)]
        for x in points:
            lhs = matrix_act(a, odometer_add(x, g.coords, space), space)
            rhs = odometer_add(matrix_act(a, x, space), image_g, space)
            tested += 1
            if lhs != rhs:
                witnesses.append((g, x))
    checks.append({
        "id": "equivariance",
        "pass": not witnesses,
        "checked": tested,
        "witnesses": [repr(w) for w in witnesses[:5]],
    })

    checks.append(minimality_witness(space, min(2, depth)).to_json() | {"id": "minimality"})

    invariant_witnesses = []
    swept = 0
    k = min(2, depth)
    for g in gens.ball(window):
        for values in _depth_k_reps(space, k, rng, cap=40):
            cyl = space.depth_cylinder(space.point_from_values(values), k)
            before = cyl.measure(space)
            after = cyl.translate(g.coords, space).measure(space)
            swept += 1
            if before != after:
                invariant_witnesses.append((g, values))
    checks.append({
        "id": "haar-invariance",
        "pass": not invariant_witnesses,
        "checked": swept,
        "witnesses": [repr(w) for w in invariant_witnesses[:5]],
    })

    elements = [_first_coordinate_shuffle(space, rng) for _ in range(6)]
    ad_vectors = [v for i in range(d) for v in (_basis(d, i, 1), _basis(d, i, -1))][:4]
    ad_witnesses = []
    for vec in ad_vectors:
        ok, witness = ad_realization_check(vec, elements, space)
        if not ok:
            ad_witnesses.append((vec, witness))
    checks.append({
        "id": "ad-realization",
        "pass": not ad_witnesses,
        "checked": len(ad_vectors) * len(elements),
        "witnesses": [repr(w) for w in ad_witnesses[:5]],
    })

    morphism = matrix_morphism(a, space, points[: max(1, min(8, len(points)))])
    invariant = recover_invariant_matrix(morphism, 81)
    exact = invariant.matrix == a
    checks.append({
        "id": "constant-invariant-exact",
        "pass": exact,
        "notes": "invariant of the constant cocycle equals the matrix exactly",
    })
    report = _report("odometer", config, checks)
    report["invariant"] = invariant.to_json()
    sys.exit(_emit(report, out, as_json))


def _basis(d, i, s):
    v = [0] * d
    v[i] = s
    return tuple(v)


def _depth_k_reps(space, k, rng, cap):
    full = 1
    for p in space.bases:
        full *= p**k
    if full <= cap:
        import itertools

        return list(itertools.product(*(range(p**k) for p in space.bases)))
    return [tuple(rng.randrange(p**k) for p in space.bases) for _ in range(cap)]


def _first_coordinate_shuffle(space, rng):
    """A full-group element permuting the depth-1 cylinders of coordinate 1."""
    p = space.bases[0]
    image = list(range(p))
    rng.shuffle(image)
    pieces = []
    for digit in range(p):
        shift = [0] * space.dimension
        shift[0] = image[digit] - digit + p * rng.randint(-1, 1)
        prefix = ((digit,),) + ((),) * (space.dimension - 1)
        pieces.append((Cylinder(prefix), tuple(shift)))
    return FullGroupElement.make(space, pieces)


@main.command(name="functoriality")
@click.option("--matrix", "matrices", multiple=True, required=True,
              help="give twice: the composite applies the second matrix, then the first")
@click.option("--p", type=int, default=3, show_default=True, help="odometer base (constant mode)")
@click.option("--depth", type=int, default=4, show_default=True, help="odometer depth (constant mode)")
@click.option("--n", type=int, default=1024, show_default=True, help="growth scale")
@click.option("--samples", type=int, default=6, show_default=True, help="sample points")
@_common
def functoriality(matrices, p, depth, n, samples, tol, seed, as_json, out):
    """Invariant of a composite morphism vs the product of invariants.

    Integer matrices run as constant odometer cocycles (exact); any
    non-integer entry switches to floor-shear realizations with an error
    budget.
    """
    config = {
        "matrices": list(matrices), "p": p, "depth": depth, "n": n,
        "samples": samples, "tol": tol, "seed": seed,
    }
    if len(matrices) != 2:
        click.echo("error: give --matrix exactly twice", err=True)
        sys.exit(2)
    try:
        first = linalg.parse_matrix(matrices[0])
        second = linalg.parse_matrix(matrices[1])
        if len(first) != len(second):
            raise ValueError("matrices must share a dimension")
        constant_mode = (
            linalg.is_integral(first)
            and linalg.is_integral(second)
            and abs(linalg.det(first)) == 1
            and abs(linalg.det(second)) == 1
        )
        rng = random.Random(seed)
        if constant_mode:
            space = OdometerSpace((p,) * len(first), depth)
            points = [space.random_point(rng) for _ in range(max(1, samples))]
            eta = matrix_morphism(first, space, points)
            theta = matrix_morphism(second, space, points)
        else:
            eta = _realized_morphism(first, Fraction(tol))
            theta = _realized_morphism(second, Fraction(tol))
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    result = functoriality_check(eta, theta, n)
    checks = [result]
    report = _report("functoriality", config, checks)
    report["mode"] = "constant" if constant_mode else "realized"
    sys.exit(_emit(report, out, as_json))


def _realized_morphism(a, tol):
    floor_map = realize_bilipschitz(a, tol)
    cert = bounded_distance_constant(floor_map, a, 50)
    space = build_translate_space(FloorMapSeed(floor_map), 2, 2, offset_radius=0)
    return orbit_morphism(space, radius=2, constant=cert.exact_constant)


if __name__ == "__main__":
    main()
