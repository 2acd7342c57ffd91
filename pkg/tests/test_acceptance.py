"""Acceptance gate: one test group per criterion, each reported as a PASS/FAIL line.

The full enumeration (at most 4 bigons, 2 marks per side) is built once per
session and shared by criteria 2, 3, 4 and 6.
"""

import math
import random
import time
from fractions import Fraction

import mpmath
import pytest

from sphfoli.connection import connection_matrix, foliated_dimension_via_rank, rank_analysis
from sphfoli.deform import DeformationError, make_generic, split_pole
from sphfoli.exactfield import ExactMatrix, FieldValue, fv
from sphfoli.moduli import dim_coaxial, dim_strict, max_dim_strict, two_cone_classify, valid_partitions
from sphfoli.monodromy import classify_monodromy, fiber_multiplicity, holonomy_generators
from sphfoli.sphtrig import torus_redecomposition
from sphfoli.surface import TypePartition, classify_points, is_generic, is_orientable, validate

from helpers import annulus_indices, check_preserved, random_slide, random_twist, twist_is_additive

H = Fraction(1, 2)


def report_line(k, text):
    print(f"criterion {k}: {text}")


# -- 1 ---------------------------------------------------------------------------

def test_criterion_1_connection_matrices(gallery):
    t0 = time.perf_counter()
    s = gallery["three_hemispheres"]
    cm = connection_matrix(s)
    assert cm.M == ((1, 0, 0), (0, 0, 1), (1, 1, 0), (0, 1, 1))
    assert cm.C == (H, H, 1, 1)
    assert s.widths() == [H, H, H]
    assert ExactMatrix(cm.M).matvec(s.widths()) == list(cm.C)

    s = gallery["three_hemispheres_nonorientable"]
    cm = connection_matrix(s)
    theta = Fraction(1, 5)
    assert cm.M == ((2, 1, 0, 0), (0, 1, 1, 0), (0, 0, 1, 2))
    assert cm.C == (1, 1, 1)
    assert s.widths() == [theta, 1 - 2 * theta, 2 * theta, H - theta]
    assert ExactMatrix(cm.M).matvec(s.widths()) == list(cm.C)
    elapsed = time.perf_counter() - t0
    report_line(1, f"both matrices exact, {elapsed:.3f} s")
    assert elapsed < 1.0


# -- 2 ---------------------------------------------------------------------------

def test_criterion_2_rank_orientability_law(full_oracle):
    surfaces, enum_time = full_oracle
    t0 = time.perf_counter()
    exceptions = []
    checked = 0
    for s in surfaces:
        if not is_generic(s):
            continue
        ra = rank_analysis(connection_matrix(s), s, strict=False)
        checked += 1
        if not ra.consistent:
            exceptions.append((ra.rank, ra.m, ra.orientable_by_signs))
    total = enum_time + time.perf_counter() - t0
    report_line(2, f"{len(surfaces)} surfaces, {checked} generic, {len(exceptions)} exceptions, {total:.0f} s")
    assert checked > 0
    assert not exceptions
    assert total < 300


# -- 3 ---------------------------------------------------------------------------

def test_criterion_3_dimension_formulas(full_oracle):
    surfaces, _ = full_oracle
    strict = coaxial = 0
    exceptions = []
    for s in surfaces:
        if not is_generic(s):
            continue
        c = classify_points(s)
        T, g = c.partition, c.genus
        cls = classify_monodromy(holonomy_generators(s))
        if cls.strict_dihedral:
            want = 2 * len(T.E) + len(T.O) + 2 * g - 2
            strict += 1
        elif is_orientable(s):
            want = 2 * len(T.E) + 2 * g - 1
            coaxial += 1
        else:
            continue
        got = foliated_dimension_via_rank(s)
        if got != want:
            exceptions.append((str(T), g, str(cls), got, want))
    report_line(3, f"{strict} strict and {coaxial} orientable co-axial surfaces, {len(exceptions)} exceptions")
    assert strict > 0 and coaxial > 0
    assert not exceptions


def test_criterion_3_reference_instances(gallery):
    theta = (4, H, Fraction(3, 2))
    assert dim_strict(1, theta, TypePartition({1}, {2, 3}, set())) == 4
    assert dim_strict(1, theta, TypePartition({1}, set(), {2, 3})) == 2
    assert foliated_dimension_via_rank(gallery["torus_4pi"]) == 2
    s = gallery["three_hemispheres"]
    assert foliated_dimension_via_rank(s) == 1
    assert dim_coaxial(0, (H, H, 3), classify_points(s).partition) == 1


# -- 4 ---------------------------------------------------------------------------

def global_invariant_failures(s):
    out = []
    c = classify_points(s)
    g = c.genus
    index_sum = sum(2 - z.s for z in s.zero_classes) + 2 * len(s.pole_classes)
    if index_sum != 4 - 4 * g:
        out.append("index sum")
    lhs = 2 * sum(s.widths(), FieldValue())
    rhs = fv(2 - 2 * g) + sum((a - 1 for a in c.angles), FieldValue())
    if lhs != rhs:
        out.append("width identity")
    return out


def test_criterion_4_global_invariants(gallery, full_oracle):
    surfaces = list(gallery.values()) + list(full_oracle[0])
    bad = []
    for s in surfaces:
        assert validate(s).ok
        if global_invariant_failures(s):
            bad.append(s)
    report_line(4, f"{len(surfaces)} surfaces, {len(bad)} failures")
    assert not bad


# -- 5 ---------------------------------------------------------------------------

@pytest.mark.parametrize("name, kind, coaxial, fiber", [
    ("torus_4pi", "K4", False, "Finite(3)"),
    ("three_hemispheres", "CyclicRotations(2)", True, "UniqueOrientable"),
    ("genus0_trivial", "Trivial", True, "TwoParameterFamily"),
])
def test_criterion_5_monodromy(gallery, name, kind, coaxial, fiber):
    s = gallery[name]
    cls = classify_monodromy(holonomy_generators(s))
    assert str(cls) == kind
    assert cls.coaxial == coaxial
    assert str(fiber_multiplicity(cls, s)) == fiber


# -- 6 ---------------------------------------------------------------------------

def test_criterion_6_random_deformations(gallery):
    rng = random.Random(20261016)
    starts = [s for s in gallery.values() if s.zero_classes and s.mode == "exact"]
    applied = 0
    failures = []
    while applied < 1000:
        s = rng.choice(starts)
        for _ in range(rng.randint(1, 3)):
            first, second = (random_twist, random_slide) if rng.random() < 0.5 else (random_slide, random_twist)
            step = first(s, rng) or second(s, rng)
            if step is None:
                break
            out, op = step
            applied += 1
            if not validate(out).ok:
                failures.append((op, "invalid"))
            failures.extend((op, p) for p in check_preserved(s, out, op))
            s = out
    report_line(6, f"{applied} twist/slide applications, {len(failures)} invariant failures")
    assert not failures


def test_criterion_6_twist_additivity(gallery):
    rng = random.Random(6)
    checked = 0
    for s in gallery.values():
        for i in annulus_indices(s):
            for _ in range(5):
                f1 = Fraction(rng.randrange(12), 12)
                f2 = Fraction(rng.randrange(12), 12)
                assert twist_is_additive(s, i, f1, f2)
                checked += 1
    assert checked > 0


def test_criterion_6_make_generic(full_oracle):
    targets = [s for s in full_oracle[0] if s.b <= 3 and not is_generic(s) and s.zero_classes]
    failures = []
    for s in targets:
        out = make_generic(s)
        if not is_generic(out) or not validate(out).ok:
            failures.append("not generic")
        failures.extend(check_preserved(s, out, ("generic",)))
    report_line(6, f"make_generic on {len(targets)} surfaces, {len(failures)} failures")
    assert targets
    assert not failures


def split_candidates(surfaces):
    for s in surfaces:
        for p in s.pole_classes:
            if p.label is not None and p.angle.is_integer() and p.angle >= 2:
                yield s, p.label


def test_criterion_6_split_pole(gallery, full_oracle):
    split = 0
    failures = []
    pool = list(gallery.values()) + [s for s in full_oracle[0] if s.b <= 3]
    for s, label in split_candidates(pool):
        before = classify_points(s)
        i = int(label[1:])
        for start in (Fraction(0), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)):
            try:
                out = split_pole(s, label, start, Fraction(1, 8))
            except DeformationError:
                continue
            after = classify_points(out)
            split += 1
            ok = (validate(out).ok
                  and after.partition.N == before.partition.N - {i}
                  and after.partition.E == before.partition.E | {i}
                  and after.partition.O == before.partition.O
                  and after.index_sum == before.index_sum
                  and after.angles == before.angles)
            if not ok:
                failures.append((label, start))
    report_line(6, f"{split} pole splits, {len(failures)} failures")
    assert split > 0
    assert not failures


# -- 7 ---------------------------------------------------------------------------

def test_criterion_7_two_cone():
    tau = FieldValue.generator(1)
    assert two_cone_classify(3, 3) == "Interval"
    assert two_cone_classify(2, 2) == "Interval"
    assert two_cone_classify(Fraction(5, 2), Fraction(5, 2)) == "SinglePoint"
    assert two_cone_classify(Fraction(2, 3), Fraction(2, 3)) == "SinglePoint"
    assert two_cone_classify(tau, tau) == "SinglePoint"
    assert two_cone_classify(2, 3) == "Empty"
    assert two_cone_classify(Fraction(5, 2), 2) == "Empty"
    assert two_cone_classify(tau, tau + 1) == "Empty"


# -- 8 ---------------------------------------------------------------------------

ORACLE = ("0.91173829096848763635848956", "1.36943840600456582777619614",
          "0.91173829096848763635848956", "1.77215424758522741068644724")


def test_criterion_8_trig_grid():
    worst = 0.0
    for i in range(100):
        x = (i + 0.5) / 100 * (math.pi / 2)
        for j in range(100):
            w1 = (j + 0.5) / 100 * math.pi
            r = torus_redecomposition(x, w1)
            worst = max(worst, max(abs(v) for v in r.residuals))
    report_line(8, f"max residual {worst:.2e} on 100x100 grid")
    assert worst <= 1e-12


def test_criterion_8_reference_values():
    r = torus_redecomposition(math.pi / 3, math.pi / 2)
    with mpmath.workdps(30):
        for got, want in zip(r.as_tuple(), ORACLE):
            assert abs(mpmath.mpf(got) - mpmath.mpf(want)) <= 1e-12


# -- 9 ---------------------------------------------------------------------------

def random_angle(rng, ngen):
    kind = rng.randrange(4)
    if kind == 0:
        return fv(rng.randint(2, 7))
    if kind == 1:
        return fv(Fraction(2 * rng.randint(0, 6) + 1, 2))
    if kind == 2:
        den = rng.randint(3, 9)
        num = rng.randint(1, 5 * den)
        q = Fraction(num, den)
        return fv(q) if q.denominator > 2 else fv(Fraction(1, 3))
    return FieldValue.generator(rng.randint(1, ngen), ngen) + Fraction(rng.randint(0, 3))


def test_criterion_9_max_partition():
    rng = random.Random(9)
    t0 = time.perf_counter()
    for _ in range(50):
        n = rng.randint(1, 8)
        g = rng.randint(0, 3)
        if 2 * g - 2 + n <= 0:
            g = 1
        theta = tuple(random_angle(rng, 3) for _ in range(n))
        best = max(dim_strict(g, theta, T) for T in valid_partitions(theta))
        assert max_dim_strict(g, theta) == best, theta
    elapsed = time.perf_counter() - t0
    report_line(9, f"50 angle vectors, {elapsed:.2f} s")
    assert elapsed < 10
