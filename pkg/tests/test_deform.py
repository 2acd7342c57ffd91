import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphfoli.cli import gallery_entries
from sphfoli.decomposition import annulus_decomposition
from sphfoli.deform import (
    DeformationError,
    DeformationLog,
    invariants,
    lambda_deform,
    make_generic,
    restrip,
    saddle_connections,
    slide,
    split_pole,
    twist,
)
from sphfoli.surface import canonical_key, classify_points, is_generic, validate

from helpers import annulus_indices, check_preserved, random_slide, random_twist, twist_is_additive

NAMES = [e.name for e in gallery_entries()]
TWISTABLE = [n for n in NAMES if n != "football"]


@pytest.mark.parametrize("name", NAMES)
def test_restrip_and_zero_twist_are_identities(gallery, name):
    s = gallery[name]
    assert canonical_key(restrip(s)) == canonical_key(s)
    for i in annulus_indices(s):
        assert canonical_key(twist(s, i, 0)) == canonical_key(s)


@pytest.mark.parametrize("name", TWISTABLE)
def test_every_annulus_twist_validates(gallery, name):
    s = gallery[name]
    for i in annulus_indices(s):
        c = annulus_decomposition(s).components[i]
        out = twist(s, i, c.circumference * Fraction(2, 7))
        assert validate(out).ok
        assert not check_preserved(s, out, ("twist",))


def test_twist_rejects_disks_and_bad_amounts(gallery):
    s = gallery["torus_4pi"]
    dec = annulus_decomposition(s)
    disk = next(i for i, c in enumerate(dec.components) if c.kind == "disk")
    ann = annulus_indices(s)[0]
    with pytest.raises(DeformationError):
        twist(s, disk, Fraction(1, 10))
    with pytest.raises(DeformationError):
        twist(s, ann, dec.components[ann].circumference)
    with pytest.raises(DeformationError):
        twist(s, ann, Fraction(-1, 10))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(TWISTABLE), st.data())
def test_twist_is_additive(gallery, name, data):
    s = gallery[name]
    choices = annulus_indices(s)
    i = data.draw(st.sampled_from(choices))
    f1 = data.draw(st.fractions(0, 1, max_denominator=12).filter(lambda x: x < 1))
    f2 = data.draw(st.fractions(0, 1, max_denominator=12).filter(lambda x: x < 1))
    assert twist_is_additive(s, i, f1, f2)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(TWISTABLE), st.integers(0, 10**6))
def test_random_deformations_preserve_invariants(gallery, name, seed):
    rng = random.Random(seed)
    s = gallery[name]
    step = random_twist(s, rng) if rng.random() < 0.5 else random_slide(s, rng)
    if step is None:
        return
    out, op = step
    assert validate(out).ok
    assert not check_preserved(s, out, op)


def test_slide_moves_only_the_chosen_zero(gallery):
    s = gallery["sphere_two_zeros_four_poles"]
    out = slide(s, "p1", Fraction(1, 5))
    lat = invariants(out)["latitudes"]
    assert lat["p1"] == Fraction(1, 5)
    assert lat["p2"] == invariants(s)["latitudes"]["p2"]


def test_slide_errors(gallery):
    s = gallery["three_hemispheres_nonorientable"]
    with pytest.raises(DeformationError):
        slide(s, "p1", Fraction(1, 3))  # odd zeros stay on the equator
    with pytest.raises(DeformationError):
        slide(gallery["torus_4pi"], "p1", Fraction(3, 2))
    with pytest.raises(DeformationError):
        slide(gallery["torus_4pi"], "p9", Fraction(1, 3))


def test_lambda_deform_keeps_structure(gallery):
    s = gallery["three_hemispheres"]
    out = lambda_deform(s, 2.0)
    assert out.mode == "float"
    assert validate(out).ok
    assert classify_points(out).angles == classify_points(s).angles
    same = lambda_deform(s, 1.0)
    for a, b in zip(same.bigons, s.bigons):
        assert all(abs(x - float(y)) < 1e-12 for x, y in zip(a.left + a.right, b.left + b.right))


def test_lambda_deform_errors(gallery):
    with pytest.raises(DeformationError):
        lambda_deform(gallery["three_hemispheres_nonorientable"], 2.0)
    with pytest.raises(DeformationError):
        lambda_deform(gallery["three_hemispheres"], 0.0)


def test_make_generic_breaks_the_saddle_connection(gallery):
    s = gallery["sphere_saddle_connection"]
    assert len(saddle_connections(s)) == 1
    log = DeformationLog()
    out = make_generic(s, log)
    assert is_generic(out) and validate(out).ok
    assert [st.operation for st in log.steps] == ["twist"]
    assert not check_preserved(s, out, ("twist",))


@pytest.mark.parametrize("name", NAMES)
def test_make_generic_on_gallery(gallery, name):
    s = gallery[name]
    log = DeformationLog()
    out = make_generic(s, log)
    if not s.zero_classes:
        assert out is s and log.notes
        return
    assert is_generic(out)
    assert not check_preserved(s, out, ("generic",))


def test_make_generic_on_small_oracle(small_oracle):
    for s in small_oracle:
        if s.zero_classes and not is_generic(s):
            out = make_generic(s)
            assert is_generic(out)
            assert not check_preserved(s, out, ("generic",))


def _split_and_check(s, pole, start, ell):
    before = classify_points(s)
    out = split_pole(s, pole, start, ell)
    after = classify_points(out)
    assert validate(out).ok
    i = int(pole[1:])
    assert i in before.partition.N and i in after.partition.E
    assert before.partition.N - {i} == after.partition.N
    assert before.partition.E | {i} == after.partition.E
    assert before.partition.O == after.partition.O
    assert before.index_sum == after.index_sum
    assert before.angles == after.angles
    assert out.b >= s.b
    return out


@pytest.mark.parametrize("start", [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
def test_split_pole(gallery, start):
    _split_and_check(gallery["sphere_saddle_connection"], "p4", start, Fraction(1, 8))


def test_split_pole_of_football():
    from sphfoli.surface import parse_surface
    text = """
bigon B1 width=2
glue B1.L.0 B1.R.0 flip=0
label p1 = pole@B1.L.0
label p2 = pole@B1.L.1
theta p1 = 2
theta p2 = 2
"""
    _split_and_check(parse_surface(text), "p1", Fraction(0), Fraction(1, 4))


def test_split_pole_errors(gallery):
    s = gallery["sphere_saddle_connection"]
    with pytest.raises(DeformationError):
        split_pole(s, "p4", 0, Fraction(1, 2))
    with pytest.raises(DeformationError):
        split_pole(s, "p2", 0, Fraction(1, 8))  # a zero, not a pole
    with pytest.raises(DeformationError):
        split_pole(gallery["three_hemispheres"], "p1", 0, Fraction(1, 8))  # angle 1/2


def test_log_lines(gallery):
    log = DeformationLog()
    make_generic(gallery["sphere_saddle_connection"], log)
    lines = log.lines()
    assert lines[0].startswith("1. twist(")
    assert "saddles 1 -> 0" in lines[0]
