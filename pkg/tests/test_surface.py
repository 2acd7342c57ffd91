from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphfoli.cli import gallery_entries
from sphfoli.surface import (
    SurfaceParseError,
    canonical_key,
    classify_points,
    equatorial_net,
    format_surface,
    is_generic,
    is_orientable,
    load_surface,
    orientation_signs,
    parse_surface,
    turnover,
    validate,
)

from conftest import DATA

GALLERY_NAMES = [e.name for e in gallery_entries()]


@pytest.mark.parametrize("name", GALLERY_NAMES)
def test_gallery_surfaces_validate(gallery, name):
    rep = validate(gallery[name])
    assert rep.ok, str(rep)
    assert rep.index_sum == 4 - 4 * rep.genus


@pytest.mark.parametrize("name", GALLERY_NAMES)
def test_format_parse_round_trip(gallery, name):
    s = gallery[name]
    again = parse_surface(format_surface(s))
    assert canonical_key(again) == canonical_key(s)
    assert format_surface(again) == format_surface(s)


def test_torus_census(gallery):
    c = classify_points(gallery["torus_4pi"])
    assert c.genus == 1
    assert [z.s for z in c.zeros] == [4]
    assert c.angles == (2,)
    assert str(c.partition) == "({1},∅,∅)"
    assert c.index_sum == 0


def test_three_hemispheres_census(gallery):
    c = classify_points(gallery["three_hemispheres"])
    assert c.genus == 0
    assert c.angles == (Fraction(1, 2), Fraction(1, 2), 3)
    assert str(c.partition) == "({3},∅,{1,2})"
    assert len(c.poles) == 4
    assert c.index_sum == 4


def test_orientability(gallery):
    assert is_orientable(gallery["three_hemispheres"])
    assert orientation_signs(gallery["three_hemispheres"]) is not None
    assert not is_orientable(gallery["three_hemispheres_nonorientable"])
    assert orientation_signs(gallery["torus_4pi"]) is None


def test_genericity(gallery):
    assert is_generic(gallery["torus_4pi"])
    assert not is_generic(gallery["football"])
    assert not is_generic(gallery["torus_three_cones"])


def test_broken_file_reports_every_violation():
    rep = validate(load_surface(DATA / "broken.sphfoli"))
    assert not rep.ok
    assert {"unglued", "theta"} <= rep.codes()


def test_missing_label_is_reported(gallery):
    s = gallery["three_hemispheres"]
    rep = validate(s.with_changes(labels=s.labels[:2], thetas=s.thetas[:2]))
    assert "unlabeled-zero" in rep.codes()


def test_odd_zero_off_equator_is_reported():
    text = """
bigon B1 width=1/4
side B1 L marks=1/3
side B1 R marks=2/3
glue B1.L.0 B1.L.1 flip=1
glue B1.R.0 B1.R.1 flip=1
"""
    rep = validate(parse_surface(text))
    assert "odd-off-equator" in rep.codes()


@pytest.mark.parametrize("text, line", [
    ("bigon B1 width=1/2\nside B1 L marks=1/3 1/0\n", 2),
    ("bigon B1 width=1/2\nglue B1.L.0 B9.R.0 flip=0\n", 2),
    ("frobnicate\n", 1),
])
def test_parse_errors_carry_position(text, line):
    with pytest.raises(SurfaceParseError) as err:
        parse_surface(text)
    assert err.value.line == line


def test_equatorial_net_of_torus_with_three_cones(gallery):
    net = equatorial_net(gallery["torus_three_cones"])
    assert net.vertices == ()
    assert len(net.cycles) == 2


def test_equatorial_net_of_odd_zeros(gallery):
    s = gallery["three_hemispheres_nonorientable"]
    net = equatorial_net(s)
    odd = [i for i, z in enumerate(s.zero_classes) if z.s % 2]
    assert set(odd) <= set(net.vertices)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(GALLERY_NAMES), st.data())
def test_turnover_is_an_isomorphism(gallery, name, data):
    s = gallery[name]
    j = data.draw(st.integers(0, s.b - 1))
    t = turnover(s, j)
    assert validate(t).ok
    assert canonical_key(t) == canonical_key(s)
    assert classify_points(t).angles == classify_points(s).angles
    assert turnover(t, j) == s


def test_oracle_surfaces_round_trip(small_oracle):
    for s in small_oracle:
        again = parse_surface(format_surface(s))
        assert canonical_key(again) == canonical_key(s)
