from fractions import Fraction

import pytest

from sphfoli.cli import gallery_entries
from sphfoli.decomposition import annulus_decomposition, component_adjacency, critical_levels
from sphfoli.exactfield import FieldValue

NAMES = [e.name for e in gallery_entries()]


def check_decomposition(s):
    dec = annulus_decomposition(s)
    seen = set()
    for c in dec.components:
        for r in c.rects:
            key = (r.bigon, str(r.lo))
            assert key not in seen
            seen.add(key)
            assert r.hi - r.lo == c.height
    assert len(seen) == s.b * (len(dec.levels) + 1)
    # disks are exactly the pole classes, each as wide as its cone angle
    assert sorted(c.pole for c in dec.disks) == list(range(len(s.pole_classes)))
    for c in dec.disks:
        assert c.circumference == s.pole_classes[c.pole].angle
    # the components tile the surface: sum of circumference * height is the total width
    area = sum((c.circumference * c.height for c in dec.components), FieldValue())
    assert area == sum(s.widths(), FieldValue())
    return dec


@pytest.mark.parametrize("name", NAMES)
def test_gallery_decompositions_tile(gallery, name):
    check_decomposition(gallery[name])


def test_oracle_decompositions_tile(small_oracle):
    for s in small_oracle:
        check_decomposition(s)


def test_football_has_two_disks(gallery):
    dec = annulus_decomposition(gallery["football"])
    assert dec.levels == (Fraction(1, 2),)
    assert [c.kind for c in dec.components] == ["disk", "disk"]
    assert all(c.circumference == Fraction(3, 4) for c in dec.components)


def test_critical_levels_are_symmetric(gallery):
    for s in gallery.values():
        levels = critical_levels(s)
        assert sorted(1 - t for t in levels) == list(levels)


def test_two_zero_sphere(gallery):
    s = gallery["sphere_two_zeros_four_poles"]
    dec = annulus_decomposition(s)
    assert dec.levels == (Fraction(1, 6), Fraction(1, 3), Fraction(2, 3), Fraction(5, 6))
    assert len(dec.disks) == len(s.pole_classes) == 4
    assert len(dec.annuli) == 4
    adj = component_adjacency(s, dec)
    # every disk meets exactly one annulus
    for i, c in enumerate(dec.components):
        if c.kind == "disk":
            assert sum(1 for a, b, _ in adj if i in (a, b)) == 1


def test_component_lookup(gallery):
    s = gallery["torus_4pi"]
    dec = annulus_decomposition(s)
    i = dec.component_at(0, Fraction(1, 2))
    assert dec.components[i].kind == "annulus"
    with pytest.raises(ValueError):
        dec.component_at(0, Fraction(1, 4))
