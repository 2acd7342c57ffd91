import pytest

from sphfoli.oracle import EnumerationBoundError, enumerate_surfaces
from sphfoli.surface import canonical_key, classify_points, validate


def test_one_bigon_surfaces_are_footballs_and_self_gluings():
    surfaces = enumerate_surfaces(1, 1)
    assert surfaces
    for s in surfaces:
        assert s.b == 1
        assert all(g.a.bigon == g.b.bigon == 0 for g in s.gluings)


def test_every_surface_is_valid_and_distinct(small_oracle):
    keys = set()
    for s in small_oracle:
        rep = validate(s)
        assert rep.ok, str(rep)
        assert rep.index_sum == 4 - 4 * rep.genus
        keys.add(canonical_key(s))
    assert len(keys) == len(small_oracle)


def test_torus_pattern_is_found(small_oracle):
    found = [s for s in small_oracle
             if s.b == 2 and classify_points(s).genus == 1
             and [z.s for z in s.zero_classes] == [4]]
    assert found


def test_enumeration_is_deterministic():
    a = [canonical_key(s) for s in enumerate_surfaces(2, 1)]
    b = [canonical_key(s) for s in enumerate_surfaces(2, 1, workers=1)]
    assert a == b


def test_bound(monkeypatch):
    monkeypatch.setenv("SPHFOLI_MAX_BIGONS", "2")
    with pytest.raises(EnumerationBoundError):
        enumerate_surfaces(3, 1)
