from fractions import Fraction

import pytest

from sphfoli.connection import (
    NonGenericError,
    check_matrix_connected,
    connection_matrix,
    foliated_dimension_via_rank,
    format_matrix,
    rank_analysis,
)
from sphfoli.exactfield import ExactMatrix
from sphfoli.surface import classify_points, is_generic, is_orientable


def test_three_hemispheres_matrix(gallery):
    cm = connection_matrix(gallery["three_hemispheres"])
    assert cm.M == ((1, 0, 0), (0, 0, 1), (1, 1, 0), (0, 1, 1))
    assert cm.C == (Fraction(1, 2), Fraction(1, 2), 1, 1)
    assert cm.pole_labels == ("p1", "p2", None, None)


def test_nonorientable_matrix_and_widths(gallery):
    s = gallery["three_hemispheres_nonorientable"]
    cm = connection_matrix(s)
    assert cm.M == ((2, 1, 0, 0), (0, 1, 1, 0), (0, 0, 1, 2))
    assert cm.C == (1, 1, 1)
    theta = Fraction(1, 5)
    assert s.widths() == [theta, 1 - 2 * theta, 2 * theta, Fraction(1, 2) - theta]


@pytest.mark.parametrize("name", ["three_hemispheres", "three_hemispheres_nonorientable",
                                  "sphere_two_zeros_four_poles", "torus_4pi", "torus_irrational_pole"])
def test_width_equation_holds(gallery, name):
    s = gallery[name]
    cm = connection_matrix(s)
    assert ExactMatrix(cm.M).matvec(s.widths()) == list(cm.C)
    assert all(c == 2 for c in cm.column_sums())
    assert check_matrix_connected(cm)


def test_connectedness_check():
    assert check_matrix_connected([[1, 0], [1, 1], [0, 1]])
    assert not check_matrix_connected([[1, 0], [0, 1]])


@pytest.mark.parametrize("name, rank, m", [
    ("three_hemispheres", 3, 4),
    ("three_hemispheres_nonorientable", 3, 3),
    ("torus_4pi", 1, 1),
])
def test_rank_law_on_fixtures(gallery, name, rank, m):
    ra = rank_analysis(connection_matrix(gallery[name]), gallery[name])
    assert (ra.rank, ra.m) == (rank, m)
    assert ra.consistent
    assert ra.orientable_by_rank == is_orientable(gallery[name])


def test_rank_route_needs_generic_surface(gallery):
    with pytest.raises(NonGenericError):
        foliated_dimension_via_rank(gallery["torus_three_cones"])


def test_rank_route_dimensions(gallery):
    assert foliated_dimension_via_rank(gallery["torus_4pi"]) == 2
    assert foliated_dimension_via_rank(gallery["three_hemispheres"]) == 1
    assert foliated_dimension_via_rank(gallery["three_hemispheres_nonorientable"]) == 2


def test_rank_law_on_small_oracle(small_oracle):
    checked = 0
    for s in small_oracle:
        if is_generic(s):
            assert rank_analysis(connection_matrix(s), s).consistent
            checked += 1
    assert checked > 0


def test_csv_format(gallery):
    text = format_matrix(connection_matrix(gallery["three_hemispheres"]), "csv")
    assert text.splitlines() == [
        "pole,B1,B2,B3,C",
        "p1,1,0,0,1/2",
        "p2,0,0,1,1/2",
        "q1,1,1,0,1",
        "q2,0,1,1,1",
    ]


def test_labeled_poles_come_first(gallery):
    for s in gallery.values():
        labels = connection_matrix(s).pole_labels
        first_unlabeled = next((i for i, x in enumerate(labels) if x is None), len(labels))
        assert all(x is None for x in labels[first_unlabeled:])
        assert len([x for x in labels if x]) == len(classify_points(s).partition.N)
