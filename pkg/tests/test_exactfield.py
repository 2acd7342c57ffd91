from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphfoli.exactfield import (
    ExactMatrix,
    FieldValue,
    ScalarSyntaxError,
    format_scalar,
    fv,
    fv_normalize,
    is_half_integer,
    is_integer,
    mat_rank,
    nullspace,
    parse_scalar,
    solve_affine,
)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=30)
values = st.lists(rationals, min_size=1, max_size=4).map(lambda cs: FieldValue(cs))


def reference_rank(rows):
    """Plain Gaussian elimination over Fraction, no cleverness."""
    a = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncols = len(a[0]) if a else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(len(a)):
            if i != rank and a[i][c] != 0:
                f = a[i][c] / a[rank][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def test_normalize_reduces():
    assert fv_normalize([Fraction(2, 4), 0]) == FieldValue([Fraction(1, 2)])
    assert fv_normalize([Fraction(2, 4), 0]).coeffs[0] == Fraction(1, 2)


def test_normalize_rejects_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        fv_normalize([(1, 0)])


def test_rational_addition():
    assert fv(Fraction(1, 2)) + fv(Fraction(1, 2)) == 1


def test_generators_are_independent():
    t = FieldValue.generator(1)
    assert t == FieldValue([0, 1])
    assert t != 1


def test_integrality():
    assert is_integer(fv(3))
    assert not is_integer(fv(Fraction(1, 2)))
    assert is_half_integer(fv(Fraction(1, 2)))
    assert not is_half_integer(fv(Fraction(3, 1)))
    assert not is_integer(FieldValue.generator(1))
    assert not is_half_integer(FieldValue.generator(1) + Fraction(1, 2))


def test_transcendental_products_are_rejected():
    t = FieldValue.generator(1)
    with pytest.raises(TypeError):
        t * t


@given(values, values, values)
def test_addition_is_associative_and_commutative(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert a - a == 0


@given(values, rationals, rationals)
def test_scaling_distributes(a, p, q):
    assert a * (p + q) == a * p + a * q


@given(values, values)
def test_equality_matches_hash(a, b):
    if a == b:
        assert hash(a) == hash(b)
    assert hash(a + 0) == hash(a)


@given(values, values)
def test_order_is_total_and_translation_invariant(a, b):
    assert (a < b) + (b < a) + (a == b) == 1
    if a < b:
        assert a + 7 < b + 7


@given(values)
def test_format_parse_round_trip(v):
    names = ["tau1", "tau2", "tau3"]
    assert parse_scalar(format_scalar(v, names), names) == v


def test_parse_scalar_errors():
    with pytest.raises(ScalarSyntaxError):
        parse_scalar("")
    with pytest.raises(ScalarSyntaxError):
        parse_scalar("1/0")
    with pytest.raises(ScalarSyntaxError):
        parse_scalar("2*c", ["tau1"])


def test_parse_scalar_with_generator():
    v = parse_scalar("1/2 - 3/4*c", ["c"])
    assert v == FieldValue([Fraction(1, 2), Fraction(-3, 4)])


small_matrices = st.integers(1, 5).flatmap(
    lambda c: st.lists(st.lists(st.integers(-3, 3), min_size=c, max_size=c), min_size=1, max_size=5))


@given(small_matrices, st.randoms(use_true_random=False))
def test_rank_matches_reference_and_ignores_order(rows, rnd):
    r = mat_rank(rows)
    assert r == reference_rank(rows)
    rp = list(range(len(rows)))
    cp = list(range(len(rows[0])))
    rnd.shuffle(rp)
    rnd.shuffle(cp)
    assert mat_rank(ExactMatrix(rows).permuted(rp, cp)) == r


@given(small_matrices)
def test_nullspace_dimension_and_kernel(rows):
    basis = nullspace(rows)
    assert len(basis) == len(rows[0]) - mat_rank(rows)
    for v in basis:
        for r in rows:
            assert sum(Fraction(a) * Fraction(x) for a, x in zip(r, v)) == 0


def test_rank_examples():
    assert mat_rank([[1, 0, 0], [0, 0, 1], [1, 1, 0], [0, 1, 1]]) == 3
    assert mat_rank([[2, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 2]]) == 3
    assert mat_rank([[0, 0], [0, 0]]) == 0


@settings(max_examples=50)
@given(small_matrices, st.lists(values, min_size=5, max_size=5))
def test_solve_affine_solution_satisfies_system(rows, x):
    x = x[: len(rows[0])]
    C = ExactMatrix(rows).matvec(x)
    sol = solve_affine(rows, C)
    assert sol.consistent
    assert ExactMatrix(rows).matvec(sol.particular) == C
    assert sol.dimension == len(rows[0]) - sol.rank


def test_solve_affine_detects_inconsistency():
    sol = solve_affine([[1, 1], [1, 1]], [1, 2])
    assert not sol.consistent
