"""Dimension formulas for moduli spaces of dihedral surfaces and their type partitions.

All dimensions are real dimensions of the stratum whenever it is non-empty;
emptiness is never decided here.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

from .exactfield import FieldValue, fv
from .oracle import enumerate_surfaces
from .surface import TypePartition, real_sign

__all__ = [
    "AngleVector",
    "PartitionError",
    "is_valid_partition",
    "valid_partitions",
    "dim_strict",
    "dim_coaxial",
    "max_type_partition",
    "max_dim_strict",
    "max_dim_coaxial",
    "two_cone_classify",
    "enumerate_surfaces",
]


class PartitionError(ValueError):
    """A type partition does not fit its angle vector, or a formula's hypothesis fails."""


@dataclass(frozen=True)
class AngleVector:
    """Cone angles in turns, indexed from 1, with the genus they live on."""

    theta: tuple[FieldValue, ...]
    genus: int = 0
    embedding: tuple[float, ...] = ()

    def __post_init__(self):
        vals = tuple(fv(t) for t in self.theta)
        object.__setattr__(self, "theta", vals)
        if self.genus < 0:
            raise ValueError("genus must be non-negative")
        for i, t in enumerate(vals, start=1):
            if t == 1:
                raise ValueError(f"theta_{i} = 1 is a smooth point, not a cone point")
            if real_sign(t, self.embedding or None) <= 0:
                raise ValueError(f"theta_{i} must be positive")

    @property
    def n(self) -> int:
        return len(self.theta)

    def integer_indices(self) -> frozenset[int]:
        return frozenset(i for i, t in enumerate(self.theta, start=1) if t.is_integer())

    def half_integer_indices(self) -> frozenset[int]:
        return frozenset(i for i, t in enumerate(self.theta, start=1) if t.is_half_integer())

    def other_indices(self) -> frozenset[int]:
        return frozenset(range(1, self.n + 1)) - self.integer_indices() - self.half_integer_indices()


def _as_angles(theta, genus: int = 0) -> AngleVector:
    return theta if isinstance(theta, AngleVector) else AngleVector(tuple(theta), genus)


def is_valid_partition(theta, T: TypePartition) -> bool:
    """Integer angles (at least 2) only in E, half-integers only in O, and O of even size.

    The even-size condition says the angles of zeros sum to an integer, which
    every closed dihedral surface requires.
    """
    av = _as_angles(theta)
    everything = T.E | T.O | T.N
    if everything != frozenset(range(1, av.n + 1)) or len(T.E) + len(T.O) + len(T.N) != av.n:
        return False
    if not T.E <= av.integer_indices():
        return False
    if not T.O <= av.half_integer_indices():
        return False
    return len(T.O) % 2 == 0


def valid_partitions(theta) -> Iterator[TypePartition]:
    """Every valid type partition of an angle vector."""
    av = _as_angles(theta)
    choices = []
    for i in range(1, av.n + 1):
        t = av.theta[i - 1]
        if t.is_integer():
            choices.append(("E", "N"))
        elif t.is_half_integer():
            choices.append(("O", "N"))
        else:
            choices.append(("N",))
    for pick in product(*choices):
        E = {i for i, c in enumerate(pick, start=1) if c == "E"}
        O = {i for i, c in enumerate(pick, start=1) if c == "O"}
        N = {i for i, c in enumerate(pick, start=1) if c == "N"}
        if len(O) % 2 == 0:
            yield TypePartition(E, O, N)


def _check_hyperbolic(g: int, n: int):
    if 2 * g - 2 + n <= 0:
        raise PartitionError("need 2g - 2 + n > 0")


def dim_strict(g: int, theta, T: TypePartition) -> int:
    """Dimension of the strict dihedral stratum of type ``T``."""
    av = _as_angles(theta, g)
    _check_hyperbolic(g, av.n)
    if not is_valid_partition(av, T):
        raise PartitionError(f"type partition {T} does not fit the angles")
    return 2 * len(T.E) + len(T.O) + 2 * g - 2


def dim_coaxial(g: int, theta, T: TypePartition) -> int:
    """Dimension of the co-axial stratum of type ``T`` (no odd zeros allowed)."""
    av = _as_angles(theta, g)
    _check_hyperbolic(g, av.n)
    if T.O:
        raise PartitionError("co-axial surfaces have no odd zeros")
    if not is_valid_partition(av, T):
        raise PartitionError(f"type partition {T} does not fit the angles")
    n_e = len(T.E)
    if g > 0:
        return 2 * n_e + 2 * g - 1
    if T.N:
        return 2 * n_e - 1
    if any(not t.is_integer() for t in av.theta):
        raise PartitionError("genus 0 without poles needs integer angles")
    return 2 * av.n - 3


def max_type_partition(theta) -> TypePartition:
    """Integers in E, half-integers in O except the smallest when their count is odd."""
    av = _as_angles(theta)
    E = av.integer_indices()
    halves = sorted(av.half_integer_indices(), key=lambda i: (av.theta[i - 1].const, i))
    O = set(halves[1:] if len(halves) % 2 else halves)
    N = frozenset(range(1, av.n + 1)) - E - O
    return TypePartition(E, O, N)


def max_dim_strict(g: int, theta) -> int:
    av = _as_angles(theta, g)
    _check_hyperbolic(g, av.n)
    T = max_type_partition(av)
    return 2 * len(T.E) + len(T.O) + 2 * g - 2


def max_dim_coaxial(g: int, theta) -> int:
    av = _as_angles(theta, g)
    _check_hyperbolic(g, av.n)
    m_e = len(av.integer_indices())
    m_n = av.n - m_e
    if g == 0 and m_n == 0:
        return 2 * av.n - 3
    return 2 * m_e + 2 * g - 1


def two_cone_classify(theta1, theta2, embedding: Sequence[float] | None = None) -> str:
    """Moduli of spheres with two cone points: ``Empty``, ``SinglePoint`` or ``Interval``."""
    a, b = fv(theta1), fv(theta2)
    for t in (a, b):
        if t == 1 or real_sign(t, embedding) <= 0:
            raise ValueError("cone angles must be positive and different from 1")
    if a != b:
        return "Empty"
    if a.is_integer():
        return "Interval"
    return "SinglePoint"
