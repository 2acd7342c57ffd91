"""Holonomy of the developing map over the dual graph, and its O(2) class.

An element of O(2) is stored as ``(sign, angle)`` acting on a longitude
coordinate by ``x -> sign*x + angle`` (angle in turns, reduced mod 1).  Sign
-1 is a reflection; it also exchanges north and south latitude.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .exactfield import FieldValue
from .surface import Glue, SegRef, StripSurface, Violation, classify_points

__all__ = [
    "HolonomyElement",
    "MonodromyClass",
    "FiberDescriptor",
    "bigon_frames",
    "transition",
    "holonomy_generators",
    "classify_monodromy",
    "fiber_multiplicity",
    "zero_loop",
    "zero_loop_holonomy",
    "validate_zero_holonomy",
    "ZeroHolonomyReport",
    "K4_CONJUGATORS",
]

# Moebius maps conjugating the Klein four-group so that each of its three
# reflection axes in turn becomes the rotation axis.  Kept for reports only.
K4_CONJUGATORS = ("(z+i)/(iz+1)", "(z+1)/(-z+1)")


@dataclass(frozen=True)
class HolonomyElement:
    sign: int
    angle: FieldValue

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "angle", FieldValue(FieldValue._coerce(self.angle).coeffs).mod1())

    def compose(self, other: "HolonomyElement") -> "HolonomyElement":
        """``self`` after ``other``."""
        return HolonomyElement(self.sign * other.sign, other.angle * self.sign + self.angle)

    def inverse(self) -> "HolonomyElement":
        return HolonomyElement(self.sign, -self.angle * self.sign)

    @property
    def is_identity(self) -> bool:
        return self.sign == 1 and self.angle == 0

    @property
    def is_reflection(self) -> bool:
        return self.sign == -1

    def __str__(self):
        kind = "rot" if self.sign == 1 else "refl"
        return f"{kind}({self.angle})"


IDENTITY = HolonomyElement(1, FieldValue())


def _raw(sign: int, angle: FieldValue) -> HolonomyElement:
    return HolonomyElement(sign, angle)


def transition(s: StripSurface, into: SegRef, frm: SegRef, flip: bool) -> HolonomyElement:
    """Map from the coordinates of ``frm``'s bigon to those of ``into``'s bigon.

    The glued edges must land on each other: the side at ``x = 0`` (left) or
    ``x = width`` (right) of one bigon goes to the corresponding edge of the
    other.  Flipped gluings reverse longitude.
    """
    sign = -1 if flip else 1
    w_into = s.bigons[into.bigon].width
    w_frm = s.bigons[frm.bigon].width
    x_into = FieldValue() if into.side == "L" else w_into
    x_frm = FieldValue() if frm.side == "L" else w_frm
    return _raw(sign, x_into - x_frm * sign)


def bigon_frames(s: StripSurface, root: int = 0, rng: random.Random | None = None):
    """Frames by spanning-tree transport; returns (frames, tree gluings, non-tree gluings).

    ``rng`` randomizes the spanning tree; the classification does not depend on it.
    """
    frames: dict[int, HolonomyElement] = {root: IDENTITY}
    adj: dict[int, list[tuple[Glue, bool]]] = {i: [] for i in range(s.b)}
    for g in s.gluings:
        adj[g.a.bigon].append((g, True))
        if g.b.bigon != g.a.bigon or g.a != g.b:
            adj[g.b.bigon].append((g, False))
    if rng is not None:
        for lst in adj.values():
            rng.shuffle(lst)
    tree: set[Glue] = set()
    order = [root]
    if rng is not None:
        # a randomized search order gives a different spanning tree
        pending = [root]
        while pending:
            idx = rng.randrange(len(pending))
            x = pending.pop(idx)
            for g, forward in adj[x]:
                here, there = (g.a, g.b) if forward else (g.b, g.a)
                if there.bigon not in frames:
                    frames[there.bigon] = frames[x].compose(transition(s, here, there, g.flip))
                    tree.add(g)
                    pending.append(there.bigon)
    else:
        queue = deque(order)
        while queue:
            x = queue.popleft()
            for g, forward in adj[x]:
                here, there = (g.a, g.b) if forward else (g.b, g.a)
                if there.bigon not in frames:
                    frames[there.bigon] = frames[x].compose(transition(s, here, there, g.flip))
                    tree.add(g)
                    queue.append(there.bigon)
    non_tree = [g for g in s.gluings if g not in tree]
    return frames, tree, non_tree


def holonomy_generators(s: StripSurface, root: int = 0, rng: random.Random | None = None) -> list[HolonomyElement]:
    """One holonomy element per gluing outside the spanning tree."""
    frames, _, non_tree = bigon_frames(s, root, rng)
    gens = []
    for g in non_tree:
        ga, gc = frames[g.a.bigon], frames[g.b.bigon]
        h = transition(s, g.a, g.b, g.flip)
        gens.append(ga.compose(h).compose(gc.inverse()))
    return gens


# -- classification ---------------------------------------------------------

@dataclass(frozen=True)
class MonodromyClass:
    kind: str  # Trivial, CyclicRotations, DenseRotations, ReflectionOnly, K4, DihedralFinite, DihedralInfinite
    order: int | None  # group order when finite
    rotation_order: int | None

    @property
    def coaxial(self) -> bool:
        return self.kind in ("Trivial", "CyclicRotations", "DenseRotations", "ReflectionOnly")

    @property
    def strict_dihedral(self) -> bool:
        return not self.coaxial

    def __str__(self):
        if self.kind == "CyclicRotations":
            return f"CyclicRotations({self.rotation_order})"
        if self.kind == "DihedralFinite":
            return f"DihedralFinite({self.order})"
        return self.kind


def _rational_order(angles: Iterable[FieldValue]) -> int | None:
    order = 1
    for a in angles:
        if not a.is_rational():
            return None
        order = math.lcm(order, a.mod1().const.denominator)
    return order


def classify_monodromy(gens: Sequence[HolonomyElement]) -> MonodromyClass:
    rotations = [g.angle for g in gens if g.sign == 1]
    offsets = [g.angle for g in gens if g.sign == -1]
    has_reflection = bool(offsets)
    rot_gens = rotations + [b - offsets[0] for b in offsets[1:]]
    k = _rational_order(rot_gens)
    if not has_reflection:
        if k is None:
            return MonodromyClass("DenseRotations", None, None)
        if k == 1:
            return MonodromyClass("Trivial", 1, 1)
        return MonodromyClass("CyclicRotations", k, k)
    if k is None:
        return MonodromyClass("DihedralInfinite", None, None)
    if k == 1:
        return MonodromyClass("ReflectionOnly", 2, 1)
    if k == 2:
        return MonodromyClass("K4", 4, 2)
    return MonodromyClass("DihedralFinite", 2 * k, k)


def group_closure(gens: Sequence[HolonomyElement], limit: int = 10000) -> set[HolonomyElement]:
    """All elements of a finite generated group (brute force, for cross-checks)."""
    elems = {IDENTITY}
    frontier = [IDENTITY]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = g.compose(x)
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
                    if len(elems) > limit:
                        raise ValueError("group is too large or infinite")
        frontier = nxt
    return elems


@dataclass(frozen=True)
class FiberDescriptor:
    kind: str  # Finite, TwoParameterFamily, UniqueOrientable
    count: int | None = None

    def __str__(self):
        return f"Finite({self.count})" if self.kind == "Finite" else self.kind


def fiber_multiplicity(cls: MonodromyClass, s: StripSurface) -> FiberDescriptor:
    """Number of foliations (strip decompositions) sharing the metric of ``s``."""
    if cls.strict_dihedral:
        return FiberDescriptor("Finite", 3 if cls.kind == "K4" else 1)
    if cls.kind != "Trivial":
        return FiberDescriptor("UniqueOrientable")
    if classify_points(s).partition.N:
        return FiberDescriptor("Finite", 1)
    return FiberDescriptor("TwoParameterFamily")


# -- zero loops --------------------------------------------------------------

def zero_loop(s: StripSurface, zero_index: int) -> list[tuple[SegRef, SegRef, bool]]:
    """Gluings ``(leaving, entering, flip)`` crossed by a small loop around a zero class."""
    z = s.zero_classes[zero_index]
    start = z.members[0]
    # state: current segment and whether the mark is at its top (True) or bottom
    seg, mark_top = SegRef(start.bigon, start.side, start.pos), True
    first = (seg, mark_top)
    crossings = []
    for _ in range(4 * z.s + 4):
        other, flip = s.partner[seg]
        crossings.append((seg, other, flip))
        other_top = mark_top != flip
        # the other segment adjacent to the mark on that side
        seg = SegRef(other.bigon, other.side, other.index - 1 if other_top else other.index + 1)
        mark_top = not other_top
        if (seg, mark_top) == first:
            return crossings
    raise RuntimeError("zero loop did not close")


def zero_loop_holonomy(s: StripSurface, zero_index: int) -> HolonomyElement:
    """Holonomy of the loop around a zero class, in the frame of its first bigon."""
    g = IDENTITY
    for leaving, entering, flip in zero_loop(s, zero_index):
        g = g.compose(transition(s, leaving, entering, flip))
    return g


@dataclass(frozen=True)
class ZeroHolonomyReport:
    holonomies: tuple[HolonomyElement, ...]
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_zero_holonomy(s: StripSurface) -> ZeroHolonomyReport:
    hol = []
    bad = []
    for i, z in enumerate(s.zero_classes):
        h = zero_loop_holonomy(s, i)
        hol.append(h)
        where = z.label or f"zero class {i}"
        if z.equatorial:
            if not (h.is_identity or h.is_reflection):
                bad.append(Violation("zero-holonomy", f"{where}: loop holonomy {h} is neither trivial nor a reflection"))
        elif not h.is_identity:
            bad.append(Violation("zero-holonomy", f"{where}: loop holonomy {h} is not trivial off the equator"))
    return ZeroHolonomyReport(tuple(hol), tuple(bad))
