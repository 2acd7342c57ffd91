"""Annulus decomposition: cutting bigons along the critical latitude levels."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cmp_to_key

from .exactfield import FieldValue
from .surface import (
    SegRef,
    StripSurface,
    _HALF,
    lat_eq,
    lat_lt,
    one_minus,
)

__all__ = [
    "Rect",
    "Component",
    "AnnulusDecomposition",
    "critical_levels",
    "annulus_decomposition",
    "component_adjacency",
]


@dataclass(frozen=True)
class Rect:
    """A band ``lo < t < hi`` of one bigon, traversed along the core in direction ``orient``."""

    bigon: int
    lo: object
    hi: object
    orient: int  # +1: crossed from left side to right side; -1: right to left
    start: FieldValue  # core coordinate of the rectangle's first side


@dataclass(frozen=True)
class Component:
    kind: str  # "annulus" or "disk"
    height: object
    circumference: FieldValue
    pole: int | None  # index into StripSurface.pole_classes, disks only
    rects: tuple[Rect, ...]

    @property
    def bands(self) -> tuple[tuple[int, object, object], ...]:
        return tuple((r.bigon, r.lo, r.hi) for r in self.rects)


@dataclass(frozen=True)
class AnnulusDecomposition:
    components: tuple[Component, ...]
    levels: tuple

    @property
    def disks(self) -> tuple[Component, ...]:
        return tuple(c for c in self.components if c.kind == "disk")

    @property
    def annuli(self) -> tuple[Component, ...]:
        return tuple(c for c in self.components if c.kind == "annulus")

    def component_at(self, bigon: int, t) -> int:
        """Index of the component containing the regular point at latitude ``t`` of ``bigon``."""
        if not isinstance(t, float):
            t = FieldValue._coerce(t)
        for i, c in enumerate(self.components):
            for r in c.rects:
                if r.bigon == bigon and lat_lt(r.lo, t) and lat_lt(t, r.hi):
                    return i
        raise ValueError("latitude lies on a critical level")


def _sort_lats(vals, s: StripSurface):
    def cmp(a, b):
        if lat_eq(a, b):
            return 0
        return -1 if lat_lt(a, b, s.embedding) else 1

    out = []
    for v in sorted(vals, key=cmp_to_key(cmp)):
        if not out or not lat_eq(out[-1], v):
            out.append(v)
    return out


def critical_levels(s: StripSurface) -> list:
    """Latitudes ``t`` and ``1 - t`` of every zero class; 1/2 when there are no zeros."""
    vals = []
    for z in s.zero_classes:
        vals.append(z.latitude)
        vals.append(one_minus(z.latitude))
    if not vals:
        vals.append(0.5 if s.mode == "float" else _HALF)
    return _sort_lats(vals, s)


def _segment_at(s: StripSurface, bigon: int, side: str, lo, hi) -> SegRef:
    marks = s.bigons[bigon].marks(side)
    k = sum(1 for m in marks if not lat_lt(lo, m, s.embedding))
    return SegRef(bigon, side, k)


def annulus_decomposition(s: StripSurface) -> AnnulusDecomposition:
    levels = critical_levels(s)
    zero = 0.0 if s.mode == "float" else FieldValue()
    one = 1.0 if s.mode == "float" else FieldValue((1,))
    bounds = [zero] + levels + [one]
    bands = list(zip(bounds, bounds[1:]))

    def band_index(lo):
        for i, (a, _) in enumerate(bands):
            if lat_eq(a, lo):
                return i
        raise ValueError("band not found")

    def neighbour(bigon: int, bi: int, side: str):
        """Rectangle across ``side`` of band ``bi``; returns (bigon, band, entered side)."""
        lo, hi = bands[bi]
        seg = _segment_at(s, bigon, side, lo, hi)
        other, flip = s.partner[seg]
        nlo = one_minus(hi) if flip else lo
        return other.bigon, band_index(nlo), other.side

    seen = set()
    comps = []
    for b in range(s.b):
        for bi in range(len(bands)):
            if (b, bi) in seen:
                continue
            rects = []
            cur, cbi, orient = b, bi, 1
            pos = FieldValue()
            while (cur, cbi) not in seen:
                seen.add((cur, cbi))
                lo, hi = bands[cbi]
                rects.append(Rect(cur, lo, hi, orient, pos))
                pos = pos + s.bigons[cur].width
                exit_side = "R" if orient == 1 else "L"
                cur, cbi, entered = neighbour(cur, cbi, exit_side)
                orient = 1 if entered == "L" else -1
            if (cur, cbi) != (rects[0].bigon, band_index(rects[0].lo)):
                raise RuntimeError("annulus traversal did not close")
            circ = pos
            lo0, hi0 = bands[band_index(rects[0].lo)]
            height = hi0 - lo0
            is_disk = any(lat_eq(r.lo, zero) or lat_eq(r.hi, one) for r in rects)
            pole = None
            if is_disk:
                r = rects[0]
                vertex = 0 if lat_eq(r.lo, zero) else 1
                pole = s.pole_class_id(r.bigon, vertex)
            comps.append(Component("disk" if is_disk else "annulus", height, circ, pole, tuple(rects)))
    return AnnulusDecomposition(tuple(comps), tuple(levels))


def component_adjacency(s: StripSurface, dec: AnnulusDecomposition) -> list[tuple[int, int, object]]:
    """Pairs of components meeting along a critical level, with that level."""
    owner = {}
    for i, c in enumerate(dec.components):
        for r in c.rects:
            owner[(r.bigon, str(r.lo))] = i
    edges = set()
    for i, c in enumerate(dec.components):
        for r in c.rects:
            j = owner.get((r.bigon, str(r.hi)))
            if j is not None:
                edges.add((min(i, j), max(i, j), str(r.hi)))
    return sorted(edges)
