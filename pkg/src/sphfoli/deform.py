"""Deformations of strip surfaces: twist, slide, latitude rescaling, pole splitting.

Twists and pole splits change which vertical leaves are critical, so the
strip decomposition has to be rebuilt.  :func:`_restrip` does that for a
surface cut into horizontal pieces: it traces every critical vertical leaf,
splits pieces along them, merges pieces across non-critical edges and reads
off the new bigons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key

from .decomposition import Component, annulus_decomposition
from .exactfield import FieldValue
from .surface import (
    Bigon,
    Glue,
    Label,
    PointRef,
    SegRef,
    StripSurface,
    classify_points,
    is_generic,
    lat_eq,
    lat_lt,
    one_minus,
    orientation_signs,
    validate,
)

__all__ = [
    "DeformationError",
    "DeformationStep",
    "DeformationLog",
    "twist",
    "slide",
    "lambda_deform",
    "split_pole",
    "make_generic",
    "restrip",
    "saddle_connections",
    "invariants",
]


class DeformationError(ValueError):
    """A deformation's preconditions are not met."""


# -- the re-strip engine --------------------------------------------------------

@dataclass
class _Piece:
    bigon: int
    lo: object
    hi: object
    width: FieldValue
    top: tuple | None = None  # edge tag at lo, None at the north vertex
    bottom: tuple | None = None  # edge tag at hi, None at the south vertex


@dataclass
class _CoreRect:
    bigon: int
    level: object
    orient: int
    start: FieldValue
    width: FieldValue


@dataclass
class _Core:
    rects: list
    circ: FieldValue
    psi: FieldValue


def _half(x):
    return x * 0.5 if isinstance(x, float) else x * Fraction(1, 2)


class _Engine:
    def __init__(self, s: StripSurface, cores: list[_Core]):
        self.s = s
        self.emb = s.embedding
        self.cores = cores
        zero = 0.0 if s.mode == "float" else FieldValue()
        one = 1.0 if s.mode == "float" else FieldValue((1,))
        cuts: dict[int, list] = {j: [] for j in range(s.b)}
        for ci, core in enumerate(cores):
            for ri, r in enumerate(core.rects):
                near_above = r.orient == 1
                cuts[r.bigon].append((r.level, (ci, ri, "near" if near_above else "far"),
                                      (ci, ri, "far" if near_above else "near")))
        self.pieces: list[_Piece] = []
        self.by_bigon: dict[int, list[int]] = {}
        self.edge_owner: dict[tuple, tuple[int, str]] = {}
        for j in range(s.b):
            cs = sorted(cuts[j], key=cmp_to_key(lambda a, b: self._cmp(a[0], b[0])))
            bounds = [zero] + [c[0] for c in cs] + [one]
            ids = []
            for k in range(len(bounds) - 1):
                p = _Piece(j, bounds[k], bounds[k + 1], s.bigons[j].width)
                if k > 0:
                    p.top = cs[k - 1][2]
                if k < len(cs):
                    p.bottom = cs[k][1]
                ids.append(len(self.pieces))
                self.pieces.append(p)
            self.by_bigon[j] = ids
        for pi, p in enumerate(self.pieces):
            if p.top is not None:
                self.edge_owner[p.top] = (pi, "top")
            if p.bottom is not None:
                self.edge_owner[p.bottom] = (pi, "bottom")

    # -- ordering helpers
    def _lt(self, a, b):
        return lat_lt(a, b, self.emb)

    def _cmp(self, a, b):
        if lat_eq(a, b):
            return 0
        return -1 if self._lt(a, b) else 1

    def piece_at(self, j: int, t) -> int:
        """Piece of bigon ``j`` containing latitude ``t`` (lower piece at a cut)."""
        for pi in self.by_bigon[j]:
            p = self.pieces[pi]
            if not self._lt(p.hi, t) and not self._lt(t, p.lo):
                if lat_eq(t, p.hi) and p.bottom is not None:
                    continue
                return pi
        raise ValueError("latitude outside the bigon")

    def piece_for_range(self, j: int, lo, hi) -> int:
        mid = _half(lo + hi)
        return self.piece_at(j, mid)

    # -- core crossing
    def cross(self, tag, x):
        """Carry a point of a core edge to the facing edge."""
        ci, ri, role = tag
        core = self.cores[ci]
        r = core.rects[ri]
        X = r.start + x if r.orient == 1 else r.start + r.width - x
        X = X + core.psi if role == "near" else X - core.psi
        X = self._mod(X, core.circ)
        other = "far" if role == "near" else "near"
        for rj, r2 in enumerate(core.rects):
            end = r2.start + r2.width
            if not self._lt(X, r2.start) and self._lt(X, end) or (lat_eq(X, end) and rj == len(core.rects) - 1):
                off = X - r2.start
                x2 = off if r2.orient == 1 else r2.width - off
                return (ci, rj, other), x2
        raise RuntimeError("core coordinate outside the annulus")

    def _mod(self, X, c):
        while self._lt(X, FieldValue()):
            X = X + c
        while not self._lt(X, c):
            X = X - c
        return X

    # -- leaf tracing
    def trace_all(self):
        s = self.s
        self.crit: dict[int, list] = {pi: [] for pi in range(len(self.pieces))}
        self.crossings: list[tuple[int, FieldValue, str]] = []
        limit = 8 * (len(self.pieces) + 1) * (sum(len(bg.left) + len(bg.right) for bg in s.bigons) + 1)
        for j, bg in enumerate(s.bigons):
            for side in "LR":
                for t in bg.marks(side):
                    pi = self.piece_at(j, t)
                    x = FieldValue() if side == "L" else bg.width
                    for d in (-1, 1):
                        self._trace(pi, x, t, d, limit)

    def _side_marks(self, pi: int, x):
        p = self.pieces[pi]
        bg = self.s.bigons[p.bigon]
        if x == 0:
            return bg.left
        if x == bg.width:
            return bg.right
        return ()

    def _trace(self, pi, x, t, d, limit):
        for _ in range(limit):
            p = self.pieces[pi]
            marks = self._side_marks(pi, x)
            hit = None
            for m in marks:
                if d < 0 and self._lt(m, t) and self._lt(p.lo, m):
                    if hit is None or self._lt(hit, m):
                        hit = m
                if d > 0 and self._lt(t, m) and self._lt(m, p.hi):
                    if hit is None or self._lt(m, hit):
                        hit = m
            if hit is not None:
                self.crit[pi].append((x, t, hit) if d > 0 else (x, hit, t))
                return
            end = p.lo if d < 0 else p.hi
            self.crit[pi].append((x, t, end) if d > 0 else (x, end, t))
            tag = p.top if d < 0 else p.bottom
            if tag is None:
                return
            self.crossings.append((tag[0], self._core_coord(tag, x), tag[2]))
            tag2, x2 = self.cross(tag, x)
            pi2, which = self.edge_owner[tag2]
            p2 = self.pieces[pi2]
            pi, x = pi2, x2
            t, d = (p2.lo, 1) if which == "top" else (p2.hi, -1)
        raise RuntimeError("critical leaf did not terminate")

    def _core_coord(self, tag, x):
        ci, ri, _ = tag
        r = self.cores[ci].rects[ri]
        return r.start + x if r.orient == 1 else r.start + r.width - x

    # -- splitting and merging
    def build(self):
        self.trace_all()
        self.cuts: dict[int, list] = {}
        for pi, p in enumerate(self.pieces):
            xs = []
            for x, _, _ in self.crit[pi]:
                if x != 0 and x != p.width and not any(x == y for y in xs):
                    xs.append(x)
            xs.sort(key=cmp_to_key(self._cmp))
            self.cuts[pi] = [FieldValue()] + xs + [p.width]
        self.subs = [(pi, k) for pi in range(len(self.pieces)) for k in range(len(self.cuts[pi]) - 1)]
        self.sub_index = {r: i for i, r in enumerate(self.subs)}

        # contacts: for each sub-rect side, the pieces of line it touches
        self.contacts: dict[tuple[int, int], list] = {}
        self.merge_edges: list[tuple[int, int, str, tuple]] = []
        for pi, p in enumerate(self.pieces):
            ncut = len(self.cuts[pi]) - 1
            for k in range(ncut):
                ri = self.sub_index[(pi, k)]
                if k > 0:
                    left = self.sub_index[(pi, k - 1)]
                    self.contacts.setdefault((ri, 0), []).append((p.lo, p.hi, left, 1, False))
                if k < ncut - 1:
                    right = self.sub_index[(pi, k + 1)]
                    self.contacts.setdefault((ri, 1), []).append((p.lo, p.hi, right, 0, False))
            for side in "LR":
                for lo, hi, q, qside, flip in self._side_portions(pi, side):
                    me = self.sub_index[(pi, 0 if side == "L" else ncut - 1)]
                    qn = len(self.cuts[q]) - 1
                    other = self.sub_index[(q, 0 if qside == "L" else qn - 1)]
                    us = 0 if side == "L" else 1
                    uo = 0 if qside == "L" else 1
                    self.contacts.setdefault((me, us), []).append((lo, hi, other, uo, flip))
                    if not (self._side_critical(pi, side) or self._side_critical(q, qside)):
                        self.merge_edges.append((me, other, "side", (us, uo, flip)))
        for ci, core in enumerate(self.cores):
            for ri in range(len(core.rects)):
                for role in ("near", "far"):
                    pi, _ = self.edge_owner[(ci, ri, role)]
                    cuts = self.cuts[pi]
                    for k in range(len(cuts) - 1):
                        xm = _half(cuts[k] + cuts[k + 1])
                        tag2, x2 = self.cross((ci, ri, role), xm)
                        q, _ = self.edge_owner[tag2]
                        k2 = self._sub_at(q, x2)
                        a = self.sub_index[(pi, k)]
                        b = self.sub_index[(q, k2)]
                        rho = core.rects[ri].orient * core.rects[tag2[1]].orient
                        u_a = xm - cuts[k]
                        u_b = x2 - self.cuts[q][k2]
                        kappa = u_b - u_a * rho
                        self.merge_edges.append((a, b, "core", (rho, kappa)))
        return self._assemble()

    def _sub_at(self, pi, x):
        cuts = self.cuts[pi]
        for k in range(len(cuts) - 1):
            if not self._lt(x, cuts[k]) and not self._lt(cuts[k + 1], x):
                return k
        raise RuntimeError("position outside piece")

    def _side_critical(self, pi, side) -> bool:
        p = self.pieces[pi]
        x = FieldValue() if side == "L" else p.width
        return any(c[0] == x for c in self.crit[pi])

    def _side_portions(self, pi, side):
        """Glued portions of a piece side: (lo, hi, partner piece, partner side, flip)."""
        s = self.s
        p = self.pieces[pi]
        bg = s.bigons[p.bigon]
        out = []
        for k in range(bg.nseg(side)):
            seg = SegRef(p.bigon, side, k)
            u, v = s.seg_interval(seg)
            lo = p.lo if self._lt(u, p.lo) else u
            hi = p.hi if self._lt(p.hi, v) else v
            if not self._lt(lo, hi):
                continue
            other, flip = s.partner[seg]
            olo, ohi = (one_minus(hi), one_minus(lo)) if flip else (lo, hi)
            q = self.piece_for_range(other.bigon, olo, ohi)
            out.append((lo, hi, q, other.side, flip))
        return out

    def _assemble(self):
        s = self.s
        n = len(self.subs)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        adj: dict[int, list] = {i: [] for i in range(n)}
        for a, b, kind, data in self.merge_edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
            adj[a].append((b, kind, data, True))
            adj[b].append((a, kind, data, False))
        groups: dict[int, list[int]] = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(i)
        order = sorted(groups, key=lambda r: min(groups[r]))
        gid = {r: g for g, r in enumerate(order)}
        self.group_of = [gid[find(i)] for i in range(n)]

        # frames: new X = delta + sigma*u, new T = t if sigma == 1 else 1 - t
        self.frame: dict[int, tuple[int, FieldValue]] = {}
        widths = []
        for r in order:
            root = min(groups[r])
            self.frame[root] = (1, FieldValue())
            stack = [root]
            while stack:
                a = stack.pop()
                sig, delta = self.frame[a]
                for b, kind, data, forward in adj[a]:
                    if kind == "side":
                        ua, ub, flip = data if forward else (data[1], data[0], data[2])
                        sig2 = -sig if flip else sig
                        line = delta + self._sub_w(a) * sig if ua == 1 else delta
                        off = self._sub_w(b) if ub == 1 else FieldValue()
                        d2 = line - off * sig2
                    else:
                        rho, kappa = data
                        if forward:
                            # u_b = rho*u_a + kappa
                            sig2 = sig * rho
                            d2 = delta - kappa * (sig * rho)
                        else:
                            # u_a = rho*u_b + kappa, so X = delta + sig*kappa + sig*rho*u_b
                            sig2 = sig * rho
                            d2 = delta + kappa * sig
                    if b in self.frame:
                        if self.frame[b][0] != sig2 or not self._same(self.frame[b][1], d2):
                            raise RuntimeError("inconsistent frames while rebuilding strips")
                        continue
                    self.frame[b] = (sig2, d2)
                    stack.append(b)
            lo_x = None
            hi_x = None
            for i in groups[r]:
                a, bnd = self._x_range(i)
                lo_x = a if lo_x is None or self._lt(a, lo_x) else lo_x
                hi_x = bnd if hi_x is None or self._lt(hi_x, bnd) else hi_x
            for i in groups[r]:
                sig, d = self.frame[i]
                self.frame[i] = (sig, d - lo_x)
            widths.append(hi_x - lo_x)
        self.new_widths = widths

        # sides: marks and contacts per (group, side)
        ng = len(order)
        marks: dict[tuple[int, str], list] = {(g, sd): [] for g in range(ng) for sd in "LR"}
        lines: dict[tuple[int, str], list] = {(g, sd): [] for g in range(ng) for sd in "LR"}
        for i in range(n):
            g = self.group_of[i]
            for u in (0, 1):
                sd = self._new_side(i, u)
                if sd is None:
                    continue
                pi, k = self.subs[i]
                p = self.pieces[pi]
                for lo, hi, other, uo, flip in self.contacts.get((i, u), []):
                    lines[(g, sd)].append((self._T(i, lo), self._T(i, hi), i, lo, hi, other, uo, flip))
                x = self.cuts[pi][k + u]
                for m in self._side_marks(pi, x):
                    if self._lt(p.lo, m) and self._lt(m, p.hi):
                        T = self._T(i, m)
                        if not any(lat_eq(T, y) for y in marks[(g, sd)]):
                            marks[(g, sd)].append(T)
        for key in marks:
            marks[key].sort(key=cmp_to_key(self._cmp))
        self.new_marks = marks
        bigons = tuple(Bigon(widths[g], tuple(marks[(g, "L")]), tuple(marks[(g, "R")])) for g in range(ng))

        gluings = {}
        zero = 0.0 if s.mode == "float" else FieldValue()
        one = 1.0 if s.mode == "float" else FieldValue((1,))
        for (g, sd), ls in lines.items():
            pts = [zero] + marks[(g, sd)] + [one]
            for k in range(len(pts) - 1):
                a, b = pts[k], pts[k + 1]
                found = None
                for Ta, Tb, i, lo, hi, other, uo, flip in ls:
                    lo_T, hi_T = (Ta, Tb) if not self._lt(Tb, Ta) else (Tb, Ta)
                    lo_o = a if self._lt(lo_T, a) else lo_T
                    hi_o = b if self._lt(b, hi_T) else hi_T
                    if self._lt(lo_o, hi_o):
                        found = (i, other, uo, flip, _half(lo_o + hi_o))
                        break
                if found is None:
                    raise RuntimeError("side segment without a partner")
                i, other, uo, flip, Tm = found
                sig = self.frame[i][0]
                t = Tm if sig == 1 else one_minus(Tm)
                t2 = one_minus(t) if flip else t
                sig2 = self.frame[other][0]
                T2 = t2 if sig2 == 1 else one_minus(t2)
                g2 = self.group_of[other]
                sd2 = self._new_side(other, uo)
                if sd2 is None:
                    raise RuntimeError("critical line inside a rebuilt strip")
                idx2 = sum(1 for m in marks[(g2, sd2)] if self._lt(m, T2))
                newflip = (sig * sig2 * (-1 if flip else 1)) == -1
                ra, rb = SegRef(g, sd, k), SegRef(g2, sd2, idx2)
                key = (min(ra, rb), max(ra, rb))
                if key in gluings and gluings[key] != newflip:
                    raise RuntimeError("inconsistent rebuilt gluing")
                gluings[key] = newflip
        glue = tuple(Glue(a, b, f) for (a, b), f in sorted(gluings.items()))
        self.new_bigons = bigons
        self.new_gluings = glue
        return bigons, glue

    def _same(self, a, b):
        return lat_eq(a, b) if isinstance(a, float) or isinstance(b, float) else a == b

    def _sub_w(self, i):
        pi, k = self.subs[i]
        return self.cuts[pi][k + 1] - self.cuts[pi][k]

    def _x_range(self, i):
        sig, d = self.frame[i]
        w = self._sub_w(i)
        return (d, d + w) if sig == 1 else (d - w, d)

    def _new_side(self, i, u):
        sig, d = self.frame[i]
        X = d + self._sub_w(i) * sig if u == 1 else d
        W = self.new_widths[self.group_of[i]]
        if X == 0:
            return "L"
        if X == W:
            return "R"
        return None

    def _T(self, i, t):
        return t if self.frame[i][0] == 1 else one_minus(t)

    # -- mapping old points to the new surface
    def map_mark(self, j: int, side: str, pos: int) -> PointRef:
        bg = self.s.bigons[j]
        t = bg.marks(side)[pos - 1]
        pi = self.piece_at(j, t)
        ncut = len(self.cuts[pi]) - 1
        i = self.sub_index[(pi, 0 if side == "L" else ncut - 1)]
        u = 0 if side == "L" else 1
        g = self.group_of[i]
        sd = self._new_side(i, u)
        T = self._T(i, t)
        idx = [k for k, m in enumerate(self.new_marks[(g, sd)]) if lat_eq(m, T)]
        return PointRef(g, sd, idx[0] + 1)

    def map_vertex(self, j: int, vertex: int) -> PointRef:
        ids = self.by_bigon[j]
        pi = ids[0] if vertex == 0 else ids[-1]
        i = self.sub_index[(pi, 0)]
        g = self.group_of[i]
        v2 = vertex if self.frame[i][0] == 1 else 1 - vertex
        return PointRef(g, "L", 0 if v2 == 0 else len(self.new_bigons[g].left) + 1)

    def map_point(self, j: int, x, t):
        """New (bigon, longitude, latitude) of a regular point of the old surface."""
        pi = self.piece_at(j, t)
        k = self._sub_at(pi, x)
        i = self.sub_index[(pi, k)]
        sig, d = self.frame[i]
        u = x - self.cuts[pi][k]
        return self.group_of[i], d + u * sig, self._T(i, t)

    def surface(self) -> StripSurface:
        s = self.s
        self.build()
        labs = []
        for lab in s.labels:
            w = lab.witness
            nmarks = len(s.bigons[w.bigon].marks(w.side))
            if 1 <= w.pos <= nmarks:
                nw = self.map_mark(w.bigon, w.side, w.pos)
            else:
                nw = self.map_vertex(w.bigon, 0 if w.pos == 0 else 1)
            labs.append(Label(lab.name, lab.kind, nw))
        return StripSurface(
            bigons=self.new_bigons,
            gluings=self.new_gluings,
            labels=tuple(labs),
            thetas=s.thetas,
            generators=s.generators,
            embedding=s.embedding,
            mode=s.mode,
        )


def restrip(s: StripSurface) -> StripSurface:
    """Rebuild the strips of ``s``, merging bigons across sides that are not critical leaves."""
    if not s.zero_classes:
        return s
    return _Engine(s, []).surface()


# -- twist ---------------------------------------------------------------------

def _component(s: StripSurface, component) -> Component:
    if isinstance(component, Component):
        return component
    comps = annulus_decomposition(s).components
    if not 0 <= component < len(comps):
        raise DeformationError(f"no component {component}")
    return comps[component]


def _twist_engine(s: StripSurface, component, psi) -> _Engine:
    comp = _component(s, component)
    if comp.kind != "annulus":
        raise DeformationError("twists are defined on annuli, not on disks around poles")
    psi = FieldValue._coerce(psi)
    if lat_lt(psi, FieldValue(), s.embedding) or not lat_lt(psi, comp.circumference, s.embedding):
        raise DeformationError("twist amount must lie in [0, circumference)")
    rects = [_CoreRect(r.bigon, _half(r.lo + r.hi), r.orient, r.start, s.bigons[r.bigon].width) for r in comp.rects]
    return _Engine(s, [_Core(rects, comp.circumference, psi)])


def twist(s: StripSurface, component, psi) -> StripSurface:
    """Cut an annulus along its core and re-glue the two halves shifted by ``psi`` turns.

    ``component`` is an index into ``annulus_decomposition(s).components`` or a
    :class:`Component`.  The half on the north side of the first rectangle
    (in that rectangle's frame) moves by ``+psi`` along the core.
    """
    return _twist_engine(s, component, psi).surface()


def _twist(s: StripSurface, component, psi):
    """Twist and also return the engine, whose ``map_point`` tracks regular points."""
    eng = _twist_engine(s, component, psi)
    return eng.surface(), eng


# -- slide ---------------------------------------------------------------------

def _zero_index(s: StripSurface, zero) -> int:
    if isinstance(zero, str):
        for i, z in enumerate(s.zero_classes):
            if z.label == zero:
                return i
        raise DeformationError(f"no zero labeled {zero}")
    if not 0 <= zero < len(s.zero_classes):
        raise DeformationError(f"no zero class {zero}")
    return zero


def _relative_orientation(s: StripSurface, zi: int) -> dict[PointRef, int]:
    """+1 for members whose latitude equals the class latitude in their frame, -1 otherwise."""
    z = s.zero_classes[zi]
    rel = {z.members[0]: 1}
    members = set(z.members)
    changed = True
    while changed:
        changed = False
        for g in s.gluings:
            for end in (0, 1):
                pa = PointRef(g.a.bigon, g.a.side, g.a.index + end)
                pb = PointRef(g.b.bigon, g.b.side, g.b.index + (1 - end if g.flip else end))
                for x, y in ((pa, pb), (pb, pa)):
                    if x in rel and y in members and y not in rel:
                        rel[y] = -rel[x] if g.flip else rel[x]
                        changed = True
    return rel


def slide(s: StripSurface, zero, t_new) -> StripSurface:
    """Move every marked point of an even zero class to latitude ``t_new`` (or ``1 - t_new``)."""
    zi = _zero_index(s, zero)
    z = s.zero_classes[zi]
    if s.mode != "float":
        t_new = FieldValue._coerce(t_new)
        if t_new.ngen <= len(s.generators):
            t_new = t_new.padded(len(s.generators))
    zero_v = 0.0 if s.mode == "float" else FieldValue()
    one_v = 1.0 if s.mode == "float" else FieldValue((1,))
    if not (lat_lt(zero_v, t_new, s.embedding) and lat_lt(t_new, one_v, s.embedding)):
        raise DeformationError("target latitude must lie strictly between 0 and 1")
    if z.s % 2:
        raise DeformationError("odd zeros are pinned to the equator")
    rel = _relative_orientation(s, zi)
    bigons = [list(map(list, (bg.left, bg.right))) for bg in s.bigons]
    for m in z.members:
        sidx = 0 if m.side == "L" else 1
        bigons[m.bigon][sidx][m.pos - 1] = t_new if rel[m] == 1 else one_minus(t_new)
    out = []
    for j, (left, right) in enumerate(bigons):
        for marks in (left, right):
            for a, b in zip(marks, marks[1:]):
                if not lat_lt(a, b, s.embedding):
                    raise DeformationError("slide would pass a marked point past another on the same side")
        out.append(Bigon(s.bigons[j].width, tuple(left), tuple(right)))
    new = s.with_changes(bigons=tuple(out))
    rep = validate(new)
    if not rep.ok:
        raise DeformationError(f"slide produced an invalid surface: {rep}")
    return new


# -- latitude rescaling -------------------------------------------------------

def lambda_deform(s: StripSurface, lam: float) -> StripSurface:
    """Rescale latitudes by the conformal map of the upper hemisphere ``z -> lam*z``.

    Requires an orientable foliation; the result is in float mode.
    """
    if not lam > 0:
        raise DeformationError("lambda must be positive")
    signs = orientation_signs(s)
    if signs is None:
        raise DeformationError("lambda deformation needs an orientable foliation")

    def f(t: float) -> float:
        return (2 / math.pi) * math.atan(lam * math.tan(math.pi * t / 2))

    out = []
    for j, bg in enumerate(s.bigons):
        if signs[j] == 1:
            g = f
        else:
            def g(t, f=f):
                return 1.0 - f(1.0 - t)
        out.append(Bigon(bg.width, tuple(g(float(_as_float(t, s))) for t in bg.left),
                         tuple(g(float(_as_float(t, s))) for t in bg.right)))
    return s.with_changes(bigons=tuple(out), mode="float")


def _as_float(t, s: StripSurface) -> float:
    return t if isinstance(t, float) else t.approx(s.embedding)


# -- pole splitting -------------------------------------------------------------

def _pole_index(s: StripSurface, pole) -> int:
    if isinstance(pole, str):
        for i, p in enumerate(s.pole_classes):
            if p.label == pole:
                return i
        raise DeformationError(f"no pole labeled {pole}")
    if not 0 <= pole < len(s.pole_classes):
        raise DeformationError(f"no pole class {pole}")
    return pole


def pole_link(s: StripSurface, pi: int) -> list[tuple[int, int, FieldValue]]:
    """Corners ``(bigon, vertex, angular start)`` met in order around a pole.

    North corners are crossed from left to right, south corners from right to left.
    """
    p = s.pole_classes[pi]
    j, v = p.members[0]
    out = []
    pos = FieldValue()
    for _ in range(2 * s.b + 2):
        out.append((j, v, pos))
        pos = pos + s.bigons[j].width
        bg = s.bigons[j]
        seg = SegRef(j, "R", 0) if v == 0 else SegRef(j, "L", len(bg.left))
        other, _ = s.partner[seg]
        j, v = other.bigon, 0 if other.side == "L" else 1
        if (j, v) == p.members[0]:
            return out
    raise RuntimeError("pole link did not close")


def split_pole(s: StripSurface, pole, start, ell) -> StripSurface:
    """Split a pole of integer angle ``k >= 2`` into ``k`` smooth poles and a zero.

    Slits of latitude length ``ell`` are cut from the pole at the ``k``
    angular positions ``start, start+1, ..., start+k-1`` (turns, measured
    around the pole from its first corner) and re-glued cyclically.  The pole's
    label moves to the new zero.
    """
    pi = _pole_index(s, pole)
    pc = s.pole_classes[pi]
    if not pc.angle.is_rational() or pc.angle.const.denominator != 1 or pc.angle.const < 2:
        raise DeformationError("only poles of integer angle at least 2 can be split")
    k = int(pc.angle.const)
    start = FieldValue._coerce(start)
    ell_v = ell if s.mode == "float" else FieldValue._coerce(ell)
    zero_v = 0.0 if s.mode == "float" else FieldValue()
    half_v = 0.5 if s.mode == "float" else FieldValue((Fraction(1, 2),))
    if not (lat_lt(zero_v, ell_v, s.embedding) and lat_lt(ell_v, half_v, s.embedding)):
        raise DeformationError("slit length must lie strictly between 0 and 1/2")
    if lat_lt(start, FieldValue(), s.embedding) or not lat_lt(start, FieldValue((1,)), s.embedding):
        raise DeformationError("start position must lie in [0, 1)")
    link = pole_link(s, pi)

    # locate each slit: (bigon, vertex, local x, on_entering_side)
    slits = []
    for i in range(k):
        X = start + i
        for j, v, a0 in link:
            w = s.bigons[j].width
            if not lat_lt(X, a0, s.embedding) and lat_lt(X, a0 + w, s.embedding):
                a = X - a0
                if a == 0:
                    slits.append((j, v, None))
                else:
                    slits.append((j, v, a if v == 0 else w - a))
                break
        else:
            raise RuntimeError("slit position outside the pole link")

    # cut bigons vertically at interior slit positions
    cuts: dict[int, list] = {}
    for j, v, x in slits:
        if x is not None and not any(x == y for y in cuts.setdefault(j, [])):
            cuts[j].append(x)
    pieces: dict[int, list[int]] = {}
    widths = []
    offsets: dict[int, list] = {}
    for j, bg in enumerate(s.bigons):
        xs = sorted(cuts.get(j, []), key=cmp_to_key(lambda a, b: -1 if lat_lt(a, b, s.embedding) else 1))
        bounds = [FieldValue()] + xs + [bg.width]
        pieces[j] = []
        offsets[j] = bounds
        for q in range(len(bounds) - 1):
            pieces[j].append(len(widths))
            widths.append(bounds[q + 1] - bounds[q])
    marks: dict[tuple[int, str], list] = {}
    for j, bg in enumerate(s.bigons):
        for q in pieces[j]:
            marks[(q, "L")] = list(bg.left) if q == pieces[j][0] else []
            marks[(q, "R")] = list(bg.right) if q == pieces[j][-1] else []
    pairs = []
    for g in s.gluings:
        def re(seg):
            q = pieces[seg.bigon][0] if seg.side == "L" else pieces[seg.bigon][-1]
            return [q, seg.side, seg.index]
        pairs.append([re(g.a), re(g.b), g.flip])
    for j in pieces:
        for q1, q2 in zip(pieces[j], pieces[j][1:]):
            pairs.append([[q1, "R", 0], [q2, "L", 0], False])

    def bank_partner(q, side, idx):
        for a, b, f in pairs:
            if a == [q, side, idx]:
                return b, f
            if b == [q, side, idx]:
                return a, f
        raise RuntimeError("unglued segment")

    banks = []  # (before bank, after bank) as (piece, side, vertex)
    for j, v, x in slits:
        if x is None:
            if v == 0:
                after = (pieces[j][0], "L", 0)
            else:
                after = (pieces[j][-1], "R", 1)
            idx = 0 if v == 0 else len(marks[(after[0], after[1])])
            b, f = bank_partner(after[0], after[1], idx)
            before = (b[0], b[1], 1 - v if f else v)
        else:
            qi = [n for n, bnd in enumerate(offsets[j]) if bnd == x][0]
            west, east = pieces[j][qi - 1], pieces[j][qi]
            if v == 0:
                before, after = (west, "R", 0), (east, "L", 0)
            else:
                before, after = (east, "L", 1), (west, "R", 1)
        banks.append((before, after))

    def insert(q, side, v):
        ms = marks[(q, side)]
        if v == 0:
            if ms and not lat_lt(ell_v, ms[0], s.embedding):
                raise DeformationError("slit meets a marked point")
            ms.insert(0, ell_v)
            for pr in pairs:
                for seg in pr[:2]:
                    if seg[0] == q and seg[1] == side:
                        seg[2] += 1
        else:
            t = one_minus(ell_v)
            if ms and not lat_lt(ms[-1], t, s.embedding):
                raise DeformationError("slit meets a marked point")
            ms.append(t)

    for before, after in banks:
        insert(*before)
        insert(*after)

    def slit_seg(q, side, v):
        # resolved only after every insertion, since insertions shift indices
        return [q, side, 0 if v == 0 else len(marks[(q, side)])]

    for i in range(k):
        after = banks[i][1]
        before = banks[(i + 1) % k][0]
        pairs.append([slit_seg(*after), slit_seg(*before), after[2] != before[2]])
    slit_segs = [(None, slit_seg(*banks[0][1]), None, banks[0][1][2])]

    # labels: re-anchor witnesses geometrically
    new_labels = []
    for lab in s.labels:
        w = lab.witness
        nmarks = len(s.bigons[w.bigon].marks(w.side))
        if lab.name == pc.label:
            continue
        if 1 <= w.pos <= nmarks:
            t = s.bigons[w.bigon].marks(w.side)[w.pos - 1]
            q = pieces[w.bigon][0] if w.side == "L" else pieces[w.bigon][-1]
            pos = [n for n, m in enumerate(marks[(q, w.side)], start=1) if lat_eq(m, t)][0]
            new_labels.append(Label(lab.name, lab.kind, PointRef(q, w.side, pos)))
        else:
            q = pieces[w.bigon][0]
            vx = 0 if w.pos == 0 else 1
            new_labels.append(Label(lab.name, lab.kind, PointRef(q, "L", 0 if vx == 0 else len(marks[(q, "L")]) + 1)))
    q, side, idx = slit_segs[0][1]
    va = slit_segs[0][3]
    name = pc.label if pc.label is not None else f"p{len(s.labels) + 1}"
    new_labels.append(Label(name, "zero", PointRef(q, side, 1 if va == 0 else len(marks[(q, side)]))))
    new_labels.sort(key=lambda lab: lab.index)
    thetas = dict(s.thetas)
    thetas[name] = pc.angle
    nb = tuple(Bigon(widths[q], tuple(marks[(q, "L")]), tuple(marks[(q, "R")])) for q in range(len(widths)))
    glue = tuple(Glue(SegRef(*a), SegRef(*b), f) for a, b, f in pairs)
    mid = StripSurface(nb, glue, tuple(new_labels), tuple(sorted(thetas.items(), key=lambda x: int(x[0][1:]))),
                       s.generators, s.embedding, (), s.mode)
    rep = validate(mid)
    if not rep.ok:
        raise DeformationError(f"split produced an invalid surface: {rep}")
    return restrip(mid)


# -- genericity ------------------------------------------------------------------

def saddle_connections(s: StripSurface) -> list[SegRef]:
    """Segments joining two marked points, one per glued pair."""
    out = []
    for seg in s.segments():
        n = len(s.bigons[seg.bigon].marks(seg.side))
        if 0 < seg.index < n:
            other, _ = s.partner[seg]
            if seg <= other:
                out.append(seg)
    return out


def _twist_amount(s: StripSurface, ci: int):
    """Half the smallest positive offset between leaves reaching the core from opposite sides."""
    eng = _twist_engine(s, ci, FieldValue())
    eng.trace_all()
    near = [X for _, X, role in eng.crossings if role == "near"]
    far = [X for _, X, role in eng.crossings if role == "far"]
    circ = eng.cores[0].circ
    best = None
    for a in near:
        for b in far:
            d = eng._mod(b - a, circ)
            if d != 0 and (best is None or lat_lt(d, best, s.embedding)):
                best = d
    if best is None:
        best = circ
    return best * Fraction(1, 2)


@dataclass
class DeformationStep:
    operation: str
    parameters: dict
    before: dict
    after: dict


@dataclass
class DeformationLog:
    steps: list[DeformationStep] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def record(self, op: str, params: dict, before: StripSurface, after: StripSurface):
        self.steps.append(DeformationStep(op, params, invariants(before), invariants(after)))

    def lines(self) -> list[str]:
        out = []
        for i, st in enumerate(self.steps, start=1):
            ps = ", ".join(f"{k}={v}" for k, v in st.parameters.items())
            out.append(f"{i}. {st.operation}({ps}): bigons {st.before['bigons']} -> {st.after['bigons']}, "
                       f"saddles {st.before['saddles']} -> {st.after['saddles']}")
        out.extend(self.notes)
        return out


def invariants(s: StripSurface) -> dict:
    """Quantities every deformation must preserve, plus a few that it may change."""
    c = classify_points(s)
    lat = {}
    for z in s.zero_classes:
        if z.label is not None:
            lat[z.label] = z.abs_latitude
    return {
        "genus": c.genus,
        "angles": tuple(c.angles),
        "partition": str(c.partition),
        "latitudes": lat,
        "bigons": s.b,
        "saddles": len(saddle_connections(s)),
    }


def make_generic(s: StripSurface, log: DeformationLog | None = None) -> StripSurface:
    """Twist along annuli until no saddle connection remains."""
    if log is None:
        log = DeformationLog()
    if not s.zero_classes:
        log.notes.append("no zeros: the surface is a football and is returned unchanged")
        return s
    cur = restrip(s)
    if cur.b != s.b:
        log.record("merge", {}, s, cur)
    for _ in range(4 * sum(len(bg.left) + len(bg.right) for bg in cur.bigons) + 4):
        saddles = saddle_connections(cur)
        if not saddles:
            return cur
        seg = saddles[0]
        top = cur.bigons[seg.bigon].marks(seg.side)[seg.index - 1]
        dec = annulus_decomposition(cur)
        ci = None
        for i, c in enumerate(dec.components):
            for r in c.rects:
                if r.bigon == seg.bigon and lat_eq(r.lo, top):
                    ci = i
        if ci is None or dec.components[ci].kind != "annulus":
            raise RuntimeError("saddle connection does not bound an annulus")
        psi = _twist_amount(cur, ci)
        for _ in range(8):
            nxt = twist(cur, ci, psi)
            if len(saddle_connections(nxt)) < len(saddles):
                break
            psi = psi * Fraction(1, 2)
        else:
            raise RuntimeError("twist did not break the saddle connection")
        log.record("twist", {"component": ci, "psi": psi}, cur, nxt)
        cur = nxt
    raise RuntimeError("make_generic did not terminate")


def generic_check(s: StripSurface) -> bool:
    return is_generic(s)
