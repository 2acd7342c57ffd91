"""Brute-force enumeration of small strip surfaces.

Patterns are generated bigon by bigon in breadth-first order, so that each
pattern is produced in its own breadth-first labeling; a pattern is kept only
when that labeling is the minimal one over all roots.  Every surviving
pattern then receives one latitude sample and one width sample per set of
poles forced to be smooth.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Iterator

from .exactfield import FieldValue, Q, nullspace
from .surface import (
    Bigon,
    Glue,
    SegRef,
    StripSurface,
    auto_label,
    canonical_key,
    validate,
)

__all__ = [
    "EnumerationBoundError",
    "DEFAULT_MAX_BIGONS",
    "max_bigons_bound",
    "enumerate_patterns",
    "enumerate_surfaces",
    "positive_point",
]

DEFAULT_MAX_BIGONS = 4


class EnumerationBoundError(ValueError):
    pass


def max_bigons_bound() -> int:
    raw = os.environ.get("SPHFOLI_MAX_BIGONS")
    return int(raw) if raw else DEFAULT_MAX_BIGONS


# -- patterns -----------------------------------------------------------------

@dataclass(frozen=True)
class Pattern:
    types: tuple[tuple[int, int], ...]  # marks on (left, right) per bigon
    gluings: tuple[Glue, ...]
    symmetric: bool = False


def _seg_kind(n_marks: int, k: int) -> str:
    if n_marks == 0:
        return "full"
    if k == 0:
        return "top"
    if k == n_marks:
        return "bottom"
    return "mid"


def _compatible(ka: str, kb: str, flip: bool) -> bool:
    if ka in ("mid", "full"):
        return kb == ka
    if not flip:
        return ka == kb
    return {ka, kb} == {"top", "bottom"}


def _dummy_surface(types, gluings) -> StripSurface:
    bigons = tuple(
        Bigon(FieldValue((1,)),
              tuple(FieldValue((Q(i, l + 1),)) for i in range(1, l + 1)),
              tuple(FieldValue((Q(i, r + 1),)) for i in range(1, r + 1)))
        for l, r in types
    )
    return StripSurface(bigons, tuple(gluings))


def enumerate_patterns(max_bigons: int, max_marks: int, first_type=None) -> Iterator[Pattern]:
    """Canonical gluing patterns with 1..max_marks marks on every side.

    The single football (one bigon, unmarked sides glued together) is
    included as the only pattern with unmarked sides.  ``first_type`` pins
    the root bigon's type, which lets callers split the work.
    """
    types_all = [(l, r) for l in range(1, max_marks + 1) for r in range(1, max_marks + 1)]
    if first_type is None or first_type == (0, 0):
        yield Pattern(((0, 0),), (Glue(SegRef(0, "L", 0), SegRef(0, "R", 0), False),), True)
    roots = types_all if first_type is None else [t for t in types_all if t == first_type]

    def bigon_segs(b, t):
        l, r = t
        return [(SegRef(b, "L", k), _seg_kind(l, k)) for k in range(l + 1)] + \
               [(SegRef(b, "R", k), _seg_kind(r, k)) for k in range(r + 1)]

    def rec(types, segs, matched, glue, start):
        i = start
        while i < len(segs) and segs[i][0] in matched:
            i += 1
        if i == len(segs):
            auts = _automorphisms(types, glue)
            if auts:
                yield Pattern(tuple(types), tuple(glue), auts > 1)
            return
        nxt, kn = segs[i]
        # glue to an existing free segment
        for seg, kind in segs[i + 1:]:
            if seg in matched:
                continue
            flip = seg.side == nxt.side
            if not _compatible(kn, kind, flip):
                continue
            matched.add(nxt)
            matched.add(seg)
            glue.append(Glue(nxt, seg, flip))
            yield from rec(types, segs, matched, glue, i + 1)
            glue.pop()
            matched.discard(nxt)
            matched.discard(seg)
        # or open a new bigon, entered through its opposite side without a flip
        if len(types) < max_bigons:
            other_side = "R" if nxt.side == "L" else "L"
            for t in types_all:
                # the root must carry the smallest type in either orientation
                if min(t, t[::-1]) < types[0]:
                    continue
                b = len(types)
                new = bigon_segs(b, t)
                types.append(t)
                segs.extend(new)
                for seg, kind in new:
                    if seg.side == other_side and _compatible(kn, kind, False):
                        matched.add(nxt)
                        matched.add(seg)
                        glue.append(Glue(nxt, seg, False))
                        yield from rec(types, segs, matched, glue, i + 1)
                        glue.pop()
                        matched.discard(nxt)
                        matched.discard(seg)
                del segs[-len(new):]
                types.pop()

    for t in roots:
        if t[::-1] < t:
            continue
        yield from rec([t], bigon_segs(0, t), set(), [], 0)


def _pattern_code(types, partner, root: int, turned_root: bool):
    """Breadth-first encoding of a pattern from a root bigon, or None if incomplete."""
    state = {root: turned_root}
    newidx = {root: 0}
    order = [root]
    code_types = []
    code_glue = []
    i = 0
    while i < len(order):
        b = order[i]
        i += 1
        l, r = types[b]
        turned = state[b]
        code_types.append((r, l) if turned else (l, r))
        if turned:
            local = [SegRef(b, "R", r - k) for k in range(r + 1)] + [SegRef(b, "L", l - k) for k in range(l + 1)]
        else:
            local = [SegRef(b, "L", k) for k in range(l + 1)] + [SegRef(b, "R", k) for k in range(r + 1)]
        for seg in local:
            other, flip = partner[seg]
            c = other.bigon
            if c not in state:
                state[c] = flip ^ state[b]
                newidx[c] = len(order)
                order.append(c)
            if state[c]:
                cl, cr = types[c]
                n = cl if other.side == "L" else cr
                code_glue.append((newidx[c], "R" if other.side == "L" else "L", n - other.index))
            else:
                code_glue.append((newidx[c], other.side, other.index))
    return (tuple(code_types), tuple(code_glue))


def _automorphisms(types, glue) -> int:
    """Number of roots reproducing the generated labeling; 0 if it is not minimal."""
    partner = {}
    for g in glue:
        partner[g.a] = (g.b, g.flip)
        partner[g.b] = (g.a, g.flip)
    mine = _pattern_code(types, partner, 0, False)
    count = 1
    for root in range(len(types)):
        for turned in (False, True):
            if (root, turned) == (0, False):
                continue
            if min(types[root], types[root][::-1]) != types[0]:
                continue
            code = _pattern_code(types, partner, root, turned)
            if code < mine:
                return 0
            count += code == mine
    return count


# -- exact interior points -------------------------------------------------------

def _fm_interior(A: list[list[Q]], c: list[Q]) -> list[Q] | None:
    """A rational point with A z + c > 0 strictly, by Fourier-Motzkin elimination."""
    d = len(A[0]) if A else 0
    if d == 0:
        return [] if all(x > 0 for x in c) else None
    pos, neg, zero = [], [], []
    for row, ci in zip(A, c):
        a = row[-1]
        (pos if a > 0 else neg if a < 0 else zero).append((row, ci))
    # z_d > -(rest)/a for a>0 ; z_d < (rest)/(-a) for a<0
    newA, newc = [], []
    for row, ci in zero:
        newA.append(row[:-1])
        newc.append(ci)
    for (rp, cp), (rn, cn) in product(pos, neg):
        ap, an = rp[-1], -rn[-1]
        newA.append([an * x + ap * y for x, y in zip(rp[:-1], rn[:-1])])
        newc.append(an * cp + ap * cn)
    sub = _fm_interior(newA, newc) if d > 1 else ([] if all(x > 0 for x in newc) else None)
    if sub is None:
        return None
    lows = [-(sum(x * z for x, z in zip(row[:-1], sub)) + ci) / row[-1] for row, ci in pos]
    highs = [(sum(x * z for x, z in zip(row[:-1], sub)) + ci) / -row[-1] for row, ci in neg]
    lo = max(lows) if lows else None
    hi = min(highs) if highs else None
    if lo is not None and hi is not None:
        if not lo < hi:
            return None
        v = (lo + hi) / 2
    elif lo is not None:
        v = lo + 1
    elif hi is not None:
        v = hi - 1
    else:
        v = Q(0)
    return sub + [v]


def positive_point(rows: list[list[int]], rhs: list[Q], ncols: int) -> list[Q] | None:
    """A strictly positive rational solution of ``rows * W = rhs``, if one exists."""
    from .exactfield import _rref

    if rows:
        aug = [[Q(x) for x in r] + [Q(v)] for r, v in zip(rows, rhs)]
        red, piv = _rref(aug)
        if ncols in piv:
            return None
        w0 = [Q(0)] * ncols
        for r, pc in enumerate(piv):
            w0[pc] = red[r][-1]
        basis = nullspace([list(r) for r in rows])
    else:
        w0 = [Q(0)] * ncols
        basis = [[Q(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    A = [[basis[k][j] for k in range(len(basis))] for j in range(ncols)]
    z = _fm_interior(A, w0)
    if z is None:
        return None
    return [w0[j] + sum(A[j][k] * z[k] for k in range(len(z))) for j in range(ncols)]


# -- latitudes --------------------------------------------------------------

def _latitudes(s: StripSurface):
    """Assign mark latitudes consistent with the gluing; None if impossible.

    Each zero class gets an absolute latitude ``a`` in (0, 1/2] and each of
    its marks sits at ``a`` or ``1 - a``.  Classes forced to the equator get
    1/2; the others are tried with north/south choices in lexicographic order.
    """
    half = Q(1, 2)
    classes = s._classes
    zero_cls = [c for c in classes if c[0][0] == "m"]
    # relative orientation of each mark inside its class: +1 means t = h, -1 means t = 1 - h
    rel: dict = {}
    forced_half = set()
    adj: dict = {}
    for g in s.gluings:
        a, b = g.a, g.b
        pairs = ((0, 1), (1, 0)) if g.flip else ((0, 0), (1, 1))
        for ea, eb in pairs:
            ka = s.point_key(a.bigon, a.side, a.index + ea)
            kb = s.point_key(b.bigon, b.side, b.index + eb)
            if ka[0] == "m":
                adj.setdefault(ka, []).append((kb, -1 if g.flip else 1))
                adj.setdefault(kb, []).append((ka, -1 if g.flip else 1))
    for ci, members in enumerate(zero_cls):
        root = members[0]
        rel[root] = 1
        stack = [root]
        while stack:
            x = stack.pop()
            for y, sg in adj.get(x, []):
                want = rel[x] * sg
                if y not in rel:
                    rel[y] = want
                    stack.append(y)
                elif rel[y] != want:
                    forced_half.add(ci)
    cls_of = {m: ci for ci, members in enumerate(zero_cls) for m in members}
    free = [ci for ci in range(len(zero_cls)) if ci not in forced_half]

    sides = []
    for b, bg in enumerate(s.bigons):
        for side in "LR":
            keys = [("m", b, side, p) for p in range(1, len(bg.marks(side)) + 1)]
            sides.append(keys)

    for bits in product((1, -1), repeat=len(free)):
        hemi = dict(zip(free, bits))
        # each mark: ('E',) or ('N', cls) (t = a) or ('S', cls) (t = 1 - a)
        edges = set()
        ok = True
        for keys in sides:
            info = []
            for k in keys:
                ci = cls_of[k]
                if ci in forced_half:
                    info.append((1, None))
                else:
                    h = rel[k] * hemi[ci]
                    info.append((0, ci) if h == 1 else (2, ci))
            for x, y in zip(info, info[1:]):
                if x[0] > y[0]:
                    ok = False
                    break
                if x[0] == y[0]:
                    if x[0] == 1 or x[1] == y[1]:
                        ok = False
                        break
                    # north: increasing a; south: decreasing a
                    edges.add((x[1], y[1]) if x[0] == 0 else (y[1], x[1]))
            if not ok:
                break
        if not ok:
            continue
        order = _toposort(free, edges)
        if order is None:
            continue
        K = len(free)
        absl = {ci: Q(i + 1, 2 * K + 2) for i, ci in enumerate(order)}
        new_bigons = []
        for b, bg in enumerate(s.bigons):
            marks = {}
            for side in "LR":
                vals = []
                for p in range(1, len(bg.marks(side)) + 1):
                    k = ("m", b, side, p)
                    ci = cls_of[k]
                    if ci in forced_half:
                        vals.append(FieldValue((half,)))
                    else:
                        h = rel[k] * hemi[ci]
                        a = absl[ci]
                        vals.append(FieldValue((a if h == 1 else 1 - a,)))
                marks[side] = tuple(vals)
            new_bigons.append(Bigon(bg.width, marks["L"], marks["R"]))
        return tuple(new_bigons)
    return None


def _toposort(nodes, edges):
    indeg = {n: 0 for n in nodes}
    out = {n: [] for n in nodes}
    for a, b in edges:
        out[a].append(b)
        indeg[b] += 1
    ready = sorted(n for n in nodes if indeg[n] == 0)
    order = []
    while ready:
        n = ready.pop(0)
        order.append(n)
        for m in out[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
        ready.sort()
    return order if len(order) == len(nodes) else None


# -- surfaces ---------------------------------------------------------------

def _surfaces_from_pattern(pat: Pattern) -> list[StripSurface]:
    s = _dummy_surface(pat.types, pat.gluings)
    for members in s._classes:
        if members[0][0] == "m" and len(members) == 2:
            return []
    bigons = _latitudes(s)
    if bigons is None:
        return []
    s = s.with_changes(bigons=bigons)
    poles = [members for members in s._classes if members[0][0] == "v"]
    rows = []
    for members in poles:
        row = [0] * s.b
        for m in members:
            row[m[1]] += 1
        rows.append(row)
    out = []
    seen = set()
    keys = set()
    for mask in range(1 << len(poles)):
        U = [i for i in range(len(poles)) if mask >> i & 1]
        W = positive_point([rows[i] for i in U], [Q(1)] * len(U), s.b)
        if W is None:
            continue
        W = _avoid_unit_angles(rows, U, W)
        if W is None:
            continue
        key = tuple(W)
        if key in seen:
            continue
        seen.add(key)
        cand = s.with_changes(bigons=tuple(Bigon(FieldValue((w,)), bg.left, bg.right)
                                           for w, bg in zip(W, s.bigons)))
        cand = auto_label(cand)
        if pat.symmetric:
            # a pattern symmetry may carry one smooth-pole choice onto another
            k = canonical_key(cand, "set")
            if k in keys:
                continue
            keys.add(k)
        if validate(cand).ok:
            out.append(cand)
    return out


def _avoid_unit_angles(rows, U, W):
    """Nudge W inside its face so that poles outside U have angle other than 1."""
    others = [i for i in range(len(rows)) if i not in U]

    def bad(w):
        return any(sum(r * x for r, x in zip(rows[i], w)) == 1 for i in others)

    if not bad(W):
        return W
    basis = nullspace([rows[i] for i in U]) if U else [
        [Q(int(i == j)) for i in range(len(W))] for j in range(len(W))]
    if not basis:
        return None
    direction = [sum(Q(k + 1, 7 ** k) * v[j] for k, v in enumerate(basis)) for j in range(len(W))]
    scale = min(W) / (1 + max(abs(x) for x in direction)) / 2
    for step in range(1, len(rows) + 3):
        eps = scale / step
        cand = [w + eps * d for w, d in zip(W, direction)]
        if min(cand) > 0 and not bad(cand):
            return cand
    return None


def _work(args):
    max_bigons, max_marks, first = args
    out = []
    for pat in enumerate_patterns(max_bigons, max_marks, first):
        out.extend(_surfaces_from_pattern(pat))
    return out


def enumerate_surfaces(max_bigons: int, max_marks: int = 1, workers: int | None = None) -> list[StripSurface]:
    """All valid surfaces up to isomorphism, one sample per pattern and smooth-pole set.

    Work is split by the type of the root bigon and may run in parallel;
    results are concatenated in job order, so they do not depend on the
    scheduling.
    """
    bound = max_bigons_bound()
    if max_bigons > bound:
        raise EnumerationBoundError(f"max_bigons={max_bigons} exceeds the bound {bound} (SPHFOLI_MAX_BIGONS)")
    if max_bigons < 1 or max_marks < 1:
        raise EnumerationBoundError("max_bigons and max_marks must be positive")
    firsts = [(0, 0)] + [(l, r) for l in range(1, max_marks + 1) for r in range(1, max_marks + 1)]
    jobs = [(max_bigons, max_marks, f) for f in firsts]
    if workers is None:
        workers = min(len(jobs), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_work, jobs))
    else:
        chunks = [_work(j) for j in jobs]
    return [s for chunk in chunks for s in chunk]
