"""Strip surfaces: bigons glued along boundary segments.

Conventions used throughout the package:

* widths and cone angles are measured in turns (a full turn is 1);
* the latitude ``t`` of a boundary point runs from 0 at a bigon's north
  vertex to 1 at its south vertex;
* on a side with ``s`` marked points, positions are numbered from the north
  vertex: position 0 is the north vertex, 1..s are the marks and ``s + 1`` is
  the south vertex.  Segment ``k`` joins positions ``k`` and ``k + 1``.

A gluing with ``flip=False`` identifies ``[u, v]`` with ``[u, v]``; with
``flip=True`` it identifies ``[u, v]`` with ``[1 - v, 1 - u]``, reversing
latitude.  On an oriented surface an unflipped gluing joins a left side to a
right side and a flipped gluing joins two sides of the same hand.
"""

from __future__ import annotations

import re
from collections import defaultdict, deque
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterator, NamedTuple, Sequence

from .exactfield import (
    FieldValue,
    ScalarSyntaxError,
    default_embedding,
    format_scalar,
    parse_scalar,
    repr_float,
)

__all__ = [
    "SegRef",
    "PointRef",
    "Glue",
    "Bigon",
    "Label",
    "StripSurface",
    "ZeroClass",
    "PoleClass",
    "PointCensus",
    "TypePartition",
    "Violation",
    "ValidationReport",
    "EquatorialNet",
    "SurfaceParseError",
    "parse_surface",
    "format_surface",
    "load_surface",
    "validate",
    "classify_points",
    "is_generic",
    "is_orientable",
    "orientation_signs",
    "equatorial_net",
    "canonical_key",
    "is_isomorphic",
    "auto_label",
    "turnover",
]

FLOAT_TOL = 1e-12

Lat = FieldValue | float


class SegRef(NamedTuple):
    bigon: int
    side: str  # "L" or "R"
    index: int

    def __str__(self):
        return f"{self.bigon}.{self.side}.{self.index}"


class PointRef(NamedTuple):
    """A boundary point: bigon, side and position counted from the north vertex."""

    bigon: int
    side: str
    pos: int


class Glue(NamedTuple):
    a: SegRef
    b: SegRef
    flip: bool


@dataclass(frozen=True)
class Bigon:
    width: FieldValue
    left: tuple = ()
    right: tuple = ()

    def marks(self, side: str) -> tuple:
        return self.left if side == "L" else self.right

    def nseg(self, side: str) -> int:
        return len(self.marks(side)) + 1


@dataclass(frozen=True)
class Label:
    name: str  # "p<i>"
    kind: str  # "zero" or "pole"
    witness: PointRef

    @property
    def index(self) -> int:
        return int(self.name[1:])


# -- latitude helpers ------------------------------------------------------

_ZERO = FieldValue((0,))
_ONE = FieldValue((1,))
_HALF = FieldValue((Fraction(1, 2),))


def one_minus(t: Lat) -> Lat:
    return 1.0 - t if isinstance(t, float) else _ONE - t


def lat_eq(a: Lat, b: Lat) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return abs(float(a) - float(b)) <= FLOAT_TOL
    return a == b


def real_sign(v: Lat, embedding: Sequence[float] | None = None) -> int:
    """Sign of a latitude or width as a real number."""
    if isinstance(v, float):
        return 0 if abs(v) <= FLOAT_TOL else (1 if v > 0 else -1)
    if v.is_rational():
        c = v.const
        return (c > 0) - (c < 0)
    x = v.approx(embedding)
    if abs(x) < 1e-12:
        raise ValueError(f"sign of {v} is numerically ambiguous")
    return 1 if x > 0 else -1


def lat_lt(a: Lat, b: Lat, embedding=None) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return float(b) - float(a) > FLOAT_TOL
    if len(a._c) == 1 and len(b._c) == 1:
        return a._c[0] < b._c[0]
    return real_sign(b - a, embedding) > 0


def is_half(t: Lat) -> bool:
    if isinstance(t, float):
        return abs(t - 0.5) <= FLOAT_TOL
    return t == _HALF


# -- derived structures -----------------------------------------------------

@dataclass(frozen=True)
class ZeroClass:
    members: tuple[PointRef, ...]
    latitude: Lat  # latitude of the first member in its own bigon frame
    label: str | None

    @property
    def s(self) -> int:
        return len(self.members)

    @property
    def angle(self) -> FieldValue:
        return FieldValue((Fraction(self.s, 2),))

    @property
    def index(self) -> int:
        return 2 - self.s

    @property
    def abs_latitude(self) -> Lat:
        t = self.latitude
        return t if not lat_lt(one_minus(t), t) else one_minus(t)

    @property
    def equatorial(self) -> bool:
        return is_half(self.latitude)


@dataclass(frozen=True)
class PoleClass:
    members: tuple[tuple[int, int], ...]  # (bigon, 0 for north / 1 for south)
    angle: FieldValue
    label: str | None

    @property
    def index(self) -> int:
        return 2


@dataclass(frozen=True)
class TypePartition:
    E: frozenset
    O: frozenset
    N: frozenset

    def __post_init__(self):
        object.__setattr__(self, "E", frozenset(self.E))
        object.__setattr__(self, "O", frozenset(self.O))
        object.__setattr__(self, "N", frozenset(self.N))

    @property
    def n(self) -> int:
        return len(self.E) + len(self.O) + len(self.N)

    def __str__(self):
        def f(x):
            return "{" + ",".join(str(i) for i in sorted(x)) + "}" if x else "∅"

        return f"({f(self.E)},{f(self.O)},{f(self.N)})"


@dataclass(frozen=True)
class PointCensus:
    zeros: tuple[ZeroClass, ...]
    poles: tuple[PoleClass, ...]
    genus: int
    euler_characteristic: int
    angles: tuple[FieldValue, ...]  # labeled angle vector, by label index
    partition: TypePartition

    @property
    def index_sum(self) -> int:
        return sum(z.index for z in self.zeros) + 2 * len(self.poles)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]
    index_sum: int | None = None
    genus: int | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def __str__(self):
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


# -- the surface -----------------------------------------------------------

@dataclass(frozen=True)
class StripSurface:
    bigons: tuple[Bigon, ...]
    gluings: tuple[Glue, ...]
    labels: tuple[Label, ...] = ()
    thetas: tuple[tuple[str, FieldValue], ...] = ()
    generators: tuple[str, ...] = ()
    embedding: tuple[float, ...] = ()
    ids: tuple[str, ...] = ()
    mode: str = "exact"

    def __post_init__(self):
        if not self.ids:
            object.__setattr__(self, "ids", tuple(f"B{i + 1}" for i in range(len(self.bigons))))
        if len(self.embedding) < len(self.generators):
            emb = tuple(self.embedding) + tuple(default_embedding(len(self.generators))[len(self.embedding):])
            object.__setattr__(self, "embedding", emb)

    # -- basic access ---------------------------------------------------
    @property
    def b(self) -> int:
        return len(self.bigons)

    def widths(self) -> list[FieldValue]:
        return [bg.width for bg in self.bigons]

    def segments(self) -> Iterator[SegRef]:
        for i, bg in enumerate(self.bigons):
            for side in "LR":
                for k in range(bg.nseg(side)):
                    yield SegRef(i, side, k)

    def seg_interval(self, seg: SegRef) -> tuple[Lat, Lat]:
        marks = self.bigons[seg.bigon].marks(seg.side)
        zero, one = (0.0, 1.0) if self.mode == "float" else (_ZERO, _ONE)
        u = zero if seg.index == 0 else marks[seg.index - 1]
        v = one if seg.index == len(marks) else marks[seg.index]
        return u, v

    @cached_property
    def partner(self) -> dict[SegRef, tuple[SegRef, bool]]:
        out: dict[SegRef, tuple[SegRef, bool]] = {}
        for g in self.gluings:
            out[g.a] = (g.b, g.flip)
            out[g.b] = (g.a, g.flip)
        return out

    def theta_map(self) -> dict[str, FieldValue]:
        return dict(self.thetas)

    def label_of(self, name: str) -> Label:
        for lab in self.labels:
            if lab.name == name:
                return lab
        raise KeyError(name)

    def with_changes(self, **kw) -> "StripSurface":
        new = replace(self, **kw)
        # point classes depend only on the gluing and the mark counts
        if "_classes" in self.__dict__ and "gluings" not in kw and (
            "bigons" not in kw
            or [(len(x.left), len(x.right)) for x in new.bigons]
            == [(len(x.left), len(x.right)) for x in self.bigons]
        ):
            new.__dict__["_classes"] = self._classes
        return new

    # -- point identification --------------------------------------------
    def point_key(self, bigon: int, side: str, pos: int):
        s = len(self.bigons[bigon].marks(side))
        if pos == 0:
            return ("v", bigon, 0)
        if pos == s + 1:
            return ("v", bigon, 1)
        return ("m", bigon, side, pos)

    @cached_property
    def _classes(self):
        parent: dict = {}

        def find(x):
            parent.setdefault(x, x)
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

        for i, bg in enumerate(self.bigons):
            find(("v", i, 0))
            find(("v", i, 1))
            for side in "LR":
                for p in range(1, len(bg.marks(side)) + 1):
                    find(("m", i, side, p))
        for g in self.gluings:
            a, b = g.a, g.b
            ta, ba = self.point_key(a.bigon, a.side, a.index), self.point_key(a.bigon, a.side, a.index + 1)
            tb, bb = self.point_key(b.bigon, b.side, b.index), self.point_key(b.bigon, b.side, b.index + 1)
            if g.flip:
                union(ta, bb)
                union(ba, tb)
            else:
                union(ta, tb)
                union(ba, bb)
        groups: dict = defaultdict(list)
        for x in list(parent):
            groups[find(x)].append(x)
        return [sorted(v) for v in groups.values()]

    @cached_property
    def point_class_of(self) -> dict:
        out = {}
        for ci, members in enumerate(self._classes):
            for m in members:
                out[m] = ci
        return out

    def _class_kind(self, members) -> str:
        kinds = {m[0] for m in members}
        if kinds == {"v"}:
            return "pole"
        if kinds == {"m"}:
            return "zero"
        return "mixed"

    def resolve_witness(self, w: PointRef):
        """Class index of a witness point, or None if the point does not exist."""
        if not (0 <= w.bigon < self.b) or w.side not in ("L", "R"):
            return None
        s = len(self.bigons[w.bigon].marks(w.side))
        if not (0 <= w.pos <= s + 1):
            return None
        return self.point_class_of[self.point_key(w.bigon, w.side, w.pos)]

    @cached_property
    def label_by_class(self) -> dict[int, str]:
        out = {}
        for lab in self.labels:
            ci = self.resolve_witness(lab.witness)
            if ci is not None and ci not in out:
                out[ci] = lab.name
        return out

    def mark_value(self, key) -> Lat:
        _, b, side, p = key
        return self.bigons[b].marks(side)[p - 1]

    @cached_property
    def zero_classes(self) -> tuple[ZeroClass, ...]:
        out = []
        for ci, members in enumerate(self._classes):
            if self._class_kind(members) != "zero":
                continue
            pts = tuple(PointRef(m[1], m[2], m[3]) for m in members)
            out.append((pts, ZeroClass(pts, self.mark_value(members[0]), self.label_by_class.get(ci))))
        out.sort(key=lambda x: x[0])
        return tuple(z for _, z in out)

    @cached_property
    def pole_classes(self) -> tuple[PoleClass, ...]:
        """Pole classes: labeled ones by label index, then unlabeled by first incident corner."""
        out = []
        for ci, members in enumerate(self._classes):
            if self._class_kind(members) != "pole":
                continue
            corners = tuple((m[1], m[2]) for m in members)
            ang = FieldValue()
            for b, _ in corners:
                ang = ang + self.bigons[b].width
            lab = self.label_by_class.get(ci)
            out.append(PoleClass(corners, ang, lab))

        def key(p):
            if p.label is not None:
                return (0, int(p.label[1:]), p.members)
            return (1, 0, p.members)

        out.sort(key=key)
        return tuple(out)

    def zero_class_id(self, pt: PointRef) -> int:
        """Index into :attr:`zero_classes` of the class containing a marked point."""
        for i, z in enumerate(self.zero_classes):
            if pt in z.members:
                return i
        raise KeyError(pt)

    def pole_class_id(self, bigon: int, vertex: int) -> int:
        for i, p in enumerate(self.pole_classes):
            if (bigon, vertex) in p.members:
                return i
        raise KeyError((bigon, vertex))

    @cached_property
    def euler_characteristic(self) -> int:
        nseg = sum(1 for _ in self.segments())
        return len(self._classes) - nseg // 2 + self.b

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    # -- dual graph -------------------------------------------------------
    def dual_edges(self) -> list[Glue]:
        return list(self.gluings)

    def is_connected(self) -> bool:
        if self.b == 0:
            return False
        adj = defaultdict(set)
        for g in self.gluings:
            adj[g.a.bigon].add(g.b.bigon)
            adj[g.b.bigon].add(g.a.bigon)
        seen = {0}
        stack = [0]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == self.b


# -- parsing -----------------------------------------------------------------

class SurfaceParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_SEG_RE = re.compile(r"^(?P<b>[A-Za-z_]\w*)\.(?P<side>[LR])\.(?P<k>\d+)$")
_LABEL_RE = re.compile(
    r"^label\s+(?P<name>p\d+)\s*=\s*(?P<kind>zero|pole)@(?P<b>[A-Za-z_]\w*)\.(?P<side>[LR])\.(?P<pos>\d+)\s*$"
)


def parse_surface(text: str) -> StripSurface:
    """Parse the line-oriented surface format.  The result is not validated."""
    generators: list[str] = []
    embedding: list[float] = []
    mode = "exact"
    ids: list[str] = []
    widths: dict[str, FieldValue] = {}
    sides: dict[tuple[str, str], tuple] = {}
    side_pos: dict[tuple[str, str], tuple[int, int]] = {}
    glue_lines: list[tuple[int, int, str, str, bool]] = []
    labels: list[tuple[int, int, str, str, str, str, int]] = []
    thetas: list[tuple[int, str, FieldValue]] = []
    seen_gen_line = False

    def scalar(txt: str, ln: int, col: int, allow_float: bool = False):
        if allow_float and mode == "float":
            try:
                return float(txt)
            except ValueError:
                pass
        try:
            return parse_scalar(txt, generators)
        except ScalarSyntaxError as e:
            raise SurfaceParseError(str(e), ln, col + e.column) from None

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        line = line.strip()
        col0 = indent + 1
        head = line.split(None, 1)[0]
        if head == "generators:":
            if seen_gen_line:
                raise SurfaceParseError("duplicate generators line", ln, col0)
            seen_gen_line = True
            rest = line[len("generators:"):]
            for m in re.finditer(r"\S+", rest):
                tok = m.group(0)
                name, _, val = tok.partition("=")
                if not re.fullmatch(r"[A-Za-z_]\w*", name) or name in generators:
                    raise SurfaceParseError(f"bad generator name {name!r}", ln, col0 + len("generators:") + m.start())
                generators.append(name)
                if val:
                    try:
                        embedding.append(float(val))
                    except ValueError:
                        raise SurfaceParseError(f"bad numeric value {val!r}", ln, col0 + len("generators:") + m.start()) from None
                elif len(embedding) == len(generators) - 1 and embedding:
                    raise SurfaceParseError("give numeric values for all generators or none", ln, col0)
            if embedding and len(embedding) != len(generators):
                raise SurfaceParseError("give numeric values for all generators or none", ln, col0)
        elif head == "mode:":
            val = line[len("mode:"):].strip()
            if val not in ("exact", "float"):
                raise SurfaceParseError(f"unknown mode {val!r}", ln, col0 + 6)
            mode = val
        elif head == "bigon":
            m = re.fullmatch(r"bigon\s+(?P<id>[A-Za-z_]\w*)\s+width\s*=\s*(?P<w>.+)", line)
            if not m:
                raise SurfaceParseError("expected 'bigon <id> width=<scalar>'", ln, col0)
            bid = m.group("id")
            if bid in widths:
                raise SurfaceParseError(f"duplicate bigon {bid!r}", ln, col0 + m.start("id"))
            ids.append(bid)
            widths[bid] = scalar(m.group("w"), ln, col0 + m.start("w"))
        elif head == "side":
            m = re.fullmatch(r"side\s+(?P<id>[A-Za-z_]\w*)\s+(?P<side>[LR])\s+marks\s*=\s*(?P<marks>.*)", line)
            if not m:
                raise SurfaceParseError("expected 'side <bigon> L|R marks=<list>'", ln, col0)
            key = (m.group("id"), m.group("side"))
            if m.group("id") not in widths:
                raise SurfaceParseError(f"unknown bigon {m.group('id')!r}", ln, col0 + m.start("id"))
            if key in sides:
                raise SurfaceParseError(f"duplicate side {key[0]}.{key[1]}", ln, col0)
            body = m.group("marks")
            vals = []
            if body.strip():
                off = m.start("marks")
                for part in re.finditer(r"[^,]+", body):
                    if not part.group(0).strip():
                        raise SurfaceParseError("empty mark", ln, col0 + off + part.start())
                    vals.append(scalar(part.group(0).strip(), ln, col0 + off + part.start(), allow_float=True))
            sides[key] = tuple(vals)
            side_pos[key] = (ln, col0)
        elif head == "glue":
            m = re.fullmatch(r"glue\s+(?P<a>\S+)\s+(?P<b>\S+)\s+flip\s*=\s*(?P<f>[01])", line)
            if not m:
                raise SurfaceParseError("expected 'glue <seg> <seg> flip=<0|1>'", ln, col0)
            glue_lines.append((ln, col0 + m.start("a"), m.group("a"), m.group("b"), m.group("f") == "1"))
        elif head == "label":
            m = _LABEL_RE.fullmatch(line)
            if not m:
                raise SurfaceParseError("expected 'label p<i> = zero@<b>.<L|R>.<pos>' or pole@...", ln, col0)
            labels.append((ln, col0, m.group("name"), m.group("kind"), m.group("b"), m.group("side"), int(m.group("pos"))))
        elif head == "theta":
            m = re.fullmatch(r"theta\s+(?P<name>p\d+)\s*=\s*(?P<v>.+)", line)
            if not m:
                raise SurfaceParseError("expected 'theta p<i> = <scalar>'", ln, col0)
            thetas.append((ln, m.group("name"), scalar(m.group("v"), ln, col0 + m.start("v"))))
        else:
            raise SurfaceParseError(f"unknown directive {head!r}", ln, col0)

    index = {bid: i for i, bid in enumerate(ids)}
    ngen = len(generators)
    bigons = []
    for bid in ids:
        w = widths[bid].padded(ngen) if widths[bid].ngen <= ngen else widths[bid]
        left = sides.get((bid, "L"), ())
        right = sides.get((bid, "R"), ())
        if mode == "exact":
            left = tuple(x.padded(ngen) for x in left)
            right = tuple(x.padded(ngen) for x in right)
        bigons.append(Bigon(w, left, right))

    used: set[SegRef] = set()
    gluings = []
    for ln, col, a_txt, b_txt, flip in glue_lines:
        refs = []
        for txt, c in ((a_txt, col), (b_txt, col + len(a_txt) + 1)):
            m = _SEG_RE.match(txt)
            if not m:
                raise SurfaceParseError(f"bad segment reference {txt!r}", ln, c)
            if m.group("b") not in index:
                raise SurfaceParseError(f"unknown bigon {m.group('b')!r}", ln, c)
            bi = index[m.group("b")]
            side = m.group("side")
            k = int(m.group("k"))
            if k >= bigons[bi].nseg(side):
                raise SurfaceParseError(f"segment {txt} does not exist", ln, c)
            ref = SegRef(bi, side, k)
            if ref in used or ref in refs:
                raise SurfaceParseError(f"segment {txt} glued twice", ln, c)
            refs.append(ref)
        used.update(refs)
        gluings.append(Glue(refs[0], refs[1], flip))

    labs = []
    names = set()
    for ln, col, name, kind, bid, side, pos in labels:
        if name in names:
            raise SurfaceParseError(f"duplicate label {name}", ln, col)
        if bid not in index:
            raise SurfaceParseError(f"unknown bigon {bid!r}", ln, col)
        names.add(name)
        labs.append(Label(name, kind, PointRef(index[bid], side, pos)))
    labs.sort(key=lambda lab: lab.index)
    th = []
    for ln, name, val in thetas:
        if name not in names:
            raise SurfaceParseError(f"theta for unknown label {name}", ln, 1)
        th.append((name, val.padded(ngen) if val.ngen <= ngen else val))
    th.sort(key=lambda x: int(x[0][1:]))

    return StripSurface(
        bigons=tuple(bigons),
        gluings=tuple(gluings),
        labels=tuple(labs),
        thetas=tuple(th),
        generators=tuple(generators),
        embedding=tuple(embedding),
        ids=tuple(ids),
        mode=mode,
    )


def load_surface(path) -> StripSurface:
    with open(path, encoding="utf-8") as fh:
        return parse_surface(fh.read())


def _fmt(v, gens) -> str:
    if isinstance(v, float):
        return repr_float(v)
    return format_scalar(v, gens)


def format_surface(s: StripSurface) -> str:
    """Serialize a surface; ``parse_surface(format_surface(s))`` reproduces it."""
    gens = s.generators
    out = []
    if gens:
        if s.embedding and tuple(s.embedding) != tuple(default_embedding(len(gens))):
            out.append("generators: " + " ".join(f"{g}={repr_float(x)}" for g, x in zip(gens, s.embedding)))
        else:
            out.append("generators: " + " ".join(gens))
    if s.mode != "exact":
        out.append(f"mode: {s.mode}")
    for bid, bg in zip(s.ids, s.bigons):
        out.append(f"bigon {bid} width={_fmt(bg.width, gens)}")
    for bid, bg in zip(s.ids, s.bigons):
        for side in "LR":
            marks = ",".join(_fmt(t, gens) for t in bg.marks(side))
            out.append(f"side {bid} {side} marks={marks}")
    for g in s.gluings:
        a = f"{s.ids[g.a.bigon]}.{g.a.side}.{g.a.index}"
        b = f"{s.ids[g.b.bigon]}.{g.b.side}.{g.b.index}"
        out.append(f"glue {a} {b} flip={int(g.flip)}")
    for lab in s.labels:
        w = lab.witness
        out.append(f"label {lab.name} = {lab.kind}@{s.ids[w.bigon]}.{w.side}.{w.pos}")
    for name, val in s.thetas:
        out.append(f"theta {name} = {_fmt(val, gens)}")
    return "\n".join(out) + "\n"


# -- validation ----------------------------------------------------------------

def _check_structure(s: StripSurface) -> list[Violation]:
    v: list[Violation] = []
    emb = s.embedding
    for i, bg in enumerate(s.bigons):
        bid = s.ids[i]
        try:
            if real_sign(bg.width, emb) <= 0:
                v.append(Violation("width", f"bigon {bid} has non-positive width {_fmt(bg.width, s.generators)}"))
        except ValueError as e:
            v.append(Violation("width", f"bigon {bid}: {e}"))
        for side in "LR":
            marks = bg.marks(side)
            prev = 0.0 if s.mode == "float" else _ZERO
            ok = True
            for t in list(marks) + [1.0 if s.mode == "float" else _ONE]:
                try:
                    if not lat_lt(prev, t, emb):
                        ok = False
                except ValueError:
                    ok = False
                prev = t
            if not ok:
                v.append(Violation("mark-order", f"marks on {bid}.{side} are not strictly increasing inside (0,1)"))
    for seg in s.segments():
        if seg not in s.partner:
            v.append(Violation("unglued", f"segment {s.ids[seg.bigon]}.{seg.side}.{seg.index} is not glued"))
    for g in s.gluings:
        a, b = g.a, g.b
        name = f"{s.ids[a.bigon]}.{a.side}.{a.index} ~ {s.ids[b.bigon]}.{b.side}.{b.index}"
        if a == b:
            v.append(Violation("self-glue", f"segment glued to itself: {name}"))
            continue
        if g.flip != (a.side == b.side):
            v.append(Violation("orientation", f"gluing {name} with flip={int(g.flip)} reverses orientation"))
        ua, va = s.seg_interval(a)
        ub, vb = s.seg_interval(b)
        if g.flip:
            ub, vb = one_minus(vb), one_minus(ub)
        if not (lat_eq(ua, ub) and lat_eq(va, vb)):
            v.append(Violation("segment-mismatch", f"gluing {name} joins intervals of different latitude"))
    return v


def validate(s: StripSurface) -> ValidationReport:
    """Check every structural constraint; violations are collected, never raised."""
    v = _check_structure(s)
    if not s.is_connected():
        v.append(Violation("disconnected", "the dual graph is not connected"))

    for members in s._classes:
        if s._class_kind(members) == "mixed":
            v.append(Violation("mixed-class", "a vertex is identified with a marked point"))

    chi = s.euler_characteristic
    genus = None
    if chi % 2 or chi > 2:
        v.append(Violation("euler", f"Euler characteristic {chi} is not even and at most 2"))
    else:
        genus = (2 - chi) // 2

    # latitude consistency inside zero classes
    for g in s.gluings:
        a, b = g.a, g.b
        if a == b:
            continue
        for end_a, end_b in ((0, 1), (1, 0)) if g.flip else ((0, 0), (1, 1)):
            ka = s.point_key(a.bigon, a.side, a.index + end_a)
            kb = s.point_key(b.bigon, b.side, b.index + end_b)
            if ka[0] == "m" and kb[0] == "m":
                ta, tb = s.mark_value(ka), s.mark_value(kb)
                if g.flip:
                    tb = one_minus(tb)
                if not lat_eq(ta, tb):
                    v.append(Violation("latitude", f"marked points {ka[1:]} and {kb[1:]} disagree in latitude"))

    labels_ok = True
    names = [lab.name for lab in s.labels]
    expected = [f"p{i}" for i in range(1, len(names) + 1)]
    if sorted(names, key=lambda x: int(x[1:])) != expected:
        v.append(Violation("label", f"labels must be p1..p{len(names)}, got {', '.join(names)}"))
    seen_classes: dict[int, str] = {}
    for lab in s.labels:
        ci = s.resolve_witness(lab.witness)
        if ci is None:
            v.append(Violation("label", f"{lab.name}: witness point does not exist"))
            labels_ok = False
            continue
        kind = s._class_kind(s._classes[ci])
        if kind != lab.kind:
            v.append(Violation("label", f"{lab.name}: declared {lab.kind} but witness lies in a {kind} class"))
            labels_ok = False
        if ci in seen_classes:
            v.append(Violation("label", f"{lab.name} and {seen_classes[ci]} label the same class"))
            labels_ok = False
        seen_classes[ci] = lab.name

    for z in s.zero_classes:
        where = f"zero class at {s.ids[z.members[0].bigon]}.{z.members[0].side}.{z.members[0].pos}"
        if z.s % 2 and not z.equatorial:
            v.append(Violation("odd-off-equator", f"{where} has {z.s} marked points but latitude {_fmt(z.latitude, s.generators)}"))
        if z.label is None:
            v.append(Violation("unlabeled-zero", f"{where} is a cone point without a label"))
        elif z.s == 2:
            v.append(Violation("labeled-angle-one", f"{where} ({z.label}) has cone angle 1"))
    for p in s.pole_classes:
        b0, vx = p.members[0]
        where = f"pole class at {s.ids[b0]}.{'NS'[vx]}"
        if p.label is None and p.angle != 1:
            v.append(Violation("unlabeled-pole-angle", f"{where} is unlabeled but has angle {_fmt(p.angle, s.generators)}"))
        if p.label is not None and p.angle == 1:
            v.append(Violation("labeled-angle-one", f"{where} ({p.label}) has cone angle 1"))

    th = s.theta_map()
    if labels_ok:
        census = classify_points(s)
        for i, ang in enumerate(census.angles, start=1):
            name = f"p{i}"
            if name in th and th[name] != ang:
                v.append(Violation("theta", f"{name}: declared {_fmt(th[name], s.generators)}, computed {_fmt(ang, s.generators)}"))

    index_sum = sum(z.index for z in s.zero_classes) + 2 * len(s.pole_classes)
    if genus is not None:
        if index_sum != 4 - 4 * genus:
            v.append(Violation("poincare-hopf", f"index sum {index_sum} differs from {4 - 4 * genus}"))
        if labels_ok:
            lhs = 2 * sum((bg.width for bg in s.bigons), FieldValue())
            rhs = FieldValue((2 - 2 * genus,))
            for z in s.zero_classes:
                if z.label is not None:
                    rhs = rhs + z.angle - 1
            for p in s.pole_classes:
                if p.label is not None:
                    rhs = rhs + p.angle - 1
            if lhs != rhs:
                v.append(Violation("gauss-bonnet", f"2*sum(w) = {_fmt(lhs, s.generators)} but (2-2g)+sum(theta-1) = {_fmt(rhs, s.generators)}"))
    return ValidationReport(tuple(v), index_sum, genus)


def classify_points(s: StripSurface) -> PointCensus:
    """Zero and pole classes, genus, labeled angle vector and type partition."""
    n = len(s.labels)
    angles: list[FieldValue | None] = [None] * n
    E, O, N = set(), set(), set()
    for z in s.zero_classes:
        if z.label is not None:
            i = int(z.label[1:])
            if 1 <= i <= n:
                angles[i - 1] = z.angle
            (E if z.s % 2 == 0 else O).add(i)
    for p in s.pole_classes:
        if p.label is not None:
            i = int(p.label[1:])
            if 1 <= i <= n:
                angles[i - 1] = p.angle
            N.add(i)
    return PointCensus(
        zeros=s.zero_classes,
        poles=s.pole_classes,
        genus=s.genus,
        euler_characteristic=s.euler_characteristic,
        angles=tuple(a if a is not None else FieldValue() for a in angles),
        partition=TypePartition(E, O, N),
    )


def is_generic(s: StripSurface) -> bool:
    return all(len(bg.left) == 1 and len(bg.right) == 1 for bg in s.bigons)


def orientation_signs(s: StripSurface) -> list[int] | None:
    """Signs per bigon with flipped gluings joining opposite signs, or None."""
    sign: list[int | None] = [None] * s.b
    adj = defaultdict(list)
    for g in s.gluings:
        adj[g.a.bigon].append((g.b.bigon, g.flip))
        adj[g.b.bigon].append((g.a.bigon, g.flip))
    for root in range(s.b):
        if sign[root] is not None:
            continue
        sign[root] = 1
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y, flip in adj[x]:
                want = -sign[x] if flip else sign[x]
                if sign[y] is None:
                    sign[y] = want
                    queue.append(y)
                elif sign[y] != want:
                    return None
    return [int(x) for x in sign]


def is_orientable(s: StripSurface) -> bool:
    return orientation_signs(s) is not None


# -- equatorial net ---------------------------------------------------------------

@dataclass(frozen=True)
class EquatorialNet:
    """Locus at latitude 1/2.

    ``vertices`` are the equatorial zero classes (indices into
    ``zero_classes``).  ``edges`` are chains of bigons joining two vertices;
    ``cycles`` are closed chains that meet no zero.  ``crossings`` counts the
    points where the equator passes through the interior of a glued segment.
    """

    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int, tuple[int, ...]], ...]
    cycles: tuple[tuple[int, ...], ...]
    crossings: int


def equatorial_net(s: StripSurface) -> EquatorialNet:
    half = 0.5 if s.mode == "float" else _HALF
    zero_ids = {}
    for i, z in enumerate(s.zero_classes):
        for m in z.members:
            zero_ids[m] = i

    def endpoint(b: int, side: str):
        marks = s.bigons[b].marks(side)
        for p, t in enumerate(marks, start=1):
            if lat_eq(t, half):
                return ("z", zero_ids[PointRef(b, side, p)])
        # crossing point in a segment interior
        k = sum(1 for t in marks if lat_lt(t, half, s.embedding))
        seg = SegRef(b, side, k)
        other, _ = s.partner.get(seg, (seg, False))
        return ("x", min(seg, other))

    # Each bigon contributes one edge from its left endpoint to its right endpoint.
    ends = [(endpoint(b, "L"), endpoint(b, "R")) for b in range(s.b)]
    crossings = {e for pair in ends for e in pair if e[0] == "x"}
    inc = defaultdict(list)
    for b, (u, w) in enumerate(ends):
        inc[u].append(b)
        inc[w].append(b)
    used = [False] * s.b
    edges = []
    vertex_ids = sorted({e[1] for pair in ends for e in pair if e[0] == "z"})

    def walk(start, b):
        chain = [b]
        used[b] = True
        cur = ends[b][1] if ends[b][0] == start else ends[b][0]
        while cur[0] == "x":
            nxt = [c for c in inc[cur] if not used[c]]
            if not nxt:
                break
            b2 = nxt[0]
            used[b2] = True
            chain.append(b2)
            cur = ends[b2][1] if ends[b2][0] == cur else ends[b2][0]
        return cur, chain

    for vtx in [("z", i) for i in vertex_ids]:
        for b in sorted(inc[vtx]):
            if used[b]:
                continue
            end, chain = walk(vtx, b)
            edges.append((vtx[1], end[1] if end[0] == "z" else -1, tuple(chain)))
    cycles = []
    for b in range(s.b):
        if not used[b]:
            _, chain = walk(ends[b][0], b)
            cycles.append(tuple(chain))
    return EquatorialNet(tuple(vertex_ids), tuple(edges), tuple(cycles), len(crossings))


# -- canonical forms ----------------------------------------------------------------

def _lat_key(t):
    if isinstance(t, float):
        return (t,)
    return tuple(t._trimmed())


def canonical_key(s: StripSurface, labels: str = "named"):
    """Relabeling-invariant encoding of a surface.

    Bigons are relabeled by breadth-first search from every root bigon in both
    turnover states (rotation by a half turn about the bigon centre), keeping
    the lexicographically smallest encoding.  ``labels`` is ``"named"``
    (label names matter), ``"set"`` (only which classes are labeled) or
    ``"none"``.
    """
    best = None
    for root in range(s.b):
        for flip_root in (False, True):
            enc = _encode_from(s, root, flip_root, labels)
            if best is None or enc < best:
                best = enc
    return best


def _encode_from(s: StripSurface, root: int, flip_root: bool, labels: str):
    order = [root]
    state = {root: flip_root}
    newidx = {root: 0}
    i = 0

    def seg_map(seg: SegRef) -> tuple[int, str, int]:
        bg = s.bigons[seg.bigon]
        if not state[seg.bigon]:
            return (newidx[seg.bigon], seg.side, seg.index)
        side2 = "R" if seg.side == "L" else "L"
        return (newidx[seg.bigon], side2, len(bg.marks(seg.side)) - seg.index)

    def local_segments(b: int):
        bg = s.bigons[b]
        if not state[b]:
            for side in "LR":
                for k in range(bg.nseg(side)):
                    yield SegRef(b, side, k)
        else:
            for side in "LR":
                orig = "R" if side == "L" else "L"
                n = bg.nseg(orig)
                for k in range(n):
                    yield SegRef(b, orig, n - 1 - k)

    while i < len(order):
        b = order[i]
        i += 1
        for seg in local_segments(b):
            other, flip = s.partner.get(seg, (None, False))
            if other is None:
                continue
            c = other.bigon
            if c not in state:
                state[c] = flip ^ state[b]
                newidx[c] = len(order)
                order.append(c)
    # unreachable bigons (disconnected input) appended in index order
    for b in range(s.b):
        if b not in state:
            state[b] = False
            newidx[b] = len(order)
            order.append(b)

    bigs = []
    for b in order:
        bg = s.bigons[b]
        if state[b]:
            left = tuple(_lat_key(one_minus(t)) for t in reversed(bg.right))
            right = tuple(_lat_key(one_minus(t)) for t in reversed(bg.left))
        else:
            left = tuple(_lat_key(t) for t in bg.left)
            right = tuple(_lat_key(t) for t in bg.right)
        bigs.append((_lat_key(bg.width), left, right))
    glue = []
    for b in order:
        for seg in local_segments(b):
            other, _ = s.partner.get(seg, (None, False))
            glue.append(seg_map(other) if other is not None else None)
    lab = ()
    if labels != "none":
        items = []
        for ci, name in s.label_by_class.items():
            members = s._classes[ci]
            pts = []
            for m in members:
                if m[0] == "v":
                    vb, vx = m[1], m[2]
                    pts.append((newidx[vb], "V", vx ^ int(state[vb])))
                else:
                    _, mb, side, p = m
                    if state[mb]:
                        nside = "R" if side == "L" else "L"
                        npos = len(s.bigons[mb].marks(side)) + 1 - p
                    else:
                        nside, npos = side, p
                    pts.append((newidx[mb], nside, npos))
            items.append((name if labels == "named" else "", min(pts)))
        lab = tuple(sorted(items))
    return (len(order), tuple(bigs), tuple(glue), lab)


def is_isomorphic(s1: StripSurface, s2: StripSurface, labels: str = "named") -> bool:
    return canonical_key(s1, labels) == canonical_key(s2, labels)


def turnover(s: StripSurface, bigon: int) -> StripSurface:
    """Re-describe a bigon rotated by a half turn: sides swap and latitudes reverse."""
    bg = s.bigons[bigon]
    nb = Bigon(bg.width,
               tuple(one_minus(t) for t in reversed(bg.right)),
               tuple(one_minus(t) for t in reversed(bg.left)))

    def m(seg: SegRef) -> SegRef:
        if seg.bigon != bigon:
            return seg
        side2 = "R" if seg.side == "L" else "L"
        return SegRef(bigon, side2, len(bg.marks(seg.side)) - seg.index)

    glue = []
    for g in s.gluings:
        flip = g.flip ^ (g.a.bigon == bigon) ^ (g.b.bigon == bigon)
        glue.append(Glue(m(g.a), m(g.b), flip))
    labs = []
    for lab in s.labels:
        w = lab.witness
        if w.bigon == bigon:
            side2 = "R" if w.side == "L" else "L"
            w = PointRef(bigon, side2, len(bg.marks(w.side)) + 1 - w.pos)
        labs.append(Label(lab.name, lab.kind, w))
    bigons = list(s.bigons)
    bigons[bigon] = nb
    return replace(s, bigons=tuple(bigons), gluings=tuple(glue), labels=tuple(labs))


def auto_label(s: StripSurface, keep: dict | None = None) -> StripSurface:
    """Label every zero class and every pole of angle other than 1.

    Classes are numbered in canonical class order.  ``keep`` may map class
    witnesses to desired names; unspecified classes are numbered afterwards.
    """
    bare = s.with_changes(labels=(), thetas=())
    items = []
    for z in bare.zero_classes:
        items.append(("zero", z.members[0], z.angle))
    for p in bare.pole_classes:
        if p.angle != 1:
            b, vx = p.members[0]
            side = "L"
            pos = 0 if vx == 0 else len(bare.bigons[b].left) + 1
            items.append(("pole", PointRef(b, side, pos), p.angle))
    labs = [Label(f"p{i}", kind, w) for i, (kind, w, _) in enumerate(items, start=1)]
    th = tuple((f"p{i}", ang) for i, (_, _, ang) in enumerate(items, start=1))
    return s.with_changes(labels=tuple(labs), thetas=th)
