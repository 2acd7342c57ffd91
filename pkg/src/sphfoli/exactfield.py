"""Exact scalars over Q extended by formal, independent transcendentals.

A :class:`FieldValue` is a Q-linear combination ``c0 + c1*tau1 + ... + ck*tauk``.
Only Q-affine arithmetic is supported: values can be added, negated and scaled
by rationals, but two values carrying transcendental parts can never be
multiplied.  Matrices used for rank and affine solving are rational; the
right-hand side of an affine system may carry transcendental parts.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq, mpz
from functools import total_ordering
from typing import Iterable, Sequence

__all__ = [
    "FieldValue",
    "ExactMatrix",
    "AffineSolution",
    "fv",
    "fv_normalize",
    "is_integer",
    "is_half_integer",
    "mat_rank",
    "solve_affine",
    "nullspace",
    "parse_scalar",
    "format_scalar",
    "default_embedding",
]

Rational = int | Fraction

# Coordinates are stored as GMP rationals; plain ints and Fractions are
# accepted everywhere and compare and hash identically.
Q = mpq
_QT = type(mpq(0))
_RATIONALS = (int, Fraction, _QT, type(mpz(0)))


def _frac(x):
    if type(x) is _QT:
        return x
    if isinstance(x, (int, Fraction, type(mpz(0)))):
        return mpq(x)
    if isinstance(x, str):
        return mpq(Fraction(x))
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


@total_ordering
class FieldValue:
    """Immutable exact scalar stored as coordinates over ``(1, tau1, ..., tauk)``.

    Values with different coordinate counts interoperate by zero padding, so
    ``FieldValue([1, 0]) == FieldValue([1])``.  The total order is
    lexicographic on the padded coordinates; it agrees with the real order on
    rational values only.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[Rational] = (0,)):
        c = tuple(x if type(x) is _QT else _frac(x) for x in coeffs)
        if not c:
            c = (mpq(0),)
        self._c = c

    @classmethod
    def _make(cls, c: tuple) -> "FieldValue":
        # trusted constructor: ``c`` is already a non-empty tuple of mpq
        obj = object.__new__(cls)
        obj._c = c
        return obj

    # -- construction -----------------------------------------------------
    @classmethod
    def rational(cls, x: Rational, ngen: int = 0) -> "FieldValue":
        return cls((x,) + (0,) * ngen)

    @classmethod
    def generator(cls, index: int, ngen: int | None = None) -> "FieldValue":
        """The formal generator ``tau<index>`` (1-based)."""
        if index < 1:
            raise ValueError("generator indices start at 1")
        n = max(index, ngen or 0)
        c = [0] * (n + 1)
        c[index] = 1
        return cls(c)

    # -- coordinates ------------------------------------------------------
    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return self._c

    @property
    def ngen(self) -> int:
        return len(self._c) - 1

    def _trimmed(self) -> tuple[Fraction, ...]:
        c = self._c
        n = len(c)
        while n > 1 and c[n - 1] == 0:
            n -= 1
        return c[:n]

    def padded(self, ngen: int) -> "FieldValue":
        if ngen < self.ngen and any(self._c[ngen + 1:]):
            raise ValueError("cannot drop a nonzero transcendental coordinate")
        c = self._c[: ngen + 1] + (mpq(0),) * (ngen + 1 - len(self._c))
        return FieldValue(c)

    @property
    def const(self) -> Fraction:
        return self._c[0]

    def is_rational(self) -> bool:
        return not any(self._c[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(self._c[0])

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "FieldValue | None":
        if isinstance(other, FieldValue):
            return other
        if isinstance(other, _RATIONALS):
            return FieldValue._make((mpq(other),))
        return None

    def _zip(self, other: "FieldValue"):
        a, b = self._c, other._c
        n = max(len(a), len(b))
        z = mpq(0)
        return ((a[i] if i < len(a) else z, b[i] if i < len(b) else z) for i in range(n))

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if len(self._c) == 1 and len(o._c) == 1:
            return FieldValue._make((self._c[0] + o._c[0],))
        return FieldValue._make(tuple(x + y for x, y in self._zip(o)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if len(self._c) == 1 and len(o._c) == 1:
            return FieldValue._make((self._c[0] - o._c[0],))
        return FieldValue._make(tuple(x - y for x, y in self._zip(o)))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return FieldValue._make(tuple(-x for x in self._c))

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, FieldValue):
            if other.is_rational():
                other = other.const
            elif self.is_rational():
                return other * self.const
            else:
                raise TypeError("products of transcendental values are not supported")
        if isinstance(other, _RATIONALS):
            return FieldValue(x * other for x in self._c)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, FieldValue):
            other = other.to_fraction()
        if isinstance(other, _RATIONALS):
            if other == 0:
                raise ZeroDivisionError("division of a FieldValue by zero")
            return FieldValue(x / other for x in self._c)
        return NotImplemented

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if len(self._c) == 1 and len(o._c) == 1:
            return self._c[0] == o._c[0]
        return all(x == y for x, y in self._zip(o))

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if len(self._c) == 1 and len(o._c) == 1:
            return self._c[0] < o._c[0]
        for x, y in self._zip(o):
            if x != y:
                return x < y
        return False

    def __hash__(self):
        t = self._trimmed()
        return hash(t[0]) if len(t) == 1 else hash(t)

    def __bool__(self):
        return any(self._c)

    # -- integrality and reduction ----------------------------------------
    def is_integer(self) -> bool:
        return self.is_rational() and self._c[0].denominator == 1

    def is_half_integer(self) -> bool:
        return self.is_rational() and self._c[0].denominator == 2

    def mod1(self) -> "FieldValue":
        """Reduce the rational coordinate into [0, 1); transcendental parts are kept."""
        c0 = self._c[0]
        return FieldValue((c0 - math.floor(c0),) + self._c[1:])

    def approx(self, embedding: Sequence[float] | None = None) -> float:
        """Real value under an embedding of the generators (defaults provided)."""
        emb = embedding if embedding is not None else default_embedding(self.ngen)
        if len(emb) < self.ngen:
            emb = list(emb) + default_embedding(self.ngen)[len(emb):]
        return float(self._c[0]) + sum(float(c) * emb[i] for i, c in enumerate(self._c[1:]))

    def __float__(self):
        return self.approx()

    def __repr__(self):
        return f"FieldValue({format_scalar(self)!r})"

    def __str__(self):
        return format_scalar(self)


_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def default_embedding(ngen: int) -> list[float]:
    """Numeric stand-ins for the generators: tau_k -> sqrt(k-th prime)."""
    out = []
    for k in range(ngen):
        p = _PRIMES[k] if k < len(_PRIMES) else 41 + 2 * k
        out.append(math.sqrt(p))
    return out


def fv(x) -> FieldValue:
    """Coerce an int, Fraction, string literal or FieldValue."""
    if isinstance(x, FieldValue):
        return x
    if isinstance(x, _RATIONALS):
        return FieldValue((x,))
    if isinstance(x, str):
        return parse_scalar(x)
    raise TypeError(f"cannot make a FieldValue from {type(x).__name__}")


def fv_normalize(raw: Sequence, ngen: int | None = None) -> FieldValue:
    """Canonical value from raw coordinates; entries may be ``(num, den)`` pairs."""
    if ngen is not None and len(raw) != ngen + 1:
        raise ValueError(f"expected {ngen + 1} coordinates, got {len(raw)}")
    coords = []
    for x in raw:
        if isinstance(x, tuple):
            num, den = x
            if den == 0:
                raise ZeroDivisionError("zero denominator in coordinate")
            coords.append(mpq(num, den))
        else:
            coords.append(_frac(x))
    return FieldValue(coords)


def is_integer(v) -> bool:
    return fv(v).is_integer()


def is_half_integer(v) -> bool:
    return fv(v).is_half_integer()


# -- scalar literals ------------------------------------------------------

_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:
          (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)(?:\s*/\s*(?P<den>\d+))?
          (?:\s*\*\s*(?P<gen1>[A-Za-z_]\w*))?
        |
          (?P<gen2>[A-Za-z_]\w*)(?:\s*/\s*(?P<den2>\d+))?
        )\s*""",
    re.VERBOSE,
)


class ScalarSyntaxError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(message)
        self.column = column


def parse_scalar(text: str, generators: Sequence[str] | None = None) -> FieldValue:
    """Parse ``a/b + c/d*tau1 - tau2`` style literals.

    Without an explicit generator list, names of the form ``tau<k>`` map to the
    k-th generator.  Decimal numerals are read exactly (``0.25`` is 1/4).
    """
    gens = list(generators) if generators is not None else None
    coords: dict[int, Fraction] = {}
    pos = 0
    text = text.rstrip()
    if not text.strip():
        raise ScalarSyntaxError("empty scalar", 0)
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ScalarSyntaxError(f"unexpected {text[pos:pos + 8]!r}", pos)
        if m.group("sign") is None and not first:
            raise ScalarSyntaxError("missing '+' or '-' between terms", pos)
        sign = -1 if m.group("sign") == "-" else 1
        if m.group("num") is not None:
            value = mpq(Fraction(m.group("num")))
            if m.group("den"):
                den = int(m.group("den"))
                if den == 0:
                    raise ScalarSyntaxError("zero denominator", m.start("den"))
                value /= den
            gen = m.group("gen1")
        else:
            value = mpq(1)
            if m.group("den2"):
                den = int(m.group("den2"))
                if den == 0:
                    raise ScalarSyntaxError("zero denominator", m.start("den2"))
                value /= den
            gen = m.group("gen2")
        if gen is None:
            idx = 0
        elif gens is not None:
            if gen not in gens:
                raise ScalarSyntaxError(f"unknown generator {gen!r}", m.start())
            idx = gens.index(gen) + 1
        else:
            mm = re.fullmatch(r"tau(\d+)", gen)
            if not mm or int(mm.group(1)) < 1:
                raise ScalarSyntaxError(f"unknown generator {gen!r}", m.start())
            idx = int(mm.group(1))
        coords[idx] = coords.get(idx, mpq(0)) + sign * value
        pos = m.end()
        first = False
    n = max(coords) if coords else 0
    if gens is not None:
        n = max(n, len(gens))
    return FieldValue(coords.get(i, 0) for i in range(n + 1))


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(v, generators: Sequence[str] | None = None) -> str:
    """Inverse of :func:`parse_scalar` for canonical values."""
    if isinstance(v, float):
        return repr_float(v)
    v = fv(v)
    parts: list[str] = []
    for i, c in enumerate(v.coeffs):
        if c == 0 and (i > 0 or len(v._trimmed()) > 1):
            continue
        if i == 0:
            parts.append(_fmt_q(c))
            continue
        name = generators[i - 1] if generators and i - 1 < len(generators) else f"tau{i}"
        mag = abs(c)
        term = name if mag == 1 else f"{_fmt_q(mag)}*{name}"
        if parts:
            parts.append(("- " if c < 0 else "+ ") + term)
        else:
            parts.append(("-" if c < 0 else "") + term)
    return " ".join(parts) if parts else "0"


def repr_float(x: float) -> str:
    return f"{x:.17g}"


# -- matrices -------------------------------------------------------------

@dataclass(frozen=True)
class ExactMatrix:
    """Rectangular grid of FieldValue entries."""

    entries: tuple[tuple[FieldValue, ...], ...]

    def __init__(self, rows: Iterable[Iterable]):
        grid = tuple(tuple(fv(x) for x in r) for r in rows)
        if grid and len({len(r) for r in grid}) != 1:
            raise ValueError("ragged matrix")
        object.__setattr__(self, "entries", grid)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> tuple[FieldValue, ...]:
        return self.entries[i]

    def column(self, j: int) -> tuple[FieldValue, ...]:
        return tuple(r[j] for r in self.entries)

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(zip(*self.entries)) if self.entries else ExactMatrix([])

    def is_rational(self) -> bool:
        return all(x.is_rational() for r in self.entries for x in r)

    def rational_rows(self) -> list[list[Fraction]]:
        if not self.is_rational():
            raise ValueError("matrix has transcendental entries")
        return [[x.const for x in r] for r in self.entries]

    def matvec(self, vec: Sequence) -> list[FieldValue]:
        out = []
        for r in self.entries:
            acc = FieldValue()
            for a, x in zip(r, vec):
                acc = acc + fv(x) * a
            out.append(acc)
        return out

    def permuted(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> "ExactMatrix":
        return ExactMatrix([[self.entries[i][j] for j in col_perm] for i in row_perm])


def _integer_lift(rows: list[list[Fraction]]) -> list[list[int]]:
    out = []
    for r in rows:
        den = 1
        for x in r:
            den = den * x.denominator // math.gcd(den, x.denominator)
        out.append([int(x * den) for x in r])
    return out


def mat_rank(M: ExactMatrix | Sequence[Sequence]) -> int:
    """Rank by fraction-free (Bareiss) elimination on the integer lift of each row."""
    if not isinstance(M, ExactMatrix):
        M = ExactMatrix(M)
    if M.rows == 0 or M.cols == 0:
        return 0
    a = _integer_lift(M.rational_rows())
    nrows, ncols = len(a), len(a[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        if rank == nrows:
            break
        piv = next((i for i in range(rank, nrows) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][col]
        for i in range(rank + 1, nrows):
            f = a[i][col]
            for j in range(col, ncols):
                a[i][j] = (p * a[i][j] - f * a[rank][j]) // prev
        prev = p
        rank += 1
    return rank


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    a = [list(r) for r in rows]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        a[r] = [x / p for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a, pivots


def nullspace(M: ExactMatrix | Sequence[Sequence]) -> list[list[Fraction]]:
    """Basis of the right kernel of a rational matrix (one vector per free column)."""
    if not isinstance(M, ExactMatrix):
        M = ExactMatrix(M)
    ncols = M.cols
    if M.rows == 0:
        return [[mpq(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    red, pivots = _rref(M.rational_rows())
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [mpq(0)] * ncols
        v[f] = mpq(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][f]
        basis.append(v)
    return basis


@dataclass(frozen=True)
class AffineSolution:
    consistent: bool
    particular: tuple[FieldValue, ...] | None
    dimension: int
    rank: int


def solve_affine(M: ExactMatrix | Sequence[Sequence], C: Sequence) -> AffineSolution:
    """Solve ``M x = C`` for rational ``M`` and a FieldValue right-hand side.

    The particular solution returned is the least-norm one, computed exactly
    coordinate by coordinate over the basis (1, tau1, ...).  Inconsistency is
    reported through the flag.
    """
    if not isinstance(M, ExactMatrix):
        M = ExactMatrix(M)
    C = [fv(c) for c in C]
    if len(C) != M.rows:
        raise ValueError(f"right-hand side has {len(C)} entries, matrix has {M.rows} rows")
    ncols = M.cols
    rows = M.rational_rows()
    rank = mat_rank(M)
    dim = ncols - rank
    if M.rows == 0:
        return AffineSolution(True, tuple(FieldValue() for _ in range(ncols)), dim, 0)

    ngen = max((c.ngen for c in C), default=0)
    # Pick a maximal independent row set greedily.
    basis_rows: list[int] = []
    for i in range(M.rows):
        if mat_rank([rows[k] for k in basis_rows + [i]]) > len(basis_rows):
            basis_rows.append(i)
    R = [rows[i] for i in basis_rows]
    gram = [[sum(x * y for x, y in zip(R[i], R[j])) for j in range(len(R))] for i in range(len(R))]

    coords: list[list[Fraction]] = [[mpq(0)] * (ngen + 1) for _ in range(ncols)]
    for k in range(ngen + 1):
        rhs = [c.padded(ngen).coeffs[k] for c in C]
        # Solve gram * y = rhs restricted to the basis rows.
        aug = [gram[i] + [rhs[basis_rows[i]]] for i in range(len(R))]
        red, _ = _rref(aug) if aug else ([], [])
        y = [red[i][-1] for i in range(len(R))]
        x = [sum(R[i][j] * y[i] for i in range(len(R))) for j in range(ncols)]
        for i in range(M.rows):
            if sum(a * b for a, b in zip(rows[i], x)) != rhs[i]:
                return AffineSolution(False, None, dim, rank)
        for j in range(ncols):
            coords[j][k] = x[j]
    particular = tuple(FieldValue(c) for c in coords)
    return AffineSolution(True, particular, dim, rank)
