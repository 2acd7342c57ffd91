"""Connection matrix of a strip surface and the rank route to dimensions."""

from __future__ import annotations

from dataclasses import dataclass

from .exactfield import ExactMatrix, FieldValue, mat_rank
from .surface import StripSurface, is_generic, is_orientable

__all__ = [
    "ConnectionMatrix",
    "RankAnalysis",
    "NonGenericError",
    "InconsistencyError",
    "connection_matrix",
    "rank_analysis",
    "check_matrix_connected",
    "foliated_dimension_via_rank",
    "format_matrix",
]


class NonGenericError(ValueError):
    """Raised by operations defined only for generic surfaces."""


class InconsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""


@dataclass(frozen=True)
class ConnectionMatrix:
    M: tuple[tuple[int, ...], ...]
    C: tuple[FieldValue, ...]
    pole_order: tuple[tuple[tuple[int, int], ...], ...]  # corners of each row's pole class
    pole_labels: tuple[str | None, ...]
    bigon_order: tuple[str, ...]

    @property
    def m(self) -> int:
        return len(self.M)

    @property
    def b(self) -> int:
        return len(self.M[0]) if self.M else 0

    def exact(self) -> ExactMatrix:
        return ExactMatrix(self.M)

    def column_sums(self) -> list[int]:
        return [sum(row[j] for row in self.M) for j in range(self.b)]


def connection_matrix(s: StripSurface) -> ConnectionMatrix:
    poles = s.pole_classes
    M = []
    for p in poles:
        row = [0] * s.b
        for bigon, _ in p.members:
            row[bigon] += 1
        M.append(tuple(row))
    C = tuple(p.angle for p in poles)
    cm = ConnectionMatrix(tuple(M), C, tuple(p.members for p in poles),
                          tuple(p.label for p in poles), s.ids)
    if cm.M:
        W = s.widths()
        if ExactMatrix(cm.M).matvec(W) != list(C):
            raise InconsistencyError("pole angles differ from M*W")
    return cm


@dataclass(frozen=True)
class RankAnalysis:
    rank: int
    m: int
    rank_in_range: bool
    orientable_by_rank: bool
    orientable_by_signs: bool

    @property
    def consistent(self) -> bool:
        return self.rank_in_range and self.orientable_by_rank == self.orientable_by_signs


def rank_analysis(cm: ConnectionMatrix, s: StripSurface, strict: bool = True) -> RankAnalysis:
    """Rank of M against the flip-parity orientability test.

    With ``strict`` a disagreement raises :class:`InconsistencyError`;
    otherwise it is returned in the analysis for census reporting.
    """
    if not is_generic(s):
        raise NonGenericError("rank analysis requires a generic surface")
    r = mat_rank(cm.exact())
    res = RankAnalysis(r, cm.m, r in (cm.m - 1, cm.m), r == cm.m - 1, is_orientable(s))
    if strict and not res.consistent:
        raise InconsistencyError(
            f"rank {r} with m={cm.m} disagrees with sign test (orientable={res.orientable_by_signs})")
    return res


def check_matrix_connected(M) -> bool:
    """True iff the nonzero entries form one cluster under shared-row/column steps."""
    if isinstance(M, ConnectionMatrix):
        M = M.M
    cells = [(i, j) for i, row in enumerate(M) for j, x in enumerate(row) if x != 0]
    if not cells:
        return True
    rows_of_col: dict[int, list[int]] = {}
    for i, j in cells:
        rows_of_col.setdefault(j, []).append(i)
    seen_rows = {cells[0][0]}
    seen_cols: set[int] = set()
    stack = [cells[0][0]]
    while stack:
        i = stack.pop()
        for j, x in enumerate(M[i]):
            if x != 0 and j not in seen_cols:
                seen_cols.add(j)
                for i2 in rows_of_col[j]:
                    if i2 not in seen_rows:
                        seen_rows.add(i2)
                        stack.append(i2)
    return seen_rows == {i for i, _ in cells} and seen_cols == {j for _, j in cells}


def foliated_dimension_via_rank(s: StripSurface) -> int:
    """Labeled even zeros plus the dimension of the width solution space."""
    if not is_generic(s):
        raise NonGenericError("make the surface generic first")
    n_even = sum(1 for z in s.zero_classes if z.label is not None and z.s % 2 == 0)
    return n_even + s.b - mat_rank(connection_matrix(s).exact())


def format_matrix(cm: ConnectionMatrix, fmt: str = "pretty", generators=()) -> str:
    from .exactfield import format_scalar

    if fmt == "csv":
        head = "pole," + ",".join(cm.bigon_order) + ",C"
        lines = [head]
        for i, row in enumerate(cm.M):
            name = cm.pole_labels[i] or f"q{_unlabeled_index(cm, i)}"
            lines.append(name + "," + ",".join(str(x) for x in row) + "," + format_scalar(cm.C[i], generators))
        return "\n".join(lines) + "\n"
    names = [cm.pole_labels[i] or f"q{_unlabeled_index(cm, i)}" for i in range(cm.m)]
    cvals = [format_scalar(c, generators) for c in cm.C]
    nw = max([len(x) for x in names] + [1])
    cw = max([len(x) for x in cvals] + [1])
    lines = [" " * nw + "   " + " ".join(f"{b:>2}" for b in cm.bigon_order)]
    for name, row, c in zip(names, cm.M, cvals):
        lines.append(f"{name:>{nw}} [ " + " ".join(f"{x:>{max(2, len(b))}}" for x, b in zip(row, cm.bigon_order)) + f" ]  {c:>{cw}}")
    return "\n".join(lines) + "\n"


def _unlabeled_index(cm: ConnectionMatrix, i: int) -> int:
    return sum(1 for lab in cm.pole_labels[: i + 1] if lab is None)
