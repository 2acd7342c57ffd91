"""Spherical trigonometry for re-decomposing the two-bigon torus.

Angles here are radians; everything else in the package uses turns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["TrigContext", "TrigDomainError", "Redecomposition", "torus_redecomposition", "turns_to_radians", "radians_to_turns"]


class TrigDomainError(ValueError):
    """An inverse trigonometric function was asked for a value outside its domain."""


@dataclass(frozen=True)
class TrigContext:
    tolerance: float = 1e-12

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class Redecomposition:
    """Pole latitude and first width of the two alternative decompositions, with residuals."""

    x1: float
    w1: float
    x2: float
    w2: float
    residuals: tuple[float, float, float, float]

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.w1, self.x2, self.w2)


def turns_to_radians(t: float) -> float:
    return 2 * math.pi * t


def radians_to_turns(r: float) -> float:
    return r / (2 * math.pi)


def _acos(v: float, what: str) -> float:
    if not -1.0 <= v <= 1.0:
        raise TrigDomainError(f"arccos argument {v!r} for {what} lies outside [-1, 1]")
    return math.acos(v)


def _asin(v: float, what: str) -> float:
    if not -1.0 <= v <= 1.0:
        raise TrigDomainError(f"arcsin argument {v!r} for {what} lies outside [-1, 1]")
    return math.asin(v)


def torus_redecomposition(x: float, w1: float, ctx: TrigContext = TrigContext()) -> Redecomposition:
    """Solve for the two other strip decompositions of the torus fixture.

    ``x`` is the latitude of the zero (0 < x < pi/2) and ``w1`` the width of
    the first bigon (0 < w1 < pi), both in radians.  Returns ``(x', w1')``
    with ``cos x' = sin x cos(w1/2)`` and ``cos x = sin x' sin(w1'/2)``, and
    ``(x'', w1'')`` with ``cos x'' = sin x sin(w1/2)`` and
    ``cos x = sin x'' cos(w1''/2)``.
    """
    if not 0 < x < math.pi / 2:
        raise TrigDomainError(f"x = {x!r} must lie in (0, pi/2)")
    if not 0 < w1 < math.pi:
        raise TrigDomainError(f"w1 = {w1!r} must lie in (0, pi)")
    sx, cx = math.sin(x), math.cos(x)
    x1 = _acos(sx * math.cos(w1 / 2), "x'")
    w1a = 2 * _asin(cx / math.sin(x1), "w1'")
    x2 = _acos(sx * math.sin(w1 / 2), "x''")
    w1b = 2 * _acos(cx / math.sin(x2), "w1''")
    res = (
        math.cos(x1) - sx * math.cos(w1 / 2),
        cx - math.sin(x1) * math.sin(w1a / 2),
        math.cos(x2) - sx * math.sin(w1 / 2),
        cx - math.sin(x2) * math.cos(w1b / 2),
    )
    worst = max(abs(r) for r in res)
    if worst > ctx.tolerance:
        raise ArithmeticError(f"residual {worst:.3e} exceeds tolerance {ctx.tolerance:.1e}")
    return Redecomposition(x1, w1a, x2, w1b, res)
