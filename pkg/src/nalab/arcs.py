"""Exact set algebra on finite unions of arcs of the unit circle.

Arcs are stored as half-open ``[start, end)`` pieces inside ``[0, 2*pi]``.
An arc that crosses angle 0 is split in two at the seam, so every
:class:`ArcSet` is a sorted tuple of disjoint, non-abutting pieces and two
sets are equal iff their piece tuples are equal.  Boundaries carry no
measure, so open/closed distinctions are ignored throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
# gaps and slivers below this are floating-point noise (arccos round-off)
EPS = 1e-12


@dataclass(frozen=True)
class Arc:
    """Counter-clockwise arc beginning at ``start`` and spanning ``length`` radians."""

    start: float
    length: float

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.length)):
            raise ValueError(f"non-finite arc {self.start!r}, {self.length!r}")
        if self.length < 0 or self.length > TWO_PI + EPS:
            raise ValueError(f"arc length {self.length!r} outside [0, 2pi]")

    @classmethod
    def between(cls, start: float, end: float) -> "Arc":
        """Arc running counter-clockwise from ``start`` to ``end``."""
        return cls(start, (end - start) % TWO_PI)

    @classmethod
    def degrees(cls, start: float, end: float) -> "Arc":
        return cls.between(math.radians(start), math.radians(end))


@dataclass(frozen=True)
class ArcSet:
    """Canonical union of arcs; build with :func:`normalize` rather than directly."""

    pieces: tuple[tuple[float, float], ...] = ()

    @property
    def measure(self) -> float:
        return math.fsum(e - s for s, e in self.pieces)

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    @property
    def is_full(self) -> bool:
        return self.pieces == ((0.0, TWO_PI),)

    def arcs(self) -> list[Arc]:
        """Arcs of the set with the seam split undone (one arc may wrap past 0)."""
        ps = list(self.pieces)
        if len(ps) >= 2 and ps[0][0] == 0.0 and ps[-1][1] == TWO_PI:
            first = ps.pop(0)
            last = ps.pop()
            wrapped = Arc(last[0], (TWO_PI - last[0]) + first[1])
            return [Arc(s, e - s) for s, e in ps] + [wrapped]
        return [Arc(s, e - s) for s, e in ps]

    def contains(self, theta):
        """Membership test; accepts a scalar or an array of angles."""
        t = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        if not self.pieces:
            return np.zeros(t.shape, dtype=bool) if t.ndim else False
        starts = np.array([s for s, _ in self.pieces])
        ends = np.array([e for _, e in self.pieces])
        idx = np.searchsorted(starts, t, side="right") - 1
        inside = (idx >= 0) & (t < ends[np.clip(idx, 0, None)])
        return inside if t.ndim else bool(inside)

    def __or__(self, other: "ArcSet") -> "ArcSet":
        return union(self, other)

    def __and__(self, other: "ArcSet") -> "ArcSet":
        return intersect(self, other)

    def __invert__(self) -> "ArcSet":
        return complement(self)


EMPTY = ArcSet(())
FULL = ArcSet(((0.0, TWO_PI),))


def _check(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError(f"non-finite angle {x!r}")
    return x


def _merge(pieces: list[tuple[float, float]]) -> ArcSet:
    pieces.sort()
    out: list[list[float]] = []
    for s, e in pieces:
        if e - s <= EPS:
            continue
        if out and s <= out[-1][1] + EPS:
            if e > out[-1][1]:
                out[-1][1] = e
        else:
            out.append([s, e])
    if out and out[0][0] <= EPS:
        out[0][0] = 0.0
    if out and out[-1][1] >= TWO_PI - EPS:
        out[-1][1] = TWO_PI
    return ArcSet(tuple((s, e) for s, e in out))


def normalize(arcs: Iterable[Arc | tuple[float, float]]) -> ArcSet:
    """Canonical form of a union of arcs.

    Plain ``(start, length)`` tuples are accepted as well as :class:`Arc`.
    Overlapping or abutting arcs merge; zero-length arcs vanish.
    """
    pieces: list[tuple[float, float]] = []
    for a in arcs:
        if not isinstance(a, Arc):
            a = Arc(*a)
        if a.length >= TWO_PI - EPS:
            return FULL
        if a.length <= 0.0:
            continue
        s = _check(a.start) % TWO_PI
        e = s + a.length
        if e > TWO_PI:
            pieces.append((s, TWO_PI))
            pieces.append((0.0, e - TWO_PI))
        else:
            pieces.append((s, e))
    return _merge(pieces)


def from_pieces(pieces: Sequence[tuple[float, float]]) -> ArcSet:
    """Canonicalize raw ``[start, end)`` pieces that already lie in ``[0, 2pi]``."""
    for s, e in pieces:
        _check(s), _check(e)
        if not (-EPS <= s <= e <= TWO_PI + EPS):
            raise ValueError(f"piece ({s}, {e}) outside [0, 2pi]")
    return _merge([(max(s, 0.0), min(e, TWO_PI)) for s, e in pieces])


def union(a: ArcSet, b: ArcSet) -> ArcSet:
    if not a.pieces:
        return b
    if not b.pieces:
        return a
    return _merge(list(a.pieces) + list(b.pieces))


def intersect(a: ArcSet, b: ArcSet) -> ArcSet:
    pa, pb = a.pieces, b.pieces
    out = []
    i = j = 0
    while i < len(pa) and j < len(pb):
        s = max(pa[i][0], pb[j][0])
        e = min(pa[i][1], pb[j][1])
        if e - s > EPS:
            out.append((s, e))
        if pa[i][1] < pb[j][1]:
            i += 1
        else:
            j += 1
    return ArcSet(tuple(out))


def complement(a: ArcSet) -> ArcSet:
    out = []
    prev = 0.0
    for s, e in a.pieces:
        if s - prev > EPS:
            out.append((prev, s))
        prev = e
    if TWO_PI - prev > EPS:
        out.append((prev, TWO_PI))
    return ArcSet(tuple(out))


def difference(a: ArcSet, b: ArcSet) -> ArcSet:
    return intersect(a, complement(b))


def measure(a: ArcSet) -> float:
    return a.measure


def overlap_measure(a: ArcSet, b: ArcSet) -> float:
    """``measure(intersect(a, b))`` without building the intersection."""
    pa, pb = a.pieces, b.pieces
    total = 0.0
    i = j = 0
    while i < len(pa) and j < len(pb):
        s = max(pa[i][0], pb[j][0])
        e = min(pa[i][1], pb[j][1])
        if e - s > EPS:
            total += e - s
        if pa[i][1] < pb[j][1]:
            i += 1
        else:
            j += 1
    return total
