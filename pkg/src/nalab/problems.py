"""Union-of-arcs benchmark problems and the cube-corner point set."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import arcs
from .arcs import Arc, ArcSet

PI = math.pi
SQRT2_2 = math.sqrt(2.0) / 2.0
SQRT3_2 = math.sqrt(3.0) / 2.0


class ProblemError(ValueError):
    pass


@dataclass(frozen=True)
class OptimumSpec:
    """One optimal placement: a (angle, bias) target per hidden neuron.

    Neuron order is irrelevant; success checks try every assignment.
    """

    neurons: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class Problem:
    name: str
    target: ArcSet
    min_arc_length: float
    # keyed by hidden-neuron count
    optima: Mapping[int, tuple[OptimumSpec, ...]] = field(default_factory=dict)
    best_fitness: Mapping[int, float] = field(default_factory=dict)

    def optima_for(self, n: int) -> tuple[OptimumSpec, ...]:
        return tuple(self.optima.get(n, ()))

    def best_fitness_for(self, n: int) -> float | None:
        """Best attainable fitness with ``n`` hidden OR-ed neurons, if known.

        More neurons never hurt, so the value for the largest known count
        below ``n`` is a valid lower bound; 1.0 is returned once known.
        """
        if n in self.best_fitness:
            return self.best_fitness[n]
        known = [k for k in self.best_fitness if k <= n]
        if known and self.best_fitness[max(known)] == 1.0:
            return 1.0
        return None

    @property
    def arc_count(self) -> int:
        return len(self.target.arcs())


@dataclass(frozen=True)
class LabeledPointSet:
    name: str
    points: np.ndarray  # (M, D), unit rows
    labels: np.ndarray  # (M,), 0/1

    def __post_init__(self):
        norms = np.linalg.norm(self.points, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-9):
            raise ProblemError("point set contains non-unit points")
        if not set(np.unique(self.labels)).issubset({0, 1}):
            raise ProblemError("labels must be 0/1")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def best_fitness_for(self, n: int) -> float:
        # perfect classification is the goal for point sets
        return 1.0

    def optima_for(self, n: int) -> tuple:
        return ()


def _arc_set(degree_pairs: Iterable[tuple[float, float]]) -> ArcSet:
    return arcs.normalize(Arc.degrees(s, e) for s, e in degree_pairs)


def _half() -> Problem:
    return Problem(
        "half",
        _arc_set([(0, 180)]),
        PI,
        optima={1: (OptimumSpec(((PI / 2, 0.0),)),)},
        best_fitness={1: 1.0},
    )


def _quarter() -> Problem:
    return Problem(
        "quarter",
        _arc_set([(0, 90)]),
        PI / 2,
        optima={1: (OptimumSpec(((PI / 4, SQRT2_2),)),)},
        best_fitness={1: 1.0},
    )


def _two_quarters() -> Problem:
    q1 = (PI / 4, SQRT2_2)
    q3 = (5 * PI / 4, SQRT2_2)
    # a single line can also cover three quarters and misclassify one
    # negative quarter, which is just as good
    cap_q2 = (7 * PI / 4, -SQRT2_2)
    cap_q4 = (3 * PI / 4, -SQRT2_2)
    return Problem(
        "two-quarters",
        _arc_set([(0, 90), (180, 270)]),
        PI / 2,
        optima={
            1: tuple(OptimumSpec((n,)) for n in (q1, q3, cap_q2, cap_q4)),
            2: (OptimumSpec((q1, q3)),),
        },
        best_fitness={1: 0.75, 2: 1.0},
    )


def _three_arc() -> Problem:
    # Single-line placements misclassifying exactly 90 degrees: the half
    # plane through the origin facing 330 deg, and the two wide caps that
    # leave out only the negative arc (60, 120) or (180, 240).  Verified
    # against the exhaustive oracle in the test suite.
    optima = (
        OptimumSpec(((11 * PI / 6, 0.0),)),
        OptimumSpec(((3 * PI / 2, -SQRT3_2),)),
        OptimumSpec(((PI / 6, -SQRT3_2),)),
    )
    return Problem(
        "three-arc",
        _arc_set([(0, 60), (120, 180), (240, 330)]),
        PI / 3,
        optima={1: optima},
        best_fitness={1: 0.75},
    )


_BUILTIN = {
    "half": _half,
    "quarter": _quarter,
    "two-quarters": _two_quarters,
    "three-arc": _three_arc,
}

_ALIASES = {
    "twoquarters": "two-quarters",
    "two_quarters": "two-quarters",
    "threearc": "three-arc",
    "three_arc": "three-arc",
}

PROBLEM_NAMES = tuple(_BUILTIN) + ("cube",)


def make_problem(name: str) -> Problem | LabeledPointSet:
    key = name.lower()
    key = _ALIASES.get(key, key)
    if key == "cube":
        return cube_corners_dataset()
    try:
        return _BUILTIN[key]()
    except KeyError:
        raise ProblemError(f"unknown problem {name!r}; choose from {PROBLEM_NAMES}") from None


def make_custom_union_of_arcs(
    arc_list: Sequence[Arc | tuple[float, float]],
    min_length: float,
    name: str = "custom",
) -> Problem:
    """Problem whose positive set is the given disjoint arcs.

    ``arc_list`` holds :class:`Arc` or ``(start, length)`` radians.  Arcs must
    be pairwise disjoint (touching endpoints is overlap too, since the merged
    arc count would change) and each at least ``min_length`` long.
    """
    if not min_length > 0:
        raise ProblemError("min_length must be positive")
    items = [a if isinstance(a, Arc) else Arc(*a) for a in arc_list]
    if not items:
        raise ProblemError("need at least one arc")
    for a in items:
        if a.length < min_length - arcs.EPS:
            raise ProblemError(f"arc {a} shorter than min_length {min_length}")
    singles = [arcs.normalize([a]) for a in items]
    for x, y in itertools.combinations(singles, 2):
        if arcs.overlap_measure(x, y) > 0 or arcs.union(x, y).measure < x.measure + y.measure:
            raise ProblemError("arcs overlap")
    target = arcs.normalize(items)
    if len(target.arcs()) != len(items) and not target.is_full:
        raise ProblemError("arcs touch; merge them into one arc")
    return Problem(name, target, min_length)


def custom_from_degrees(pairs: Sequence[Sequence[float]], min_length_degrees: float | None = None,
                        name: str = "custom") -> Problem:
    """Config-file form: ``(start_degrees, end_degrees)`` pairs, counter-clockwise."""
    items = [Arc.degrees(float(s), float(e)) for s, e in pairs]
    if min_length_degrees is None:
        min_len = min(a.length for a in items)
    else:
        min_len = math.radians(min_length_degrees)
    return make_custom_union_of_arcs(items, min_len, name=name)


def cube_corners_dataset() -> LabeledPointSet:
    """Corners of the cube on the unit sphere, even-parity corners labelled 1."""
    corners = np.array(list(itertools.product((1.0, -1.0), repeat=3)))
    labels = np.array([int(np.sum(c < 0) % 2 == 0) for c in corners])
    return LabeledPointSet("cube", corners / math.sqrt(3.0), labels)
