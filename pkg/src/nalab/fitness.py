"""Exact fitness on the circle, point-set fitness, and independent oracles."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import arcs
from .arcs import TWO_PI, ArcSet
from .network import (
    BiasMode,
    HyperplaneNeuron,
    Network,
    NetworkTopology,
    Neuron,
    classify_points,
    combine_regions,
    component_modulus,
    component_value,
    decode,
    decode_values,
    output_accepts,
    positive_region,
    predict_region,
    validate_components,
)
from .problems import SQRT2_2, LabeledPointSet, Problem

Target = Problem | LabeledPointSet


def fitness_of_region(region: ArcSet, problem: Problem) -> float:
    """Fraction of the circle where ``region`` agrees with the problem's target."""
    target = problem.target
    agree = arcs.overlap_measure(region, target) + arcs.overlap_measure(
        arcs.complement(region), arcs.complement(target)
    )
    return min(1.0, max(0.0, agree / TWO_PI))


def fitness_network(net: Network, problem: Target) -> float:
    if isinstance(problem, LabeledPointSet):
        return pointset_accuracy(net, problem)
    return fitness_of_region(predict_region(net), problem)


def fitness(g: Sequence[int], topo: NetworkTopology, r: int, problem: Target) -> float:
    """Exact fitness of an integer genotype."""
    if isinstance(problem, LabeledPointSet):
        return fitness_pointset(g, topo, r, problem)
    if topo.input_dim != 2:
        raise ValueError("arc problems need a planar (D=2) topology")
    return fitness_of_region(predict_region(decode(g, topo, r)), problem)


def fitness_values(values: Sequence[float], topo: NetworkTopology, problem: Target) -> float:
    """Fitness of real-valued parameters (angles in radians, biases in [-1, 1])."""
    return fitness_network(decode_values(values, topo), problem)


def pointset_accuracy(net: Network, ds: LabeledPointSet) -> float:
    return float(np.mean(classify_points(net, ds.points) == ds.labels))


def fitness_pointset(g: Sequence[int], topo: NetworkTopology, r: int, ds: LabeledPointSet) -> float:
    if topo.input_dim != ds.dim:
        raise ValueError(f"topology has D={topo.input_dim}, dataset has D={ds.dim}")
    return pointset_accuracy(decode(g, topo, r), ds)


class FitnessEvaluator:
    """Memoizing fitness for one (problem, topology, r).

    Fitness is a pure function of the genotype, so caching whole-genotype
    values and per-neuron regions changes nothing but speed.
    """

    def __init__(self, problem: Target, topo: NetworkTopology, r: int, memo_limit: int = 2_000_000):
        self.problem, self.topo, self.r = problem, topo, r
        self.memo: dict[tuple[int, ...], float] = {}
        self.memo_limit = memo_limit
        self._parts: dict[tuple[int, ...], object] = {}
        self._outputs: dict[tuple[int, ...], HyperplaneNeuron] = {}
        self.kinds = topo.component_kinds()
        self.width = topo.input_dim
        self.n_hidden = topo.hidden_count
        self._fixed = topo.bias_mode is BiasMode.FIXED_ZERO
        self._points = None
        if isinstance(problem, LabeledPointSet):
            self._points = [tuple(float(v) for v in pt) for pt in problem.points]
            self._n_points = len(self._points)
            self._full_mask = (1 << self._n_points) - 1
            self._label_mask = sum(1 << m for m, y in enumerate(problem.labels) if y)
            if topo.input_dim != problem.dim:
                raise ValueError(f"topology has D={topo.input_dim}, dataset has D={problem.dim}")
        elif topo.input_dim != 2:
            raise ValueError("arc problems need a planar (D=2) topology")

    def _hidden_part(self, comps: tuple[int, ...]):
        """Positive arc of one hidden neuron, or a bitmask over the points."""
        part = self._parts.get(comps)
        if part is None:
            values = [component_value(k, c, self.r) for k, c in zip(self.kinds, comps)]
            bias = 0.0 if self._fixed else values[-1]
            if self._points is not None:
                normal = _unit_list(values[:-1])
                part = 0
                for m, pt in enumerate(self._points):
                    if sum(a * b for a, b in zip(pt, normal)) >= bias:
                        part |= 1 << m
            else:
                part = positive_region(Neuron(values[0], bias))
            self._parts[comps] = part
        return part

    def _output(self, g: tuple[int, ...]):
        """Evolved output neuron (arc mode) or its accepted patterns (point mode)."""
        if not self.topo.evolved:
            return None
        start = self.n_hidden * self.width
        comps = g[start:]
        out = self._outputs.get(comps)
        if out is None:
            vals = [component_value(k, c, self.r) for k, c in zip(self.kinds[start:], comps)]
            out = HyperplaneNeuron(tuple(_unit_list(vals[:-1])), vals[-1])
            if self._points is not None:
                out = tuple(pat for pat in itertools.product((0, 1), repeat=self.n_hidden)
                            if output_accepts(out, pat))
            self._outputs[comps] = out
        return out

    def __call__(self, g: tuple[int, ...]) -> float:
        f = self.memo.get(g)
        if f is not None:
            return f
        w = self.width
        parts = [self._hidden_part(g[i * w:(i + 1) * w]) for i in range(self.n_hidden)]
        output = self._output(g)
        if self._points is not None:
            f = self._mask_fitness(parts, output)
        else:
            f = fitness_of_region(combine_regions(parts, output), self.problem)
        if len(self.memo) >= self.memo_limit:
            self.memo.clear()
        self.memo[g] = f
        return f

    def _mask_fitness(self, parts: list[int], accepted) -> float:
        full = self._full_mask
        if accepted is None:
            pred = 0
            for m in parts:
                pred |= m
        else:
            pred = 0
            for pat in accepted:
                cell = full
                for bit, m in zip(pat, parts):
                    cell &= m if bit else full ^ m
                pred |= cell
        return bin(full ^ (pred ^ self._label_mask)).count("1") / self._n_points


def _unit_list(angles) -> list[float]:
    # same convention as network.spherical_to_unit, without numpy overhead
    v = [math.cos(angles[0]), math.sin(angles[0])]
    for p in angles[1:]:
        sp = math.sin(p)
        v = [sp * c for c in v] + [math.cos(p)]
    return v


# --- Monte Carlo oracle -------------------------------------------------------


def monte_carlo_fitness(g: Sequence[int], topo: NetworkTopology, r: int, problem: Problem,
                        samples: int, seed: int) -> float:
    """Fraction of uniform random angles the decoded network labels correctly."""
    return monte_carlo_network(decode(g, topo, r), problem, samples, seed)


def monte_carlo_network(net: Network, problem: Problem, samples: int, seed: int) -> float:
    """Monte Carlo fitness of a planar network.

    Uses pointwise dot-product classification and direct arc membership, so
    it shares no code path with the arc-algebra engine.  Philox is counter
    based: the estimate is reproducible for a given ``seed``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    theta = rng.random(samples) * TWO_PI
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    predicted = classify_points(net, pts)
    truth = np.zeros(samples, dtype=bool)
    for a in problem.target.arcs():
        truth |= np.mod(theta - a.start, TWO_PI) < a.length
    return float(np.mean(predicted == truth.astype(int)))


# --- closed form for a single line on Quarter ---------------------------------


@dataclass(frozen=True)
class QuarterDecomposition:
    eta: float    # arc length above the line minus pi/2
    dphi: float   # wrapped |angle - pi/4|
    dbias: float  # bias - sqrt(2)/2
    in_domain: bool
    predicted: float | None


def quarter_decomposition(g: Sequence[int], r: int) -> QuarterDecomposition:
    """Fitness of one line on Quarter from (eta, dphi, dbias) alone.

    Valid when the bias is non-negative and part of the quarter arc lies
    above the line; ``in_domain`` is False (and ``predicted`` None)
    otherwise.  The misclassified length is ``|eta|`` plus twice the part
    of the shorter arc that sticks out of the longer one.
    """
    phi, b = g
    return quarter_decomposition_values(2 * math.pi * phi / r, 2 * b / r - 1)


def quarter_decomposition_values(angle: float, bias: float) -> QuarterDecomposition:
    above = 2 * math.acos(min(1.0, max(-1.0, bias)))
    eta = above - math.pi / 2
    d = abs(angle - math.pi / 4) % TWO_PI
    dphi = min(d, TWO_PI - d)
    dbias = bias - SQRT2_2
    overlap = min(above, math.pi / 2, (above + math.pi / 2) / 2 - dphi)
    in_domain = dbias >= -SQRT2_2 and overlap > 0
    predicted = None
    if in_domain:
        wrong = abs(eta) + 2 * max(0.0, dphi - abs(eta) / 2)
        predicted = 1 - wrong / TWO_PI
    return QuarterDecomposition(eta, dphi, dbias, in_domain, predicted)


# --- local optima --------------------------------------------------------------


def neighbors(g: Sequence[int], topo: NetworkTopology, r: int) -> list[tuple[int, ...]]:
    """All genotypes one ``+-1`` step (with wrap) away in one mutable component."""
    kinds = topo.component_kinds()
    out = []
    for i, mutable in enumerate(topo.mutable_mask()):
        if not mutable:
            continue
        mod = component_modulus(kinds[i], r)
        for s in (1, -1):
            y = list(g)
            y[i] = (y[i] + s) % mod
            out.append(tuple(y))
    return out


def is_local_optimum(g: Sequence[int], topo: NetworkTopology, r: int, problem: Target,
                     evaluate=None) -> tuple[bool, list[tuple[int, ...]]]:
    """True when no single-component unit step gives strictly larger fitness."""
    g = tuple(g)
    validate_components(g, topo, r)
    if evaluate is None:
        evaluate = FitnessEvaluator(problem, topo, r)
    f = evaluate(g)
    better = [y for y in neighbors(g, topo, r) if evaluate(y) > f]
    return not better, better


def boundary_distance(angle: float, problem: Problem) -> float:
    """Angular distance from ``angle`` to the nearest endpoint of a target arc."""
    best = math.inf
    for a in problem.target.arcs():
        for e in (a.start, a.start + a.length):
            d = abs(angle - e) % TWO_PI
            best = min(best, d, TWO_PI - d)
    return best


def line_intersections(n: Neuron) -> tuple[float, float] | None:
    """Angles where the neuron's line crosses the circle (None if it misses)."""
    if not -1.0 < n.bias < 1.0:
        return None
    h = math.acos(n.bias)
    return ((n.angle - h) % TWO_PI, (n.angle + h) % TWO_PI)
