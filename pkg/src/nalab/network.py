"""Genotype encoding and the geometry of one- and two-layer threshold networks.

A hidden neuron in the plane is a line in Hesse normal form: unit normal at
``angle`` and signed offset ``bias``; it fires on ``x . n >= bias``.  On the
unit circle that half-plane cuts out the arc centred on ``angle`` with
half-width ``arccos(bias)``.

Genotype layout (integers, resolution ``r``)::

    hidden neuron i : angle_1 .. angle_{D-1}, bias      D-1 angles + 1 bias
    output neuron   : angle_1 .. angle_{N-1}, bias      only if evolved

An ``angle`` component (the first spherical angle) lives in ``{0..r-1}`` and
maps to ``2*pi*k/r``.  Further ``polar`` angles also live in ``{0..r-1}``
and map to ``pi*k/(r-1)``.  A ``bias`` lives in ``{0..r}`` and maps to
``2*b/r - 1``.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import arcs
from .arcs import ArcSet

ANGLE = "angle"
POLAR = "polar"
BIAS = "bias"


class OutputMode(enum.Enum):
    HARDWIRED_OR = "or"
    EVOLVED = "evolved"


class BiasMode(enum.Enum):
    VARIABLE = "variable"
    FIXED_ZERO = "fixed-zero"


class GenotypeError(ValueError):
    """Genotype has the wrong length or an out-of-range component."""


@dataclass(frozen=True)
class NetworkTopology:
    hidden_count: int = 1
    output_mode: OutputMode = OutputMode.HARDWIRED_OR
    bias_mode: BiasMode = BiasMode.VARIABLE
    input_dim: int = 2

    def __post_init__(self):
        if self.hidden_count < 1:
            raise ValueError("need at least one hidden neuron")
        if self.input_dim < 2:
            raise ValueError("input dimension must be >= 2")
        if self.evolved and self.hidden_count < 2:
            raise ValueError("an evolved output neuron needs >= 2 hidden neurons")

    @property
    def evolved(self) -> bool:
        return self.output_mode is OutputMode.EVOLVED

    @property
    def neuron_count(self) -> int:
        """Neurons carrying parameters (hidden plus evolved output)."""
        return self.hidden_count + (1 if self.evolved else 0)

    @property
    def hidden_width(self) -> int:
        return self.input_dim

    def component_kinds(self) -> tuple[str, ...]:
        hidden = (ANGLE,) + (POLAR,) * (self.input_dim - 2) + (BIAS,)
        kinds = hidden * self.hidden_count
        if self.evolved:
            kinds += (ANGLE,) + (POLAR,) * (self.hidden_count - 2) + (BIAS,)
        return kinds

    def mutable_mask(self) -> tuple[bool, ...]:
        """Components the search may change; fixed-zero biases are inert."""
        kinds = self.component_kinds()
        n_hidden = self.hidden_count * self.input_dim
        fixed = self.bias_mode is BiasMode.FIXED_ZERO
        return tuple(
            not (fixed and k == BIAS and i < n_hidden) for i, k in enumerate(kinds)
        )

    @property
    def genotype_length(self) -> int:
        return len(self.component_kinds())


def component_modulus(kind: str, r: int) -> int:
    return r + 1 if kind == BIAS else r


def component_value(kind: str, k: int, r: int) -> float:
    if kind == ANGLE:
        return 2.0 * math.pi * k / r
    if kind == POLAR:
        return math.pi * k / (r - 1)
    return 2.0 * k / r - 1.0


@dataclass(frozen=True)
class Genotype:
    components: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(int(c) for c in self.components))

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def validate(self, topo: NetworkTopology, r: int) -> "Genotype":
        validate_components(self.components, topo, r)
        return self

    def to_line(self) -> str:
        return " ".join(str(c) for c in self.components)

    @classmethod
    def from_line(cls, line: str) -> "Genotype":
        try:
            return cls(tuple(int(tok) for tok in line.split()))
        except ValueError as exc:
            raise GenotypeError(f"not a genotype line: {line!r}") from exc


def validate_components(g: Sequence[int], topo: NetworkTopology, r: int) -> None:
    kinds = topo.component_kinds()
    if len(g) != len(kinds):
        raise GenotypeError(f"genotype length {len(g)}, topology needs {len(kinds)}")
    for i, (c, kind) in enumerate(zip(g, kinds)):
        if not 0 <= c < component_modulus(kind, r):
            raise GenotypeError(f"component {i} ({kind}) = {c} out of range for r={r}")


@dataclass(frozen=True)
class Neuron:
    """Planar threshold neuron: fires on ``cos(theta - angle) >= bias``."""

    angle: float
    bias: float

    @property
    def normal(self) -> np.ndarray:
        return np.array([math.cos(self.angle), math.sin(self.angle)])


@dataclass(frozen=True)
class HyperplaneNeuron:
    """Threshold neuron in any dimension: fires on ``x . normal >= bias``."""

    normal: tuple[float, ...]
    bias: float


@dataclass(frozen=True)
class Network:
    hidden: tuple
    output: HyperplaneNeuron | None = None


def spherical_to_unit(angles: Sequence[float]) -> np.ndarray:
    """Unit vector from an azimuth followed by polar angles.

    ``(a,)`` gives ``(cos a, sin a)``; each further polar angle ``p`` lifts the
    vector one dimension as ``(sin p * v, cos p)``.
    """
    a0 = angles[0]
    v = np.array([math.cos(a0), math.sin(a0)])
    for p in angles[1:]:
        v = np.append(math.sin(p) * v, math.cos(p))
    return v


def _split(values: Sequence[float], kinds: Sequence[str]):
    """Group decoded values into (angles, bias) per neuron."""
    out = []
    angles: list[float] = []
    for v, kind in zip(values, kinds):
        if kind == BIAS:
            out.append((tuple(angles), v))
            angles = []
        else:
            angles.append(v)
    return out


def decode_values(values: Sequence[float], topo: NetworkTopology) -> Network:
    """Network from real-valued parameters laid out like a genotype."""
    groups = _split(values, topo.component_kinds())
    hidden = []
    for angles, bias in groups[: topo.hidden_count]:
        if topo.bias_mode is BiasMode.FIXED_ZERO:
            bias = 0.0
        if topo.input_dim == 2:
            hidden.append(Neuron(angles[0], bias))
        else:
            hidden.append(HyperplaneNeuron(tuple(spherical_to_unit(angles)), bias))
    output = None
    if topo.evolved:
        angles, bias = groups[-1]
        output = HyperplaneNeuron(tuple(spherical_to_unit(angles)), bias)
    return Network(tuple(hidden), output)


def decode(g: Genotype | Sequence[int], topo: NetworkTopology, r: int) -> Network:
    comps = g.components if isinstance(g, Genotype) else tuple(g)
    validate_components(comps, topo, r)
    kinds = topo.component_kinds()
    return decode_values([component_value(k, c, r) for k, c in zip(kinds, comps)], topo)


def positive_region(n: Neuron) -> ArcSet:
    """Arc of the unit circle on or above the neuron's line."""
    half = math.acos(min(1.0, max(-1.0, n.bias)))
    if half >= math.pi:
        return arcs.FULL
    return arcs.normalize([arcs.Arc(n.angle - half, 2.0 * half)])


def output_accepts(output: HyperplaneNeuron | None, pattern: Sequence[int]) -> bool:
    if output is None:
        return any(pattern)
    return float(np.dot(output.normal, pattern)) >= output.bias


def predict_region(net: Network, topo: NetworkTopology | None = None) -> ArcSet:
    """Region of the circle the network labels 1 (planar hidden layer only)."""
    regions = [positive_region(n) for n in net.hidden]
    return combine_regions(regions, net.output)


def combine_regions(regions: Sequence[ArcSet], output: HyperplaneNeuron | None) -> ArcSet:
    if output is None:
        acc = arcs.EMPTY
        for reg in regions:
            acc = arcs.union(acc, reg)
        return acc
    comps = [arcs.complement(reg) for reg in regions]
    acc = arcs.EMPTY
    for pattern in itertools.product((0, 1), repeat=len(regions)):
        if not output_accepts(output, pattern):
            continue
        cell = arcs.FULL
        for bit, reg, comp in zip(pattern, regions, comps):
            cell = arcs.intersect(cell, reg if bit else comp)
            if cell.is_empty:
                break
        acc = arcs.union(acc, cell)
    return acc


def hidden_outputs(net: Network, x: np.ndarray) -> np.ndarray:
    """Hidden-layer bits for points ``x`` of shape (..., D)."""
    bits = []
    for n in net.hidden:
        normal = n.normal if isinstance(n, Neuron) else np.asarray(n.normal)
        bits.append(x @ normal >= n.bias)
    return np.stack(bits, axis=-1).astype(int)


def classify_points(net: Network, x: np.ndarray) -> np.ndarray:
    """Vectorized network output for points ``x`` of shape (M, D)."""
    h = hidden_outputs(net, np.asarray(x, dtype=float))
    if net.output is None:
        return h.any(axis=-1).astype(int)
    return (h @ np.asarray(net.output.normal) >= net.output.bias).astype(int)


def classify_point(net: Network, x: Sequence[float], tol: float = 1e-9) -> int:
    x = np.asarray(x, dtype=float)
    if abs(float(np.linalg.norm(x)) - 1.0) > tol:
        raise ValueError(f"input {x} is not a unit vector")
    dim = 2 if isinstance(net.hidden[0], Neuron) else len(net.hidden[0].normal)
    if x.shape != (dim,):
        raise ValueError(f"input has dimension {x.shape}, network expects {dim}")
    return int(classify_points(net, x[None, :])[0])
