"""Step-size distributions and wrap-around component mutation."""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .network import ANGLE, BIAS, POLAR, NetworkTopology, component_modulus


class Kind(enum.Enum):
    HARMONIC = "harmonic"
    UNIT = "unit"
    PARETO = "pareto"
    EXPONENTIAL = "exponential"
    CAUCHY = "cauchy"


CONTINUOUS = (Kind.PARETO, Kind.EXPONENTIAL, Kind.CAUCHY)


@dataclass(frozen=True)
class MutationOperator:
    """How a selected component is perturbed.

    ``selection`` is the per-component selection probability; ``None`` means
    ``1/(2 * neuron_count)``.  ``resample_void`` redraws the selection until
    at least one component is picked.
    """

    kind: Kind = Kind.HARMONIC
    params: Mapping[str, float] = field(default_factory=dict)
    selection: float | None = None
    resample_void: bool = False

    def __post_init__(self):
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(self.kind))
        if self.selection is not None and not 0 < self.selection <= 1:
            raise ValueError("selection probability must lie in (0, 1]")
        if self.kind is Kind.PARETO and self.params.get("shape", 1.0) <= 0:
            raise ValueError("Pareto shape must be positive")
        for key in ("scale", "mean"):
            if self.params.get(key, 0.0) < 0:
                raise ValueError(f"{key} must be non-negative")

    @property
    def continuous(self) -> bool:
        return self.kind in CONTINUOUS

    def selection_probability(self, topo: NetworkTopology) -> float:
        if self.selection is not None:
            return self.selection
        return 1.0 / (2 * topo.neuron_count)


def harmonic(**kw) -> MutationOperator:
    return MutationOperator(Kind.HARMONIC, **kw)


def unit(**kw) -> MutationOperator:
    return MutationOperator(Kind.UNIT, **kw)


@functools.lru_cache(maxsize=64)
def harmonic_cdf(r: int) -> np.ndarray:
    """Cumulative table of P(step = i) = 1/(i H_r), i = 1..r; last entry is 1."""
    if r < 1:
        raise ValueError("r must be >= 1")
    inv = 1.0 / np.arange(1, r + 1, dtype=float)
    cdf = np.cumsum(inv) / math.fsum(inv)
    cdf[-1] = 1.0
    cdf.setflags(write=False)
    return cdf


def harmonic_number(r: int) -> float:
    return math.fsum(1.0 / i for i in range(1, r + 1))


def harmonic_pmf(r: int) -> np.ndarray:
    inv = 1.0 / np.arange(1, r + 1, dtype=float)
    return inv / inv.sum()


def sample_magnitudes(op: MutationOperator, r: int, rng: np.random.Generator, size) -> np.ndarray:
    if op.kind is Kind.UNIT:
        return np.ones(size, dtype=np.int64)
    if op.kind is Kind.HARMONIC:
        u = rng.random(size)
        return np.searchsorted(harmonic_cdf(r), u, side="right").astype(np.int64) + 1
    raise ValueError(f"{op.kind.value} is a continuous operator")


def sample_step(op: MutationOperator, r: int, rng: np.random.Generator) -> int:
    """Signed integer step ``sigma * ell``."""
    sign = 1 if rng.random() < 0.5 else -1
    return sign * int(sample_magnitudes(op, r, rng, 1)[0])


def apply_steps(g: Sequence[int], steps: Mapping[int, int] | Sequence[int],
                topo: NetworkTopology, r: int) -> tuple[int, ...]:
    """Add per-component steps with wrap-around (angles mod r, biases mod r+1)."""
    kinds = topo.component_kinds()
    if not isinstance(steps, Mapping):
        steps = dict(enumerate(steps))
    out = list(g)
    for i, s in steps.items():
        out[i] = (out[i] + s) % component_modulus(kinds[i], r)
    return tuple(out)


def mutate(g: Sequence[int], op: MutationOperator, topo: NetworkTopology, r: int,
           rng: np.random.Generator) -> tuple[int, ...]:
    p = op.selection_probability(topo)
    mutable = [i for i, m in enumerate(topo.mutable_mask()) if m]
    while True:
        chosen = [i for i in mutable if rng.random() < p]
        if chosen or not op.resample_void:
            break
    steps = {i: sample_step(op, r, rng) for i in chosen}
    return apply_steps(g, steps, topo, r)


class MutationStream:
    """Batched equivalent of repeated :func:`mutate` calls for the main loop.

    Draws selection flags, signs and magnitudes a block at a time; the
    resulting offspring distribution is the same as :func:`mutate`'s.
    """

    def __init__(self, op: MutationOperator, topo: NetworkTopology, r: int,
                 rng: np.random.Generator, block: int = 4096):
        self.op, self.topo, self.r, self.rng, self.block = op, topo, r, rng, block
        self.p = op.selection_probability(topo)
        self.mutable = [i for i, m in enumerate(topo.mutable_mask()) if m]
        self.moduli = [component_modulus(k, r) for k in topo.component_kinds()]
        self._pos = block
        self._rows: list = []

    def _refill(self):
        m = len(self.mutable)
        shape = (self.block, m)
        sel = (self.rng.random(shape) < self.p).tolist()
        sign = np.where(self.rng.random(shape) < 0.5, -1, 1)
        steps = (sign * sample_magnitudes(self.op, self.r, self.rng, shape)).tolist()
        self._rows = list(zip(sel, steps))
        self._pos = 0

    def __call__(self, g: tuple[int, ...]) -> tuple[int, ...]:
        while True:
            if self._pos >= self.block:
                self._refill()
            sel, steps = self._rows[self._pos]
            self._pos += 1
            if self.op.resample_void and not any(sel):
                continue
            break
        out = list(g)
        for j, i in enumerate(self.mutable):
            if sel[j]:
                out[i] = (out[i] + steps[j]) % self.moduli[i]
        return tuple(out)


def default_continuous_params(kind: Kind, r: int) -> dict[str, float]:
    if kind is Kind.PARETO:
        return {"shape": 1.0, "scale": 2 * math.pi / r}
    if kind is Kind.EXPONENTIAL:
        return {"mean": 0.1}
    if kind is Kind.CAUCHY:
        return {"scale": 0.05}
    return {}


def continuous_magnitude(op: MutationOperator, rng: np.random.Generator, r: int = 120) -> float:
    params = {**default_continuous_params(op.kind, r), **op.params}
    if op.kind is Kind.PARETO:
        # Lomax draw, i.e. Pareto shifted to start at zero
        return params["scale"] * float(rng.pareto(params["shape"]))
    if op.kind is Kind.EXPONENTIAL:
        return float(rng.exponential(params["mean"])) if params["mean"] > 0 else 0.0
    if op.kind is Kind.CAUCHY:
        return params["scale"] * abs(float(rng.standard_cauchy()))
    raise ValueError(f"{op.kind.value} is not a continuous operator")


def reflect(x: float, lo: float, hi: float) -> float:
    """Fold ``x`` back into ``[lo, hi]`` by mirror reflection at the ends."""
    if lo <= x <= hi:
        return x
    w = hi - lo
    y = (x - lo) % (2 * w)
    if y > w:
        y = 2 * w - y
    return lo + y


def wrap_value(kind: str, x: float) -> float:
    if kind == ANGLE:
        return x % (2 * math.pi)
    if kind == POLAR:
        return reflect(x, 0.0, math.pi)
    return reflect(x, -1.0, 1.0)


def mutate_continuous(params: Sequence[float], op: MutationOperator, rng: np.random.Generator,
                      kinds: Sequence[str] | None = None, selection: float = 1.0,
                      r: int = 120, mutable: Sequence[bool] | None = None) -> tuple[float, ...]:
    """Perturb each selected component by an independent signed heavy-tailed draw.

    ``kinds`` defaults to alternating (angle, bias).  Angles wrap mod 2*pi,
    polar angles and biases reflect at their domain ends.
    """
    if not op.continuous:
        raise ValueError(f"{op.kind.value} is not a continuous operator")
    if kinds is None:
        kinds = [ANGLE if i % 2 == 0 else BIAS for i in range(len(params))]
    out = list(params)
    for i, x in enumerate(params):
        if mutable is not None and not mutable[i]:
            continue
        if selection < 1.0 and rng.random() >= selection:
            continue
        sign = 1.0 if rng.random() < 0.5 else -1.0
        out[i] = wrap_value(kinds[i], x + sign * continuous_magnitude(op, rng, r))
    return tuple(out)
