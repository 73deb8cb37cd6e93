"""The (1+1) neuroevolution loop, success detection and the exhaustive oracle."""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fitness import FitnessEvaluator, Target, fitness_values
from .mutation import MutationOperator, MutationStream, harmonic, mutate_continuous
from .network import (
    ANGLE,
    POLAR,
    BiasMode,
    Genotype,
    NetworkTopology,
    component_modulus,
    component_value,
)
from .problems import LabeledPointSet, Problem


class ConfigError(ValueError):
    pass


class Termination(enum.Enum):
    SUCCESS = "success"
    STAGNATION = "stagnation"
    MAX_STEPS = "max-steps"


class SuccessMode(enum.Enum):
    AUTO = "auto"
    PROXIMITY = "proximity"
    THRESHOLD = "threshold"


# arc measures carry rounding noise; a fitness this close to a threshold meets it
FITNESS_TOL = 1e-12


def default_cutoff(r: int, factor: float = 100.0) -> int:
    return math.ceil(factor * r * math.log(r))


@dataclass(frozen=True)
class RunConfig:
    problem: Target
    topology: NetworkTopology = NetworkTopology()
    r: int = 120
    mutation: MutationOperator = field(default_factory=harmonic)
    seed: int | Sequence[int] = 0
    max_steps: int | None = None
    stagnation_cutoff: int | None = None
    cutoff_factor: float = 100.0
    success_mode: SuccessMode = SuccessMode.AUTO
    threshold: float | None = None

    def __post_init__(self):
        if self.r < 8:
            raise ConfigError("resolution r must be >= 8")
        if self.stagnation_cutoff is not None and self.stagnation_cutoff < 1:
            raise ConfigError("stagnation cutoff must be >= 1")
        if isinstance(self.problem, LabeledPointSet) and self.topology.input_dim != self.problem.dim:
            raise ConfigError(
                f"problem {self.problem.name} needs input_dim={self.problem.dim}"
            )

    @property
    def cutoff(self) -> int:
        if self.stagnation_cutoff is not None:
            return self.stagnation_cutoff
        return default_cutoff(self.r, self.cutoff_factor)


@dataclass
class RunRecord:
    evaluations_used: int
    success: bool
    termination: Termination
    final_fitness: float
    final_genotype: tuple
    hitting_time: int | None = None
    initial_genotype: tuple = ()
    trajectory: list[tuple[int, float, tuple]] | None = None

    def as_dict(self) -> dict:
        return {
            "evaluations_used": self.evaluations_used,
            "success": self.success,
            "termination": self.termination.value,
            "hitting_time": self.hitting_time,
            "final_fitness": self.final_fitness,
            "final_genotype": list(self.final_genotype),
        }


# --- success ------------------------------------------------------------------


def _wrapped(d: float, mod: float) -> float:
    d = abs(d) % mod
    return min(d, mod - d)


def _resolved_mode(cfg: RunConfig) -> SuccessMode:
    if cfg.success_mode is not SuccessMode.AUTO:
        return cfg.success_mode
    if cfg.threshold is not None:
        return SuccessMode.THRESHOLD
    topo = cfg.topology
    if not topo.evolved and topo.input_dim == 2 and cfg.problem.optima_for(topo.hidden_count):
        return SuccessMode.PROXIMITY
    return SuccessMode.THRESHOLD


def success_threshold(cfg: RunConfig) -> float:
    if cfg.threshold is not None:
        return cfg.threshold
    best = cfg.problem.best_fitness_for(cfg.topology.hidden_count)
    if best is None:
        raise ConfigError(f"no known best fitness for {cfg.problem.name}; give a threshold")
    if isinstance(cfg.problem, LabeledPointSet):
        return best
    return best - 1.0 / cfg.r


def _neuron_close(angle_units: float, bias_units: float, phi: float, b: float, r: int,
                  check_bias: bool) -> bool:
    if _wrapped(phi - angle_units, r) >= 1:
        return False
    return not check_bias or _wrapped(b - bias_units, r + 1) < 1


def _near(pairs: Sequence[tuple[float, float]], problem: Problem, topo: NetworkTopology,
          r: int) -> bool:
    optima = problem.optima_for(topo.hidden_count)
    if not optima:
        raise ConfigError(f"{problem.name} lists no optima for N={topo.hidden_count}")
    check_bias = topo.bias_mode is BiasMode.VARIABLE
    for opt in optima:
        targets = [(a * r / (2 * math.pi), (bias + 1) * r / 2) for a, bias in opt.neurons]
        for perm in itertools.permutations(targets):
            if all(_neuron_close(ta, tb, phi, b, r, check_bias)
                   for (phi, b), (ta, tb) in zip(pairs, perm)):
                return True
    return False


def near_optimum(g: Sequence[int], problem: Problem, topo: NetworkTopology, r: int) -> bool:
    """Every neuron within distance < 1 (with wrap) of one listed optimum.

    Distances are in grid units, minimised over the listed optima and over
    assignments of neurons to optimum entries.
    """
    pairs = [(g[2 * i], g[2 * i + 1]) for i in range(topo.hidden_count)]
    return _near(pairs, problem, topo, r)


def is_success(g: Sequence[int], cfg: RunConfig, evaluate=None) -> bool:
    mode = _resolved_mode(cfg)
    if mode is SuccessMode.PROXIMITY:
        return near_optimum(g, cfg.problem, cfg.topology, cfg.r)
    if evaluate is None:
        evaluate = FitnessEvaluator(cfg.problem, cfg.topology, cfg.r)
    return evaluate(tuple(g)) >= success_threshold(cfg) - FITNESS_TOL


def _continuous_success(values: Sequence[float], f: float, cfg: RunConfig) -> bool:
    if _resolved_mode(cfg) is SuccessMode.THRESHOLD:
        return f >= success_threshold(cfg) - FITNESS_TOL
    r = cfg.r
    # compare in grid units so the tolerance matches the discrete search
    pairs = [(values[2 * i] * r / (2 * math.pi), (values[2 * i + 1] + 1) * r / 2)
             for i in range(cfg.topology.hidden_count)]
    return _near(pairs, cfg.problem, cfg.topology, r)


# --- initialisation -------------------------------------------------------------


def random_genotype(topo: NetworkTopology, r: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform start point; fixed-zero biases sit at ``r // 2``."""
    out = []
    for kind, mutable in zip(topo.component_kinds(), topo.mutable_mask()):
        out.append(int(rng.integers(component_modulus(kind, r))) if mutable else r // 2)
    return tuple(out)


def _random_values(topo: NetworkTopology, rng: np.random.Generator) -> list[float]:
    out = []
    for kind, mutable in zip(topo.component_kinds(), topo.mutable_mask()):
        if not mutable:
            out.append(0.0)
        elif kind == ANGLE:
            out.append(float(rng.uniform(0, 2 * math.pi)))
        elif kind == POLAR:
            out.append(float(rng.uniform(0, math.pi)))
        else:
            out.append(float(rng.uniform(-1, 1)))
    return out


# --- main loop ------------------------------------------------------------------


def make_rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def run(cfg: RunConfig, *, record_trajectory: bool = False, initial: Sequence[int] | None = None,
        evaluator: FitnessEvaluator | None = None,
        on_evaluate: Callable[[int, tuple, float], None] | None = None,
        on_accept: Callable[[int, tuple, float, tuple, float], None] | None = None) -> RunRecord:
    """One trial of the (1+1) NA.

    Each iteration mutates, evaluates once and keeps the offspring if its
    fitness is not worse.  Stops on success (checked after every accepted
    step), after ``cfg.cutoff`` consecutive steps without strict improvement,
    or at ``cfg.max_steps``.
    """
    if cfg.mutation.continuous:
        return _run_continuous(cfg, record_trajectory=record_trajectory, initial=initial,
                               on_evaluate=on_evaluate, on_accept=on_accept)
    rng = make_rng(cfg.seed)
    topo, r = cfg.topology, cfg.r
    evaluate = evaluator or FitnessEvaluator(cfg.problem, topo, r)
    mode = _resolved_mode(cfg)
    if mode is SuccessMode.PROXIMITY:
        def success(g, f):
            return near_optimum(g, cfg.problem, topo, r)
    else:
        theta = success_threshold(cfg)

        def success(g, f):
            return f >= theta - FITNESS_TOL

    x = tuple(initial) if initial is not None else random_genotype(topo, r, rng)
    Genotype(x).validate(topo, r)
    fx = evaluate(x)
    traj = [(0, fx, x)] if record_trajectory else None
    step = MutationStream(cfg.mutation, topo, r, rng)
    cutoff = cfg.cutoff
    max_steps = cfg.max_steps
    t = 0
    last_improvement = 0
    start = x
    if success(x, fx):
        return RunRecord(0, True, Termination.SUCCESS, fx, x, 0, start, traj)
    while True:
        if max_steps is not None and t >= max_steps:
            term = Termination.MAX_STEPS
            break
        y = step(x)
        t += 1
        fy = evaluate(y)
        if on_evaluate is not None:
            on_evaluate(t, y, fy)
        if fy >= fx:
            if on_accept is not None:
                on_accept(t, x, fx, y, fy)
            if fy > fx:
                last_improvement = t
                if traj is not None:
                    traj.append((t, fy, y))
            moved = y != x
            x, fx = y, fy
            if moved and success(x, fx):
                return RunRecord(t, True, Termination.SUCCESS, fx, x, t, start, traj)
        if t - last_improvement >= cutoff:
            term = Termination.STAGNATION
            break
    return RunRecord(t, False, term, fx, x, None, start, traj)


def _run_continuous(cfg: RunConfig, *, record_trajectory, initial, on_evaluate, on_accept) -> RunRecord:
    rng = make_rng(cfg.seed)
    topo = cfg.topology
    kinds = topo.component_kinds()
    mask = topo.mutable_mask()
    p = cfg.mutation.selection_probability(topo)
    x = tuple(initial) if initial is not None else tuple(_random_values(topo, rng))
    fx = fitness_values(x, topo, cfg.problem)
    traj = [(0, fx, x)] if record_trajectory else None
    cutoff = cfg.cutoff
    # real-valued search space is infinite; cap it unless told otherwise
    max_steps = cfg.max_steps if cfg.max_steps is not None else 20 * cutoff
    start = x
    if _continuous_success(x, fx, cfg):
        return RunRecord(0, True, Termination.SUCCESS, fx, x, 0, start, traj)
    t = last_improvement = 0
    while True:
        if t >= max_steps:
            term = Termination.MAX_STEPS
            break
        while True:
            y = mutate_continuous(x, cfg.mutation, rng, kinds, selection=p, r=cfg.r, mutable=mask)
            if not cfg.mutation.resample_void or y != x:
                break
        t += 1
        fy = fitness_values(y, topo, cfg.problem)
        if on_evaluate is not None:
            on_evaluate(t, y, fy)
        if fy >= fx:
            if on_accept is not None:
                on_accept(t, x, fx, y, fy)
            if fy > fx:
                last_improvement = t
                if traj is not None:
                    traj.append((t, fy, y))
            x, fx = y, fy
            if _continuous_success(x, fx, cfg):
                return RunRecord(t, True, Termination.SUCCESS, fx, x, t, start, traj)
        if t - last_improvement >= cutoff:
            term = Termination.STAGNATION
            break
    return RunRecord(t, False, term, fx, x, None, start, traj)


# --- exhaustive oracle ----------------------------------------------------------

MAX_STATES = 10**9


def state_count(topo: NetworkTopology, r: int) -> int:
    n = 1
    for kind, mutable in zip(topo.component_kinds(), topo.mutable_mask()):
        if mutable:
            n *= component_modulus(kind, r)
    return n


def exhaustive_best(problem: Target, topo: NetworkTopology, r: int,
                    tol: float = 1e-12) -> tuple[float, list[tuple[int, ...]]]:
    """Best fitness over the whole grid and every genotype attaining it."""
    n = state_count(topo, r)
    if n > MAX_STATES:
        raise ConfigError(f"{n} states exceed the enumeration limit {MAX_STATES}")
    evaluate = FitnessEvaluator(problem, topo, r, memo_limit=0)
    axes = [range(component_modulus(k, r)) if m else (r // 2,)
            for k, m in zip(topo.component_kinds(), topo.mutable_mask())]
    best = -1.0
    argmax: list[tuple[int, ...]] = []
    for g in itertools.product(*axes):
        f = evaluate(g)
        if f > best + tol:
            best, argmax = f, [g]
        elif f >= best - tol:
            argmax.append(g)
    return best, argmax


def genotype_values(g: Sequence[int], topo: NetworkTopology, r: int) -> list[float]:
    return [component_value(k, c, r) for k, c in zip(topo.component_kinds(), g)]

