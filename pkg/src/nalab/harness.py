"""Seeded sweeps, summary tables, trajectory dumps and empirical drift."""
from __future__ import annotations

import csv
import dataclasses
import io
import math
import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .evolution import RunConfig, RunRecord, run
from .fitness import FitnessEvaluator

DEFAULT_R_VALUES = tuple(range(120, 1201, 120))
CSV_HEADER = ("r", "percent_opt", "mean", "sdev", "median", "trials")


class HarnessError(ValueError):
    pass


def trial_seed(master: int, trial: int) -> list[int]:
    """Seed material for one trial.

    The pair goes through numpy's SeedSequence, which hashes it into an
    independent stream.  The r value is deliberately left out, so trial i
    starts from the same entropy in every cell of a sweep.
    """
    return [int(master), int(trial)]


@dataclass(frozen=True)
class SweepSpec:
    template: RunConfig
    r_values: Sequence[int] = DEFAULT_R_VALUES
    trials: int = 100
    master_seed: int = 0
    include_timeouts: bool = False
    processes: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise HarnessError("trials must be >= 1")
        if not self.r_values:
            raise HarnessError("need at least one r value")
        for r in self.r_values:
            if r < 8:
                raise HarnessError(f"r={r} is below the minimum resolution 8")
            if r % 8:
                warnings.warn(f"r={r} is not divisible by 8; quarter optima fall off the grid",
                              stacklevel=3)


@dataclass(frozen=True)
class StatsRow:
    r: int
    percent_opt: float
    mean: float | None
    sdev: float | None
    median: float | None
    trials: int

    def __post_init__(self):
        if not 0 <= self.percent_opt <= 100:
            raise HarnessError("percent_opt outside [0, 100]")


def config_for(template: RunConfig, r: int, seed) -> RunConfig:
    return dataclasses.replace(template, r=r, seed=seed)


def _run_chunk(template: RunConfig, r: int, master: int, trials: Sequence[int]) -> list[RunRecord]:
    evaluator = None
    if not template.mutation.continuous:
        evaluator = FitnessEvaluator(template.problem, template.topology, r)
    return [run(config_for(template, r, trial_seed(master, i)), evaluator=evaluator)
            for i in trials]


def run_trials(template: RunConfig, r: int, trials: int, master_seed: int = 0,
               processes: int = 1) -> list[RunRecord]:
    """All trials of one cell, ordered by trial index whatever the scheduling."""
    indices = list(range(trials))
    if processes <= 1 or trials == 1:
        return _run_chunk(template, r, master_seed, indices)
    chunks = [indices[k::processes] for k in range(processes)]
    out: list[RunRecord | None] = [None] * trials
    with ProcessPoolExecutor(max_workers=processes) as pool:
        futures = [pool.submit(_run_chunk, template, r, master_seed, c) for c in chunks]
        for chunk, fut in zip(chunks, futures):
            for i, rec in zip(chunk, fut.result()):
                out[i] = rec
    return out  # type: ignore[return-value]


def summarize(records: Sequence[RunRecord], r: int, include_timeouts: bool = False) -> StatsRow:
    """Aggregate one cell.

    By default mean/sdev/median are over successful runs' hitting times;
    with ``include_timeouts`` failed runs enter at the step they stopped.
    """
    if not records:
        raise HarnessError("no records to summarize")
    wins = [rec.evaluations_used for rec in records if rec.success]
    values = [rec.evaluations_used for rec in records] if include_timeouts else wins
    pct = 100.0 * len(wins) / len(records)
    if not values:
        return StatsRow(r, pct, None, None, None, len(records))
    sdev = statistics.stdev(values) if len(values) > 1 else 0.0
    return StatsRow(r, pct, statistics.fmean(values), sdev, statistics.median(values),
                    len(records))


def sweep(spec: SweepSpec, *, keep_records: bool = False):
    """Run every cell of ``spec``; returns rows (and the records if asked)."""
    rows, all_records = [], {}
    for r in spec.r_values:
        recs = run_trials(spec.template, r, spec.trials, spec.master_seed, spec.processes)
        rows.append(summarize(recs, r, spec.include_timeouts))
        if keep_records:
            all_records[r] = recs
    return (rows, all_records) if keep_records else rows


# --- tables -------------------------------------------------------------------


def _num(x: float | None) -> str:
    return "" if x is None else str(int(round(x)))


def _row_fields(row: StatsRow) -> list[str]:
    return [str(row.r), f"{row.percent_opt:.1f}", _num(row.mean), _num(row.sdev),
            _num(row.median), str(row.trials)]


def format_table(rows: Sequence[StatsRow], fmt: str = "csv") -> str:
    if not rows:
        raise HarnessError("no rows to emit")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow(_row_fields(row))
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| r | %opt | mean | sdev | median | trials |",
                 "|---:|---:|---:|---:|---:|---:|"]
        for row in rows:
            lines.append("| " + " | ".join(_row_fields(row)) + " |")
        return "\n".join(lines) + "\n"
    raise HarnessError(f"unknown table format {fmt!r}")


def emit_table(rows: Sequence[StatsRow], fmt: str = "csv", path: str | Path | None = None) -> str:
    """Render rows and, if ``path`` is given, write them there."""
    text = format_table(rows, fmt)
    if path is not None:
        Path(path).write_text(text)
    return text


def _opt_float(s: str) -> float | None:
    s = s.strip()
    return None if s == "" else float(s)


def parse_table(text: str) -> list[StatsRow]:
    """Read back either table format (integers as printed)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise HarnessError("empty table")
    if lines[0].startswith("|"):
        body = [ln for ln in lines[2:]]
        records = [[c.strip() for c in ln.strip("|").split("|")] for ln in body]
    else:
        reader = csv.reader(lines)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise HarnessError(f"unexpected header {header}")
        records = list(reader)
    rows = []
    for rec in records:
        if len(rec) != len(CSV_HEADER):
            raise HarnessError(f"malformed row {rec}")
        rows.append(StatsRow(int(rec[0]), float(rec[1]), _opt_float(rec[2]), _opt_float(rec[3]),
                             _opt_float(rec[4]), int(rec[5])))
    return rows


# --- trajectory dumps -----------------------------------------------------------


def _fmt_fitness(f: float) -> str:
    return f"{f:.12g}"


def _fmt_gene(c) -> str:
    return str(c) if isinstance(c, (int, np.integer)) else repr(float(c))


def write_trajectory(out: TextIO, rec: RunRecord, header: str | None = None) -> None:
    """``step fitness genotype...`` per improvement, closed by ``# end``."""
    if rec.trajectory is None:
        raise HarnessError("run was not recorded with a trajectory")
    if header:
        out.write(f"# {header}\n")
    for t, f, g in rec.trajectory:
        out.write(" ".join([str(t), _fmt_fitness(f)] + [_fmt_gene(c) for c in g]) + "\n")
    out.write(f"# end {rec.evaluations_used} {rec.termination.value}\n")


@dataclass(frozen=True)
class FitnessTrace:
    """Piecewise-constant fitness over steps ``0..end``.

    ``steps[k]`` is when fitness became ``fitness[k]``; it stays there until
    the next event or the end of the run.
    """

    steps: tuple[int, ...]
    fitness: tuple[float, ...]
    end: int

    @classmethod
    def from_record(cls, rec: RunRecord) -> "FitnessTrace":
        if rec.trajectory is None:
            raise HarnessError("run was not recorded with a trajectory")
        return cls(tuple(t for t, _, _ in rec.trajectory),
                   tuple(f for _, f, _ in rec.trajectory), rec.evaluations_used)

    @classmethod
    def dense(cls, values: Sequence[float]) -> "FitnessTrace":
        """From the parent fitness after each step (index 0 is the start)."""
        if not len(values):
            raise HarnessError("empty fitness sequence")
        steps, fit = [0], [float(values[0])]
        for t in range(1, len(values)):
            if values[t] != fit[-1]:
                steps.append(t)
                fit.append(float(values[t]))
        return cls(tuple(steps), tuple(fit), len(values) - 1)


def read_trajectories(text: str) -> list[FitnessTrace]:
    traces, steps, fit = [], [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "end":
                if len(parts) < 2 or not steps:
                    raise HarnessError(f"bad end marker: {raw!r}")
                traces.append(FitnessTrace(tuple(steps), tuple(fit), int(parts[1])))
                steps, fit = [], []
            continue
        tok = line.split()
        if len(tok) < 2:
            raise HarnessError(f"bad trajectory line: {raw!r}")
        steps.append(int(tok[0]))
        fit.append(float(tok[1]))
    if steps:
        raise HarnessError("trajectory dump ends without an end marker")
    return traces


# --- eval log -----------------------------------------------------------------


class EvalLog:
    """Every evaluated offspring as ``step fitness genotype...``.

    An external optimizer can replay or extend it against the same fitness.
    """

    def __init__(self, out: TextIO):
        self.out = out

    def header(self, text: str) -> None:
        self.out.write(f"# {text}\n")

    def __call__(self, t: int, g, f: float) -> None:
        self.out.write(" ".join([str(t), _fmt_fitness(f)] + [_fmt_gene(c) for c in g]) + "\n")


# --- drift ----------------------------------------------------------------------


@dataclass(frozen=True)
class DriftRow:
    lo: float
    hi: float
    count: int
    mean: float
    stderr: float


def default_buckets(n: int = 8, smallest: float = 1e-3) -> list[float]:
    """Geometric bucket edges for g = 1 - f on (0, 1]."""
    return [0.0] + list(np.geomspace(smallest, 1.0, n)[:-1]) + [1.0 + 1e-12]


def estimate_drift(trajectories: Iterable[FitnessTrace | RunRecord],
                   buckets: Sequence[float] | None = None) -> list[DriftRow]:
    """Mean one-step decrease of g = 1 - f, divided by g, per bucket of g.

    Every step counts, including the ones that changed nothing; steps taken
    at g = 0 are skipped since the ratio is undefined there.  Populated
    buckets only.
    """
    traces = [t if isinstance(t, FitnessTrace) else FitnessTrace.from_record(t)
              for t in trajectories]
    if not traces:
        raise HarnessError("no trajectories")
    edges = list(buckets) if buckets is not None else default_buckets()
    if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise HarnessError("bucket edges must be increasing")
    k = len(edges) - 1
    n = np.zeros(k)
    s1 = np.zeros(k)
    s2 = np.zeros(k)
    for tr in traces:
        times = list(tr.steps) + [tr.end]
        for j, f in enumerate(tr.fitness):
            g = 1.0 - f
            span = times[j + 1] - times[j]
            if g <= 0 or span <= 0:
                continue
            b = int(np.searchsorted(edges, g, side="right")) - 1
            if not 0 <= b < k:
                continue
            n[b] += span
            if j + 1 < len(tr.fitness):
                d = (g - (1.0 - tr.fitness[j + 1])) / g
                s1[b] += d
                s2[b] += d * d
    rows = []
    for b in range(k):
        if n[b] == 0:
            continue
        mean = s1[b] / n[b]
        var = max(0.0, s2[b] / n[b] - mean * mean)
        se = math.sqrt(var / (n[b] - 1)) if n[b] > 1 else 0.0
        rows.append(DriftRow(edges[b], edges[b + 1], int(n[b]), mean, se))
    return rows


def format_drift(rows: Sequence[DriftRow]) -> str:
    lines = ["g_lo,g_hi,count,drift,stderr"]
    for row in rows:
        lines.append(f"{row.lo:.6g},{row.hi:.6g},{row.count},{row.mean:.6g},{row.stderr:.3g}")
    return "\n".join(lines) + "\n"
