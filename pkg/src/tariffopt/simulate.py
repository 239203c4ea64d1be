"""Monte-Carlo billing oracle.

Generates random months of traffic (exponential inter-arrival gaps, so call
counts are Poisson; exponential durations) and pushes every generated call
through each plan's price schedule. Sample means validate the analytic
engine; sample percentiles describe the month-to-month cost spread.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .catalog import Catalog, PayoffFunction
from .cost import BILLING_MODES, LOOKUP
from .traffic import ClassifiedCall, Exponential, TrafficProfile


class SimulationError(ValueError):
    """Raised for invalid simulation configurations."""


@dataclass(frozen=True)
class SimCell:
    """Traffic generator for one call class: arrival and duration rates."""

    destination_class: str
    day_class: str
    calls_per_month: float
    duration_rate: float  # mu, 1/minutes

    def __post_init__(self):
        if self.calls_per_month < 0:
            raise SimulationError(f"negative call rate {self.calls_per_month}")
        if not self.duration_rate > 0:
            raise SimulationError(f"duration rate must be positive, got {self.duration_rate}")


@dataclass(frozen=True)
class SimConfig:
    seed: int
    runs: int
    cells: tuple[SimCell, ...]
    billing_mode: str = LOOKUP

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        if not 0 <= self.seed < 2**64:
            raise SimulationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.runs < 1:
            raise SimulationError(f"runs must be >= 1, got {self.runs}")
        if self.billing_mode not in BILLING_MODES:
            raise SimulationError(f"unknown billing mode {self.billing_mode!r}")

    @classmethod
    def from_profile(
        cls,
        profile: TrafficProfile,
        seed: int,
        runs: int,
        billing_mode: str = LOOKUP,
    ) -> "SimConfig":
        """Simulation config matching an exponential-duration traffic profile."""
        cells = []
        for cell in profile.cells:
            if cell.rate == 0:
                continue
            if not isinstance(cell.durations, Exponential):
                raise SimulationError(
                    f"cell ({cell.destination_class}, {cell.day_class}) has no "
                    f"exponential duration model to simulate from"
                )
            cells.append(
                SimCell(
                    destination_class=cell.destination_class,
                    day_class=cell.day_class,
                    calls_per_month=cell.rate,
                    duration_rate=cell.durations.mu,
                )
            )
        return cls(seed=seed, runs=runs, cells=tuple(cells), billing_mode=billing_mode)


@dataclass(frozen=True)
class PlanSample:
    """Monthly variable-cost sample statistics for one plan."""

    plan_id: int
    mean: float
    stddev: float
    stderr: float
    percentiles: tuple[float, float, float]  # 5th, 50th, 95th


@dataclass(frozen=True)
class SimResult:
    seed: int
    runs: int
    billing_mode: str
    plans: tuple[PlanSample, ...]

    def to_json(self) -> str:
        doc = {
            "seed": self.seed,
            "runs": self.runs,
            "billing_mode": self.billing_mode,
            "plans": [
                {
                    "plan_id": p.plan_id,
                    "mean": p.mean,
                    "stddev": p.stddev,
                    "stderr": p.stderr,
                    "percentiles": {
                        "5": p.percentiles[0],
                        "50": p.percentiles[1],
                        "95": p.percentiles[2],
                    },
                }
                for p in self.plans
            ],
        }
        return json.dumps(doc, indent=2)


def substream(seed: int, run_index: int, cell_index: int) -> np.random.Generator:
    """Independent RNG stream for one (run, cell) pair.

    Deriving each stream from the master seed keeps results identical no
    matter how runs are scheduled or parallelized.
    """
    return np.random.default_rng((seed, run_index, cell_index))


def generate_month(
    config: SimConfig, cell_index: int, rng: np.random.Generator
) -> np.ndarray:
    """Durations (real minutes) of one simulated month of a cell's calls.

    Exponential inter-arrival gaps are accumulated until the month is full,
    so the call count is Poisson with the cell's monthly rate.
    """
    cell = config.cells[cell_index]
    lam = cell.calls_per_month
    if lam == 0:
        return np.empty(0)
    block = max(8, int(lam + 9.0 * math.sqrt(lam) + 8))
    gaps = rng.exponential(1.0 / lam, block)
    arrivals = np.cumsum(gaps)
    while arrivals[-1] < 1.0:
        gaps = rng.exponential(1.0 / lam, block)
        arrivals = np.concatenate([arrivals, arrivals[-1] + np.cumsum(gaps)])
    count = int(np.searchsorted(arrivals, 1.0, side="left"))
    return rng.exponential(1.0 / cell.duration_rate, count)


def _bill_minutes(payoff: PayoffFunction, minutes: np.ndarray, mode: str) -> np.ndarray:
    if mode == LOOKUP:
        return payoff.rates(minutes)
    return payoff.cumulative(minutes)


def bill_call(payoff: PayoffFunction, duration_minutes: float, mode: str = LOOKUP) -> float:
    """Price one call: look up (or accumulate up to) its final billed minute."""
    if mode not in BILLING_MODES:
        raise ValueError(f"unknown billing mode {mode!r}")
    if not duration_minutes > 0:
        raise ValueError(f"duration must be positive, got {duration_minutes}")
    minute = max(1, math.ceil(duration_minutes))
    return float(_bill_minutes(payoff, np.array([minute]), mode)[0])


def run(config: SimConfig, catalog: Catalog) -> SimResult:
    """Simulate monthly traffic and bill it against every plan in the catalog."""
    runs = config.runs
    # generate every run of every cell once; bill the same calls per plan
    cell_minutes: list[np.ndarray] = []
    cell_run_ids: list[np.ndarray] = []
    for ci in range(len(config.cells)):
        parts = []
        counts = np.zeros(runs, dtype=np.int64)
        for r in range(runs):
            durations = generate_month(config, ci, substream(config.seed, r, ci))
            counts[r] = durations.size
            if durations.size:
                parts.append(durations)
        durations = np.concatenate(parts) if parts else np.empty(0)
        cell_minutes.append(np.maximum(1, np.ceil(durations)).astype(np.int64))
        cell_run_ids.append(np.repeat(np.arange(runs), counts))

    samples = []
    for plan in catalog.plans:
        totals = np.zeros(runs)
        for ci, cell in enumerate(config.cells):
            if cell_minutes[ci].size == 0:
                continue
            j = plan.subgroup_index(cell.destination_class, cell.day_class)
            costs = _bill_minutes(plan.subgroups[j][1], cell_minutes[ci], config.billing_mode)
            totals += np.bincount(cell_run_ids[ci], weights=costs, minlength=runs)
        stddev = float(totals.std(ddof=1)) if runs > 1 else 0.0
        p5, p50, p95 = np.percentile(totals, [5, 50, 95])
        samples.append(
            PlanSample(
                plan_id=plan.id,
                mean=float(totals.mean()),
                stddev=stddev,
                stderr=stddev / math.sqrt(runs),
                percentiles=(float(p5), float(p50), float(p95)),
            )
        )
    return SimResult(
        seed=config.seed,
        runs=config.runs,
        billing_mode=config.billing_mode,
        plans=tuple(samples),
    )


def replay_trace(
    catalog: Catalog,
    calls: Sequence[ClassifiedCall],
    months: float,
    mode: str = LOOKUP,
) -> dict[int, float]:
    """Bill the historical call trace through every plan: rubles/month per plan.

    A model-free cross-check of both the analytic engine and the synthetic
    generator.
    """
    if months <= 0:
        raise SimulationError(f"months must be positive, got {months}")
    out = {}
    for plan in catalog.plans:
        total = 0.0
        for call in calls:
            j = plan.subgroup_index(call.destination_class, call.day_class)
            payoff = plan.subgroups[j][1]
            total += float(_bill_minutes(payoff, np.array([call.minute_index]), mode)[0])
        out[plan.id] = total / months
    return out
