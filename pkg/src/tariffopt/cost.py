"""Expected-cost engine: one-call averages, monthly variable and fixed
expenses, full costs, and plan ranking.

The central quantity is the expected cost of one random call under a
piecewise-constant price schedule v and a duration distribution f:
``s = sum_t v(t) f(t)`` over billing minutes t. Monthly variable expenses
weight these averages by each subgroup's call rate; adding the fixed fees
of adopting a plan gives the full cost that ranks the candidates.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .catalog import BillingPlan, Catalog, PayoffFunction, SubscriberContext
from .traffic import DurationModel, Empirical, Exponential, TrafficProfile

LOOKUP = "lookup"
CUMULATIVE = "cumulative"
BILLING_MODES = (LOOKUP, CUMULATIVE)


def _exponential_lookup(payoff: PayoffFunction, mu: float) -> float:
    # sum over segments of rate * P(billing minute lands in the segment),
    # evaluated in closed form with no truncation error
    total = 0.0
    for seg in payoff.segments:
        start = math.exp(-mu * (seg.from_minute - 1))
        mass = start if seg.is_open else start - math.exp(-mu * seg.to_minute)
        total += float(seg.rate) * mass
    return total


def _exponential_cumulative(payoff: PayoffFunction, mu: float) -> float:
    # E[sum_{m<=t} v(m)] = sum_m v(m) P(t >= m); geometric series per segment
    decay = math.exp(-mu)
    total = 0.0
    for seg in payoff.segments:
        start = math.exp(-mu * (seg.from_minute - 1))
        if seg.is_open:
            weight = start / (1.0 - decay)
        else:
            length = seg.to_minute - seg.from_minute + 1
            weight = start * (1.0 - decay**length) / (1.0 - decay)
        total += float(seg.rate) * weight
    return total


def expected_call_cost(
    payoff: PayoffFunction, durations: DurationModel, mode: str = LOOKUP
) -> float:
    """Expected cost of one random call: E[v(t)] over billing minutes t.

    Empirical models are summed over their bins; exponential models use the
    closed form, which is exactly the discretized sum taken to infinity.
    The non-default `cumulative` mode prices every elapsed minute instead
    of looking up only the final one.
    """
    if mode not in BILLING_MODES:
        raise ValueError(f"unknown billing mode {mode!r}")
    if isinstance(durations, Exponential):
        if mode == LOOKUP:
            return _exponential_lookup(payoff, durations.mu)
        return _exponential_cumulative(payoff, durations.mu)
    minutes = np.arange(1, durations.truncation + 1)
    per_minute = payoff.rates(minutes) if mode == LOOKUP else payoff.cumulative(minutes)
    return float(per_minute @ durations.mass_array())


@dataclass(frozen=True)
class SubgroupCost:
    """One subgroup's share of a plan's variable expenses."""

    name: str
    calls_per_month: float
    one_call_cost: float | None  # None when the subgroup sees no traffic
    monthly_cost: float


@dataclass(frozen=True)
class CostBreakdown:
    """Everything that prices one candidate plan for the coming month."""

    plan_id: int
    plan_name: str
    is_current: bool
    subgroups: tuple[SubgroupCost, ...]
    variable: float
    fixed: float

    @property
    def full(self) -> float:
        return self.variable + self.fixed


@dataclass(frozen=True)
class Ranking:
    order: tuple[int, ...]
    optimal_id: int


def variable_cost(
    plan: BillingPlan, profile: TrafficProfile, mode: str = LOOKUP
) -> tuple[float, tuple[SubgroupCost, ...]]:
    """Expected monthly traffic cost of a plan: sum of rate * one-call cost.

    Each traffic cell is priced under the subgroup its calls route to, so a
    subgroup aggregating several cells reports the rate-weighted average
    one-call cost.
    """
    n = len(plan.subgroups)
    rates = [0.0] * n
    costs = [0.0] * n
    for cell in profile.cells:
        if cell.rate == 0:
            continue
        j = plan.subgroup_index(cell.destination_class, cell.day_class)
        _, payoff = plan.subgroups[j]
        rates[j] += cell.rate
        costs[j] += cell.rate * expected_call_cost(payoff, cell.durations, mode)
    breakdown = tuple(
        SubgroupCost(
            name=rule.subgroup_name,
            calls_per_month=rates[j],
            one_call_cost=costs[j] / rates[j] if rates[j] > 0 else None,
            monthly_cost=costs[j],
        )
        for j, (rule, _) in enumerate(plan.subgroups)
    )
    return sum(costs), breakdown


def fixed_cost(
    target: BillingPlan, context: SubscriberContext, catalog: Catalog
) -> float:
    """Fees of adopting `target` for a month, given what is already owned.

    The switch fee applies only when leaving the current plan; the purchase
    cost only when no SIM of the target's provider is on hand.
    """
    catalog.plan(context.current_plan_id)  # context must be valid
    fee = target.fixed.subscription_fee
    if target.id != context.current_plan_id:
        fee += target.fixed.switch_fee
    if target.provider not in context.owned_sim_providers:
        fee += target.fixed.purchase_cost
    return float(fee)


def full_costs(
    catalog: Catalog,
    context: SubscriberContext,
    profile: TrafficProfile,
    mode: str = LOOKUP,
) -> list[CostBreakdown]:
    """Cost breakdown per candidate plan (active plans plus the current one)."""
    breakdowns = []
    for plan in catalog.plans:
        if not plan.active and plan.id != context.current_plan_id:
            continue
        variable, subgroups = variable_cost(plan, profile, mode)
        breakdowns.append(
            CostBreakdown(
                plan_id=plan.id,
                plan_name=plan.name,
                is_current=plan.id == context.current_plan_id,
                subgroups=subgroups,
                variable=variable,
                fixed=fixed_cost(plan, context, catalog),
            )
        )
    return breakdowns


def rank(breakdowns: list[CostBreakdown]) -> Ranking:
    """Order candidates by ascending full cost.

    Ties prefer the current plan (no point paying a switch fee for nothing),
    then the lowest plan id.
    """
    if not breakdowns:
        raise ValueError("nothing to rank")
    ordered = sorted(
        breakdowns, key=lambda b: (b.full, not b.is_current, b.plan_id)
    )
    return Ranking(
        order=tuple(b.plan_id for b in ordered), optimal_id=ordered[0].plan_id
    )


# --------------------------------------------------------------------------
# report rendering


def _subgroup_columns(breakdowns: list[CostBreakdown]) -> list[str]:
    columns: list[str] = []
    for b in breakdowns:
        for sub in b.subgroups:
            if sub.name not in columns:
                columns.append(sub.name)
    return columns


def report_json(breakdowns: list[CostBreakdown], ranking: Ranking) -> str:
    doc = {
        "plans": [
            {
                "plan_id": b.plan_id,
                "plan_name": b.plan_name,
                "is_current": b.is_current,
                "subgroups": [
                    {
                        "name": s.name,
                        "calls_per_month": s.calls_per_month,
                        "one_call_cost": s.one_call_cost,
                        "monthly_cost": s.monthly_cost,
                    }
                    for s in b.subgroups
                ],
                "variable": b.variable,
                "fixed": b.fixed,
                "full": b.full,
                "rank": ranking.order.index(b.plan_id) + 1,
            }
            for b in breakdowns
        ],
        "ranking": {"order": list(ranking.order), "optimal_id": ranking.optimal_id},
    }
    return json.dumps(doc, indent=2)


def report_csv(breakdowns: list[CostBreakdown], ranking: Ranking) -> str:
    """Flat table: one row per plan, one column per subgroup's one-call cost."""
    columns = _subgroup_columns(breakdowns)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["plan_id", "plan_name"] + columns + ["variable", "fixed", "full", "rank"])
    for b in breakdowns:
        by_name = {s.name: s for s in b.subgroups}
        cells = []
        for name in columns:
            sub = by_name.get(name)
            if sub is None or sub.one_call_cost is None:
                cells.append("")
            else:
                cells.append(repr(sub.one_call_cost))
        writer.writerow(
            [b.plan_id, b.plan_name]
            + cells
            + [repr(b.variable), repr(b.fixed), repr(b.full), ranking.order.index(b.plan_id) + 1]
        )
    return out.getvalue()
