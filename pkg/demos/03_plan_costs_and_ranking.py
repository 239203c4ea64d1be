"""Price every candidate plan and pick the cheapest.

Uses the reference traffic mix (39 calls/month: 23 to the home network,
7 to other mobiles, 9 to landlines; 33 on workdays) with exponential
durations of mean 1/0.41 minutes.

Run from the repository root:  python3 demos/03_plan_costs_and_ranking.py
"""

from pathlib import Path

from tariffopt import (
    Exponential,
    TrafficCell,
    TrafficProfile,
    expected_call_cost,
    full_costs,
    load_catalog,
    rank,
)

DATA = Path(__file__).resolve().parents[1] / "data"

catalog = load_catalog((DATA / "mts_catalog.json").read_bytes())

model = Exponential(mu=0.41)
profile = TrafficProfile(
    cells=(
        TrafficCell("same-network", "workday", 19, model),
        TrafficCell("same-network", "weekend", 4, model),
        TrafficCell("other-mobile", "workday", 6, model),
        TrafficCell("other-mobile", "weekend", 1, model),
        TrafficCell("landline", "workday", 8, model),
        TrafficCell("landline", "weekend", 1, model),
    ),
    observation_months=6.0,
)

# One-call averages first: the expected price of a single random call under
# each subgroup's schedule. Free minute bands pull these well below the
# headline per-minute rates.
plan1 = catalog.plan(1)
for rule, payoff in plan1.subgroups:
    s = expected_call_cost(payoff, model)
    print(f"plan 1 {rule.subgroup_name!r}: expected one-call cost {s:.4f} rubles")
print()

# Full monthly costs: traffic-weighted one-call averages plus the fees of
# adopting the plan (subscription; switch fee when leaving the current plan;
# SIM purchase when the provider is new).
breakdowns = full_costs(catalog, catalog.context, profile)
print(f"{'plan':<6}{'variable':>10}{'fixed':>10}{'full':>10}")
for b in breakdowns:
    print(f"{b.plan_id:<6}{b.variable:>10.2f}{b.fixed:>10.2f}{b.full:>10.2f}")
print()

ranking = rank(breakdowns)
print("ascending full-cost ranking:", ranking.order)
if ranking.optimal_id == catalog.context.current_plan_id:
    print(f"cheapest: plan {ranking.optimal_id} -> stay put")
else:
    print(f"cheapest: plan {ranking.optimal_id} -> switch")
