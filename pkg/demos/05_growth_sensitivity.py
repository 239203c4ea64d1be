"""How long does the chosen plan stay optimal as traffic grows?

Scales the whole traffic volume by k (subgroup proportions fixed), re-solves
the selection at every k, locates the switch points, and fits polynomial
models to the with-switching cost curve. The optimal curve is the pointwise
minimum of affine plan costs, so it is concave and kinks exactly where the
best plan changes.

Run from the repository root:  python3 demos/05_growth_sensitivity.py
"""

from pathlib import Path

from tariffopt import (
    Exponential,
    TrafficCell,
    TrafficProfile,
    fit_report,
    k_grid,
    load_catalog,
    sweep,
    switch_points,
)
from tariffopt.sensitivity import sweep_csv

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

points = sweep(catalog, catalog.context, profile, k_grid(0.5, 10.0, 0.5))

print(f"{'k':>5}{'best':>6}{'best cost':>11}{'stay cost':>11}")
for p in points[::2]:
    print(f"{p.k:>5.1f}{p.optimal_plan_id:>6}{p.optimal_full_cost:>11.2f}{p.stay_cost:>11.2f}")
print()

for iv in switch_points(points):
    print(f"plan {iv.plan_id} is optimal for k in [{iv.k_start:.3f}, {iv.k_end:.3f}]")
print()

# Regression models of cost vs growth: each added term earns its keep in the
# determination coefficient, because the target is piecewise affine, not a
# single line.
fits = fit_report(points)
for name, fit in fits.items():
    coefs = ", ".join(f"{c:.3f}" for c in fit.coefficients)
    print(f"{name:<24} coefficients ({coefs})  R^2 = {fit.r_squared:.4f}")

out = Path(__file__).resolve().parent / "sweep.csv"
out.write_text(sweep_csv(points))
print(f"\nplottable sweep written to {out}")
