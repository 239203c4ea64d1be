"""Traffic-growth sensitivity: cost sweeps over a traffic multiplier,
switch-point detection, and polynomial regression of the cost curves.

Every plan's full cost is affine in the traffic multiplier k (fixed fees do
not scale), so the optimal-cost curve is a concave piecewise-affine minimum
whose kinks mark where the best plan changes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .catalog import Catalog, SubscriberContext
from .cost import LOOKUP, full_costs, rank
from .traffic import TrafficProfile


@dataclass(frozen=True)
class SweepPoint:
    """Costs of all candidate plans at one traffic multiplier."""

    k: float
    optimal_plan_id: int
    optimal_full_cost: float
    stay_cost: float  # full cost of keeping the current plan
    plan_costs: dict[int, float]

    def __post_init__(self):
        if self.optimal_full_cost > self.stay_cost + 1e-9:
            raise ValueError(
                f"optimal cost {self.optimal_full_cost} above stay cost "
                f"{self.stay_cost} at k={self.k}"
            )


@dataclass(frozen=True)
class SwitchInterval:
    """Maximal k-range over which one plan stays optimal."""

    k_start: float
    k_end: float
    plan_id: int


@dataclass(frozen=True)
class RegressionFit:
    degree: int
    intercept: bool
    coefficients: tuple[float, ...]  # constant term first when intercept is set
    r_squared: float

    def __post_init__(self):
        expected = self.degree + (1 if self.intercept else 0)
        if len(self.coefficients) != expected:
            raise ValueError(
                f"degree-{self.degree} fit needs {expected} coefficients, "
                f"got {len(self.coefficients)}"
            )

    def predict(self, x: float) -> float:
        powers = range(0 if self.intercept else 1, self.degree + 1)
        return sum(c * x**p for c, p in zip(self.coefficients, powers))


def scale_traffic(profile: TrafficProfile, k: float) -> TrafficProfile:
    """Multiply every call rate by k, keeping subgroup proportions and durations."""
    return profile.scaled(k)


def k_grid(start: float = 0.5, stop: float = 10.0, step: float = 0.5) -> list[float]:
    """Inclusive multiplier grid, built without floating-point drift."""
    if start <= 0 or step <= 0 or stop < start:
        raise ValueError(f"bad grid spec start={start} stop={stop} step={step}")
    count = int((stop - start) / step + 1e-9) + 1
    return [round(start + i * step, 12) for i in range(count)]


def sweep(
    catalog: Catalog,
    context: SubscriberContext,
    profile: TrafficProfile,
    grid: Sequence[float],
    mode: str = LOOKUP,
) -> list[SweepPoint]:
    """Re-solve the plan selection at every multiplier of the grid."""
    if not grid:
        raise ValueError("empty multiplier grid")
    if list(grid) != sorted(grid):
        raise ValueError("multiplier grid must be sorted")
    points = []
    for k in grid:
        breakdowns = full_costs(catalog, context, scale_traffic(profile, k), mode)
        ranking = rank(breakdowns)
        costs = {b.plan_id: b.full for b in breakdowns}
        stay = next(b.full for b in breakdowns if b.is_current)
        points.append(
            SweepPoint(
                k=float(k),
                optimal_plan_id=ranking.optimal_id,
                optimal_full_cost=costs[ranking.optimal_id],
                stay_cost=stay,
                plan_costs=costs,
            )
        )
    return points


def _crossing(left: SweepPoint, right: SweepPoint) -> float:
    """Bisect for the k where the two locally optimal plans swap.

    Plan costs are affine in k, so interpolating each plan's cost between
    the two grid points is exact and the sign change is unique.
    """
    a, b = left.optimal_plan_id, right.optimal_plan_id
    span = right.k - left.k

    def gap(k: float) -> float:
        w = (k - left.k) / span
        cost_a = (1 - w) * left.plan_costs[a] + w * right.plan_costs[a]
        cost_b = (1 - w) * left.plan_costs[b] + w * right.plan_costs[b]
        return cost_a - cost_b

    lo, hi = left.k, right.k
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if gap(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def switch_points(points: Sequence[SweepPoint]) -> list[SwitchInterval]:
    """Contiguous optimal-plan intervals, with boundaries refined between grid points."""
    if not points:
        return []
    intervals = []
    start = points[0].k
    for prev, cur in zip(points, points[1:]):
        if cur.optimal_plan_id != prev.optimal_plan_id:
            boundary = _crossing(prev, cur)
            intervals.append(SwitchInterval(start, boundary, prev.optimal_plan_id))
            start = boundary
    intervals.append(SwitchInterval(start, points[-1].k, points[-1].optimal_plan_id))
    return intervals


def polyfit(
    points: Sequence[tuple[float, float]], degree: int, intercept: bool = True
) -> RegressionFit:
    """Ordinary least-squares polynomial fit with its determination coefficient.

    R^2 compares residuals against the centered total sum of squares; for
    through-origin models (no intercept) the uncentered sum of y^2 is used
    instead, keeping R^2 in [0, 1] in both cases.
    """
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    n_coef = degree + (1 if intercept else 0)
    if x.size <= n_coef:
        raise ValueError(
            f"need more than {n_coef} points for a degree-{degree} fit, got {x.size}"
        )
    if np.all(x == x[0]):
        raise ValueError("x values are all identical")
    powers = range(0 if intercept else 1, degree + 1)
    design = np.column_stack([x**p for p in powers])
    coef, _, rank_, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank_ < n_coef:
        raise ValueError("rank-deficient design matrix")
    residuals = y - design @ coef
    ss_res = float(residuals @ residuals)
    if intercept:
        centered = y - y.mean()
        ss_tot = float(centered @ centered)
    else:
        ss_tot = float(y @ y)
    if ss_tot <= 1e-12 * max(1.0, float(y @ y)):
        r_squared = 0.0  # constant response: no variance to explain
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return RegressionFit(
        degree=degree,
        intercept=intercept,
        coefficients=tuple(float(c) for c in coef),
        r_squared=r_squared,
    )


#: model forms fitted by :func:`fit_report`
FIT_FORMS = (
    ("stay_linear_origin", "stay", 1, False),
    ("optimal_linear_origin", "optimal", 1, False),
    ("optimal_linear", "optimal", 1, True),
    ("optimal_quadratic", "optimal", 2, True),
    ("optimal_cubic", "optimal", 3, True),
)


def fit_report(points: Sequence[SweepPoint]) -> dict[str, RegressionFit]:
    """Regress the stay-put and optimally-switched cost curves against k.

    The stay curve gets a through-origin line; the optimal curve gets a
    through-origin line, a line with intercept, a quadratic, and a cubic,
    so the gain from each extra term is visible in the R^2 progression.
    """
    if len(points) < 5:
        raise ValueError(f"need at least 5 sweep points, got {len(points)}")
    stay = [(p.k, p.stay_cost) for p in points]
    optimal = [(p.k, p.optimal_full_cost) for p in points]
    fits = {}
    for name, series, degree, intercept in FIT_FORMS:
        data = stay if series == "stay" else optimal
        fits[name] = polyfit(data, degree, intercept)
    return fits


def sweep_csv(points: Sequence[SweepPoint]) -> str:
    """Plottable table: k, the optimum, the stay-put cost, then every plan."""
    plan_ids = sorted(points[0].plan_costs) if points else []
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["k", "optimal_plan", "optimal_cost", "stay_cost"]
        + [f"plan_{pid}" for pid in plan_ids]
    )
    for p in points:
        writer.writerow(
            [repr(p.k), p.optimal_plan_id, repr(p.optimal_full_cost), repr(p.stay_cost)]
            + [repr(p.plan_costs[pid]) for pid in plan_ids]
        )
    return out.getvalue()


def fits_json(fits: dict[str, RegressionFit]) -> str:
    doc = {
        name: {
            "degree": fit.degree,
            "intercept": fit.intercept,
            "coefficients": list(fit.coefficients),
            "r_squared": fit.r_squared,
        }
        for name, fit in fits.items()
    }
    return json.dumps(doc, indent=2)
