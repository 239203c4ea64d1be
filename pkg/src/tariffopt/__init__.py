"""Billing-plan switching optimizer.

Given a call-detail printout and a catalog of candidate plans, compute each
plan's expected full monthly cost, pick the cheapest, validate the choice by
Monte-Carlo simulation, and study how it shifts as traffic grows.
"""

from .catalog import (
    ANY,
    DAY_CLASSES,
    DESTINATION_CLASSES,
    BillingPlan,
    Catalog,
    CatalogError,
    FixedCostSpec,
    PayoffFunction,
    RateSegment,
    SubgroupRule,
    SubscriberContext,
    load_catalog,
    rate_at,
    serialize_catalog,
)
from .cost import (
    BILLING_MODES,
    CostBreakdown,
    Ranking,
    SubgroupCost,
    expected_call_cost,
    fixed_cost,
    full_costs,
    rank,
    report_csv,
    report_json,
    variable_cost,
)
from .sensitivity import (
    RegressionFit,
    SweepPoint,
    SwitchInterval,
    fit_report,
    k_grid,
    polyfit,
    scale_traffic,
    sweep,
    switch_points,
)
from .simulate import (
    PlanSample,
    SimCell,
    SimConfig,
    SimResult,
    SimulationError,
    bill_call,
    generate_month,
    replay_trace,
    run,
    substream,
)
from .traffic import (
    CallRecord,
    CdrError,
    ClassifiedCall,
    Empirical,
    Exponential,
    ExponentialFit,
    PrefixTable,
    ProfileError,
    TrafficCell,
    TrafficProfile,
    WorkdayCalendar,
    build_histogram,
    classify,
    classify_calls,
    estimate_profile,
    fit_exponential,
    observation_months,
    parse_cdr,
)

__version__ = "0.1.0"
