"""Monte-Carlo oracle tests: generator statistics, billing semantics,
reproducibility, and agreement with the analytic engine."""

from __future__ import annotations

import math

import numpy as np
import pytest

from tariffopt import (
    Exponential,
    SimCell,
    SimConfig,
    SimulationError,
    bill_call,
    full_costs,
    generate_month,
    replay_trace,
    run,
    substream,
)



def one_cell_config(lam, mu, runs, seed=7, mode="lookup"):
    return SimConfig(
        seed=seed,
        runs=runs,
        cells=(SimCell("same-network", "workday", lam, mu),),
        billing_mode=mode,
    )


def test_zero_rate_generates_nothing():
    config = one_cell_config(0.0, 0.41, runs=1)
    for r in range(5):
        assert generate_month(config, 0, substream(7, r, 0)).size == 0


def test_poisson_count_mean():
    """lambda=33: the mean monthly count over 1e4 runs sits within 3 sigma."""
    config = one_cell_config(33.0, 0.41, runs=1)
    counts = [generate_month(config, 0, substream(11, r, 0)).size for r in range(10_000)]
    tolerance = 3 * math.sqrt(33.0 / 10_000)
    assert abs(np.mean(counts) - 33.0) <= tolerance


def test_exponential_duration_mean():
    config = one_cell_config(33.0, 0.41, runs=1)
    durations = np.concatenate(
        [generate_month(config, 0, substream(13, r, 0)) for r in range(3_000)]
    )
    se = durations.std(ddof=1) / math.sqrt(durations.size)
    assert abs(durations.mean() - 1 / 0.41) <= 3 * se


def test_generate_month_deterministic_per_run_and_cell():
    config = one_cell_config(10.0, 0.5, runs=3)
    a = generate_month(config, 0, substream(99, 2, 0))
    b = generate_month(config, 0, substream(99, 2, 0))
    assert np.array_equal(a, b)
    c = generate_month(config, 0, substream(99, 3, 0))
    assert not np.array_equal(a, c)


def test_bill_call_lookup(mts_catalog):
    payoff = mts_catalog.plan(1).subgroups[0][1]  # 2.5 / free minutes 2-5 / 2.5
    assert bill_call(payoff, 3.2) == 0.0  # billed minute 4 is free
    assert bill_call(payoff, 0.5) == 2.5
    assert bill_call(payoff, 5.5) == 2.5  # billed minute 6


def test_bill_call_flat_rate():
    from decimal import Decimal

    from tariffopt import PayoffFunction, RateSegment

    payoff = PayoffFunction((RateSegment(1, None, Decimal("3.0")),))
    for duration in (0.1, 1.0, 2.7, 100.0):
        assert bill_call(payoff, duration) == 3.0


def test_bill_call_cumulative(mts_catalog):
    payoff = mts_catalog.plan(1).subgroups[0][1]
    # minutes 1..4 priced 2.5 + 0 + 0 + 0
    assert bill_call(payoff, 3.2, mode="cumulative") == 2.5
    # minutes 1..6: 2.5 + 0*4 + 2.5
    assert bill_call(payoff, 5.5, mode="cumulative") == 5.0


def test_bill_call_rejects_bad_input(mts_catalog):
    payoff = mts_catalog.plan(1).subgroups[0][1]
    with pytest.raises(ValueError):
        bill_call(payoff, 0.0)
    with pytest.raises(ValueError):
        bill_call(payoff, 1.0, mode="nonsense")


def test_cumulative_dominates_lookup(mts_catalog, reference_profile):
    """With non-negative rates, per-minute accumulation never bills less."""
    config = SimConfig.from_profile(reference_profile, seed=3, runs=200)
    lookup = {p.plan_id: p.mean for p in run(config, mts_catalog).plans}
    cumulative_config = SimConfig.from_profile(
        reference_profile, seed=3, runs=200, billing_mode="cumulative"
    )
    cumulative = {p.plan_id: p.mean for p in run(cumulative_config, mts_catalog).plans}
    for plan_id in lookup:
        assert cumulative[plan_id] >= lookup[plan_id] - 1e-12


def test_run_flat_plan_matches_analytic():
    """Flat 3-ruble plan at lambda=39: mean monthly cost ~ 117 within 3 SE."""
    import json

    from tariffopt import load_catalog

    doc = {
        "plans": [
            {
                "id": 1,
                "name": "Flat",
                "provider": "ACME",
                "active": True,
                "fixed": {"subscription_fee": 0, "switch_fee": 0, "purchase_cost": 0},
                "subgroups": [
                    {
                        "name": "All",
                        "destination_class": "any",
                        "day_class": "any",
                        "segments": [{"from": 1, "to": "open", "rate": "3.0"}],
                    }
                ],
            }
        ],
        "context": {"current_plan_id": 1, "owned_sim_providers": ["ACME"]},
    }
    catalog = load_catalog(json.dumps(doc))
    config = one_cell_config(39.0, 0.41, runs=100_000, seed=123)
    sample = run(config, catalog).plans[0]
    assert abs(sample.mean - 117.0) <= 3 * sample.stderr


def test_run_zero_traffic_costs_nothing(mts_catalog):
    config = SimConfig(seed=5, runs=50, cells=(SimCell("landline", "weekend", 0.0, 1.0),))
    result = run(config, mts_catalog)
    for p in result.plans:
        assert p.mean == 0.0 and p.stddev == 0.0
        assert p.percentiles == (0.0, 0.0, 0.0)


def test_run_reproducible_bit_identical(mts_catalog, reference_profile):
    config = SimConfig.from_profile(reference_profile, seed=77, runs=300)
    first = run(config, mts_catalog)
    second = run(config, mts_catalog)
    assert first == second
    assert first.to_json() == second.to_json()


def test_run_percentiles_ordered(mts_catalog, reference_profile):
    config = SimConfig.from_profile(reference_profile, seed=9, runs=500)
    for p in run(config, mts_catalog).plans:
        p5, p50, p95 = p.percentiles
        assert p5 <= p50 <= p95
        assert p.stderr == pytest.approx(p.stddev / math.sqrt(500))


def test_oracle_equivalence_small(mts_catalog, reference_profile):
    """Sample means track the analytic variable costs (5 SE at 20k runs)."""
    config = SimConfig.from_profile(reference_profile, seed=21, runs=20_000)
    result = run(config, mts_catalog)
    analytic = {
        b.plan_id: b.variable
        for b in full_costs(mts_catalog, mts_catalog.context, reference_profile)
    }
    for p in result.plans:
        assert abs(p.mean - analytic[p.plan_id]) <= 5 * p.stderr + 1e-9


def test_from_profile_requires_exponential_durations(mts_catalog):
    from tariffopt import Empirical, TrafficCell, TrafficProfile

    profile = TrafficProfile(
        cells=(TrafficCell("landline", "workday", 2.0, Empirical((1.0,))),),
        observation_months=1.0,
    )
    with pytest.raises(SimulationError, match="exponential"):
        SimConfig.from_profile(profile, seed=1, runs=1)


def test_config_validation():
    with pytest.raises(SimulationError):
        SimConfig(seed=-1, runs=1, cells=())
    with pytest.raises(SimulationError):
        SimConfig(seed=1, runs=0, cells=())
    with pytest.raises(SimulationError):
        SimCell("landline", "workday", 1.0, 0.0)


def test_replay_trace_matches_direct_billing(mts_catalog):
    from datetime import date, time
    from decimal import Decimal

    from tariffopt import CallRecord, ClassifiedCall

    def call(dest, day, minute):
        rec = CallRecord(date(2010, 8, 20), time(9, 0), "+7", "", "Tel", minute * 60, Decimal("0"))
        return ClassifiedCall(rec, dest, day, minute)

    calls = [
        call("same-network", "workday", 1),
        call("same-network", "workday", 4),
        call("landline", "weekend", 2),
    ]
    per_plan = replay_trace(mts_catalog, calls, months=1.0)
    # plan 1: 2.5 (minute 1) + 0 (minute 4) + 3.5 (landline minute 2 -> free band) = 2.5
    assert per_plan[1] == pytest.approx(2.5 + 0.0 + 0.0)
    # plan 6: workdays 3 + 3, weekend 1
    assert per_plan[6] == pytest.approx(7.0)
    with pytest.raises(SimulationError):
        replay_trace(mts_catalog, calls, months=0.0)
