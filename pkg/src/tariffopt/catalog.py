"""Billing-plan catalog: plan definitions, validation, serialization, rate lookup.

A catalog document describes every candidate plan: its fixed fees, the rules
that route a call into one of the plan's subgroups, and the per-minute price
schedule each subgroup is billed under. Catalogs are immutable after loading
and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from functools import cached_property
from typing import IO, Union

import numpy as np

DESTINATION_CLASSES = ("same-network", "other-mobile", "landline")
DAY_CLASSES = ("workday", "weekend")
ANY = "any"

#: every (destination, day) combination a classifier must cover
ALL_CALL_CLASSES = tuple(
    (dest, day) for dest in DESTINATION_CLASSES for day in DAY_CLASSES
)


class CatalogError(ValueError):
    """Raised when a catalog document is malformed or violates an invariant."""


def _money(value, what: str) -> Decimal:
    """Parse a ruble amount given as a decimal string or a number.

    Amounts are kept as exact decimals so that ingested values survive
    serialization round-trips without binary-fraction drift.
    """
    try:
        amount = Decimal(str(value))
    except InvalidOperation:
        raise CatalogError(f"{what}: not a decimal amount: {value!r}") from None
    if not amount.is_finite():
        raise CatalogError(f"{what}: non-finite amount: {value!r}")
    return amount


@dataclass(frozen=True)
class RateSegment:
    """One row of a price schedule: minutes [from_minute, to_minute] cost `rate`.

    ``to_minute is None`` marks the open tail covering all remaining minutes.
    """

    from_minute: int
    to_minute: int | None
    rate: Decimal

    def __post_init__(self):
        if self.from_minute < 1:
            raise CatalogError(f"segment starts before minute 1: {self.from_minute}")
        if self.to_minute is not None and self.to_minute < self.from_minute:
            raise CatalogError(
                f"segment ends at minute {self.to_minute} before it starts "
                f"at {self.from_minute}"
            )
        if self.rate < 0:
            raise CatalogError(f"negative rate: {self.rate}")

    @property
    def is_open(self) -> bool:
        return self.to_minute is None


@dataclass(frozen=True)
class PayoffFunction:
    """Piecewise-constant price schedule over call minutes.

    Segments must tile [1, infinity): the first starts at minute 1, each
    next one starts right after its predecessor ends, and exactly the last
    segment is open-ended.
    """

    segments: tuple[RateSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise CatalogError("payoff function has no segments")
        if self.segments[0].from_minute != 1:
            raise CatalogError(
                f"first segment starts at minute {self.segments[0].from_minute}, not 1"
            )
        for prev, nxt in zip(self.segments, self.segments[1:]):
            if prev.is_open:
                raise CatalogError("open segment is not the last one")
            if nxt.from_minute != prev.to_minute + 1:
                raise CatalogError(
                    f"segments are not contiguous: minute {prev.to_minute + 1} "
                    f"uncovered before segment starting at {nxt.from_minute}"
                )
        if not self.segments[-1].is_open:
            raise CatalogError("last segment must be open-ended")

    @cached_property
    def _starts(self) -> np.ndarray:
        return np.array([seg.from_minute for seg in self.segments], dtype=np.int64)

    @cached_property
    def _rates(self) -> np.ndarray:
        return np.array([float(seg.rate) for seg in self.segments])

    @cached_property
    def _cum_before(self) -> np.ndarray:
        # total charge of all whole segments preceding each segment
        lengths = np.array(
            [seg.to_minute - seg.from_minute + 1 for seg in self.segments[:-1]],
            dtype=float,
        )
        return np.concatenate([[0.0], np.cumsum(lengths * self._rates[:-1])])

    def segment_index(self, minute: int) -> int:
        if minute < 1:
            raise ValueError(f"minute must be >= 1, got {minute}")
        return int(np.searchsorted(self._starts, minute, side="right")) - 1

    def rate_at(self, minute: int) -> float:
        """Rate charged for a call whose billed duration is `minute`."""
        return float(self._rates[self.segment_index(minute)])

    def rates(self, minutes: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`rate_at` over an integer minute array."""
        idx = np.searchsorted(self._starts, minutes, side="right") - 1
        return self._rates[idx]

    def cumulative(self, minutes: np.ndarray) -> np.ndarray:
        """Sum of per-minute rates over minutes 1..m, vectorized over m."""
        minutes = np.asarray(minutes, dtype=np.int64)
        idx = np.searchsorted(self._starts, minutes, side="right") - 1
        within = minutes - self._starts[idx] + 1
        return self._cum_before[idx] + within * self._rates[idx]

    @property
    def max_rate(self) -> float:
        return float(self._rates.max())


def rate_at(payoff: PayoffFunction, minute: int) -> float:
    """Rate of the unique segment of `payoff` containing `minute`."""
    return payoff.rate_at(minute)


@dataclass(frozen=True)
class SubgroupRule:
    """Routing rule for one plan subgroup; `any` wildcards either dimension."""

    subgroup_name: str
    destination_class: str
    day_class: str

    def __post_init__(self):
        if self.destination_class not in DESTINATION_CLASSES + (ANY,):
            raise CatalogError(
                f"unknown destination class {self.destination_class!r} "
                f"in subgroup {self.subgroup_name!r}"
            )
        if self.day_class not in DAY_CLASSES + (ANY,):
            raise CatalogError(
                f"unknown day class {self.day_class!r} "
                f"in subgroup {self.subgroup_name!r}"
            )

    def matches(self, destination_class: str, day_class: str) -> bool:
        return self.destination_class in (ANY, destination_class) and self.day_class in (
            ANY,
            day_class,
        )

    @property
    def is_wildcard(self) -> bool:
        return self.destination_class == ANY and self.day_class == ANY


@dataclass(frozen=True)
class FixedCostSpec:
    """Fee components that do not scale with traffic."""

    subscription_fee: Decimal
    switch_fee: Decimal
    purchase_cost: Decimal

    def __post_init__(self):
        for name in ("subscription_fee", "switch_fee", "purchase_cost"):
            if getattr(self, name) < 0:
                raise CatalogError(f"negative {name}: {getattr(self, name)}")


@dataclass(frozen=True)
class BillingPlan:
    """One tariff offer: fixed fees plus an ordered list of rated subgroups.

    Subgroup rules are applied first-match-wins; together they must cover
    every (destination, day) combination.
    """

    id: int
    name: str
    provider: str
    active: bool
    fixed: FixedCostSpec
    subgroups: tuple[tuple[SubgroupRule, PayoffFunction], ...]

    def __post_init__(self):
        object.__setattr__(self, "subgroups", tuple(self.subgroups))
        if self.id < 1:
            raise CatalogError(f"plan id must be >= 1, got {self.id}")
        if not self.subgroups:
            raise CatalogError(f"plan {self.id} has no subgroups")
        wildcards = sum(rule.is_wildcard for rule, _ in self.subgroups)
        if wildcards > 1:
            raise CatalogError(f"plan {self.id} has {wildcards} catch-all rules")
        for dest, day in ALL_CALL_CLASSES:
            if not any(rule.matches(dest, day) for rule, _ in self.subgroups):
                raise CatalogError(
                    f"plan {self.id} ({self.name!r}) leaves ({dest}, {day}) "
                    f"calls with no subgroup"
                )

    def subgroup_index(self, destination_class: str, day_class: str) -> int:
        """Index of the first rule matching the call class (always exists)."""
        for j, (rule, _) in enumerate(self.subgroups):
            if rule.matches(destination_class, day_class):
                return j
        raise CatalogError(
            f"plan {self.id}: no subgroup for ({destination_class}, {day_class})"
        )

    def subgroup_names(self) -> tuple[str, ...]:
        return tuple(rule.subgroup_name for rule, _ in self.subgroups)


@dataclass(frozen=True)
class SubscriberContext:
    """What the subscriber already has: current plan and owned SIM providers."""

    current_plan_id: int
    owned_sim_providers: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Catalog:
    plans: tuple[BillingPlan, ...]
    context: SubscriberContext
    _by_id: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "plans", tuple(self.plans))
        by_id = {}
        for plan in self.plans:
            if plan.id in by_id:
                raise CatalogError(f"duplicate plan id {plan.id}")
            by_id[plan.id] = plan
        object.__setattr__(self, "_by_id", by_id)
        if self.context.current_plan_id not in by_id:
            raise CatalogError(
                f"current_plan_id {self.context.current_plan_id} not in catalog"
            )

    def plan(self, plan_id: int) -> BillingPlan:
        try:
            return self._by_id[plan_id]
        except KeyError:
            raise CatalogError(f"unknown plan id {plan_id}") from None

    @property
    def current_plan(self) -> BillingPlan:
        return self._by_id[self.context.current_plan_id]

    def switch_candidates(self) -> tuple[BillingPlan, ...]:
        """Plans the subscriber can end up on: active ones plus the current one.

        An inactive plan stays valid while it is the current plan, but cannot
        be switched to.
        """
        return tuple(
            p for p in self.plans if p.active or p.id == self.context.current_plan_id
        )


def _read_source(source: Union[bytes, str, IO]) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _parse_segment(raw: dict, where: str) -> RateSegment:
    try:
        from_minute = int(raw["from"])
        to_raw = raw["to"]
        rate = _money(raw["rate"], f"{where} rate")
    except KeyError as exc:
        raise CatalogError(f"{where}: missing segment field {exc}") from None
    to_minute = None if to_raw == "open" else int(to_raw)
    return RateSegment(from_minute=from_minute, to_minute=to_minute, rate=rate)


def _parse_plan(raw: dict) -> BillingPlan:
    try:
        plan_id = int(raw["id"])
        name = str(raw["name"])
        provider = str(raw["provider"])
        fixed_raw = raw["fixed"]
        subgroups_raw = raw["subgroups"]
    except KeyError as exc:
        raise CatalogError(f"plan entry missing field {exc}") from None
    active = bool(raw.get("active", True))
    fixed = FixedCostSpec(
        subscription_fee=_money(fixed_raw.get("subscription_fee", 0), f"plan {plan_id} subscription_fee"),
        switch_fee=_money(fixed_raw.get("switch_fee", 0), f"plan {plan_id} switch_fee"),
        purchase_cost=_money(fixed_raw.get("purchase_cost", 0), f"plan {plan_id} purchase_cost"),
    )
    subgroups = []
    for sub in subgroups_raw:
        where = f"plan {plan_id} subgroup {sub.get('name', '?')!r}"
        rule = SubgroupRule(
            subgroup_name=str(sub["name"]),
            destination_class=str(sub["destination_class"]),
            day_class=str(sub["day_class"]),
        )
        payoff = PayoffFunction(
            tuple(_parse_segment(seg, where) for seg in sub["segments"])
        )
        subgroups.append((rule, payoff))
    return BillingPlan(
        id=plan_id,
        name=name,
        provider=provider,
        active=active,
        fixed=fixed,
        subgroups=tuple(subgroups),
    )


def load_catalog(source: Union[bytes, str, IO]) -> Catalog:
    """Parse and validate a JSON catalog document.

    The document has the shape::

        {"plans": [{"id", "name", "provider", "active",
                    "fixed": {"subscription_fee", "switch_fee", "purchase_cost"},
                    "subgroups": [{"name", "destination_class", "day_class",
                                   "segments": [{"from", "to" | "open", "rate"}]}]}],
         "context": {"current_plan_id", "owned_sim_providers"}}

    Fees and rates may be decimal strings or plain numbers.
    """
    try:
        doc = json.loads(_read_source(source))
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "plans" not in doc or "context" not in doc:
        raise CatalogError("catalog must be an object with 'plans' and 'context'")
    plans = tuple(_parse_plan(raw) for raw in doc["plans"])
    ctx_raw = doc["context"]
    try:
        context = SubscriberContext(
            current_plan_id=int(ctx_raw["current_plan_id"]),
            owned_sim_providers=frozenset(
                str(p) for p in ctx_raw.get("owned_sim_providers", ())
            ),
        )
    except KeyError as exc:
        raise CatalogError(f"context missing field {exc}") from None
    return Catalog(plans=plans, context=context)


def serialize_catalog(catalog: Catalog) -> str:
    """Render a catalog back to its JSON document form.

    ``load_catalog(serialize_catalog(c))`` compares equal to ``c``.
    """
    doc = {
        "plans": [
            {
                "id": plan.id,
                "name": plan.name,
                "provider": plan.provider,
                "active": plan.active,
                "fixed": {
                    "subscription_fee": str(plan.fixed.subscription_fee),
                    "switch_fee": str(plan.fixed.switch_fee),
                    "purchase_cost": str(plan.fixed.purchase_cost),
                },
                "subgroups": [
                    {
                        "name": rule.subgroup_name,
                        "destination_class": rule.destination_class,
                        "day_class": rule.day_class,
                        "segments": [
                            {
                                "from": seg.from_minute,
                                "to": "open" if seg.is_open else seg.to_minute,
                                "rate": str(seg.rate),
                            }
                            for seg in payoff.segments
                        ],
                    }
                    for rule, payoff in plan.subgroups
                ],
            }
            for plan in catalog.plans
        ],
        "context": {
            "current_plan_id": catalog.context.current_plan_id,
            "owned_sim_providers": sorted(catalog.context.owned_sim_providers),
        },
    }
    return json.dumps(doc, indent=2)
