"""Airspace scheduling data model.

Sectors are numbered 1..m and have hard simultaneous-occupancy capacities.
A route is an ordered list of (sector, dwell) legs with a scheduled
departure period; the only control is postponing departure by an integer
number of periods, at most ``d``.  Occupancy is tracked on the extended
horizon ``1..T+d`` so that delayed flights are never silently truncated.

Instances serialize to a JSON document with top-level keys ``m``,
``capacities``, ``T``, ``d``, ``flights`` and optional ``weights``;
unknown keys are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np


class InstanceFormatError(ValueError):
    """Raised when an instance document cannot be parsed."""


@dataclass(frozen=True)
class Route:
    """A flight route: departure period plus ordered (sector, dwell) legs."""

    flight_id: int
    departure: int
    legs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.legs:
            raise ValueError(f"flight {self.flight_id}: legs must be nonempty")
        if self.departure < 1:
            raise ValueError(f"flight {self.flight_id}: departure must be >= 1")
        for sector, dwell in self.legs:
            if dwell < 1:
                raise ValueError(
                    f"flight {self.flight_id}: dwell must be >= 1 in sector {sector}"
                )

    @property
    def total_dwell(self) -> int:
        return sum(dwell for _, dwell in self.legs)

    def validate_against(self, m: int, T: int) -> None:
        """Check sector ids against ``m`` and the undelayed fit against ``T``."""
        for sector, _ in self.legs:
            if not 1 <= sector <= m:
                raise ValueError(
                    f"flight {self.flight_id}: sector {sector} outside [1..{m}]"
                )
        if self.departure + self.total_dwell - 1 > T:
            raise ValueError(
                f"flight {self.flight_id}: undelayed route exceeds horizon T={T}"
            )


@dataclass(frozen=True)
class Schedule:
    """One ground delay per flight, each in {0, ..., d}."""

    delays: tuple[int, ...]

    def one_hot(self, d: int) -> np.ndarray:
        """Binary n x (d+1) matrix with row i one-hot at column delays[i]."""
        x = np.zeros((len(self.delays), d + 1), dtype=np.int64)
        for i, j in enumerate(self.delays):
            x[i, j] = 1
        return x


@dataclass(frozen=True, eq=False)
class Instance:
    """Full problem statement: sectors, capacities, horizon, routes, max delay.

    ``objective_weights`` is an optional n x (d+1) table of nonnegative
    costs; entry (i, j) is the cost of delaying flight i by j periods.
    ``None`` means the default weights (cost j for delay j), in which case
    schedule costs are exact integers.
    """

    m: int
    capacities: tuple[int, ...]
    T: int
    d: int
    routes: tuple[Route, ...]
    objective_weights: Optional[tuple[tuple[float, ...], ...]] = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.d < 0:
            raise ValueError("d must be >= 0")
        if len(self.routes) < 1:
            raise ValueError("at least one route is required (n >= 1)")
        if len(self.capacities) != self.m:
            raise ValueError(
                f"capacities has length {len(self.capacities)}, expected m={self.m}"
            )
        for cap in self.capacities:
            if cap < 0:
                raise ValueError("capacities must be nonnegative")
        for route in self.routes:
            route.validate_against(self.m, self.T)
        if self.objective_weights is not None:
            w = self.objective_weights
            if len(w) != self.n or any(len(row) != self.d + 1 for row in w):
                raise ValueError(
                    f"weights must be {self.n} x {self.d + 1}"
                )
            if any(v < 0 for row in w for v in row):
                raise ValueError("weights must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.routes)

    def weights(self) -> np.ndarray:
        """The n x (d+1) objective weight table as a float array."""
        if self.objective_weights is None:
            return np.tile(np.arange(self.d + 1, dtype=float), (self.n, 1))
        return np.asarray(self.objective_weights, dtype=float)

    def with_weights(self, weights: np.ndarray) -> "Instance":
        return Instance(
            m=self.m,
            capacities=self.capacities,
            T=self.T,
            d=self.d,
            routes=self.routes,
            objective_weights=tuple(tuple(float(v) for v in row) for row in weights),
        )

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.m == other.m
            and self.capacities == other.capacities
            and self.T == other.T
            and self.d == other.d
            and self.routes == other.routes
            and self.objective_weights == other.objective_weights
        )


@dataclass(frozen=True)
class EvaluationResult:
    feasible: bool
    total_delay: float
    violations: tuple[tuple[int, int, int, int], ...]  # (sector, period, load, capacity)


def expanded_occupancy(route: Route, delay: int, m: int, T: int, d: int) -> np.ndarray:
    """Binary m x (T+d) matrix marking the sector the flight occupies per period.

    The flight departs at ``route.departure + delay``; entry (k, t) is 1 iff
    it sits in sector k during period t (both 1-based in the problem, 0-based
    in the returned array).
    """
    if not 0 <= delay <= d:
        raise ValueError(f"delay {delay} outside [0..{d}]")
    route.validate_against(m, T)
    occ = np.zeros((m, T + d), dtype=np.int8)
    t = route.departure + delay
    for sector, dwell in route.legs:
        occ[sector - 1, t - 1 : t - 1 + dwell] = 1
        t += dwell
    return occ


def evaluate_schedule(instance: Instance, schedule: Schedule) -> EvaluationResult:
    """Check sector loads against capacities and total the weighted delay.

    Feasible iff every (sector, period) load over the extended horizon
    ``1..T+d`` is within capacity.  With default weights the total delay is
    the exact integer sum of the per-flight delays.
    """
    if len(schedule.delays) != instance.n:
        raise ValueError(
            f"schedule has {len(schedule.delays)} delays, expected n={instance.n}"
        )
    loads = np.zeros((instance.m, instance.T + instance.d), dtype=np.int64)
    for route, delay in zip(instance.routes, schedule.delays):
        if not 0 <= delay <= instance.d:
            raise ValueError(f"delay {delay} outside [0..{instance.d}]")
        loads += expanded_occupancy(route, delay, instance.m, instance.T, instance.d)
    caps = np.asarray(instance.capacities, dtype=np.int64)
    violations = []
    for k, t in zip(*np.nonzero(loads > caps[:, None])):
        violations.append((int(k) + 1, int(t) + 1, int(loads[k, t]), int(caps[k])))
    if instance.objective_weights is None:
        total = int(sum(schedule.delays))
    else:
        w = instance.weights()
        total = float(sum(w[i, j] for i, j in enumerate(schedule.delays)))
    return EvaluationResult(
        feasible=not violations,
        total_delay=total,
        violations=tuple(violations),
    )


def generate_instance(
    m: int,
    n: int,
    T: int,
    d: int,
    capacity_range: tuple[int, int],
    route_length_range: tuple[int, int],
    seed: int,
) -> Instance:
    """Draw a random instance, deterministically for a fixed seed.

    Each route is a sequence of distinct uniformly random sectors with unit
    dwell and a uniform random departure that fits the nominal horizon;
    capacities are uniform over ``capacity_range`` (inclusive).
    """
    if n < 1 or m < 1 or T < 1 or d < 0:
        raise ValueError("need n >= 1, m >= 1, T >= 1, d >= 0")
    cap_lo, cap_hi = capacity_range
    len_lo, len_hi = route_length_range
    if cap_lo > cap_hi or cap_lo < 0:
        raise ValueError("capacity_range must be a nonempty nonnegative range")
    if len_lo > len_hi or len_lo < 1:
        raise ValueError("route_length_range must be a nonempty positive range")
    if len_hi > min(m, T):
        raise ValueError(
            f"route_length_range allows length {len_hi}, but routes of distinct "
            f"unit-dwell sectors need length <= min(m, T) = {min(m, T)}"
        )
    rng = np.random.default_rng(seed)
    capacities = tuple(int(c) for c in rng.integers(cap_lo, cap_hi + 1, size=m))
    routes = []
    for i in range(n):
        length = int(rng.integers(len_lo, len_hi + 1))
        sectors = rng.choice(m, size=length, replace=False) + 1
        departure = int(rng.integers(1, T - length + 2))
        routes.append(
            Route(
                flight_id=i + 1,
                departure=departure,
                legs=tuple((int(s), 1) for s in sectors),
            )
        )
    return Instance(m=m, capacities=capacities, T=T, d=d, routes=tuple(routes))


# --- instance file format ---------------------------------------------------

_TOP_KEYS = {"m", "capacities", "T", "d", "flights"}
_FLIGHT_KEYS = {"id", "departure", "legs"}
_LEG_KEYS = {"sector", "dwell"}


def _require_int(value, field: str) -> int:
    # bool is an int subclass; reject it explicitly
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceFormatError(f"field '{field}' must be an integer")
    return value


def write_instance(instance: Instance) -> str:
    """Serialize to the canonical JSON document (stable key order, 2-space indent)."""
    doc: dict = {
        "m": instance.m,
        "capacities": list(instance.capacities),
        "T": instance.T,
        "d": instance.d,
        "flights": [
            {
                "id": route.flight_id,
                "departure": route.departure,
                "legs": [{"sector": s, "dwell": dw} for s, dw in route.legs],
            }
            for route in instance.routes
        ],
    }
    if instance.objective_weights is not None:
        doc["weights"] = [list(row) for row in instance.objective_weights]
    return json.dumps(doc, indent=2) + "\n"


def read_instance(text: str) -> Instance:
    """Parse an instance document, rejecting unknown or ill-typed fields."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level must be an object")
    unknown = set(doc) - _TOP_KEYS - {"weights"}
    if unknown:
        raise InstanceFormatError(f"unknown field '{sorted(unknown)[0]}'")
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise InstanceFormatError(f"missing field '{sorted(missing)[0]}'")

    m = _require_int(doc["m"], "m")
    T = _require_int(doc["T"], "T")
    d = _require_int(doc["d"], "d")
    if not isinstance(doc["capacities"], list):
        raise InstanceFormatError("field 'capacities' must be an array")
    capacities = tuple(
        _require_int(c, f"capacities[{i}]") for i, c in enumerate(doc["capacities"])
    )
    if not isinstance(doc["flights"], list):
        raise InstanceFormatError("field 'flights' must be an array")

    routes = []
    for fi, flight in enumerate(doc["flights"]):
        where = f"flights[{fi}]"
        if not isinstance(flight, dict):
            raise InstanceFormatError(f"field '{where}' must be an object")
        unknown = set(flight) - _FLIGHT_KEYS
        if unknown:
            raise InstanceFormatError(f"unknown field '{where}.{sorted(unknown)[0]}'")
        missing = _FLIGHT_KEYS - set(flight)
        if missing:
            raise InstanceFormatError(f"missing field '{where}.{sorted(missing)[0]}'")
        if not isinstance(flight["legs"], list):
            raise InstanceFormatError(f"field '{where}.legs' must be an array")
        legs = []
        for li, leg in enumerate(flight["legs"]):
            leg_where = f"{where}.legs[{li}]"
            if not isinstance(leg, dict):
                raise InstanceFormatError(f"field '{leg_where}' must be an object")
            unknown = set(leg) - _LEG_KEYS
            if unknown:
                raise InstanceFormatError(
                    f"unknown field '{leg_where}.{sorted(unknown)[0]}'"
                )
            missing = _LEG_KEYS - set(leg)
            if missing:
                raise InstanceFormatError(
                    f"missing field '{leg_where}.{sorted(missing)[0]}'"
                )
            legs.append(
                (
                    _require_int(leg["sector"], f"{leg_where}.sector"),
                    _require_int(leg["dwell"], f"{leg_where}.dwell"),
                )
            )
        routes.append(
            Route(
                flight_id=_require_int(flight["id"], f"{where}.id"),
                departure=_require_int(flight["departure"], f"{where}.departure"),
                legs=tuple(legs),
            )
        )

    weights = None
    if "weights" in doc:
        raw = doc["weights"]
        if not isinstance(raw, list) or not all(isinstance(row, list) for row in raw):
            raise InstanceFormatError("field 'weights' must be an array of arrays")
        for ri, row in enumerate(raw):
            for ci, v in enumerate(row):
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise InstanceFormatError(
                        f"field 'weights[{ri}][{ci}]' must be a number"
                    )
        weights = tuple(tuple(float(v) for v in row) for row in raw)

    try:
        return Instance(
            m=m, capacities=capacities, T=T, d=d,
            routes=tuple(routes), objective_weights=weights,
        )
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from exc
