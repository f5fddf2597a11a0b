"""Request/response models for the scheduling service.

``InstancePayload`` mirrors the instance file schema exactly (same field
names, unknown keys rejected), so a stored instance document can be posted
as-is.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..model import Instance, Route
from ..rounding import RoundingReport
from ..runner import RunRecord


class LegPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")
    sector: int
    dwell: int


class FlightPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")
    id: int
    departure: int
    legs: list[LegPayload]


class InstancePayload(BaseModel):
    model_config = ConfigDict(extra="forbid")
    m: int
    capacities: list[int]
    T: int
    d: int
    flights: list[FlightPayload]
    weights: Optional[list[list[float]]] = None

    def to_instance(self) -> Instance:
        return Instance(
            m=self.m,
            capacities=tuple(self.capacities),
            T=self.T,
            d=self.d,
            routes=tuple(
                Route(
                    flight_id=f.id,
                    departure=f.departure,
                    legs=tuple((leg.sector, leg.dwell) for leg in f.legs),
                )
                for f in self.flights
            ),
            objective_weights=(
                None if self.weights is None
                else tuple(tuple(row) for row in self.weights)
            ),
        )

    @classmethod
    def from_instance(cls, instance: Instance) -> "InstancePayload":
        return cls(
            m=instance.m,
            capacities=list(instance.capacities),
            T=instance.T,
            d=instance.d,
            flights=[
                FlightPayload(
                    id=r.flight_id,
                    departure=r.departure,
                    legs=[LegPayload(sector=s, dwell=dw) for s, dw in r.legs],
                )
                for r in instance.routes
            ],
            weights=(
                None if instance.objective_weights is None
                else [list(row) for row in instance.objective_weights]
            ),
        )


class SolveSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")
    gap_tol: float = 1e-7
    max_iters: int = 100
    samples: int = 100
    seed: int = 0  # rounding stream seed
    perturb: Optional[float] = None
    perturb_seed: int = 0
    budget: int = 10_000_000


class GenerateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    m: int
    n: int
    T: int
    d: int
    capacity_range: tuple[int, int] = (1, 3)
    route_length_range: tuple[int, int] = (3, 8)
    seed: int = 0


class GenerateResponse(BaseModel):
    instance: InstancePayload


class RunRecordPayload(BaseModel):
    m: int
    n: int
    T: int
    d: int
    seed: Optional[int] = None
    mode: str
    wall_s: float
    sdp_bound: Optional[float] = None
    oracle: Optional[float] = None
    best_rounded: Optional[float] = None
    status: str

    @classmethod
    def from_record(cls, record: RunRecord) -> "RunRecordPayload":
        return cls(**record.__dict__)

    def to_record(self) -> RunRecord:
        return RunRecord(**self.model_dump())


class HistogramBin(BaseModel):
    delay: float
    count: int


class RoundingPayload(BaseModel):
    samples_drawn: int
    feasible_count: int
    best_delay: Optional[float] = None
    best_schedule: Optional[list[int]] = None
    histogram: list[HistogramBin] = Field(default_factory=list)

    @classmethod
    def from_report(cls, report: RoundingReport) -> "RoundingPayload":
        return cls(
            samples_drawn=report.samples_drawn,
            feasible_count=report.feasible_count,
            best_delay=report.best_delay,
            best_schedule=(
                None if report.best is None else list(report.best.delays)
            ),
            histogram=[
                HistogramBin(delay=k, count=v)
                for k, v in sorted(report.delay_histogram.items())
            ],
        )


class SolveRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    instance: InstancePayload
    mode: Literal["exact", "sdp", "sdp+round"] = "sdp"
    settings: SolveSettings = Field(default_factory=SolveSettings)


class SolveResponse(BaseModel):
    record: RunRecordPayload
    schedule: Optional[list[int]] = None
    x: Optional[list[float]] = None
    schur_residual: Optional[float] = None
    rank_one_gap: Optional[float] = None  # max |X - xx'|: 0 means provably tight
    rounding: Optional[RoundingPayload] = None
    certified: bool = False


class RoundRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    instance: InstancePayload
    settings: SolveSettings = Field(default_factory=SolveSettings)


class RoundResponse(BaseModel):
    record: RunRecordPayload
    rounding: Optional[RoundingPayload] = None  # absent when the solve failed
    certified: bool
    histogram_csv: str


class BenchRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    n_values: list[int]
    seeds: list[int]
    modes: list[Literal["exact", "sdp", "sdp+round"]]
    m: int = 50
    T: int = 30
    d: int = 2
    capacity_range: tuple[int, int] = (1, 3)
    route_length_range: tuple[int, int] = (3, 8)
    settings: SolveSettings = Field(default_factory=SolveSettings)


class BenchResponse(BaseModel):
    records: list[RunRecordPayload]
    csv: str
