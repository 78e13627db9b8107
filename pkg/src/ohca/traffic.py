"""Per-cell traffic statistics and the probability vectors built from them."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DegenerateTraffic, DimensionMismatch, EmptyTrace, ZeroPacketCount

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class Sample:
    slot: int
    busy_seconds: float
    packets: int


@dataclass(frozen=True)
class TrafficTrace:
    """Raw observations of one base station, one sample per time slot.

    Parameters
    ----------
    station_id : int
        Cell index in ``[0, M)``.
    samples : tuple of Sample
        Observations with strictly increasing slot indices.
    window_length : float
        Length of every slot in seconds.
    """

    station_id: int
    samples: tuple[Sample, ...]
    window_length: float

    def __post_init__(self):
        if self.window_length <= 0:
            raise ValueError("window_length must be positive")
        prev = None
        for s in self.samples:
            if s.busy_seconds < 0 or s.busy_seconds > self.window_length:
                raise ValueError(
                    f"busy_seconds {s.busy_seconds} outside [0, {self.window_length}]"
                )
            if s.packets < 0:
                raise ValueError("packets must be nonnegative")
            if prev is not None and s.slot <= prev:
                raise ValueError("slot indices must be strictly increasing")
            prev = s.slot


@dataclass(frozen=True)
class BaseStationStats:
    station_id: int
    idle_time: float
    packet_count: int


class ProbabilitySource(enum.Enum):
    IDLE_TIME = "idle_time"
    INVERSE_PACKET_COUNT = "inverse_packet_count"
    EXTERNAL = "external"


@dataclass(frozen=True)
class ProbabilityVector:
    """Normalized per-cell probabilities, indexed by station id."""

    values: tuple[float, ...]
    source: ProbabilitySource = ProbabilitySource.EXTERNAL

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise DimensionMismatch("probability vector is empty")
        if any(not math.isfinite(v) or v < 0 or v > 1 for v in vals):
            raise ValueError(f"probabilities must lie in [0, 1]: {vals}")
        if abs(math.fsum(vals) - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"probabilities sum to {math.fsum(vals)}, not 1")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    @classmethod
    def from_weights(cls, weights: Iterable[float], source=ProbabilitySource.EXTERNAL):
        """Normalize nonnegative weights into a probability vector."""
        w = [float(x) for x in weights]
        total = math.fsum(w)
        if total <= 0:
            raise DegenerateTraffic("weights sum to zero")
        return cls(tuple(x / total for x in w), source)


@dataclass(frozen=True)
class ChannelBounds:
    l_min: int
    l_max: int

    def __post_init__(self):
        if self.l_min < 1:
            raise ValueError("l_min must be a positive integer")
        if self.l_min > self.l_max:
            raise ValueError(f"l_min {self.l_min} exceeds l_max {self.l_max}")


def summarize_trace(trace: TrafficTrace) -> BaseStationStats:
    if not trace.samples:
        raise EmptyTrace(f"station {trace.station_id} has no samples")
    idle = math.fsum(trace.window_length - s.busy_seconds for s in trace.samples)
    packets = sum(s.packets for s in trace.samples)
    return BaseStationStats(trace.station_id, idle, packets)


def idle_time_probabilities(stats: Sequence[BaseStationStats]) -> ProbabilityVector:
    """Share of the total idle time held by each station.

    Raises
    ------
    DegenerateTraffic
        If every station has zero idle time.
    """
    if not stats:
        raise EmptyTrace("no stations")
    idle = [s.idle_time for s in stats]
    if any(t < 0 for t in idle):
        raise ValueError("idle times must be nonnegative")
    total = math.fsum(idle)
    if total <= 0:
        raise DegenerateTraffic("all idle times are zero")
    return ProbabilityVector(tuple(t / total for t in idle), ProbabilitySource.IDLE_TIME)


def inverse_packet_count_probabilities(
    stats: Sequence[BaseStationStats],
) -> ProbabilityVector:
    """Normalized inverse packet counts; busier stations get smaller values."""
    if not stats:
        raise EmptyTrace("no stations")
    for s in stats:
        if s.packet_count <= 0:
            raise ZeroPacketCount(s.station_id)
    inv = [1.0 / s.packet_count for s in stats]
    total = math.fsum(inv)
    return ProbabilityVector(
        tuple(x / total for x in inv), ProbabilitySource.INVERSE_PACKET_COUNT
    )


def estimate_channel_bounds(per_slot_peak_demand: Sequence[int]) -> ChannelBounds:
    """Channel bounds from observed per-slot peak demand, floored at one."""
    if len(per_slot_peak_demand) == 0:
        raise EmptyTrace("no demand samples")
    if any(x < 0 for x in per_slot_peak_demand):
        raise ValueError("demand must be nonnegative")
    l_min = max(1, int(min(per_slot_peak_demand)))
    l_max = max(l_min, int(max(per_slot_peak_demand)))
    return ChannelBounds(l_min, l_max)


def read_trace_csv(path: str | Path, window_length: float) -> list[TrafficTrace]:
    """Read ``station,slot,busy_seconds,packets`` rows into one trace per station.

    Stations are returned in ascending id order; ids must be contiguous from 0.
    """
    rows: dict[int, list[Sample]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"station", "slot", "busy_seconds", "packets"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"trace CSV missing columns: {sorted(missing)}")
        for row in reader:
            st = int(row["station"])
            rows.setdefault(st, []).append(
                Sample(int(row["slot"]), float(row["busy_seconds"]), int(row["packets"]))
            )
    if not rows:
        raise EmptyTrace(f"{path} has no rows")
    ids = sorted(rows)
    if ids != list(range(len(ids))):
        raise ValueError(f"station ids must be 0..M-1, got {ids}")
    return [
        TrafficTrace(st, tuple(sorted(rows[st], key=lambda s: s.slot)), window_length)
        for st in ids
    ]
