"""Normalization of raw playback measurements into relative energy points.

Raw records pair a requested representation with the average network
bandwidth and average battery current observed while playing it.  Each
(device, connection, codec) group is normalized against the current drawn
by its cheapest representation, yielding dimensionless points
(relative bandwidth, relative consumption) that a single model can fit.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass

from ._csvio import ParseError, data_rows, parse_float, require_positive
from .ladder import normalize_codec

WIFI = "WIFI"
LTE_4G = "LTE_4G"
NR_5G = "NR_5G"

MEASUREMENT_HEADER = [
    "device",
    "connection",
    "codec",
    "resolution",
    "bitrate_bps",
    "avg_bandwidth_bps",
    "avg_current_ma",
]

_CONNECTION_ALIASES = {
    "WIFI": WIFI,
    "WI-FI": WIFI,
    "WLAN": WIFI,
    "4G": LTE_4G,
    "LTE": LTE_4G,
    "LTE_4G": LTE_4G,
    "5G": NR_5G,
    "NR": NR_5G,
    "NR_5G": NR_5G,
}

_LEADING_INT = re.compile(r"(\d+)")


def normalize_connection(value: str) -> str:
    """Canonical uppercase connection name; unknown kinds pass through uppercased."""
    canon = value.strip().upper()
    return _CONNECTION_ALIASES.get(canon, canon)


@dataclass(frozen=True)
class Combination:
    """A (device, connection, codec) measurement group."""

    device: str
    connection: str
    codec: str

    @property
    def label(self) -> str:
        return f"{self.device}/{self.connection}/{self.codec}"


@dataclass(frozen=True)
class MeasurementRecord:
    """One playback measurement: what was requested and what it cost."""

    device: str
    connection: str
    codec: str
    resolution: str
    bitrate: float
    avg_bandwidth: float
    avg_current: float

    def __post_init__(self) -> None:
        if self.bitrate <= 0:
            raise ValueError("bitrate must be positive")
        if self.avg_bandwidth <= 0:
            raise ValueError("avg_bandwidth must be positive")
        if self.avg_current <= 0:
            raise ValueError("avg_current must be positive")

    @property
    def combination(self) -> Combination:
        return Combination(self.device, self.connection, self.codec)


@dataclass(frozen=True)
class RelativePoint:
    """Dimensionless measurement: bandwidth and consumption relative to the group.

    ``bw_rel`` is observed bandwidth over the requested bitrate; ``ec_rel``
    is observed current over the group's reference current.  Points with
    ``bw_rel < 1`` ran below the requested rate and are flagged; they are
    retained but excluded from fitting by default.
    """

    bw_rel: float
    ec_rel: float
    source: Combination

    def __post_init__(self) -> None:
        if self.bw_rel <= 0:
            raise ValueError("bw_rel must be positive")
        if self.ec_rel <= 0:
            raise ValueError("ec_rel must be positive")

    @property
    def flagged(self) -> bool:
        return self.bw_rel < 1.0


def load_records(text: str) -> list[MeasurementRecord]:
    """Parse measurement CSV rows, rejecting malformed input with line numbers."""
    records = []
    for line_no, cells in data_rows(text, MEASUREMENT_HEADER):
        device = cells[0]
        if not device:
            raise ParseError(f"line {line_no}: device must be non-empty")
        bitrate = require_positive(
            parse_float(cells[4], line_no, "bitrate_bps"), line_no, "bitrate_bps"
        )
        bandwidth = require_positive(
            parse_float(cells[5], line_no, "avg_bandwidth_bps"), line_no, "avg_bandwidth_bps"
        )
        current = require_positive(
            parse_float(cells[6], line_no, "avg_current_ma"), line_no, "avg_current_ma"
        )
        records.append(
            MeasurementRecord(
                device=device,
                connection=normalize_connection(cells[1]),
                codec=normalize_codec(cells[2]),
                resolution=cells[3],
                bitrate=bitrate,
                avg_bandwidth=bandwidth,
                avg_current=current,
            )
        )
    return records


def resolution_rank(label: str) -> int | None:
    """Leading integer of a resolution label ('240p' -> 240); None if absent."""
    match = _LEADING_INT.search(label)
    return int(match.group(1)) if match else None


def reference_consumption(records: list[MeasurementRecord], combination: Combination) -> float:
    """Mean current of the group's reference representation.

    The reference is the record set with the group's minimum bitrate; ties
    across distinct resolutions are broken by the lowest parseable
    resolution label.  Averaging tolerates repeated sessions of the same
    representation.

    Raises:
        ValueError: when the group has no records.
    """
    group = [record for record in records if record.combination == combination]
    if not group:
        raise ValueError(f"no records for combination {combination.label!r}")
    floor = min(record.bitrate for record in group)
    candidates = [record for record in group if record.bitrate == floor]
    ranked = [
        (rank, record)
        for record in candidates
        if (rank := resolution_rank(record.resolution)) is not None
    ]
    if ranked:
        best = min(rank for rank, _ in ranked)
        candidates = [record for rank, record in ranked if rank == best]
    if not candidates:  # unreachable for non-empty groups; kept as a guard
        raise ValueError(f"no reference representation in group {combination.label!r}")
    return sum(record.avg_current for record in candidates) / len(candidates)


def normalize(records: list[MeasurementRecord]) -> dict[Combination, list[RelativePoint]]:
    """Convert raw records into per-combination relative points.

    Every record contributes one point; reference records normalize to
    ``ec_rel`` near 1 by construction.  Scaling all currents of a group by
    a common factor leaves its points unchanged.
    """
    grouped: dict[Combination, list[MeasurementRecord]] = defaultdict(list)
    for record in records:
        grouped[record.combination].append(record)
    result: dict[Combination, list[RelativePoint]] = {}
    for combination, group in grouped.items():
        reference = reference_consumption(group, combination)
        result[combination] = [
            RelativePoint(
                bw_rel=record.avg_bandwidth / record.bitrate,
                ec_rel=record.avg_current / reference,
                source=combination,
            )
            for record in group
        ]
    return result
