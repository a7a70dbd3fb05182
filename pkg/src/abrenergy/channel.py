"""Channel behaviors: per-period available-bandwidth traces.

A trace fixes the bandwidth the client sees during each request period.
Four generators cover the stock behaviors (constant capacity, a triangular
staircase sweep, and block-random capacity), and arbitrary measured traces
load from CSV.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from ._csvio import ParseError, data_rows, parse_float, parse_int
from .prng import Lcg64

DEFAULT_PERIOD_S = 6.0

#: Stock bandwidth menu (bits per second) for staircase and random behaviors.
DEFAULT_BANDWIDTH_VALUES: tuple[float, ...] = tuple(
    float(mbps) * 1e6 for mbps in (1, 4, 7, 10, 13, 16, 19, 22)
)

DEFAULT_BLOCK_LEN = 10

TRACE_HEADER = ["period", "bandwidth_bps"]


@dataclass(frozen=True)
class ChannelTrace:
    """Bandwidth per period, each period lasting ``period_duration`` seconds."""

    period_duration: float
    bandwidths: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.period_duration <= 0:
            raise ValueError(f"period_duration must be positive, got {self.period_duration}")
        if not self.bandwidths:
            raise ValueError("trace must contain at least one period")
        for i, bandwidth in enumerate(self.bandwidths):
            if bandwidth <= 0:
                raise ValueError(f"period {i}: bandwidth must be positive, got {bandwidth}")

    def __len__(self) -> int:
        return len(self.bandwidths)


def _positive_count(n_periods: int) -> int:
    if n_periods < 1:
        raise ValueError(f"n_periods must be at least 1, got {n_periods}")
    return n_periods


def constant(
    bandwidth: float, n_periods: int, period_duration: float = DEFAULT_PERIOD_S
) -> ChannelTrace:
    """Fixed capacity for the whole session."""
    _positive_count(n_periods)
    return ChannelTrace(period_duration, (float(bandwidth),) * n_periods)


def staircase(
    values: Sequence[float],
    n_periods: int,
    period_duration: float = DEFAULT_PERIOD_S,
) -> ChannelTrace:
    """Triangular sweep over ``values``: up to the maximum, back down to the
    minimum, then the sweep starts over from the minimum.

    The descent reaches the lowest value and the restart begins there, so
    the minimum appears twice at each cycle boundary; the cycle length is
    ``2 * len(values) - 1``.

    Args:
        values: strictly increasing bandwidths, at least two.
        n_periods: total periods to emit.
        period_duration: seconds per period.
    """
    _positive_count(n_periods)
    vals = [float(v) for v in values]
    if len(vals) < 2:
        raise ValueError(f"staircase needs at least two values, got {len(vals)}")
    for lower, upper in zip(vals, vals[1:]):
        if upper <= lower:
            raise ValueError("staircase values must be strictly increasing")
    cycle = vals + vals[-2::-1]
    return ChannelTrace(
        period_duration,
        tuple(cycle[i % len(cycle)] for i in range(n_periods)),
    )


def random_blocks(
    values: Sequence[float],
    n_periods: int,
    seed: int,
    block_len: int = DEFAULT_BLOCK_LEN,
    period_duration: float = DEFAULT_PERIOD_S,
) -> ChannelTrace:
    """Capacity redrawn uniformly from ``values`` every ``block_len`` periods.

    Draws come from the pinned 64-bit generator, so a (values, seed,
    block_len) triple always produces the same trace.
    """
    _positive_count(n_periods)
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("random_blocks needs at least one value")
    for v in vals:
        if v <= 0:
            raise ValueError(f"bandwidth values must be positive, got {v}")
    if block_len < 1:
        raise ValueError(f"block_len must be at least 1, got {block_len}")
    rng = Lcg64(seed)
    bandwidths: list[float] = []
    while len(bandwidths) < n_periods:
        value = vals[rng.next_index(len(vals))]
        bandwidths.extend([value] * block_len)
    return ChannelTrace(period_duration, tuple(bandwidths[:n_periods]))


def load_trace(text: str, period_duration: float = DEFAULT_PERIOD_S) -> ChannelTrace:
    """Parse a trace CSV (``period,bandwidth_bps``).

    Rows may appear out of order but must cover periods 0..n-1 exactly;
    gaps, duplicates, and non-positive bandwidths are rejected with line
    numbers.
    """
    entries: dict[int, float] = {}
    lines: dict[int, int] = {}
    for line_no, cells in data_rows(text, TRACE_HEADER):
        period = parse_int(cells[0], line_no, "period")
        bandwidth = parse_float(cells[1], line_no, "bandwidth_bps")
        if period < 0:
            raise ParseError(f"line {line_no}: period must be non-negative, got {period}")
        if bandwidth <= 0:
            raise ParseError(
                f"line {line_no}: bandwidth_bps must be positive, got {bandwidth}"
            )
        if period in entries:
            raise ParseError(
                f"line {line_no}: duplicate period {period}"
                f" (first seen on line {lines[period]})"
            )
        entries[period] = bandwidth
        lines[period] = line_no
    if not entries:
        raise ParseError("trace contains no periods")
    for expected in range(len(entries)):
        if expected not in entries:
            raise ParseError(f"gap in period indices: period {expected} missing")
    return ChannelTrace(
        period_duration,
        tuple(entries[i] for i in range(len(entries))),
    )


def serialize_trace(trace: ChannelTrace) -> str:
    """Render a trace back to CSV; integral bandwidths round-trip exactly."""
    lines = [",".join(TRACE_HEADER)]
    for period, bandwidth in enumerate(trace.bandwidths):
        if bandwidth == int(bandwidth):
            rendered = str(int(bandwidth))
        else:
            rendered = repr(bandwidth)
        lines.append(f"{period},{rendered}")
    return "\n".join(lines) + "\n"
