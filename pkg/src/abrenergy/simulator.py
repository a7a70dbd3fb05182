"""Session simulation: a request mode driven over a channel trace.

One session walks a bandwidth trace segment by segment, applies the
request policy, prices each download with the consumption model, and
optionally drains a battery.  Sessions under different modes but identical
conditions are then compared against the energy-saving-off baseline.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from statistics import fmean

from ._csvio import ParseError, data_rows, parse_float
from .channel import ChannelTrace
from .ladder import QualityLadder, Representation
from .model import ModelParams, evaluate
from .policy import AdaptiveConfig, EnergyMode, ModeKind, PolicyDecision, select

DEFAULT_SEGMENT_DURATION_S = 6.0

#: Mean-opinion deltas below this many VMAF points are typically not noticed.
PERCEPTIBLE_VMAF_DELTA = 6.0

QUALITY_HEADER = ["name", "psnr", "ssim", "vmaf"]
QUALITY_METRICS = ("psnr", "ssim", "vmaf")

COMPARISON_CSV_HEADER = "channel,mode,energy_pct,psnr,d_psnr,ssim,d_ssim,vmaf,d_vmaf"


@dataclass(frozen=True)
class BatteryConfig:
    """Battery drained by the session; the reference current anchors the model.

    ``reference_current_ma`` is the absolute draw corresponding to relative
    consumption 1.0, so a segment costs
    ``reference_current_ma * ec_rel * segment_duration`` milliamp-seconds.
    """

    capacity_mah: float
    reference_current_ma: float
    initial_soc: float = 100.0

    def __post_init__(self) -> None:
        if self.capacity_mah <= 0:
            raise ValueError(f"capacity_mah must be positive, got {self.capacity_mah}")
        if self.reference_current_ma <= 0:
            raise ValueError(
                f"reference_current_ma must be positive, got {self.reference_current_ma}"
            )
        if not 0.0 < self.initial_soc <= 100.0:
            raise ValueError(f"initial_soc must be within (0, 100], got {self.initial_soc}")


@dataclass(frozen=True)
class QualityMap:
    """Per-representation quality scores, by metric.

    A metric is either absent or scored for every representation of the
    ladder in use; partial coverage is rejected at session start.
    """

    psnr: Mapping[str, float] | None = None
    ssim: Mapping[str, float] | None = None
    vmaf: Mapping[str, float] | None = None

    def metrics(self) -> dict[str, Mapping[str, float]]:
        present = {}
        for metric in QUALITY_METRICS:
            scores = getattr(self, metric)
            if scores is not None:
                present[metric] = scores
        return present

    def validate_for(self, ladder: QualityLadder) -> None:
        for metric, scores in self.metrics().items():
            missing = [rep.name for rep in ladder if rep.name not in scores]
            if missing:
                raise ValueError(
                    f"quality metric {metric!r} is missing scores for: {', '.join(missing)}"
                )


def load_quality_map(text: str) -> QualityMap:
    """Parse quality CSV (``name,psnr,ssim,vmaf``); empty cells mean unscored."""
    columns: dict[str, dict[str, float]] = {metric: {} for metric in QUALITY_METRICS}
    names: dict[str, int] = {}
    for line_no, cells in data_rows(text, QUALITY_HEADER):
        name = cells[0]
        if not name:
            raise ParseError(f"line {line_no}: name must be non-empty")
        if name in names:
            raise ParseError(
                f"line {line_no}: duplicate name {name!r} (first seen on line {names[name]})"
            )
        names[name] = line_no
        for metric, cell in zip(QUALITY_METRICS, cells[1:]):
            if cell:
                columns[metric][name] = parse_float(cell, line_no, metric)
    return QualityMap(
        psnr=columns["psnr"] or None,
        ssim=columns["ssim"] or None,
        vmaf=columns["vmaf"] or None,
    )


@dataclass(frozen=True)
class SessionContext:
    """What a report was computed under; compared modes must share it."""

    params: ModelParams
    segment_duration: float
    ladder_digest: str
    trace_digest: str


def _ladder_digest(ladder: QualityLadder) -> str:
    payload = ";".join(
        f"{rep.name},{rep.width},{rep.height},{rep.label},{rep.bitrate},{rep.codec}"
        for rep in ladder
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _trace_digest(trace: ChannelTrace) -> str:
    payload = repr(trace.period_duration) + "|" + ",".join(repr(b) for b in trace.bandwidths)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SegmentOutcome:
    """One simulated segment request and its cost."""

    index: int
    bandwidth: float
    gamma_used: float
    decision: PolicyDecision
    bw_rel: float
    ec_rel: float
    download_time: float
    soc_after: float | None

    @property
    def selected(self) -> Representation:
        return self.decision.selected

    @property
    def stalled(self) -> bool:
        # bitrate above capacity means the segment cannot arrive in time
        return self.decision.selected.bitrate > self.bandwidth


@dataclass(frozen=True)
class SessionReport:
    """Aggregates (and optionally the per-segment record) of one session."""

    mode: EnergyMode
    context: SessionContext
    ladder: QualityLadder
    n_segments: int
    mean_ec_rel: float
    mean_bitrate: float
    mean_quality: dict[str, float] | None
    stall_count: int
    fallback_count: int
    final_soc: float | None
    soc_depleted: bool
    per_segment: tuple[SegmentOutcome, ...] | None

    def to_json_dict(self) -> dict:
        mode_dict: dict = {"kind": self.mode.kind.value, "gamma": self.mode.gamma}
        if self.mode.adaptive is not None:
            mode_dict["adaptive"] = {
                "high_threshold": self.mode.adaptive.high_threshold,
                "low_threshold": self.mode.adaptive.low_threshold,
            }
        segments = None
        if self.per_segment is not None:
            segments = [
                {
                    "index": o.index,
                    "bandwidth_bps": o.bandwidth,
                    "gamma": o.gamma_used,
                    "selected": o.selected.name,
                    "threshold_bps": o.decision.threshold,
                    "candidates": o.decision.candidate_set_size,
                    "fallback": o.decision.fallback_used,
                    "stalled": o.stalled,
                    "bw_rel": o.bw_rel,
                    "ec_rel": o.ec_rel,
                    "download_time_s": o.download_time,
                    "soc_after": o.soc_after,
                }
                for o in self.per_segment
            ]
        return {
            "mode": mode_dict,
            "context": {
                "params": {
                    "a": self.context.params.a,
                    "b": self.context.params.b,
                    "c": self.context.params.c,
                },
                "segment_duration_s": self.context.segment_duration,
                "ladder_digest": self.context.ladder_digest,
                "trace_digest": self.context.trace_digest,
            },
            "ladder": [
                {
                    "name": rep.name,
                    "width": rep.width,
                    "height": rep.height,
                    "label": rep.label,
                    "bitrate_bps": rep.bitrate,
                    "codec": rep.codec,
                }
                for rep in self.ladder
            ],
            "n_segments": self.n_segments,
            "mean_ec_rel": self.mean_ec_rel,
            "mean_bitrate_bps": self.mean_bitrate,
            "mean_quality": self.mean_quality,
            "stall_count": self.stall_count,
            "fallback_count": self.fallback_count,
            "final_soc": self.final_soc,
            "soc_depleted": self.soc_depleted,
            "per_segment": segments,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SessionReport":
        mode_dict = data["mode"]
        adaptive = None
        if mode_dict.get("adaptive"):
            adaptive = AdaptiveConfig(
                high_threshold=mode_dict["adaptive"]["high_threshold"],
                low_threshold=mode_dict["adaptive"]["low_threshold"],
            )
        mode = EnergyMode(ModeKind(mode_dict["kind"]), mode_dict["gamma"], adaptive)
        ladder = QualityLadder(
            tuple(
                Representation(
                    name=row["name"],
                    width=row["width"],
                    height=row["height"],
                    label=row["label"],
                    bitrate=row["bitrate_bps"],
                    codec=row["codec"],
                )
                for row in data["ladder"]
            )
        )
        by_name = {rep.name: rep for rep in ladder}
        ctx = data["context"]
        context = SessionContext(
            params=ModelParams(ctx["params"]["a"], ctx["params"]["b"], ctx["params"]["c"]),
            segment_duration=ctx["segment_duration_s"],
            ladder_digest=ctx["ladder_digest"],
            trace_digest=ctx["trace_digest"],
        )
        segments = None
        if data.get("per_segment") is not None:
            segments = tuple(
                SegmentOutcome(
                    index=row["index"],
                    bandwidth=row["bandwidth_bps"],
                    gamma_used=row["gamma"],
                    decision=PolicyDecision(
                        selected=by_name[row["selected"]],
                        threshold=row["threshold_bps"],
                        candidate_set_size=row["candidates"],
                        fallback_used=row["fallback"],
                    ),
                    bw_rel=row["bw_rel"],
                    ec_rel=row["ec_rel"],
                    download_time=row["download_time_s"],
                    soc_after=row["soc_after"],
                )
                for row in data["per_segment"]
            )
        return cls(
            mode=mode,
            context=context,
            ladder=ladder,
            n_segments=data["n_segments"],
            mean_ec_rel=data["mean_ec_rel"],
            mean_bitrate=data["mean_bitrate_bps"],
            mean_quality=data["mean_quality"],
            stall_count=data["stall_count"],
            fallback_count=data["fallback_count"],
            final_soc=data["final_soc"],
            soc_depleted=data["soc_depleted"],
            per_segment=segments,
        )


def run_session(
    ladder: QualityLadder,
    trace: ChannelTrace,
    mode: EnergyMode,
    params: ModelParams,
    battery: BatteryConfig | None = None,
    quality: QualityMap | None = None,
    segment_duration: float = DEFAULT_SEGMENT_DURATION_S,
    include_segments: bool = True,
) -> SessionReport:
    """Simulate one playback session.

    Each trace period carries one segment request.  The mode's intensity
    (re-evaluated per segment for the adaptive kind) budgets the selection;
    the model prices the download at the resulting relative bandwidth; the
    battery, when configured, drains linearly in the modeled current.  The
    session stops early if the battery empties.

    Args:
        ladder: requestable representations.
        trace: per-period available bandwidth; its period duration must
            equal ``segment_duration``.
        mode: request mode to apply.
        params: consumption model parameters.
        battery: optional battery; required for the adaptive mode.
        quality: optional per-representation scores, validated against the
            ladder up front.
        segment_duration: seconds of media per segment.
        include_segments: keep the per-segment record on the report.

    Returns:
        SessionReport for the segments actually played.

    Raises:
        ValueError: on mismatched durations, adaptive mode without a
            battery, or quality coverage gaps.
    """
    if segment_duration <= 0:
        raise ValueError(f"segment_duration must be positive, got {segment_duration}")
    if trace.period_duration != segment_duration:
        raise ValueError(
            f"trace period duration {trace.period_duration} differs from"
            f" segment duration {segment_duration}"
        )
    if mode.kind is ModeKind.ADAPTIVE and battery is None:
        raise ValueError("adaptive mode requires a battery configuration")
    if quality is not None:
        quality.validate_for(ladder)

    soc = battery.initial_soc if battery is not None else None
    outcomes: list[SegmentOutcome] = []
    depleted = False
    for index, bandwidth in enumerate(trace.bandwidths):
        gamma = mode.gamma_for(soc)
        decision = select(ladder, bandwidth, gamma)
        bw_rel = bandwidth / decision.selected.bitrate
        ec_rel = evaluate(params, bw_rel)
        download_time = decision.selected.bitrate * segment_duration / bandwidth
        if battery is not None:
            drain = (
                100.0
                * battery.reference_current_ma
                * ec_rel
                * segment_duration
                / 3600.0
                / battery.capacity_mah
            )
            soc = max(soc - drain, 0.0)
        outcomes.append(
            SegmentOutcome(
                index=index,
                bandwidth=bandwidth,
                gamma_used=gamma,
                decision=decision,
                bw_rel=bw_rel,
                ec_rel=ec_rel,
                download_time=download_time,
                soc_after=soc,
            )
        )
        if battery is not None and soc <= 0.0:
            depleted = True
            break

    mean_quality = None
    if quality is not None:
        mean_quality = {
            metric: fmean(scores[o.selected.name] for o in outcomes)
            for metric, scores in quality.metrics().items()
        }
    context = SessionContext(
        params=params,
        segment_duration=segment_duration,
        ladder_digest=_ladder_digest(ladder),
        trace_digest=_trace_digest(trace),
    )
    return SessionReport(
        mode=mode,
        context=context,
        ladder=ladder,
        n_segments=len(outcomes),
        mean_ec_rel=fmean(o.ec_rel for o in outcomes),
        mean_bitrate=fmean(o.selected.bitrate for o in outcomes),
        mean_quality=mean_quality,
        stall_count=sum(1 for o in outcomes if o.stalled),
        fallback_count=sum(1 for o in outcomes if o.decision.fallback_used),
        final_soc=soc,
        soc_depleted=depleted,
        per_segment=tuple(outcomes) if include_segments else None,
    )


@dataclass(frozen=True)
class ComparisonRow:
    """One mode's standing against the baseline."""

    channel: str
    mode_label: str
    energy_pct: float
    quality: dict[str, float] = field(default_factory=dict)
    quality_delta: dict[str, float] = field(default_factory=dict)
    perceptible: bool = False

    def to_json_dict(self) -> dict:
        return {
            "channel": self.channel,
            "mode": self.mode_label,
            "energy_pct": self.energy_pct,
            "quality": self.quality,
            "quality_delta": self.quality_delta,
            "perceptible": self.perceptible,
        }


@dataclass(frozen=True)
class ComparisonTable:
    """Baseline-first rows of energy and quality standings for one channel."""

    channel: str
    rows: tuple[ComparisonRow, ...]

    def to_json_dict(self) -> dict:
        return {"channel": self.channel, "rows": [row.to_json_dict() for row in self.rows]}

    def to_csv(self, provenance: dict | None = None) -> str:
        buffer = io.StringIO()
        if provenance is not None:
            buffer.write(
                "# provenance: " + json.dumps(provenance, separators=(",", ":")) + "\n"
            )
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(COMPARISON_CSV_HEADER.split(","))
        for row in self.rows:
            cells = [row.channel, row.mode_label, f"{row.energy_pct:.2f}"]
            for metric, fmt in (("psnr", ".2f"), ("ssim", ".4f"), ("vmaf", ".2f")):
                value = row.quality.get(metric)
                delta = row.quality_delta.get(metric)
                cells.append("" if value is None else format(value, fmt))
                cells.append("" if delta is None else format(delta, fmt))
            writer.writerow(cells)
        return buffer.getvalue()


def _quality_means(report: SessionReport, quality: QualityMap | None) -> dict[str, float] | None:
    if report.mean_quality is not None:
        return report.mean_quality
    if quality is None or report.per_segment is None:
        return None
    quality.validate_for(report.ladder)
    return {
        metric: fmean(scores[o.selected.name] for o in report.per_segment)
        for metric, scores in quality.metrics().items()
    }


def compare(
    baseline: SessionReport,
    others: list[SessionReport],
    quality: QualityMap | None = None,
    channel: str = "trace",
) -> ComparisonTable:
    """Rank modes against the baseline on energy and quality.

    ``energy_pct`` is each mode's mean relative consumption as a percentage
    of the baseline's.  Quality deltas are baseline minus mode for every
    metric both rows carry; a VMAF drop above ``PERCEPTIBLE_VMAF_DELTA``
    marks the row as perceptible.  When a report was produced without
    quality but kept its per-segment record, ``quality`` supplies the
    scores after the fact.

    Raises:
        ValueError: when any report ran under a different session context
            than the baseline.
    """
    for report in others:
        if report.context != baseline.context:
            raise ValueError(
                "mismatched session contexts:"
                f" {report.mode.label} was not run under the baseline's conditions"
            )
    if baseline.mean_ec_rel <= 0:
        raise ValueError("baseline mean consumption must be positive")

    base_quality = _quality_means(baseline, quality) or {}
    rows = [
        ComparisonRow(
            channel=channel,
            mode_label=baseline.mode.label,
            energy_pct=100.0,
            quality=dict(base_quality),
            quality_delta={metric: 0.0 for metric in base_quality},
            perceptible=False,
        )
    ]
    for report in others:
        mode_quality = _quality_means(report, quality) or {}
        deltas = {
            metric: base_quality[metric] - mode_quality[metric]
            for metric in base_quality
            if metric in mode_quality
        }
        rows.append(
            ComparisonRow(
                channel=channel,
                mode_label=report.mode.label,
                energy_pct=100.0 * report.mean_ec_rel / baseline.mean_ec_rel,
                quality=mode_quality,
                quality_delta=deltas,
                perceptible=deltas.get("vmaf", 0.0) > PERCEPTIBLE_VMAF_DELTA,
            )
        )
    return ComparisonTable(channel=channel, rows=tuple(rows))
