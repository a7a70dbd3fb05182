"""Energy-aware segment-request policies for adaptive-bitrate streaming.

The package turns raw playback power measurements into a consumption
model, applies bandwidth-budgeted request modes on a quality ladder, and
simulates sessions over channel traces to quantify the energy/quality
trade-off of each mode against the energy-saving-off baseline.
"""

from __future__ import annotations

__version__ = "0.1.0"

from ._csvio import ParseError
from .channel import (
    DEFAULT_BANDWIDTH_VALUES,
    DEFAULT_BLOCK_LEN,
    DEFAULT_PERIOD_S,
    ChannelTrace,
    constant,
    load_trace,
    random_blocks,
    serialize_trace,
    staircase,
)
from .ladder import (
    AVC,
    DEFAULT_GAP_RATIO,
    HEVC,
    LADDER_HEADER,
    QualityLadder,
    Representation,
    normalize_codec,
    parse_ladder,
    serialize_ladder,
    validate_ladder,
)
from .measurements import (
    LTE_4G,
    MEASUREMENT_HEADER,
    NR_5G,
    WIFI,
    Combination,
    MeasurementRecord,
    RelativePoint,
    load_records,
    normalize,
    normalize_connection,
    reference_consumption,
    resolution_rank,
)
from .model import (
    PRESETS,
    FitError,
    FitResult,
    ModelParams,
    evaluate,
    fit,
    pearson,
    preset,
    r_squared,
    spearman,
)
from .policy import (
    LIGHT_GAMMA,
    MEDIUM_GAMMA,
    STRICT_GAMMA,
    AdaptiveConfig,
    EnergyMode,
    ModeKind,
    PolicyDecision,
    adaptive_gamma,
    adaptive_mode,
    baseline_select,
    custom_mode,
    light_mode,
    medium_mode,
    off_mode,
    parse_mode,
    select,
    strict_mode,
)
from .prng import Lcg64
from .simulator import (
    DEFAULT_SEGMENT_DURATION_S,
    PERCEPTIBLE_VMAF_DELTA,
    BatteryConfig,
    ComparisonRow,
    ComparisonTable,
    QualityMap,
    SegmentOutcome,
    SessionContext,
    SessionReport,
    compare,
    load_quality_map,
    run_session,
)

__all__ = [
    "__version__",
    "ParseError",
    # ladder
    "AVC",
    "HEVC",
    "LADDER_HEADER",
    "DEFAULT_GAP_RATIO",
    "Representation",
    "QualityLadder",
    "normalize_codec",
    "parse_ladder",
    "serialize_ladder",
    "validate_ladder",
    # measurements
    "WIFI",
    "LTE_4G",
    "NR_5G",
    "MEASUREMENT_HEADER",
    "Combination",
    "MeasurementRecord",
    "RelativePoint",
    "load_records",
    "normalize",
    "normalize_connection",
    "reference_consumption",
    "resolution_rank",
    # model
    "PRESETS",
    "ModelParams",
    "FitResult",
    "FitError",
    "evaluate",
    "fit",
    "preset",
    "pearson",
    "spearman",
    "r_squared",
    # policy
    "LIGHT_GAMMA",
    "MEDIUM_GAMMA",
    "STRICT_GAMMA",
    "ModeKind",
    "AdaptiveConfig",
    "EnergyMode",
    "PolicyDecision",
    "adaptive_gamma",
    "select",
    "baseline_select",
    "parse_mode",
    "off_mode",
    "light_mode",
    "medium_mode",
    "strict_mode",
    "adaptive_mode",
    "custom_mode",
    # channel
    "DEFAULT_PERIOD_S",
    "DEFAULT_BANDWIDTH_VALUES",
    "DEFAULT_BLOCK_LEN",
    "ChannelTrace",
    "constant",
    "staircase",
    "random_blocks",
    "load_trace",
    "serialize_trace",
    "Lcg64",
    # simulator
    "DEFAULT_SEGMENT_DURATION_S",
    "PERCEPTIBLE_VMAF_DELTA",
    "BatteryConfig",
    "QualityMap",
    "load_quality_map",
    "SegmentOutcome",
    "SessionContext",
    "SessionReport",
    "ComparisonRow",
    "ComparisonTable",
    "run_session",
    "compare",
]
