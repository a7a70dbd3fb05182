"""Command-line front end: normalize, fit, simulate, compare.

Every output carries a machine-readable provenance block (tool version,
subcommand, config echo, seed) so a result can be regenerated from the
output alone.  Runs are deterministic: identical invocations produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import __version__
from ._csvio import ParseError
from .channel import (
    DEFAULT_BANDWIDTH_VALUES,
    DEFAULT_BLOCK_LEN,
    ChannelTrace,
    constant,
    load_trace,
    random_blocks,
    serialize_trace,
    staircase,
)
from .ladder import parse_ladder
from .measurements import load_records, normalize, reference_consumption
from .model import FitError, ModelParams, fit, preset
from .policy import (
    AdaptiveConfig,
    adaptive_mode,
    light_mode,
    medium_mode,
    off_mode,
    parse_mode,
    strict_mode,
)
from .simulator import (
    BatteryConfig,
    SessionReport,
    compare,
    load_quality_map,
    run_session,
)

DEFAULT_SEGMENTS = 360

_BANDWIDTH_RE = re.compile(r"([0-9]*\.?[0-9]+)([kKmMgG]?)")
_SCALES = {"": 1.0, "k": 1e3, "m": 1e6, "g": 1e9}


def parse_bandwidth(token: str) -> float:
    """Bandwidth in bps from '22M', '650k', or a plain number."""
    match = _BANDWIDTH_RE.fullmatch(token.strip())
    if not match:
        raise ValueError(f"invalid bandwidth {token!r}")
    value = float(match.group(1)) * _SCALES[match.group(2).lower()]
    if value <= 0:
        raise ValueError(f"bandwidth must be positive, got {token!r}")
    return value


def _parse_random_options(rest: str) -> tuple[list[float] | None, int, int]:
    values: list[str] | None = None
    collecting: list[str] | None = None
    block = DEFAULT_BLOCK_LEN
    seed = 0
    for token in rest.split(",") if rest else []:
        token = token.strip()
        if "=" in token:
            key, _, raw = token.partition("=")
            key = key.strip().lower()
            if key == "values":
                values = [raw]
                collecting = values
            elif key == "block":
                block = int(raw)
                collecting = None
            elif key == "seed":
                seed = int(raw)
                collecting = None
            else:
                raise ValueError(f"unknown random-channel option {key!r}")
        elif collecting is not None:
            collecting.append(token)
        elif token:
            raise ValueError(f"unexpected token {token!r} in random channel spec")
    parsed = [parse_bandwidth(v) for v in values] if values is not None else None
    return parsed, block, seed


def parse_channel_spec(
    spec: str, n_segments: int | None, segment_duration: float
) -> tuple[ChannelTrace, dict]:
    """Build a trace from the channel mini-grammar.

    Forms: ``constant:<bw>``, ``staircase[:<v1,v2,...>]``,
    ``random[:values=<...>,block=<n>,seed=<n>]``, ``trace:<path>``.
    Bandwidths accept k/M/G suffixes.  Generated kinds default to 360
    periods; a trace file supplies its own length (``--segments`` may
    truncate it).

    Returns:
        (trace, descriptor) where the descriptor echoes the resolved
        configuration for provenance.
    """
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    rest = rest.strip()
    count = n_segments if n_segments is not None else DEFAULT_SEGMENTS
    if kind == "constant":
        if not rest:
            raise ValueError("constant channel needs a bandwidth, e.g. constant:22M")
        bandwidth = parse_bandwidth(rest)
        trace = constant(bandwidth, count, segment_duration)
        return trace, {"kind": "constant", "bandwidth_bps": bandwidth, "periods": count}
    if kind == "staircase":
        values = (
            [parse_bandwidth(v) for v in rest.split(",")]
            if rest
            else list(DEFAULT_BANDWIDTH_VALUES)
        )
        trace = staircase(values, count, segment_duration)
        return trace, {"kind": "staircase", "values_bps": values, "periods": count}
    if kind == "random":
        values, block, seed = _parse_random_options(rest)
        if values is None:
            values = list(DEFAULT_BANDWIDTH_VALUES)
        trace = random_blocks(values, count, seed, block, segment_duration)
        return trace, {
            "kind": "random",
            "values_bps": values,
            "block": block,
            "seed": seed,
            "periods": count,
        }
    if kind == "trace":
        if not rest:
            raise ValueError("trace channel needs a file path, e.g. trace:capture.csv")
        trace = load_trace(Path(rest).read_text(), segment_duration)
        if n_segments is not None:
            if n_segments > len(trace):
                raise ValueError(
                    f"trace {rest!r} has only {len(trace)} periods, {n_segments} requested"
                )
            trace = ChannelTrace(trace.period_duration, trace.bandwidths[:n_segments])
        return trace, {"kind": "trace", "path": rest, "periods": len(trace)}
    raise ValueError(
        f"unknown channel kind {kind!r}; expected constant, staircase, random or trace"
    )


def parse_params_spec(spec: str) -> tuple[ModelParams, dict]:
    """Model parameters from a preset label, ``a=..,b=..[,c=..]``, or
    ``fit:<path>[#<combination>]``."""
    spec = spec.strip()
    if spec.lower().startswith("fit:"):
        ref = spec[4:]
        path, _, combination = ref.partition("#")
        fits = json.loads(Path(path).read_text())["fits"]
        if combination:
            matches = [f for f in fits if f["combination"] == combination]
            if not matches:
                known = ", ".join(f["combination"] for f in fits)
                raise ValueError(
                    f"no fit for combination {combination!r} in {path!r}; available: {known}"
                )
            entry = matches[0]
        elif len(fits) == 1:
            entry = fits[0]
        else:
            known = ", ".join(f["combination"] for f in fits)
            raise ValueError(
                f"{path!r} holds {len(fits)} fits; select one with"
                f" fit:{path}#<combination> (available: {known})"
            )
        params = ModelParams(entry["a"], entry["b"], entry["c"])
        return params, {"source": "fit", "path": path, "combination": entry["combination"]}
    if "=" in spec:
        fields = {}
        for token in spec.split(","):
            key, _, raw = token.partition("=")
            key = key.strip().lower()
            if key not in ("a", "b", "c") or not raw:
                raise ValueError(f"invalid parameter assignment {token!r}")
            fields[key] = float(raw)
        if "a" not in fields or "b" not in fields:
            raise ValueError("explicit parameters need at least a=<value>,b=<value>")
        params = ModelParams(fields["a"], fields["b"], fields.get("c", 1.0))
        return params, {"source": "explicit", "a": params.a, "b": params.b, "c": params.c}
    params = preset(spec)
    return params, {"source": "preset", "label": spec}


def _provenance(subcommand: str, config: dict) -> dict:
    return {
        "tool": "abrenergy",
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
    }


def _write_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _write_text(text: str, path: str) -> None:
    Path(path).write_text(text)


def _cmd_normalize(args: argparse.Namespace) -> int:
    records = load_records(Path(args.input).read_text())
    groups = normalize(records)
    combinations = []
    for combination in sorted(groups, key=lambda c: c.label):
        points = groups[combination]
        combinations.append(
            {
                "combination": combination.label,
                "reference_current_ma": reference_consumption(records, combination),
                "n_points": len(points),
                "n_flagged": sum(1 for p in points if p.flagged),
                "points": [
                    {"bw_rel": p.bw_rel, "ec_rel": p.ec_rel, "flagged": p.flagged}
                    for p in points
                ],
            }
        )
    payload = {
        "provenance": _provenance("normalize", {"input": args.input}),
        "combinations": combinations,
    }
    _write_json(payload, args.output)
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    records = load_records(Path(args.input).read_text())
    groups = normalize(records)
    fix_c = None if args.free_c else args.fix_c
    fits = []
    notes = []
    for combination in sorted(groups, key=lambda c: c.label):
        result = fit(groups[combination], fix_c=fix_c, include_flagged=args.include_flagged)
        fits.append(result.to_json_dict(combination.label))
        notes.extend(f"{combination.label}: {d}" for d in result.diagnostics)
    if len(groups) > 1:
        pooled = [point for points in groups.values() for point in points]
        result = fit(pooled, fix_c=fix_c, include_flagged=args.include_flagged)
        fits.append(result.to_json_dict("overall"))
        notes.extend(f"overall: {d}" for d in result.diagnostics)
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    payload = {
        "provenance": _provenance(
            "fit",
            {
                "input": args.input,
                "fix_c": fix_c,
                "include_flagged": args.include_flagged,
            },
        ),
        "fits": fits,
    }
    _write_json(payload, args.output)
    return 0


def _battery_from_args(args: argparse.Namespace) -> BatteryConfig | None:
    given = (args.battery_capacity_mah is not None, args.reference_current_ma is not None)
    if not any(given):
        return None
    if not all(given):
        raise ValueError(
            "battery needs both --battery-capacity-mah and --reference-current-ma"
        )
    return BatteryConfig(
        capacity_mah=args.battery_capacity_mah,
        reference_current_ma=args.reference_current_ma,
        initial_soc=args.initial_soc,
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    ladder = parse_ladder(Path(args.ladder).read_text())
    trace, channel_desc = parse_channel_spec(args.channel, args.segments, args.segment_duration)
    params, params_desc = parse_params_spec(args.params)
    battery = _battery_from_args(args)
    quality = load_quality_map(Path(args.quality).read_text()) if args.quality else None
    adaptive = AdaptiveConfig(args.adaptive_high, args.adaptive_low)

    config = {
        "ladder": args.ladder,
        "channel": channel_desc,
        "params": params_desc,
        "mode": args.mode,
        "segments": len(trace),
        "segment_duration_s": args.segment_duration,
    }
    if args.gamma is not None:
        config["gamma"] = args.gamma
    if battery is not None:
        config["battery"] = {
            "capacity_mah": battery.capacity_mah,
            "reference_current_ma": battery.reference_current_ma,
            "initial_soc": battery.initial_soc,
        }
    if args.quality:
        config["quality"] = args.quality
    provenance = _provenance("simulate", config)

    if args.dump_trace:
        header = "# provenance: " + json.dumps(provenance, separators=(",", ":")) + "\n"
        _write_text(header + serialize_trace(trace), args.dump_trace)

    mode_name = args.mode.strip().lower()
    if mode_name == "all":
        modes = [off_mode(), light_mode(), medium_mode(), strict_mode()]
        skipped = []
        if battery is not None:
            modes.append(adaptive_mode(adaptive))
        else:
            skipped.append("adaptive: battery not configured")
        reports = [
            run_session(
                ladder,
                trace,
                mode,
                params,
                battery=battery,
                quality=quality,
                segment_duration=args.segment_duration,
            )
            for mode in modes
        ]
        table = compare(reports[0], reports[1:], quality=quality, channel=args.channel)
        payload = {
            "provenance": provenance,
            "comparison": table.to_json_dict(),
        }
        if skipped:
            payload["skipped"] = skipped
        _write_json(payload, args.output)
        if args.csv:
            _write_text(table.to_csv(provenance), args.csv)
        if args.output:  # short readable summary when JSON went to a file
            for row in table.rows:
                print(f"{row.mode_label:>18}: {row.energy_pct:7.2f}% energy")
        return 0

    if args.gamma is not None and mode_name != "custom":
        raise ValueError("--gamma applies to --mode custom only")
    mode = parse_mode(args.mode, gamma=args.gamma, adaptive=adaptive)
    report = run_session(
        ladder,
        trace,
        mode,
        params,
        battery=battery,
        quality=quality,
        segment_duration=args.segment_duration,
    )
    payload = {"provenance": provenance, "report": report.to_json_dict()}
    _write_json(payload, args.output)
    if args.per_segment:
        lines = ["# provenance: " + json.dumps(provenance, separators=(",", ":"))]
        lines.append(
            "segment,bandwidth_bps,gamma,selected,selected_bitrate_bps,threshold_bps,"
            "candidates,fallback,stalled,bw_rel,ec_rel,download_time_s,soc_after"
        )
        for o in report.per_segment or ():
            soc = "" if o.soc_after is None else repr(o.soc_after)
            lines.append(
                f"{o.index},{o.bandwidth!r},{o.gamma_used!r},{o.selected.name},"
                f"{o.selected.bitrate},{o.decision.threshold!r},"
                f"{o.decision.candidate_set_size},{int(o.decision.fallback_used)},"
                f"{int(o.stalled)},{o.bw_rel!r},{o.ec_rel!r},{o.download_time!r},{soc}"
            )
        _write_text("\n".join(lines) + "\n", args.per_segment)
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    def load_report(path: str) -> tuple[SessionReport, dict]:
        payload = json.loads(Path(path).read_text())
        data = payload.get("report", payload)
        return SessionReport.from_json_dict(data), payload.get("provenance", {})

    baseline, base_prov = load_report(args.baseline)
    others = [load_report(path)[0] for path in args.candidate]
    quality = load_quality_map(Path(args.quality).read_text()) if args.quality else None
    channel_label = args.channel_label
    if channel_label is None:
        channel_config = base_prov.get("config", {}).get("channel")
        if isinstance(channel_config, dict):
            channel_label = channel_config.get("kind", "trace")
        else:
            channel_label = "trace"
    table = compare(baseline, others, quality=quality, channel=channel_label)
    provenance = _provenance(
        "compare",
        {
            "baseline": args.baseline,
            "candidates": list(args.candidate),
            "quality": args.quality,
            "channel_label": channel_label,
        },
    )
    payload = {"provenance": provenance, "comparison": table.to_json_dict()}
    _write_json(payload, args.output)
    if args.csv:
        _write_text(table.to_csv(provenance), args.csv)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abrenergy",
        description=(
            "Energy-aware segment-request policies for adaptive-bitrate streaming:"
            " normalize measurements, fit the consumption model, simulate sessions,"
            " and compare modes against the energy-saving-off baseline."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_norm = sub.add_parser(
        "normalize", help="convert raw measurements into relative points"
    )
    p_norm.add_argument("--input", required=True, help="measurement CSV")
    p_norm.add_argument("--output", help="output JSON path (default: stdout)")
    p_norm.set_defaults(handler=_cmd_normalize)

    p_fit = sub.add_parser(
        "fit", help="fit the consumption model per combination and pooled"
    )
    p_fit.add_argument("--input", required=True, help="measurement CSV")
    p_fit.add_argument("--output", help="output JSON path (default: stdout)")
    p_fit.add_argument(
        "--fix-c", type=float, default=1.0, help="hold the floor at this value (default 1)"
    )
    p_fit.add_argument(
        "--free-c", action="store_true", help="fit the floor instead of fixing it"
    )
    p_fit.add_argument(
        "--include-flagged",
        action="store_true",
        help="also fit points whose bandwidth ran below the requested bitrate",
    )
    p_fit.set_defaults(handler=_cmd_fit)

    p_sim = sub.add_parser("simulate", help="simulate sessions over a channel")
    p_sim.add_argument("--ladder", required=True, help="ladder CSV")
    p_sim.add_argument(
        "--channel",
        required=True,
        help=(
            "constant:<bw> | staircase[:<v1,v2,...>] |"
            " random[:values=<...>,block=<n>,seed=<n>] | trace:<path>"
        ),
    )
    p_sim.add_argument(
        "--mode",
        required=True,
        help="off|light|medium|strict|adaptive|custom|all (case-insensitive)",
    )
    p_sim.add_argument(
        "--params",
        required=True,
        help="preset label (e.g. overall, SPC/5G/HEVC), a=..,b=..[,c=..], or fit:<path>[#<combination>]",
    )
    p_sim.add_argument("--segments", type=int, help="number of segments (default 360)")
    p_sim.add_argument(
        "--segment-duration", type=float, default=6.0, help="seconds per segment (default 6)"
    )
    p_sim.add_argument("--gamma", type=float, help="intensity for --mode custom")
    p_sim.add_argument("--battery-capacity-mah", type=float, help="battery capacity")
    p_sim.add_argument(
        "--reference-current-ma",
        type=float,
        help="current drawn at relative consumption 1.0",
    )
    p_sim.add_argument(
        "--initial-soc", type=float, default=100.0, help="starting state of charge (default 100)"
    )
    p_sim.add_argument(
        "--adaptive-high",
        type=float,
        default=70.0,
        help="adaptive mode: SoC above this uses the light intensity (default 70)",
    )
    p_sim.add_argument(
        "--adaptive-low",
        type=float,
        default=30.0,
        help="adaptive mode: SoC at or below this uses the strict intensity (default 30)",
    )
    p_sim.add_argument("--quality", help="per-representation quality CSV")
    p_sim.add_argument("--output", help="output JSON path (default: stdout)")
    p_sim.add_argument("--csv", help="comparison CSV path (with --mode all)")
    p_sim.add_argument("--per-segment", help="per-segment CSV path (single-mode runs)")
    p_sim.add_argument("--dump-trace", help="write the generated trace as CSV")
    p_sim.set_defaults(handler=_cmd_simulate)

    p_cmp = sub.add_parser("compare", help="compare saved session reports")
    p_cmp.add_argument("--baseline", required=True, help="baseline report JSON")
    p_cmp.add_argument(
        "--candidate", action="append", required=True, help="mode report JSON (repeatable)"
    )
    p_cmp.add_argument("--quality", help="per-representation quality CSV")
    p_cmp.add_argument("--channel-label", help="channel column value (default: from baseline)")
    p_cmp.add_argument("--output", help="output JSON path (default: stdout)")
    p_cmp.add_argument("--csv", help="comparison CSV path")
    p_cmp.set_defaults(handler=_cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ParseError, FitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
