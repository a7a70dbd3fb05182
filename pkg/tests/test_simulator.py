"""Session simulation, battery accounting, and mode comparison."""

from __future__ import annotations

import json

import pytest

from abrenergy import (
    BatteryConfig,
    ModelParams,
    QualityMap,
    SessionReport,
    adaptive_gamma,
    adaptive_mode,
    compare,
    constant,
    light_mode,
    load_quality_map,
    medium_mode,
    off_mode,
    random_blocks,
    run_session,
    staircase,
    strict_mode,
)

EC_AT_1_1 = 1.5480077598007158  # pooled params at bw_rel = 22/20
EC_AT_4_4 = 1.058685310416065  # pooled params at bw_rel = 22/5


def vmaf_map(ladder, base=60.0, step=3.0) -> QualityMap:
    names = [rep.name for rep in ladder]
    return QualityMap(
        psnr={n: 30.0 + 2.0 * i for i, n in enumerate(names)},
        ssim={n: 0.9 + 0.008 * i for i, n in enumerate(names)},
        vmaf={n: base + step * i for i, n in enumerate(names)},
    )


class TestRunSession:
    def test_constant_channel_baseline(self, ladder, overall):
        report = run_session(ladder, constant(22e6, 360), off_mode(), overall)
        assert report.n_segments == 360
        assert report.mean_ec_rel == pytest.approx(EC_AT_1_1, rel=1e-12)
        assert report.mean_bitrate == pytest.approx(20e6)
        assert report.stall_count == 0
        assert report.fallback_count == 0
        assert report.final_soc is None
        assert all(o.selected.name == "2160p" for o in report.per_segment)

    def test_constant_channel_strict(self, ladder, overall):
        report = run_session(ladder, constant(22e6, 360), strict_mode(), overall)
        assert all(o.selected.bitrate == 5_000_000 for o in report.per_segment)
        assert report.mean_ec_rel == pytest.approx(EC_AT_4_4, rel=1e-12)

    def test_fallback_segments_stall_but_play_on(self, ladder, overall):
        report = run_session(ladder, constant(5e5, 12), off_mode(), overall)
        assert report.fallback_count == 12
        assert report.stall_count == 12
        outcome = report.per_segment[0]
        assert outcome.download_time == pytest.approx(650_000 * 6.0 / 5e5)
        assert outcome.download_time > 6.0

    def test_no_stall_when_not_falling_back(self, ladder, overall):
        report = run_session(ladder, constant(22e6, 60), light_mode(), overall)
        assert report.stall_count == 0
        assert all(o.download_time <= 6.0 for o in report.per_segment)

    def test_duration_mismatch_rejected(self, ladder, overall):
        trace = constant(22e6, 10, period_duration=4.0)
        with pytest.raises(ValueError, match="period duration"):
            run_session(ladder, trace, off_mode(), overall)

    def test_include_segments_false_drops_the_record(self, ladder, overall):
        report = run_session(ladder, constant(22e6, 10), off_mode(), overall,
                             include_segments=False)
        assert report.per_segment is None
        assert report.n_segments == 10


class TestBattery:
    def test_drain_follows_the_modeled_current(self, ladder, overall):
        battery = BatteryConfig(capacity_mah=3000.0, reference_current_ma=800.0)
        report = run_session(ladder, constant(22e6, 10), off_mode(), overall,
                             battery=battery)
        per_segment = 100.0 * 800.0 * EC_AT_1_1 * 6.0 / 3600.0 / 3000.0
        assert report.per_segment[0].soc_after == pytest.approx(100.0 - per_segment, rel=1e-12)
        assert report.final_soc == pytest.approx(100.0 - 10 * per_segment, rel=1e-9)
        assert not report.soc_depleted

    def test_soc_is_non_increasing(self, ladder, overall):
        battery = BatteryConfig(capacity_mah=1000.0, reference_current_ma=1000.0)
        report = run_session(ladder, staircase([1e6, 4e6, 7e6], 120), medium_mode(),
                             overall, battery=battery)
        socs = [o.soc_after for o in report.per_segment]
        assert all(b <= a for a, b in zip(socs, socs[1:]))

    def test_depletion_stops_the_session(self, ladder, overall):
        battery = BatteryConfig(capacity_mah=10.0, reference_current_ma=1000.0)
        report = run_session(ladder, constant(22e6, 360), off_mode(), overall,
                             battery=battery)
        assert report.soc_depleted
        assert report.n_segments < 360
        assert report.per_segment[-1].soc_after == 0.0
        assert report.final_soc == 0.0

    def test_battery_validation(self):
        with pytest.raises(ValueError):
            BatteryConfig(capacity_mah=0.0, reference_current_ma=100.0)
        with pytest.raises(ValueError):
            BatteryConfig(capacity_mah=100.0, reference_current_ma=100.0, initial_soc=0.0)


class TestAdaptive:
    def test_requires_battery(self, ladder, overall):
        with pytest.raises(ValueError, match="battery"):
            run_session(ladder, constant(22e6, 10), adaptive_mode(), overall)

    def test_intensity_follows_the_charge(self, ladder, overall):
        battery = BatteryConfig(capacity_mah=1000.0, reference_current_ma=1000.0)
        report = run_session(ladder, constant(22e6, 360), adaptive_mode(), overall,
                             battery=battery)
        socs = [battery.initial_soc] + [o.soc_after for o in report.per_segment]
        for before, outcome in zip(socs, report.per_segment):
            assert outcome.gamma_used == adaptive_gamma(before)
        assert {o.gamma_used for o in report.per_segment} == {1.5, 2.0, 4.0}


class TestQuality:
    def test_means_computed_when_scores_supplied(self, ladder, overall):
        qmap = vmaf_map(ladder)
        report = run_session(ladder, constant(22e6, 30), off_mode(), overall, quality=qmap)
        assert report.mean_quality["vmaf"] == pytest.approx(60.0 + 3.0 * 9)
        assert set(report.mean_quality) == {"psnr", "ssim", "vmaf"}

    def test_partial_metric_coverage_rejected(self, ladder, overall):
        partial = QualityMap(vmaf={"240p": 30.0})
        with pytest.raises(ValueError, match="missing scores"):
            run_session(ladder, constant(22e6, 10), off_mode(), overall, quality=partial)

    def test_loader_accepts_sparse_columns(self):
        text = "name,psnr,ssim,vmaf\na,30,,55\nb,32,,61\n"
        qmap = load_quality_map(text)
        assert qmap.ssim is None
        assert qmap.vmaf == {"a": 55.0, "b": 61.0}

    def test_loader_rejects_duplicates(self):
        with pytest.raises(Exception, match="duplicate"):
            load_quality_map("name,psnr,ssim,vmaf\na,30,,55\na,31,,56\n")


class TestCompare:
    def run_modes(self, ladder, overall, trace, quality=None):
        modes = [off_mode(), light_mode(), medium_mode(), strict_mode()]
        return [run_session(ladder, trace, m, overall, quality=quality) for m in modes]

    def test_baseline_row_and_ratios(self, ladder, overall):
        reports = self.run_modes(ladder, overall, constant(22e6, 360))
        table = compare(reports[0], reports[1:], channel="constant:22M")
        assert table.rows[0].mode_label == "off"
        assert table.rows[0].energy_pct == 100.0
        for row, report in zip(table.rows[1:], reports[1:]):
            expected = 100.0 * report.mean_ec_rel / reports[0].mean_ec_rel
            assert row.energy_pct == pytest.approx(expected, rel=1e-12)
        assert [r.channel for r in table.rows] == ["constant:22M"] * 4

    def test_quality_deltas_are_baseline_minus_mode(self, ladder, overall):
        qmap = vmaf_map(ladder)
        reports = self.run_modes(ladder, overall, constant(22e6, 60), quality=qmap)
        table = compare(reports[0], reports[1:], channel="c")
        strict_row = table.rows[3]
        assert strict_row.quality_delta["vmaf"] == pytest.approx(
            reports[0].mean_quality["vmaf"] - reports[3].mean_quality["vmaf"]
        )
        assert strict_row.quality_delta["vmaf"] > 0

    def test_perceptibility_flag_tracks_the_vmaf_delta(self, ladder, overall):
        qmap = vmaf_map(ladder)
        reports = self.run_modes(ladder, overall, constant(22e6, 60), quality=qmap)
        table = compare(reports[0], reports[1:], channel="c")
        for row in table.rows:
            assert row.perceptible == (row.quality_delta.get("vmaf", 0.0) > 6.0)
        assert any(r.perceptible for r in table.rows)
        assert not all(r.perceptible for r in table.rows)

    def test_quality_supplied_after_the_fact(self, ladder, overall):
        qmap = vmaf_map(ladder)
        reports = self.run_modes(ladder, overall, constant(22e6, 60))
        assert reports[0].mean_quality is None
        table = compare(reports[0], reports[1:], quality=qmap, channel="c")
        with_scores = self.run_modes(ladder, overall, constant(22e6, 60), quality=qmap)
        direct = compare(with_scores[0], with_scores[1:], channel="c")
        for late, early in zip(table.rows, direct.rows):
            assert late.quality == pytest.approx(early.quality)

    def test_mismatched_contexts_rejected(self, ladder, overall):
        base = run_session(ladder, constant(22e6, 60), off_mode(), overall)
        other_params = ModelParams(0.9, 0.5, 1.0)
        other = run_session(ladder, constant(22e6, 60), strict_mode(), other_params)
        with pytest.raises(ValueError, match="context"):
            compare(base, [other])

    def test_csv_shape(self, ladder, overall):
        qmap = vmaf_map(ladder)
        reports = self.run_modes(ladder, overall, constant(22e6, 60), quality=qmap)
        table = compare(reports[0], reports[1:], channel="constant:22M")
        lines = table.to_csv().splitlines()
        assert lines[0] == "channel,mode,energy_pct,psnr,d_psnr,ssim,d_ssim,vmaf,d_vmaf"
        assert len(lines) == 5
        assert lines[1].startswith("constant:22M,off,100.00,")

    def test_csv_provenance_header_round_trips_as_comment(self, ladder, overall):
        reports = self.run_modes(ladder, overall, constant(22e6, 10))
        table = compare(reports[0], reports[1:], channel="c")
        text = table.to_csv(provenance={"tool": "abrenergy", "seed": 7})
        assert text.startswith("# provenance: ")
        assert json.loads(text.splitlines()[0].removeprefix("# provenance: ")) == {
            "tool": "abrenergy",
            "seed": 7,
        }


class TestReportSerialization:
    def test_json_round_trip_preserves_everything(self, ladder, overall):
        battery = BatteryConfig(capacity_mah=2000.0, reference_current_ma=900.0)
        qmap = vmaf_map(ladder)
        report = run_session(ladder, random_blocks([1e6, 7e6, 22e6], 48, seed=4),
                             adaptive_mode(), overall, battery=battery, quality=qmap)
        rebuilt = SessionReport.from_json_dict(
            json.loads(json.dumps(report.to_json_dict()))
        )
        assert rebuilt == report

    def test_runs_are_deterministic(self, ladder, overall):
        trace = random_blocks([1e6, 7e6, 22e6], 120, seed=9)
        a = run_session(ladder, trace, medium_mode(), overall)
        b = run_session(ladder, trace, medium_mode(), overall)
        assert a == b
