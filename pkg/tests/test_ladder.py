import math

import numpy as np
import pytest

from jndladder.errors import ConfigError, MissingModelError, SchemaError
from jndladder.jnd import JndFeatureVector
from jndladder.ladder import (
    BitrateLadder,
    HLS_BITRATES_KBPS,
    HLS_RESOLUTIONS,
    LadderConfig,
    LadderEntry,
    MeasuredRDPoint,
    build_ladder,
    convex_hull_ladder,
    eliminate_representations,
    ladder_to_csv,
    predict_crf,
    predict_jnd_threshold,
    predict_vmaf_grid,
    resolution_height,
    select_resolution,
)

from conftest import StubModel

FEATURES = (40.0, 10.0, 120.0)  # (E_Y, h, L_Y)


def crossover_vmaf(resolution):
    """Synthetic RD behavior: 540p beats 1080p below 2000 kbps, reversed above.

    Both log-linear curves meet exactly at 2000 kbps; the 1080p curve is
    steeper, so it wins past the crossover.
    """

    def fn(x):
        bitrate = math.exp(x[3])
        slope = 12.0 if resolution == "540p" else 18.0
        return 70.0 + slope * math.log10(bitrate / 2000.0)

    return fn


def flag_trace_oracle(entries, threshold, r_max):
    """Independent literal trace of the elimination counter loop."""
    flag = 0
    out = []
    for resolution, crf in entries:
        if resolution == r_max and crf < threshold:
            flag += 1
        out.append(flag > 1)
    return out


class TestLadderConfig:
    def test_defaults_are_hls(self):
        cfg = LadderConfig()
        assert cfg.resolutions == HLS_RESOLUTIONS
        assert cfg.bitrates_kbps == HLS_BITRATES_KBPS
        assert cfg.r_max == "1080p"
        assert (cfg.crf_min, cfg.crf_max) == (0.0, 51.0)

    def test_validation(self):
        with pytest.raises(ConfigError):
            LadderConfig(resolutions=("720p", "540p"))
        with pytest.raises(ConfigError):
            LadderConfig(bitrates_kbps=(300.0, 300.0))
        with pytest.raises(ConfigError):
            LadderConfig(crf_min=20.0, crf_max=20.0)
        with pytest.raises(ConfigError):
            resolution_height("4k")


class TestVmafGrid:
    def test_single_resolution(self):
        cfg = LadderConfig(resolutions=("540p",), bitrates_kbps=(600.0, 1600.0))
        grid = predict_vmaf_grid(FEATURES, cfg, {"540p": StubModel(70.0)})
        assert grid.shape == (1, 2)
        assert np.all(grid == 70.0)

    def test_constant_stubs_fill_rows(self):
        cfg = LadderConfig(
            resolutions=("540p", "1080p"), bitrates_kbps=(600.0, 1600.0)
        )
        grid = predict_vmaf_grid(
            FEATURES, cfg, {"540p": StubModel(70.0), "1080p": StubModel(65.0)}
        )
        assert list(grid[:, 0]) == [70.0, 65.0]

    def test_clamped_to_vmaf_range(self):
        cfg = LadderConfig(resolutions=("540p",), bitrates_kbps=(600.0,))
        assert predict_vmaf_grid(FEATURES, cfg, {"540p": StubModel(140.0)})[0, 0] == 100.0
        assert predict_vmaf_grid(FEATURES, cfg, {"540p": StubModel(-3.0)})[0, 0] == 0.0

    def test_missing_model(self):
        cfg = LadderConfig(resolutions=("540p", "1080p"), bitrates_kbps=(600.0,))
        with pytest.raises(MissingModelError, match="1080p"):
            predict_vmaf_grid(FEATURES, cfg, {"540p": StubModel(1.0)})

    def test_cells_match_direct_predict_calls(self, rng):
        cfg = LadderConfig(resolutions=("540p", "1080p"), bitrates_kbps=(600.0, 2400.0))
        models = {
            "540p": StubModel(crossover_vmaf("540p")),
            "1080p": StubModel(crossover_vmaf("1080p")),
        }
        grid = predict_vmaf_grid(FEATURES, cfg, models)
        for m, tag in enumerate(cfg.resolutions):
            for t, b in enumerate(cfg.bitrates_kbps):
                x = np.array([*FEATURES, math.log(b)])
                assert grid[m, t] == pytest.approx(models[tag].predict(x), rel=1e-12)


class TestSelectResolution:
    def test_picks_maximum(self):
        assert select_resolution([70.0, 65.0], ("540p", "1080p")) == "540p"
        assert select_resolution([60.0, 65.0], ("540p", "1080p")) == "1080p"

    def test_tie_breaks_to_lowest_resolution(self):
        assert select_resolution([80.0, 80.0], ("540p", "1080p")) == "540p"

    def test_matches_linear_scan_oracle(self, rng):
        resolutions = ("360p", "540p", "720p", "1080p")
        for _ in range(50):
            col = rng.integers(0, 5, size=4).astype(np.float64)
            best, best_q = None, -np.inf
            for tag, q in zip(resolutions, col):
                if q > best_q:
                    best, best_q = tag, q
            assert select_resolution(col, resolutions) == best


class TestPredictCrf:
    def test_clamps_high(self):
        cfg = LadderConfig(resolutions=("540p",), bitrates_kbps=(600.0,))
        assert predict_crf(FEATURES, "540p", 600.0, {"540p": StubModel(60.0)}, cfg) == 51.0

    def test_clamps_low(self):
        cfg = LadderConfig(resolutions=("540p",), bitrates_kbps=(600.0,))
        assert predict_crf(FEATURES, "540p", 600.0, {"540p": StubModel(-3.0)}, cfg) == 0.0

    def test_within_bounds_passes_through(self):
        cfg = LadderConfig(resolutions=("540p",), bitrates_kbps=(600.0,))
        stub = StubModel(lambda x: 10.0 + x[3])
        expected = 10.0 + math.log(600.0)
        assert predict_crf(FEATURES, "540p", 600.0, {"540p": stub}, cfg) == pytest.approx(
            expected, rel=1e-12
        )


class TestBuildLadder:
    def test_crossover_fixture_switches_at_2mbps(self):
        cfg = LadderConfig(
            resolutions=("540p", "1080p"),
            bitrates_kbps=(600.0, 1600.0, 2400.0, 3400.0, 4500.0),
        )
        vmaf_models = {r: StubModel(crossover_vmaf(r)) for r in cfg.resolutions}
        crf_models = {r: StubModel(24.0) for r in cfg.resolutions}
        ladder = build_ladder(FEATURES, cfg, vmaf_models, crf_models)
        picked = [e.resolution for e in ladder.entries]
        assert picked == ["540p", "540p", "1080p", "1080p", "1080p"]

    def test_single_resolution_config(self):
        cfg = LadderConfig(resolutions=("720p",), bitrates_kbps=(600.0, 1600.0))
        ladder = build_ladder(
            FEATURES, cfg, {"720p": StubModel(50.0)}, {"720p": StubModel(30.0)}
        )
        assert all(e.resolution == "720p" for e in ladder.entries)

    def test_hls_config_has_ten_entries_matching_recomputation(self):
        cfg = LadderConfig()
        vmaf_models = {
            r: StubModel(lambda x, k=resolution_height(r): k / 20.0 + x[3])
            for r in cfg.resolutions
        }
        crf_models = {
            r: StubModel(lambda x, k=resolution_height(r): 40.0 - x[3] - k / 1000.0)
            for r in cfg.resolutions
        }
        ladder = build_ladder(FEATURES, cfg, vmaf_models, crf_models)
        assert len(ladder.entries) == 10
        grid = predict_vmaf_grid(FEATURES, cfg, vmaf_models)
        for t, entry in enumerate(ladder.entries):
            expected_res = select_resolution(grid[:, t], cfg.resolutions)
            assert entry.resolution == expected_res
            assert entry.crf == predict_crf(
                FEATURES, expected_res, entry.bitrate_kbps, crf_models, cfg
            )
            assert entry.bitrate_kbps == cfg.bitrates_kbps[t]
        assert not any(e.eliminated for e in ladder.entries)


class TestJndThreshold:
    def vector(self):
        return JndFeatureVector(names=("a", "b"), values=np.array([1.0, 2.0]))

    def test_stub_passthrough(self):
        assert predict_jnd_threshold(self.vector(), StubModel(23.7)) == 23.7

    def test_clamps_to_crf_range(self):
        assert predict_jnd_threshold(self.vector(), StubModel(60.0)) == 51.0

    def test_feature_name_mismatch(self):
        model = StubModel(10.0)
        model.feature_names = ("a", "c")
        with pytest.raises(SchemaError, match="does not match"):
            predict_jnd_threshold(self.vector(), model)


class TestElimination:
    def test_hand_traced_example(self):
        entries = [
            ("540p", 600.0, 32.0),
            ("1080p", 1600.0, 30.0),
            ("1080p", 2400.0, 26.0),
            ("1080p", 3400.0, 22.0),
            ("1080p", 4500.0, 18.0),
        ]
        ladder = BitrateLadder(
            scene_id="s",
            entries=tuple(
                LadderEntry(resolution=r, bitrate_kbps=b, crf=c)
                for r, b, c in entries
            ),
        )
        result = eliminate_representations(ladder, 24.0, "1080p")
        assert [e.eliminated for e in result.entries] == [
            False,
            False,
            False,
            False,
            True,
        ]
        assert result.jnd_threshold == 24.0

    def test_threshold_at_floor_eliminates_nothing(self):
        ladder = BitrateLadder(
            scene_id="s",
            entries=tuple(
                LadderEntry(resolution="1080p", bitrate_kbps=b, crf=20.0)
                for b in (600.0, 1600.0)
            ),
        )
        result = eliminate_representations(ladder, 0.0, "1080p")
        assert not any(e.eliminated for e in result.entries)

    def test_all_below_threshold_keeps_exactly_first(self):
        ladder = BitrateLadder(
            scene_id="s",
            entries=tuple(
                LadderEntry(resolution="1080p", bitrate_kbps=float(b), crf=10.0)
                for b in (1, 2, 3, 4)
            ),
        )
        result = eliminate_representations(ladder, 30.0, "1080p")
        assert [e.eliminated for e in result.entries] == [False, True, True, True]

    def test_strict_comparison_at_threshold(self):
        ladder = BitrateLadder(
            scene_id="s",
            entries=tuple(
                LadderEntry(resolution="1080p", bitrate_kbps=float(b), crf=24.0)
                for b in (1, 2, 3)
            ),
        )
        result = eliminate_representations(ladder, 24.0, "1080p")
        assert not any(e.eliminated for e in result.entries)

    def test_property_against_flag_trace_oracle(self, rng):
        resolutions = ("540p", "720p", "1080p")
        for _ in range(1000):
            n = int(rng.integers(1, 12))
            entries = [
                (
                    resolutions[rng.integers(0, 3)],
                    float(rng.uniform(0, 52)),
                )
                for _ in range(n)
            ]
            threshold = float(rng.uniform(0, 52))
            ladder = BitrateLadder(
                scene_id="s",
                entries=tuple(
                    LadderEntry(resolution=r, bitrate_kbps=100.0 * (i + 1), crf=c)
                    for i, (r, c) in enumerate(entries)
                ),
            )
            result = eliminate_representations(ladder, threshold, "1080p")
            expected = flag_trace_oracle(entries, threshold, "1080p")
            assert [e.eliminated for e in result.entries] == expected
            # at most one surviving max-res entry below threshold
            survivors_below = [
                e
                for e in result.surviving()
                if e.resolution == "1080p" and e.crf < threshold
            ]
            assert len(survivors_below) <= 1


class TestConvexHull:
    def rd_crossover(self):
        points = []
        for b in (300, 600, 1200, 2000, 3000, 4500, 8000):
            points.append(
                MeasuredRDPoint("540p", float(b), 70.0 + 12.0 * math.log10(b / 2000.0))
            )
            points.append(
                MeasuredRDPoint("1080p", float(b), 70.0 + 18.0 * math.log10(b / 2000.0))
            )
        return points

    def test_crossover_scene(self):
        hull = convex_hull_ladder(self.rd_crossover(), (600.0, 1600.0, 2400.0, 3400.0))
        assert [h[0] for h in hull] == ["540p", "540p", "1080p", "1080p"]

    def test_dominant_resolution_everywhere(self):
        points = [
            MeasuredRDPoint("540p", float(b), 50.0 + math.log10(b))
            for b in (300, 1000, 4000, 9000)
        ] + [
            MeasuredRDPoint("1080p", float(b), 70.0 + math.log10(b))
            for b in (300, 1000, 4000, 9000)
        ]
        hull = convex_hull_ladder(points, (600.0, 2400.0, 8100.0))
        assert all(h[0] == "1080p" for h in hull)

    def test_out_of_range_bitrate(self):
        points = [
            MeasuredRDPoint("540p", 1000.0, 60.0),
            MeasuredRDPoint("540p", 2000.0, 70.0),
        ]
        with pytest.raises(ValueError, match="outside"):
            convex_hull_ladder(points, (500.0,))

    def test_skips_resolution_not_spanning_target(self):
        points = [
            MeasuredRDPoint("540p", 100.0, 50.0),
            MeasuredRDPoint("540p", 9000.0, 90.0),
            MeasuredRDPoint("1080p", 5000.0, 99.0),
            MeasuredRDPoint("1080p", 9000.0, 99.5),
        ]
        hull = convex_hull_ladder(points, (600.0, 8000.0))
        assert hull[0][0] == "540p"  # 1080p has no data at 600
        assert hull[1][0] == "1080p"

    def test_matches_exhaustive_interpolation_oracle(self, rng):
        resolutions = ("360p", "540p", "1080p")
        points = []
        curves = {}
        for tag in resolutions:
            rates = np.sort(rng.uniform(100, 9000, size=5))
            quals = np.sort(rng.uniform(20, 99, size=5))
            curves[tag] = (rates, quals)
            points += [
                MeasuredRDPoint(tag, float(b), float(q))
                for b, q in zip(rates, quals)
            ]
        targets = tuple(np.sort(rng.uniform(500, 5000, size=4)))
        hull = convex_hull_ladder(points, targets, resolutions=resolutions)
        for (tag, b, q) in hull:
            best, best_q = None, -np.inf
            for r in resolutions:
                rates, quals = curves[r]
                if rates[0] <= b <= rates[-1]:
                    qi = float(np.interp(b, rates, quals))
                    if qi > best_q:
                        best, best_q = r, qi
            assert tag == best
            assert q == pytest.approx(best_q, rel=1e-12)

    def test_agrees_with_predictor_on_replayed_data(self):
        # stub models replay the same closed-form RD surface the hull sees
        cfg = LadderConfig(
            resolutions=("540p", "1080p"),
            bitrates_kbps=(600.0, 1600.0, 2400.0, 3400.0),
        )
        vmaf_models = {r: StubModel(crossover_vmaf(r)) for r in cfg.resolutions}
        crf_models = {r: StubModel(24.0) for r in cfg.resolutions}
        ladder = build_ladder(FEATURES, cfg, vmaf_models, crf_models)
        hull = convex_hull_ladder(self.rd_crossover(), cfg.bitrates_kbps)
        assert [e.resolution for e in ladder.entries] == [h[0] for h in hull]


def test_ladder_csv_shape():
    ladder = BitrateLadder(
        scene_id="s",
        entries=(
            LadderEntry("540p", 600.0, 31.5, predicted_vmaf=70.25),
            LadderEntry("1080p", 1600.0, 28.0, eliminated=True),
        ),
    )
    text = ladder_to_csv(ladder)
    lines = text.strip().split("\n")
    assert lines[0] == "resolution,bitrate_kbps,crf,predicted_vmaf,eliminated"
    assert lines[1] == "540p,600.0,31.5,70.25,false"
    assert lines[2].endswith("true")
