"""End-to-end tests for the turnprint command-line interface."""

import json

import numpy as np
import pytest

from turnprint.cli import main
from turnprint.config import ConfigError, RunConfig
from turnprint.enroll import load_profiles
from turnprint.features import read_features_csv, write_features_csv
from turnprint.simgen import (
    DriverProfile,
    LeftTurn,
    RightTurn,
    RouteScript,
    Straight,
    load_annotations,
    save_profile,
    save_route,
)
from turnprint.trace import read_trace_csv
from turnprint.turns import read_turns_jsonl


def run(*argv):
    rc = main([str(a) for a in argv])
    assert rc == 0, f"expected exit 0 from {argv}"


@pytest.fixture(scope="module")
def ws(tmp_path_factory):
    """Shared workspace: two drivers, four-turn route, trained models."""
    d = tmp_path_factory.mktemp("cli")
    save_profile(DriverProfile(0.08, 0.42, 1.60, 1.90, 0.18, 0.010, 0.15), d / "a.json")
    save_profile(DriverProfile(0.74, 0.92, 0.60, 0.55, 0.72, 0.010, 0.15), d / "b.json")
    segments = [Straight(5.0, 9.0)]
    for turn in (RightTurn(9.0), LeftTurn(8.0), RightTurn(10.0), LeftTurn(9.0)):
        segments += [turn, Straight(4.0, 9.0)]
    save_route(RouteScript(tuple(segments)), d / "route.json")

    feature_files = []
    for label, prof, base_seed in (("A", "a", 100), ("B", "b", 200)):
        for j in range(2):
            stem = d / f"{label}{j}"
            run("simulate", "--profile", d / f"{prof}.json", "--route",
                d / "route.json", "-o", f"{stem}.csv", "--truth",
                f"{stem}_truth.json", "--seed", base_seed + j)
            run("extract", f"{stem}.csv", "-o", f"{stem}.jsonl")
            run("featurize", f"{stem}.jsonl", "-o", f"{stem}_f.csv",
                "--label", label)
            feature_files.append(f"{stem}_f.csv")
    run("train", *feature_files, "--kind", "nb", "-o", d / "model_nb.json")
    run("train", *feature_files, "--kind", "rf", "-o", d / "model_rf.json")

    run("simulate", "--profile", d / "a.json", "--route", d / "route.json",
        "-o", d / "probe.csv", "--seed", 999)
    run("extract", d / "probe.csv", "-o", d / "probe.jsonl")
    run("featurize", d / "probe.jsonl", "-o", d / "probe_f.csv")
    return d


class TestWalkthrough:
    def test_simulate_reports_samples_and_maneuvers(self, ws, capsys):
        run("simulate", "--profile", ws / "a.json", "--route", ws / "route.json",
            "-o", ws / "again.csv", "--seed", 100)
        out = capsys.readouterr().out
        assert "4 maneuvers" in out

    def test_simulate_is_reproducible_from_the_seed(self, ws):
        first = (ws / "A0.csv").read_bytes()
        again = (ws / "again.csv").read_bytes()
        assert first == again
        run("simulate", "--profile", ws / "a.json", "--route", ws / "route.json",
            "-o", ws / "other_seed.csv", "--seed", 101)
        assert (ws / "other_seed.csv").read_bytes() != first

    def test_truth_sidecar_lists_the_route_turns(self, ws):
        annotations = load_annotations(ws / "A0_truth.json")
        assert [a.kind for a in annotations] == ["right", "left", "right", "left"]

    def test_extract_recovers_all_four_turns(self, ws):
        turns = read_turns_jsonl(ws / "A0.jsonl")
        assert [t.direction for t in turns] == ["right", "left", "right", "left"]
        assert all(t.interpolated_len == 100 for t in turns)

    def test_extract_no_interpolate_keeps_native_lengths(self, ws):
        run("extract", ws / "A0.csv", "-o", ws / "A0_native.jsonl",
            "--no-interpolate")
        turns = read_turns_jsonl(ws / "A0_native.jsonl")
        assert all(t.interpolated_len is None for t in turns)
        assert len({len(t.yaw) for t in turns}) > 1

    def test_identify_fuses_the_probe_to_the_right_driver(self, ws):
        run("identify", ws / "probe_f.csv", "--model", ws / "model_nb.json",
            "-o", ws / "result.json")
        result = json.loads((ws / "result.json").read_text())
        assert result["predicted"] == "A"
        assert result["n_turns_used"] == 4
        assert set(result["log_scores"]) == {"A", "B"}
        assert result["log_scores"]["A"] > result["log_scores"]["B"]

    def test_identify_with_a_forest_reports_votes(self, ws):
        run("identify", ws / "probe_f.csv", "--model", ws / "model_rf.json",
            "-o", ws / "result_rf.json")
        result = json.loads((ws / "result_rf.json").read_text())
        assert result["predicted"] == "A"
        assert sum(result["votes"].values()) == 4


class TestEnroll:
    def test_create_match_create_sequence(self, ws, capsys):
        # one 4-turn trip is too little history to re-match against, so
        # enrollment starts from both of driver A's trips merged
        merged = read_features_csv(ws / "A0_f.csv") + read_features_csv(
            ws / "A1_f.csv"
        )
        write_features_csv(merged, ws / "A_enroll.csv")
        run("enroll", ws / "A_enroll.csv", "-o", ws / "table1.jsonl", "--seed", 7)
        assert "created D_1" in capsys.readouterr().out
        run("enroll", ws / "probe_f.csv", "--table-in", ws / "table1.jsonl",
            "-o", ws / "table2.jsonl")
        assert "matched D_1" in capsys.readouterr().out
        run("enroll", ws / "B0_f.csv", "--table-in", ws / "table2.jsonl",
            "-o", ws / "table3.jsonl")
        assert "created D_2" in capsys.readouterr().out
        table = load_profiles(ws / "table3.jsonl")
        assert table.labels() == ["D_1", "D_2"]
        assert table.entries[0].n_vectors == 12

    def test_forced_label_enrollment(self, ws, capsys):
        run("enroll", ws / "B0_f.csv", "-o", ws / "named.jsonl",
            "--label", "driver_b")
        assert "enrolled driver_b" in capsys.readouterr().out
        assert load_profiles(ws / "named.jsonl").labels() == ["driver_b"]


class TestPerturb:
    def test_zero_noise_is_a_byte_identical_copy(self, ws):
        run("perturb", ws / "probe.csv", "--noise-sd", 0, "-o", ws / "p0.csv")
        assert (ws / "p0.csv").read_bytes() == (ws / "probe.csv").read_bytes()

    def test_on_bump_trigger_leaves_quiet_samples_untouched(self, ws):
        run("perturb", ws / "probe.csv", "--noise-sd", 0.3,
            "--trigger", "on_bump", "-o", ws / "pb.csv")
        orig = read_trace_csv(ws / "probe.csv")
        pert = read_trace_csv(ws / "pb.csv")
        quiet = np.abs(orig.gyro).max(axis=1) <= 0.15
        assert quiet.any() and (~quiet).any()
        np.testing.assert_array_equal(orig.gyro[quiet], pert.gyro[quiet])
        np.testing.assert_array_equal(orig.accel[quiet], pert.accel[quiet])
        assert not np.array_equal(orig.gyro[~quiet], pert.gyro[~quiet])

    def test_perturbed_output_is_seed_reproducible(self, ws):
        run("perturb", ws / "probe.csv", "--noise-sd", 0.2, "-o", ws / "p1.csv",
            "--seed", 4)
        run("perturb", ws / "probe.csv", "--noise-sd", 0.2, "-o", ws / "p2.csv",
            "--seed", 4)
        assert (ws / "p1.csv").read_bytes() == (ws / "p2.csv").read_bytes()


class TestExitCodes:
    def test_missing_input_file_exits_2(self, ws, capsys):
        assert main(["extract", str(ws / "nope.csv"), "-o", str(ws / "x.jsonl")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_bad_device_rotation_exits_2(self, ws, capsys):
        rc = main([
            "simulate", "--profile", str(ws / "a.json"), "--route",
            str(ws / "route.json"), "-o", str(ws / "x.csv"),
            "--device-rotation", "10,20",
        ])
        assert rc == 2
        assert "roll,pitch,yaw" in capsys.readouterr().err

    def test_config_errors_exit_3(self, ws, capsys):
        bad_value = ws / "bad_value.toml"
        bad_value.write_text("delta_bump = 0.15\nepsilon = 0.2\n")
        bad_key = ws / "bad_key.toml"
        bad_key.write_text("bump_threshold = 0.15\n")
        bad_syntax = ws / "bad_syntax.toml"
        bad_syntax.write_text("delta_bump = = 0.15\n")
        for cfg_file in (bad_value, bad_key, bad_syntax):
            rc = main([
                "extract", str(ws / "A0.csv"), "-o", str(ws / "x.jsonl"),
                "--config", str(cfg_file),
            ])
            assert rc == 3, cfg_file.name
            assert "config error:" in capsys.readouterr().err

    def test_config_file_changes_behavior(self, ws):
        # raising delta_bump above every bump peak suppresses all turns
        cfg_file = ws / "deaf.toml"
        RunConfig(delta_bump=2.5, epsilon=0.02).to_file(cfg_file)
        run("extract", ws / "A0.csv", "-o", ws / "deaf.jsonl",
            "--config", cfg_file)
        assert read_turns_jsonl(ws / "deaf.jsonl") == []


class TestRunConfig:
    def test_toml_round_trip_preserves_every_field(self, tmp_path):
        cfg = RunConfig(
            delta_bump=0.2,
            epsilon=0.01,
            cutoff_hz=1.5,
            interp_len=50,
            seed=42,
            folds=5,
            gmm_k=3,
            gate_threshold=-1.5,
            priors={"A": 0.25, "B": 0.75},
        )
        path = tmp_path / "cfg.toml"
        cfg.to_file(path)
        assert RunConfig.from_file(path) == cfg

    def test_defaults_round_trip(self, tmp_path):
        path = tmp_path / "cfg.toml"
        RunConfig().to_file(path)
        assert RunConfig.from_file(path) == RunConfig()

    def test_replace_revalidates(self):
        cfg = RunConfig()
        assert cfg.replace(seed=9).seed == 9
        with pytest.raises(ConfigError):
            cfg.replace(epsilon=0.5)

    @pytest.mark.parametrize(
        "field,value",
        [
            ("delta_bump", 0.0),
            ("epsilon", 0.0),
            ("epsilon", 0.15),
            ("cutoff_hz", -1.0),
            ("interp_len", 15),
            ("interp_len", 33),
            ("seed", -1),
            ("folds", 1),
            ("gmm_k", 0),
            ("priors", {}),
            ("priors", {"A": -0.5, "B": 1.5}),
            ("priors", {"A": 0.6, "B": 0.6}),
        ],
    )
    def test_out_of_range_fields_are_rejected(self, field, value):
        with pytest.raises(ConfigError):
            RunConfig(**{field: value})

    def test_unknown_key_is_a_config_error(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("delta_bump = 0.15\nwindow = 5\n")
        with pytest.raises(ConfigError, match="unknown config keys"):
            RunConfig.from_file(path)
