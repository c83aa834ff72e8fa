import json

import pytest

from src.config.schema import AttackStrategy, ExperimentConfig, ProtocolConfig
from src.run import EXIT_ABORT, EXIT_OK, EXIT_USAGE, main


@pytest.fixture(autouse=True)
def _work_in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


class TestConfig:

    def test_round_trip(self):
        cfg = ExperimentConfig(
            protocol=ProtocolConfig(m=3, n=2, N=40, decoy_counts=[2, 3], seed=5),
            attack=AttackStrategy(kind="entangled_fake", attacker_index=2, alpha=[0.5 + 0.5j, 0], beta=[0, 0.5 + 0.5j]),
            trials=3,
        )
        assert ExperimentConfig.model_validate_json(cfg.model_dump_json()) == cfg

    def test_decoy_length_checked(self):
        with pytest.raises(ValueError):
            ProtocolConfig(m=3, decoy_counts=[1])

    def test_block_arithmetic(self):
        cfg = ProtocolConfig(m=2, n=3, N=10, decoy_counts=[1])
        assert cfg.padding == 2
        assert cfg.block_count == 11

    def test_fake_attack_needs_alice(self):
        with pytest.raises(ValueError):
            AttackStrategy(kind="single_photon_fake")


class TestRun:

    def test_honest_run_report(self, tmp_path):
        out = tmp_path / "report.json"
        code = main(["run", "--m", "3", "--n", "2", "--block-size", "200", "--trials", "10", "--seed", "1", "--output", str(out)])
        assert code == EXIT_OK
        data = json.loads(out.read_text())
        assert data["schema_version"] == "1.0"
        assert len(data["reports"]) == 10
        assert data["summary"]["abort_count"] == 0
        assert all(r["bob_xor_key"] == r["alice_combined_bits"] for r in data["reports"])

    def test_same_seed_same_bytes(self, tmp_path):
        args = ["run", "--block-size", "60", "--trials", "3", "--seed", "99"]
        main(args + ["--output", str(tmp_path / "a.json")])
        main(args + ["--output", str(tmp_path / "b.json")])
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_strict_abort_exit(self, tmp_path):
        code = main(["run", "--attack", "intercept_resend", "--block-size", "1000", "--strict", "--output", str(tmp_path / "r.json")])
        assert code == EXIT_ABORT

    def test_csv_summary(self, tmp_path):
        csv_path = tmp_path / "r.csv"
        main(["run", "--block-size", "50", "--trials", "2", "--output", str(tmp_path / "r.json"), "--csv", str(csv_path)])
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0].startswith("trial,aborted")
        assert len(lines) == 3

    def test_config_file_with_overrides(self, tmp_path):
        config = tmp_path / "exp.json"
        config.write_text(ExperimentConfig(protocol=ProtocolConfig(m=4, N=30), trials=2).model_dump_json())
        out = tmp_path / "r.json"
        assert main(["run", "--config", str(config), "--trials", "1", "--output", str(out)]) == EXIT_OK
        data = json.loads(out.read_text())
        assert data["config"]["protocol"]["m"] == 4
        assert len(data["reports"]) == 1

    def test_invalid_config_is_usage_error(self):
        assert main(["run", "--m", "1"]) == EXIT_USAGE

    def test_missing_config_file_is_usage_error(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE

    def test_unknown_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--bogus"])
        assert exc.value.code == EXIT_USAGE


class TestOtherCommands:

    def test_efficiency(self, tmp_path):
        out = tmp_path / "eff.json"
        assert main(["efficiency", "--block-size", "3000", "--output", str(out)]) == EXIT_OK
        modes = {row["memory_mode"]: row for row in json.loads(out.read_text())["modes"]}
        assert modes["quantum_memory"]["mean_usable_fraction"] == 1.0
        assert modes["measure_immediately"]["mean_usable_fraction"] == pytest.approx(1 / 3, abs=0.03)

    def test_efficiency_empty(self, tmp_path):
        out = tmp_path / "eff.json"
        assert main(["efficiency", "--block-size", "0", "--output", str(out)]) == EXIT_OK
        for row in json.loads(out.read_text())["modes"]:
            assert row["mean_efficiency"] is None

    def test_bounds(self, tmp_path):
        out = tmp_path / "bounds.json"
        assert main(["bounds", "--resolution", "50", "--refinement", "10", "--output", str(out)]) == EXIT_OK
        reports = {r["objective"]: r for r in json.loads(out.read_text())}
        assert reports["s1"]["minimum"] == pytest.approx(27.0, abs=1e-6)
        assert reports["s1"]["p1"] == pytest.approx(0.625, abs=1e-6)
        assert reports["s2"]["p2"] == pytest.approx(2 / 3, abs=1e-6)

    def test_bounds_resolution_floor(self):
        assert main(["bounds", "--resolution", "10"]) == EXIT_USAGE

    def test_discriminate(self, tmp_path):
        out = tmp_path / "d.json"
        assert main(["discriminate", "--trials", "4000", "--seed", "3", "--output", str(out)]) == EXIT_OK
        data = json.loads(out.read_text())
        assert data["success_rate"] == pytest.approx(0.5, abs=0.04)

    @pytest.mark.parametrize("command", ["bounds", "discriminate"])
    def test_config_flag_only_on_experiment_commands(self, command):
        with pytest.raises(SystemExit) as exc:
            main([command, "--config", "exp.json"])
        assert exc.value.code == EXIT_USAGE

    def test_discriminate_bad_pair(self):
        assert main(["discriminate", "--alpha", "1", "0", "--beta", "0", "1"]) == EXIT_USAGE
