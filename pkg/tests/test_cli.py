"""End-to-end CLI workflow and structured error exit codes."""
import json

import pytest
from click.testing import CliRunner

from factlogic.cli import main
from factlogic.generator import clinic8_config


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def workspace(tmp_path_factory, runner):
    """generate -> train -> rules pipeline on a tiny dataset, shared below."""
    root = tmp_path_factory.mktemp("cli")
    ds = root / "ds"
    r = runner.invoke(main, ["generate", "--count", "300", "--seed", "3",
                             "--out", str(ds)])
    assert r.exit_code == 0, r.output

    tcfg = root / "train.json"
    tcfg.write_text(json.dumps({
        "model": {"n_facts": 8, "n_views": 3, "feat_dim": 16, "n_rules": 12,
                  "n_slots": 4, "n_classes": 4, "selection_mode": "sampled",
                  "hard_forward": True},
        "optim": {"base_lr": 0.045, "total_epochs": 12},
        "warmup_phase_epochs": 3,
        "seed": 0,
        "batch_size": 32,
    }))
    ckpt = root / "ckpt.json"
    r = runner.invoke(main, ["train", "--data", str(ds), "--config", str(tcfg),
                             "--out", str(ckpt)])
    assert r.exit_code == 0, r.output

    rules_path = root / "rules.json"
    r = runner.invoke(main, ["rules", "--ckpt", str(ckpt), "--data", str(ds),
                             "--rho-min", "0.0", "--out", str(rules_path)])
    assert r.exit_code == 0, r.output
    return {"root": root, "ds": ds, "ckpt": ckpt, "rules": rules_path,
            "tcfg": tcfg}


class TestPipeline:
    def test_generate_reports_histogram(self, runner, tmp_path):
        r = runner.invoke(main, ["generate", "--count", "50", "--seed", "1",
                                 "--out", str(tmp_path / "d")])
        assert r.exit_code == 0
        doc = json.loads(r.output)
        assert sum(doc["class_histogram"].values()) == 50

    def test_train_emits_history_file(self, workspace):
        hist = workspace["root"] / "ckpt.json.history.jsonl"
        lines = hist.read_text().splitlines()
        assert len(lines) == 12
        assert all("val_accuracy" in json.loads(ln) for ln in lines)

    def test_eval_reports_metrics(self, runner, workspace):
        r = runner.invoke(main, ["eval", "--ckpt", str(workspace["ckpt"]),
                                 "--data", str(workspace["ds"]),
                                 "--no-counterfactual"])
        assert r.exit_code == 0, r.output
        doc = json.loads(r.output)
        assert 0.0 <= doc["accuracy"] <= 1.0
        assert doc["cgs"] is None

    def test_eval_compositional_split(self, runner, workspace, tmp_path):
        spec = tmp_path / "comp.json"
        spec.write_text(json.dumps({"holdout": [
            {"rail_down": 1, "edge_sitting": 1, "caregiver_near": 1}]}))
        r = runner.invoke(main, ["eval", "--ckpt", str(workspace["ckpt"]),
                                 "--data", str(workspace["ds"]),
                                 "--compositional", str(spec),
                                 "--no-counterfactual"])
        assert r.exit_code == 0, r.output
        assert json.loads(r.output)["cgs"] is not None

    def test_rules_without_data_notes_skipped_pruning(self, runner, workspace,
                                                      tmp_path):
        out = tmp_path / "r.json"
        r = runner.invoke(main, ["rules", "--ckpt", str(workspace["ckpt"]),
                                 "--out", str(out)])
        assert r.exit_code == 0, r.output
        doc = json.loads(out.read_text())
        assert "skipped" in doc["provenance"]["note"]

    def test_rules_repeat_invocation_is_byte_identical(self, runner, workspace,
                                                       tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            r = runner.invoke(main, ["rules", "--ckpt", str(workspace["ckpt"]),
                                     "--data", str(workspace["ds"]),
                                     "--rho-min", "0.0", "--out", str(out)])
            assert r.exit_code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_explain_with_confidence_sample(self, runner, workspace, tmp_path):
        sample = tmp_path / "sample.json"
        sample.write_text(json.dumps({"confidences": [0.9, 0.9, 0.1, 0.5,
                                                      0.2, 0.1, 0.8, 0.6]}))
        r = runner.invoke(main, ["explain", "--ckpt", str(workspace["ckpt"]),
                                 "--sample", str(sample),
                                 "--rules", str(workspace["rules"]),
                                 "--exact-cf"])
        assert r.exit_code == 0, r.output
        doc = json.loads(r.output)
        assert doc["predicted_class"]
        assert "exact_counterfactual" in doc

    def test_gradcheck_small_budget(self, runner):
        r = runner.invoke(main, ["gradcheck", "--seed", "7", "--cases", "5"])
        assert r.exit_code == 0, r.output
        assert json.loads(r.output)["passed"] is True


class TestErrors:
    def test_bad_checkpoint_exits_3(self, runner, workspace, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{} oops")
        r = runner.invoke(main, ["eval", "--ckpt", str(bad),
                                 "--data", str(workspace["ds"])])
        assert r.exit_code == 3
        assert "error" in json.loads(r.stderr)

    def test_missing_dataset_exits_3(self, runner, workspace, tmp_path):
        r = runner.invoke(main, ["eval", "--ckpt", str(workspace["ckpt"]),
                                 "--data", str(tmp_path / "nope")])
        assert r.exit_code == 3

    def test_bad_sample_file_exits_3(self, runner, workspace, tmp_path):
        sample = tmp_path / "s.json"
        sample.write_text(json.dumps({"wrong_key": []}))
        r = runner.invoke(main, ["explain", "--ckpt", str(workspace["ckpt"]),
                                 "--sample", str(sample)])
        assert r.exit_code == 3

    def test_missing_required_option_exits_2(self, runner):
        assert runner.invoke(main, ["train"]).exit_code == 2


class TestConfigDir:
    def test_env_var_resolves_relative_config(self, runner, tmp_path,
                                              monkeypatch):
        cfgdir = tmp_path / "cfgs"
        cfgdir.mkdir()
        (cfgdir / "gen.json").write_text(
            json.dumps(clinic8_config(seed=5).to_dict()))
        monkeypatch.setenv("FACTLOGIC_CONFIG_DIR", str(cfgdir))
        r = runner.invoke(main, ["generate", "--config", "gen.json",
                                 "--count", "20", "--out", str(tmp_path / "d")])
        assert r.exit_code == 0, r.output

    def test_unresolvable_config_exits_3(self, runner, tmp_path, monkeypatch):
        monkeypatch.delenv("FACTLOGIC_CONFIG_DIR", raising=False)
        r = runner.invoke(main, ["generate", "--config", "missing.json",
                                 "--count", "20", "--out", str(tmp_path / "d")])
        assert r.exit_code == 3
