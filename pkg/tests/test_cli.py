from conftest import write_config

from entmatch import synth
from entmatch.cli import main


class TestStageCommands:
    def test_profile_only(self, pipeline_setup, tmp_path):
        _, doc, _ = pipeline_setup
        cfg = write_config(tmp_path, doc)
        assert main(["profile", "--config", str(cfg)]) == 0
        out = tmp_path / "out"
        assert (out / "profile_data.txt").exists()
        assert not (out / "pairs.csv").exists()

    def test_index_runs_prerequisites(self, pipeline_setup, tmp_path):
        _, doc, _ = pipeline_setup
        cfg = write_config(tmp_path, doc)
        assert main(["index", "--config", str(cfg)]) == 0
        out = tmp_path / "out"
        assert (out / "cleaned_data.csv").exists()
        assert (out / "pairs.csv").exists()
        assert (out / "indexing_stats.txt").exists()

    def test_full_run(self, pipeline_setup, tmp_path):
        _, doc, _ = pipeline_setup
        cfg = write_config(tmp_path, doc)
        assert main(["run", "--config", str(cfg)]) == 0
        assert (tmp_path / "out" / "clusters.csv").exists()

    def test_out_override(self, pipeline_setup, tmp_path):
        _, doc, _ = pipeline_setup
        cfg = write_config(tmp_path, doc)
        other = tmp_path / "elsewhere"
        assert main(["profile", "--config", str(cfg), "--out", str(other)]) == 0
        assert (other / "profile_data.txt").exists()


class TestExitCodes:
    def test_missing_config_is_usage_error(self):
        assert main(["run"]) == 1

    def test_invalid_config_is_usage_error(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("mode: dedup\n")
        assert main(["run", "--config", str(p)]) == 1

    def test_stage_failure_is_exit_2(self, pipeline_setup, tmp_path):
        _, doc, _ = pipeline_setup
        doc.pop("labels")
        cfg = write_config(tmp_path, doc)
        assert main(["run", "--config", str(cfg)]) == 2


class TestSynthCommand:
    def test_synth_writes_data_and_truth(self, tmp_path):
        out = tmp_path / "synthout"
        rc = main(["synth", "-n", "50", "--dup-rate", "0.2", "--seed", "3", "--out", str(out)])
        assert rc == 0
        assert (out / "data.csv").exists()
        assert (out / "truth.csv").exists()
        truth = synth.read_truth(out / "truth.csv")
        assert len(truth) >= 10

    def test_synth_invalid_rate(self, tmp_path):
        assert main(["synth", "-n", "50", "--dup-rate", "0.9", "--out", str(tmp_path)]) == 1


class TestEvaluateCommand:
    def test_standalone_pair_files(self, tmp_path, capsys):
        a = tmp_path / "pred.csv"
        b = tmp_path / "truth.csv"
        a.write_text("id_a,id_b\n0,1\n2,3\n")
        b.write_text("id_a,id_b\n0,1\n4,5\n")
        assert main(["evaluate", "--predicted", str(a), "--truth", str(b)]) == 0
        out = capsys.readouterr().out
        assert "precision: 0.5000" in out
        assert "recall: 0.5000" in out

    def test_pipeline_evaluate(self, pipeline_setup, tmp_path, capsys):
        _, doc, _ = pipeline_setup
        cfg = write_config(tmp_path, doc)
        assert main(["run", "--config", str(cfg)]) == 0
        assert main(["evaluate", "--config", str(cfg)]) == 0
        assert "f1:" in capsys.readouterr().out
