"""End-to-end command behavior through the in-process entry point."""
from types import SimpleNamespace

import pytest

from emosent import nd
from emosent.cli import entrypoint
from emosent.metrics import parse_metrics

from conftest import FIXTURES


def write_config(path, out_dir, **overrides):
    settings = {
        "corpus.train": FIXTURES / "corpus_train.tsv",
        "corpus.test": FIXTURES / "corpus_test.tsv",
        "embeddings": FIXTURES / "embeddings.txt",
        "thesaurus": FIXTURES / "thesaurus.tsv",
        "lexicon": FIXTURES / "lexicon.txt",
        "out_dir": out_dir,
        "mode": "M2",
        "embed_dim": 16,
        "lstm_hidden": 8,
        "context_dim": 4,
        "dt_k": 4,
        "dropout": 0.0,
        "batch_size": 8,
        "lr": 0.01,
        "epochs": 60,
        "seed": 0,
    }
    settings.update(overrides)
    lines = [f"{key} = {value}" for key, value in settings.items() if value is not None]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """One full fixture-corpus training run shared by the read-only tests."""
    root = tmp_path_factory.mktemp("clirun")
    config = write_config(root / "run.cfg", root / "out")
    assert entrypoint(["train", "--config", str(config)]) == 0
    return SimpleNamespace(config=config, out=root / "out")


class TestTrainCommand:
    def test_writes_all_artifacts(self, trained):
        for name in ("checkpoint.bin", "metrics.txt", "table.txt", "train_log.txt"):
            assert (trained.out / name).is_file()

    def test_metrics_file_parses(self, trained):
        report = parse_metrics((trained.out / "metrics.txt").read_text(encoding="utf-8"))
        assert report.mode == "M2"
        assert report.sentiment is not None and report.emotion is not None

    def test_train_log_has_one_line_per_epoch(self, trained):
        lines = (trained.out / "train_log.txt").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 60
        epoch, loss = lines[-1].split("\t")
        assert epoch == "60" and float(loss) > 0.0

    def test_unknown_config_key_fails_before_training(self, tmp_path, capsys):
        config = write_config(tmp_path / "run.cfg", tmp_path / "out", banana=1)
        assert entrypoint(["train", "--config", str(config)]) == 2
        assert "unknown config key" in capsys.readouterr().err
        assert not (tmp_path / "out").exists()

    def test_missing_embeddings_key(self, tmp_path, capsys):
        config = write_config(tmp_path / "run.cfg", tmp_path / "out", embeddings=None)
        assert entrypoint(["train", "--config", str(config)]) == 2
        assert "embeddings" in capsys.readouterr().err

    def test_nonexistent_embeddings_path(self, tmp_path, capsys):
        config = write_config(
            tmp_path / "run.cfg", tmp_path / "out", embeddings=tmp_path / "absent.txt"
        )
        assert entrypoint(["train", "--config", str(config)]) == 2
        assert "embeddings" in capsys.readouterr().err

    def test_identical_runs_are_byte_identical(self, tmp_path):
        artifacts = ("checkpoint.bin", "metrics.txt", "train_log.txt", "table.txt")
        outs = []
        for name in ("a", "b"):
            config = write_config(
                tmp_path / f"{name}.cfg", tmp_path / name, epochs=3
            )
            assert entrypoint(["train", "--config", str(config)]) == 0
            outs.append(tmp_path / name)
        for artifact in artifacts:
            assert (outs[0] / artifact).read_bytes() == (outs[1] / artifact).read_bytes()

    def test_seed_flag_overrides_config(self, tmp_path):
        for seed_args in ([], ["--seed", "1"]):
            out = tmp_path / ("base" if not seed_args else "override")
            config = write_config(tmp_path / f"{out.name}.cfg", out, epochs=2)
            assert entrypoint(["train", "--config", str(config), *seed_args]) == 0
        base = (tmp_path / "base" / "checkpoint.bin").read_bytes()
        override = (tmp_path / "override" / "checkpoint.bin").read_bytes()
        assert base != override


class TestPredictCommand:
    def test_learned_token_maps_to_joy(self, trained, capsys):
        checkpoint = str(trained.out / "checkpoint.bin")
        assert entrypoint(["predict", checkpoint, "joyword"]) == 0
        out = capsys.readouterr().out
        assert "sentiment: positive" in out
        assert "joy" in [
            line.split(":", 1)[1].split()
            for line in out.splitlines()
            if line.startswith("emotions:")
        ][0]

    def test_same_input_same_output(self, trained, capsys):
        checkpoint = str(trained.out / "checkpoint.bin")
        outputs = []
        for _ in range(2):
            assert entrypoint(["predict", checkpoint, "negword was so bad"]) == 0
            outputs.append(capsys.readouterr().out)
        assert outputs[0] == outputs[1]

    def test_empty_text_is_usage_error(self, trained, capsys):
        checkpoint = str(trained.out / "checkpoint.bin")
        assert entrypoint(["predict", checkpoint, "   "]) == 2
        assert "empty input" in capsys.readouterr().err

    def test_missing_checkpoint(self, tmp_path, capsys):
        assert entrypoint(["predict", str(tmp_path / "no.bin"), "hello"]) == 2
        assert "checkpoint" in capsys.readouterr().err


class TestEvaluateCommand:
    def test_scores_checkpoint_on_test_corpus(self, trained, capsys):
        assert entrypoint(["evaluate", "--config", str(trained.config)]) == 0
        out = capsys.readouterr().out
        assert "macro-F1" in out and "Micro-Avg" in out
        report = parse_metrics(
            (trained.out / "eval_metrics.txt").read_text(encoding="utf-8")
        )
        assert report.mode == "M2"

    def test_missing_checkpoint(self, tmp_path, capsys):
        config = write_config(tmp_path / "run.cfg", tmp_path / "out")
        assert entrypoint(["evaluate", "--config", str(config)]) == 2
        assert "checkpoint" in capsys.readouterr().err


class TestGradcheckCommand:
    def test_requested_modes_pass(self, capsys):
        assert entrypoint(["gradcheck", "--modes", "S1,M2"]) == 0
        out = capsys.readouterr().out
        assert out.count("ok") == 2 and "S1:" in out and "M2:" in out

    def test_corrupted_backward_rule_detected(self, capsys):
        with nd.inject_backward_fault("tanh"):
            assert entrypoint(["gradcheck", "--modes", "M2"]) == 1
        assert "failing tensors: " in capsys.readouterr().out

    def test_unknown_mode_is_usage_error(self, capsys):
        assert entrypoint(["gradcheck", "--modes", "Q7"]) == 2
        assert "unknown mode" in capsys.readouterr().err


class TestPreprocessAndVocabCommands:
    def test_preprocess_writes_token_lines(self, tmp_path):
        raw = tmp_path / "raw.txt"
        raw.write_text(
            "@John check http://t.co/ab #BeautifulDay\nWe've got 42 reasons\n",
            encoding="utf-8",
        )
        config = write_config(tmp_path / "run.cfg", tmp_path / "out")
        assert entrypoint(["preprocess", "--config", str(config), str(raw)]) == 0
        lines = (tmp_path / "out" / "preprocessed.txt").read_text(encoding="utf-8")
        assert lines == (
            "<user> check <url> # beautiful day\n"
            "we have got <number> reasons\n"
        )

    def test_preprocess_missing_input(self, tmp_path, capsys):
        config = write_config(tmp_path / "run.cfg", tmp_path / "out")
        assert entrypoint(["preprocess", "--config", str(config), str(tmp_path / "no.txt")]) == 2
        assert "input" in capsys.readouterr().err

    def test_build_vocab_writes_sorted_vocabulary(self, tmp_path):
        config = write_config(tmp_path / "run.cfg", tmp_path / "out")
        assert entrypoint(["build-vocab", "--config", str(config)]) == 0
        words = (tmp_path / "out" / "vocab.txt").read_text(encoding="utf-8").splitlines()
        assert words[0] == "<pad>"
        assert "joyword" in words and "joysyna" in words


class TestReportCommand:
    def test_renders_table_from_metrics_file(self, trained, capsys):
        metrics = str(trained.out / "metrics.txt")
        assert entrypoint(["report", "--metrics", metrics]) == 0
        out = capsys.readouterr().out
        assert "Sentiment" in out and "Emotion" in out and "macro-F1" in out

    def test_missing_metrics_file(self, tmp_path, capsys):
        assert entrypoint(["report", "--metrics", str(tmp_path / "no.txt")]) == 2
        assert "metrics" in capsys.readouterr().err


class TestUsage:
    def test_no_command_is_usage_error(self):
        assert entrypoint([]) == 2

    def test_help_exits_cleanly(self, capsys):
        assert entrypoint(["--help"]) == 0
        assert "preprocess" in capsys.readouterr().out
