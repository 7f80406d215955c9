import json

import pytest

from mtpipe import __version__
from mtpipe.cli import main
from mtpipe.manifest import RunManifest

from .conftest import FIXTURES


def run_cli(*argv):
    return main(list(argv))


class TestTopLevel:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as info:
            run_cli("--version")
        assert info.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_unknown_command_is_usage_error(self, capsys):
        assert run_cli("frobnicate") == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_required_flag_is_usage_error(self, capsys):
        assert run_cli("balance") == 1  # no --out
        assert "error:" in capsys.readouterr().err


class TestBalance:
    def test_writes_balanced_dir(self, tiny_corpus_dir, tmp_path, capsys):
        out = tmp_path / "balanced"
        code = run_cli(
            "balance", "--corpus-dir", str(tiny_corpus_dir), "--out", str(out), "--seed", "0"
        )
        assert code == 0
        assert sorted(p.name for p in out.glob("*.tsv")) == [
            "de-en.tsv", "en-de.tsv", "en-fr.tsv", "en-zh.tsv", "fr-en.tsv", "zh-en.tsv",
        ]
        assert (out / "corpus_stats.json").is_file()
        assert "6 directions" in capsys.readouterr().out

    def test_missing_settings_exit_1(self, tmp_path, capsys):
        assert run_cli("balance", "--out", str(tmp_path / "o")) == 1
        assert "corpus_dir" in capsys.readouterr().err

    def test_bad_corpus_exits_2(self, tmp_path, capsys):
        missing = tmp_path / "nowhere"
        code = run_cli("balance", "--corpus-dir", str(missing), "--out", str(tmp_path / "o"), "--seed", "0")
        assert code == 2


class TestVocabAndPack:
    def test_train_then_pack(self, tiny_corpus_dir, tmp_path, capsys):
        vocab_path = tmp_path / "vocab.json"
        code = run_cli(
            "vocab", "train",
            "--corpus-dir", str(tiny_corpus_dir),
            "--out", str(vocab_path),
            "--seed", "0",
            "--base-vocab-size", "300",
            "--target-size", "320",
        )
        assert code == 0
        assert vocab_path.is_file()
        packed = tmp_path / "packed"
        code = run_cli(
            "pack",
            "--corpus-dir", str(tiny_corpus_dir),
            "--vocab", str(vocab_path),
            "--out", str(packed),
            "--pack-length", "64",
        )
        assert code == 0
        assert sorted(p.suffix for p in packed.iterdir()) == [".bin", ".bin", ".bin", ".json", ".json", ".json"]

    def test_target_not_above_base_exits_2(self, tiny_corpus_dir, tmp_path):
        code = run_cli(
            "vocab", "train",
            "--corpus-dir", str(tiny_corpus_dir),
            "--out", str(tmp_path / "v.json"),
            "--seed", "0",
            "--base-vocab-size", "300",
            "--target-size", "300",
        )
        assert code == 2


class TestSchedule:
    def counts_file(self, tmp_path):
        path = tmp_path / "counts.json"
        path.write_text(json.dumps({"fr-en": 10, "de-en": 6}), "utf-8")
        return path

    def test_run_and_simulate(self, tmp_path, capsys):
        trace = tmp_path / "trace.jsonl"
        code = run_cli(
            "schedule", "run",
            "--counts", str(self.counts_file(tmp_path)),
            "--trace", str(trace),
            "--batch-size", "2",
            "--seed", "0",
            "--s-high", "20",
            "--s-low", "10",
            "--cutover", "30",
        )
        assert code == 0
        assert trace.is_file()
        out = capsys.readouterr().out
        assert "8 batches, 16 samples" in out

        table = tmp_path / "exposure.tsv"
        code = run_cli("schedule", "simulate", "--trace", str(trace), "--out", str(table))
        assert code == 0
        lines = table.read_text("utf-8").splitlines()
        assert lines[0] == "direction\tconsumed\tfirst_batch\tlast_batch"
        assert any(line.startswith("fr-en\t10\t") for line in lines)

    def test_counts_and_packed_dir_are_exclusive(self, tmp_path, capsys):
        code = run_cli(
            "schedule", "run",
            "--counts", "a.json",
            "--packed-dir", "b",
            "--trace", str(tmp_path / "t.jsonl"),
            "--batch-size", "2",
            "--seed", "0",
        )
        assert code == 1

    def test_packed_dir_counts(self, tiny_corpus_dir, tmp_path):
        vocab_path = tmp_path / "vocab.json"
        run_cli(
            "vocab", "train", "--corpus-dir", str(tiny_corpus_dir), "--out", str(vocab_path),
            "--seed", "0", "--base-vocab-size", "300", "--target-size", "310",
        )
        packed = tmp_path / "packed"
        run_cli(
            "pack", "--corpus-dir", str(tiny_corpus_dir), "--vocab", str(vocab_path),
            "--out", str(packed), "--pack-length", "64",
        )
        trace = tmp_path / "trace.jsonl"
        code = run_cli(
            "schedule", "run",
            "--packed-dir", str(packed),
            "--trace", str(trace),
            "--batch-size", "2",
            "--seed", "1",
            "--s-high", "4", "--s-low", "2", "--cutover", "5",
        )
        assert code == 0
        assert trace.is_file()

    def test_missing_trace_exits_2(self, tmp_path):
        assert run_cli("schedule", "simulate", "--trace", str(tmp_path / "none.jsonl")) == 2


class TestInstruct:
    def test_build(self, tiny_corpus_dir, tmp_path, capsys):
        out = tmp_path / "instructions.jsonl"
        code = run_cli(
            "instruct", "build",
            "--corpus-dir", str(tiny_corpus_dir),
            "--out", str(out),
            "--seed", "0",
            "--per-direction", "2",
        )
        assert code == 0
        lines = out.read_text("utf-8").splitlines()
        assert len(lines) == 6  # three directions, capped at 2 each
        assert "wrote 6 instruction records" in capsys.readouterr().out


@pytest.fixture
def eval_tree(tmp_path):
    flores = tmp_path / "flores"
    flores.mkdir()
    flores.joinpath("fr.txt").write_text("un chat .\ndeux chiens .\n", "utf-8")
    flores.joinpath("en.txt").write_text("one cat .\ntwo dogs .\n", "utf-8")
    hyps = tmp_path / "hyps"
    hyps.mkdir()
    hyps.joinpath("fr-en.txt").write_text("one cat .\ntwo dog .\n", "utf-8")
    return flores, hyps


class TestEval:
    def test_bleu_table(self, eval_tree, tmp_path, capsys):
        flores, hyps = eval_tree
        out = tmp_path / "bleu.tsv"
        code = run_cli(
            "eval", "bleu",
            "--flores-dir", str(flores),
            "--hyp-dir", str(hyps),
            "--directions", "fr-en",
            "--per-direction", "2",
            "--out", str(out),
        )
        assert code == 0
        lines = out.read_text("utf-8").splitlines()
        assert lines[0] == "direction\tbleu"
        direction, score = lines[1].split("\t")
        assert direction == "fr-en"
        assert 0.0 <= float(score) <= 100.0

    def test_bleu_to_stdout(self, eval_tree, capsys):
        flores, hyps = eval_tree
        code = run_cli(
            "eval", "bleu",
            "--flores-dir", str(flores),
            "--hyp-dir", str(hyps),
            "--directions", "fr-en",
            "--per-direction", "2",
        )
        assert code == 0
        assert capsys.readouterr().out.startswith("direction\tbleu")

    def test_judge_without_credentials_exits_3(self, eval_tree, tmp_path, monkeypatch):
        monkeypatch.delenv("MTPIPE_JUDGE_API_KEY", raising=False)
        flores, hyps = eval_tree
        code = run_cli(
            "eval", "judge",
            "--flores-dir", str(flores),
            "--hyp-dir", str(hyps),
            "--directions", "fr-en",
            "--per-direction", "2",
            "--out", str(tmp_path / "scores.jsonl"),
            "--judge-url", "https://judge.invalid/v1",
            "--judge-model", "m",
        )
        assert code == 3

    def test_report_from_fixture_table(self, tmp_path):
        table = tmp_path / "scores.tsv"
        table.write_text(
            "direction\tours\tbaseline\nfr-en\t40.0\t30.0\nde-en\t20.0\t25.0\n", "utf-8"
        )
        out = tmp_path / "cmp.tsv"
        figure = tmp_path / "figure.json"
        code = run_cli(
            "eval", "report",
            "--fixtures", str(table),
            "--sort-by", "ours",
            "--out", str(out),
            "--figure-json", str(figure),
        )
        assert code == 0
        assert out.read_text("utf-8").splitlines()[0] == "direction\tours\tbaseline"
        payload = json.loads(figure.read_text("utf-8"))
        assert payload["wins"]["ours>baseline"] == ["fr-en"]

    def test_report_bundled(self, tmp_path):
        out = tmp_path / "cmp.tsv"
        code = run_cli("eval", "report", "--bundled", "bleu", "--sort-by", "BigTranslate", "--out", str(out))
        assert code == 0
        assert len(out.read_text("utf-8").splitlines()) == 105

    def test_report_needs_a_source(self, capsys):
        assert run_cli("eval", "report", "--sort-by", "x") == 1

    def test_report_unknown_sort_by_exits_2(self, tmp_path):
        table = tmp_path / "scores.tsv"
        table.write_text("direction\tours\nfr-en\t1.0\n", "utf-8")
        assert run_cli("eval", "report", "--fixtures", str(table), "--sort-by", "nobody") == 2


class TestRun:
    def test_full_run_with_config_file(self, tiny_corpus_dir, tmp_path, capsys):
        out_dir = tmp_path / "out"
        config = tmp_path / "run.toml"
        config.write_text(
            "\n".join(
                [
                    f'corpus_dir = "{tiny_corpus_dir}"',
                    f'out_dir = "{out_dir}"',
                    "seed = 5",
                    "batch_size = 4",
                    "base_vocab_size = 300",
                    "target_vocab_size = 320",
                    "pack_length = 64",
                    "s_high = 4",
                    "s_low = 2",
                    "cutover = 5",
                    "per_direction = 3",
                ]
            )
            + "\n",
            "utf-8",
        )
        code = run_cli("run", "--config", str(config))
        assert code == 0
        manifest = RunManifest.load(out_dir / "manifest.json")
        assert manifest.config["seed"] == 5
        assert "pipeline complete" in capsys.readouterr().out

    def test_flag_overrides_config_file(self, tiny_corpus_dir, tmp_path):
        out_dir = tmp_path / "out"
        config = tmp_path / "run.toml"
        config.write_text(
            f'corpus_dir = "{tiny_corpus_dir}"\nout_dir = "{out_dir}"\n'
            "seed = 5\nbatch_size = 4\nbase_vocab_size = 300\ntarget_vocab_size = 320\n"
            "pack_length = 64\ns_high = 4\ns_low = 2\ncutover = 5\nper_direction = 3\n",
            "utf-8",
        )
        code = run_cli("run", "--config", str(config), "--seed", "9")
        assert code == 0
        manifest = RunManifest.load(out_dir / "manifest.json")
        assert manifest.config["seed"] == 9

    def test_unknown_config_key_exits_1(self, tmp_path, capsys):
        config = tmp_path / "run.toml"
        config.write_text("mystery = 1\n", "utf-8")
        assert run_cli("run", "--config", str(config)) == 1

    def test_missing_required_settings_exit_1(self, capsys):
        assert run_cli("run") == 1
        err = capsys.readouterr().err
        assert "corpus_dir" in err

    def test_stage_failure_maps_to_exit_2(self, tiny_corpus_dir, tmp_path):
        code = run_cli(
            "run",
            "--corpus-dir", str(tiny_corpus_dir),
            "--out-dir", str(tmp_path / "out"),
            "--seed", "1",
            "--batch-size", "4",
            "--base-vocab-size", "300",
            "--target-vocab-size", "300",  # vocab stage fails
            "--pack-length", "64",
            "--s-high", "4", "--s-low", "2", "--cutover", "5",
            "--per-direction", "3",
        )
        assert code == 2
