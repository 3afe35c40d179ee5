"""
Integration tests for the command-line interface
"""
import json

import pytest

from cli import main
from core.errors import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION
from core.reports import load_report
from models.manifest import read_manifest
from tests.fixtures.smoke_fixture import build_smoke_fixture


def write_lines(path, lines):
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    return str(path)


@pytest.fixture
def smoke(tmp_path):
    return build_smoke_fixture(tmp_path / "smoke", utterances=10)


class TestUsage:
    def test_unknown_command(self):
        with pytest.raises(SystemExit) as exc:
            main(["bogus"])
        assert exc.value.code == EXIT_USAGE

    def test_noun_without_verb(self, capsys):
        assert main(["eval"]) == EXIT_USAGE

    def test_missing_input_file(self, tmp_path):
        ref = write_lines(tmp_path / "ref.txt", ["a b"])
        assert main(["eval", "wer", "--ref", ref, "--hyp", str(tmp_path / "absent.txt")]) == EXIT_IO

    def test_bad_override(self, tmp_path):
        ref = write_lines(tmp_path / "ref.txt", ["a b"])
        assert main(["eval", "wer", "--ref", ref, "--hyp", ref, "--override", "novalue"]) == EXIT_VALIDATION


class TestEval:
    def test_wer_identity(self, tmp_path, capsys):
        ref = write_lines(tmp_path / "ref.txt", ["Wetin dey happen?", "how far"])
        hyp = write_lines(tmp_path / "hyp.txt", ["<|pd|> wetin dey happen", "how far"])
        assert main(["eval", "wer", "--ref", ref, "--hyp", hyp]) == EXIT_OK
        assert capsys.readouterr().out == "wer=0.0000\n"

    def test_wer_report(self, tmp_path, capsys):
        ref = write_lines(tmp_path / "ref.txt", ["a b c"])
        hyp = write_lines(tmp_path / "hyp.txt", ["a x c"])
        report = tmp_path / "wer.json"
        assert main(["eval", "wer", "--ref", ref, "--hyp", hyp, "--report", str(report)]) == EXIT_OK
        assert capsys.readouterr().out == "wer=0.3333\n"
        assert load_report(report)["wer"]["substitutions"] == 1

    def test_line_count_mismatch(self, tmp_path):
        ref = write_lines(tmp_path / "ref.txt", ["a", "b"])
        hyp = write_lines(tmp_path / "hyp.txt", ["a"])
        assert main(["eval", "wer", "--ref", ref, "--hyp", hyp]) == EXIT_VALIDATION

    def test_lid_from_text(self, tmp_path, capsys):
        hyp = write_lines(tmp_path / "hyp.txt", ["<|pd|> how far"] * 97 + ["<|en|> how far"] * 3)
        assert main(["eval", "lid", "--hyp", hyp, "--lang", "pd"]) == EXIT_OK
        rows = dict(line.split(",") for line in capsys.readouterr().out.splitlines()[1:])
        assert rows["pd"] == "98.48"
        assert rows["yo"] == "n/a"


class TestMix:
    def test_weights(self, capsys):
        assert main(["mix", "weights", "--counts", "big=900,small=100"]) == EXIT_OK
        assert capsys.readouterr().out == "big=0.5274\nsmall=0.4726\n"

    def test_unit_temperature(self, capsys):
        assert main(["mix", "weights", "--counts", "pd=3,yo=1", "--temperature", "1"]) == EXIT_OK
        assert capsys.readouterr().out == "pd=0.7500\nyo=0.2500\n"


class TestText:
    def test_normalize_pidgin(self, tmp_path, capsys):
        text = write_lines(tmp_path / "in.txt", ["Weytin de happen?"])
        assert main(["norm", "pidgin", "--input", text]) == EXIT_OK
        assert capsys.readouterr().out == "wetin dey hapun\n"

    def test_lm_train_and_perplexity(self, tmp_path, capsys):
        corpus = write_lines(tmp_path / "corpus.txt", ["a b", "a b"])
        model = tmp_path / "ab.arpa"
        assert main(["lm", "train", "--corpus", corpus, "--order", "2", "--out", str(model)]) == EXIT_OK
        assert model.read_text(encoding="utf-8").startswith("\\data\\")
        capsys.readouterr()
        assert main(["lm", "perplexity", "--corpus", corpus, "--lm", f"ab={model}"]) == EXIT_OK
        assert capsys.readouterr().out == "perplexity=1.55\n"


class TestPipelineCommands:
    def test_manifest_validate(self, smoke, capsys):
        assert main(["manifest", "validate", "--manifest", str(smoke.manifest), "--check-audio"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "entries=10" in out
        assert "pd=10" in out

    def test_dry_run(self, smoke):
        assert main(["pipeline", "run", "--config", str(smoke.config), "--dry-run"]) == EXIT_OK

    def test_run(self, smoke, tmp_path):
        out_dir = tmp_path / "run"
        code = main(["pipeline", "run", "--config", str(smoke.config), "--output-dir", str(out_dir), "--jobs", "2"])
        assert code == EXIT_OK
        assert len(read_manifest(out_dir / "pseudo_labels.jsonl")) == 10
        report = json.loads((out_dir / "pipeline_report.json").read_text(encoding="utf-8"))
        assert report["language"] == "pd"
        assert report["decoder"]["beam_size"] == 16

    def test_missing_lm_is_a_validation_error(self, smoke, tmp_path):
        code = main([
            "pipeline", "run", "--config", str(smoke.config),
            "--lm", str(tmp_path / "absent.arpa"), "--output-dir", str(tmp_path / "run"),
        ])
        assert code == EXIT_VALIDATION
