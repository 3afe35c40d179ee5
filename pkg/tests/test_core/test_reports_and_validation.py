"""
Unit tests for reports, error mapping and run validation
"""
import json

import pytest

from config.pipeline_schema import PipelineConfig
from core.errors import (
    EXIT_INTERRUPTED,
    EXIT_IO,
    EXIT_VALIDATION,
    ConfigLoadError,
    ManifestFormatError,
    MissingAudioError,
    ToolkitError,
    ToolkitIOError,
    exit_code_for,
    format_error_for_cli,
)
from core.reports import (
    SCHEMA_VERSION,
    build_report,
    dumps_report,
    format_report_summary,
    load_report,
    save_report,
    save_table,
    table_frame,
    table_to_csv,
)
from core.validators import perform_full_validation, validate_manifest, validate_pipeline_config
from models.manifest import ManifestEntry, write_manifest


class TestErrors:
    def test_hint_rendered(self):
        error = ToolkitError("bad thing", "do this")
        assert str(error) == "bad thing\n[HINT] do this"
        assert format_error_for_cli(error) == "bad thing\n[HINT] do this"
        assert format_error_for_cli(ValueError("oops")) == "[ERROR] oops"

    @pytest.mark.parametrize(
        "error,code",
        [
            (ToolkitIOError("x.wav", "missing"), EXIT_IO),
            (MissingAudioError(["a.wav"]), EXIT_IO),
            (ManifestFormatError("m.jsonl", 3, "bad json"), EXIT_VALIDATION),
            (ConfigLoadError("bad"), EXIT_VALIDATION),
            (FileNotFoundError("x"), EXIT_IO),
            (KeyboardInterrupt(), EXIT_INTERRUPTED),
            (RuntimeError("x"), EXIT_VALIDATION),
        ],
    )
    def test_exit_codes(self, error, code):
        assert exit_code_for(error) == code

    def test_manifest_error_carries_line(self):
        error = ManifestFormatError("m.jsonl", 3, "bad json")
        assert error.line_no == 3
        assert "line 3" in error.message


class TestReports:
    def test_header(self):
        report = build_report("wer", {"wer": 0.25}, seed=7)
        assert report["schema_version"] == SCHEMA_VERSION
        assert report["kind"] == "wer"
        assert report["seed"] == 7
        assert "seed" not in build_report("wer", {})

    def test_dumps_is_canonical(self):
        first = dumps_report({"b": 1, "a": {"y": 2, "x": "ẹ"}})
        second = dumps_report({"a": {"x": "ẹ", "y": 2}, "b": 1})
        assert first == second
        assert first.endswith("\n")
        assert "ẹ" in first

    def test_save_and_load(self, tmp_path):
        report = build_report("filter-stage", {"total_kept": 3})
        json_path = save_report(report, tmp_path / "r" / "report.json")
        assert load_report(json_path) == report
        assert json.loads(json_path.read_text(encoding="utf-8")) == report

        yaml_path = save_report(report, tmp_path / "report.yaml", format="yaml")
        assert load_report(yaml_path) == report

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            save_report({}, tmp_path / "r.txt", format="txt")
        with pytest.raises(ToolkitIOError):
            load_report(tmp_path / "absent.json")

    def test_table_csv(self, tmp_path):
        frame = table_frame([(0.8, 0.25), (1.0, 0.125)], ["factor", "wer"])
        assert table_to_csv(frame) == "factor,wer\n0.8000,0.2500\n1.0000,0.1250\n"
        path = save_table(frame, tmp_path / "sweep.csv")
        assert path.read_text(encoding="utf-8").startswith("factor,wer\n")

    def test_summary(self):
        report = build_report(
            "filter-stage",
            {"languages": {"pd": {"kept": 2, "dropped_confidence": 0}}, "total_kept": 2},
            seed=1,
        )
        summary = format_report_summary(report)
        assert "filter-stage" in summary
        assert "pd: kept=2" in summary
        assert "dropped_confidence" not in summary
        assert "total_kept: 2" in summary


class TestValidators:
    @pytest.fixture
    def manifest(self, tmp_path):
        path = tmp_path / "train.jsonl"
        (tmp_path / "a.wav").write_bytes(b"")
        write_manifest(
            [
                ManifestEntry(audio_path="a.wav", duration_s=1800, text="<|pd|> how far", lang="pd", confidence=0.9),
                ManifestEntry(audio_path="b.wav", duration_s=1800, text="bawo ni", lang="yo"),
            ],
            path,
        )
        return path

    def test_manifest_summary(self, manifest):
        summary = validate_manifest(manifest, check_audio=True)
        assert summary.entries == 2
        assert summary.per_language["pd"] == 1
        assert summary.hours == pytest.approx(1.0)
        assert summary.scored == 1
        assert summary.tagged == 1
        assert summary.missing_audio == ["b.wav"]
        assert summary.to_record()["languages"]["yo"] == 1

    def test_missing_inputs_reported(self, tmp_path):
        config = PipelineConfig(paths={"lexicon": str(tmp_path / "lex.txt")}, decoder={"use_lexicon": True})
        ok, errors = validate_pipeline_config(config)
        assert not ok
        assert any("paths.lexicon" in e for e in errors)
        assert any("paths.lm" in e for e in errors)

    def test_full_validation(self, tmp_path, manifest):
        config = PipelineConfig(
            paths={"manifest": str(manifest), "output_dir": str(tmp_path / "out")},
            decoder={"lm_weight": 0.0, "beam_size": 4},
        )
        ok, errors, warnings = perform_full_validation(config, check_audio=True)
        assert not ok
        assert errors == ["1 audio file(s) missing"]
        assert any("thresholds" in w for w in warnings)
        assert any("Small beam" in w for w in warnings)
