"""
Manifest and Configuration Validators

Validates manifests, configuration file references and output locations.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from config.pipeline_schema import PipelineConfig
from core.errors import ToolkitError
from models.manifest import LanguageTag, iter_manifest, strip_language_tag


@dataclass
class ManifestSummary:
    """What `manifest validate` reports"""
    entries: int = 0
    per_language: Dict[str, int] = field(default_factory=dict)
    seconds: float = 0.0
    scored: int = 0
    tagged: int = 0
    missing_audio: List[str] = field(default_factory=list)

    @property
    def hours(self) -> float:
        return self.seconds / 3600.0

    def to_record(self) -> dict:
        return {
            "entries": self.entries,
            "languages": dict(sorted(self.per_language.items())),
            "hours": round(self.hours, 6),
            "scored": self.scored,
            "tagged": self.tagged,
            "missing_audio": list(self.missing_audio),
        }


def validate_manifest(
    manifest_path: Union[str, Path],
    check_audio: bool = False
) -> ManifestSummary:
    """
    Parse every line of a manifest and summarize it

    Args:
        manifest_path: Path to JSONL manifest
        check_audio: Also check that each audio file exists

    Returns:
        ManifestSummary

    Raises:
        ManifestFormatError, UnknownLanguageError: First bad line
        ToolkitIOError: Manifest cannot be read
    """
    base_dir = Path(manifest_path).parent
    summary = ManifestSummary(per_language={lang.value: 0 for lang in LanguageTag})
    for entry in iter_manifest(manifest_path):
        summary.entries += 1
        summary.per_language[entry.lang.value] += 1
        summary.seconds += entry.duration_s
        if entry.confidence is not None:
            summary.scored += 1
        if strip_language_tag(entry.text)[0] is not None:
            summary.tagged += 1
        if check_audio and not entry.resolve_audio(base_dir).exists():
            summary.missing_audio.append(entry.audio_path)
    return summary


def validate_output_path(output_path: Path) -> Tuple[bool, Optional[str]]:
    """
    Validate output directory can be created/accessed

    Args:
        output_path: Path to output directory

    Returns:
        Tuple of (is_valid, error_message)
    """
    try:
        output_path.mkdir(parents=True, exist_ok=True)

        test_file = output_path / ".write_test"
        try:
            test_file.touch()
            test_file.unlink()
        except OSError as e:
            return False, f"No write permission for output directory: {e}"

        return True, None

    except OSError as e:
        return False, f"Cannot create output directory: {e}"


def validate_pipeline_config(config: PipelineConfig) -> Tuple[bool, List[str]]:
    """
    Check that every configured input file exists

    Args:
        config: Pipeline configuration (paths already resolved)

    Returns:
        Tuple of (is_valid, list_of_error_messages)
    """
    errors = [f"File not found: {item}" for item in config.paths.missing()]
    if config.decoder.use_lexicon and not config.paths.lexicon:
        errors.append("decoder.use_lexicon is set but paths.lexicon is empty")
    if config.decoder.lm_weight > 0 and not config.paths.lm:
        errors.append(f"decoder.lm_weight={config.decoder.lm_weight} needs paths.lm")
    return len(errors) == 0, errors


def perform_full_validation(
    config: PipelineConfig,
    check_audio: bool = False
) -> Tuple[bool, List[str], List[str]]:
    """
    Perform complete validation of a pipeline run

    Args:
        config: Pipeline configuration
        check_audio: Whether to check that manifest audio files exist

    Returns:
        Tuple of (is_valid, list_of_errors, list_of_warnings)
    """
    errors: List[str] = []
    warnings: List[str] = []

    is_valid, config_errors = validate_pipeline_config(config)
    if not is_valid:
        errors.extend(config_errors)

    is_valid, error_msg = validate_output_path(Path(config.paths.output_dir))
    if not is_valid:
        errors.append(error_msg)

    if config.paths.manifest and Path(config.paths.manifest).exists():
        try:
            summary = validate_manifest(config.paths.manifest, check_audio=check_audio)
        except ToolkitError as e:
            errors.append(e.message)
        else:
            if summary.entries == 0:
                warnings.append(f"Manifest is empty: {config.paths.manifest}")
            if summary.missing_audio:
                errors.append(f"{len(summary.missing_audio)} audio file(s) missing")

    if all(t == 0.0 for t in config.filter.thresholds.values()):
        warnings.append("All confidence thresholds are 0.0; the confidence filter keeps every scored entry.")

    if config.decoder.beam_size < 10:
        warnings.append(f"Small beam ({config.decoder.beam_size}); pseudo-label quality may suffer.")

    return len(errors) == 0, errors, warnings
