"""
Custom Error Classes

Defines the toolkit exception hierarchy. Every error carries an optional hint
that the CLI prints under the message, and maps to a process exit code.
"""

from pathlib import Path
from typing import Iterable, Optional, Union


EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_USAGE = 64
EXIT_INTERRUPTED = 130


class ToolkitError(Exception):
    """Base exception for toolkit errors"""

    exit_code = EXIT_VALIDATION

    def __init__(self, message: str, hint: Optional[str] = None):
        """
        Initialize toolkit error

        Args:
            message: Error message
            hint: Optional hint for resolving the error
        """
        self.message = message
        self.hint = hint
        super().__init__(self.message)

    def __str__(self):
        """Format error message with hint"""
        if self.hint:
            return f"{self.message}\n[HINT] {self.hint}"
        return self.message


class ToolkitIOError(ToolkitError):
    """Raised when a file cannot be read or written"""

    exit_code = EXIT_IO

    def __init__(self, path: Union[str, Path], error: str):
        message = f"I/O error on {path}: {error}"
        hint = "Check that the path exists and that you have read/write permission."
        super().__init__(message, hint)
        self.path = str(path)


class MissingAudioError(ToolkitIOError):
    """Raised when audio files referenced by a manifest do not exist"""

    def __init__(self, missing: Iterable[str]):
        self.missing = list(missing)
        listing = "\n".join(f"  - {p}" for p in self.missing)
        ToolkitError.__init__(
            self,
            f"{len(self.missing)} audio file(s) not found:\n{listing}",
            "Audio paths are resolved relative to the manifest directory unless absolute.",
        )
        self.path = self.missing[0] if self.missing else ""


class ManifestFormatError(ToolkitError):
    """Raised when a manifest line cannot be parsed"""

    def __init__(self, path: Union[str, Path], line_no: int, error: str):
        message = f"Invalid manifest {path} at line {line_no}: {error}"
        hint = (
            "Each line must be one JSON object with keys "
            "audio_path, duration_s, text, lang (optional: confidence, source)."
        )
        super().__init__(message, hint)
        self.line_no = line_no


class UnknownLanguageError(ToolkitError):
    """Raised when a language code is not one of the supported tags"""

    def __init__(self, code: str, line_no: Optional[int] = None):
        where = f" at line {line_no}" if line_no is not None else ""
        message = f"unknown language{where}: {code!r}"
        hint = "Supported languages: en, ig, yo, pd (alias pcm), ha."
        super().__init__(message, hint)
        self.code = code
        self.line_no = line_no


class LanguageTagError(ToolkitError):
    """Raised when text is tagged twice"""

    def __init__(self, text: str):
        preview = text if len(text) <= 40 else text[:37] + "..."
        super().__init__(
            f"already tagged: {preview!r}",
            "Strip the existing tag with strip_language_tag before tagging again.",
        )


class CorpusError(ToolkitError):
    """Raised for invalid language-model training or evaluation corpora"""


class ArpaFormatError(ToolkitError):
    """Raised when an ARPA file is malformed"""

    def __init__(self, path: Union[str, Path], line_no: int, error: str):
        super().__init__(
            f"Invalid ARPA file {path} at line {line_no}: {error}",
            "Expected sections \\data\\, \\k-grams: ... and \\end\\ with tab-separated fields.",
        )
        self.line_no = line_no


class EmissionFormatError(ToolkitError):
    """Raised when an emissions file is malformed"""

    def __init__(self, path: Union[str, Path], error: str):
        super().__init__(
            f"Invalid emissions file {path}: {error}",
            "Emissions files start with magic 'CTCE' followed by version, T, V, blank index and vocab.",
        )


class LexiconFormatError(ToolkitError):
    """Raised when a lexicon line cannot be parsed"""

    def __init__(self, path: Union[str, Path], line_no: int, error: str):
        super().__init__(
            f"Invalid lexicon {path} at line {line_no}: {error}",
            "Lexicon lines look like: word<TAB>token token token",
        )


class DecodingError(ToolkitError):
    """Raised when decoding cannot run with the given inputs"""


class AudioFormatError(ToolkitError):
    """Raised for unsupported audio or invalid audio-processing parameters"""


class SegmentOrderError(ToolkitError):
    """Raised when segments are unsorted or overlap"""

    def __init__(self, index: int, detail: str):
        super().__init__(
            f"Segments must be sorted and non-overlapping (segment {index}): {detail}",
            "Sort segments by start time and resolve overlaps before merging.",
        )


class EmbeddingDimensionError(ToolkitError):
    """Raised when segment embeddings have different dimensions"""


class MetricError(ToolkitError):
    """Raised when a metric is undefined for its inputs"""


class PolicyError(ToolkitError):
    """Raised when a filter policy or mixing spec is invalid"""


class ConfigLoadError(ToolkitError):
    """Raised when configuration loading fails"""

    def __init__(self, message: str):
        super().__init__(
            message,
            "Check the configuration file format and values. "
            "See templates/default/config.yaml for reference.",
        )


class ConfigOverrideError(ToolkitError):
    """Raised when CLI config override format is invalid"""

    def __init__(self, override_str: str, error: str):
        message = f"Invalid config override '{override_str}': {error}"
        hint = (
            "Override format: --override key.subkey=value\n"
            "Examples:\n"
            "  --override decoder.beam_size=50\n"
            "  --override filter.thresholds.pd=0.9\n"
            "  --override mix.temperature=10"
        )
        super().__init__(message, hint)


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to a CLI exit code

    Args:
        error: Raised exception

    Returns:
        Process exit code
    """
    if isinstance(error, ToolkitError):
        return error.exit_code
    if isinstance(error, OSError):
        return EXIT_IO
    if isinstance(error, KeyboardInterrupt):
        return EXIT_INTERRUPTED
    return EXIT_VALIDATION


def format_error_for_cli(error: Exception) -> str:
    """
    Format error for CLI display

    Args:
        error: Exception to format

    Returns:
        Formatted error string
    """
    if isinstance(error, ToolkitError):
        return str(error)
    return f"[ERROR] {str(error)}"
