"""
Manifest data models

The utterance record shared by every pipeline stage, the JSON Lines manifest
codec and the language-tag helpers.
"""
import json
import re
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from core.errors import (
    LanguageTagError,
    ManifestFormatError,
    ToolkitIOError,
    UnknownLanguageError,
)


TAG_PATTERN = re.compile(r"^<\|([^|<>\s]*)\|>")

LANGUAGE_ALIASES = {
    "pcm": "pd",
    "en-ng": "en",
}

CONFIDENCE_DIGITS = 6


class LanguageTag(str, Enum):
    """Supported languages, rendered as <|xx|> tokens"""
    EN = "en"
    IG = "ig"
    YO = "yo"
    PD = "pd"
    HA = "ha"

    @property
    def token(self) -> str:
        """Literal tag token, e.g. <|pd|>"""
        return f"<|{self.value}|>"

    @classmethod
    def from_code(cls, code: str) -> "LanguageTag":
        """
        Parse a manifest language code (aliases allowed)

        Args:
            code: Language code such as "pd" or "pcm"

        Returns:
            LanguageTag

        Raises:
            UnknownLanguageError: If the code is not supported
        """
        if isinstance(code, cls):
            return code
        normalized = str(code).strip().lower()
        normalized = LANGUAGE_ALIASES.get(normalized, normalized)
        try:
            return cls(normalized)
        except ValueError:
            raise UnknownLanguageError(str(code))

    @classmethod
    def from_token(cls, token: str) -> "LanguageTag":
        """
        Parse a literal tag token; only canonical codes are accepted

        Raises:
            UnknownLanguageError: If token is not one of the five tags
        """
        match = TAG_PATTERN.match(token)
        if not match or match.end() != len(token):
            raise UnknownLanguageError(token)
        try:
            return cls(match.group(1))
        except ValueError:
            raise UnknownLanguageError(token)

    def __str__(self) -> str:
        return self.value


def is_tag_token(token: str) -> bool:
    """True for any token shaped like <|xx|>, known or not"""
    match = TAG_PATTERN.match(token)
    return bool(match) and match.end() == len(token)


def strip_language_tag(text: str) -> Tuple[Optional[LanguageTag], str]:
    """
    Split a leading language tag off text

    Args:
        text: Possibly tagged text

    Returns:
        (tag, remainder) when text starts with a valid tag, else (None, text)
    """
    match = TAG_PATTERN.match(text)
    if not match:
        return None, text
    try:
        tag = LanguageTag(match.group(1))
    except ValueError:
        return None, text
    remainder = text[match.end():]
    if remainder.startswith(" "):
        remainder = remainder[1:]
    return tag, remainder


def prepend_language_tag(text: str, lang: LanguageTag) -> str:
    """
    Prefix text with its language tag token

    Args:
        text: Normalized, untagged text
        lang: Language of the text

    Returns:
        "<|xx|> " + text

    Raises:
        LanguageTagError: If text already starts with a valid tag
    """
    existing, _ = strip_language_tag(text)
    if existing is not None:
        raise LanguageTagError(text)
    return f"{LanguageTag.from_code(lang).token} {text}"


class ManifestEntry(BaseModel):
    """One utterance record"""
    model_config = ConfigDict(frozen=True)

    audio_path: str = Field(..., description="Audio file reference, relative to the manifest or absolute")
    duration_s: float = Field(..., ge=0.0, description="Duration in seconds")
    text: str = Field(..., description="Untagged transcript")
    lang: LanguageTag = Field(..., description="Language of the utterance")
    confidence: Optional[float] = Field(None, gt=0.0, le=1.0, description="Decoder confidence")
    source: Optional[str] = Field(None, description="Dataset provenance")

    @field_validator("lang", mode="before")
    @classmethod
    def normalize_lang(cls, v):
        """Accept aliases such as pcm"""
        return LanguageTag.from_code(v)

    @field_validator("text")
    @classmethod
    def validate_text(cls, v: str) -> str:
        if "\n" in v or "\r" in v:
            raise ValueError("text must not contain raw newlines")
        return v

    @field_validator("confidence")
    @classmethod
    def round_confidence(cls, v: Optional[float]) -> Optional[float]:
        if v is None:
            return v
        return round(v, CONFIDENCE_DIGITS)

    def with_text(self, text: str, **updates) -> "ManifestEntry":
        """Copy with new text (and optional other field updates), re-validated"""
        data = self.model_dump()
        data.update(updates)
        data["text"] = text
        return ManifestEntry(**data)

    def tagged_text(self) -> str:
        """Text with the language tag prepended"""
        return prepend_language_tag(self.text, self.lang)

    def resolve_audio(self, base_dir: Optional[Union[str, Path]] = None) -> Path:
        """Audio path resolved against the manifest directory"""
        path = Path(self.audio_path)
        if path.is_absolute() or base_dir is None:
            return path
        return Path(base_dir) / path

    def to_json_line(self) -> str:
        """Serialize to a single JSON line (no trailing newline)"""
        record = {
            "audio_path": self.audio_path,
            "duration_s": self.duration_s,
            "text": self.text,
            "lang": self.lang.value,
        }
        if self.confidence is not None:
            record["confidence"] = self.confidence
        if self.source is not None:
            record["source"] = self.source
        return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def _parse_line(path: Union[str, Path], line_no: int, line: str) -> ManifestEntry:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise ManifestFormatError(path, line_no, f"malformed JSON ({e.msg})")
    if not isinstance(record, dict):
        raise ManifestFormatError(path, line_no, "expected a JSON object")

    if "lang" in record:
        try:
            LanguageTag.from_code(record["lang"])
        except UnknownLanguageError:
            raise UnknownLanguageError(str(record["lang"]), line_no)

    try:
        return ManifestEntry(**record)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(x) for x in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ManifestFormatError(path, line_no, problems)
    except TypeError as e:
        raise ManifestFormatError(path, line_no, str(e))


def iter_manifest(path: Union[str, Path]) -> Iterator[ManifestEntry]:
    """
    Stream entries from a JSONL manifest

    Blank lines are skipped; line numbers count every physical line.

    Args:
        path: Manifest path

    Yields:
        ManifestEntry in file order

    Raises:
        ManifestFormatError: Malformed line
        UnknownLanguageError: Unsupported lang code
        ToolkitIOError: File cannot be read
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                stripped = line.strip()
                if not stripped:
                    continue
                yield _parse_line(path, line_no, stripped)
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))


def read_manifest(path: Union[str, Path]) -> List[ManifestEntry]:
    """Read a whole manifest into a list"""
    return list(iter_manifest(path))


def write_manifest(entries: Iterable[ManifestEntry], path: Union[str, Path]) -> int:
    """
    Write entries as JSON Lines (UTF-8, LF)

    Args:
        entries: Entries to write
        path: Output path; parent directories are created

    Returns:
        Number of entries written

    Raises:
        ToolkitIOError: Path is not writable
    """
    count = 0
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for entry in entries:
                f.write(entry.to_json_line())
                f.write("\n")
                count += 1
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))
    return count
