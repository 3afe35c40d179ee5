"""
Pseudo-label filtering models

Filter policy, data-mixing spec and the per-language stage report.
"""
from dataclasses import dataclass
from typing import Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from models.manifest import LanguageTag, ManifestEntry

REASON_CONFIDENCE = "confidence"
REASON_UNSCORED = "unscored"
REASON_MISMATCH = "language-mismatch"
REASON_UNTAGGED = "untagged"

DEFAULT_TEMPERATURE = 20.0


class FilterPolicy(BaseModel):
    """Per-language confidence thresholds and tag handling"""
    model_config = ConfigDict(frozen=True)

    thresholds: Dict[LanguageTag, float] = Field(
        default_factory=dict, description="Minimum confidence per language"
    )
    drop_untagged: bool = Field(False, description="Drop texts without a language tag")
    drop_mismatched: bool = Field(True, description="Drop texts tagged with another language")
    keep_unscored: bool = Field(False, description="Keep entries that carry no confidence")

    @field_validator("thresholds", mode="before")
    @classmethod
    def normalize_languages(cls, v):
        if v is None:
            return {}
        return {LanguageTag.from_code(k): val for k, val in dict(v).items()}

    @field_validator("thresholds")
    @classmethod
    def validate_thresholds(cls, v: Dict[LanguageTag, float]) -> Dict[LanguageTag, float]:
        for lang, threshold in v.items():
            if not 0.0 <= threshold <= 1.0:
                raise ValueError(f"threshold for {lang.value} must be in [0, 1], got {threshold}")
        return v

    @classmethod
    def uniform(cls, threshold: float = 0.0, **kwargs) -> "FilterPolicy":
        """Same threshold for every language"""
        return cls(thresholds={lang: threshold for lang in LanguageTag}, **kwargs)


class MixSpec(BaseModel):
    """Sampling mass per key (language or dataset) and temperature"""
    model_config = ConfigDict(frozen=True)

    counts: Dict[str, float] = Field(..., description="Hours or utterance counts per key")
    temperature: float = Field(DEFAULT_TEMPERATURE, gt=0.0, description="Sampling temperature")
    basis: Literal["duration", "count"] = Field("duration", description="What counts measure")

    @field_validator("counts")
    @classmethod
    def validate_counts(cls, v: Dict[str, float]) -> Dict[str, float]:
        if not v:
            raise ValueError("at least one key is required")
        for key, count in v.items():
            if count < 0:
                raise ValueError(f"count for {key} must be non-negative, got {count}")
        return v


@dataclass(frozen=True)
class DroppedEntry:
    entry: ManifestEntry
    reason: str

    def to_record(self) -> dict:
        return {"audio_path": self.entry.audio_path, "lang": self.entry.lang.value, "reason": self.reason}


@dataclass
class LanguageStats:
    kept: int = 0
    dropped_confidence: int = 0
    dropped_unscored: int = 0
    dropped_language: int = 0
    dropped_untagged: int = 0
    kept_seconds: float = 0.0

    def __add__(self, other: "LanguageStats") -> "LanguageStats":
        return LanguageStats(
            self.kept + other.kept,
            self.dropped_confidence + other.dropped_confidence,
            self.dropped_unscored + other.dropped_unscored,
            self.dropped_language + other.dropped_language,
            self.dropped_untagged + other.dropped_untagged,
            self.kept_seconds + other.kept_seconds,
        )

    def to_record(self) -> dict:
        return {
            "kept": self.kept,
            "dropped_confidence": self.dropped_confidence,
            "dropped_unscored": self.dropped_unscored,
            "dropped_language": self.dropped_language,
            "dropped_untagged": self.dropped_untagged,
            "hours": round(self.kept_seconds / 3600.0, 6),
        }


class StageReport:
    """Per-language kept/dropped statistics of a filtering stage"""

    def __init__(self, languages: Optional[Dict[LanguageTag, LanguageStats]] = None):
        self.languages: Dict[LanguageTag, LanguageStats] = {lang: LanguageStats() for lang in LanguageTag}
        for lang, stats in (languages or {}).items():
            self.languages[lang] = stats

    def record_kept(self, entry: ManifestEntry) -> None:
        stats = self.languages[entry.lang]
        stats.kept += 1
        stats.kept_seconds += entry.duration_s

    def record_dropped(self, dropped: DroppedEntry) -> None:
        stats = self.languages[dropped.entry.lang]
        field_name = {
            REASON_CONFIDENCE: "dropped_confidence",
            REASON_UNSCORED: "dropped_unscored",
            REASON_MISMATCH: "dropped_language",
            REASON_UNTAGGED: "dropped_untagged",
        }[dropped.reason]
        setattr(stats, field_name, getattr(stats, field_name) + 1)

    @property
    def total_kept(self) -> int:
        return sum(s.kept for s in self.languages.values())

    @property
    def total_hours(self) -> float:
        return sum(s.kept_seconds for s in self.languages.values()) / 3600.0

    def __add__(self, other: "StageReport") -> "StageReport":
        return StageReport({lang: self.languages[lang] + other.languages[lang] for lang in LanguageTag})

    def to_record(self) -> dict:
        return {
            "languages": {lang.value: stats.to_record() for lang, stats in self.languages.items()},
            "total_kept": self.total_kept,
            "total_hours": round(self.total_hours, 6),
        }
