"""
Pipeline YAML Configuration Schema

Pydantic models for validating and parsing pipeline configuration files.
"""

from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from models.decoding import DecoderConfig
from models.filtering import DEFAULT_TEMPERATURE, FilterPolicy, MixSpec
from models.manifest import LanguageTag
from utils.audio_utils import STRETCH_FACTORS, SWEEP_FACTORS

STAGE_PROBABILITIES = {"distillation": 0.4, "self_improvement": 0.25}


class PathsConfig(BaseModel):
    """Input and output locations (relative to the config file unless absolute)"""
    manifest: Optional[str] = Field(None, description="Input manifest (JSONL)")
    references: Optional[str] = Field(None, description="Reference manifest for evaluation")
    emissions_dir: Optional[str] = Field(None, description="Directory of <stem>.ctce emission files")
    lexicon: Optional[str] = Field(None, description="Lexicon file (word<TAB>tokens)")
    lm: Optional[str] = Field(None, description="ARPA language model for decoding")
    normalization_lm: Optional[str] = Field(None, description="ARPA model for homophone disambiguation")
    corpus: Optional[str] = Field(None, description="LM training corpus, one sentence per line")
    heldout: Optional[str] = Field(None, description="Held-out text removed from the corpus")
    noise: Optional[str] = Field(None, description="Noise WAV used for augmentation")
    variant_table: Optional[str] = Field(None, description="Pidgin variant table (TSV)")
    homophones: Optional[str] = Field(None, description="Pidgin homophone sets")
    output_dir: str = Field("output", description="Directory for manifests and reports")

    def resolve(self, base_path: Path) -> "PathsConfig":
        """Copy with relative paths joined onto base_path"""
        resolved = {}
        for name, value in self.model_dump().items():
            if value is None or Path(value).is_absolute():
                resolved[name] = value
            else:
                resolved[name] = str(base_path / value)
        return PathsConfig(**resolved)

    def missing(self) -> List[str]:
        """Configured input paths that do not exist"""
        missing = []
        for name, value in self.model_dump().items():
            if name == "output_dir" or value is None:
                continue
            if not Path(value).exists():
                missing.append(f"paths.{name}: {value}")
        return missing


class FilterSettings(BaseModel):
    """Pseudo-label filter configuration"""
    thresholds: Dict[str, float] = Field(
        default_factory=lambda: {lang.value: 0.0 for lang in LanguageTag},
        description="Confidence threshold per language",
    )
    drop_untagged: bool = Field(False, description="Drop texts without a language tag")
    drop_mismatched: bool = Field(True, description="Drop texts tagged with another language")
    keep_unscored: bool = Field(False, description="Keep entries without confidence")

    @field_validator("thresholds")
    @classmethod
    def validate_thresholds(cls, v: Dict[str, float]) -> Dict[str, float]:
        for lang in v:
            LanguageTag.from_code(lang)
        return v

    def to_policy(self) -> FilterPolicy:
        return FilterPolicy(
            thresholds=self.thresholds,
            drop_untagged=self.drop_untagged,
            drop_mismatched=self.drop_mismatched,
            keep_unscored=self.keep_unscored,
        )


class MixSettings(BaseModel):
    """Temperature sampling configuration"""
    temperature: float = Field(DEFAULT_TEMPERATURE, gt=0.0, description="Sampling temperature")
    basis: Literal["duration", "count"] = Field("duration", description="Weigh languages by hours or utterances")

    def to_spec(self, counts: Dict[str, float]) -> MixSpec:
        return MixSpec(counts=counts, temperature=self.temperature, basis=self.basis)


class AugmentationSettings(BaseModel):
    """Noise and time-stretch augmentation"""
    stage: Literal["distillation", "self_improvement"] = Field(
        "distillation", description="Training stage; self_improvement lowers both probabilities"
    )
    noise_prob: Optional[float] = Field(None, ge=0.0, le=1.0, description="Noise mixing probability")
    stretch_prob: Optional[float] = Field(None, ge=0.0, le=1.0, description="Time stretch probability")
    snr_min: float = Field(5.0, description="Minimum SNR in dB")
    snr_max: float = Field(30.0, description="Maximum SNR in dB")
    stretch_factors: List[float] = Field(default_factory=lambda: list(STRETCH_FACTORS))

    @field_validator("stretch_factors")
    @classmethod
    def validate_factors(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("at least one stretch factor is required")
        for factor in v:
            if not 0.5 <= factor <= 2.5:
                raise ValueError(f"stretch factor {factor} outside [0.5, 2.5]")
        return v

    @model_validator(mode='after')
    def apply_stage_defaults(self):
        """Fill unset probabilities from the stage and check the SNR range"""
        if self.snr_min > self.snr_max:
            raise ValueError(f"snr_min {self.snr_min} is above snr_max {self.snr_max}")
        if self.noise_prob is None:
            self.noise_prob = STAGE_PROBABILITIES[self.stage]
        if self.stretch_prob is None:
            self.stretch_prob = STAGE_PROBABILITIES[self.stage]
        return self


class NormalizationSettings(BaseModel):
    """Text normalization configuration"""
    spell_digits: bool = Field(True, description="Spell digit runs as English cardinals")
    pidgin: bool = Field(True, description="Apply the Pidgin variant table to pd entries")
    window: int = Field(4, ge=0, description="Homophone context words on each side")
    full_sentence: bool = Field(False, description="Score homophones against the whole sentence")


class AudioSettings(BaseModel):
    """Segmentation parameters"""
    max_gap_s: float = Field(1.5, gt=0.0, description="VAD gaps shorter than this are merged")
    keep_edge_silence: bool = Field(False, description="Absorb short leading/trailing silence")
    similarity: float = Field(0.7, ge=-1.0, le=1.0, description="Embedding cosine merge threshold")
    max_len_s: float = Field(30.0, gt=0.0, description="Maximum segment length")
    threshold_db: float = Field(-50.0, description="Silence threshold in dBFS")
    min_silence_s: float = Field(0.3, ge=0.0, description="Shortest reported silence")


class EvaluationSettings(BaseModel):
    """Scoring configuration"""
    raw: bool = Field(False, description="Score verbatim text without preprocessing")
    speed_factors: List[float] = Field(default_factory=lambda: list(SWEEP_FACTORS))
    decode_cmd: Optional[str] = Field(None, description="External decode command template, e.g. 'asr {wav}'")


class PipelineConfig(BaseModel):
    """Root pipeline configuration model"""

    language: str = Field("pd", description="Language being pseudo-labelled")
    paths: PathsConfig = Field(default_factory=PathsConfig, description="File locations")
    decoder: DecoderConfig = Field(default_factory=DecoderConfig, description="Beam search settings")
    filter: FilterSettings = Field(default_factory=FilterSettings, description="Filter policy")
    mix: MixSettings = Field(default_factory=MixSettings, description="Data mixing")
    augmentation: AugmentationSettings = Field(default_factory=AugmentationSettings)
    normalization: NormalizationSettings = Field(default_factory=NormalizationSettings)
    audio: AudioSettings = Field(default_factory=AudioSettings)
    evaluation: EvaluationSettings = Field(default_factory=EvaluationSettings)
    seed: int = Field(0, description="Seed for every stochastic choice")
    jobs: int = Field(1, ge=1, description="Worker parallelism")

    @field_validator("language")
    @classmethod
    def validate_language(cls, v: str) -> str:
        return LanguageTag.from_code(v).value

    @property
    def lang(self) -> LanguageTag:
        return LanguageTag(self.language)

    def resolve_paths(self, base_path: Path) -> None:
        """
        Resolve all relative paths to absolute paths based on the config location

        Args:
            base_path: Directory containing the config file
        """
        self.paths = self.paths.resolve(base_path)
