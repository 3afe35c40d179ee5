"""
Decoding data models

Emission matrices and their binary file format, decoder configuration and
beam-search hypotheses.
"""
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import logsumexp

from core.errors import DecodingError, EmissionFormatError, ToolkitIOError
from models.manifest import LanguageTag, strip_language_tag


EMISSION_MAGIC = b"CTCE"
EMISSION_VERSION = 1
_HEADER = struct.Struct("<4sIIII")
_LENGTH = struct.Struct("<I")

ROW_TOLERANCE = 1e-3
MIN_CONFIDENCE = 1e-6


@dataclass(frozen=True, eq=False)
class EmissionMatrix:
    """T x V per-frame natural-log posteriors from an acoustic model"""
    log_probs: np.ndarray
    vocab: Tuple[str, ...]
    blank_index: int = 0
    _checked: Dict[str, bool] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        array = np.asarray(self.log_probs, dtype=np.float32)
        if array.ndim != 2:
            raise DecodingError(f"emissions must be 2-D (T x V), got shape {array.shape}")
        object.__setattr__(self, "log_probs", array)
        object.__setattr__(self, "vocab", tuple(self.vocab))
        frames, classes = array.shape
        if frames < 1:
            raise DecodingError("emissions need T >= 1 frames")
        if classes != len(self.vocab):
            raise DecodingError(f"vocab has {len(self.vocab)} entries but emissions have V={classes}")
        if not 0 <= self.blank_index < classes:
            raise DecodingError(f"blank index {self.blank_index} outside [0, {classes})")

    @property
    def frames(self) -> int:
        return self.log_probs.shape[0]

    @property
    def classes(self) -> int:
        return self.log_probs.shape[1]

    def validate(self, tolerance: float = ROW_TOLERANCE) -> None:
        """
        Check every row is a normalized log distribution

        Raises:
            DecodingError: unnormalized emissions
        """
        if self._checked.get("rows"):
            return
        values = self.log_probs.astype(np.float64)
        if not np.all(np.isfinite(values) | np.isneginf(values)):
            raise DecodingError("unnormalized emissions: NaN or +inf values")
        row_sums = logsumexp(values, axis=1)
        bad = np.flatnonzero(np.abs(row_sums) > tolerance)
        if bad.size:
            raise DecodingError(
                f"unnormalized emissions: row {int(bad[0])} log-sum-exp is {row_sums[bad[0]]:.6f}",
                "Pass log-softmax outputs, not raw logits.",
            )
        self._checked["rows"] = True

    @classmethod
    def from_probs(cls, probs, vocab: Sequence[str], blank_index: int = 0) -> "EmissionMatrix":
        """Build from a probability grid (rows renormalized)"""
        grid = np.asarray(probs, dtype=np.float64)
        grid = grid / grid.sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore"):
            return cls(np.log(grid), tuple(vocab), blank_index)


def write_emissions(em: EmissionMatrix, path: Union[str, Path]) -> None:
    """
    Write emissions in the CTCE binary format

    Layout: magic "CTCE", u32 version, u32 T, u32 V, u32 blank index,
    V length-prefixed UTF-8 tokens, then T*V little-endian float32 values.
    """
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            f.write(_HEADER.pack(EMISSION_MAGIC, EMISSION_VERSION, em.frames, em.classes, em.blank_index))
            for token in em.vocab:
                encoded = token.encode("utf-8")
                f.write(_LENGTH.pack(len(encoded)))
                f.write(encoded)
            f.write(em.log_probs.astype("<f4").tobytes(order="C"))
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))


def read_emissions(path: Union[str, Path]) -> EmissionMatrix:
    """
    Read a CTCE emissions file

    Raises:
        EmissionFormatError: Bad magic, unsupported version, truncated or oversized payload
        ToolkitIOError: File cannot be read
    """
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))

    if len(data) < _HEADER.size:
        raise EmissionFormatError(path, "truncated header")
    magic, version, frames, classes, blank = _HEADER.unpack_from(data, 0)
    if magic != EMISSION_MAGIC:
        raise EmissionFormatError(path, f"magic mismatch ({magic!r})")
    if version != EMISSION_VERSION:
        raise EmissionFormatError(path, f"unsupported version {version}")
    if frames < 1:
        raise EmissionFormatError(path, "T ≥ 1 required, header has T=0")

    offset = _HEADER.size
    vocab = []
    for i in range(classes):
        if offset + _LENGTH.size > len(data):
            raise EmissionFormatError(path, f"truncated vocab at entry {i}")
        (length,) = _LENGTH.unpack_from(data, offset)
        offset += _LENGTH.size
        if offset + length > len(data):
            raise EmissionFormatError(path, f"truncated vocab at entry {i}")
        try:
            vocab.append(data[offset:offset + length].decode("utf-8"))
        except UnicodeDecodeError:
            raise EmissionFormatError(path, f"vocab entry {i} is not UTF-8")
        offset += length

    expected = frames * classes * 4
    payload = len(data) - offset
    if payload != expected:
        raise EmissionFormatError(
            path,
            f"header claims T={frames}, V={classes} ({frames * classes} floats) "
            f"but payload holds {payload / 4:g}",
        )
    values = np.frombuffer(data, dtype="<f4", count=frames * classes, offset=offset)
    try:
        return EmissionMatrix(values.reshape(frames, classes).astype(np.float32), tuple(vocab), blank)
    except DecodingError as e:
        raise EmissionFormatError(path, e.message)


class DecoderConfig(BaseModel):
    """Beam-search settings"""
    model_config = ConfigDict(frozen=True)

    beam_size: int = Field(100, ge=1, description="Prefixes kept per frame")
    lm_weight: float = Field(0.5, ge=0.0, description="LM weight (alpha)")
    word_bonus: float = Field(1.0, description="Score added per completed word (beta)")
    use_lexicon: bool = Field(False, description="Restrict words to the lexicon")
    prune_log_threshold: float = Field(
        float("-inf"), description="Skip tokens whose frame log-probability is below this"
    )
    nbest: int = Field(1, ge=1, description="Hypotheses returned")

    @model_validator(mode="after")
    def validate_nbest(self):
        if self.nbest > self.beam_size:
            raise ValueError(f"nbest ({self.nbest}) must not exceed beam_size ({self.beam_size})")
        return self


class Hypothesis(BaseModel):
    """One beam-search output"""
    model_config = ConfigDict(frozen=True)

    text: str
    acoustic_logprob: float = Field(..., description="Natural-log CTC probability of the text")
    lm_log10prob: float = Field(0.0, description="Sum of LM log10 terms including </s>")
    combined_score: float
    token_count: int = Field(..., ge=0)
    word_count: int = Field(0, ge=0)
    confidence: float = Field(..., gt=0.0, le=1.0)

    @property
    def language(self) -> Optional[LanguageTag]:
        """Tag parsed from the front of the text, if any"""
        tag, _ = strip_language_tag(self.text)
        return tag

    @staticmethod
    def confidence_of(acoustic_logprob: float, token_count: int) -> float:
        """exp of the length-normalized acoustic log-probability, floored at MIN_CONFIDENCE"""
        value = math.exp(acoustic_logprob / max(1, token_count))
        return min(1.0, max(MIN_CONFIDENCE, value))

    def to_record(self, fallback: Optional[bool] = None) -> Dict[str, Any]:
        """JSON-friendly dict for N-best output"""
        record = {
            "text": self.text,
            "acoustic_logprob": round(self.acoustic_logprob, 6),
            "lm_log10prob": round(self.lm_log10prob, 6),
            "combined_score": round(self.combined_score, 6),
            "token_count": self.token_count,
            "word_count": self.word_count,
            "confidence": round(self.confidence, 6),
        }
        if fallback is not None:
            record["fallback"] = fallback
        return record
