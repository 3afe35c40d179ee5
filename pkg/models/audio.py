"""
Audio data models

Waveforms, time segments, and their on-disk formats: PCM16 mono WAV,
JSONL segment lists and float32 embedding matrices with a JSON sidecar.
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import soundfile as sf
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.errors import AudioFormatError, EmbeddingDimensionError, ToolkitIOError

DEFAULT_SAMPLE_RATE = 16000


@dataclass(frozen=True, eq=False)
class Waveform:
    """Mono samples in [-1, 1] at a fixed rate"""
    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise AudioFormatError(f"expected mono samples, got shape {samples.shape}")
        if self.sample_rate <= 0:
            raise AudioFormatError(f"sample rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise AudioFormatError("waveform contains NaN or infinite samples")
        object.__setattr__(self, "samples", samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)

    def slice(self, start_s: float, end_s: float) -> "Waveform":
        start = max(0, int(round(start_s * self.sample_rate)))
        end = min(len(self.samples), int(round(end_s * self.sample_rate)))
        return Waveform(self.samples[start:end], self.sample_rate)


class Segment(BaseModel):
    """Half-open time interval [start_s, end_s) with an optional embedding"""
    model_config = ConfigDict(frozen=True)

    start_s: float = Field(..., ge=0.0)
    end_s: float
    embedding: Optional[Tuple[float, ...]] = Field(None, description="Speaker embedding")

    @model_validator(mode="after")
    def validate_order(self):
        if not self.start_s < self.end_s:
            raise ValueError(f"segment start {self.start_s} must be before end {self.end_s}")
        return self

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    def to_record(self) -> dict:
        return {"start_s": round(self.start_s, 6), "end_s": round(self.end_s, 6)}


def read_wav(path: Union[str, Path], expected_rate: Optional[int] = DEFAULT_SAMPLE_RATE) -> Waveform:
    """
    Read a mono WAV file

    Args:
        path: WAV path
        expected_rate: Required sample rate; None accepts any

    Raises:
        ToolkitIOError: File missing or unreadable
        AudioFormatError: Not mono, or wrong rate (no resampling is done)
    """
    if not Path(path).is_file():
        raise ToolkitIOError(path, "file not found")
    try:
        data, rate = sf.read(str(path), dtype="float64", always_2d=True)
    except RuntimeError as e:
        raise AudioFormatError(f"cannot decode {path}: {e}")
    if data.shape[1] != 1:
        raise AudioFormatError(f"{path} has {data.shape[1]} channels; only mono is supported")
    if expected_rate is not None and rate != expected_rate:
        raise AudioFormatError(
            f"{path} is {rate} Hz, expected {expected_rate} Hz",
            "Resample the audio beforehand; resampling is not performed.",
        )
    return Waveform(data[:, 0], rate)


def write_wav(waveform: Waveform, path: Union[str, Path]) -> None:
    """Write PCM16 mono WAV; samples are clipped to [-1, 1]"""
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        sf.write(str(path), np.clip(waveform.samples, -1.0, 1.0), waveform.sample_rate, subtype="PCM_16")
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))


def read_segments(path: Union[str, Path]) -> List[Segment]:
    """Read `{"start_s": .., "end_s": ..}` JSON lines"""
    segments = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    segments.append(Segment(**json.loads(line)))
                except (json.JSONDecodeError, ValidationError, TypeError) as e:
                    raise AudioFormatError(f"{path}:{line_no}: invalid segment ({e})")
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))
    return segments


def write_segments(segments: Iterable[Segment], path: Union[str, Path]) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for segment in segments:
                f.write(json.dumps(segment.to_record(), separators=(",", ":")) + "\n")
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))


def _sidecar(path: Union[str, Path]) -> Path:
    return Path(f"{path}.json")


def read_embeddings(path: Union[str, Path]) -> np.ndarray:
    """
    Read an (n, dim) little-endian float32 matrix; dim comes from `<path>.json`

    Raises:
        EmbeddingDimensionError: Missing dim or payload not a multiple of dim
    """
    sidecar = _sidecar(path)
    try:
        header = json.loads(sidecar.read_text(encoding="utf-8"))
        values = np.fromfile(str(path), dtype="<f4")
    except OSError as e:
        raise ToolkitIOError(getattr(e, "filename", None) or path, e.strerror or str(e))
    except json.JSONDecodeError as e:
        raise EmbeddingDimensionError(f"{sidecar}: invalid JSON ({e.msg})")
    dim = header.get("dim") if isinstance(header, dict) else None
    if not isinstance(dim, int) or dim < 1:
        raise EmbeddingDimensionError(f"{sidecar}: 'dim' must be a positive integer")
    if values.size % dim:
        raise EmbeddingDimensionError(f"{path}: {values.size} floats is not a multiple of dim={dim}")
    return values.reshape(-1, dim).astype(np.float64)


def write_embeddings(matrix: np.ndarray, path: Union[str, Path]) -> None:
    array = np.atleast_2d(np.asarray(matrix, dtype="<f4"))
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        array.tofile(str(path))
        _sidecar(path).write_text(json.dumps({"dim": int(array.shape[1])}) + "\n", encoding="utf-8")
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))


def attach_embeddings(segments: Sequence[Segment], matrix: np.ndarray) -> List[Segment]:
    """Pair segments with embedding rows in order"""
    if len(segments) != len(matrix):
        raise EmbeddingDimensionError(f"{len(segments)} segments but {len(matrix)} embeddings")
    return [
        seg.model_copy(update={"embedding": tuple(float(v) for v in row)})
        for seg, row in zip(segments, matrix)
    ]
