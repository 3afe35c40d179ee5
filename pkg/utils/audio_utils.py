"""
Audio processing utilities

Silence detection, long-segment splitting, WSOLA time stretching,
SNR-controlled noise mixing and the seeded augmentation sampler.
"""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal.windows import hann

from core.errors import AudioFormatError
from models.audio import Segment, Waveform
from utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_THRESHOLD_DB = -50.0
DEFAULT_FRAME_MS = 25.0
DEFAULT_HOP_MS = 10.0
DEFAULT_MIN_SILENCE_S = 0.3
DEFAULT_MAX_LEN_S = 30.0

WSOLA_FRAME = 512
WSOLA_SYNTHESIS_HOP = 256
WSOLA_TOLERANCE = 128
MIN_STRETCH, MAX_STRETCH = 0.5, 2.5

STRETCH_FACTORS = (0.9, 1.0, 1.1, 1.2)
SWEEP_FACTORS = (0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0)


def _frame_params(sample_rate: int, frame_ms: float, hop_ms: float) -> Tuple[int, int]:
    frame = max(1, int(round(sample_rate * frame_ms / 1000.0)))
    hop = max(1, int(round(sample_rate * hop_ms / 1000.0)))
    return frame, hop


def frame_energy_db(samples: np.ndarray, frame: int, hop: int) -> np.ndarray:
    """RMS level in dBFS of each analysis frame (-inf for digital silence)"""
    if len(samples) < frame:
        samples = np.pad(samples, (0, frame - len(samples)))
    frames = sliding_window_view(samples, frame)[::hop]
    rms = np.sqrt(np.mean(frames ** 2, axis=1))
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(rms)


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Inclusive (first, last) index pairs of True runs"""
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def detect_silence(
    w: Waveform,
    threshold_db: float = DEFAULT_THRESHOLD_DB,
    frame_ms: float = DEFAULT_FRAME_MS,
    hop_ms: float = DEFAULT_HOP_MS,
    min_silence_s: float = DEFAULT_MIN_SILENCE_S,
) -> List[Segment]:
    """
    Find stretches whose frame RMS stays below threshold_db

    Args:
        w: Input waveform
        threshold_db: dBFS threshold
        frame_ms: Frame length
        hop_ms: Frame hop
        min_silence_s: Shortest run reported

    Returns:
        Silence segments in time order
    """
    if len(w) == 0:
        return []
    frame, hop = _frame_params(w.sample_rate, frame_ms, hop_ms)
    levels = frame_energy_db(w.samples, frame, hop)
    duration = w.duration_s
    silences = []
    for first, last in _runs(levels < threshold_db):
        start = first * hop / w.sample_rate
        end = duration if last == len(levels) - 1 else min(duration, (last * hop + frame) / w.sample_rate)
        if end - start >= min_silence_s and end > start:
            silences.append(Segment(start_s=start, end_s=end))
    return silences


def split_long_segment(
    w: Waveform,
    seg: Segment,
    max_len_s: float = DEFAULT_MAX_LEN_S,
    threshold_db: float = DEFAULT_THRESHOLD_DB,
    frame_ms: float = DEFAULT_FRAME_MS,
    hop_ms: float = DEFAULT_HOP_MS,
) -> List[Segment]:
    """
    Cut a segment into pieces no longer than max_len_s

    Each cut goes at the quietest frame of the silence run closest before
    the max_len_s boundary (ties resolved towards the run centre); without
    any silence in the window the cut is hard at the boundary. Pieces tile
    the input exactly.
    """
    if seg.duration_s <= max_len_s:
        return [seg]
    if seg.end_s > w.duration_s + 1e-9:
        raise AudioFormatError(f"segment ends at {seg.end_s}s beyond waveform length {w.duration_s:.3f}s")

    frame, hop = _frame_params(w.sample_rate, frame_ms, hop_ms)
    offset = int(round(seg.start_s * w.sample_rate))
    region = w.samples[offset:int(round(seg.end_s * w.sample_rate))]
    levels = frame_energy_db(region, frame, hop)
    centres = seg.start_s + (np.arange(len(levels)) * hop + frame / 2.0) / w.sample_rate
    silent = levels < threshold_db

    pieces: List[Segment] = []
    cursor = seg.start_s
    while seg.end_s - cursor > max_len_s:
        boundary = cursor + max_len_s
        window = silent & (centres > cursor) & (centres <= boundary)
        runs = _runs(window)
        if runs:
            first, last = runs[-1]
            run_levels = levels[first:last + 1]
            quietest = np.flatnonzero(run_levels == run_levels.min()) + first
            middle = (first + last) / 2.0
            best = int(min(quietest, key=lambda i: (abs(i - middle), i)))
            cut = float(centres[best])
        else:
            cut = boundary
            logger.debug(f"no silence before {boundary:.2f}s, hard cut")
        pieces.append(Segment(start_s=cursor, end_s=cut))
        cursor = cut
    pieces.append(Segment(start_s=cursor, end_s=seg.end_s))
    return pieces


def wsola_stretch(
    w: Waveform,
    factor: float,
    frame_length: int = WSOLA_FRAME,
    synthesis_hop: int = WSOLA_SYNTHESIS_HOP,
    tolerance: int = WSOLA_TOLERANCE,
) -> Waveform:
    """
    Time-scale modification by waveform-similarity overlap-add

    factor > 1 speeds up (shorter output). Output length is
    round(len / factor) and pitch is unchanged.

    Args:
        w: Input waveform
        factor: Speed factor in [0.5, 2.5]
        frame_length: Hann window length
        synthesis_hop: Output hop
        tolerance: Max shift (samples) searched around each analysis position

    Raises:
        AudioFormatError: factor out of range
    """
    if not MIN_STRETCH <= factor <= MAX_STRETCH:
        raise AudioFormatError(f"stretch factor {factor} outside [{MIN_STRETCH}, {MAX_STRETCH}]")
    x = w.samples
    if factor == 1.0 or len(x) == 0:
        return Waveform(x.copy(), w.sample_rate)

    out_len = int(round(len(x) / factor))
    analysis_hop = synthesis_hop * factor
    n_frames = int(math.ceil(out_len / synthesis_hop)) + 1
    window = hann(frame_length, sym=False)

    last_pos = int(math.ceil((n_frames - 1) * analysis_hop))
    needed = last_pos + 2 * tolerance + synthesis_hop + 2 * frame_length
    padded = np.zeros(max(needed, len(x) + 2 * tolerance))
    padded[tolerance:tolerance + len(x)] = x

    y = np.zeros(n_frames * synthesis_hop + frame_length)
    weight = np.zeros_like(y)
    natural: Optional[np.ndarray] = None
    for m in range(n_frames):
        nominal = int(round(m * analysis_hop)) + tolerance
        if natural is None:
            delta = 0
        else:
            lo = nominal - tolerance
            search = padded[lo:lo + frame_length + 2 * tolerance]
            correlation = np.correlate(search, natural, mode="valid")
            delta = int(np.argmax(correlation)) - tolerance
        start = nominal + delta
        chunk = padded[start:start + frame_length]
        out = m * synthesis_hop
        y[out:out + frame_length] += chunk * window
        weight[out:out + frame_length] += window
        natural = padded[start + synthesis_hop:start + synthesis_hop + frame_length]

    nonzero = weight > 1e-8
    y[nonzero] /= weight[nonzero]
    return Waveform(y[:out_len], w.sample_rate)


@dataclass(frozen=True, eq=False)
class MixResult:
    waveform: Waveform
    noise_gain: float
    clipped_samples: int
    achieved_snr_db: float


def _power(samples: np.ndarray) -> float:
    return float(np.mean(samples ** 2)) if len(samples) else 0.0


def mix_noise(w: Waveform, noise: Waveform, snr_db: float) -> MixResult:
    """
    Add looped noise scaled to a target SNR

    Args:
        w: Clean signal
        noise: Noise, looped or truncated to the signal length
        snr_db: Target SNR; +inf leaves the signal untouched

    Returns:
        MixResult with the clipped mixture, gain, clip count and pre-clip SNR

    Raises:
        AudioFormatError: Rate mismatch or zero-power input
    """
    if math.isinf(snr_db) and snr_db > 0:
        return MixResult(Waveform(w.samples.copy(), w.sample_rate), 0.0, 0, float("inf"))
    if w.sample_rate != noise.sample_rate:
        raise AudioFormatError(f"sample rates differ: signal {w.sample_rate} Hz, noise {noise.sample_rate} Hz")

    signal_power = _power(w.samples)
    if signal_power == 0.0:
        raise AudioFormatError("signal has zero power; SNR is undefined")
    if len(noise) == 0 or _power(noise.samples) == 0.0:
        raise AudioFormatError("noise has zero power")

    looped = np.resize(noise.samples, len(w.samples))
    noise_power = _power(looped)
    if noise_power == 0.0:
        raise AudioFormatError("noise excerpt has zero power")
    gain = math.sqrt(signal_power / (noise_power * 10 ** (snr_db / 10.0)))
    scaled = gain * looped
    mixed = w.samples + scaled
    clipped = int(np.count_nonzero(np.abs(mixed) > 1.0))
    achieved = 10.0 * math.log10(signal_power / _power(scaled))
    if clipped:
        logger.debug(f"noise mix clipped {clipped} samples")
    return MixResult(Waveform(np.clip(mixed, -1.0, 1.0), w.sample_rate), gain, clipped, achieved)


@dataclass(frozen=True)
class AugmentationDraw:
    """One sampler decision, recorded for reports"""
    apply_noise: bool
    snr_db: Optional[float]
    apply_stretch: bool
    stretch_factor: float

    def to_record(self) -> dict:
        return {
            "apply_noise": self.apply_noise,
            "snr_db": None if self.snr_db is None else round(self.snr_db, 4),
            "apply_stretch": self.apply_stretch,
            "stretch_factor": self.stretch_factor,
        }


@dataclass
class AugmentationSampler:
    """Seeded noise/stretch augmentation decisions"""
    noise_prob: float = 0.4
    stretch_prob: float = 0.4
    snr_range: Tuple[float, float] = (5.0, 30.0)
    stretch_factors: Sequence[float] = STRETCH_FACTORS
    seed: int = 0
    draws: List[AugmentationDraw] = field(default_factory=list)

    def __post_init__(self):
        for name in ("noise_prob", "stretch_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise AudioFormatError(f"{name} must be in [0, 1], got {value}")
        low, high = self.snr_range
        if low > high:
            raise AudioFormatError(f"snr range ({low}, {high}) is inverted")
        if not self.stretch_factors:
            raise AudioFormatError("at least one stretch factor is required")
        self._rng = np.random.default_rng(self.seed)

    def draw(self) -> AugmentationDraw:
        """Sample the next decision; the stream depends only on the seed"""
        noise_u, snr_u, stretch_u = self._rng.random(3)
        factor_index = int(self._rng.integers(len(self.stretch_factors)))
        apply_noise = bool(noise_u < self.noise_prob)
        apply_stretch = bool(stretch_u < self.stretch_prob)
        low, high = self.snr_range
        decision = AugmentationDraw(
            apply_noise=apply_noise,
            snr_db=float(low + (high - low) * snr_u) if apply_noise else None,
            apply_stretch=apply_stretch,
            stretch_factor=float(self.stretch_factors[factor_index]) if apply_stretch else 1.0,
        )
        self.draws.append(decision)
        return decision

    def apply(self, w: Waveform, noise: Optional[Waveform] = None) -> Tuple[Waveform, AugmentationDraw]:
        """Draw a decision and apply it (noise first, then stretch)"""
        decision = self.draw()
        out = w
        if decision.apply_noise:
            if noise is None:
                raise AudioFormatError("noise augmentation drawn but no noise waveform given")
            out = mix_noise(out, noise, decision.snr_db).waveform
        if decision.apply_stretch and decision.stretch_factor != 1.0:
            out = wsola_stretch(out, decision.stretch_factor)
        return out, decision
