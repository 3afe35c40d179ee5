"""Evaluation agent: manifest scoring and the speaking-rate sweep"""
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Protocol, Sequence, Tuple

from agents.base_agent import BaseAgent
from core.errors import DecodingError, MetricError, MissingAudioError
from models.audio import Waveform, read_wav, write_wav
from models.decoding import DecoderConfig, read_emissions
from models.manifest import LanguageTag, ManifestEntry, strip_language_tag
from utils.audio_utils import SWEEP_FACTORS, wsola_stretch
from utils.concurrency import ConcurrencyLimiter
from utils.ctc_decoder import CTCBeamDecoder, greedy_decode
from utils.lexicon import Lexicon
from utils.metrics import (
    LidReport,
    WerBreakdown,
    corpus_wer,
    lid_f1,
    utterance_average_wer,
    wer_diacritic_modes,
)
from utils.ngram_lm import ArpaLm


class SweepDecoder(Protocol):
    """Produces a hypothesis for one utterance at one speaking rate"""
    needs_audio: bool

    def __call__(self, entry: ManifestEntry, waveform: Optional[Waveform], factor: float) -> str:
        ...


@dataclass
class CallableDecoder:
    """Wraps a plain function as a sweep decoder"""
    func: Callable[[ManifestEntry, Optional[Waveform], float], str]
    needs_audio: bool = True

    def __call__(self, entry, waveform, factor) -> str:
        return self.func(entry, waveform, factor)


@dataclass
class EmissionSweepDecoder:
    """Reads <emissions_dir>/x<factor>/<stem>.ctce and decodes it"""
    emissions_dir: Path
    decoder_config: Optional[DecoderConfig] = None
    lm: Optional[ArpaLm] = None
    lexicon_entries: Optional[Sequence[Tuple[str, Sequence[str]]]] = None
    needs_audio: bool = False
    _lexicons: Dict[Tuple[str, ...], Lexicon] = field(default_factory=dict, repr=False)

    def path_for(self, entry: ManifestEntry, factor: float) -> Path:
        return Path(self.emissions_dir) / f"x{factor:.1f}" / f"{Path(entry.audio_path).stem}.ctce"

    def _lexicon_for(self, vocab: Tuple[str, ...]) -> Optional[Lexicon]:
        if self.lexicon_entries is None:
            return None
        if vocab not in self._lexicons:
            self._lexicons[vocab] = Lexicon.from_entries(self.lexicon_entries, vocab)
        return self._lexicons[vocab]

    def __call__(self, entry, waveform, factor) -> str:
        em = read_emissions(self.path_for(entry, factor))
        if self.decoder_config is None:
            return greedy_decode(em)
        decoder = CTCBeamDecoder(self.decoder_config, self.lm, self._lexicon_for(tuple(em.vocab)))
        return decoder.decode(em)[0].text


@dataclass
class CommandSweepDecoder:
    """Runs an external command on the stretched WAV; stdout is the hypothesis"""
    template: str
    timeout_s: float = 600.0
    needs_audio: bool = True

    def __call__(self, entry, waveform, factor) -> str:
        with tempfile.TemporaryDirectory() as tmp:
            wav = Path(tmp) / f"{Path(entry.audio_path).stem}_x{factor:.1f}.wav"
            write_wav(waveform, wav)
            command = shlex.split(self.template.format(wav=str(wav)))
            completed = subprocess.run(
                command, capture_output=True, text=True, timeout=self.timeout_s, check=False
            )
        if completed.returncode != 0:
            raise DecodingError(
                f"decode command exited with {completed.returncode}: {completed.stderr.strip()[:200]}"
            )
        return completed.stdout.strip()


@dataclass
class SweepResult:
    """Pooled WER per speaking-rate factor"""
    rows: List[Tuple[float, WerBreakdown]] = field(default_factory=list)

    def table(self) -> List[Tuple[float, float]]:
        return [(factor, breakdown.wer) for factor, breakdown in self.rows]

    def to_record(self) -> Dict[str, Any]:
        return {
            "points": [
                {"factor": factor, **breakdown.to_record()} for factor, breakdown in self.rows
            ]
        }


@dataclass
class EvaluationReport:
    pooled: WerBreakdown
    utterance_average: float
    diacritics: Dict[str, WerBreakdown]
    lid: Optional[LidReport]
    unmatched: int = 0

    def to_record(self) -> Dict[str, Any]:
        record = {
            "wer": self.pooled.to_record(),
            "utterance_average_wer": round(self.utterance_average, 6),
            "diacritics": {mode: b.to_record() for mode, b in self.diacritics.items()},
            "unmatched": self.unmatched,
        }
        if self.lid is not None:
            record["lid"] = self.lid.to_record()
        return record


def pair_manifests(
    refs: Sequence[ManifestEntry], hyps: Sequence[ManifestEntry]
) -> Tuple[List[Tuple[ManifestEntry, ManifestEntry]], int]:
    """Match hypotheses to references by audio path (reference order kept)"""
    by_path = {h.audio_path: h for h in hyps}
    pairs = [(r, by_path[r.audio_path]) for r in refs if r.audio_path in by_path]
    return pairs, len(refs) - len(pairs)


class EvaluationAgent(BaseAgent):
    """Scores hypotheses and runs speed-robustness sweeps"""

    def __init__(
        self,
        agent_id: str = "evaluator",
        config: Optional[Dict[str, Any]] = None,
    ):
        """
        Args:
            agent_id: Agent identifier
            config: raw (bool), jobs (int), base_dir (audio root)
        """
        super().__init__(agent_id, config)
        self.raw = self.config.get("raw", False)
        self.base_dir = self.config.get("base_dir")
        self.limiter = ConcurrencyLimiter(self.config.get("jobs", 1))

    async def validate_input(self, input_data: Tuple[Sequence[ManifestEntry], Sequence[ManifestEntry]]) -> bool:
        refs, hyps = input_data
        return len(refs) > 0

    async def execute(
        self, input_data: Tuple[Sequence[ManifestEntry], Sequence[ManifestEntry]]
    ) -> EvaluationReport:
        """
        Score hypothesis entries against reference entries

        Hypothesis texts may carry a language tag; it is used for LID and
        removed before WER scoring.

        Args:
            input_data: (reference entries, hypothesis entries)

        Returns:
            EvaluationReport

        Raises:
            MetricError: No hypothesis matches a reference
        """
        refs, hyps = input_data
        matched, unmatched = pair_manifests(refs, hyps)
        if not matched:
            raise MetricError("no hypothesis matches any reference audio_path")
        if unmatched:
            self.logger.warning(f"{unmatched} reference(s) have no hypothesis and are skipped")

        text_pairs = []
        lid_pairs: List[Tuple[Optional[LanguageTag], LanguageTag]] = []
        tagged = 0
        for ref, hyp in matched:
            tag, body = strip_language_tag(hyp.text)
            tagged += tag is not None
            lid_pairs.append((tag, ref.lang))
            text_pairs.append((strip_language_tag(ref.text)[1], body))

        report = EvaluationReport(
            pooled=corpus_wer(text_pairs, raw=self.raw),
            utterance_average=utterance_average_wer(text_pairs, raw=self.raw),
            diacritics=wer_diacritic_modes(text_pairs, raw=self.raw),
            lid=lid_f1(lid_pairs) if tagged else None,
            unmatched=unmatched,
        )
        self.logger.info(f"WER {report.pooled.wer:.4f} over {len(matched)} utterance(s)")
        return report

    def _check_audio(self, entries: Sequence[ManifestEntry]) -> None:
        missing = [e.audio_path for e in entries if not e.resolve_audio(self.base_dir).is_file()]
        if missing:
            raise MissingAudioError(missing)

    async def speed_sweep(
        self,
        entries: Sequence[ManifestEntry],
        decode_fn: SweepDecoder,
        factors: Sequence[float] = SWEEP_FACTORS,
    ) -> SweepResult:
        """
        Pooled WER of decode_fn at each speaking-rate factor

        For decoders that need audio, every waveform is WSOLA-stretched per
        factor (factor 1.0 uses the unmodified waveform).

        Args:
            entries: Reference entries
            decode_fn: Sweep decoder
            factors: Speed factors

        Returns:
            SweepResult in factor order

        Raises:
            MissingAudioError: Audio files missing (checked before any decoding)
        """
        entries = list(entries)
        if not entries:
            raise MetricError("speed sweep over an empty manifest")
        needs_audio = getattr(decode_fn, "needs_audio", True)
        waveforms: List[Optional[Waveform]] = [None] * len(entries)
        if needs_audio:
            self._check_audio(entries)
            waveforms = [read_wav(e.resolve_audio(self.base_dir), expected_rate=None) for e in entries]

        result = SweepResult()
        for factor in factors:
            def decode_one(index: int, factor: float = factor) -> str:
                waveform = waveforms[index]
                if waveform is not None and factor != 1.0:
                    waveform = wsola_stretch(waveform, factor)
                return decode_fn(entries[index], waveform, factor)

            hypotheses = await self.limiter.run_batch(decode_one, list(range(len(entries))))
            pairs = [(strip_language_tag(e.text)[1], strip_language_tag(h)[1]) for e, h in zip(entries, hypotheses)]
            breakdown = corpus_wer(pairs, raw=self.raw)
            result.rows.append((factor, breakdown))
            self.logger.info(f"Speed x{factor:.1f}: WER {breakdown.wer:.4f}")
        return result
