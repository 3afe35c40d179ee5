"""Pseudo-label decoding agent"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from agents.base_agent import BaseAgent
from core.errors import ToolkitIOError
from models.decoding import DecoderConfig, EmissionMatrix, Hypothesis, read_emissions
from models.manifest import ManifestEntry
from utils.concurrency import ConcurrencyLimiter, TaskStats
from utils.ctc_decoder import CTCBeamDecoder, select_language_hypothesis
from utils.lexicon import Lexicon, parse_lexicon_lines
from utils.ngram_lm import ArpaLm

EMISSION_SUFFIX = ".ctce"


def emission_path_for(entry: ManifestEntry, emissions_dir: Path) -> Path:
    """<emissions_dir>/<audio stem>.ctce"""
    return Path(emissions_dir) / f"{Path(entry.audio_path).stem}{EMISSION_SUFFIX}"


@dataclass
class DecodedUtterance:
    """Decoder output for one manifest entry"""
    entry: ManifestEntry
    nbest: List[Hypothesis]
    selected: Hypothesis
    fallback: bool

    def to_record(self) -> Dict[str, Any]:
        return {
            "audio_path": self.entry.audio_path,
            "lang": self.entry.lang.value,
            "fallback": self.fallback,
            "selected": self.selected.to_record(),
            "nbest": [h.to_record() for h in self.nbest],
        }


@dataclass
class DecodeResult:
    utterances: List[DecodedUtterance] = field(default_factory=list)

    @property
    def entries(self) -> List[ManifestEntry]:
        """Pseudo-labelled entries; text keeps any decoder-emitted tag"""
        return [
            u.entry.with_text(u.selected.text, confidence=u.selected.confidence)
            for u in self.utterances
        ]

    @property
    def fallback_count(self) -> int:
        return sum(1 for u in self.utterances if u.fallback)


class PseudoLabelAgent(BaseAgent):
    """Decodes precomputed emissions into hard pseudo-labels"""

    def __init__(
        self,
        agent_id: str = "pseudo_labeler",
        config: Optional[Dict[str, Any]] = None,
        decoder_config: Optional[DecoderConfig] = None,
        emissions_dir: Optional[Path] = None,
        lm: Optional[ArpaLm] = None,
        lexicon_entries: Optional[Sequence[Tuple[str, Sequence[str]]]] = None,
    ):
        """
        Args:
            agent_id: Agent identifier
            config: select_lang (bool), jobs (int)
            decoder_config: Beam-search settings
            emissions_dir: Directory holding <stem>.ctce files
            lm: Shared language model
            lexicon_entries: Parsed lexicon lines, mapped onto each emission vocabulary
        """
        super().__init__(agent_id, config)
        self.decoder_config = decoder_config or DecoderConfig()
        self.emissions_dir = Path(emissions_dir) if emissions_dir else None
        self.lm = lm
        self.lexicon_entries = list(lexicon_entries) if lexicon_entries is not None else None
        self.select_lang = self.config.get("select_lang", True)
        self.limiter = ConcurrencyLimiter(self.config.get("jobs", 1))
        self.stats = TaskStats()
        self._lexicons: Dict[Tuple[str, ...], Lexicon] = {}

    @classmethod
    def read_lexicon_entries(cls, path: Path) -> List[Tuple[str, List[str]]]:
        try:
            with open(path, "r", encoding="utf-8") as f:
                return parse_lexicon_lines(f, path)
        except OSError as e:
            raise ToolkitIOError(path, e.strerror or str(e))

    def _lexicon_for(self, vocab: Tuple[str, ...]) -> Optional[Lexicon]:
        if self.lexicon_entries is None:
            return None
        if vocab not in self._lexicons:
            self._lexicons[vocab] = Lexicon.from_entries(self.lexicon_entries, vocab)
        return self._lexicons[vocab]

    def decode_matrix(self, em: EmissionMatrix) -> List[Hypothesis]:
        decoder = CTCBeamDecoder(self.decoder_config, self.lm, self._lexicon_for(em.vocab))
        return decoder.decode(em)

    def _decode_entry(self, entry: ManifestEntry) -> DecodedUtterance:
        em = read_emissions(emission_path_for(entry, self.emissions_dir))
        nbest = self.decode_matrix(em)
        if self.select_lang:
            selected, fallback = select_language_hypothesis(nbest, entry.lang)
        else:
            selected, fallback = nbest[0], False
        if fallback:
            self.logger.debug(f"{entry.audio_path}: no {entry.lang.token} hypothesis, using top-1")
        return DecodedUtterance(entry, nbest, selected, fallback)

    async def validate_input(self, entries: List[ManifestEntry]) -> bool:
        if self.emissions_dir is None:
            self.logger.error("No emissions directory configured")
            return False
        missing = [
            str(emission_path_for(e, self.emissions_dir))
            for e in entries
            if not emission_path_for(e, self.emissions_dir).is_file()
        ]
        if missing:
            raise ToolkitIOError(missing[0], f"emissions missing for {len(missing)} utterance(s)")
        return True

    async def execute(self, entries: List[ManifestEntry]) -> DecodeResult:
        """
        Decode every entry; output order follows input order

        Args:
            entries: Manifest entries whose audio stems name emission files

        Returns:
            DecodeResult
        """
        self.logger.info(
            f"Decoding {len(entries)} utterance(s) with beam={self.decoder_config.beam_size}, "
            f"alpha={self.decoder_config.lm_weight}, beta={self.decoder_config.word_bonus}"
        )
        utterances = await self.limiter.run_batch(
            self._decode_entry, entries, show_progress=len(entries) > 1, stats=self.stats
        )
        result = DecodeResult(list(utterances))
        if result.fallback_count:
            self.logger.warning(f"{result.fallback_count} utterance(s) had no hypothesis in the wanted language")
        return result
