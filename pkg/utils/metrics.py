"""
ASR evaluation metrics

Word error rate (pooled and per utterance), diacritic-stripped WER,
per-language LID F1 and table-style score rendering.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import jiwer

from core.errors import MetricError
from models.manifest import LanguageTag
from utils.text_normalizer import preprocess, strip_diacritics

Pair = Tuple[str, str]


@dataclass(frozen=True)
class WerBreakdown:
    """Edit counts behind a WER value"""
    substitutions: int
    insertions: int
    deletions: int
    ref_words: int

    def __post_init__(self):
        if self.ref_words <= 0:
            raise MetricError("WER is undefined for an empty reference")

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def wer(self) -> float:
        return self.errors / self.ref_words

    def __add__(self, other: "WerBreakdown") -> "WerBreakdown":
        return WerBreakdown(
            self.substitutions + other.substitutions,
            self.insertions + other.insertions,
            self.deletions + other.deletions,
            self.ref_words + other.ref_words,
        )

    def to_record(self) -> dict:
        return {
            "substitutions": self.substitutions,
            "insertions": self.insertions,
            "deletions": self.deletions,
            "ref_words": self.ref_words,
            "wer": round(self.wer, 6),
        }


def _tokens(text: str, raw: bool) -> List[str]:
    return (text if raw else preprocess(text)).split()


def wer(ref: str, hyp: str, raw: bool = False) -> WerBreakdown:
    """
    Word error rate of one hypothesis

    Args:
        ref: Reference transcript
        hyp: Hypothesis transcript
        raw: Score verbatim text instead of preprocessing both sides

    Returns:
        WerBreakdown with minimal-edit S/I/D counts

    Raises:
        MetricError: Reference has no words
    """
    ref_words = _tokens(ref, raw)
    if not ref_words:
        raise MetricError("WER is undefined for an empty reference", "Drop utterances with empty references.")
    hyp_words = _tokens(hyp, raw)
    if not hyp_words:
        return WerBreakdown(0, 0, len(ref_words), len(ref_words))
    output = jiwer.process_words(" ".join(ref_words), " ".join(hyp_words))
    return WerBreakdown(output.substitutions, output.insertions, output.deletions, len(ref_words))


def corpus_wer(pairs: Iterable[Pair], raw: bool = False) -> WerBreakdown:
    """Pooled WER: counts are summed over pairs before dividing"""
    total: Optional[WerBreakdown] = None
    for ref, hyp in pairs:
        item = wer(ref, hyp, raw=raw)
        total = item if total is None else total + item
    if total is None:
        raise MetricError("cannot compute corpus WER over zero pairs")
    return total


def utterance_average_wer(pairs: Iterable[Pair], raw: bool = False) -> float:
    """Mean of per-utterance WERs"""
    rates = [wer(ref, hyp, raw=raw).wer for ref, hyp in pairs]
    if not rates:
        raise MetricError("cannot average WER over zero pairs")
    return sum(rates) / len(rates)


def macro_average(values: Sequence[float]) -> float:
    if not values:
        raise MetricError("macro average of an empty sequence")
    return sum(values) / len(values)


def format_score(value: Optional[float]) -> str:
    """Two-decimal rendering used in every report table; None renders n/a"""
    if value is None:
        return "n/a"
    return f"{value:.2f}"


def wer_diacritic_modes(pairs: Sequence[Pair], raw: bool = False) -> Dict[str, WerBreakdown]:
    """
    Score pairs twice: verbatim and with combining marks removed

    Stripping runs after preprocessing so both modes share tokenization.
    """
    pairs = list(pairs)
    retained = corpus_wer(pairs, raw=raw)
    prepared = [(r if raw else preprocess(r), h if raw else preprocess(h)) for r, h in pairs]
    stripped = corpus_wer(
        ((strip_diacritics(r), strip_diacritics(h)) for r, h in prepared), raw=True
    )
    return {"retained": retained, "stripped": stripped}


@dataclass(frozen=True)
class LanguageCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def f1(self) -> Optional[float]:
        denominator = 2 * self.tp + self.fp + self.fn
        if denominator == 0:
            return None
        return 100.0 * 2 * self.tp / denominator


@dataclass(frozen=True)
class LidReport:
    """Per-language language-identification counts and F1 in [0, 100]"""
    per_language: Dict[LanguageTag, LanguageCounts]

    def f1(self, lang: LanguageTag) -> Optional[float]:
        return self.per_language[lang].f1

    @property
    def micro_f1(self) -> float:
        tp = sum(c.tp for c in self.per_language.values())
        fp = sum(c.fp for c in self.per_language.values())
        fn = sum(c.fn for c in self.per_language.values())
        denominator = 2 * tp + fp + fn
        return 100.0 * 2 * tp / denominator if denominator else 0.0

    def rows(self) -> List[Tuple[str, str]]:
        """(lang, f1) rows in tag order; n/a for languages absent from the set"""
        return [(lang.value, format_score(counts.f1)) for lang, counts in self.per_language.items()]

    def to_record(self) -> dict:
        return {
            "languages": {
                lang.value: {"tp": c.tp, "fp": c.fp, "fn": c.fn, "f1": None if c.f1 is None else round(c.f1, 4)}
                for lang, c in self.per_language.items()
            },
            "micro_f1": round(self.micro_f1, 4),
        }


def lid_f1(pairs: Iterable[Tuple[Optional[LanguageTag], LanguageTag]]) -> LidReport:
    """
    Language-ID F1 from (predicted, truth) pairs

    A missing prediction counts as a false negative for the truth language
    and is no false positive for any language.

    Raises:
        MetricError: Empty set
    """
    tp: Dict[LanguageTag, int] = {lang: 0 for lang in LanguageTag}
    fp = dict(tp)
    fn = dict(tp)
    seen = 0
    for predicted, truth in pairs:
        seen += 1
        if predicted == truth:
            tp[truth] += 1
            continue
        fn[truth] += 1
        if predicted is not None:
            fp[predicted] += 1
    if not seen:
        raise MetricError("language-ID F1 over an empty set")
    return LidReport({lang: LanguageCounts(tp[lang], fp[lang], fn[lang]) for lang in LanguageTag})
