"""
Transcript normalization

General ASR preprocessing, Pidgin variant replacement and LM-driven homophone
disambiguation, variant mining from hypothesis/reference alignments,
diacritic stripping and LM-corpus dedup.
"""
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import jiwer
from num2words import num2words

from core.errors import CorpusError, MetricError, ToolkitIOError
from utils.logger import get_logger
from utils.ngram_lm import ArpaLm, sentence_logprob

logger = get_logger(__name__)

APOSTROPHES = "’‘ʼ`´"
DASHES = "‐‑‒–—―−"
_FOLD = str.maketrans({**{c: "'" for c in APOSTROPHES}, **{c: "-" for c in DASHES}})
_DIGITS = re.compile(r"[0-9]+")
_SPACES = re.compile(r"\s+")
KEPT_PUNCTUATION = frozenset("'-")

DEFAULT_WINDOW = 4


def spell_number(value: int) -> str:
    """English cardinal words without hyphens or commas"""
    try:
        words = num2words(value, lang="en")
    except (OverflowError, NotImplementedError):
        words = " ".join(num2words(int(d), lang="en") for d in str(value))
    return words.replace("-", " ").replace(",", "")


def _drop_punctuation(text: str) -> str:
    out = []
    for ch in text:
        if ch in KEPT_PUNCTUATION:
            out.append(ch)
            continue
        category = unicodedata.category(ch)
        out.append(" " if category[0] in ("P", "S") else ch)
    return "".join(out)


def preprocess(text: str, spell_digits: bool = True) -> str:
    """
    Lowercase, drop punctuation except apostrophes and dashes, spell digits

    Args:
        text: Raw transcript
        spell_digits: Replace digit runs with English cardinal words

    Returns:
        Normalized text with single spaces, trimmed
    """
    text = text.lower().translate(_FOLD)
    if spell_digits:
        text = _DIGITS.sub(lambda m: f" {spell_number(int(m.group(0)))} ", text)
    text = _drop_punctuation(text)
    return _SPACES.sub(" ", text).strip()


def strip_diacritics(text: str) -> str:
    """Remove combining marks (tone accents, dot-below) and recompose"""
    decomposed = unicodedata.normalize("NFD", text)
    kept = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    return unicodedata.normalize("NFC", kept)


class VariantTable:
    """Ordered source phrase -> replacement map applied by longest match"""

    def __init__(self, mapping: Mapping[str, str]):
        self.mapping: Dict[str, str] = {}
        for source, replacement in mapping.items():
            key = " ".join(source.split())
            if not key:
                raise ValueError("empty variant source")
            self.mapping[key] = " ".join(replacement.split())
        self.max_phrase_len = max((len(k.split(" ")) for k in self.mapping), default=0)

    def __len__(self) -> int:
        return len(self.mapping)

    def __contains__(self, source: str) -> bool:
        return source in self.mapping

    def items(self):
        return self.mapping.items()

    def non_closed_sources(self) -> List[str]:
        """Sources that also occur as a word of some replacement"""
        replacement_words = {w for r in self.mapping.values() for w in r.split()}
        replacement_words |= set(self.mapping.values())
        return sorted(s for s in self.mapping if s in replacement_words)


def load_variant_table(path: Union[str, Path]) -> VariantTable:
    """
    Load `source<TAB>replacement` lines (# comments allowed)

    Logs a warning when the table is not closed, since a second pass could
    then rewrite its own output.
    """
    mapping: Dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                if "\t" not in line:
                    raise CorpusError(f"{path}:{line_no}: expected source<TAB>replacement")
                source, replacement = line.split("\t", 1)
                if source.strip() in mapping:
                    logger.warning(f"{path}:{line_no}: duplicate source {source!r}, keeping the first")
                    continue
                mapping[source.strip()] = replacement.strip()
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))
    table = VariantTable(mapping)
    loose = table.non_closed_sources()
    if loose:
        logger.warning(f"variant table {path} is not closed; re-applying changes: {', '.join(loose[:5])}")
    logger.debug(f"Loaded {len(table)} variants from {path}")
    return table


def apply_variants(text: str, table: VariantTable) -> str:
    """Single left-to-right pass, longest phrase first, whole words only"""
    tokens = text.split()
    out: List[str] = []
    i = 0
    while i < len(tokens):
        for length in range(min(table.max_phrase_len, len(tokens) - i), 0, -1):
            phrase = " ".join(tokens[i:i + length])
            replacement = table.mapping.get(phrase)
            if replacement is not None:
                if replacement:
                    out.append(replacement)
                i += length
                break
        else:
            out.append(tokens[i])
            i += 1
    return " ".join(out)


@dataclass(frozen=True)
class HomophoneSets:
    """Disjoint confusion sets"""
    sets: Tuple[FrozenSet[str], ...]

    def __post_init__(self):
        index: Dict[str, int] = {}
        for i, members in enumerate(self.sets):
            if len(members) < 2:
                raise ValueError(f"homophone set {sorted(members)} has fewer than 2 members")
            for word in members:
                if word in index:
                    raise ValueError(f"{word!r} appears in more than one homophone set")
                index[word] = i
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_groups(cls, groups: Iterable[Iterable[str]]) -> "HomophoneSets":
        """Union overlapping groups into disjoint sets (first-seen order kept)"""
        merged: List[set] = []
        for group in groups:
            members = {" ".join(w.lower().split()) for w in group if w.strip()}
            if len(members) < 2:
                continue
            overlapping = [s for s in merged if s & members]
            for s in overlapping:
                members |= s
                merged.remove(s)
            merged.append(members)
        return cls(tuple(frozenset(s) for s in merged))

    def set_for(self, word: str) -> Optional[FrozenSet[str]]:
        i = self._index.get(word)
        return None if i is None else self.sets[i]

    def candidates(self, word: str) -> List[str]:
        """Single-word alternatives for word, sorted; empty if none"""
        members = self.set_for(word)
        if members is None or " " in word:
            return []
        return sorted(m for m in members if " " not in m)

    def __len__(self) -> int:
        return len(self.sets)


def load_homophones(path: Union[str, Path]) -> HomophoneSets:
    """Load ` | `-separated sets, one per line; overlapping lines are merged"""
    groups = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                groups.append([w.strip() for w in line.split("|")])
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))
    sets = HomophoneSets.from_groups(groups)
    logger.debug(f"Loaded {len(groups)} homophone lines from {path} -> {len(sets)} sets")
    return sets


def disambiguate_homophones(
    text: str,
    sets: HomophoneSets,
    lm: ArpaLm,
    window: Optional[int] = DEFAULT_WINDOW,
) -> str:
    """
    Replace each homophone with the set member the LM prefers in context

    Args:
        text: Preprocessed text
        sets: Confusion sets
        lm: Language model in the target orthography
        window: Words of context on each side; None scores the full sentence

    Returns:
        Text with the same number of tokens; ties keep the original token
    """
    tokens = text.split()
    for i, token in enumerate(tokens):
        candidates = sets.candidates(token)
        if len(candidates) < 2:
            continue
        lo = 0 if window is None else max(0, i - window)
        hi = len(tokens) if window is None else min(len(tokens), i + window + 1)

        def score(word: str) -> float:
            context = tokens[lo:i] + [word] + tokens[i + 1:hi]
            return sentence_logprob(lm, context)

        best_word, best_score = token, score(token)
        for candidate in candidates:
            if candidate == token:
                continue
            candidate_score = score(candidate)
            if candidate_score > best_score:
                best_word, best_score = candidate, candidate_score
        if best_word != token:
            logger.debug(f"homophone {token!r} -> {best_word!r} at position {i}")
        tokens[i] = best_word
    return " ".join(tokens)


def normalize_pidgin(
    text: str,
    table: VariantTable,
    sets: Optional[HomophoneSets] = None,
    lm: Optional[ArpaLm] = None,
    window: Optional[int] = DEFAULT_WINDOW,
    spell_digits: bool = True,
) -> str:
    """preprocess -> apply_variants -> disambiguate_homophones (when an LM is given)"""
    text = apply_variants(preprocess(text, spell_digits=spell_digits), table)
    if sets is not None and lm is not None:
        text = disambiguate_homophones(text, sets, lm, window)
    return text


@dataclass(frozen=True)
class AlignmentPair:
    """Reference word seen substituted by a hypothesis word"""
    ref_word: str
    hyp_word: str
    count: int


def mine_variants(
    refs: Sequence[str], hyps: Sequence[str], min_count: int = 1
) -> List[AlignmentPair]:
    """
    Collect substitution pairs from word-level edit alignments

    Args:
        refs: Reference transcripts
        hyps: Hypotheses aligned one-to-one with refs
        min_count: Minimum occurrences to report

    Returns:
        Pairs sorted by count descending, then ref and hyp word

    Raises:
        MetricError: refs and hyps differ in length
    """
    if len(refs) != len(hyps):
        raise MetricError(f"{len(refs)} references but {len(hyps)} hypotheses")
    counts: Counter = Counter()
    for ref, hyp in zip(refs, hyps):
        ref_words, hyp_words = ref.split(), hyp.split()
        if not ref_words or not hyp_words:
            continue
        output = jiwer.process_words(" ".join(ref_words), " ".join(hyp_words))
        for chunk in output.alignments[0]:
            if chunk.type != "substitute":
                continue
            ref_span = ref_words[chunk.ref_start_idx:chunk.ref_end_idx]
            hyp_span = hyp_words[chunk.hyp_start_idx:chunk.hyp_end_idx]
            for r, h in zip(ref_span, hyp_span):
                if r != h:
                    counts[(r, h)] += 1
    pairs = [AlignmentPair(r, h, c) for (r, h), c in counts.items() if c >= min_count]
    pairs.sort(key=lambda p: (-p.count, p.ref_word, p.hyp_word))
    return pairs


def dedup_and_filter(corpus: Iterable[str], heldout: Iterable[str]) -> List[str]:
    """
    Drop duplicate lines and lines leaking held-out text

    Lines are compared after preprocess(spell_digits=False); the original
    text of surviving lines is returned in input order.
    """
    blocked = {preprocess(line, spell_digits=False) for line in heldout}
    seen = set()
    kept = []
    dropped_dup = dropped_heldout = 0
    for line in corpus:
        key = preprocess(line, spell_digits=False)
        if key in seen:
            dropped_dup += 1
            continue
        seen.add(key)
        if key in blocked:
            dropped_heldout += 1
            continue
        kept.append(line)
    logger.info(f"dedup: kept {len(kept)}, duplicates {dropped_dup}, held-out matches {dropped_heldout}")
    return kept
