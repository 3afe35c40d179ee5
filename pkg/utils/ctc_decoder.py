"""
CTC decoding

Greedy decoding and lexicon-constrained prefix beam search with word-level
N-gram shallow fusion over precomputed emission matrices.
"""
import math
from collections import defaultdict
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import DecodingError
from models.decoding import DecoderConfig, EmissionMatrix, Hypothesis
from models.manifest import LanguageTag, is_tag_token, strip_language_tag
from utils.lexicon import Lexicon, TrieNode
from utils.logger import get_logger
from utils.ngram_lm import EOS, ArpaLm, LmState

logger = get_logger(__name__)

LN10 = math.log(10.0)
NEG_INF = float("-inf")
SEPARATORS = frozenset({" ", "▁", "|"})
WORD_START = "▁"


class TokenKind(Enum):
    BLANK = "blank"
    SEPARATOR = "separator"
    WORD_START = "word_start"
    TAG = "tag"
    PLAIN = "plain"


@dataclass(frozen=True)
class TokenInfo:
    kind: TokenKind
    piece: str


def classify_vocab(vocab: Sequence[str], blank_index: int) -> Tuple[TokenInfo, ...]:
    """Assign each vocabulary entry its role in word assembly"""
    infos = []
    for i, token in enumerate(vocab):
        if i == blank_index:
            infos.append(TokenInfo(TokenKind.BLANK, ""))
        elif token in SEPARATORS:
            infos.append(TokenInfo(TokenKind.SEPARATOR, ""))
        elif is_tag_token(token):
            infos.append(TokenInfo(TokenKind.TAG, token))
        elif token.startswith(WORD_START):
            infos.append(TokenInfo(TokenKind.WORD_START, token[len(WORD_START):]))
        else:
            infos.append(TokenInfo(TokenKind.PLAIN, token))
    return tuple(infos)


def labels_to_words(labels: Sequence[int], infos: Sequence[TokenInfo]) -> List[str]:
    """Assemble words from a collapsed, blank-free label sequence"""
    words: List[str] = []
    partial = ""
    for label in labels:
        info = infos[label]
        if info.kind is TokenKind.PLAIN:
            partial += info.piece
            continue
        if info.kind is TokenKind.BLANK:
            continue
        if partial:
            words.append(partial)
            partial = ""
        if info.kind is TokenKind.TAG:
            words.append(info.piece)
        elif info.kind is TokenKind.WORD_START:
            partial = info.piece
    if partial:
        words.append(partial)
    return words


def collapse_path(path: Sequence[int], blank_index: int) -> List[int]:
    """CTC collapse: merge repeats, then drop blanks"""
    labels = []
    previous = None
    for label in path:
        if label != previous and label != blank_index:
            labels.append(int(label))
        previous = label
    return labels


def greedy_decode(em: EmissionMatrix) -> str:
    """Best-path decoding"""
    path = np.argmax(em.log_probs, axis=1)
    labels = collapse_path(path.tolist(), em.blank_index)
    return " ".join(labels_to_words(labels, classify_vocab(em.vocab, em.blank_index)))


def _logaddexp(a: float, b: float) -> float:
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a > b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


@dataclass(frozen=True)
class _WordState:
    """Word-level view of a label prefix"""
    words: Tuple[str, ...] = ()
    partial: str = ""
    node: Optional[TrieNode] = None
    lm_state: Optional[LmState] = None
    lm_log10: float = 0.0
    word_count: int = 0


class CTCBeamDecoder:
    """Prefix beam search keeping (p_blank, p_non_blank) per collapsed prefix"""

    def __init__(
        self,
        config: DecoderConfig,
        lm: Optional[ArpaLm] = None,
        lexicon: Optional[Lexicon] = None,
    ):
        """
        Args:
            config: Decoder settings
            lm: Language model, required when lm_weight > 0
            lexicon: Word trie, required when use_lexicon is set

        Raises:
            DecodingError: Missing LM or lexicon
        """
        if config.use_lexicon and lexicon is None:
            raise DecodingError("use_lexicon is set but no lexicon was provided")
        if config.lm_weight > 0 and lm is None:
            raise DecodingError(
                f"lm_weight={config.lm_weight} needs a language model",
                "Pass --lm or set --lm-weight 0.",
            )
        self.config = config
        self.lm = lm if config.lm_weight > 0 else None
        self.lexicon = lexicon if config.use_lexicon else None

    def _close_word(self, state: _WordState) -> Optional[_WordState]:
        """Finish the open word; None when the lexicon rejects it"""
        if self.lexicon is not None:
            if state.node is None:
                return state
            word = state.node.word
            if word is None:
                return None
        else:
            if not state.partial:
                return state
            word = state.partial

        lm_state, lm_log10 = state.lm_state, state.lm_log10
        if self.lm is not None:
            log10_prob, lm_state = self.lm.score_word(lm_state, word)
            lm_log10 += log10_prob
        return _WordState(
            words=state.words + (word,),
            lm_state=lm_state,
            lm_log10=lm_log10,
            word_count=state.word_count + 1,
        )

    def _advance(self, state: _WordState, label: int, info: TokenInfo) -> Optional[_WordState]:
        if info.kind is TokenKind.SEPARATOR:
            return self._close_word(state)

        if info.kind is TokenKind.TAG:
            closed = self._close_word(state)
            if closed is None:
                return None
            return replace(closed, words=closed.words + (info.piece,))

        if info.kind is TokenKind.WORD_START:
            closed = self._close_word(state)
            if closed is None:
                return None
            if self.lexicon is not None:
                node = self.lexicon.child(self.lexicon.root, label)
                if node is None:
                    return None
                return replace(closed, node=node, partial=info.piece)
            return replace(closed, partial=info.piece)

        # plain token continues (or starts) the open word
        if self.lexicon is not None:
            base = state.node if state.node is not None else self.lexicon.root
            node = self.lexicon.child(base, label)
            if node is None:
                return None
            return replace(state, node=node, partial=state.partial + info.piece)
        return replace(state, partial=state.partial + info.piece)

    def _finish(self, state: _WordState) -> Optional[_WordState]:
        closed = self._close_word(state)
        if closed is None or self.lm is None:
            return closed
        log10_prob, lm_state = self.lm.score_word(closed.lm_state, EOS)
        return replace(closed, lm_state=lm_state, lm_log10=closed.lm_log10 + log10_prob)

    def _fused(self, acoustic: float, state: _WordState) -> float:
        return (
            acoustic
            + self.config.lm_weight * LN10 * state.lm_log10
            + self.config.word_bonus * state.word_count
        )

    def decode(self, em: EmissionMatrix) -> List[Hypothesis]:
        """
        Run prefix beam search

        Args:
            em: Emission matrix

        Returns:
            Between one and nbest hypotheses with distinct texts, best first
            (ties broken by text). When every surviving prefix ends inside
            a lexicon word, the open word is dropped from each.

        Raises:
            DecodingError: Unnormalized emissions
        """
        em.validate()
        cfg = self.config
        infos = classify_vocab(em.vocab, em.blank_index)
        blank = em.blank_index
        log_probs = em.log_probs.astype(np.float64)

        initial = _WordState(lm_state=self.lm.begin_state() if self.lm is not None else None)
        beam: Dict[Tuple[int, ...], Tuple[float, float]] = {(): (0.0, NEG_INF)}
        states: Dict[Tuple[int, ...], Optional[_WordState]] = {(): initial}

        for t in range(em.frames):
            row = log_probs[t]
            active = [
                c for c in range(em.classes)
                if c != blank and row[c] > NEG_INF and row[c] >= cfg.prune_log_threshold
            ]
            blank_lp = float(row[blank])
            candidates: Dict[Tuple[int, ...], List[float]] = defaultdict(lambda: [NEG_INF, NEG_INF])

            for key, (p_b, p_nb) in beam.items():
                total = _logaddexp(p_b, p_nb)
                last = key[-1] if key else None
                if blank_lp > NEG_INF:
                    slot = candidates[key]
                    slot[0] = _logaddexp(slot[0], total + blank_lp)

                for c in active:
                    lp = float(row[c])
                    if c == last:
                        slot = candidates[key]
                        slot[1] = _logaddexp(slot[1], p_nb + lp)
                        extend = p_b + lp
                    else:
                        extend = total + lp
                    if extend == NEG_INF:
                        continue
                    new_key = key + (c,)
                    if new_key not in states:
                        parent = states[key]
                        states[new_key] = None if parent is None else self._advance(parent, c, infos[c])
                    if states[new_key] is None:
                        continue
                    slot = candidates[new_key]
                    slot[1] = _logaddexp(slot[1], extend)

            if not candidates:
                logger.warning(f"Frame {t}: every extension rejected by the lexicon; frame skipped")
                continue
            ranked = sorted(
                candidates.items(),
                key=lambda kv: (-self._fused(_logaddexp(kv[1][0], kv[1][1]), states[kv[0]]), kv[0]),
            )
            beam = {key: (p[0], p[1]) for key, p in ranked[:cfg.beam_size]}
            states = {key: states[key] for key in beam}

        return self._collect(beam, states)

    def _collect(self, beam, states) -> List[Hypothesis]:
        merged = self._merge_finished(beam, states, drop_open_word=False)
        if not merged:
            # every survivor ends inside a lexicon word
            logger.debug("No beam ends on a word boundary; dropping open words")
            merged = self._merge_finished(beam, states, drop_open_word=True)

        hypotheses = []
        for text, item in merged.items():
            state = item["state"]
            acoustic = item["acoustic"]
            hypotheses.append(
                Hypothesis(
                    text=text,
                    acoustic_logprob=acoustic,
                    lm_log10prob=state.lm_log10,
                    combined_score=self._fused(acoustic, state),
                    token_count=item["tokens"],
                    word_count=state.word_count,
                    confidence=Hypothesis.confidence_of(acoustic, item["tokens"]),
                )
            )
        hypotheses.sort(key=lambda h: (-h.combined_score, h.text))
        return hypotheses[:self.config.nbest]

    def _merge_finished(self, beam, states, drop_open_word: bool) -> Dict[str, dict]:
        merged: Dict[str, dict] = {}
        for key, (p_b, p_nb) in beam.items():
            state = states[key]
            if drop_open_word:
                state = replace(state, node=None, partial="")
            final = self._finish(state)
            if final is None:
                continue
            acoustic = _logaddexp(p_b, p_nb)
            text = " ".join(final.words)
            current = merged.get(text)
            if current is None:
                merged[text] = {
                    "acoustic": acoustic,
                    "best": acoustic,
                    "tokens": len(key),
                    "state": final,
                }
            else:
                current["acoustic"] = _logaddexp(current["acoustic"], acoustic)
                if acoustic > current["best"]:
                    current["best"] = acoustic
                    current["tokens"] = len(key)
        return merged


def beam_search(
    em: EmissionMatrix,
    cfg: DecoderConfig,
    lm: Optional[ArpaLm] = None,
    lex: Optional[Lexicon] = None,
) -> List[Hypothesis]:
    """Decode one emission matrix; see CTCBeamDecoder"""
    return CTCBeamDecoder(cfg, lm, lex).decode(em)


def select_language_hypothesis(
    nbest: Sequence[Hypothesis], want: LanguageTag
) -> Tuple[Hypothesis, bool]:
    """
    Pick the best hypothesis tagged with the wanted language

    Args:
        nbest: Hypotheses sorted best first
        want: Desired language

    Returns:
        (hypothesis, fallback) where fallback is True when no hypothesis
        carried the wanted tag and the overall best was returned

    Raises:
        DecodingError: Empty N-best list
    """
    if not nbest:
        raise DecodingError("cannot select from an empty N-best list")
    for hypothesis in nbest:
        tag, _ = strip_language_tag(hypothesis.text)
        if tag == want:
            return hypothesis, False
    return nbest[0], True
