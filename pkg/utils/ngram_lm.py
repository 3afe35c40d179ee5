"""
N-gram language models

Interpolated modified Kneser-Ney training (KenLM-compatible estimator),
ARPA serialization, incremental scoring and perplexity.
"""
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from core.errors import ArpaFormatError, CorpusError, ToolkitIOError
from utils.logger import get_logger

logger = get_logger(__name__)

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

# log10 written for impossible events (<s> as a prediction, zero backoff)
LOG10_ZERO = -99.0

FALLBACK_DISCOUNTS = (0.5, 1.0, 1.5)

NGram = Tuple[str, ...]
# (log10 probability, log10 backoff or None when the n-gram is never a context)
ArpaEntry = Tuple[float, Optional[float]]


@dataclass(frozen=True)
class TokenizedCorpus:
    """Whitespace-tokenized sentences"""
    sentences: Tuple[Tuple[str, ...], ...]

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "TokenizedCorpus":
        """
        Tokenize lines on whitespace; empty lines and boundary markers are dropped
        """
        sentences = []
        for line in lines:
            words = tuple(w for w in line.split() if w not in (BOS, EOS))
            if words:
                sentences.append(words)
        return cls(tuple(sentences))

    @property
    def vocabulary(self) -> frozenset:
        return frozenset(w for sentence in self.sentences for w in sentence)

    @property
    def token_count(self) -> int:
        """Scored tokens: words plus one </s> per sentence"""
        return sum(len(s) + 1 for s in self.sentences)

    def __len__(self) -> int:
        return len(self.sentences)


def read_corpus(path: Union[str, Path]) -> TokenizedCorpus:
    """Read a one-sentence-per-line UTF-8 corpus"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return TokenizedCorpus.from_lines(f)
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))


@dataclass(frozen=True)
class LmState:
    """Most recent words, at most order-1 of them"""
    context: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Discounts:
    """Modified Kneser-Ney discounts for counts 1, 2 and 3+"""
    d1: float
    d2: float
    d3: float
    fallback: bool = False

    def __call__(self, count: int) -> float:
        if count <= 0:
            return 0.0
        if count == 1:
            return self.d1
        if count == 2:
            return self.d2
        return self.d3


def estimate_discounts(adjusted_counts: Iterable[int]) -> Discounts:
    """
    Closed-form discounts from count-of-counts

    Falls back to (0.5, 1.0, 1.5) when a count-of-count is zero or any
    discount lands outside [0, k].

    Args:
        adjusted_counts: Adjusted counts of every n-gram of one order

    Returns:
        Discounts for the order
    """
    count_of_counts = Counter(c for c in adjusted_counts if 1 <= c <= 4)
    t1, t2, t3, t4 = (count_of_counts.get(k, 0) for k in (1, 2, 3, 4))
    try:
        y = t1 / (t1 + 2 * t2)
        values = (
            1 - 2 * y * t2 / t1,
            2 - 3 * y * t3 / t2,
            3 - 4 * y * t4 / t3,
        )
    except ZeroDivisionError:
        return Discounts(*FALLBACK_DISCOUNTS, fallback=True)

    for k, d in enumerate(values, start=1):
        if math.isnan(d) or d < 0 or d > k:
            return Discounts(*FALLBACK_DISCOUNTS, fallback=True)
    return Discounts(*values)


def _lookup(tables: Sequence[Mapping[NGram, ArpaEntry]], context: NGram, word: str) -> float:
    """Backoff query; word must already be mapped to a known unigram or <unk>"""
    total = 0.0
    ctx = context[-(len(tables) - 1):] if len(tables) > 1 else ()
    while True:
        entry = tables[len(ctx)].get(ctx + (word,))
        if entry is not None:
            return total + entry[0]
        if not ctx:
            return total + LOG10_ZERO
        history = tables[len(ctx) - 1].get(ctx)
        if history is not None and history[1] is not None:
            total += history[1]
        ctx = ctx[1:]


class ArpaLm:
    """Backoff N-gram model; immutable after construction"""

    def __init__(self, order: int, tables: Sequence[Mapping[NGram, ArpaEntry]]):
        """
        Args:
            order: Model order
            tables: tables[k-1] maps k-grams to (log10 prob, log10 backoff)
        """
        if order < 1 or len(tables) != order:
            raise CorpusError(f"model order {order} does not match {len(tables)} tables")
        self.order = order
        self._tables: Tuple[Dict[NGram, ArpaEntry], ...] = tuple(dict(t) for t in tables)
        self._known = frozenset(g[0] for g in self._tables[0] if g[0] != BOS)

    @property
    def tables(self) -> Tuple[Dict[NGram, ArpaEntry], ...]:
        return self._tables

    @property
    def counts(self) -> List[int]:
        return [len(t) for t in self._tables]

    @property
    def vocabulary(self) -> frozenset:
        """Predictable unigrams (excludes <s>)"""
        return self._known

    @property
    def unk_log10_prob(self) -> float:
        entry = self._tables[0].get((UNK,))
        return entry[0] if entry is not None else LOG10_ZERO

    @property
    def closed_vocabulary(self) -> bool:
        return UNK not in self._known

    def begin_state(self) -> LmState:
        """State at sentence start"""
        if self.order == 1:
            return LmState(())
        return LmState((BOS,))

    def map_word(self, word: str) -> str:
        return word if word in self._known else UNK

    def score_word(self, state: LmState, word: str) -> Tuple[float, LmState]:
        """
        Conditional log10 probability of word after state

        Args:
            state: Current context
            word: Next word; unknown words score as <unk>

        Returns:
            (log10 probability, advanced state)
        """
        mapped = self.map_word(word)
        log10_prob = _lookup(self._tables, state.context, mapped)
        if self.order == 1:
            return log10_prob, LmState(())
        context = (state.context + (mapped,))[-(self.order - 1):]
        return log10_prob, LmState(context)

    def conditional_distribution(self, context: NGram) -> Dict[str, float]:
        """Probabilities of every predictable word after context"""
        state = LmState(tuple(context)[-(self.order - 1):] if self.order > 1 else ())
        return {w: 10 ** self.score_word(state, w)[0] for w in sorted(self._known)}


def score_word(lm: ArpaLm, state: LmState, word: str) -> Tuple[float, LmState]:
    """Module-level alias of ArpaLm.score_word"""
    return lm.score_word(state, word)


def sentence_logprob(lm: ArpaLm, words: Sequence[str]) -> float:
    """log10 probability of words followed by </s>, starting from <s>"""
    state = lm.begin_state()
    total = 0.0
    for word in words:
        log10_prob, state = lm.score_word(state, word)
        total += log10_prob
    log10_prob, _ = lm.score_word(state, EOS)
    return total + log10_prob


def perplexity(lm: ArpaLm, corpus: TokenizedCorpus) -> float:
    """
    Corpus perplexity, counting every word and each </s>

    Raises:
        CorpusError: Empty corpus
    """
    if not corpus.sentences:
        raise CorpusError("perplexity needs at least one sentence")
    total = sum(sentence_logprob(lm, sentence) for sentence in corpus.sentences)
    return 10 ** (-total / corpus.token_count)


def _raw_counts(corpus: TokenizedCorpus, order: int) -> List[Counter]:
    counts = [Counter() for _ in range(order)]
    for sentence in corpus.sentences:
        padded = (BOS,) + sentence + (EOS,)
        for n in range(1, order + 1):
            for i in range(len(padded) - n + 1):
                gram = padded[i:i + n]
                if gram == (BOS,):
                    continue
                counts[n - 1][gram] += 1
    return counts


def _adjusted_counts(raw: List[Counter], order: int) -> List[Dict[NGram, int]]:
    """Continuation counts below the top order, raw counts for <s>-initial n-grams"""
    adjusted: List[Dict[NGram, int]] = [dict() for _ in range(order)]
    adjusted[order - 1] = dict(raw[order - 1])
    for n in range(order - 1, 0, -1):
        left_extensions = Counter(gram[1:] for gram in raw[n])
        adjusted[n - 1] = {
            gram: count if gram[0] == BOS else left_extensions[gram]
            for gram, count in raw[n - 1].items()
        }
    return adjusted


def _kept_ngrams(raw: List[Counter], order: int, min_counts: Sequence[int]) -> List[set]:
    """Raw-count pruning; prefixes and suffixes of kept n-grams survive"""
    kept: List[set] = [set() for _ in range(order)]
    for n in range(order, 0, -1):
        if n == 1:
            kept[0] = set(raw[0])
        else:
            threshold = min_counts[n - 1]
            kept[n - 1] = {g for g, c in raw[n - 1].items() if c >= threshold}
        if n < order:
            for gram in kept[n]:
                kept[n - 1].add(gram[:-1])
                kept[n - 1].add(gram[1:])
    kept[0].discard((BOS,))
    return kept


def train_lm(
    corpus: TokenizedCorpus,
    order: int = 5,
    min_count_per_order: Optional[Sequence[int]] = None,
    closed_vocabulary: bool = False,
) -> ArpaLm:
    """
    Train an interpolated modified Kneser-Ney model

    Each sentence is padded with one <s> and one </s>. The unigram level
    interpolates with a uniform distribution over words, </s> and <unk>
    (no <unk> in closed-vocabulary mode). Stored backoffs equal the
    interpolation weights, so every conditional distribution sums to one.

    Args:
        corpus: Training sentences
        order: Model order (>= 1)
        min_count_per_order: Raw-count thresholds per order; unigrams are never pruned
        closed_vocabulary: Give <unk> no probability mass

    Returns:
        Trained ArpaLm

    Raises:
        CorpusError: Empty corpus or invalid order/thresholds
    """
    if order < 1:
        raise CorpusError(f"order must be >= 1, got {order}")
    if not corpus.sentences:
        raise CorpusError("cannot train a language model on an empty corpus")
    min_counts = list(min_count_per_order or [])
    if len(min_counts) > order:
        raise CorpusError(f"{len(min_counts)} min counts given for an order-{order} model")
    if any(c < 1 for c in min_counts):
        raise CorpusError("min counts must be >= 1")
    min_counts += [1] * (order - len(min_counts))

    raw = _raw_counts(corpus, order)
    adjusted = _adjusted_counts(raw, order)
    kept = _kept_ngrams(raw, order, min_counts)

    tables: List[Dict[NGram, ArpaEntry]] = []
    for n in range(1, order + 1):
        discounts = estimate_discounts(adjusted[n - 1].values())
        if discounts.fallback:
            logger.warning(
                f"order {n}: count-of-counts do not support closed-form discounts, "
                f"using fallback {FALLBACK_DISCOUNTS}"
            )
        else:
            logger.debug(
                f"order {n}: discounts D1={discounts.d1:.4f} D2={discounts.d2:.4f} D3+={discounts.d3:.4f}"
            )

        by_context: Dict[NGram, List[Tuple[str, int]]] = defaultdict(list)
        for gram, count in adjusted[n - 1].items():
            by_context[gram[:-1]].append((gram[-1], count))

        discounted: Dict[NGram, float] = {}
        gammas: Dict[NGram, float] = {}
        for context, extensions in by_context.items():
            denominator = sum(count for _, count in extensions)
            kept_mass = 0.0
            for word, count in extensions:
                gram = context + (word,)
                if gram not in kept[n - 1]:
                    continue
                p = (count - discounts(count)) / denominator
                discounted[gram] = p
                kept_mass += p
            gammas[context] = max(0.0, 1.0 - kept_mass)

        table: Dict[NGram, ArpaEntry] = {}
        if n == 1:
            predicted = {g[0] for g in discounted} | {EOS}
            if not closed_vocabulary:
                predicted.add(UNK)
            gamma = gammas.get((), 1.0)
            uniform = 1.0 / len(predicted)
            for word in predicted:
                p = discounted.get((word,), 0.0) + gamma * uniform
                table[(word,)] = (math.log10(p), None)
            table[(BOS,)] = (LOG10_ZERO, None)
        else:
            for gram, p in discounted.items():
                lower = 10 ** _lookup(tables, gram[1:-1], gram[-1])
                table[gram] = (math.log10(p + gammas[gram[:-1]] * lower), None)

            previous = tables[n - 2]
            for context, gamma in gammas.items():
                if context not in previous:
                    continue
                log_gamma = math.log10(gamma) if gamma > 0 else LOG10_ZERO
                previous[context] = (previous[context][0], log_gamma)
        tables.append(table)

    lm = ArpaLm(order, tables)
    logger.info(
        f"Trained {order}-gram model on {len(corpus)} sentences: "
        + ", ".join(f"{k}-grams={c}" for k, c in enumerate(lm.counts, start=1))
    )
    return lm


def _format_float(value: float) -> str:
    return f"{value:.6f}"


def format_arpa(lm: ArpaLm) -> str:
    """ARPA text of the model (tab-separated fields, trailing newline)"""
    lines = ["\\data\\"]
    for n, count in enumerate(lm.counts, start=1):
        lines.append(f"ngram {n}={count}")
    lines.append("")

    for n, table in enumerate(lm.tables, start=1):
        lines.append(f"\\{n}-grams:")
        for gram in sorted(table):
            log10_prob, backoff = table[gram]
            line = f"{_format_float(log10_prob)}\t{' '.join(gram)}"
            if backoff is not None and n < lm.order:
                line += f"\t{_format_float(backoff)}"
            lines.append(line)
        lines.append("")
    lines.append("\\end\\")
    return "\n".join(lines) + "\n"


def write_arpa(lm: ArpaLm, path: Union[str, Path]) -> None:
    """Write the model in ARPA text format"""
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(format_arpa(lm), encoding="utf-8")
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))


def _parse_entry(path, line_no: int, line: str, n: int) -> Tuple[NGram, ArpaEntry]:
    if "\t" in line:
        fields = line.split("\t")
        words = tuple(fields[1].split()) if len(fields) > 1 else ()
        backoff_field = fields[2] if len(fields) > 2 else None
    else:
        fields = line.split()
        words = tuple(fields[1:n + 1])
        backoff_field = fields[n + 1] if len(fields) > n + 1 else None
        if len(fields) > n + 2:
            raise ArpaFormatError(path, line_no, "too many fields")
    if len(words) != n:
        raise ArpaFormatError(path, line_no, f"expected {n} words, found {len(words)}")
    try:
        log10_prob = float(fields[0])
        backoff = float(backoff_field) if backoff_field not in (None, "") else None
    except ValueError:
        raise ArpaFormatError(path, line_no, "probability or backoff is not a number")
    return words, (log10_prob, backoff)


def read_arpa(path: Union[str, Path]) -> ArpaLm:
    """
    Parse an ARPA file

    Raises:
        ArpaFormatError: Malformed headers, entries or count mismatches
        ToolkitIOError: File cannot be read
    """
    try:
        raw_lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))

    declared: Dict[int, int] = {}
    tables: Dict[int, Dict[NGram, ArpaEntry]] = {}
    section: Optional[str] = None
    current = 0
    header_line: Dict[int, int] = {}
    ended = False

    for line_no, raw in enumerate(raw_lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if ended:
            raise ArpaFormatError(path, line_no, "content after \\end\\")
        if line == "\\data\\":
            if section is not None:
                raise ArpaFormatError(path, line_no, "duplicate \\data\\ section")
            section = "data"
            continue
        if section is None:
            continue
        if line == "\\end\\":
            ended = True
            continue
        if line.startswith("\\") and line.endswith("-grams:"):
            try:
                n = int(line[1:-len("-grams:")])
            except ValueError:
                raise ArpaFormatError(path, line_no, f"bad section header {line!r}")
            if n not in declared:
                raise ArpaFormatError(path, line_no, f"section {n}-grams not declared in \\data\\")
            if n != current + 1:
                raise ArpaFormatError(path, line_no, f"section {n}-grams out of order")
            current = n
            section = "grams"
            tables[n] = {}
            header_line[n] = line_no
            continue
        if section == "data":
            if not line.startswith("ngram ") or "=" not in line:
                raise ArpaFormatError(path, line_no, f"expected 'ngram k=count', got {line!r}")
            try:
                key, value = line[len("ngram "):].split("=", 1)
                declared[int(key)] = int(value)
            except ValueError:
                raise ArpaFormatError(path, line_no, f"bad count line {line!r}")
            continue
        gram, entry = _parse_entry(path, line_no, line, current)
        tables[current][gram] = entry

    if section is None:
        raise ArpaFormatError(path, 1, "missing \\data\\ section")
    if not ended:
        raise ArpaFormatError(path, len(raw_lines), "missing \\end\\ marker")
    order = max(declared) if declared else 0
    if order < 1 or sorted(declared) != list(range(1, order + 1)):
        raise ArpaFormatError(path, 1, "\\data\\ must declare ngram 1..N counts")
    for n in range(1, order + 1):
        if n not in tables:
            raise ArpaFormatError(path, len(raw_lines), f"missing \\{n}-grams: section")
        if len(tables[n]) != declared[n]:
            raise ArpaFormatError(
                path,
                header_line[n],
                f"ngram {n}={declared[n]} declared but {len(tables[n])} entries found",
            )

    return ArpaLm(order, [tables[n] for n in range(1, order + 1)])


def format_perplexity_table(values: Mapping[str, float]) -> str:
    """
    Render perplexities as a two-row markdown table

    Args:
        values: Language label -> perplexity, in column order

    Returns:
        Table text with values at 2 decimals
    """
    header = ["Language"] + list(values)
    row = ["Perplexity"] + [f"{v:.2f}" for v in values.values()]
    widths = [max(len(a), len(b)) for a, b in zip(header, row)]

    def render(cells: List[str]) -> str:
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

    separator = "|" + "|".join("-" * (w + 2) for w in widths) + "|"
    return "\n".join([render(header), separator, render(row)])
