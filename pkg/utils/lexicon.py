"""Word -> token-sequence trie used to constrain beam search"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from core.errors import LexiconFormatError, ToolkitIOError
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class TrieNode:
    children: Dict[int, "TrieNode"] = field(default_factory=dict)
    word: Optional[str] = None


class Lexicon:
    """Trie over vocabulary indices; a node carries the word spelled by its path"""

    def __init__(self):
        self.root = TrieNode()
        self._words: List[str] = []
        self._word_set: set = set()

    @property
    def words(self) -> Tuple[str, ...]:
        return tuple(self._words)

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, word: str) -> bool:
        return word in self._word_set

    def insert(self, word: str, token_ids: Sequence[int]) -> bool:
        """
        Add a spelling

        Args:
            word: Word text
            token_ids: Vocabulary indices spelling the word

        Returns:
            False when another word already owns the same spelling
        """
        if not token_ids:
            raise ValueError(f"empty spelling for {word!r}")
        node = self.root
        for token_id in token_ids:
            node = node.children.setdefault(token_id, TrieNode())
        if node.word is not None and node.word != word:
            logger.debug(f"spelling of {word!r} already taken by {node.word!r}")
            return False
        node.word = word
        if word not in self._word_set:
            self._words.append(word)
            self._word_set.add(word)
        return True

    def child(self, node: TrieNode, token_id: int) -> Optional[TrieNode]:
        return node.children.get(token_id)

    @classmethod
    def from_entries(
        cls, entries: Iterable[Tuple[str, Sequence[str]]], vocab: Sequence[str]
    ) -> "Lexicon":
        """
        Build from (word, token strings) pairs

        Words spelled with tokens missing from vocab are skipped with a warning.
        """
        index = {token: i for i, token in enumerate(vocab)}
        lexicon = cls()
        skipped = []
        for word, tokens in entries:
            ids = [index.get(t) for t in tokens]
            if any(i is None for i in ids) or not ids:
                skipped.append(word)
                continue
            lexicon.insert(word, ids)
        if skipped:
            preview = ", ".join(skipped[:5])
            logger.warning(f"{len(skipped)} lexicon word(s) use tokens outside the vocabulary: {preview}")
        return lexicon


def parse_lexicon_lines(
    lines: Iterable[str], path: Union[str, Path] = "<lexicon>"
) -> List[Tuple[str, List[str]]]:
    """Parse `word<TAB>token token ...` lines"""
    entries = []
    for line_no, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        if "\t" not in line:
            raise LexiconFormatError(path, line_no, "missing TAB between word and tokens")
        word, spelling = line.split("\t", 1)
        tokens = spelling.split(" ") if spelling.strip() else []
        tokens = [t for t in tokens if t != ""]
        if not word or not tokens:
            raise LexiconFormatError(path, line_no, "word and spelling must be non-empty")
        entries.append((word, tokens))
    return entries


def load_lexicon(path: Union[str, Path], vocab: Sequence[str]) -> Lexicon:
    """Load a lexicon file against an emission vocabulary"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            entries = parse_lexicon_lines(f, path)
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))
    lexicon = Lexicon.from_entries(entries, vocab)
    logger.info(f"Loaded lexicon {path}: {len(lexicon)} words")
    return lexicon
