"""Transcript normalization agent"""
from typing import Any, Dict, List, Optional

from agents.base_agent import BaseAgent
from models.manifest import LanguageTag, ManifestEntry, strip_language_tag
from utils.ngram_lm import ArpaLm
from utils.text_normalizer import HomophoneSets, VariantTable, normalize_pidgin, preprocess


class NormalizationAgent(BaseAgent):
    """Preprocesses every transcript; Pidgin entries also get variant and homophone normalization"""

    def __init__(
        self,
        agent_id: str = "normalizer",
        config: Optional[Dict[str, Any]] = None,
        variant_table: Optional[VariantTable] = None,
        homophones: Optional[HomophoneSets] = None,
        lm: Optional[ArpaLm] = None,
    ):
        """
        Args:
            agent_id: Agent identifier
            config: spell_digits, pidgin, window, full_sentence
            variant_table: Pidgin variant table
            homophones: Pidgin confusion sets
            lm: Pidgin LM used for homophone disambiguation
        """
        super().__init__(agent_id, config)
        self.spell_digits = self.config.get("spell_digits", True)
        self.pidgin = self.config.get("pidgin", True) and variant_table is not None
        self.window = None if self.config.get("full_sentence", False) else self.config.get("window", 4)
        self.variant_table = variant_table
        self.homophones = homophones
        self.lm = lm
        self.changed = 0

    def normalize_text(self, text: str, lang: LanguageTag) -> str:
        """Normalize the transcript body; a leading language tag is preserved"""
        tag, body = strip_language_tag(text)
        if self.pidgin and lang is LanguageTag.PD:
            body = normalize_pidgin(
                body, self.variant_table, self.homophones, self.lm, self.window, self.spell_digits
            )
        else:
            body = preprocess(body, spell_digits=self.spell_digits)
        return f"{tag.token} {body}" if tag is not None else body

    async def validate_input(self, entries: List[ManifestEntry]) -> bool:
        return isinstance(entries, list)

    async def execute(self, entries: List[ManifestEntry]) -> List[ManifestEntry]:
        """
        Args:
            entries: Manifest entries

        Returns:
            Entries with normalized text, in input order
        """
        normalized = []
        self.changed = 0
        for entry in entries:
            text = self.normalize_text(entry.text, entry.lang)
            if text != entry.text:
                self.changed += 1
            normalized.append(entry.with_text(text))
        self.logger.info(f"Normalized {len(entries)} transcript(s), {self.changed} changed")
        return normalized
