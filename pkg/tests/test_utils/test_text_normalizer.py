"""
Unit tests for transcript preprocessing and Pidgin normalization
"""
import pytest

from config.settings import settings
from core.errors import CorpusError, MetricError, ToolkitIOError
from utils.ngram_lm import TokenizedCorpus, train_lm
from utils.text_normalizer import (
    HomophoneSets,
    VariantTable,
    apply_variants,
    dedup_and_filter,
    disambiguate_homophones,
    load_homophones,
    load_variant_table,
    mine_variants,
    normalize_pidgin,
    preprocess,
    spell_number,
    strip_diacritics,
)


@pytest.fixture(scope="module")
def variant_table():
    return load_variant_table(settings.variant_table_path)


@pytest.fixture(scope="module")
def homophones():
    return load_homophones(settings.homophone_path)


class TestPreprocess:
    def test_lowercase_and_punctuation(self):
        assert preprocess("Wetin DEY happen?!") == "wetin dey happen"

    def test_keeps_apostrophes_and_dashes(self):
        assert preprocess("Don’t go—well-known") == "don't go-well-known"

    def test_spells_digits(self):
        assert preprocess("I get 25 naira") == "i get twenty five naira"
        assert preprocess("room 101") == "room one hundred and one"

    def test_digits_kept_when_disabled(self):
        assert preprocess("I get 25 naira.", spell_digits=False) == "i get 25 naira"

    def test_whitespace_collapsed(self):
        assert preprocess("  how   far \t o ") == "how far o"

    def test_spell_number(self):
        assert spell_number(0) == "zero"
        assert spell_number(1999) == "one thousand nine hundred and ninety nine"

    def test_idempotent(self):
        text = "Na 3 pikin dey for house, abi?"
        assert preprocess(preprocess(text)) == preprocess(text)


def test_strip_diacritics():
    assert strip_diacritics("ẹ kú àárọ̀") == "e ku aaro"
    assert strip_diacritics("Ọ̀nụ́") == "Onu"
    assert strip_diacritics("plain") == "plain"


class TestVariantTable:
    def test_shipped_table(self, variant_table):
        assert len(variant_table) == 253
        assert variant_table.non_closed_sources() == []

    def test_every_mapping_reproduced(self, variant_table):
        for source, replacement in variant_table.items():
            assert apply_variants(source, variant_table) == replacement, source

    def test_idempotent_on_table(self, variant_table):
        for source, _ in variant_table.items():
            once = apply_variants(source, variant_table)
            assert apply_variants(once, variant_table) == once, source

    def test_sentence(self, variant_table):
        assert apply_variants("weytin de happen", variant_table) == "wetin dey hapun"

    def test_longest_match_first(self):
        table = VariantTable({"e": "i", "e day": "e dey"})
        assert apply_variants("e day go", table) == "e dey go"
        assert apply_variants("e go", table) == "i go"

    def test_whole_words_only(self):
        table = VariantTable({"de": "dey"})
        assert apply_variants("dem de go", table) == "dem dey go"

    def test_empty_replacement_deletes(self):
        table = VariantTable({"o": ""})
        assert apply_variants("how far o", table) == "how far"

    def test_bad_line(self, tmp_path):
        path = tmp_path / "variants.tsv"
        path.write_text("# header\nabof above\n", encoding="utf-8")
        with pytest.raises(CorpusError, match=":2:"):
            load_variant_table(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ToolkitIOError):
            load_variant_table(tmp_path / "absent.tsv")

    def test_normalize_pidgin(self, variant_table):
        assert normalize_pidgin("Weytin de happen?", variant_table) == "wetin dey hapun"


class TestHomophones:
    def test_shipped_sets_are_disjoint(self, homophones):
        seen = set()
        for members in homophones.sets:
            assert len(members) >= 2
            assert not (seen & members)
            seen |= members
        assert homophones.set_for("been") == frozenset({"been", "bin"})
        assert homophones.candidates("sey") == ["say", "se", "sey"]

    def test_overlapping_groups_merge(self):
        sets = HomophoneSets.from_groups([["a", "b"], ["c", "d"], ["b", "e"]])
        assert len(sets) == 2
        assert sets.set_for("e") == frozenset({"a", "b", "e"})

    def test_overlap_rejected_when_built_directly(self):
        with pytest.raises(ValueError):
            HomophoneSets((frozenset({"a", "b"}), frozenset({"b", "c"})))

    def test_multiword_members_not_candidates(self):
        sets = HomophoneSets.from_groups([["becoming", "become hin"]])
        assert sets.candidates("becoming") == ["becoming"]

    def test_lm_forced_choice_for_every_set(self, homophones):
        resolvable = []
        for k, members in enumerate(homophones.sets):
            candidates = sorted(m for m in members if " " not in m)
            if len(candidates) >= 2:
                resolvable.append((f"zq{k}", candidates, candidates[-1]))
        assert len(resolvable) >= 25

        lines = [f"{context} {target}" for context, _, target in resolvable for _ in range(5)]
        lm = train_lm(TokenizedCorpus.from_lines(lines), order=2)
        for context, candidates, target in resolvable:
            for member in candidates:
                assert disambiguate_homophones(f"{context} {member}", homophones, lm) == f"{context} {target}"

    def test_say_sey_context(self):
        sets = HomophoneSets.from_groups([["say", "sey", "se"]])
        lm = train_lm(
            TokenizedCorpus.from_lines(["im talk sey e go come"] * 4 + ["make i say am"] * 4),
            order=3,
        )
        assert disambiguate_homophones("im talk say e go come", sets, lm) == "im talk sey e go come"
        assert disambiguate_homophones("make i sey am", sets, lm) == "make i say am"

    def test_token_count_preserved(self, homophones):
        lm = train_lm(TokenizedCorpus.from_lines(["i bin go"]), order=2)
        out = disambiguate_homophones("i been go market", homophones, lm, window=None)
        assert len(out.split()) == 4
        assert out == "i bin go market"


class TestCorpusTools:
    def test_mine_variants(self):
        pairs = mine_variants(
            ["wetin dey happen", "wetin dey happen now"],
            ["weytin dey hapun", "weytin dey happen now"],
        )
        assert [(p.ref_word, p.hyp_word, p.count) for p in pairs] == [
            ("wetin", "weytin", 2),
            ("happen", "hapun", 1),
        ]

    def test_mine_variants_min_count(self):
        pairs = mine_variants(["a b", "a b"], ["x b", "a y"], min_count=2)
        assert pairs == []

    def test_mine_variants_length_mismatch(self):
        with pytest.raises(MetricError):
            mine_variants(["a"], [])

    def test_dedup_and_filter(self):
        kept = dedup_and_filter(
            ["How far", "how far!", "Wetin dey", "Test line"],
            heldout=["test line."],
        )
        assert kept == ["How far", "Wetin dey"]
