"""
Unit tests for WER, diacritic-stripped WER and language-ID F1
"""
import pytest

from core.errors import MetricError
from models.manifest import LanguageTag
from utils.metrics import (
    WerBreakdown,
    corpus_wer,
    format_score,
    lid_f1,
    macro_average,
    utterance_average_wer,
    wer,
    wer_diacritic_modes,
)

PAIRS = [
    ("wetin dey happen", "wetin dey happen"),
    ("i no sabi am at all", "i sabi am at all"),
    ("how far", "how far my guy"),
    ("make we go market", "make una go"),
]


class TestWer:
    def test_identity(self):
        assert wer("Wetin dey happen?", "wetin dey happen").wer == 0.0

    def test_one_substitution(self):
        result = wer("a b c", "a x c")
        assert (result.substitutions, result.insertions, result.deletions) == (1, 0, 0)
        assert result.wer == pytest.approx(1 / 3)

    def test_insertions_exceed_one(self):
        result = wer("a", "a b c")
        assert result.insertions == 2
        assert result.wer == 2.0

    def test_empty_hypothesis_is_all_deletions(self):
        result = wer("a b", "")
        assert result.deletions == 2
        assert result.wer == 1.0

    def test_empty_reference(self):
        with pytest.raises(MetricError):
            wer("", "a")
        with pytest.raises(MetricError):
            wer("?!", "a")

    def test_raw_mode_keeps_case(self):
        assert wer("How far", "how far", raw=True).wer == 0.5
        assert wer("How far", "how far").wer == 0.0

    def test_digits_spelled_before_scoring(self):
        assert wer("i get two naira", "I get 2 naira").wer == 0.0

    def test_breakdown_rejects_zero_words(self):
        with pytest.raises(MetricError):
            WerBreakdown(0, 0, 0, 0)


class TestCorpusWer:
    def test_pooled_is_reference_weighted_mean(self):
        pooled = corpus_wer(PAIRS)
        per = [wer(r, h) for r, h in PAIRS]
        weighted = sum(p.wer * p.ref_words for p in per) / sum(p.ref_words for p in per)
        assert pooled.wer == pytest.approx(weighted)
        assert pooled.ref_words == 3 + 6 + 2 + 4
        assert pooled.errors == 0 + 1 + 2 + 2

    def test_utterance_average_differs(self):
        average = utterance_average_wer(PAIRS)
        assert average == pytest.approx((0 + 1 / 6 + 1.0 + 0.5) / 4)
        assert average != pytest.approx(corpus_wer(PAIRS).wer)

    def test_empty(self):
        with pytest.raises(MetricError):
            corpus_wer([])
        with pytest.raises(MetricError):
            utterance_average_wer([])

    def test_record(self):
        record = corpus_wer([("a b", "a c")]).to_record()
        assert record == {"substitutions": 1, "insertions": 0, "deletions": 0, "ref_words": 2, "wer": 0.5}


class TestDiacritics:
    def test_stripping_forgives_tone_marks(self):
        modes = wer_diacritic_modes([("ẹ kú àárọ̀", "e ku aaro")])
        assert modes["retained"].wer == 1.0
        assert modes["stripped"].wer == 0.0

    def test_stripped_never_worse(self):
        pairs = [
            ("ọmọ náà ti lọ", "omo naa ti lo"),
            ("bàbá mi wà nílé", "baba mi wa ni ile"),
            ("wetin dey happen", "wetin de happen"),
        ]
        modes = wer_diacritic_modes(pairs)
        assert modes["stripped"].wer <= modes["retained"].wer


class TestAggregates:
    def test_macro_average_renders_two_decimals(self):
        assert format_score(macro_average([19.36, 24.38, 33.86, 39.94, 12.94])) == "26.10"
        assert format_score(macro_average([25.3, 31.04, 38.68, 55.6, 32.44])) == "36.61"

    def test_macro_average_empty(self):
        with pytest.raises(MetricError):
            macro_average([])

    def test_format_none(self):
        assert format_score(None) == "n/a"


class TestLid:
    def test_pd_with_english_confusions(self):
        pairs = [(LanguageTag.PD, LanguageTag.PD)] * 97 + [(LanguageTag.EN, LanguageTag.PD)] * 3
        report = lid_f1(pairs)
        assert report.f1(LanguageTag.PD) == pytest.approx(100 * 194 / 197)
        assert format_score(report.f1(LanguageTag.PD)) == "98.48"
        assert report.f1(LanguageTag.EN) == 0.0
        assert report.f1(LanguageTag.YO) is None

    def test_rows_render_perfect_and_absent(self):
        pairs = [(LanguageTag.YO, LanguageTag.YO)] * 5 + [(None, LanguageTag.HA)]
        rows = dict(lid_f1(pairs).rows())
        assert rows["yo"] == "100.00"
        assert rows["ha"] == "0.00"
        assert rows["pd"] == "n/a"
        assert list(rows) == ["en", "ig", "yo", "pd", "ha"]

    def test_missing_prediction_is_not_a_false_positive(self):
        report = lid_f1([(None, LanguageTag.PD), (LanguageTag.PD, LanguageTag.PD)])
        counts = report.per_language[LanguageTag.PD]
        assert (counts.tp, counts.fp, counts.fn) == (1, 0, 1)
        assert sum(c.fp for c in report.per_language.values()) == 0

    def test_micro_and_record(self):
        report = lid_f1([(LanguageTag.PD, LanguageTag.PD), (LanguageTag.EN, LanguageTag.PD)])
        assert report.micro_f1 == pytest.approx(50.0)
        assert report.to_record()["languages"]["pd"]["f1"] == pytest.approx(66.6667)

    def test_empty(self):
        with pytest.raises(MetricError):
            lid_f1([])
