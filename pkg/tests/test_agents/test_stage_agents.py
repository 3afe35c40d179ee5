"""
Unit tests for the decoding, normalization, filtering and evaluation agents
"""
import numpy as np
import pytest

from agents.evaluation_agent import CallableDecoder, EmissionSweepDecoder, EvaluationAgent, pair_manifests
from agents.label_filter_agent import LabelFilterAgent
from agents.normalization_agent import NormalizationAgent
from agents.orchestrator_agent import PipelineResources, PseudoLabelOrchestrator
from agents.pseudo_label_agent import PseudoLabelAgent, emission_path_for
from config.settings import settings
from core.errors import MetricError, MissingAudioError, PolicyError, ToolkitIOError
from models.decoding import DecoderConfig, EmissionMatrix, write_emissions
from models.filtering import FilterPolicy
from models.manifest import LanguageTag, ManifestEntry
from utils.audio_utils import SWEEP_FACTORS
from utils.text_normalizer import load_homophones, load_variant_table

VOCAB = ("<b>", "<|pd|>", "<|en|>", "▁how", "▁far")


def entry(name, text="", lang="pd", confidence=None, duration=2.0):
    return ManifestEntry(
        audio_path=f"{name}.wav", duration_s=duration, text=text, lang=lang, confidence=confidence
    )


def write_tagged(path, tag_index, second_best=None):
    """<tag> how far, optionally with a runner-up tag in the first frame"""
    first = np.full(len(VOCAB), 0.01)
    first[tag_index] = 0.6
    if second_best is not None:
        first[second_best] = 0.36
    first[0] = 1.0 - first.sum() + first[0]
    rows = [first, [0.05, 0.0, 0.0, 0.95, 0.0], [0.9, 0.0, 0.0, 0.05, 0.05], [0.05, 0.0, 0.0, 0.0, 0.95]]
    write_emissions(EmissionMatrix.from_probs(np.array(rows), VOCAB), path)


@pytest.fixture(scope="module")
def variant_table():
    return load_variant_table(settings.variant_table_path)


class TestPseudoLabelAgent:
    @pytest.mark.asyncio
    async def test_decodes_in_input_order(self, tmp_path):
        entries = [entry(f"utt{i}") for i in range(4)]
        for i, e in enumerate(entries):
            write_tagged(emission_path_for(e, tmp_path), 1 if i % 2 == 0 else 2)
        agent = PseudoLabelAgent(
            config={"jobs": 2},
            decoder_config=DecoderConfig(beam_size=8, lm_weight=0.0, word_bonus=0.0),
            emissions_dir=tmp_path,
        )
        result = await agent.run(entries)
        assert [u.entry.audio_path for u in result.utterances] == [e.audio_path for e in entries]
        assert [e.text for e in result.entries] == [
            "<|pd|> how far", "<|en|> how far", "<|pd|> how far", "<|en|> how far"
        ]
        assert result.fallback_count == 2
        assert all(0.0 < e.confidence <= 1.0 for e in result.entries)

    @pytest.mark.asyncio
    async def test_selects_wanted_language_from_nbest(self, tmp_path):
        e = entry("utt0")
        write_tagged(emission_path_for(e, tmp_path), 2, second_best=1)
        agent = PseudoLabelAgent(
            decoder_config=DecoderConfig(beam_size=8, nbest=4, lm_weight=0.0, word_bonus=0.0),
            emissions_dir=tmp_path,
        )
        result = await agent.run([e])
        assert result.utterances[0].nbest[0].text == "<|en|> how far"
        assert result.entries[0].text == "<|pd|> how far"
        assert result.fallback_count == 0

    @pytest.mark.asyncio
    async def test_lexicon_utterance_ending_mid_word(self, tmp_path):
        vocab = ("<b>", "a", "b", " ")
        e = entry("cut")
        write_emissions(
            EmissionMatrix.from_probs([[0.05, 0.9, 0.05, 0.0], [0.05, 0.9, 0.05, 0.0]], vocab),
            emission_path_for(e, tmp_path),
        )
        agent = PseudoLabelAgent(
            decoder_config=DecoderConfig(beam_size=1, use_lexicon=True, lm_weight=0.0, word_bonus=0.0),
            emissions_dir=tmp_path,
            lexicon_entries=[("ab", ["a", "b"])],
        )
        result = await agent.run([e])
        assert result.entries[0].text == ""
        assert result.fallback_count == 1

    @pytest.mark.asyncio
    async def test_missing_emissions(self, tmp_path):
        agent = PseudoLabelAgent(decoder_config=DecoderConfig(lm_weight=0.0), emissions_dir=tmp_path)
        with pytest.raises(ToolkitIOError):
            await agent.run([entry("absent")])


class TestNormalizationAgent:
    @pytest.mark.asyncio
    async def test_pidgin_and_other_languages(self, variant_table):
        agent = NormalizationAgent(variant_table=variant_table)
        out = await agent.run([
            entry("a", text="<|pd|> Weytin de happen?"),
            entry("b", text="Ẹ kú 2 àárọ̀!", lang="yo"),
        ])
        assert out[0].text == "<|pd|> wetin dey hapun"
        assert out[1].text == "ẹ kú two àárọ̀"
        assert agent.changed == 2

    @pytest.mark.asyncio
    async def test_unchanged_count(self, variant_table):
        agent = NormalizationAgent(variant_table=variant_table)
        await agent.run([entry("a", text="wetin dey")])
        assert agent.changed == 0

    @pytest.mark.asyncio
    async def test_homophones_with_lm(self, variant_table):
        from utils.ngram_lm import TokenizedCorpus, train_lm

        lm = train_lm(TokenizedCorpus.from_lines(["i dey go market"] * 3), order=2)
        agent = NormalizationAgent(
            config={"window": 2},
            variant_table=variant_table,
            homophones=load_homophones(settings.homophone_path),
            lm=lm,
        )
        out = await agent.run([entry("a", text="I day go market")])
        assert out[0].text == "i dey go market"


class TestLabelFilterAgent:
    @pytest.mark.asyncio
    async def test_sharding_matches_single_pass(self):
        entries = [
            entry(f"u{i}", text=f"<|{'pd' if i % 3 else 'en'}|> how far", confidence=0.1 * (i % 10) + 0.05)
            for i in range(25)
        ]
        policy = FilterPolicy.uniform(0.5)
        single_kept, single_report = await LabelFilterAgent(policy=policy).run(entries)
        sharded_kept, sharded_report = await LabelFilterAgent(config={"shard_size": 4}, policy=policy).run(entries)
        assert sharded_kept == single_kept
        assert sharded_report.to_record() == single_report.to_record()

    @pytest.mark.asyncio
    async def test_uncovered_language_in_last_shard(self):
        entries = [entry(f"u{i}", text="<|pd|> how far", confidence=0.9) for i in range(6)]
        entries.append(entry("u6", lang="yo", text="<|pd|> how far", confidence=0.9))
        agent = LabelFilterAgent(config={"shard_size": 2}, policy=FilterPolicy(thresholds={"pd": 0.5}))
        with pytest.raises(PolicyError, match="lang yo"):
            await agent.run(entries)
        assert agent.state.value == "error"


class TestEvaluationAgent:
    @pytest.mark.asyncio
    async def test_scores_and_lid(self):
        refs = [entry("a", text="how far"), entry("b", text="wetin dey happen"), entry("c", text="no hyp")]
        hyps = [entry("a", text="<|pd|> how far"), entry("b", text="<|en|> wetin happen")]
        report = await EvaluationAgent().run((refs, hyps))
        assert report.unmatched == 1
        assert report.pooled.deletions == 1
        assert report.pooled.ref_words == 5
        assert report.lid.f1(LanguageTag.PD) == pytest.approx(100 * 2 / 3)
        assert report.to_record()["lid"]["languages"]["en"]["fp"] == 1

    @pytest.mark.asyncio
    async def test_no_matches(self):
        with pytest.raises(MetricError):
            await EvaluationAgent().run(([entry("a", text="x")], [entry("b", text="x")]))

    def test_pair_manifests_keeps_reference_order(self):
        refs = [entry("a", text="1"), entry("b", text="2")]
        hyps = [entry("b", text="2"), entry("a", text="1")]
        pairs, unmatched = pair_manifests(refs, hyps)
        assert [r.audio_path for r, _ in pairs] == ["a.wav", "b.wav"]
        assert unmatched == 0

    @pytest.mark.asyncio
    async def test_speed_sweep_reference_echo(self):
        refs = [entry("a", text="how far"), entry("b", text="<|pd|> wetin dey happen")]
        echo = CallableDecoder(lambda e, w, f: e.text, needs_audio=False)
        result = await EvaluationAgent(config={"jobs": 2}).speed_sweep(refs, echo)
        assert [factor for factor, _ in result.rows] == list(SWEEP_FACTORS)
        assert all(wer == 0.0 for _, wer in result.table())

    @pytest.mark.asyncio
    async def test_speed_sweep_stretches_audio(self, tmp_path):
        from models.audio import Waveform, write_wav

        write_wav(Waveform(0.3 * np.sin(np.linspace(0, 2000, 16000))), tmp_path / "a.wav")
        lengths = {}

        def decode(e, waveform, factor):
            lengths[factor] = len(waveform)
            return e.text

        agent = EvaluationAgent(config={"base_dir": str(tmp_path)})
        await agent.speed_sweep([entry("a", text="how far")], CallableDecoder(decode), factors=(1.0, 2.0))
        assert lengths == {1.0: 16000, 2.0: 8000}

    @pytest.mark.asyncio
    async def test_speed_sweep_missing_audio(self, tmp_path):
        agent = EvaluationAgent(config={"base_dir": str(tmp_path)})
        with pytest.raises(MissingAudioError):
            await agent.speed_sweep([entry("a", text="x")], CallableDecoder(lambda e, w, f: ""))

    @pytest.mark.asyncio
    async def test_emission_sweep_decoder(self, tmp_path):
        e = entry("utt0", text="how far")
        for factor in (1.0, 1.2):
            folder = tmp_path / f"x{factor:.1f}"
            folder.mkdir()
            write_tagged(folder / "utt0.ctce", 1)
        result = await EvaluationAgent().speed_sweep([e], EmissionSweepDecoder(tmp_path), factors=(1.0, 1.2))
        assert result.table() == [(1.0, 0.0), (1.2, 0.0)]


class TestOrchestrator:
    @pytest.mark.asyncio
    async def test_stages_and_result(self, tmp_path, variant_table):
        entries = [entry(f"utt{i}") for i in range(3)]
        for i, e in enumerate(entries):
            write_tagged(emission_path_for(e, tmp_path), 1 if i < 2 else 2)
        orchestrator = PseudoLabelOrchestrator(
            config={
                "decoder": DecoderConfig(beam_size=8, lm_weight=0.0, word_bonus=0.0),
                "emissions_dir": tmp_path,
                "filter_policy": FilterPolicy.uniform(0.0),
            },
            resources=PipelineResources(
                variant_table=variant_table,
                references=[entry(f"utt{i}", text="how far") for i in range(3)],
            ),
        )
        result = await orchestrator.run(entries)
        assert result.stages == (
            "initialized", "decoding", "normalizing", "filtering", "evaluating", "completed"
        )
        assert len(result.kept) == 2
        assert result.mix_weights == {"pd": 1.0}
        assert result.evaluation.pooled.wer == 0.0
        assert result.to_record()["fallbacks"] == 1

    @pytest.mark.asyncio
    async def test_failure_marks_workflow(self, tmp_path):
        orchestrator = PseudoLabelOrchestrator(
            config={"decoder": DecoderConfig(lm_weight=0.0), "emissions_dir": tmp_path}
        )
        with pytest.raises(ToolkitIOError):
            await orchestrator.run([entry("absent")])
        assert orchestrator.workflow.current_state.value == "failed"
