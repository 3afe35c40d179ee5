"""
Performance benchmarks for the pseudo-labelling toolkit
"""

import asyncio
import statistics
import time
from typing import Any, Dict

import numpy as np
import pytest

from cli import main
from core.errors import EXIT_OK
from models.audio import Segment, Waveform
from models.decoding import DecoderConfig, EmissionMatrix
from utils.audio_utils import SWEEP_FACTORS, mix_noise, split_long_segment, wsola_stretch
from utils.concurrency import ConcurrencyLimiter
from utils.ctc_decoder import CTCBeamDecoder
from utils.ngram_lm import TokenizedCorpus, perplexity, train_lm
from tests.fixtures.smoke_fixture import build_smoke_fixture
from tests.test_utils.test_ctc_decoder import exhaustive_text_scores


class BenchmarkResult:
    """Benchmark result data class"""

    def __init__(self, name: str):
        self.name = name
        self.timings = []
        self.success_count = 0
        self.failure_count = 0

    def add_timing(self, duration: float, success: bool = True):
        """Add a timing measurement"""
        self.timings.append(duration)
        if success:
            self.success_count += 1
        else:
            self.failure_count += 1

    def get_stats(self) -> Dict[str, Any]:
        """Get statistical summary"""
        if not self.timings:
            return {}

        return {
            'name': self.name,
            'count': len(self.timings),
            'total_time': sum(self.timings),
            'mean': statistics.mean(self.timings),
            'median': statistics.median(self.timings),
            'max': max(self.timings),
            'success_rate': self.success_count / len(self.timings) * 100,
        }

    def print_stats(self):
        """Print benchmark statistics"""
        stats = self.get_stats()
        print(f"\n{'='*60}")
        print(f"Benchmark: {stats['name']}")
        print(f"  Executions: {stats['count']}")
        print(f"  Total Time: {stats['total_time']:.2f}s")
        print(f"  Mean Time: {stats['mean']:.4f}s")
        print(f"  Max Time: {stats['max']:.4f}s")
        print(f"  Success Rate: {stats['success_rate']:.1f}%")
        print(f"{'='*60}")


def _timed(result: BenchmarkResult, func, *args):
    start = time.perf_counter()
    try:
        value = func(*args)
    except Exception:
        result.add_timing(time.perf_counter() - start, success=False)
        raise
    result.add_timing(time.perf_counter() - start)
    return value


class TestDecoderBenchmarks:
    """Beam search runtime"""

    @pytest.mark.benchmark
    def test_oracle_suite_runtime(self):
        """200 full-width decodes checked against exhaustive marginalization"""
        rng = np.random.default_rng(11)
        vocab = ("<b>", "a", "▁b", "<|pd|>")
        config = DecoderConfig(beam_size=4096, nbest=1, lm_weight=0.0, word_bonus=0.0)
        result = BenchmarkResult("CTC oracle equivalence")

        for _ in range(200):
            frames = int(rng.integers(1, 6))
            em = EmissionMatrix.from_probs(rng.dirichlet(np.ones(len(vocab)), size=frames), vocab)
            expected = exhaustive_text_scores(em)
            best = _timed(result, lambda: CTCBeamDecoder(config).decode(em)[0])
            assert expected[best.text] == pytest.approx(max(expected.values()), abs=1e-9)

        result.print_stats()
        assert result.get_stats()['total_time'] < 30.0
        assert result.get_stats()['success_rate'] == 100.0

    @pytest.mark.benchmark
    def test_utterance_decode_with_lm(self):
        """Smoke-sized utterances decoded with a trigram LM and beam 16"""
        rng = np.random.default_rng(3)
        words = ["wetin", "dey", "happen", "how", "far", "i", "go", "market"]
        vocab = ("<b>", "<|pd|>") + tuple(f"▁{w}" for w in words)
        lm = train_lm(
            TokenizedCorpus.from_lines(" ".join(rng.choice(words, size=6)) for _ in range(200)), order=3
        )
        decoder = CTCBeamDecoder(DecoderConfig(beam_size=16, lm_weight=0.5, word_bonus=0.5), lm)
        result = BenchmarkResult("Beam decode, T=60, V=10")

        for _ in range(20):
            em = EmissionMatrix.from_probs(rng.dirichlet(np.ones(len(vocab)) * 0.3, size=60), vocab)
            _timed(result, decoder.decode, em)

        result.print_stats()
        assert result.get_stats()['mean'] < 1.0


class TestLanguageModelBenchmarks:
    @pytest.mark.benchmark
    def test_training_and_perplexity(self):
        rng = np.random.default_rng(5)
        vocabulary = [f"w{i}" for i in range(300)]
        corpus = TokenizedCorpus.from_lines(
            " ".join(rng.choice(vocabulary, size=int(rng.integers(4, 15)))) for _ in range(3000)
        )
        result = BenchmarkResult("Trigram training (3000 sentences)")
        lm = _timed(result, train_lm, corpus, 3)
        result.print_stats()

        assert result.get_stats()['total_time'] < 20.0
        assert perplexity(lm, corpus) > 1.0


class TestAudioBenchmarks:
    @pytest.mark.benchmark
    def test_dsp_suite_runtime(self):
        """WSOLA at every sweep factor, 100 noise mixes and a long split"""
        rng = np.random.default_rng(9)
        rate = 16000
        t = np.arange(10 * rate) / rate
        tone = Waveform(0.4 * np.sin(2 * np.pi * 440 * t), rate)
        noise = Waveform(0.1 * rng.standard_normal(10 * rate), rate)
        result = BenchmarkResult("Audio DSP")

        for factor in SWEEP_FACTORS:
            _timed(result, wsola_stretch, tone, factor)
        for snr in rng.uniform(5.0, 30.0, size=100):
            _timed(result, mix_noise, tone, noise, float(snr))
        long_signal = Waveform(0.1 * rng.standard_normal(120 * rate), rate)
        _timed(result, split_long_segment, long_signal, Segment(start_s=0.0, end_s=120.0))

        result.print_stats()
        assert result.get_stats()['total_time'] < 120.0


class TestConcurrencyBenchmarks:
    """Benchmarks for concurrent processing"""

    @pytest.mark.benchmark
    @pytest.mark.asyncio
    async def test_concurrent_vs_sequential(self):
        async def fake_decode(index: int) -> int:
            await asyncio.sleep(0.05)
            return index

        items = list(range(20))

        start = time.perf_counter()
        sequential = await ConcurrencyLimiter(1).run_batch(fake_decode, items)
        seq_time = time.perf_counter() - start

        start = time.perf_counter()
        concurrent = await ConcurrencyLimiter(5).run_batch(fake_decode, items)
        conc_time = time.perf_counter() - start

        assert sequential == concurrent == items
        speedup = seq_time / conc_time
        print(f"\nSpeedup: {speedup:.2f}x")
        assert speedup > 2.0, "Concurrent processing should be at least 2x faster"


class TestEndToEndBenchmark:
    @pytest.mark.benchmark
    def test_smoke_pipeline_through_cli(self, tmp_path):
        smoke = build_smoke_fixture(tmp_path / "smoke")
        result = BenchmarkResult("Smoke pipeline")
        code = _timed(
            result,
            main,
            ["pipeline", "run", "--config", str(smoke.config), "--output-dir", str(tmp_path / "out")],
        )
        result.print_stats()

        assert code == EXIT_OK
        assert (tmp_path / "out" / "pipeline_report.json").is_file()
        assert result.get_stats()['total_time'] < 60.0
