"""
Unit tests for silence detection, splitting, WSOLA stretching and noise mixing
"""
import math

import numpy as np
import pytest

from core.errors import AudioFormatError
from models.audio import Segment, Waveform
from utils.audio_utils import (
    STRETCH_FACTORS,
    SWEEP_FACTORS,
    AugmentationSampler,
    detect_silence,
    mix_noise,
    split_long_segment,
    wsola_stretch,
)

RATE = 16000


def tone(freq=440.0, seconds=1.0, amplitude=0.5):
    t = np.arange(int(seconds * RATE)) / RATE
    return amplitude * np.sin(2 * np.pi * freq * t)


def peak_frequency(samples):
    spectrum = np.abs(np.fft.rfft(samples * np.hanning(len(samples))))
    return float(np.fft.rfftfreq(len(samples), 1.0 / RATE)[np.argmax(spectrum)])


class TestSilence:
    def test_gap_between_tones(self):
        w = Waveform(np.concatenate([tone(), np.zeros(RATE // 2), tone()]))
        silences = detect_silence(w)
        assert len(silences) == 1
        assert silences[0].start_s == pytest.approx(1.0, abs=0.02)
        assert silences[0].end_s == pytest.approx(1.495, abs=0.02)

    def test_short_pause_ignored(self):
        w = Waveform(np.concatenate([tone(), np.zeros(RATE // 10), tone()]))
        assert detect_silence(w) == []

    def test_trailing_silence_reaches_end(self):
        w = Waveform(np.concatenate([tone(), np.zeros(RATE)]))
        silences = detect_silence(w)
        assert silences[-1].end_s == pytest.approx(w.duration_s)

    def test_empty(self):
        assert detect_silence(Waveform(np.zeros(0))) == []


class TestSplit:
    @pytest.fixture(scope="class")
    def long_waveform(self):
        rng = np.random.default_rng(11)
        samples = 0.1 * rng.standard_normal(75 * RATE)
        samples[25 * RATE:int(25.5 * RATE)] = 0.0
        samples[52 * RATE:int(52.4 * RATE)] = 0.0
        return Waveform(samples)

    def test_cuts_inside_silences(self, long_waveform):
        pieces = split_long_segment(long_waveform, Segment(start_s=0.0, end_s=75.0))
        assert len(pieces) == 3
        assert 25.0 <= pieces[0].end_s <= 25.5
        assert 52.0 <= pieces[1].end_s <= 52.4

    def test_pieces_tile_exactly(self, long_waveform):
        seg = Segment(start_s=0.0, end_s=75.0)
        pieces = split_long_segment(long_waveform, seg)
        assert pieces[0].start_s == seg.start_s
        assert pieces[-1].end_s == seg.end_s
        for left, right in zip(pieces, pieces[1:]):
            assert left.end_s == right.start_s
        assert all(p.duration_s <= 30.0 for p in pieces)

    def test_hard_cut_without_silence(self):
        rng = np.random.default_rng(3)
        w = Waveform(0.1 * rng.standard_normal(65 * RATE))
        pieces = split_long_segment(w, Segment(start_s=0.0, end_s=65.0))
        assert [(p.start_s, p.end_s) for p in pieces] == [(0.0, 30.0), (30.0, 60.0), (60.0, 65.0)]

    def test_short_segment_untouched(self):
        w = Waveform(tone(seconds=2.0))
        seg = Segment(start_s=0.0, end_s=2.0)
        assert split_long_segment(w, seg) == [seg]

    def test_segment_beyond_waveform(self):
        w = Waveform(tone(seconds=2.0))
        with pytest.raises(AudioFormatError):
            split_long_segment(w, Segment(start_s=0.0, end_s=40.0))


class TestWsola:
    @pytest.mark.parametrize("factor", [f for f in SWEEP_FACTORS if f != 1.0])
    def test_length_and_pitch(self, factor):
        w = Waveform(tone(seconds=2.0))
        out = wsola_stretch(w, factor)
        expected = len(w) / factor
        assert abs(len(out) - expected) <= 0.02 * expected
        assert len(out) == int(round(len(w) / factor))
        assert peak_frequency(out.samples) == pytest.approx(440.0, rel=0.01)

    def test_identity(self):
        w = Waveform(tone(seconds=0.5))
        out = wsola_stretch(w, 1.0)
        np.testing.assert_array_equal(out.samples, w.samples)
        assert out.samples is not w.samples

    @pytest.mark.parametrize("factor", [0.4, 2.6])
    def test_out_of_range(self, factor):
        with pytest.raises(AudioFormatError):
            wsola_stretch(Waveform(tone(seconds=0.1)), factor)


class TestNoiseMix:
    def test_achieved_snr_matches_target(self):
        rng = np.random.default_rng(17)
        signal = Waveform(tone(amplitude=0.1))
        noise = Waveform(0.05 * rng.standard_normal(RATE // 3))
        for target in rng.uniform(-5.0, 30.0, size=100):
            result = mix_noise(signal, noise, float(target))
            assert result.clipped_samples == 0
            residual = result.waveform.samples - signal.samples
            measured = 10.0 * math.log10(np.mean(signal.samples ** 2) / np.mean(residual ** 2))
            assert abs(measured - target) < 0.5
            assert result.achieved_snr_db == pytest.approx(target, abs=1e-6)

    def test_infinite_snr_is_identity(self):
        signal = Waveform(tone(seconds=0.1))
        result = mix_noise(signal, Waveform(np.ones(10)), float("inf"))
        np.testing.assert_array_equal(result.waveform.samples, signal.samples)
        assert result.noise_gain == 0.0

    def test_clipping_counted(self):
        signal = Waveform(np.full(100, 0.9))
        result = mix_noise(signal, Waveform(np.ones(100)), 0.0)
        assert result.clipped_samples == 100
        assert np.all(result.waveform.samples <= 1.0)

    def test_rate_mismatch(self):
        with pytest.raises(AudioFormatError):
            mix_noise(Waveform(tone(seconds=0.1)), Waveform(np.ones(10), 8000), 10.0)

    def test_silent_signal(self):
        with pytest.raises(AudioFormatError):
            mix_noise(Waveform(np.zeros(10)), Waveform(np.ones(10)), 10.0)


class TestAugmentationSampler:
    def test_same_seed_same_draws(self):
        first = AugmentationSampler(seed=5)
        second = AugmentationSampler(seed=5)
        assert [first.draw() for _ in range(50)] == [second.draw() for _ in range(50)]

    def test_rates_follow_probabilities(self):
        sampler = AugmentationSampler(noise_prob=0.4, stretch_prob=0.4, seed=1)
        draws = [sampler.draw() for _ in range(4000)]
        assert sum(d.apply_noise for d in draws) / 4000 == pytest.approx(0.4, abs=0.03)
        assert all(5.0 <= d.snr_db <= 30.0 for d in draws if d.apply_noise)
        assert all(d.stretch_factor in STRETCH_FACTORS for d in draws)

    def test_disabled(self):
        sampler = AugmentationSampler(noise_prob=0.0, stretch_prob=0.0)
        w = Waveform(tone(seconds=0.1))
        out, draw = sampler.apply(w)
        assert not draw.apply_noise and not draw.apply_stretch
        np.testing.assert_array_equal(out.samples, w.samples)

    def test_noise_required_when_drawn(self):
        sampler = AugmentationSampler(noise_prob=1.0, stretch_prob=0.0)
        with pytest.raises(AudioFormatError):
            sampler.apply(Waveform(tone(seconds=0.1)))

    def test_invalid_probability(self):
        with pytest.raises(AudioFormatError):
            AugmentationSampler(noise_prob=1.5)
