"""
Unit tests for emission matrices, the CTCE codec and decoder settings
"""
import struct

import numpy as np
import pytest
from pydantic import ValidationError

from core.errors import DecodingError, EmissionFormatError, ToolkitIOError
from models.decoding import (
    MIN_CONFIDENCE,
    DecoderConfig,
    EmissionMatrix,
    Hypothesis,
    read_emissions,
    write_emissions,
)
from models.manifest import LanguageTag

VOCAB = ("<b>", "a", "▁b", "<|pd|>")


@pytest.fixture
def emissions():
    probs = [
        [0.7, 0.1, 0.1, 0.1],
        [0.1, 0.6, 0.2, 0.1],
        [0.25, 0.25, 0.25, 0.25],
    ]
    return EmissionMatrix.from_probs(probs, VOCAB)


class TestEmissionMatrix:
    def test_shape(self, emissions):
        assert emissions.frames == 3
        assert emissions.classes == 4
        assert emissions.log_probs.dtype == np.float32

    def test_vocab_size_mismatch(self):
        with pytest.raises(DecodingError):
            EmissionMatrix(np.zeros((2, 3)), ("a", "b"))

    def test_blank_out_of_range(self):
        with pytest.raises(DecodingError):
            EmissionMatrix(np.log(np.full((1, 2), 0.5)), ("a", "b"), blank_index=2)

    def test_zero_frames(self):
        with pytest.raises(DecodingError):
            EmissionMatrix(np.zeros((0, 2)), ("a", "b"))

    def test_unnormalized_rows(self):
        em = EmissionMatrix(np.zeros((2, 2)), ("<b>", "a"))
        with pytest.raises(DecodingError, match="unnormalized"):
            em.validate()

    def test_normalized_rows_pass(self, emissions):
        emissions.validate()

    def test_neg_inf_allowed(self):
        em = EmissionMatrix.from_probs([[0.0, 1.0]], ("<b>", "a"))
        em.validate()
        assert np.isneginf(em.log_probs[0, 0])


class TestEmissionCodec:
    def test_write_then_read(self, tmp_path, emissions):
        path = tmp_path / "utt.ctce"
        write_emissions(emissions, path)
        loaded = read_emissions(path)
        assert loaded.vocab == VOCAB
        assert loaded.blank_index == 0
        np.testing.assert_array_equal(loaded.log_probs, emissions.log_probs)

    def test_bad_magic(self, tmp_path, emissions):
        path = tmp_path / "utt.ctce"
        write_emissions(emissions, path)
        data = bytearray(path.read_bytes())
        data[:4] = b"XXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(EmissionFormatError, match="magic"):
            read_emissions(path)

    def test_truncated_payload(self, tmp_path, emissions):
        path = tmp_path / "utt.ctce"
        write_emissions(emissions, path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(EmissionFormatError, match="payload"):
            read_emissions(path)

    def test_zero_frames_header(self, tmp_path):
        path = tmp_path / "empty.ctce"
        path.write_bytes(struct.pack("<4sIIII", b"CTCE", 1, 0, 1, 0) + struct.pack("<I", 1) + b"a")
        with pytest.raises(EmissionFormatError):
            read_emissions(path)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "v9.ctce"
        path.write_bytes(struct.pack("<4sIIII", b"CTCE", 9, 1, 1, 0))
        with pytest.raises(EmissionFormatError, match="version"):
            read_emissions(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ToolkitIOError):
            read_emissions(tmp_path / "absent.ctce")


class TestDecoderConfig:
    def test_defaults(self):
        cfg = DecoderConfig()
        assert cfg.beam_size == 100
        assert cfg.lm_weight == 0.5
        assert cfg.word_bonus == 1.0
        assert cfg.nbest == 1
        assert cfg.prune_log_threshold == float("-inf")

    def test_nbest_above_beam(self):
        with pytest.raises(ValueError):
            DecoderConfig(beam_size=2, nbest=3)

    def test_beam_must_be_positive(self):
        with pytest.raises(ValueError):
            DecoderConfig(beam_size=0)


class TestHypothesis:
    def test_language_and_record(self):
        h = Hypothesis(
            text="<|pd|> how far",
            acoustic_logprob=-1.0,
            combined_score=-0.5,
            token_count=4,
            word_count=2,
            confidence=Hypothesis.confidence_of(-1.0, 4),
        )
        assert h.language is LanguageTag.PD
        assert h.confidence == pytest.approx(np.exp(-0.25))
        assert h.to_record()["text"] == "<|pd|> how far"

    def test_confidence_of_empty_path(self):
        assert Hypothesis.confidence_of(0.0, 0) == 1.0

    def test_confidence_is_floored(self):
        assert Hypothesis.confidence_of(-1e6, 2) == MIN_CONFIDENCE

    def test_zero_confidence_rejected(self):
        with pytest.raises(ValidationError):
            Hypothesis(text="", acoustic_logprob=0.0, combined_score=0.0, token_count=0, confidence=0.0)
