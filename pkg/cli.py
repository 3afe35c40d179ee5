#!/usr/bin/env python3
"""
Naija ASR Toolkit CLI

Noun-verb subcommands for every stage of the pseudo-labelling pipeline:
n-gram language models, CTC beam decoding, Pidgin text normalization,
pseudo-label filtering, data mixing, audio processing and evaluation.

Usage:
    python cli.py lm train --corpus corpus.txt --order 5 --out model.arpa
    python cli.py decode beam --emissions utt1.ctce --lm model.arpa --nbest 5
    python cli.py filter stage --manifest pseudo.jsonl --policy policy.txt --out kept.jsonl
    python cli.py eval wer --ref ref.txt --hyp hyp.txt
    python cli.py pipeline run --config templates/default/config.yaml
"""

import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from dotenv import load_dotenv

# Load environment variables early
load_dotenv()

import numpy as np

from agents.evaluation_agent import (
    CommandSweepDecoder,
    EmissionSweepDecoder,
    EvaluationAgent,
    pair_manifests,
)
from agents.pseudo_label_agent import PseudoLabelAgent
from config.pipeline_schema import STAGE_PROBABILITIES, PipelineConfig
from config.settings import settings
from core.config_loader import apply_flag_values, load_config, load_policy_file, parse_key_values
from core.errors import (
    EXIT_INTERRUPTED,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VALIDATION,
    ConfigLoadError,
    MetricError,
    MissingAudioError,
    ToolkitError,
    ToolkitIOError,
    exit_code_for,
    format_error_for_cli,
)
from core.reports import TOOL_VERSION, build_report, save_report, save_table, table_frame, table_to_csv
from core.runner import run_pipeline
from core.validators import perform_full_validation, validate_manifest
from models.audio import Segment, attach_embeddings, read_embeddings, read_segments, read_wav, write_wav
from models.decoding import read_emissions
from models.filtering import FilterPolicy, MixSpec
from models.manifest import LanguageTag, ManifestEntry, read_manifest, strip_language_tag, write_manifest
from utils.audio_utils import (
    DEFAULT_FRAME_MS,
    DEFAULT_HOP_MS,
    AugmentationSampler,
    detect_silence,
    mix_noise,
    split_long_segment,
    wsola_stretch,
)
from utils.concurrency import ConcurrencyLimiter
from utils.ctc_decoder import CTCBeamDecoder, greedy_decode, select_language_hypothesis
from utils.lexicon import Lexicon
from utils.logger import get_logger, setup_logging
from utils.metrics import corpus_wer, format_score, lid_f1, utterance_average_wer, wer_diacritic_modes
from utils.ngram_lm import (
    TokenizedCorpus,
    format_arpa,
    format_perplexity_table,
    perplexity,
    read_arpa,
    sentence_logprob,
    train_lm,
    write_arpa,
)
from utils.pseudo_label_filter import (
    counts_from_entries,
    filter_by_confidence,
    filter_language_mismatch,
    run_stage,
    sampling_plan,
    temperature_weights,
)
from utils.segment_merger import group_spans, merge_by_embedding, merge_vad_segments
from utils.text_normalizer import (
    apply_variants,
    dedup_and_filter,
    disambiguate_homophones,
    load_homophones,
    load_variant_table,
    mine_variants,
    normalize_pidgin,
    preprocess,
    strip_diacritics,
)

__version__ = TOOL_VERSION

logger = get_logger("cli")

_DEFAULTS = PipelineConfig()


def print_success(message: str):
    """Print success message"""
    print(f"✓ {message}", file=sys.stderr)


def print_error(message: str):
    """Print error message"""
    print(f"✗ {message}", file=sys.stderr)


def print_info(message: str):
    """Print info message"""
    print(f"ℹ {message}", file=sys.stderr)


class HelpFormatter(argparse.ArgumentDefaultsHelpFormatter, argparse.RawDescriptionHelpFormatter):
    """Shows defaults, except for flags whose default comes from the config"""

    def _get_help_string(self, action):
        if action.default is None:
            return action.help
        return super()._get_help_string(action)


class ToolkitArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with 64; exit code 2 is reserved for I/O failures"""

    def error(self, message):
        self.print_usage(sys.stderr)
        print_error(message)
        sys.exit(EXIT_USAGE)


# ---------------------------------------------------------------------------
# Configuration and I/O helpers
# ---------------------------------------------------------------------------

def _builtin_default(key: str) -> Any:
    value: Any = _DEFAULTS
    for part in key.split("."):
        value = getattr(value, part)
    return value


def _config_flag(parser: argparse.ArgumentParser, *flags: str, key: str, help: str, **kwargs):
    """
    Add a flag that overrides the config value at `key`

    The flag defaults to None so an unset flag leaves the YAML/--override value
    alone; the built-in default is shown in the help text.
    """
    default = _builtin_default(key)
    if isinstance(default, (list, tuple)):
        default = " ".join(str(v) for v in default)
    shown = "" if default is None else f"; default: {default}"
    action = parser.add_argument(*flags, default=None, help=f"{help} (config {key}{shown})", **kwargs)
    keys = dict(parser.get_default("config_keys") or {})
    keys[action.dest] = key
    parser.set_defaults(config_keys=keys)
    return action


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults < YAML (--config) < --override < dedicated flags"""
    config = load_config(args.config, args.override)
    values: Dict[str, Any] = {
        key: getattr(args, dest, None) for dest, key in (getattr(args, "config_keys", None) or {}).items()
    }
    values["seed"] = args.seed
    values["jobs"] = args.jobs
    return apply_flag_values(config, values)


def _require(value: Optional[Any], what: str, hint: str) -> Any:
    if value is None or value == "":
        raise ConfigLoadError(f"{what} is required; {hint}")
    return value


def _read_lines(path: str) -> List[str]:
    """Lines of a UTF-8 text file; '-' reads stdin"""
    if path == "-":
        return sys.stdin.read().splitlines()
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read().splitlines()
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))


def _write_output(args: argparse.Namespace, text: str) -> None:
    """Write text to --out, or stdout"""
    if text and not text.endswith("\n"):
        text += "\n"
    out = getattr(args, "out", None)
    if not out:
        sys.stdout.write(text)
        return
    path = Path(out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as e:
        raise ToolkitIOError(path, e.strerror or str(e))
    logger.info(f"Output written to {path}")


def _write_entries(args: argparse.Namespace, entries: Sequence[ManifestEntry]) -> None:
    _write_output(args, "".join(entry.to_json_line() + "\n" for entry in entries))


def _write_segments(args: argparse.Namespace, segments: Sequence[Segment]) -> None:
    _write_output(
        args, "".join(json.dumps(s.to_record(), separators=(",", ":")) + "\n" for s in segments)
    )


def _save_json(path: Optional[str], kind: str, body: Dict[str, Any], seed: Optional[int] = None) -> None:
    if path:
        save_report(build_report(kind, body, seed=seed), path)
        logger.info(f"Report written to {path}")


def _text_pairs(ref_path: str, hyp_path: str) -> List[Tuple[str, str]]:
    """
    (reference, hypothesis) text pairs from two manifests or two text files

    Manifests are paired by audio_path; text files line by line. Language
    tags are removed from both sides.
    """
    if ref_path.endswith(".jsonl") and hyp_path.endswith(".jsonl"):
        matched, unmatched = pair_manifests(read_manifest(ref_path), read_manifest(hyp_path))
        if unmatched:
            logger.warning(f"{unmatched} reference(s) have no hypothesis and are skipped")
        raw_pairs = [(r.text, h.text) for r, h in matched]
    else:
        refs, hyps = _read_lines(ref_path), _read_lines(hyp_path)
        if len(refs) != len(hyps):
            raise MetricError(f"{ref_path} has {len(refs)} lines but {hyp_path} has {len(hyps)}")
        raw_pairs = list(zip(refs, hyps))
    return [(strip_language_tag(r)[1], strip_language_tag(h)[1]) for r, h in raw_pairs]


def _read_lexicon_entries(config: PipelineConfig):
    if not config.decoder.use_lexicon:
        return None
    path = _require(config.paths.lexicon, "a lexicon", "pass --lexicon or set paths.lexicon")
    return PseudoLabelAgent.read_lexicon_entries(Path(path))


def _read_decoder_lm(config: PipelineConfig):
    if config.decoder.lm_weight <= 0:
        return None
    path = _require(config.paths.lm, "an ARPA model", "pass --lm, or --lm-weight 0 to decode without one")
    return read_arpa(path)


def _filter_policy(args: argparse.Namespace, config: PipelineConfig) -> FilterPolicy:
    """--policy file or --threshold, falling back to the config thresholds"""
    flags = {
        "drop_untagged": config.filter.drop_untagged,
        "drop_mismatched": config.filter.drop_mismatched,
        "keep_unscored": config.filter.keep_unscored,
    }
    if getattr(args, "policy", None):
        return FilterPolicy(thresholds=load_policy_file(args.policy), **flags)
    if getattr(args, "threshold", None) is not None:
        return FilterPolicy.uniform(args.threshold, **flags)
    return config.filter.to_policy()


# ---------------------------------------------------------------------------
# lm
# ---------------------------------------------------------------------------

def cmd_lm_train(args: argparse.Namespace) -> int:
    """Train a modified Kneser-Ney model and write it as ARPA"""
    config = _load_config(args)
    corpus_path = _require(config.paths.corpus, "a training corpus", "pass --corpus or set paths.corpus")
    lines = _read_lines(corpus_path)
    if config.paths.heldout:
        lines = dedup_and_filter(lines, _read_lines(config.paths.heldout))
    if args.preprocess:
        lines = [preprocess(line) for line in lines]

    corpus = TokenizedCorpus.from_lines(lines)
    lm = train_lm(
        corpus,
        order=args.order,
        min_count_per_order=args.min_count,
        closed_vocabulary=args.closed_vocabulary,
    )
    logger.info(
        f"Trained order-{lm.order} model on {len(corpus)} sentence(s): "
        + ", ".join(f"{n}-grams={c}" for n, c in enumerate(lm.counts, start=1))
    )
    if args.out:
        write_arpa(lm, args.out)
        print_success(f"Model written: {args.out}")
    else:
        sys.stdout.write(format_arpa(lm))
    return EXIT_OK


def _labelled_models(specs: Sequence[str]) -> List[Tuple[str, str]]:
    models = []
    for spec in specs:
        label, sep, path = spec.partition("=")
        models.append((label, path) if sep else (Path(spec).stem, spec))
    return models


def cmd_lm_perplexity(args: argparse.Namespace) -> int:
    """Perplexity of one or more models on a corpus"""
    config = _load_config(args)
    corpus_path = _require(config.paths.corpus, "a corpus", "pass --corpus or set paths.corpus")
    specs = args.lm or ([config.paths.lm] if config.paths.lm else [])
    if not specs:
        raise ConfigLoadError("lm perplexity needs --lm MODEL (repeatable, optionally LABEL=MODEL)")

    lines = _read_lines(corpus_path)
    if args.preprocess:
        lines = [preprocess(line) for line in lines]
    corpus = TokenizedCorpus.from_lines(lines)

    values: Dict[str, float] = {}
    for label, path in _labelled_models(specs):
        values[label] = perplexity(read_arpa(path), corpus)

    if len(values) == 1:
        _write_output(args, f"perplexity={next(iter(values.values())):.2f}")
    else:
        _write_output(args, format_perplexity_table(values))
    if args.table:
        save_table(table_frame(values.items(), ["language", "perplexity"]), args.table, float_format="%.2f")
    return EXIT_OK


def cmd_lm_score(args: argparse.Namespace) -> int:
    """Per-sentence log10 probability (with </s>)"""
    config = _load_config(args)
    lm = read_arpa(_require(config.paths.lm, "an ARPA model", "pass --lm or set paths.lm"))
    rows = []
    for line in _read_lines(args.input):
        words = line.split()
        rows.append(f"{sentence_logprob(lm, words):.6f}\t{' '.join(words)}")
    _write_output(args, "\n".join(rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# decode
# ---------------------------------------------------------------------------

def cmd_decode_greedy(args: argparse.Namespace) -> int:
    """Best-path decoding, one line of text per emission file"""
    texts = [greedy_decode(read_emissions(path)) for path in args.emissions]
    _write_output(args, "".join(text + "\n" for text in texts))
    return EXIT_OK


def cmd_decode_beam(args: argparse.Namespace) -> int:
    """LM-fused beam search; N-best JSON lines in input order"""
    if args.lexicon and args.use_lexicon is None:
        args.use_lexicon = True
    config = _load_config(args)
    lm = _read_decoder_lm(config)
    lexicon_entries = _read_lexicon_entries(config)
    want = LanguageTag.from_code(args.select_lang) if args.select_lang else None
    lexicons: Dict[Tuple[str, ...], Lexicon] = {}

    def decode_one(path: str) -> Dict[str, Any]:
        em = read_emissions(path)
        lexicon = None
        if lexicon_entries is not None:
            if em.vocab not in lexicons:
                lexicons[em.vocab] = Lexicon.from_entries(lexicon_entries, em.vocab)
            lexicon = lexicons[em.vocab]
        nbest = CTCBeamDecoder(config.decoder, lm, lexicon).decode(em)
        record: Dict[str, Any] = {"emissions": path, "nbest": [h.to_record() for h in nbest]}
        if want is not None:
            selected, fallback = select_language_hypothesis(nbest, want)
            record["selected"] = selected.to_record(fallback=fallback)
        return record

    limiter = ConcurrencyLimiter(config.jobs)
    records = asyncio.run(limiter.run_batch(decode_one, list(args.emissions), show_progress=len(args.emissions) > 1))
    _write_output(
        args, "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in records)
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# norm
# ---------------------------------------------------------------------------

def cmd_norm_preprocess(args: argparse.Namespace) -> int:
    """Lowercase, fold punctuation, spell digits"""
    config = _load_config(args)
    spell = config.normalization.spell_digits
    _write_output(args, "\n".join(preprocess(line, spell_digits=spell) for line in _read_lines(args.input)))
    return EXIT_OK


def cmd_norm_variants(args: argparse.Namespace) -> int:
    """Apply the Pidgin variant table"""
    config = _load_config(args)
    table = load_variant_table(config.paths.variant_table or settings.variant_table_path)
    spell = config.normalization.spell_digits
    out = [apply_variants(preprocess(line, spell_digits=spell), table) for line in _read_lines(args.input)]
    _write_output(args, "\n".join(out))
    return EXIT_OK


def _homophone_window(config: PipelineConfig) -> Optional[int]:
    return None if config.normalization.full_sentence else config.normalization.window


def cmd_norm_homophones(args: argparse.Namespace) -> int:
    """Choose homophone spellings with the LM"""
    config = _load_config(args)
    sets = load_homophones(config.paths.homophones or settings.homophone_path)
    lm = read_arpa(_require(
        config.paths.normalization_lm, "a normalization LM", "pass --lm or set paths.normalization_lm"
    ))
    spell = config.normalization.spell_digits
    window = _homophone_window(config)
    out = [
        disambiguate_homophones(preprocess(line, spell_digits=spell), sets, lm, window)
        for line in _read_lines(args.input)
    ]
    _write_output(args, "\n".join(out))
    return EXIT_OK


def cmd_norm_pidgin(args: argparse.Namespace) -> int:
    """preprocess -> variants -> homophones (when an LM is given)"""
    config = _load_config(args)
    table = load_variant_table(config.paths.variant_table or settings.variant_table_path)
    sets = load_homophones(config.paths.homophones or settings.homophone_path)
    lm = read_arpa(config.paths.normalization_lm) if config.paths.normalization_lm else None
    window = _homophone_window(config)
    spell = config.normalization.spell_digits
    out = [normalize_pidgin(line, table, sets, lm, window, spell) for line in _read_lines(args.input)]
    _write_output(args, "\n".join(out))
    return EXIT_OK


def cmd_norm_mine(args: argparse.Namespace) -> int:
    """Substitution pairs between reference and hypothesis texts"""
    refs, hyps = _read_lines(args.ref), _read_lines(args.hyp)
    if not args.raw:
        refs = [preprocess(line) for line in refs]
        hyps = [preprocess(line) for line in hyps]
    pairs = mine_variants(refs, hyps, min_count=args.min_count)
    _write_output(args, "".join(f"{p.ref_word}\t{p.hyp_word}\t{p.count}\n" for p in pairs))
    return EXIT_OK


def cmd_norm_dedup(args: argparse.Namespace) -> int:
    """Remove duplicate and held-out lines from an LM corpus"""
    config = _load_config(args)
    corpus = _read_lines(_require(config.paths.corpus, "a corpus", "pass --corpus or set paths.corpus"))
    heldout = _read_lines(config.paths.heldout) if config.paths.heldout else []
    _write_output(args, "".join(line + "\n" for line in dedup_and_filter(corpus, heldout)))
    return EXIT_OK


def cmd_norm_strip_diacritics(args: argparse.Namespace) -> int:
    """Remove combining marks"""
    _write_output(args, "\n".join(strip_diacritics(line) for line in _read_lines(args.input)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# filter / mix
# ---------------------------------------------------------------------------

def _manifest_entries(config: PipelineConfig) -> List[ManifestEntry]:
    return read_manifest(_require(config.paths.manifest, "a manifest", "pass --manifest or set paths.manifest"))


def cmd_filter_confidence(args: argparse.Namespace) -> int:
    """Keep entries whose confidence reaches the language threshold"""
    config = _load_config(args)
    kept, dropped = filter_by_confidence(_manifest_entries(config), _filter_policy(args, config))
    logger.info(f"Confidence filter: kept {len(kept)}, dropped {len(dropped)}")
    _write_entries(args, kept)
    _save_json(args.report, "filter-confidence", {"kept": len(kept), "dropped": [d.to_record() for d in dropped]})
    return EXIT_OK


def cmd_filter_language(args: argparse.Namespace) -> int:
    """Drop texts tagged with another language and strip the tag"""
    config = _load_config(args)
    kept, dropped = filter_language_mismatch(_manifest_entries(config), _filter_policy(args, config))
    logger.info(f"Language filter: kept {len(kept)}, dropped {len(dropped)}")
    _write_entries(args, kept)
    _save_json(args.report, "filter-language", {"kept": len(kept), "dropped": [d.to_record() for d in dropped]})
    return EXIT_OK


def cmd_filter_stage(args: argparse.Namespace) -> int:
    """Language filter then confidence filter, with a per-language report"""
    config = _load_config(args)
    kept, report = run_stage(_manifest_entries(config), _filter_policy(args, config), report_path=args.report)
    _write_entries(args, kept)
    print_success(f"Kept {report.total_kept} entries ({report.total_hours:.3f} h)")
    return EXIT_OK


def _mix_spec(args: argparse.Namespace, config: PipelineConfig) -> MixSpec:
    if args.counts:
        counts = parse_key_values(args.counts)
    else:
        counts = counts_from_entries(_manifest_entries(config), config.mix.basis)
    return config.mix.to_spec(counts)


def cmd_mix_weights(args: argparse.Namespace) -> int:
    """Temperature sampling weights, one key=weight line per key"""
    config = _load_config(args)
    weights = temperature_weights(_mix_spec(args, config))
    _write_output(args, "".join(f"{key}={weight:.4f}\n" for key, weight in weights.items()))
    _save_json(
        args.report,
        "mix-weights",
        {"temperature": config.mix.temperature, "weights": {k: round(v, 9) for k, v in weights.items()}},
    )
    return EXIT_OK


def cmd_mix_sample(args: argparse.Namespace) -> int:
    """Seeded temperature-weighted sample of manifest entries"""
    config = _load_config(args)
    entries = _manifest_entries(config)
    spec = config.mix.to_spec(counts_from_entries(entries, config.mix.basis))
    plan = sampling_plan(entries, spec, args.count, np.random.default_rng(config.seed))
    _write_entries(args, plan)
    return EXIT_OK


# ---------------------------------------------------------------------------
# audio
# ---------------------------------------------------------------------------

def cmd_audio_silence(args: argparse.Namespace) -> int:
    """Silence segments below the dBFS threshold"""
    config = _load_config(args)
    silences = detect_silence(
        read_wav(args.wav, expected_rate=None),
        threshold_db=config.audio.threshold_db,
        frame_ms=args.frame_ms,
        hop_ms=args.hop_ms,
        min_silence_s=config.audio.min_silence_s,
    )
    _write_segments(args, silences)
    return EXIT_OK


def cmd_audio_merge(args: argparse.Namespace) -> int:
    """Merge VAD segments across short gaps, or neighbours with similar embeddings"""
    config = _load_config(args)
    segments = read_segments(args.segments)
    if args.embeddings:
        segments = attach_embeddings(segments, read_embeddings(args.embeddings))
        merged = group_spans(merge_by_embedding(segments, config.audio.similarity))
    else:
        merged = merge_vad_segments(
            segments,
            max_gap_s=config.audio.max_gap_s,
            keep_edge_silence=config.audio.keep_edge_silence,
            total_duration_s=args.duration,
        )
    logger.info(f"Merged {len(segments)} -> {len(merged)} segments")
    _write_segments(args, merged)
    return EXIT_OK


def cmd_audio_split(args: argparse.Namespace) -> int:
    """Cut segments longer than max length at their quietest point"""
    config = _load_config(args)
    waveform = read_wav(args.wav, expected_rate=None)
    segments = read_segments(args.segments) if args.segments else [Segment(start_s=0.0, end_s=waveform.duration_s)]
    pieces: List[Segment] = []
    for segment in segments:
        pieces.extend(split_long_segment(
            waveform,
            segment,
            max_len_s=config.audio.max_len_s,
            threshold_db=config.audio.threshold_db,
        ))
    _write_segments(args, pieces)
    return EXIT_OK


def cmd_audio_stretch(args: argparse.Namespace) -> int:
    """WSOLA time stretch (factor > 1 speeds up)"""
    out = _require(args.out, "--out", "give the output WAV path")
    stretched = wsola_stretch(read_wav(args.wav, expected_rate=None), args.factor)
    write_wav(stretched, out)
    print_success(f"Stretched x{args.factor}: {stretched.duration_s:.3f} s -> {out}")
    return EXIT_OK


def cmd_audio_mix_noise(args: argparse.Namespace) -> int:
    """Add noise at a target SNR"""
    config = _load_config(args)
    out = _require(args.out, "--out", "give the output WAV path")
    noise_path = _require(config.paths.noise, "a noise WAV", "pass --noise or set paths.noise")
    result = mix_noise(read_wav(args.wav, expected_rate=None), read_wav(noise_path, expected_rate=None), args.snr)
    write_wav(result.waveform, out)
    sys.stdout.write(
        f"noise_gain={result.noise_gain:.6f}\n"
        f"achieved_snr_db={result.achieved_snr_db:.4f}\n"
        f"clipped_samples={result.clipped_samples}\n"
    )
    return EXIT_OK


def cmd_audio_augment(args: argparse.Namespace) -> int:
    """Seeded noise/stretch augmentation of every manifest entry"""
    if args.stage:
        if args.noise_prob is None:
            args.noise_prob = STAGE_PROBABILITIES[args.stage]
        if args.stretch_prob is None:
            args.stretch_prob = STAGE_PROBABILITIES[args.stage]
    config = _load_config(args)
    manifest_path = _require(config.paths.manifest, "a manifest", "pass --manifest or set paths.manifest")
    entries = read_manifest(manifest_path)
    aug = config.augmentation
    if aug.noise_prob > 0 and not config.paths.noise:
        raise ConfigLoadError("noise augmentation needs --noise or paths.noise (or --noise-prob 0)")

    noise = read_wav(config.paths.noise, expected_rate=None) if config.paths.noise else None
    sampler = AugmentationSampler(
        noise_prob=aug.noise_prob,
        stretch_prob=aug.stretch_prob,
        snr_range=(aug.snr_min, aug.snr_max),
        stretch_factors=tuple(aug.stretch_factors),
        seed=config.seed,
    )
    out_dir = Path(args.out_dir or Path(config.paths.output_dir) / "augmented")
    base_dir = Path(manifest_path).parent
    missing = [e.audio_path for e in entries if not e.resolve_audio(base_dir).is_file()]
    if missing:
        raise MissingAudioError(missing)

    augmented: List[ManifestEntry] = []
    for entry in entries:
        waveform, draw = sampler.apply(read_wav(entry.resolve_audio(base_dir), expected_rate=None), noise)
        target = out_dir / f"{Path(entry.audio_path).stem}_aug.wav"
        write_wav(waveform, target)
        augmented.append(entry.with_text(entry.text, audio_path=str(target), duration_s=waveform.duration_s))

    manifest_out = out_dir / "augmented.jsonl"
    write_manifest(augmented, manifest_out)
    report_out = out_dir / "augment_report.json"
    body = {
        "stage": aug.stage,
        "noise_prob": aug.noise_prob,
        "stretch_prob": aug.stretch_prob,
        "draws": [
            {"audio_path": e.audio_path, **d.to_record()} for e, d in zip(entries, sampler.draws)
        ],
    }
    save_report(build_report("augment", body, seed=config.seed), report_out)
    print_success(f"Augmented {len(augmented)} utterance(s): {manifest_out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def cmd_eval_wer(args: argparse.Namespace) -> int:
    """Pooled WER of hypotheses against references"""
    config = _load_config(args)
    raw = config.evaluation.raw
    pairs = _text_pairs(args.ref, args.hyp)
    pooled = corpus_wer(pairs, raw=raw)
    _write_output(args, f"wer={pooled.wer:.4f}")
    _save_json(
        args.report,
        "wer",
        {"wer": pooled.to_record(), "utterance_average_wer": round(utterance_average_wer(pairs, raw=raw), 6)},
    )
    return EXIT_OK


def cmd_eval_diacritics(args: argparse.Namespace) -> int:
    """WER with diacritics retained and stripped"""
    config = _load_config(args)
    modes = wer_diacritic_modes(_text_pairs(args.ref, args.hyp), raw=config.evaluation.raw)
    _write_output(args, "".join(f"{mode}={b.wer:.4f}\n" for mode, b in modes.items()))
    _save_json(args.report, "wer-diacritics", {mode: b.to_record() for mode, b in modes.items()})
    return EXIT_OK


def cmd_eval_lid(args: argparse.Namespace) -> int:
    """Per-language F1 of the decoder's language tags"""
    if args.hyp.endswith(".jsonl"):
        _require(args.ref, "--ref", "give the reference manifest")
        matched, unmatched = pair_manifests(read_manifest(args.ref), read_manifest(args.hyp))
        if unmatched:
            logger.warning(f"{unmatched} reference(s) have no hypothesis and are skipped")
        pairs = [(strip_language_tag(h.text)[0], r.lang) for r, h in matched]
    else:
        truth = LanguageTag.from_code(_require(args.lang, "--lang", "text hypotheses need the test-set language"))
        pairs = [(strip_language_tag(line)[0], truth) for line in _read_lines(args.hyp)]

    report = lid_f1(pairs)
    rows = report.rows() + [("micro", format_score(report.micro_f1))]
    _write_output(args, table_to_csv(table_frame(rows, ["lang", "f1"])))
    _save_json(args.report, "lid", report.to_record())
    return EXIT_OK


def cmd_eval_speed_sweep(args: argparse.Namespace) -> int:
    """Pooled WER at each speaking-rate factor"""
    if args.lexicon and args.use_lexicon is None:
        args.use_lexicon = True
    config = _load_config(args)
    manifest_path = _require(config.paths.manifest, "a reference manifest", "pass --manifest or set paths.manifest")
    entries = read_manifest(manifest_path)

    if config.evaluation.decode_cmd:
        decoder = CommandSweepDecoder(config.evaluation.decode_cmd)
    else:
        emissions_dir = _require(
            config.paths.emissions_dir, "an emissions directory", "pass --emissions-dir or --decode-cmd"
        )
        decoder = EmissionSweepDecoder(
            Path(emissions_dir),
            decoder_config=None if args.greedy else config.decoder,
            lm=None if args.greedy else _read_decoder_lm(config),
            lexicon_entries=None if args.greedy else _read_lexicon_entries(config),
        )

    agent = EvaluationAgent(config={
        "raw": config.evaluation.raw,
        "jobs": config.jobs,
        "base_dir": str(Path(manifest_path).parent),
    })
    result = asyncio.run(agent.speed_sweep(entries, decoder, config.evaluation.speed_factors))
    rows = [(f"{factor:.1f}", breakdown.wer) for factor, breakdown in result.rows]
    _write_output(args, table_to_csv(table_frame(rows, ["factor", "wer"])))
    _save_json(args.report, "speed-sweep", result.to_record())
    return EXIT_OK


# ---------------------------------------------------------------------------
# manifest / pipeline
# ---------------------------------------------------------------------------

def cmd_manifest_validate(args: argparse.Namespace) -> int:
    """Parse a manifest and summarize it; optionally check the config too"""
    config = _load_config(args)
    manifest_path = _require(config.paths.manifest, "a manifest", "pass --manifest or set paths.manifest")
    summary = validate_manifest(manifest_path, check_audio=args.check_audio)

    lines = [f"entries={summary.entries}", f"hours={summary.hours:.3f}"]
    lines += [f"{lang}={count}" for lang, count in summary.per_language.items()]
    lines += [f"scored={summary.scored}", f"tagged={summary.tagged}"]
    _write_output(args, "\n".join(lines))

    status = EXIT_OK
    if args.config:
        is_valid, errors, warnings = perform_full_validation(config, check_audio=False)
        for warning in warnings:
            print_info(warning)
        for error in errors:
            print_error(error)
        if not is_valid:
            status = EXIT_VALIDATION
    if summary.missing_audio:
        raise MissingAudioError(summary.missing_audio)
    if status == EXIT_OK:
        print_success(f"Manifest OK: {manifest_path}")
    return status


def cmd_pipeline_run(args: argparse.Namespace) -> int:
    """decode -> normalize -> filter -> evaluate with one report"""
    if args.lexicon and args.use_lexicon is None:
        args.use_lexicon = True
    config = _load_config(args)
    is_valid, errors, warnings = perform_full_validation(config)
    for warning in warnings:
        print_info(warning)
    if not is_valid:
        for error in errors:
            print_error(error)
        return EXIT_VALIDATION
    if args.dry_run:
        print_success("Configuration is valid")
        return EXIT_OK

    outputs = asyncio.run(run_pipeline(config))
    print_success(f"Pseudo-labels: {outputs.decoded}")
    print_success(f"Normalized:    {outputs.normalized}")
    print_success(f"Filtered:      {outputs.kept}")
    print_success(f"Report:        {outputs.report}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("common options")
    group.add_argument("--config", help="Pipeline config YAML")
    group.add_argument(
        "--override",
        action="append",
        metavar="KEY=VALUE",
        help="Override config values (e.g., decoder.beam_size=50)",
    )
    group.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default=settings.log_level.upper(),
        help="Logging level",
    )
    group.add_argument("--seed", type=int, default=None, help="Random seed (config seed; default: 0)")
    group.add_argument("--jobs", type=int, default=None, help="Parallel workers (config jobs; default: 1)")
    group.add_argument("--out", help="Write output to this file instead of stdout")
    return common


def _add_decoder_flags(parser: argparse.ArgumentParser) -> None:
    _config_flag(parser, "--lm", key="paths.lm", help="ARPA language model")
    _config_flag(parser, "--lexicon", key="paths.lexicon", help="Lexicon (word<TAB>tokens); implies --use-lexicon")
    _config_flag(parser, "--beam-size", key="decoder.beam_size", type=int, help="Beam size")
    _config_flag(parser, "--lm-weight", key="decoder.lm_weight", type=float, help="LM weight alpha")
    _config_flag(parser, "--word-bonus", key="decoder.word_bonus", type=float, help="Word insertion bonus beta")
    _config_flag(parser, "--use-lexicon", key="decoder.use_lexicon", action="store_true", help="Lexicon-constrained search")
    _config_flag(parser, "--prune", key="decoder.prune_log_threshold", type=float, help="Per-frame token log-prob pruning")
    _config_flag(parser, "--nbest", key="decoder.nbest", type=int, help="Hypotheses returned")


def build_parser() -> ToolkitArgumentParser:
    """Build the noun-verb argument parser"""
    parser = ToolkitArgumentParser(
        prog="cli.py",
        description="Naija ASR Toolkit - pseudo-labelling pipeline for low-resource ASR",
        formatter_class=HelpFormatter,
        epilog="""
Examples:
  # Train a 5-gram model
  python cli.py lm train --corpus corpus.txt --order 5 --out pd.arpa

  # Decode emissions with LM fusion, preferring Pidgin-tagged hypotheses
  python cli.py decode beam --emissions utt1.ctce --lm pd.arpa --nbest 5 --select-lang pd

  # Filter pseudo-labels with per-language thresholds
  python cli.py filter stage --manifest pseudo.jsonl --policy policy.txt --out kept.jsonl

  # Temperature sampling weights
  python cli.py mix weights --counts pd=900,yo=100 --temperature 20

  # Score hypotheses
  python cli.py eval wer --ref ref.txt --hyp hyp.txt

  # Full pipeline from a config file
  python cli.py pipeline run --config templates/default/config.yaml
""",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_parser()
    nouns = parser.add_subparsers(dest="noun", title="commands", metavar="<command>")
    parser.set_defaults(noun_parsers={})

    def noun(name: str, help: str):
        noun_parser = nouns.add_parser(name, help=help, description=help, formatter_class=HelpFormatter)
        parser.get_default("noun_parsers")[name] = noun_parser
        return noun_parser.add_subparsers(dest="verb", title="subcommands", metavar="<subcommand>")

    def verb(verbs, name: str, func, help: str):
        verb_parser = verbs.add_parser(
            name, help=help, description=help, parents=[common], formatter_class=HelpFormatter
        )
        verb_parser.set_defaults(func=func)
        return verb_parser

    # lm
    lm = noun("lm", "N-gram language models")
    p = verb(lm, "train", cmd_lm_train, "Train a modified Kneser-Ney model (ARPA output)")
    _config_flag(p, "--corpus", key="paths.corpus", help="Training corpus, one sentence per line")
    _config_flag(p, "--heldout", key="paths.heldout", help="Held-out text removed from the corpus")
    p.add_argument("--order", type=int, default=5, help="Model order")
    p.add_argument("--min-count", type=int, nargs="+", metavar="N", help="Minimum raw count per order (pruning)")
    p.add_argument("--closed-vocabulary", action="store_true", help="Give <unk> no probability mass")
    p.add_argument("--preprocess", action="store_true", help="Preprocess corpus lines before training")

    p = verb(lm, "perplexity", cmd_lm_perplexity, "Corpus perplexity of one or more models")
    p.add_argument("--lm", action="append", metavar="[LABEL=]MODEL", help="ARPA model (repeatable)")
    _config_flag(p, "--corpus", key="paths.corpus", help="Evaluation corpus")
    p.add_argument("--preprocess", action="store_true", help="Preprocess corpus lines before scoring")
    p.add_argument("--table", help="Also write a language,perplexity CSV here")

    p = verb(lm, "score", cmd_lm_score, "Log10 probability of each sentence")
    _config_flag(p, "--lm", key="paths.lm", help="ARPA model")
    p.add_argument("--input", default="-", help="Text file, one sentence per line ('-' for stdin)")

    # decode
    decode = noun("decode", "CTC decoding of precomputed emissions")
    p = verb(decode, "greedy", cmd_decode_greedy, "Best-path decoding")
    p.add_argument("--emissions", nargs="+", required=True, help="Emission files (.ctce)")

    p = verb(decode, "beam", cmd_decode_beam, "Prefix beam search with LM shallow fusion (N-best JSONL)")
    p.add_argument("--emissions", nargs="+", required=True, help="Emission files (.ctce)")
    _add_decoder_flags(p)
    p.add_argument("--select-lang", help="Pick the best hypothesis tagged with this language")

    # norm
    norm = noun("norm", "Text normalization")
    p = verb(norm, "preprocess", cmd_norm_preprocess, "Lowercase, drop punctuation, spell digits")
    p.add_argument("--input", default="-", help="Text file ('-' for stdin)")
    _config_flag(p, "--no-spell-digits", key="normalization.spell_digits", action="store_false", help="Keep digits")

    p = verb(norm, "variants", cmd_norm_variants, "Apply the Pidgin variant table")
    p.add_argument("--input", default="-", help="Text file ('-' for stdin)")
    _config_flag(p, "--table", key="paths.variant_table", help=f"Variant table TSV ({settings.variant_table_path} when unset)")
    _config_flag(p, "--no-spell-digits", key="normalization.spell_digits", action="store_false", help="Keep digits")

    p = verb(norm, "homophones", cmd_norm_homophones, "LM-based homophone disambiguation")
    p.add_argument("--input", default="-", help="Text file ('-' for stdin)")
    _config_flag(p, "--sets", key="paths.homophones", help=f"Homophone sets ({settings.homophone_path} when unset)")
    _config_flag(p, "--lm", key="paths.normalization_lm", help="ARPA model in the target orthography")
    _config_flag(p, "--window", key="normalization.window", type=int, help="Context words on each side")
    _config_flag(p, "--full-sentence", key="normalization.full_sentence", action="store_true", help="Score the whole sentence")
    _config_flag(p, "--no-spell-digits", key="normalization.spell_digits", action="store_false", help="Keep digits")

    p = verb(norm, "pidgin", cmd_norm_pidgin, "Full Pidgin normalization (preprocess, variants, homophones)")
    p.add_argument("--input", default="-", help="Text file ('-' for stdin)")
    _config_flag(p, "--table", key="paths.variant_table", help="Variant table TSV")
    _config_flag(p, "--sets", key="paths.homophones", help="Homophone sets")
    _config_flag(p, "--lm", key="paths.normalization_lm", help="ARPA model; homophones are skipped without one")
    _config_flag(p, "--window", key="normalization.window", type=int, help="Context words on each side")
    _config_flag(p, "--full-sentence", key="normalization.full_sentence", action="store_true", help="Score the whole sentence")
    _config_flag(p, "--no-spell-digits", key="normalization.spell_digits", action="store_false", help="Keep digits")

    p = verb(norm, "mine", cmd_norm_mine, "Mine substitution pairs from aligned texts")
    p.add_argument("--ref", required=True, help="Reference texts, one per line")
    p.add_argument("--hyp", required=True, help="Hypothesis texts, one per line")
    p.add_argument("--min-count", type=int, default=1, help="Minimum pair count")
    p.add_argument("--raw", action="store_true", help="Do not preprocess before aligning")

    p = verb(norm, "dedup", cmd_norm_dedup, "Drop duplicate and held-out lines from a corpus")
    _config_flag(p, "--corpus", key="paths.corpus", help="Corpus, one sentence per line")
    _config_flag(p, "--heldout", key="paths.heldout", help="Held-out text (validation/test transcripts)")

    p = verb(norm, "strip-diacritics", cmd_norm_strip_diacritics, "Remove combining marks")
    p.add_argument("--input", default="-", help="Text file ('-' for stdin)")

    # filter
    filt = noun("filter", "Pseudo-label filtering")
    for name, func, help in (
        ("confidence", cmd_filter_confidence, "Keep entries at or above the language threshold"),
        ("language", cmd_filter_language, "Drop texts tagged with another language"),
        ("stage", cmd_filter_stage, "Language then confidence filter with a per-language report"),
    ):
        p = verb(filt, name, func, help)
        _config_flag(p, "--manifest", key="paths.manifest", help="Pseudo-labelled manifest")
        p.add_argument("--policy", help="Policy file of lang=threshold lines")
        p.add_argument("--threshold", type=float, help="Same threshold for every language")
        _config_flag(p, "--keep-unscored", key="filter.keep_unscored", action="store_true", help="Keep entries without confidence")
        _config_flag(p, "--drop-untagged", key="filter.drop_untagged", action="store_true", help="Drop texts without a tag")
        _config_flag(p, "--keep-mismatched", key="filter.drop_mismatched", action="store_false", help="Keep texts tagged with another language")
        p.add_argument("--report", help="JSON report path")

    # mix
    mix = noun("mix", "Temperature-based data mixing")
    p = verb(mix, "weights", cmd_mix_weights, "Sampling weights p_i^(1/T), normalized")
    p.add_argument("--counts", help="Counts as key=value pairs, e.g. pd=900,yo=100")
    _config_flag(p, "--manifest", key="paths.manifest", help="Manifest to count when --counts is absent")
    _config_flag(p, "--temperature", key="mix.temperature", type=float, help="Sampling temperature")
    _config_flag(p, "--basis", key="mix.basis", choices=["duration", "count"], help="Count hours or utterances")
    p.add_argument("--report", help="JSON report path")

    p = verb(mix, "sample", cmd_mix_sample, "Seeded temperature-weighted sample of a manifest")
    _config_flag(p, "--manifest", key="paths.manifest", help="Pool manifest")
    p.add_argument("--count", "-n", type=int, required=True, help="Entries to draw (with replacement)")
    _config_flag(p, "--temperature", key="mix.temperature", type=float, help="Sampling temperature")
    _config_flag(p, "--basis", key="mix.basis", choices=["duration", "count"], help="Count hours or utterances")

    # audio
    audio = noun("audio", "Audio segmentation and augmentation")
    p = verb(audio, "silence", cmd_audio_silence, "Detect silences")
    p.add_argument("--wav", required=True, help="Mono WAV file")
    _config_flag(p, "--threshold-db", key="audio.threshold_db", type=float, help="Silence threshold in dBFS")
    _config_flag(p, "--min-silence", key="audio.min_silence_s", type=float, help="Shortest silence in seconds")
    p.add_argument("--frame-ms", type=float, default=DEFAULT_FRAME_MS, help="Analysis frame length")
    p.add_argument("--hop-ms", type=float, default=DEFAULT_HOP_MS, help="Analysis hop")

    p = verb(audio, "merge", cmd_audio_merge, "Merge segments across short gaps or by embedding similarity")
    p.add_argument("--segments", required=True, help="Segments JSONL")
    _config_flag(p, "--max-gap", key="audio.max_gap_s", type=float, help="Gaps shorter than this are merged")
    _config_flag(p, "--keep-edge-silence", key="audio.keep_edge_silence", action="store_true", help="Absorb short edge silence")
    p.add_argument("--duration", type=float, help="Recording length, for the trailing edge")
    p.add_argument("--embeddings", help="float32 embedding matrix (sidecar <file>.json holds dim)")
    _config_flag(p, "--similarity", key="audio.similarity", type=float, help="Cosine threshold for embedding merge")

    p = verb(audio, "split", cmd_audio_split, "Split long segments at silences")
    p.add_argument("--wav", required=True, help="Mono WAV file")
    p.add_argument("--segments", help="Segments JSONL (whole file when absent)")
    _config_flag(p, "--max-len", key="audio.max_len_s", type=float, help="Maximum segment length in seconds")
    _config_flag(p, "--threshold-db", key="audio.threshold_db", type=float, help="Silence threshold in dBFS")

    p = verb(audio, "stretch", cmd_audio_stretch, "WSOLA time stretch")
    p.add_argument("--wav", required=True, help="Mono WAV file")
    p.add_argument("--factor", type=float, required=True, help="Speed factor in [0.5, 2.5]; >1 is faster")

    p = verb(audio, "mix-noise", cmd_audio_mix_noise, "Mix noise at a target SNR")
    p.add_argument("--wav", required=True, help="Mono WAV file")
    _config_flag(p, "--noise", key="paths.noise", help="Noise WAV (looped to length)")
    p.add_argument("--snr", type=float, required=True, help="Target SNR in dB")

    p = verb(audio, "augment", cmd_audio_augment, "Seeded noise and stretch augmentation of a manifest")
    _config_flag(p, "--manifest", key="paths.manifest", help="Manifest to augment")
    _config_flag(p, "--noise", key="paths.noise", help="Noise WAV")
    _config_flag(p, "--stage", key="augmentation.stage", choices=sorted(STAGE_PROBABILITIES), help="Training stage; sets both probabilities")
    _config_flag(p, "--noise-prob", key="augmentation.noise_prob", type=float, help="Noise probability")
    _config_flag(p, "--stretch-prob", key="augmentation.stretch_prob", type=float, help="Stretch probability")
    _config_flag(p, "--snr-min", key="augmentation.snr_min", type=float, help="Minimum SNR in dB")
    _config_flag(p, "--snr-max", key="augmentation.snr_max", type=float, help="Maximum SNR in dB")
    _config_flag(p, "--stretch-factors", key="augmentation.stretch_factors", type=float, nargs="+", help="Stretch factors")
    p.add_argument("--out-dir", help="Directory for augmented WAVs, manifest and report (default: <output_dir>/augmented)")

    # eval
    ev = noun("eval", "Evaluation")
    p = verb(ev, "wer", cmd_eval_wer, "Word error rate")
    p.add_argument("--ref", required=True, help="Reference text file or manifest (.jsonl)")
    p.add_argument("--hyp", required=True, help="Hypothesis text file or manifest (.jsonl)")
    _config_flag(p, "--raw", key="evaluation.raw", action="store_true", help="Score verbatim text")
    p.add_argument("--report", help="JSON report with S/I/D counts")

    p = verb(ev, "diacritics", cmd_eval_diacritics, "WER with diacritics retained and stripped")
    p.add_argument("--ref", required=True, help="Reference text file or manifest (.jsonl)")
    p.add_argument("--hyp", required=True, help="Hypothesis text file or manifest (.jsonl)")
    _config_flag(p, "--raw", key="evaluation.raw", action="store_true", help="Score verbatim text")
    p.add_argument("--report", help="JSON report path")

    p = verb(ev, "lid", cmd_eval_lid, "Language-ID F1 from hypothesis tags (CSV lang,f1)")
    p.add_argument("--ref", help="Reference manifest (.jsonl)")
    p.add_argument("--hyp", required=True, help="Hypothesis manifest (.jsonl) or text file")
    p.add_argument("--lang", help="Test-set language for text hypotheses")
    p.add_argument("--report", help="JSON report path")

    p = verb(ev, "speed-sweep", cmd_eval_speed_sweep, "WER across speaking rates (CSV factor,wer)")
    _config_flag(p, "--manifest", key="paths.manifest", help="Reference manifest")
    _config_flag(p, "--emissions-dir", key="paths.emissions_dir", help="Directory with x<factor>/<stem>.ctce")
    _config_flag(p, "--decode-cmd", key="evaluation.decode_cmd", help="External decoder, e.g. 'asr {wav}'")
    _config_flag(p, "--factors", key="evaluation.speed_factors", type=float, nargs="+", help="Speed factors")
    _config_flag(p, "--raw", key="evaluation.raw", action="store_true", help="Score verbatim text")
    p.add_argument("--greedy", action="store_true", help="Best-path decode the emissions")
    _add_decoder_flags(p)
    p.add_argument("--report", help="JSON report with per-factor S/I/D counts")

    # manifest
    manifest = noun("manifest", "Manifest utilities")
    p = verb(manifest, "validate", cmd_manifest_validate, "Parse and summarize a manifest")
    _config_flag(p, "--manifest", key="paths.manifest", help="Manifest (JSONL)")
    p.add_argument("--check-audio", action="store_true", help="Check that every audio file exists")

    # pipeline
    pipeline = noun("pipeline", "End-to-end pseudo-labelling")
    p = verb(pipeline, "run", cmd_pipeline_run, "decode -> normalize -> filter -> evaluate")
    _config_flag(p, "--manifest", key="paths.manifest", help="Untranscribed manifest")
    _config_flag(p, "--emissions-dir", key="paths.emissions_dir", help="Directory with <stem>.ctce")
    _config_flag(p, "--references", key="paths.references", help="Reference manifest for evaluation")
    _config_flag(p, "--output-dir", key="paths.output_dir", help="Directory for manifests and report")
    _add_decoder_flags(p)
    p.add_argument("--dry-run", action="store_true", help="Validate without running")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.noun:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if not getattr(args, "verb", None):
        args.noun_parsers[args.noun].print_help(sys.stderr)
        return EXIT_USAGE

    setup_logging(args.log_level, settings.log_dir)

    try:
        return args.func(args)
    except ToolkitError as e:
        print_error(format_error_for_cli(e))
        return exit_code_for(e)
    except KeyboardInterrupt:
        print_info("Cancelled by user")
        return EXIT_INTERRUPTED
    except OSError as e:
        print_error(f"I/O error: {e}")
        return EXIT_IO
    except Exception as e:
        print_error(f"Unexpected error: {e}")
        logger.opt(exception=True).debug("Full traceback:")
        return EXIT_VALIDATION


if __name__ == '__main__':
    sys.exit(main())
