"""
Pseudo-label filtering and data mixing

Confidence and language-mismatch filters, temperature sampling weights and
the composed filtering stage with its per-language report.
"""
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import PolicyError
from core.reports import build_report, save_report
from models.filtering import (
    REASON_CONFIDENCE,
    REASON_MISMATCH,
    REASON_UNSCORED,
    REASON_UNTAGGED,
    DroppedEntry,
    FilterPolicy,
    MixSpec,
    StageReport,
)
from models.manifest import ManifestEntry, strip_language_tag
from utils.logger import get_logger

logger = get_logger(__name__)

FilterResult = Tuple[List[ManifestEntry], List[DroppedEntry]]


def check_policy_covers(entries: Iterable[ManifestEntry], policy: FilterPolicy) -> None:
    """
    Raises:
        PolicyError: Some entry languages have no threshold
    """
    missing = sorted({e.lang.value for e in entries if e.lang not in policy.thresholds})
    if missing:
        raise PolicyError(
            f"no threshold for lang {', '.join(missing)}",
            "Add a line like 'pd=0.9' to the policy file or set filter.thresholds in the config.",
        )


def filter_by_confidence(entries: Iterable[ManifestEntry], policy: FilterPolicy) -> FilterResult:
    """
    Keep entries whose confidence reaches their language threshold

    Args:
        entries: Manifest entries
        policy: Thresholds per language

    Returns:
        (kept, dropped) with drop reasons "confidence" or "unscored"

    Raises:
        PolicyError: An entry's language has no threshold
    """
    entries = list(entries)
    check_policy_covers(entries, policy)
    kept: List[ManifestEntry] = []
    dropped: List[DroppedEntry] = []
    for entry in entries:
        threshold = policy.thresholds[entry.lang]
        if entry.confidence is None:
            if policy.keep_unscored:
                kept.append(entry)
            else:
                dropped.append(DroppedEntry(entry, REASON_UNSCORED))
        elif entry.confidence >= threshold:
            kept.append(entry)
        else:
            dropped.append(DroppedEntry(entry, REASON_CONFIDENCE))
    return kept, dropped


def filter_language_mismatch(
    entries: Iterable[ManifestEntry], policy: Optional[FilterPolicy] = None
) -> FilterResult:
    """
    Drop texts tagged with another language; strip the tag from the rest

    Args:
        entries: Entries whose text may begin with a decoder-emitted tag
        policy: drop_mismatched / drop_untagged switches (defaults: True / False)

    Returns:
        (kept, dropped) with drop reasons "language-mismatch" or "untagged"

    Raises:
        PolicyError: A policy is given and an entry's language has no threshold
    """
    entries = list(entries)
    if policy is not None:
        check_policy_covers(entries, policy)
    drop_mismatched = True if policy is None else policy.drop_mismatched
    drop_untagged = False if policy is None else policy.drop_untagged
    kept: List[ManifestEntry] = []
    dropped: List[DroppedEntry] = []
    for entry in entries:
        tag, remainder = strip_language_tag(entry.text)
        if tag is None:
            if drop_untagged:
                dropped.append(DroppedEntry(entry, REASON_UNTAGGED))
            else:
                kept.append(entry)
        elif tag != entry.lang and drop_mismatched:
            dropped.append(DroppedEntry(entry, REASON_MISMATCH))
        else:
            kept.append(entry.with_text(remainder))
    return kept, dropped


def temperature_weights(spec: MixSpec) -> Dict[str, float]:
    """
    Temperature-scaled sampling probabilities

    p_i = (n_i / N)^(1/T) normalized over keys; zero counts get zero mass.

    Raises:
        PolicyError: Every count is zero
    """
    total = math.fsum(spec.counts.values())
    if total <= 0:
        raise PolicyError("all counts are zero; sampling weights are undefined")
    exponent = 1.0 / spec.temperature
    scaled = {
        key: (count / total) ** exponent if count > 0 else 0.0
        for key, count in spec.counts.items()
    }
    norm = math.fsum(scaled.values())
    return {key: value / norm for key, value in scaled.items()}


def counts_from_entries(entries: Iterable[ManifestEntry], basis: str = "duration") -> Dict[str, float]:
    """Hours (basis="duration") or utterance counts per language, in first-seen order"""
    counts: Dict[str, float] = {}
    for entry in entries:
        amount = entry.duration_s / 3600.0 if basis == "duration" else 1.0
        counts[entry.lang.value] = counts.get(entry.lang.value, 0.0) + amount
    return counts


def sampling_plan(
    entries: Sequence[ManifestEntry],
    spec: MixSpec,
    n: int,
    rng: np.random.Generator,
) -> List[ManifestEntry]:
    """
    Draw n entries: a language by temperature weight, then an entry uniformly

    Args:
        entries: Pool of entries
        spec: Mixing spec; its counts pick the languages that take part
        n: Number of draws (with replacement)
        rng: Seeded generator

    Returns:
        Drawn entries in draw order
    """
    pools: Dict[str, List[ManifestEntry]] = {}
    for entry in entries:
        pools.setdefault(entry.lang.value, []).append(entry)
    weights = temperature_weights(spec)
    keys = [key for key in weights if weights[key] > 0 and pools.get(key)]
    if not keys:
        raise PolicyError("no language in the mixing spec has entries to sample")
    probs = np.array([weights[key] for key in keys])
    probs /= probs.sum()

    plan: List[ManifestEntry] = []
    for key_index in rng.choice(len(keys), size=n, p=probs):
        pool = pools[keys[int(key_index)]]
        plan.append(pool[int(rng.integers(len(pool)))])
    return plan


def run_stage(
    entries: Iterable[ManifestEntry],
    policy: FilterPolicy,
    report_path: Optional[Union[str, Path]] = None,
) -> Tuple[List[ManifestEntry], StageReport]:
    """
    Language-mismatch filter followed by the confidence filter

    Args:
        entries: Pseudo-labelled entries
        policy: Filter policy
        report_path: Where to write the JSON report, if given

    Returns:
        (kept entries, stage report)
    """
    entries = list(entries)
    check_policy_covers(entries, policy)
    report = StageReport()
    language_kept, language_dropped = filter_language_mismatch(entries, policy)
    kept, confidence_dropped = filter_by_confidence(language_kept, policy)

    for entry in kept:
        report.record_kept(entry)
    for dropped in language_dropped + confidence_dropped:
        report.record_dropped(dropped)

    logger.info(
        f"Filter stage: kept {len(kept)}/{len(entries)} "
        f"(language {len(language_dropped)}, confidence {len(confidence_dropped)} dropped)"
    )
    if report_path is not None:
        save_report(build_report("filter-stage", report.to_record()), report_path)
        logger.info(f"Report written to {report_path}")
    return kept, report


def merge_reports(reports: Iterable[StageReport]) -> StageReport:
    """Add shard reports together"""
    total = StageReport()
    for report in reports:
        total = total + report
    return total
