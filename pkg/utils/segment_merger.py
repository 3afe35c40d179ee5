"""Segment merging: VAD gap absorption and speaker-embedding similarity"""
from typing import List, Optional, Sequence

import numpy as np

from core.errors import EmbeddingDimensionError, SegmentOrderError
from models.audio import Segment
from utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_MAX_GAP_S = 1.5
DEFAULT_SIMILARITY = 0.7


def check_sorted(segments: Sequence[Segment]) -> None:
    """
    Raises:
        SegmentOrderError: If segments are unsorted or overlap
    """
    for i in range(1, len(segments)):
        if segments[i].start_s < segments[i - 1].end_s:
            raise SegmentOrderError(
                i,
                f"starts at {segments[i].start_s} before previous end {segments[i - 1].end_s}",
            )


def merge_vad_segments(
    speech: Sequence[Segment],
    max_gap_s: float = DEFAULT_MAX_GAP_S,
    keep_edge_silence: bool = False,
    total_duration_s: Optional[float] = None,
) -> List[Segment]:
    """
    Join neighbouring speech segments separated by less than max_gap_s

    Args:
        speech: Sorted, non-overlapping segments
        max_gap_s: Gaps strictly shorter than this are absorbed
        keep_edge_silence: Also absorb short leading/trailing silence up to the recording edges
        total_duration_s: Recording length, needed for the trailing edge

    Returns:
        Merged segments
    """
    check_sorted(speech)
    merged: List[Segment] = []
    for segment in speech:
        if merged and segment.start_s - merged[-1].end_s < max_gap_s:
            merged[-1] = Segment(start_s=merged[-1].start_s, end_s=segment.end_s)
        else:
            merged.append(Segment(start_s=segment.start_s, end_s=segment.end_s))

    if keep_edge_silence and merged:
        if 0 < merged[0].start_s < max_gap_s:
            merged[0] = Segment(start_s=0.0, end_s=merged[0].end_s)
        if total_duration_s is not None and 0 < total_duration_s - merged[-1].end_s < max_gap_s:
            merged[-1] = Segment(start_s=merged[-1].start_s, end_s=total_duration_s)

    logger.debug(f"VAD merge: {len(speech)} -> {len(merged)} segments (gap < {max_gap_s}s)")
    return merged


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    norm = float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    if norm == 0.0:
        return 0.0
    return float(np.dot(a, b)) / norm


def merge_by_embedding(
    segments: Sequence[Segment], threshold: float = DEFAULT_SIMILARITY
) -> List[List[Segment]]:
    """
    Group temporally adjacent segments whose embeddings are similar

    Neighbours join the same group when cosine similarity is strictly
    greater than threshold; groups are maximal runs.

    Raises:
        EmbeddingDimensionError: Missing embeddings or unequal dimensions
        SegmentOrderError: Unsorted input
    """
    if not segments:
        return []
    check_sorted(segments)
    dims = {len(s.embedding) if s.embedding is not None else 0 for s in segments}
    if 0 in dims:
        raise EmbeddingDimensionError("every segment needs an embedding")
    if len(dims) > 1:
        raise EmbeddingDimensionError(f"embedding dimensions differ: {sorted(dims)}")

    vectors = [np.asarray(s.embedding, dtype=np.float64) for s in segments]
    groups: List[List[Segment]] = [[segments[0]]]
    for i in range(1, len(segments)):
        if cosine_similarity(vectors[i - 1], vectors[i]) > threshold:
            groups[-1].append(segments[i])
        else:
            groups.append([segments[i]])
    return groups


def group_spans(groups: Sequence[Sequence[Segment]]) -> List[Segment]:
    """Collapse each group to one segment spanning it"""
    return [Segment(start_s=g[0].start_s, end_s=g[-1].end_s) for g in groups if g]
