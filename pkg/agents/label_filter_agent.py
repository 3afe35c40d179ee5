"""Pseudo-label filtering agent"""
from typing import Any, Dict, List, Optional, Tuple

from agents.base_agent import BaseAgent
from models.filtering import FilterPolicy, StageReport
from models.manifest import ManifestEntry
from utils.pseudo_label_filter import check_policy_covers, merge_reports, run_stage


class LabelFilterAgent(BaseAgent):
    """Applies the language-mismatch and confidence filters shard by shard"""

    def __init__(
        self,
        agent_id: str = "label_filter",
        config: Optional[Dict[str, Any]] = None,
        policy: Optional[FilterPolicy] = None,
    ):
        """
        Args:
            agent_id: Agent identifier
            config: shard_size (entries per shard, 0 = one shard)
            policy: Filter policy
        """
        super().__init__(agent_id, config)
        self.policy = policy or FilterPolicy.uniform(0.0)
        self.shard_size = int(self.config.get("shard_size", 0))

    def _shards(self, entries: List[ManifestEntry]) -> List[List[ManifestEntry]]:
        if self.shard_size <= 0 or len(entries) <= self.shard_size:
            return [entries]
        return [entries[i:i + self.shard_size] for i in range(0, len(entries), self.shard_size)]

    async def validate_input(self, entries: List[ManifestEntry]) -> bool:
        return isinstance(entries, list)

    async def execute(self, entries: List[ManifestEntry]) -> Tuple[List[ManifestEntry], StageReport]:
        """
        Args:
            entries: Pseudo-labelled entries

        Returns:
            (kept entries in input order, merged report)
        """
        check_policy_covers(entries, self.policy)
        kept: List[ManifestEntry] = []
        reports: List[StageReport] = []
        for shard in self._shards(entries):
            shard_kept, shard_report = run_stage(shard, self.policy)
            kept.extend(shard_kept)
            reports.append(shard_report)
        report = merge_reports(reports)
        self.logger.info(f"Kept {report.total_kept}/{len(entries)} ({report.total_hours:.3f} h)")
        return kept, report
