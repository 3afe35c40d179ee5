"""
Pseudo-label pipeline orchestrator

Coordinates decode -> normalize -> filter -> evaluate for one language.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from agents.base_agent import BaseAgent, WorkflowState, WorkflowStateManager
from agents.evaluation_agent import EvaluationAgent, EvaluationReport
from agents.label_filter_agent import LabelFilterAgent
from agents.normalization_agent import NormalizationAgent
from agents.pseudo_label_agent import DecodeResult, PseudoLabelAgent
from models.decoding import DecoderConfig
from models.filtering import FilterPolicy, MixSpec, StageReport
from models.manifest import ManifestEntry
from utils.ngram_lm import ArpaLm
from utils.pseudo_label_filter import counts_from_entries, temperature_weights
from utils.text_normalizer import HomophoneSets, VariantTable


@dataclass
class PipelineResources:
    """Loaded models and tables shared by the stages"""
    decoder_lm: Optional[ArpaLm] = None
    lexicon_entries: Optional[Sequence[Tuple[str, Sequence[str]]]] = None
    variant_table: Optional[VariantTable] = None
    homophones: Optional[HomophoneSets] = None
    normalization_lm: Optional[ArpaLm] = None
    references: Optional[List[ManifestEntry]] = None


@dataclass
class PipelineResult:
    decoded: DecodeResult
    normalized: List[ManifestEntry]
    kept: List[ManifestEntry]
    filter_report: StageReport
    mix_weights: Dict[str, float] = field(default_factory=dict)
    evaluation: Optional[EvaluationReport] = None
    stages: Tuple[str, ...] = ()

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "stages": list(self.stages),
            "decoded": len(self.decoded.utterances),
            "fallbacks": self.decoded.fallback_count,
            "normalized": len(self.normalized),
            "filter": self.filter_report.to_record(),
            "mix_weights": {k: round(v, 9) for k, v in self.mix_weights.items()},
        }
        if self.evaluation is not None:
            record["evaluation"] = self.evaluation.to_record()
        return record


class PseudoLabelOrchestrator(BaseAgent):
    """Runs the pseudo-labelling stages in order and tracks stage state"""

    def __init__(
        self,
        agent_id: str = "orchestrator",
        config: Optional[Dict[str, Any]] = None,
        resources: Optional[PipelineResources] = None,
    ):
        """
        Args:
            agent_id: Agent identifier
            config: Orchestrator configuration with keys decoder, emissions_dir,
                normalization, filter_policy, temperature, basis, jobs, raw
            resources: Loaded models and tables
        """
        super().__init__(agent_id, config)
        self.resources = resources or PipelineResources()
        self.workflow = WorkflowStateManager()
        jobs = self.config.get("jobs", 1)

        self.pseudo_labeler = PseudoLabelAgent(
            config={"select_lang": self.config.get("select_lang", True), "jobs": jobs},
            decoder_config=self.config.get("decoder") or DecoderConfig(),
            emissions_dir=self.config.get("emissions_dir"),
            lm=self.resources.decoder_lm,
            lexicon_entries=self.resources.lexicon_entries,
        )
        self.normalizer = NormalizationAgent(
            config=self.config.get("normalization", {}),
            variant_table=self.resources.variant_table,
            homophones=self.resources.homophones,
            lm=self.resources.normalization_lm,
        )
        self.label_filter = LabelFilterAgent(
            policy=self.config.get("filter_policy") or FilterPolicy.uniform(0.0),
        )
        self.evaluator = EvaluationAgent(
            config={"raw": self.config.get("raw", False), "jobs": jobs}
        )

    async def validate_input(self, entries: List[ManifestEntry]) -> bool:
        if not entries:
            self.logger.error("Input manifest is empty")
            return False
        return True

    async def execute(self, entries: List[ManifestEntry]) -> PipelineResult:
        """
        Run every stage

        Args:
            entries: Untranscribed (or to-be-relabelled) manifest entries

        Returns:
            PipelineResult
        """
        try:
            self.workflow.transition_to(WorkflowState.DECODING)
            decoded = await self.pseudo_labeler.run(entries)

            self.workflow.transition_to(
                WorkflowState.NORMALIZING,
                {"decoded": len(decoded.utterances), "fallbacks": decoded.fallback_count},
            )
            normalized = await self.normalizer.run(decoded.entries)

            self.workflow.transition_to(WorkflowState.FILTERING, {"changed": self.normalizer.changed})
            kept, report = await self.label_filter.run(normalized)

            mix_weights: Dict[str, float] = {}
            basis = self.config.get("basis", "duration")
            counts = counts_from_entries(kept, basis)
            if counts and any(v > 0 for v in counts.values()):
                spec = MixSpec(counts=counts, temperature=self.config.get("temperature", 20.0), basis=basis)
                mix_weights = temperature_weights(spec)

            evaluation = None
            references = self.resources.references
            if references:
                self.workflow.transition_to(WorkflowState.EVALUATING, {"kept": report.total_kept})
                evaluation = await self.evaluator.run((references, normalized))
            self.workflow.transition_to(WorkflowState.COMPLETED)
        except Exception:
            if self.workflow.current_state is not WorkflowState.COMPLETED:
                self.workflow.transition_to(WorkflowState.FAILED)
            raise

        return PipelineResult(
            decoded=decoded,
            normalized=normalized,
            kept=kept,
            filter_report=report,
            mix_weights=mix_weights,
            evaluation=evaluation,
            stages=self.workflow.stages,
        )
