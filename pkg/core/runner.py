"""
Pipeline Runner

Loads the files named by a PipelineConfig, runs the orchestrator and writes
the pseudo-label manifests and the run report.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

from agents.orchestrator_agent import PipelineResources, PipelineResult, PseudoLabelOrchestrator
from agents.pseudo_label_agent import PseudoLabelAgent
from config.pipeline_schema import PipelineConfig
from config.settings import settings
from core.errors import ConfigLoadError
from core.reports import build_report, save_report
from models.manifest import read_manifest, write_manifest
from utils.logger import get_logger
from utils.ngram_lm import read_arpa
from utils.text_normalizer import load_homophones, load_variant_table

logger = get_logger(__name__)

DECODED_MANIFEST = "pseudo_labels.jsonl"
NORMALIZED_MANIFEST = "normalized.jsonl"
KEPT_MANIFEST = "filtered.jsonl"
REPORT_FILE = "pipeline_report.json"


@dataclass
class RunOutputs:
    decoded: Path
    normalized: Path
    kept: Path
    report: Path


class PipelineRunner:
    """Runs the pseudo-label pipeline for one configuration"""

    def __init__(self, config: PipelineConfig):
        """
        Initialize pipeline runner

        Args:
            config: Pipeline configuration with resolved paths
        """
        self.config = config
        self.output_dir = Path(config.paths.output_dir)
        self.orchestrator: Optional[PseudoLabelOrchestrator] = None

    def _build_orchestrator_config(self) -> Dict[str, Any]:
        """
        Convert pipeline config to orchestrator config format

        Returns:
            Configuration dictionary for PseudoLabelOrchestrator
        """
        config = self.config
        return {
            'decoder': config.decoder,
            'emissions_dir': config.paths.emissions_dir,
            'select_lang': True,
            'normalization': {
                'spell_digits': config.normalization.spell_digits,
                'pidgin': config.normalization.pidgin,
                'window': config.normalization.window,
                'full_sentence': config.normalization.full_sentence,
            },
            'filter_policy': config.filter.to_policy(),
            'temperature': config.mix.temperature,
            'basis': config.mix.basis,
            'raw': config.evaluation.raw,
            'jobs': config.jobs,
        }

    def _load_resources(self) -> PipelineResources:
        paths = self.config.paths
        resources = PipelineResources()

        if self.config.decoder.lm_weight > 0:
            if not paths.lm:
                raise ConfigLoadError(f"decoder.lm_weight={self.config.decoder.lm_weight} needs paths.lm")
            resources.decoder_lm = read_arpa(paths.lm)
        if self.config.decoder.use_lexicon:
            if not paths.lexicon:
                raise ConfigLoadError("decoder.use_lexicon is set but paths.lexicon is empty")
            resources.lexicon_entries = PseudoLabelAgent.read_lexicon_entries(Path(paths.lexicon))

        if self.config.normalization.pidgin:
            resources.variant_table = load_variant_table(paths.variant_table or settings.variant_table_path)
            resources.homophones = load_homophones(paths.homophones or settings.homophone_path)
            if paths.normalization_lm:
                resources.normalization_lm = read_arpa(paths.normalization_lm)

        if paths.references:
            resources.references = read_manifest(paths.references)
        return resources

    async def run(self) -> RunOutputs:
        """
        Execute the pipeline

        Returns:
            Paths of the written manifests and report

        Raises:
            ConfigLoadError: Required paths are missing from the configuration
        """
        if not self.config.paths.manifest:
            raise ConfigLoadError("paths.manifest is required for a pipeline run")
        if not self.config.paths.emissions_dir:
            raise ConfigLoadError("paths.emissions_dir is required for a pipeline run")

        entries = read_manifest(self.config.paths.manifest)
        self.orchestrator = PseudoLabelOrchestrator(
            config=self._build_orchestrator_config(),
            resources=self._load_resources(),
        )
        result = await self.orchestrator.run(entries)
        return self._write_outputs(result)

    def _write_outputs(self, result: PipelineResult) -> RunOutputs:
        outputs = RunOutputs(
            decoded=self.output_dir / DECODED_MANIFEST,
            normalized=self.output_dir / NORMALIZED_MANIFEST,
            kept=self.output_dir / KEPT_MANIFEST,
            report=self.output_dir / REPORT_FILE,
        )
        write_manifest(result.decoded.entries, outputs.decoded)
        write_manifest(result.normalized, outputs.normalized)
        write_manifest(result.kept, outputs.kept)

        body = result.to_record()
        body["language"] = self.config.language
        body["decoder"] = {
            "beam_size": self.config.decoder.beam_size,
            "lm_weight": self.config.decoder.lm_weight,
            "word_bonus": self.config.decoder.word_bonus,
            "use_lexicon": self.config.decoder.use_lexicon,
            "nbest": self.config.decoder.nbest,
        }
        save_report(build_report("pipeline", body, seed=self.config.seed), outputs.report)
        logger.info(f"Pipeline report written to {outputs.report}")
        return outputs


async def run_pipeline(config: PipelineConfig) -> RunOutputs:
    """
    Convenience function to run a pipeline

    Args:
        config: Pipeline configuration

    Returns:
        Output paths
    """
    return await PipelineRunner(config).run()
