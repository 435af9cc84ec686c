"""Experiment facade wiring configuration, data, training and evaluation."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .config import RunConfig
from .data.cohort import load_entry, read_cohort
from .data.patches import Dataset, build_dataset
from .data.phantom import generate_phantom
from .data.split import split_volumes
from .evaluation.report import evaluate, write_report
from .exceptions import ValidationError
from .models.reports import EvalReport
from .models.training import DatasetRole
from .models.volumes import LabelVolume, Volume
from .network.builders import build_model
from .network.checkpoint import save_weights
from .network.graph import LayerGraph, param_count
from .training.optim import TrainState, apply_freeze_schedule, sequential_schedule
from .training.trainer import FitResult, fit

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class Cohort:
    """Paired volumes keyed by id, labels in the MODEL convention."""

    ids: List[str] = field(default_factory=list)
    volumes: List[Volume] = field(default_factory=list)
    labels: List[LabelVolume] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ids)

    def select(self, ids: Sequence[str]) -> "Cohort":
        """Sub-cohort in the order of ``ids``."""
        index = {vid: i for i, vid in enumerate(self.ids)}
        missing = [vid for vid in ids if vid not in index]
        if missing:
            raise ValidationError(f"Unknown volume ids: {missing}")
        return Cohort(
            list(ids),
            [self.volumes[index[v]] for v in ids],
            [self.labels[index[v]] for v in ids],
        )


@dataclass
class TrainOutcome:
    """Everything a training run produced."""

    graph: LayerGraph
    fit: FitResult
    split: Tuple[List[str], List[str], List[str]]
    report: Optional[EvalReport] = None
    files: Dict[str, Path] = field(default_factory=dict)


class Experiment:
    """One configured experiment.

    Example:
        >>> exp = Experiment.from_overrides({"max_epochs": 0, "width": 8})
        >>> outcome = exp.train()
        >>> outcome.fit.best_checkpoint.name
        'initial.usgn'
    """

    def __init__(self, config: RunConfig):
        """Initialize Experiment.

        Args:
            config: Validated run configuration
        """
        self.config = config
        self.output_dir = Path(config.output_dir)

    @classmethod
    def from_overrides(
        cls,
        overrides: Optional[Mapping[str, Any]] = None,
        config_file: Optional[PathLike] = None,
    ) -> "Experiment":
        """Create an Experiment from an optional config file plus overrides.

        Raises:
            ConfigError: If a key is unknown
        """
        if config_file is not None:
            config = RunConfig.from_file(config_file, overrides)
        else:
            config = RunConfig.from_mapping(overrides or {})
        return cls(config)

    def build_graph(self) -> LayerGraph:
        """Fresh graph of the configured variant."""
        return build_model(self.config.model, self.config.width, self.config.seed)

    def load_cohort(self) -> Cohort:
        """Read the manifest cohort, or generate phantoms when none is set."""
        cfg = self.config
        cohort = Cohort()
        if cfg.manifest:
            manifest = Path(cfg.manifest)
            for entry in read_cohort(manifest):
                vol, lv = load_entry(entry, manifest.parent)
                cohort.ids.append(entry.volume_id)
                cohort.volumes.append(vol)
                cohort.labels.append(lv)
        else:
            for i in range(cfg.phantom_count):
                vol, lv = generate_phantom(cfg.phantom_spec(i))
                cohort.ids.append(f"phantom_{i:02d}")
                cohort.volumes.append(vol)
                cohort.labels.append(lv)
        logger.info(f"Cohort has {len(cohort)} volumes")
        return cohort

    def split(self, cohort: Cohort) -> Tuple[List[str], List[str], List[str]]:
        """Train/val/test ids under the configured counts and seed."""
        cfg = self.config
        return split_volumes(
            cohort.ids, cfg.split_train, cfg.split_val, cfg.split_test, cfg.split_seed
        )

    def datasets(
        self, cohort: Cohort, train_ids: Sequence[str], val_ids: Sequence[str]
    ) -> Tuple[Dataset, Dataset]:
        """Training (background-filtered) and validation patch datasets."""
        train = cohort.select(train_ids)
        val = cohort.select(val_ids)
        return (
            build_dataset(
                train.volumes,
                train.labels,
                DatasetRole.TRAIN,
                train.ids,
                self.config.max_bg_fraction,
            ),
            build_dataset(val.volumes, val.labels, DatasetRole.VAL, val.ids),
        )

    def manifest_lines(self, graph: LayerGraph) -> List[str]:
        """Run manifest: every config value, the constants and the model size."""
        return self.config.manifest_lines() + [f"param_count={param_count(graph)}"]

    def write_manifest(self, graph: LayerGraph) -> Path:
        """Write manifest.txt into the output directory."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / "manifest.txt"
        path.write_text("\n".join(self.manifest_lines(graph)) + "\n")
        return path

    def train(self) -> TrainOutcome:
        """Run the full protocol: split, fit, optional fine-tuning, test report.

        Returns:
            TrainOutcome with the trained graph (best weights loaded)
        """
        cfg = self.config
        graph = self.build_graph()
        files = {"manifest": self.write_manifest(graph)}
        cohort = self.load_cohort()
        split = self.split(cohort)
        train_ds, val_ds = self.datasets(cohort, split[0], split[1])

        checkpoint_dir = self.output_dir / "checkpoints"
        optim = cfg.optim_config()
        state = TrainState.for_graph(graph)
        result = fit(
            graph,
            train_ds,
            val_ds,
            optim,
            checkpoint_dir,
            history_path=self.output_dir / "history.csv",
            state=state,
        )
        files["history"] = self.output_dir / "history.csv"

        stages = sequential_schedule(graph)[: cfg.finetune_stages]
        for k, stage in enumerate(stages, start=1):
            logger.info(f"Fine-tuning stage {k}/{len(stages)}: {stage}")
            stage_cfg = apply_freeze_schedule(
                optim.model_copy(update={"max_epochs": cfg.stage_epochs}), graph, stage
            )
            fit(
                graph,
                train_ds,
                val_ds,
                stage_cfg,
                checkpoint_dir / f"stage_{k:02d}",
                state=state,
            )
        if stages:
            result.best_checkpoint = save_weights(graph, checkpoint_dir / "best.usgn")
            result.best_epoch = state.best_epoch
            result.best_loss = state.best_loss
        files["checkpoint"] = result.best_checkpoint

        report = None
        trained = cfg.max_epochs > 0 or (bool(stages) and cfg.stage_epochs > 0)
        if split[2] and trained:
            test = cohort.select(split[2])
            report = evaluate(graph, test.volumes, test.labels, cfg.fusion, test.ids)
            paths = write_report(report, self.output_dir, title=cfg.model.value)
            files["report_csv"], files["report_txt"] = paths
        return TrainOutcome(graph, result, split, report, files)
