"""Test-set evaluation reports."""

import logging
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from ..data.labels import require_model_convention
from ..exceptions import ShapeError, ValidationError
from ..models.reports import EvalReport, VolumeMetrics
from ..models.volumes import LabelVolume, Volume
from ..network.graph import LayerGraph
from .metrics import confusion_matrix, tissue_dice, weighted_dice
from .segment import Fusion, segment_volume

logger = logging.getLogger(__name__)

CSV_HEADER = "volume_id,dice_gm,dice_wm,dice_csf,weighted"

Segmenter = Callable[[Volume], LabelVolume]
PathLike = Union[str, Path]


def volume_metrics(
    volume_id: str, pred: LabelVolume, truth: LabelVolume
) -> VolumeMetrics:
    """Dice scores and confusion matrix of one volume."""
    cm = confusion_matrix(pred, truth)
    gm, wm, csf, weighted = tissue_dice(cm)
    return VolumeMetrics(
        volume_id=volume_id,
        dice_gm=gm,
        dice_wm=wm,
        dice_csf=csf,
        weighted=weighted,
        confusion=cm.tolist(),
    )


def evaluate_predictions(
    preds: Sequence[LabelVolume],
    truths: Sequence[LabelVolume],
    ids: Optional[Sequence[str]] = None,
) -> EvalReport:
    """Aggregate per-volume metrics.

    Class scores are averaged across volumes and the weighted score is
    computed from those averages. Pooled scores use the summed confusion
    matrix.

    Raises:
        ValidationError: If there are no volumes or the lists differ in length
    """
    if not truths:
        raise ValidationError("Cannot evaluate an empty test set")
    if len(preds) != len(truths):
        raise ValidationError(f"{len(preds)} predictions for {len(truths)} volumes")
    if ids is None:
        ids = [t.provenance or f"volume_{i}" for i, t in enumerate(truths)]

    per_volume: List[VolumeMetrics] = []
    total = np.zeros((4, 4), dtype=np.int64)
    for vid, pred, truth in zip(ids, preds, truths):
        require_model_convention(truth)
        if pred.dims != truth.dims:
            raise ShapeError(f"{vid}: prediction dims {pred.dims} != {truth.dims}")
        m = volume_metrics(vid, pred, truth)
        per_volume.append(m)
        total += np.asarray(m.confusion)
        logger.info(
            f"{vid}: GM {m.dice_gm:.2f} WM {m.dice_wm:.2f} CSF {m.dice_csf:.2f} "
            f"weighted {m.weighted:.2f}"
        )

    gm = float(np.mean([m.dice_gm for m in per_volume]))
    wm = float(np.mean([m.dice_wm for m in per_volume]))
    csf = float(np.mean([m.dice_csf for m in per_volume]))
    pooled_gm, pooled_wm, pooled_csf, pooled_weighted = tissue_dice(total)
    return EvalReport(
        dice_gm=gm,
        dice_wm=wm,
        dice_csf=csf,
        weighted=weighted_dice(gm, wm, csf),
        confusion=total.tolist(),
        pooled=VolumeMetrics(
            volume_id="pooled",
            dice_gm=pooled_gm,
            dice_wm=pooled_wm,
            dice_csf=pooled_csf,
            weighted=pooled_weighted,
            confusion=total.tolist(),
        ),
        per_volume=per_volume,
    )


def evaluate(
    segmenter: Union[LayerGraph, Segmenter],
    volumes: Sequence[Volume],
    truths: Sequence[LabelVolume],
    fusion: Union[Fusion, str] = Fusion.MAJORITY,
    ids: Optional[Sequence[str]] = None,
    batch_size: int = 64,
) -> EvalReport:
    """Segment every test volume and score it against its labels.

    Args:
        segmenter: Trained graph, or any callable mapping a Volume to a
            LabelVolume (used for oracle baselines)
        volumes: Test intensity volumes
        truths: Matching labels in the MODEL convention
        fusion: Overlap fusion when segmenter is a graph
        ids: Volume identifiers for the report
        batch_size: Patches per forward pass

    Returns:
        EvalReport

    Raises:
        ValidationError: If the test set is empty
    """
    if not volumes:
        raise ValidationError("Cannot evaluate an empty test set")
    if len(volumes) != len(truths):
        raise ValidationError(f"{len(volumes)} volumes but {len(truths)} label sets")
    if isinstance(segmenter, LayerGraph):
        graph = segmenter

        def run(vol: Volume) -> LabelVolume:
            return segment_volume(graph, vol, fusion, batch_size)

        segment = run
    else:
        segment = segmenter
    preds = [segment(vol) for vol in volumes]
    return evaluate_predictions(preds, truths, ids)


def report_csv(report: EvalReport) -> str:
    """CSV with one row per volume, then the mean and pooled rows."""
    mean = VolumeMetrics(
        volume_id="mean",
        dice_gm=report.dice_gm,
        dice_wm=report.dice_wm,
        dice_csf=report.dice_csf,
        weighted=report.weighted,
        confusion=report.confusion,
    )
    rows = [m.csv_row() for m in report.per_volume] + [
        mean.csv_row(),
        report.pooled.csv_row(),
    ]
    return "\n".join([CSV_HEADER] + rows) + "\n"


def format_table(report: EvalReport, title: str = "") -> str:
    """Human-readable summary laid out as a per-model results table."""
    width = max([len(title), 8] + [len(m.volume_id) for m in report.per_volume])
    header = f"{'':<{width}} {'GM':>7} {'WM':>7} {'CSF':>7} {'Wt. DC':>7}"

    def line(name: str, gm: float, wm: float, csf: float, wt: float) -> str:
        return f"{name:<{width}} {gm:7.2f} {wm:7.2f} {csf:7.2f} {wt:7.2f}"

    lines = [header]
    for m in report.per_volume:
        lines.append(line(m.volume_id, m.dice_gm, m.dice_wm, m.dice_csf, m.weighted))
    lines.append("-" * len(header))
    lines.append(
        line(
            title or "mean",
            report.dice_gm,
            report.dice_wm,
            report.dice_csf,
            report.weighted,
        )
    )
    p = report.pooled
    lines.append(line("pooled", p.dice_gm, p.dice_wm, p.dice_csf, p.weighted))
    return "\n".join(lines) + "\n"


def write_report(report: EvalReport, out_dir: PathLike, title: str = "") -> List[Path]:
    """Write report.csv and report.txt into a directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "report.csv"
    txt_path = out / "report.txt"
    csv_path.write_text(report_csv(report))
    txt_path.write_text(format_table(report, title))
    logger.info(f"Wrote evaluation report to {csv_path}")
    return [csv_path, txt_path]
