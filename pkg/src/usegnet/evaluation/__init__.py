"""Whole-volume segmentation, Dice metrics, reports and overlays."""

from .metrics import (
    confusion_matrix,
    dice_per_class,
    tissue_dice,
    weighted_dice,
)
from .overlay import PALETTE, export_overlay
from .report import (
    evaluate,
    evaluate_predictions,
    format_table,
    report_csv,
    volume_metrics,
    write_report,
)
from .segment import Fusion, VoteGrid, segment_volume

__all__ = [
    "PALETTE",
    "Fusion",
    "VoteGrid",
    "confusion_matrix",
    "dice_per_class",
    "evaluate",
    "evaluate_predictions",
    "export_overlay",
    "format_table",
    "report_csv",
    "segment_volume",
    "tissue_dice",
    "volume_metrics",
    "weighted_dice",
    "write_report",
]
