"""Evaluation report models."""

from typing import List

from pydantic import BaseModel, ConfigDict, Field


class VolumeMetrics(BaseModel):
    """Dice scores of one segmented volume (percentages)."""

    model_config = ConfigDict(frozen=True)

    volume_id: str = Field(..., description="Volume identifier")
    dice_gm: float = Field(..., ge=0.0, le=100.0)
    dice_wm: float = Field(..., ge=0.0, le=100.0)
    dice_csf: float = Field(..., ge=0.0, le=100.0)
    weighted: float = Field(..., ge=0.0, le=100.0)
    confusion: List[List[int]] = Field(
        ..., description="4x4 counts, entry [t][p] = truth t predicted p"
    )

    def csv_row(self) -> str:
        """Render as a ``volume_id,dice_gm,dice_wm,dice_csf,weighted`` line."""
        return (
            f"{self.volume_id},{self.dice_gm:.4f},{self.dice_wm:.4f},"
            f"{self.dice_csf:.4f},{self.weighted:.4f}"
        )


class EvalReport(BaseModel):
    """Aggregated test-set evaluation.

    Class scores are the unweighted means of the per-volume scores; the
    weighted score is computed from those means. ``pooled`` holds the same
    metrics over the summed confusion matrix.
    """

    model_config = ConfigDict(frozen=True)

    dice_gm: float = Field(..., ge=0.0, le=100.0)
    dice_wm: float = Field(..., ge=0.0, le=100.0)
    dice_csf: float = Field(..., ge=0.0, le=100.0)
    weighted: float = Field(..., ge=0.0, le=100.0)
    confusion: List[List[int]] = Field(..., description="Summed 4x4 counts")
    pooled: VolumeMetrics
    per_volume: List[VolumeMetrics] = Field(default_factory=list)
