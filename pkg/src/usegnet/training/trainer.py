"""Epoch loop, validation and best-checkpoint retention."""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..data.patches import Dataset
from ..exceptions import NumericalError, ValidationError
from ..models.network import Mode
from ..models.training import EpochRecord, OptimConfig
from ..network.checkpoint import load_weights, save_weights
from ..network.graph import LayerGraph
from ..ops import BatchNormParams, softmax_ce
from .optim import TrainState, sgd_step

logger = logging.getLogger(__name__)

HISTORY_HEADER = "epoch,train_loss,val_loss"
INITIAL_CHECKPOINT = "initial.usgn"
BEST_CHECKPOINT = "best.usgn"

PathLike = Union[str, Path]


@dataclass
class FitResult:
    """Outcome of a fit call.

    ``best_epoch`` is 0 when no epoch of this call beat the loss carried in by
    the TrainState, in which case ``best_checkpoint`` is the initial file.
    """

    best_checkpoint: Path
    history: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_loss: float = float("inf")
    history_path: Optional[Path] = None


def _parameter_norms(graph: LayerGraph) -> dict:
    return {
        layer_id: float(np.sqrt(sum(np.sum(a * a) for a in arrays.values())))
        for layer_id, arrays in graph.parameter_store().items()
    }


def _frozen_statistics(
    graph: LayerGraph, cfg: OptimConfig
) -> List[Tuple[BatchNormParams, np.ndarray, np.ndarray]]:
    """Frozen BN layers that already have statistics, with copies of them."""
    return [
        (p, p.running_mean.copy(), p.running_var.copy())
        for layer_id, p in graph.params.items()
        if isinstance(p, BatchNormParams) and p.stats_ready and cfg.is_frozen(layer_id)
    ]


def train_epoch(
    graph: LayerGraph, ds: Dataset, state: TrainState, cfg: OptimConfig
) -> float:
    """Run one shuffled pass over a dataset.

    The shuffle seed is ``cfg.seed + state.epoch`` so every epoch sees a
    different but reproducible order. The final short batch is trained on.
    Frozen BN layers normalize with batch statistics but keep their running
    statistics; a frozen layer without statistics yet still accumulates them.

    Args:
        graph: Graph to train (updated in place)
        ds: Non-empty training dataset
        state: Optimizer state (velocity and epoch counter updated in place)
        cfg: Optimizer settings

    Returns:
        Patch-weighted mean training loss

    Raises:
        ValidationError: If the dataset is empty
        NumericalError: If a loss or activation becomes non-finite; the
            diagnostics carry epoch, batch and parameter norms
    """
    if len(ds) == 0:
        raise ValidationError("Cannot train on an empty dataset")
    epoch = state.epoch + 1
    params = graph.parameter_store()
    frozen_stats = _frozen_statistics(graph, cfg)
    total = 0.0
    batches = ds.batches(cfg.batch_size, cfg.seed + state.epoch)
    for batch, (x, y) in enumerate(batches):
        try:
            result = graph.forward(x, Mode.TRAIN)
            loss, _, grad = softmax_ce(result.logits, y)
            if not math.isfinite(loss):
                raise NumericalError(f"Non-finite loss {loss}", "loss")
            grads = graph.backward(result.cache, grad)
        except NumericalError as e:
            e.diagnostics.update(
                {"epoch": epoch, "batch": batch, "norms": _parameter_norms(graph)}
            )
            logger.error(f"Epoch {epoch} batch {batch}: {e.message}")
            raise
        sgd_step(params, grads, state.velocity, cfg)
        total += loss * x.shape[0]
        logger.debug(f"Epoch {epoch} batch {batch}: loss {loss:.6f}")
    for bn, mean, var in frozen_stats:
        bn.running_mean = mean
        bn.running_var = var
    state.epoch = epoch
    return total / len(ds)


def evaluate_loss(graph: LayerGraph, ds: Dataset, batch_size: int = 64) -> float:
    """Patch-weighted mean loss in inference mode (NaN for an empty dataset)."""
    if len(ds) == 0:
        return float("nan")
    total = 0.0
    for x, y in ds.batches(batch_size):
        loss, _, _ = softmax_ce(graph.forward(x, Mode.INFER).logits, y)
        total += loss * x.shape[0]
    return total / len(ds)


def pixel_accuracy(graph: LayerGraph, ds: Dataset, batch_size: int = 64) -> float:
    """Fraction of patch pixels whose argmax class matches the label."""
    if len(ds) == 0:
        return float("nan")
    correct = 0
    for x, y in ds.batches(batch_size):
        pred = graph.forward(x, Mode.INFER).probabilities.argmax(axis=1)
        correct += int((pred == y).sum())
    return correct / ds.labels.size


def write_history(records: List[EpochRecord], path: PathLike) -> Path:
    """Write the history CSV (header plus one row per epoch)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [HISTORY_HEADER] + [r.csv_row() for r in records]
    path.write_text("\n".join(lines) + "\n")
    return path


def fit(
    graph: LayerGraph,
    train_ds: Dataset,
    val_ds: Dataset,
    cfg: OptimConfig,
    checkpoint_dir: PathLike,
    history_path: Optional[PathLike] = None,
    state: Optional[TrainState] = None,
) -> FitResult:
    """Train for up to cfg.max_epochs and keep the best checkpoint.

    The initial weights are saved first. After every epoch the validation
    loss is computed in inference mode and the checkpoint is replaced when it
    improves; with an empty validation set the training loss is used instead.
    On return the graph holds the best weights.

    Args:
        graph: Graph to train
        train_ds: Training patches
        val_ds: Validation patches from other volumes
        cfg: Optimizer settings
        checkpoint_dir: Directory for initial.usgn and best.usgn
        history_path: History CSV (defaults to checkpoint_dir/history.csv)
        state: Optimizer state to continue from (fresh when omitted)

    Returns:
        FitResult naming the best checkpoint and the epoch history
    """
    checkpoint_dir = Path(checkpoint_dir)
    history_file = (
        Path(history_path) if history_path else checkpoint_dir / "history.csv"
    )
    state = state or TrainState.for_graph(graph)
    initial = save_weights(graph, checkpoint_dir / INITIAL_CHECKPOINT)
    result = FitResult(best_checkpoint=initial, history_path=history_file)
    write_history(result.history, history_file)
    if cfg.max_epochs == 0:
        logger.info("max_epochs is 0; returning the initial weights")
        return result

    use_val = len(val_ds) > 0
    if not use_val:
        logger.warning("Validation set is empty; selecting checkpoints on train loss")
    best_path = checkpoint_dir / BEST_CHECKPOINT
    start_epoch = state.epoch

    for _ in range(cfg.max_epochs):
        train_loss = train_epoch(graph, train_ds, state, cfg)
        val_loss = evaluate_loss(graph, val_ds, cfg.batch_size)
        record = EpochRecord(
            epoch=state.epoch, train_loss=train_loss, val_loss=val_loss
        )
        result.history.append(record)
        write_history(result.history, history_file)

        score = val_loss if use_val else train_loss
        if not math.isfinite(score):
            raise NumericalError(
                f"Non-finite selection loss at epoch {state.epoch}",
                diagnostics={"epoch": state.epoch},
            )
        improved = score < state.best_loss
        if improved:
            state.best_loss = score
            state.best_epoch = state.epoch
            result.best_checkpoint = save_weights(graph, best_path)
        logger.info(
            f"Epoch {state.epoch}/{cfg.max_epochs}: train {train_loss:.6f} "
            f"val {val_loss:.6f}{' *' if improved else ''}"
        )

    if state.best_epoch > start_epoch:
        result.best_epoch = state.best_epoch
    result.best_loss = state.best_loss
    load_weights(graph, result.best_checkpoint)
    if result.best_epoch == 0:
        logger.info(
            f"No epoch improved on loss {state.best_loss:.6f}; kept the initial weights"
        )
    else:
        logger.info(
            f"Best epoch {result.best_epoch} (loss {result.best_loss:.6f}) "
            f"restored from {result.best_checkpoint}"
        )
    return result
