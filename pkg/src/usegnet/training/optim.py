"""Momentum SGD with L2 and per-layer freezing."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..exceptions import ShapeError, ValidationError
from ..models.network import LayerKind
from ..models.training import OptimConfig
from ..network.graph import LayerGraph

logger = logging.getLogger(__name__)

ParamStore = Dict[str, Dict[str, np.ndarray]]


@dataclass
class TrainState:
    """Mutable optimizer state carried across epochs.

    ``velocity`` mirrors the parameter store; ``epoch`` counts completed
    epochs.
    """

    velocity: ParamStore
    epoch: int = 0
    best_loss: float = float("inf")
    best_epoch: int = 0

    @classmethod
    def for_graph(cls, graph: LayerGraph) -> "TrainState":
        """Zero velocity for every learnable array of a graph."""
        return cls(zero_velocity(graph.parameter_store()))


def zero_velocity(params: ParamStore) -> ParamStore:
    """Zero buffers shaped like a parameter store."""
    return {
        layer_id: {name: np.zeros_like(arr) for name, arr in arrays.items()}
        for layer_id, arrays in params.items()
    }


def sgd_step(
    params: ParamStore,
    grads: ParamStore,
    velocity: ParamStore,
    cfg: OptimConfig,
) -> None:
    """Apply one momentum step in place.

    For every unfrozen array: ``g' = g + l2 * w``, ``v = momentum * v - lr * g'``,
    ``w = w + v``. Frozen layers keep both weights and velocity.

    Args:
        params: Layer id -> name -> weights (updated in place)
        grads: Matching gradients
        velocity: Matching velocity buffers (updated in place)
        cfg: Optimizer settings

    Raises:
        ShapeError: If any gradient or velocity shape differs from its weights
    """
    for layer_id, arrays in params.items():
        if cfg.is_frozen(layer_id):
            continue
        for name, w in arrays.items():
            g = grads[layer_id][name]
            v = velocity[layer_id][name]
            if g.shape != w.shape or v.shape != w.shape:
                raise ShapeError(
                    f"{layer_id}.{name}: weights {w.shape}, gradient {g.shape}, "
                    f"velocity {v.shape}"
                )
            v *= cfg.momentum
            v -= cfg.learning_rate * (g + cfg.l2 * w)
            w += v


def apply_freeze_schedule(
    cfg: OptimConfig, graph: LayerGraph, stage: Optional[Sequence[str]] = None
) -> OptimConfig:
    """Return a config that trains exactly the listed layers.

    Args:
        cfg: Base configuration
        graph: Graph the layer ids refer to
        stage: Parametric layer ids to unfreeze; None unfreezes all

    Returns:
        Copy of cfg with a freeze mask covering every parametric layer

    Raises:
        ValidationError: If a listed id is not a parametric layer of the graph
    """
    parametric = [spec.id for spec in graph.parametric_layers()]
    if stage is None:
        stage = parametric
    unknown = sorted(set(stage) - set(parametric))
    if unknown:
        raise ValidationError(f"Unknown parametric layers in freeze stage: {unknown}")
    active = set(stage)
    mask = {layer_id: layer_id not in active for layer_id in parametric}
    logger.debug(f"Freeze stage trains {sorted(active)}")
    return cfg.model_copy(update={"freeze_mask": mask})


def sequential_schedule(graph: LayerGraph) -> List[List[str]]:
    """Stages for tuning one layer at a time, starting from the last.

    Each convolution forms a stage together with the BN layer that follows
    it, so every parametric layer appears in exactly one stage.
    """
    groups: List[List[str]] = []
    for spec in graph.parametric_layers():
        if spec.kind is LayerKind.BN and groups:
            groups[-1].append(spec.id)
        else:
            groups.append([spec.id])
    groups.reverse()
    return groups
