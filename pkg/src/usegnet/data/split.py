"""Train/validation/test partition of volume ids."""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from ..exceptions import ValidationError

logger = logging.getLogger(__name__)


def split_volumes(
    ids: Sequence[str], train: int, val: int, test: int, seed: int = 0
) -> Tuple[List[str], List[str], List[str]]:
    """Shuffle ids deterministically and cut them into three groups.

    Args:
        ids: Volume identifiers (unique)
        train: Number of training volumes
        val: Number of validation volumes
        test: Number of test volumes
        seed: Shuffle seed

    Returns:
        (train_ids, val_ids, test_ids), disjoint and exhaustive

    Raises:
        ValidationError: If the counts do not add up to len(ids), a count is
            negative or the ids contain duplicates
    """
    ids = list(ids)
    if min(train, val, test) < 0:
        raise ValidationError(f"Split counts must be >= 0, got {(train, val, test)}")
    if train + val + test != len(ids):
        raise ValidationError(
            f"Split counts {train}+{val}+{test} do not match {len(ids)} volumes"
        )
    if len(set(ids)) != len(ids):
        raise ValidationError("Volume ids must be unique")

    order = np.random.default_rng(seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    parts = (
        shuffled[:train],
        shuffled[train : train + val],
        shuffled[train + val :],
    )
    logger.info(
        f"Split {len(ids)} volumes into {train} train / {val} val / {test} test "
        f"(seed {seed})"
    )
    return parts
