"""
Trainer - Seeded mini-batch training with early stopping on validation F1.
"""

import json
import logging
import math
import random
import time
from pathlib import Path

from patchsem.autodiff import Graph
from patchsem.core.exceptions import PatchSemError
from patchsem.models import ModelParams, batch_loss, init_params, score_records
from patchsem.schemas.config import ModelConfig, TrainConfig
from patchsem.schemas.patch import EncodedPatch
from patchsem.schemas.training import EpochRecord, TrainHistory

from .metrics import report
from .optimizers import AdamState, optimizer_step

logger = logging.getLogger(__name__)


class DegenerateDataset(PatchSemError):
    """Raised when the training set is empty or holds a single class."""

    pass


class DivergedLoss(PatchSemError):
    """Raised when a batch loss is not finite."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


def _check_trainable(train_set: list[EncodedPatch]) -> None:
    if not train_set:
        raise DegenerateDataset("training set is empty")
    labels = {enc.label for enc in train_set}
    if len(labels) < 2:
        raise DegenerateDataset(f"training set holds only label {labels.pop()}; both classes are required")


def train(
    train_set: list[EncodedPatch],
    valid_set: list[EncodedPatch] | None,
    model_config: ModelConfig,
    train_config: TrainConfig,
) -> tuple[ModelParams, TrainHistory]:
    """
    Train from a fresh seeded initialization.

    Each epoch shuffles the training set with a seeded generator, takes one
    optimizer step per batch on the mean batch loss and scores the
    validation set (the training set when none is given).

    Returns:
        The parameters of the epoch with the best validation F1 (earliest on
        ties) and the per-epoch history. With max_epochs = 0 the initial
        parameters and an empty history.

    Raises:
        DegenerateDataset: On an empty or single-class training set
        DivergedLoss: On a non-finite batch loss
    """
    _check_trainable(train_set)
    params = init_params(model_config, seed=train_config.seed)
    history = TrainHistory()
    if train_config.max_epochs == 0:
        logger.info("max_epochs = 0: returning the initial parameters")
        return params, history

    evaluation_set = valid_set if valid_set else train_set
    if not valid_set:
        logger.info("No validation set: validating on the training set")

    rng = random.Random(train_config.seed)
    state: AdamState | None = None
    best_params = params.clone()
    best_f1 = -1.0
    best_loss = math.inf
    stale = 0
    order = list(range(len(train_set)))

    for epoch in range(1, train_config.max_epochs + 1):
        started = time.perf_counter()
        rng.shuffle(order)
        total = 0.0
        for start in range(0, len(order), train_config.batch_size):
            batch = [train_set[i] for i in order[start : start + train_config.batch_size]]
            params.zero_grad()
            with Graph() as graph:
                value = batch_loss(batch, params)
            if not math.isfinite(value.item()):
                raise DivergedLoss(f"non-finite loss {value.item()} in epoch {epoch}", epoch=epoch)
            if value.graph is graph:
                graph.backward(value)
            state = optimizer_step(params, state, train_config)
            total += value.item() * len(batch)

        mean_loss = total / len(train_set)
        best_loss = min(best_loss, mean_loss)
        scores = score_records(params, evaluation_set, workers=train_config.workers)
        validation = report(scores, [enc.label for enc in evaluation_set], train_config.threshold)
        improved = validation.f1 > best_f1
        if improved:
            best_f1 = validation.f1
            best_params = params.clone()
            history.best_epoch = epoch
        history.epochs.append(
            EpochRecord(
                epoch=epoch,
                mean_loss=mean_loss,
                best_loss=best_loss,
                best_f1=best_f1,
                validation=validation,
                seconds=time.perf_counter() - started,
            )
        )
        logger.info(
            "epoch %d: loss %.6f (best %.6f), validation F1 %.4f", epoch, mean_loss, best_loss, validation.f1
        )

        if improved:
            stale = 0
        else:
            stale += 1
            if stale >= train_config.early_stop_patience:
                history.stopped_early = True
                logger.info("Early stop after epoch %d; best epoch %d", epoch, history.best_epoch)
                break

    return best_params, history


def write_history(path: Path | str, history: TrainHistory, config_echo: str) -> None:
    """
    JSON Lines: a leading {"config": ...} record, then one record per epoch
    and a closing {"summary": ...} record.
    """
    path = Path(path)
    lines = [json.dumps({"config": json.loads(config_echo)}, sort_keys=True)]
    for record in history.epochs:
        lines.append(record.model_dump_json())
    summary = {
        "best_epoch": history.best_epoch,
        "stopped_early": history.stopped_early,
        "epochs": len(history.epochs),
    }
    lines.append(json.dumps({"summary": summary}, sort_keys=True))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("Wrote training history to %s", path)
