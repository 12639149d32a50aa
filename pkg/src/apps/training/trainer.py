"""
Trainer: the epoch loop with evaluation, early stopping, EMA and checkpointing.
"""

import contextlib
import math
from pathlib import Path
from typing import Any, Iterable, Optional

from tqdm import tqdm

from src.core.config import settings
from src.core.exceptions import NumericError
from src.core.logging import get_logger
from src.apps.batching.schemas import Batch
from src.apps.evaluation import EvalResult, SquadEvaluator
from src.apps.models.base import MRCModel
from src.apps.models.optim import clip_grad_norm
from src.tensor import backward
from .checkpoint import load_checkpoint, save_checkpoint
from .ema import ExponentialMovingAverage
from .schemas import BestMetric, Checkpoint, SummaryEvent, TrainState
from .summary import SummaryWriter

logger = get_logger(__name__, settings.LOG_LEVEL)

BEST_CHECKPOINT = "best.ckpt"
LAST_CHECKPOINT = "last.ckpt"
SUMMARY_FILE = "summary.jsonl"


def snapshot(
    model: MRCModel,
    ema: Optional[ExponentialMovingAverage] = None,
    state: Optional[TrainState] = None,
) -> Checkpoint:
    return Checkpoint(
        config_hash=model.config.architecture_hash(),
        model_config_data=model.config.model_dump(mode="json"),
        parameters=model.state_dict(),
        ema=ema.state_dict() if ema is not None else None,
        optimizer=model.optimizer.state_dict() if model.optimizer is not None else None,
        train_state=state.model_copy(deep=True) if state is not None else None,
    )


def restore_weights(model: MRCModel, checkpoint: Checkpoint, use_ema: bool = True) -> None:
    """Load parameters, replacing trainable ones by their EMA shadow when asked and present."""
    parameters = dict(checkpoint.parameters)
    if use_ema and checkpoint.ema:
        parameters.update(checkpoint.ema)
    model.load_state_dict(parameters)


class Trainer:
    """
    Runs `epochs` passes over the training batches.

    After every `eval_every` epochs the model is scored on the dev batches with
    EMA weights swapped in. An improvement (higher F1, or equal F1 and higher
    EM) resets the patience counter and rewrites best.ckpt; `patience`
    evaluations in a row without one stop the run. last.ckpt is rewritten at the
    end of every epoch so `resume` can continue an interrupted run.
    """

    def __init__(
        self,
        model: MRCModel,
        epochs: int = 10,
        eval_every: int = 1,
        patience: Optional[int] = None,
        ema_decay: Optional[float] = 0.999,
        save_dir: Optional[str | Path] = None,
        seed: Optional[int] = None,
        show_progress: bool = settings.SHOW_PROGRESS,
    ):
        if model.optimizer is None:
            model.compile()
        self.model = model
        self.epochs = epochs
        self.eval_every = max(eval_every, 1)
        self.patience = patience
        self.ema = (
            ExponentialMovingAverage(model.trainable_parameters(), ema_decay)
            if ema_decay is not None
            else None
        )
        self.save_dir = Path(save_dir) if save_dir is not None else None
        self.summary = SummaryWriter(self.save_dir / SUMMARY_FILE) if self.save_dir else None
        self.state = TrainState(seed=model.config.seed if seed is None else seed)
        self.show_progress = show_progress

    @property
    def optimizer(self):
        return self.model.optimizer

    def _log_event(self, event: SummaryEvent) -> None:
        if self.summary is not None:
            self.summary.write(event)

    def train_step(self, batch: Batch) -> Optional[float]:
        """
        One forward/backward/update on a batch; returns the loss, or None for a batch
        without span labels.

        Raises:
            NumericError: If the loss or the gradient norm is not finite.
        """
        self.model.reseed(self.state.seed, self.state.global_step)
        self.optimizer.zero_grad()
        output = self.model.build_graph(batch, mode="train")
        if output.loss is None:
            return None
        loss = output.loss.item()
        backward(output.loss)
        grad_norm = clip_grad_norm(
            self.optimizer.parameters, self.model.config.optimizer.clip_norm
        )
        lr = self.optimizer.learning_rate
        if not (math.isfinite(loss) and math.isfinite(grad_norm)):
            raise NumericError(
                "Training diverged",
                {"step": self.state.global_step, "lr": lr, "grad_norm": grad_norm, "loss": loss},
            )
        self.optimizer.step()
        if self.ema is not None:
            self.ema.update()
        self.state.global_step += 1
        self._log_event(
            SummaryEvent(
                step=self.state.global_step,
                epoch=self.state.epoch + 1,
                loss=loss,
                lr=lr,
                grad_norm=grad_norm,
            )
        )
        return loss

    def evaluate(self, dev_batches: Iterable[Batch], evaluator: SquadEvaluator) -> EvalResult:
        averaged = self.ema.average_parameters() if self.ema else contextlib.nullcontext()
        with averaged:
            return self.model.evaluate(dev_batches, evaluator)

    def _epoch_batches(self, train_batches: Any, epoch: int) -> Iterable[Batch]:
        if hasattr(train_batches, "epoch"):
            return train_batches.epoch(epoch)
        return train_batches

    def _save(self, name: str) -> None:
        if self.save_dir is not None:
            save_checkpoint(self.save_dir / name, snapshot(self.model, self.ema, self.state))

    def train_and_evaluate(
        self,
        train_batches: Any,
        dev_batches: Iterable[Batch],
        evaluator: SquadEvaluator,
    ) -> TrainState:
        """
        Args:
            train_batches: A BatchGenerator (epoch k uses `epoch(k)`) or a re-iterable
                sequence of batches.
            dev_batches: Re-iterable dev batches.
            evaluator: Scorer built from the dev instances.

        Returns:
            The final TrainState.
        """
        schedule = self.optimizer.schedule
        if schedule.decay is not None and schedule.decay_steps is None:
            schedule.decay_steps = max(len(train_batches), 1)

        while self.state.epoch < self.epochs:
            epoch = self.state.epoch
            losses = []
            batches = tqdm(
                self._epoch_batches(train_batches, epoch),
                desc=f"Epoch {epoch + 1}/{self.epochs}",
                disable=not self.show_progress,
                leave=False,
            )
            for batch in batches:
                loss = self.train_step(batch)
                if loss is not None:
                    losses.append(loss)
            self.state.epoch += 1
            mean_loss = sum(losses) / len(losses) if losses else float("nan")
            logger.info(f"Epoch {self.state.epoch}: loss {mean_loss:.2f}")

            if self.state.epoch % self.eval_every == 0:
                self._evaluate_and_track(dev_batches, evaluator)
            self._save(LAST_CHECKPOINT)

            if self.patience is not None and self.state.patience_counter >= self.patience:
                self.state.stopped_early = True
                logger.info(
                    f"Stopping after {self.state.patience_counter} evaluations without improvement"
                )
                break

        if self.state.best is not None:
            logger.info(
                f"Best dev F1 {self.state.best.value:.2f} / EM {self.state.best.exact_match:.2f} "
                f"at epoch {self.state.best.epoch}"
            )
        return self.state

    def _evaluate_and_track(self, dev_batches: Iterable[Batch], evaluator: SquadEvaluator) -> None:
        result = self.evaluate(dev_batches, evaluator)
        self.state.evaluations += 1
        self._log_event(
            SummaryEvent(
                step=self.state.global_step,
                epoch=self.state.epoch,
                em=result.exact_match,
                f1=result.f1,
            )
        )
        logger.info(f"Epoch {self.state.epoch}: {result.summary()}")
        if self.state.is_improvement(result):
            self.state.best = BestMetric(
                value=result.f1,
                exact_match=result.exact_match,
                epoch=self.state.epoch,
                step=self.state.global_step,
            )
            self.state.patience_counter = 0
            self._save(BEST_CHECKPOINT)
        else:
            self.state.patience_counter += 1

    def resume(self, path: str | Path) -> TrainState:
        """
        Continue from a checkpoint written by this trainer.

        Raises:
            ConfigMismatchError: If the checkpoint was written for another architecture.
        """
        checkpoint = load_checkpoint(path, self.model.config.architecture_hash())
        self.model.load_state_dict(checkpoint.parameters)
        if self.ema is not None and checkpoint.ema is not None:
            self.ema.load_state_dict(checkpoint.ema)
        if checkpoint.optimizer is not None:
            self.optimizer.load_state_dict(checkpoint.optimizer)
        if checkpoint.train_state is not None:
            self.state = checkpoint.train_state.model_copy(deep=True)
        if self.summary is not None:
            self.summary.truncate_after(self.state.global_step)
        logger.info(
            f"Resumed from {path} at epoch {self.state.epoch}, step {self.state.global_step}"
        )
        return self.state
