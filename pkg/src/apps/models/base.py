"""
The model contract shared by every span extractor.

A model defines `build_graph`; compiling attaches an optimizer, and
`get_best_answer` turns output distributions back into answer strings.
"""

from abc import ABC, abstractmethod
from collections import deque
from typing import TYPE_CHECKING, Any, Iterable, Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import ShapeError
from src.apps.batching.schemas import Batch
from src.apps.dataset.schemas import DataInstance
from src.apps.evaluation import EvalResult, PredictionSet, SquadEvaluator
from src.apps.layers import Layer, mask_logits
from src.apps.preprocess.schemas import FeatureVocab
from src.tensor import Tensor, no_grad, ops
from .optim import Optimizer, build_optimizer
from .schemas import Mode, ModelConfig, ModelOutput, OptimizerConfig

if TYPE_CHECKING:
    from src.apps.training.schemas import TrainState


def decode_span(
    start_probs: np.ndarray, end_probs: np.ndarray, max_answer_length: int
) -> Tuple[int, int, float]:
    """
    Best (s, e) with s <= e <= s + max_answer_length - 1 by start_prob * end_prob.

    Linear time: a monotone deque keeps the best start inside the window that ends
    at e. Ties go to the earliest end, then the earliest start.
    """
    length = len(start_probs)
    if length == 0:
        return 0, -1, 0.0
    window: deque = deque()
    best = (0, 0, -1.0)
    for e in range(length):
        while window and start_probs[window[-1]] < start_probs[e]:
            window.pop()
        window.append(e)
        if window[0] < e - max_answer_length + 1:
            window.popleft()
        s = window[0]
        score = float(start_probs[s] * end_probs[e])
        if score > best[2]:
            best = (s, e, score)
    return best


class MRCModel(Layer, ABC):
    """
    Base class of the built-in span extractors.

    Subclasses build their layers in __init__ from `config`, the embedding matrix
    and the tag vocabularies, and implement `build_graph`.
    """

    name = "base"

    def __init__(
        self,
        config: ModelConfig,
        embedding: np.ndarray,
        feature_vocab: Optional[FeatureVocab] = None,
    ):
        super().__init__()
        tag_sizes = (
            {f: feature_vocab.size(f) for f in feature_vocab.features} if feature_vocab else {}
        )
        self.config = config.model_copy(
            update={"vocab_size": int(embedding.shape[0]), "tag_sizes": tag_sizes}
        )
        self.rng = np.random.default_rng(config.seed)
        self.optimizer: Optional[Optimizer] = None

    @abstractmethod
    def build_graph(self, batch: Batch, mode: Mode = "train") -> ModelOutput: ...

    def compile(self, optimizer: Optional[OptimizerConfig] = None) -> "MRCModel":
        """
        Attach an optimizer over the trainable parameters.

        Raises:
            ConfigError: If the optimizer name is unknown.
        """
        if optimizer is not None:
            self.config = self.config.model_copy(update={"optimizer": optimizer})
        self.optimizer = build_optimizer(self.config.optimizer, self.trainable_parameters())
        return self

    def make_output(self, start_logits: Tensor, end_logits: Tensor, batch: Batch) -> ModelOutput:
        """Mask padded positions, normalise, and attach the span loss when the batch is labeled."""
        if start_logits.shape != batch.context_mask.shape:
            raise ShapeError(
                f"{self.name}: logits {start_logits.shape} do not match context "
                f"mask {batch.context_mask.shape}"
            )
        start_log_probs = ops.log_softmax(mask_logits(start_logits, batch.context_mask))
        end_log_probs = ops.log_softmax(mask_logits(end_logits, batch.context_mask))
        return ModelOutput(
            start_log_probs=start_log_probs,
            end_log_probs=end_log_probs,
            loss=self.span_loss(start_log_probs, end_log_probs, batch),
        )

    @staticmethod
    def span_loss(
        start_log_probs: Tensor, end_log_probs: Tensor, batch: Batch
    ) -> Optional[Tensor]:
        """Mean over labeled rows of -(log p(start) + log p(end))."""
        rows = np.flatnonzero(batch.span_start >= 0)
        if rows.size == 0:
            return None
        picked_start = start_log_probs[(rows, batch.span_start[rows])]
        picked_end = end_log_probs[(rows, batch.span_end[rows])]
        return -(ops.sum(picked_start) + ops.sum(picked_end)) * (1.0 / rows.size)

    def get_best_answer(self, output: ModelOutput, batch: Batch) -> PredictionSet:
        """Decode each row's best legal span and cut its text from the original context."""
        start_probs = np.exp(output.start_log_probs.data.astype(np.float64))
        end_probs = np.exp(output.end_log_probs.data.astype(np.float64))
        answers: PredictionSet = {}
        for i, qid in enumerate(batch.qids):
            length = int(batch.context_lengths[i])
            s, e, _ = decode_span(
                start_probs[i, :length], end_probs[i, :length], self.config.max_answer_length
            )
            if e < s:
                answers[qid] = ""
                continue
            offsets = batch.context_offsets[i]
            answers[qid] = batch.contexts[i][offsets[s][0] : offsets[e][1]]
        return answers

    def inference(self, batches: Iterable[Batch]) -> PredictionSet:
        predictions: PredictionSet = {}
        with no_grad():
            for batch in batches:
                output = self.build_graph(batch, mode="infer")
                predictions.update(self.get_best_answer(output, batch))
        return predictions

    def evaluate(
        self,
        batches: Iterable[Batch],
        evaluator: SquadEvaluator | Sequence[DataInstance],
    ) -> EvalResult:
        if not isinstance(evaluator, SquadEvaluator):
            evaluator = SquadEvaluator(evaluator)
        return evaluator(self.inference(batches))

    def train_and_evaluate(
        self,
        train_batches: Any,
        dev_batches: Any,
        evaluator: SquadEvaluator | Sequence[DataInstance],
        **trainer_options: Any,
    ) -> "TrainState":
        """
        Run the training loop; see `Trainer` for the options (epochs, eval_every,
        patience, ema_decay, save_dir).
        """
        from src.apps.training.trainer import Trainer

        if self.optimizer is None:
            self.compile()
        if not isinstance(evaluator, SquadEvaluator):
            evaluator = SquadEvaluator(evaluator)
        trainer = Trainer(self, **trainer_options)
        return trainer.train_and_evaluate(train_batches, dev_batches, evaluator)

    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.parameters()))
