"""
Tests for the built-in span extractors and the shared model contract.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.exceptions import ConfigError, ShapeError
from src.apps.batching import collate, make_batches
from src.apps.models import BiDAF, DrQA, ModelConfig, OptimizerConfig, get_model_class
from src.apps.preprocess import TAG_PAD_INDEX, extract_all
from src.apps.training import Trainer
from src.tensor import Tensor, backward

MODEL_NAMES = ["bidaf", "drqa"]


class TestModels:
    """
    Tests cover:
    - Output distributions and loss for both architectures
    - Padding invariance, empty questions and the untrained loss level
    - Gradient flow to every trainable parameter
    - Deterministic construction and inference
    - Registry and configuration validation
    """

    @pytest.fixture(autouse=True)
    def setup_data(self, toy_data, tiny_model, make_instance):
        self.instances, self.vocab, self.feature_vocab = toy_data
        self.tiny_model = tiny_model
        self.make_instance = make_instance
        self.batch = collate(self.instances[:4], self.vocab, self.feature_vocab)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_output_distributions(self, name):
        """
        Verifies that:
        - Start and end log-probabilities are [B, T]
        - Each row is a distribution over real context positions
        - The loss is a finite positive scalar
        """
        output = self.tiny_model(name).build_graph(self.batch, mode="eval")
        B, T = self.batch.context_ids.shape
        assert output.start_log_probs.shape == (B, T)
        assert output.end_log_probs.shape == (B, T)
        probs = np.exp(output.start_log_probs.data.astype(np.float64))
        np.testing.assert_allclose(probs.sum(axis=1), np.ones(B), rtol=1e-5)
        assert output.loss.size == 1
        assert np.isfinite(output.loss.item()) and output.loss.item() > 0

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_loss_is_span_nll(self, name):
        """
        Verifies that:
        - The loss equals the mean of -(log p(start) + log p(end)) over the batch
        """
        output = self.tiny_model(name).build_graph(self.batch, mode="eval")
        rows = np.arange(self.batch.size)
        expected = -np.mean(
            output.start_log_probs.data[rows, self.batch.span_start]
            + output.end_log_probs.data[rows, self.batch.span_end]
        )
        assert output.loss.item() == pytest.approx(float(expected), rel=1e-5)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_padded_positions_are_impossible(self, name):
        """
        Verifies that:
        - Positions past a context's length get probability 0
        """
        short = extract_all([self.make_instance("Ivo lives in Oslo .", "Where does Ivo live ?", "Oslo")])
        batch = collate(short + self.instances[:1], self.vocab, self.feature_vocab)
        output = self.tiny_model(name).build_graph(batch, mode="eval")
        assert np.all(np.exp(output.start_log_probs.data[0, 5:].astype(np.float64)) == 0.0)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_repadding_leaves_real_positions_unchanged(self, name):
        """
        Verifies that:
        - Padding a batch to longer contexts and questions changes neither the
          log-probabilities at real positions nor the loss
        """
        short = extract_all([self.make_instance("Ivo lives in Oslo .", "Where does Ivo live ?", "Oslo")])
        batch = collate(short + self.instances[:3], self.vocab, self.feature_vocab)

        def pad(array: np.ndarray, extra: int, value: int = 0) -> np.ndarray:
            widths = [(0, 0)] * array.ndim
            widths[1] = (0, extra)
            return np.pad(array, widths, constant_values=value)

        padded = batch.model_copy(
            update=dict(
                context_ids=pad(batch.context_ids, 4),
                question_ids=pad(batch.question_ids, 3),
                context_mask=pad(batch.context_mask, 4),
                question_mask=pad(batch.question_mask, 3),
                tf=pad(batch.tf, 4),
                exact_match=pad(batch.exact_match, 4),
                tags={f: pad(v, 4, TAG_PAD_INDEX) for f, v in batch.tags.items()},
            )
        )
        model = self.tiny_model(name)
        before = model.build_graph(batch, mode="eval")
        after = model.build_graph(padded, mode="eval")
        T = batch.context_ids.shape[1]
        real = batch.context_mask > 0
        for field in ("start_log_probs", "end_log_probs"):
            np.testing.assert_allclose(
                getattr(after, field).data[:, :T][real],
                getattr(before, field).data[real],
                atol=1e-5,
            )
        assert after.loss.item() == pytest.approx(before.loss.item(), abs=1e-5)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_empty_question(self, name):
        """
        Verifies that:
        - A batch whose only question has no tokens yields a distribution and a loss
        - Inference returns a span of the context
        - Backpropagation runs through the empty question branch
        """
        context = "Ivo lives in Oslo ."
        empty = extract_all([self.make_instance(context, "", "Oslo", qid="empty")])
        batch = collate(empty, self.vocab, self.feature_vocab)
        assert batch.question_ids.shape == (1, 0)

        model = self.tiny_model(name)
        output = model.build_graph(batch, mode="eval")
        probs = np.exp(output.start_log_probs.data.astype(np.float64))
        np.testing.assert_allclose(probs.sum(axis=1), [1.0], rtol=1e-5)
        assert np.isfinite(output.loss.item())
        assert model.inference([batch])["empty"] in context

        backward(model.build_graph(batch, mode="train").loss)
        assert np.all(np.isfinite(model.embedding.weight.grad))

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_initial_loss_near_uniform(self, name):
        """
        Verifies that:
        - An untrained model's loss is within 15% of the uniform-span baseline
          mean(2 ln T) over the batch
        """
        batch = collate(self.instances, self.vocab, self.feature_vocab)
        loss = self.tiny_model(name).build_graph(batch, mode="eval").loss.item()
        baseline = float(np.mean(2.0 * np.log(batch.context_lengths)))
        assert abs(loss - baseline) / baseline < 0.15

    def test_unlabeled_batch_has_no_loss(self):
        """
        Verifies that:
        - A batch without span labels yields log-probabilities but no loss
        """
        unlabeled = extract_all([self.make_instance("Ivo lives in Oslo .", "Where ?")])
        batch = collate(unlabeled, self.vocab, self.feature_vocab)
        assert self.tiny_model("drqa").build_graph(batch, mode="infer").loss is None

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_gradients_reach_parameters(self, name):
        """
        Verifies that:
        - Backpropagating the loss gives every trainable parameter a gradient
        - The PAD embedding row receives none
        """
        model = self.tiny_model(name)
        backward(model.build_graph(self.batch, mode="train").loss)
        for param_name, p in model.trainable_parameters():
            assert p.grad is not None, param_name
            assert np.all(np.isfinite(p.grad)), param_name
        assert np.all(model.embedding.weight.grad[0] == 0.0)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_deterministic_construction(self, name):
        """
        Verifies that:
        - Two models built from the same config have identical parameters
        - A different seed changes them
        """
        first = self.tiny_model(name).state_dict()
        second = self.tiny_model(name).state_dict()
        assert first.keys() == second.keys()
        for key in first:
            np.testing.assert_array_equal(first[key], second[key])
        other = self.tiny_model(name, seed=1).state_dict()
        assert any(not np.array_equal(first[k], other[k]) for k in first)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_inference(self, name):
        """
        Verifies that:
        - Every question gets a prediction
        - Each prediction is a substring of its context
        - Inference with dropout configured is deterministic
        """
        model = self.tiny_model(name, dropout=0.3)
        batches = list(make_batches(self.instances, self.vocab, self.feature_vocab, batch_size=6))
        predictions = model.inference(batches)
        assert set(predictions) == {i.qid for i in self.instances}
        for instance in self.instances:
            assert predictions[instance.qid] in instance.context
        assert model.inference(batches) == predictions

    def test_drqa_feature_switches(self):
        """
        Verifies that:
        - Turning off the hand features shrinks the context encoder input
        """
        full = self.tiny_model("drqa")
        bare = self.tiny_model(
            "drqa", use_tf=False, use_exact_match=False, use_tags=False, use_aligned_question=False
        )
        assert full.context_rnn.layers[0].input_size == 6 + 6 + 1 + 3 + 2
        assert bare.context_rnn.layers[0].input_size == 6
        assert bare.build_graph(self.batch, mode="eval").loss is not None

    def test_bidaf_similarity_choice(self):
        """
        Verifies that:
        - BiDAF runs with each similarity scorer
        - An unknown scorer raises ConfigError
        """
        for kind in ("dot_product", "mlp"):
            assert self.tiny_model("bidaf", similarity=kind).build_graph(self.batch).loss is not None
        with pytest.raises(ConfigError):
            self.tiny_model("bidaf", similarity="cosine")

    def test_make_output_shape_check(self):
        """
        Verifies that:
        - Logits that do not match the context mask raise ShapeError
        """
        model = self.tiny_model()
        logits = Tensor(np.zeros((self.batch.size, 2)))
        with pytest.raises(ShapeError):
            model.make_output(logits, logits, self.batch)

    def test_registry(self):
        """
        Verifies that:
        - Model classes are found case-insensitively
        - An unknown name raises ConfigError
        """
        assert get_model_class("BiDAF") is BiDAF
        assert get_model_class("drqa") is DrQA
        with pytest.raises(ConfigError):
            get_model_class("qanet")

    def test_config(self):
        """
        Verifies that:
        - The architecture hash ignores optimizer settings
        - It changes with anything that shapes the parameters
        - Invalid dropout and unknown keys are rejected
        """
        base = ModelConfig(hidden_size=8)
        tuned = ModelConfig(hidden_size=8, optimizer=OptimizerConfig(learning_rate=0.5))
        assert base.architecture_hash() == tuned.architecture_hash()
        assert base.architecture_hash() != ModelConfig(hidden_size=9).architecture_hash()
        with pytest.raises(ValidationError):
            ModelConfig(dropout=1.0)
        with pytest.raises(ValidationError):
            ModelConfig(hidden=3)

    def test_compile(self):
        """
        Verifies that:
        - compile attaches an optimizer over the trainable parameters
        - An unknown optimizer raises ConfigError
        """
        model = self.tiny_model().compile(OptimizerConfig(name="sgd", learning_rate=0.1))
        assert len(model.optimizer.parameters) == len(model.trainable_parameters())
        with pytest.raises(ConfigError):
            model.compile(OptimizerConfig(name="lion"))


@pytest.mark.slow
class TestTrainability:
    """
    Tests cover:
    - Both models fitting the toy corpus, in loss and in exact match
    """

    @pytest.fixture(autouse=True)
    def setup_data(self, toy_data, tiny_model):
        self.instances, self.vocab, self.feature_vocab = toy_data
        self.tiny_model = tiny_model

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_loss_decreases(self, name):
        """
        Verifies that:
        - The mean training loss of the last epoch is well below the first
        """
        model = self.tiny_model(name, hidden_size=8).compile(
            OptimizerConfig(learning_rate=0.02, clip_norm=5.0)
        )
        trainer = Trainer(model, ema_decay=None, seed=0, show_progress=False)
        batches = list(make_batches(self.instances, self.vocab, self.feature_vocab, batch_size=5))
        epoch_losses = []
        for _ in range(25):
            losses = [trainer.train_step(batch) for batch in batches]
            epoch_losses.append(float(np.mean(losses)))
        assert epoch_losses[-1] < 0.7 * epoch_losses[0]

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_reaches_full_exact_match(self, name):
        """
        Verifies that:
        - Each model fits the toy corpus to 100 exact match within 150 epochs
        """
        model = self.tiny_model(name, hidden_size=8).compile(
            OptimizerConfig(learning_rate=0.02, clip_norm=5.0)
        )
        trainer = Trainer(model, ema_decay=None, seed=0, show_progress=False)
        batches = list(make_batches(self.instances, self.vocab, self.feature_vocab, batch_size=5))
        dev = list(make_batches(self.instances, self.vocab, self.feature_vocab, batch_size=20))
        exact_match = 0.0
        for _ in range(150):
            for batch in batches:
                trainer.train_step(batch)
            exact_match = model.evaluate(dev, self.instances).exact_match
            if exact_match == 100.0:
                break
        assert exact_match == 100.0
