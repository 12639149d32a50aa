"""
Batch Generator: index mapping, dynamic padding, shuffling and bucketing.
"""

import math
import queue
import threading
from typing import Any, Iterable, Iterator, List, Optional, Sequence

import numpy as np

from src.core.config import settings
from src.core.logging import get_logger
from src.apps.dataset.schemas import DataInstance
from src.apps.preprocess.schemas import FeatureVocab, TAG_PAD_INDEX
from src.apps.preprocess.vocabulary import PAD_INDEX, Vocabulary
from src.tensor import get_default_dtype
from .schemas import Batch

logger = get_logger(__name__, settings.LOG_LEVEL)

Seed = int | Sequence[int]


def index_map(tokens: Sequence[str], vocab: Vocabulary) -> List[int]:
    """Map tokens to vocabulary ids; unknown tokens map to UNK."""
    return [vocab.lookup(token) for token in tokens]


def _pad(rows: List[List[int]], width: int, fill: int = PAD_INDEX) -> np.ndarray:
    out = np.full((len(rows), width), fill, dtype=np.int64)
    for i, row in enumerate(rows):
        out[i, : len(row)] = row
    return out


def _mask(lengths: np.ndarray, width: int) -> np.ndarray:
    return (np.arange(width)[None, :] < lengths[:, None]).astype(get_default_dtype())


def _char_ids(
    words_per_row: List[List[str]], char_vocab: Vocabulary, width: int
) -> np.ndarray:
    longest = max((len(w) for words in words_per_row for w in words), default=1)
    out = np.full((len(words_per_row), width, max(longest, 1)), PAD_INDEX, dtype=np.int64)
    for i, words in enumerate(words_per_row):
        for t, word in enumerate(words):
            out[i, t, : len(word)] = [char_vocab.lookup(ch) for ch in word]
    return out


def collate(
    instances: Sequence[DataInstance],
    vocab: Vocabulary,
    feature_vocab: Optional[FeatureVocab] = None,
    char_vocab: Optional[Vocabulary] = None,
) -> Batch:
    """Pack instances into one Batch padded to its own longest sequences."""
    dtype = get_default_dtype()
    context_words = [instance.context_words() for instance in instances]
    question_words = [instance.question_words() for instance in instances]
    context_lengths = np.array([len(w) for w in context_words], dtype=np.int64)
    question_lengths = np.array([len(w) for w in question_words], dtype=np.int64)
    width = int(context_lengths.max(initial=0))
    question_width = int(question_lengths.max(initial=0))

    tf = np.zeros((len(instances), width), dtype=dtype)
    exact_match = np.zeros((len(instances), width, 3), dtype=dtype)
    tag_rows = {feature: [] for feature in (feature_vocab.features if feature_vocab else [])}
    for i, instance in enumerate(instances):
        fields = instance.feature_fields
        length = context_lengths[i]
        if "context_tf" in fields:
            tf[i, :length] = fields["context_tf"]
        if "context_exact_match" in fields and length:
            exact_match[i, :length] = fields["context_exact_match"]
        for feature, rows in tag_rows.items():
            rows.append(
                feature_vocab.indices(feature, fields.get(f"context_{feature}", []))
            )

    span_start = np.array(
        [i.span_start if i.span_start is not None else -1 for i in instances],
        dtype=np.int64,
    )
    span_end = np.array(
        [i.span_end if i.span_end is not None else -1 for i in instances],
        dtype=np.int64,
    )

    return Batch(
        qids=[instance.qid for instance in instances],
        context_ids=_pad([index_map(w, vocab) for w in context_words], width),
        question_ids=_pad([index_map(w, vocab) for w in question_words], question_width),
        context_mask=_mask(context_lengths, width),
        question_mask=_mask(question_lengths, question_width),
        context_lengths=context_lengths,
        question_lengths=question_lengths,
        tf=tf,
        exact_match=exact_match,
        tags={f: _pad(rows, width, TAG_PAD_INDEX) for f, rows in tag_rows.items()},
        span_start=span_start,
        span_end=span_end,
        context_char_ids=(
            _char_ids(context_words, char_vocab, width) if char_vocab else None
        ),
        question_char_ids=(
            _char_ids(question_words, char_vocab, question_width) if char_vocab else None
        ),
        contexts=[instance.context for instance in instances],
        context_offsets=[
            [(tok.char_start, tok.char_end) for tok in instance.context_tokens]
            for instance in instances
        ],
    )


def batch_order(
    lengths: Sequence[int],
    batch_size: int,
    shuffle: bool,
    seed: Seed,
    bucket: bool = False,
    window_factor: int = settings.BUCKET_WINDOW_FACTOR,
) -> List[List[int]]:
    """
    Group instance positions into batches.

    With shuffle the order is a seeded permutation. With bucket, each window of
    batch_size * window_factor positions is sorted by length before being cut
    into batches, and the batches of a window are shuffled.
    """
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(lengths)) if shuffle else np.arange(len(lengths))
    if not bucket:
        return [
            order[i : i + batch_size].tolist() for i in range(0, len(order), batch_size)
        ]

    batches: List[List[int]] = []
    window = batch_size * window_factor
    for w in range(0, len(order), window):
        chunk = sorted(order[w : w + window].tolist(), key=lambda i: lengths[i])
        chunk_batches = [
            chunk[i : i + batch_size] for i in range(0, len(chunk), batch_size)
        ]
        if shuffle:
            chunk_batches = [chunk_batches[i] for i in rng.permutation(len(chunk_batches))]
        batches.extend(chunk_batches)
    return batches


def make_batches(
    instances: Sequence[DataInstance],
    vocab: Vocabulary,
    feature_vocab: Optional[FeatureVocab] = None,
    batch_size: int = 32,
    shuffle: bool = False,
    seed: Seed = settings.DEFAULT_SEED,
    bucket: bool = False,
    char_vocab: Optional[Vocabulary] = None,
) -> Iterator[Batch]:
    """
    Yield ceil(N / batch_size) batches; the last short batch is kept.

    Raises:
        ValueError: If batch_size < 1.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    lengths = [len(instance.context_tokens) for instance in instances]
    for positions in batch_order(lengths, batch_size, shuffle, seed, bucket):
        yield collate([instances[i] for i in positions], vocab, feature_vocab, char_vocab)


_DONE = object()


class _Failure:
    def __init__(self, error: BaseException):
        self.error = error


def prefetch(iterable: Iterable[Any], depth: int = settings.PREFETCH_DEPTH) -> Iterator[Any]:
    """
    Produce items on a background thread, at most `depth` ahead of the consumer.

    Items come out in the producer's order; a producer exception is re-raised in
    the consumer.
    """
    if depth < 1:
        yield from iterable
        return

    buffer: queue.Queue = queue.Queue(maxsize=depth)
    stop = threading.Event()

    def put(item: Any) -> bool:
        while not stop.is_set():
            try:
                buffer.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def produce() -> None:
        try:
            for item in iterable:
                if not put(item):
                    return
        except BaseException as exc:
            put(_Failure(exc))
            return
        put(_DONE)

    worker = threading.Thread(target=produce, name="batch-prefetch", daemon=True)
    worker.start()
    try:
        while True:
            item = buffer.get()
            if item is _DONE:
                break
            if isinstance(item, _Failure):
                raise item.error
            yield item
    finally:
        stop.set()
        worker.join(timeout=1.0)


class BatchGenerator:
    """
    Reusable batch source over a fixed instance list.

    Epoch `k` is shuffled with the seed sequence (seed, k), so any epoch can be
    regenerated independently, e.g. when a run resumes from a checkpoint.
    """

    def __init__(
        self,
        instances: Sequence[DataInstance],
        vocab: Vocabulary,
        feature_vocab: Optional[FeatureVocab] = None,
        batch_size: int = 32,
        shuffle: bool = False,
        seed: int = settings.DEFAULT_SEED,
        bucket: bool = False,
        char_vocab: Optional[Vocabulary] = None,
        prefetch_depth: int = 0,
    ):
        if batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")
        self.instances = list(instances)
        self.vocab = vocab
        self.feature_vocab = feature_vocab
        self.batch_size = batch_size
        self.shuffle = shuffle
        self.seed = seed
        self.bucket = bucket
        self.char_vocab = char_vocab
        self.prefetch_depth = prefetch_depth

    def __len__(self) -> int:
        return math.ceil(len(self.instances) / self.batch_size)

    def epoch(self, index: int = 0) -> Iterator[Batch]:
        batches = make_batches(
            self.instances,
            self.vocab,
            self.feature_vocab,
            batch_size=self.batch_size,
            shuffle=self.shuffle,
            seed=[self.seed, index],
            bucket=self.bucket,
            char_vocab=self.char_vocab,
        )
        if self.prefetch_depth:
            return prefetch(batches, self.prefetch_depth)
        return batches

    def __iter__(self) -> Iterator[Batch]:
        return self.epoch(0)
