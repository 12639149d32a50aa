from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from src.core.config import settings
from src.core.exceptions import ConfigError, DataError
from src.core.logging import get_logger
from src.apps.dataset.schemas import DataInstance

logger = get_logger(__name__, settings.LOG_LEVEL)

PAD_INDEX = 0
UNK_INDEX = 1


class Vocabulary:
    """
    Bijection between tokens and indices with PAD at 0 and UNK at 1.
    """

    def __init__(
        self,
        tokens: Sequence[str] = (),
        counts: Optional[Dict[str, int]] = None,
        lowercase: bool = False,
        pad_token: str = settings.PAD_TOKEN,
        unk_token: str = settings.UNK_TOKEN,
    ):
        self.pad_token = pad_token
        self.unk_token = unk_token
        self.lowercase = lowercase
        self.counts: Counter[str] = Counter(counts or {})
        self.index_to_token: List[str] = [pad_token, unk_token]
        self.token_to_index: Dict[str, int] = {pad_token: PAD_INDEX, unk_token: UNK_INDEX}
        for token in tokens:
            self.add(token)

    @property
    def specials(self) -> List[str]:
        return [self.pad_token, self.unk_token]

    def add(self, token: str) -> int:
        token = self.normalize(token)
        if token not in self.token_to_index:
            self.token_to_index[token] = len(self.index_to_token)
            self.index_to_token.append(token)
        return self.token_to_index[token]

    def normalize(self, token: str) -> str:
        if self.lowercase and token not in self.specials:
            return token.lower()
        return token

    def lookup(self, token: str) -> int:
        return self.token_to_index.get(self.normalize(token), UNK_INDEX)

    def token(self, index: int) -> str:
        return self.index_to_token[index]

    def __len__(self) -> int:
        return len(self.index_to_token)

    def __contains__(self, token: str) -> bool:
        return self.normalize(token) in self.token_to_index

    def __iter__(self):
        return iter(self.index_to_token)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Vocabulary)
            and self.index_to_token == other.index_to_token
            and self.lowercase == other.lowercase
        )

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)}, lowercase={self.lowercase})"

    @classmethod
    def from_tokens(cls, tokens: Sequence[str], lowercase: bool = False) -> "Vocabulary":
        """Set the whole vocabulary explicitly; specials are prepended."""
        vocab = cls(lowercase=lowercase)
        for token in tokens:
            if token not in vocab.specials:
                vocab.add(token)
        return vocab

    @classmethod
    def build(
        cls,
        token_stream: Iterable[str],
        min_count: int = 1,
        max_size: Optional[int] = None,
        extra_tokens: Sequence[str] = (),
        lowercase: bool = False,
    ) -> "Vocabulary":
        """
        Build a vocabulary from a token stream.

        Tokens are ranked by count, ties by first appearance.

        Args:
            token_stream: Tokens in corpus order.
            min_count: Minimum count for a token to be kept.
            max_size: Upper bound on the final size, specials included.
            extra_tokens: Tokens placed right after the specials.
            lowercase: Fold case before counting and lookup.

        Returns:
            The vocabulary.

        Raises:
            ConfigError: If max_size is smaller than the number of specials.
        """
        vocab = cls(lowercase=lowercase)
        if max_size is not None and max_size < len(vocab.specials):
            raise ConfigError(
                f"max_size={max_size} cannot hold the {len(vocab.specials)} special tokens"
            )

        counts: Counter[str] = Counter(vocab.normalize(token) for token in token_stream)
        vocab.counts = counts
        for token in extra_tokens:
            if max_size is not None and len(vocab) >= max_size:
                break
            vocab.add(token)

        # Counter keeps first-seen order and sorted() is stable
        ranked = sorted(counts.items(), key=lambda item: -item[1])
        for token, count in ranked:
            if max_size is not None and len(vocab) >= max_size:
                break
            if count >= min_count:
                vocab.add(token)
        return vocab

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fp:
            for token in self.index_to_token:
                fp.write(token + "\n")

    @classmethod
    def load(cls, path: str | Path, lowercase: bool = False) -> "Vocabulary":
        try:
            with open(path, encoding="utf-8") as fp:
                tokens = fp.read().split("\n")
        except OSError as exc:
            raise DataError(f"{path}: cannot read vocabulary ({exc})") from exc
        if tokens and tokens[-1] == "":
            tokens.pop()
        if len(tokens) < 2:
            raise DataError(f"{path}: vocabulary file lacks the special tokens")
        vocab = cls(lowercase=lowercase, pad_token=tokens[0], unk_token=tokens[1])
        for token in tokens[2:]:
            vocab.add(token)
        if len(vocab) != len(tokens):
            raise DataError(f"{path}: vocabulary file contains duplicate tokens")
        return vocab


def build_vocabulary(
    instances: Sequence[DataInstance],
    min_count: int = 1,
    max_size: Optional[int] = None,
    extra_tokens: Sequence[str] = (),
    lowercase: bool = False,
) -> Vocabulary:
    """Build the word vocabulary from training contexts and questions."""
    if not instances:
        raise DataError("Cannot build a vocabulary from an empty instance list")

    def stream() -> Iterable[str]:
        for instance in instances:
            yield from instance.context_words()
            yield from instance.question_words()

    vocab = Vocabulary.build(
        stream(),
        min_count=min_count,
        max_size=max_size,
        extra_tokens=extra_tokens,
        lowercase=lowercase,
    )
    logger.info(f"Built vocabulary of {len(vocab)} tokens from {len(instances)} instances")
    return vocab


def build_char_vocabulary(
    instances: Sequence[DataInstance], min_count: int = 1
) -> Vocabulary:
    def stream() -> Iterable[str]:
        for instance in instances:
            for word in instance.context_words() + instance.question_words():
                yield from word

    return Vocabulary.build(stream(), min_count=min_count)
