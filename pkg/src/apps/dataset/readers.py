import json
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List

from src.core.config import settings
from src.core.exceptions import AlignmentError, ReaderError
from src.core.logging import get_logger
from .schemas import DataInstance, ReaderStats, SquadVersion
from .tokenizer import char_span_to_token_span, tokenize

logger = get_logger(__name__, settings.LOG_LEVEL)


class BaseReader(ABC):
    """
    Extension point for dataset readers.

    Subclasses turn a dataset file into DataInstance values; everything
    downstream only relies on that contract.
    """

    def __init__(self) -> None:
        self.stats = ReaderStats()

    @abstractmethod
    def read(self, path: str | Path) -> List[DataInstance]: ...

    @staticmethod
    def load_json(path: str | Path) -> Any:
        try:
            with open(path, encoding="utf-8") as fp:
                return json.load(fp)
        except json.JSONDecodeError as exc:
            raise ReaderError(f"Malformed JSON: {exc}", path=str(path)) from exc
        except OSError as exc:
            raise ReaderError(f"Cannot open file: {exc}", path=str(path)) from exc


class SquadReader(BaseReader):
    """Reader for SQuAD v1.1 and v2.0 JSON files (data → paragraphs → qas)."""

    def __init__(self, version: SquadVersion | str = SquadVersion.V1):
        super().__init__()
        self.version = SquadVersion(version)

    def read(self, path: str | Path) -> List[DataInstance]:
        """
        Parse a SQuAD file.

        Args:
            path: Path to the JSON file.

        Returns:
            One instance per question, labelled with the first gold answer.

        Raises:
            ReaderError: If the file is not valid JSON or misses the SQuAD schema.
        """
        dataset = self.load_json(path)
        if not isinstance(dataset, dict) or "data" not in dataset:
            raise ReaderError("Missing top-level 'data' array", path=str(path))

        self.stats = ReaderStats()
        instances: List[DataInstance] = []
        try:
            for article in dataset["data"]:
                for paragraph in article["paragraphs"]:
                    context = paragraph["context"]
                    context_tokens = tokenize(context)
                    for qa in paragraph["qas"]:
                        instance = self._read_qa(qa, context, context_tokens)
                        if instance is None:
                            self.stats.skipped += 1
                            continue
                        instances.append(instance)
        except (KeyError, TypeError) as exc:
            raise ReaderError(
                f"Unexpected SQuAD schema: missing or invalid field {exc}",
                path=str(path),
            ) from exc

        self.stats.read = len(instances)
        if self.stats.skipped:
            logger.warning(
                f"Skipped {self.stats.skipped} questions in {path} whose answers "
                f"could not be aligned to context tokens"
            )
        logger.info(f"Read {self.stats.read} instances from {path}")
        return instances

    def _read_qa(
        self, qa: Dict[str, Any], context: str, context_tokens: list
    ) -> DataInstance | None:
        is_impossible = (
            bool(qa.get("is_impossible", False))
            if self.version == SquadVersion.V2
            else False
        )
        answers = qa.get("answers", [])
        gold_answers = [answer["text"] for answer in answers]
        fields: Dict[str, Any] = dict(
            qid=qa["id"],
            context=context,
            question=qa["question"],
            context_tokens=context_tokens,
            question_tokens=tokenize(qa["question"]),
            is_impossible=is_impossible,
        )

        if is_impossible or not answers:
            return DataInstance(**fields, gold_answers=gold_answers or [""])

        first = answers[0]
        answer_start = int(first["answer_start"])
        try:
            span_start, span_end = char_span_to_token_span(
                context_tokens, answer_start, first["text"]
            )
        except AlignmentError as exc:
            logger.debug(f"Question {qa['id']}: {exc.message}")
            return None

        return DataInstance(
            **fields,
            answer_text=first["text"],
            answer_start=answer_start,
            gold_answers=gold_answers,
            span_start=span_start,
            span_end=span_end,
        )


def read_squad(
    path: str | Path, version: SquadVersion | str = SquadVersion.V1
) -> List[DataInstance]:
    return SquadReader(version).read(path)
