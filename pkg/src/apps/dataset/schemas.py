from enum import Enum
from typing import Any, Dict, List, Optional

from typing_extensions import Self

from pydantic import BaseModel, Field, model_validator


class SquadVersion(str, Enum):
    V1 = "v1"
    V2 = "v2"


class Token(BaseModel):
    text: str
    char_start: int = Field(..., ge=0)
    char_end: int = Field(..., ge=0)

    @model_validator(mode="after")
    def check_offsets(self) -> Self:
        if self.char_end < self.char_start:
            raise ValueError("Token end offset precedes its start offset")
        return self


class DataInstance(BaseModel):
    """
    One (context, question, answer) record.

    Field names are shared by every reader so instances from any dataset
    serialize the same way.
    """

    qid: str
    context: str
    question: str
    context_tokens: List[Token]
    question_tokens: List[Token]
    answer_text: str = ""
    answer_start: Optional[int] = None
    gold_answers: List[str] = []
    span_start: Optional[int] = None
    span_end: Optional[int] = None
    is_impossible: bool = False
    feature_fields: Dict[str, Any] = {}

    @model_validator(mode="after")
    def check_span(self) -> Self:
        if (self.span_start is None) != (self.span_end is None):
            raise ValueError("span_start and span_end must be set together")
        if self.span_start is not None and self.span_end is not None:
            if not 0 <= self.span_start <= self.span_end < len(self.context_tokens):
                raise ValueError(
                    f"Span ({self.span_start}, {self.span_end}) outside "
                    f"{len(self.context_tokens)} context tokens"
                )
        return self

    @property
    def has_span(self) -> bool:
        return self.span_start is not None

    def context_words(self) -> List[str]:
        return [token.text for token in self.context_tokens]

    def question_words(self) -> List[str]:
        return [token.text for token in self.question_tokens]


class ReaderStats(BaseModel):
    read: int = 0
    skipped: int = 0
