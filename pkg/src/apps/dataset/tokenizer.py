import re
from typing import List

from src.core.exceptions import AlignmentError
from .schemas import Token

# a run of letters and digits, or any single other non-space character (underscore included)
_TOKEN_PATTERN = re.compile(r"[^\W_]+|[^\w\s]|_")


def tokenize(text: str) -> List[Token]:
    """
    Split on whitespace, then split every punctuation character into its own token.

    Args:
        text: Any unicode string.

    Returns:
        Tokens with character offsets such that text[start:end] == token.text.
    """
    return [
        Token(text=match.group(), char_start=match.start(), char_end=match.end())
        for match in _TOKEN_PATTERN.finditer(text)
    ]


def char_span_to_token_span(
    tokens: List[Token], answer_start: int, answer_text: str
) -> tuple[int, int]:
    """
    Find the smallest token interval covering an answer's character range.

    Answers that cut a token mid-word expand to the whole token.

    Args:
        tokens: Context tokens.
        answer_start: Character offset of the answer in the context.
        answer_text: The answer string.

    Returns:
        Inclusive (start_idx, end_idx) token indices.

    Raises:
        AlignmentError: If no token overlaps the answer range.
    """
    answer_end = answer_start + len(answer_text)
    if not tokens or answer_start < 0 or answer_start >= tokens[-1].char_end:
        raise AlignmentError(
            f"Answer offset {answer_start} lies outside the tokenized context"
        )

    start_idx = next(
        (i for i, tok in enumerate(tokens) if tok.char_end > answer_start), None
    )
    end_idx = next(
        (
            i
            for i in range(len(tokens) - 1, -1, -1)
            if tokens[i].char_start < answer_end
        ),
        None,
    )
    if start_idx is None or end_idx is None or start_idx > end_idx:
        raise AlignmentError(
            f"No token covers answer {answer_text!r} at offset {answer_start}"
        )
    return start_idx, end_idx
