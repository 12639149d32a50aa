from pathlib import Path
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from src.core.config import settings
from src.core.exceptions import DataError, EmbeddingFormatError
from src.core.logging import get_logger
from src.tensor import get_default_dtype
from .schemas import EmbeddingMatrix
from .vocabulary import PAD_INDEX, Vocabulary

logger = get_logger(__name__, settings.LOG_LEVEL)


def _is_header(fields: List[str]) -> bool:
    return len(fields) == 2 and all(field.isdigit() for field in fields)


def random_embedding(
    vocab: Vocabulary,
    dim: int,
    seed: int = settings.DEFAULT_SEED,
    scale: float = settings.EMBEDDING_INIT_SCALE,
) -> np.ndarray:
    """Seeded uniform(-scale, scale) matrix with a zero PAD row."""
    rng = np.random.default_rng(seed)
    matrix = rng.uniform(-scale, scale, size=(len(vocab), dim)).astype(
        get_default_dtype()
    )
    matrix[PAD_INDEX] = 0.0
    return matrix


def load_pretrained(
    vocab: Vocabulary,
    path: str | Path,
    seed: int = settings.DEFAULT_SEED,
    dim: Optional[int] = None,
) -> EmbeddingMatrix:
    """
    Create an embedding matrix for `vocab` from a text embedding file.

    Lines are "word v1 ... vd"; a word2vec-style "count dim" header line is
    detected and skipped. Rows for words missing from the file keep the seeded
    uniform initialization, and the PAD row is zero.

    Args:
        vocab: The word vocabulary.
        path: Embedding text file (UTF-8, space separated).
        seed: Seed for the rows of words absent from the file.
        dim: Expected dimension; inferred from the first vector line if omitted.

    Returns:
        The embedding matrix with hit and duplicate counts.

    Raises:
        EmbeddingFormatError: If a line's dimension disagrees with the others.
        DataError: If the file cannot be read or holds no vectors.
    """
    rows: dict[int, np.ndarray] = {}
    duplicates = 0
    seen = set()

    try:
        fp = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: cannot open embedding file ({exc})") from exc

    with fp:
        for line_number, line in enumerate(
            tqdm(fp, desc="embeddings", disable=not settings.SHOW_PROGRESS), start=1
        ):
            fields = line.rstrip("\n").rstrip(" ").split(" ")
            if line_number == 1 and _is_header(fields):
                continue
            if len(fields) < 2:
                continue
            word, values = fields[0], fields[1:]
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise EmbeddingFormatError(
                    f"expected {dim} values, found {len(values)}",
                    line_number=line_number,
                )
            if word in seen:
                duplicates += 1
                continue
            seen.add(word)
            if word not in vocab:
                continue
            index = vocab.lookup(word)
            if index in rows or index == PAD_INDEX:
                continue
            try:
                rows[index] = np.array([float(v) for v in values])
            except ValueError as exc:
                raise EmbeddingFormatError(
                    f"non-numeric value ({exc})", line_number=line_number
                ) from exc

    if dim is None:
        raise DataError(f"{path}: embedding file contains no vectors")

    matrix = random_embedding(vocab, dim, seed=seed)
    for index, row in rows.items():
        matrix[index] = row
    matrix[PAD_INDEX] = 0.0

    if duplicates:
        logger.warning(f"{duplicates} duplicate words in {path}; kept first occurrences")
    logger.info(
        f"Embedding: {len(rows)}/{len(vocab)} vocabulary words found in {path} (d={dim})"
    )
    return EmbeddingMatrix(
        matrix=matrix, dim=dim, hit_count=len(rows), duplicate_count=duplicates
    )
