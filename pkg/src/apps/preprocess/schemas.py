import json
from pathlib import Path
from typing import Dict, Iterable, List

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.exceptions import DataError

TAG_PAD_INDEX = 0
TAG_UNK_INDEX = 1
TAG_SPECIALS = ["<PAD>", "<UNK>"]


class EmbeddingMatrix(BaseModel):
    matrix: np.ndarray
    dim: int
    hit_count: int = 0
    duplicate_count: int = 0

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def vocab_size(self) -> int:
        return self.matrix.shape[0]


class FeatureVocab(BaseModel):
    """Tag -> index maps, one per discrete feature, built from the training split only."""

    tags: Dict[str, Dict[str, int]] = {}

    @classmethod
    def build(cls, tag_sequences: Dict[str, Iterable[List[str]]]) -> "FeatureVocab":
        tags: Dict[str, Dict[str, int]] = {}
        for feature, sequences in tag_sequences.items():
            mapping = {tag: i for i, tag in enumerate(TAG_SPECIALS)}
            for sequence in sequences:
                for tag in sequence:
                    mapping.setdefault(tag, len(mapping))
            tags[feature] = mapping
        return cls(tags=tags)

    @property
    def features(self) -> List[str]:
        return list(self.tags)

    def size(self, feature: str) -> int:
        return len(self.tags[feature])

    def index(self, feature: str, tag: str) -> int:
        return self.tags[feature].get(tag, TAG_UNK_INDEX)

    def indices(self, feature: str, tags: List[str]) -> List[int]:
        mapping = self.tags[feature]
        return [mapping.get(tag, TAG_UNK_INDEX) for tag in tags]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fp:
            fp.write(self.model_dump_json(indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "FeatureVocab":
        try:
            with open(path, encoding="utf-8") as fp:
                return cls.model_validate(json.load(fp))
        except (OSError, ValueError) as exc:
            raise DataError(f"{path}: cannot load feature vocabulary ({exc})") from exc
