import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import json
from pathlib import Path
from typing import Callable, Dict, Generator, List

import numpy as np
import pytest

from src.apps.dataset import DataInstance, char_span_to_token_span, tokenize
from src.apps.models import EmbeddingConfig, MRCModel, ModelConfig, build_model
from src.apps.preprocess import (
    build_feature_vocab,
    build_vocabulary,
    extract_all,
    random_embedding,
)
from src.tensor import precision

TOY_SQUAD: Dict = {
    "version": "1.1",
    "data": [
        {
            "title": "Normans",
            "paragraphs": [
                {
                    "context": "The Normans were the people who gave their name to Normandy, a region in France.",
                    "qas": [
                        {
                            "id": "q1",
                            "question": "In what country is Normandy located?",
                            "answers": [
                                {"text": "France", "answer_start": 73},
                                {"text": "France.", "answer_start": 73},
                            ],
                        },
                        {
                            "id": "q2",
                            "question": "Who gave their name to Normandy?",
                            "answers": [{"text": "The Normans", "answer_start": 0}],
                        },
                    ],
                }
            ],
        },
        {
            "title": "Oxygen",
            "paragraphs": [
                {
                    "context": "Oxygen is a chemical element with symbol O and atomic number 8.",
                    "qas": [
                        {
                            "id": "q3",
                            "question": "What is the atomic number of oxygen?",
                            "answers": [{"text": "8", "answer_start": 61}],
                        },
                        {
                            "id": "q4",
                            "question": "What symbol does oxygen have?",
                            "answers": [{"text": "O", "answer_start": 41}],
                        },
                    ],
                }
            ],
        },
    ],
}

NAMES = ["Alice", "Bruno", "Chen", "Dana", "Emil", "Farah", "Goran", "Hana", "Ivo", "Jana"]
CITIES = ["Paris", "Lima", "Oslo", "Cairo", "Quito", "Seoul", "Dakar", "Hanoi", "Riga", "Bern"]


@pytest.fixture
def float64() -> Generator[None, None, None]:
    """Run the test with 64-bit tensors, as finite-difference checks need."""
    with precision("float64"):
        yield


@pytest.fixture
def squad_file(tmp_path: Path) -> Path:
    path = tmp_path / "toy_squad.json"
    path.write_text(json.dumps(TOY_SQUAD), encoding="utf-8")
    return path


@pytest.fixture
def embedding_file(tmp_path: Path) -> Path:
    path = tmp_path / "vectors.txt"
    path.write_text(
        "5 3\n"
        "the 0.1 0.2 0.3\n"
        "Normans 1.0 1.0 1.0\n"
        "France 0.5 -0.5 0.25\n"
        "the 9.0 9.0 9.0\n"
        "zebra 2.0 2.0 2.0\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture
def make_instance() -> Callable[..., DataInstance]:
    def build(
        context: str,
        question: str,
        answer: str = "",
        qid: str = "q",
    ) -> DataInstance:
        context_tokens = tokenize(context)
        fields = dict(
            qid=qid,
            context=context,
            question=question,
            context_tokens=context_tokens,
            question_tokens=tokenize(question),
        )
        if not answer:
            return DataInstance(**fields, gold_answers=[""])
        start = context.index(answer)
        span_start, span_end = char_span_to_token_span(context_tokens, start, answer)
        return DataInstance(
            **fields,
            answer_text=answer,
            answer_start=start,
            gold_answers=[answer],
            span_start=span_start,
            span_end=span_end,
        )

    return build


@pytest.fixture
def toy_corpus(make_instance) -> List[DataInstance]:
    """Twenty short "who lives where" questions with one-word answers."""
    rng = np.random.default_rng(7)
    instances = []
    for i in range(20):
        a, b = rng.choice(len(NAMES), size=2, replace=False)
        c, d = rng.choice(len(CITIES), size=2, replace=False)
        context = f"{NAMES[a]} lives in {CITIES[c]} and {NAMES[b]} lives in {CITIES[d]} ."
        if i % 2 == 0:
            question, answer = f"Where does {NAMES[a]} live ?", CITIES[c]
        else:
            question, answer = f"Where does {NAMES[b]} live ?", CITIES[d]
        instances.append(make_instance(context, question, answer, qid=f"toy{i}"))
    return instances


@pytest.fixture
def toy_data(toy_corpus):
    """Featurized toy corpus with its word and tag vocabularies."""
    instances = extract_all(toy_corpus)
    return instances, build_vocabulary(instances), build_feature_vocab(instances)


@pytest.fixture
def tiny_model(toy_data) -> Callable[..., MRCModel]:
    _, vocab, feature_vocab = toy_data

    def build(name: str = "bidaf", **overrides) -> MRCModel:
        values = dict(
            name=name,
            hidden_size=4,
            highway_layers=1,
            num_layers=1,
            dropout=0.0,
            tag_dim=2,
            embedding=EmbeddingConfig(dim=6, trainable_top_k=None),
        )
        values.update(overrides)
        matrix = random_embedding(vocab, 6, seed=0)
        return build_model(ModelConfig(**values), matrix, feature_vocab)

    return build
