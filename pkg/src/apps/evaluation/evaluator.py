"""
SQuAD evaluation with the official answer normalization and scoring rules.
"""

import json
import re
import string
from collections import Counter
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Sequence

from src.core.config import settings
from src.core.exceptions import DataError
from src.core.logging import get_logger
from src.apps.dataset.schemas import DataInstance
from .schemas import EvalResult, PredictionSet

logger = get_logger(__name__, settings.LOG_LEVEL)

_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCTUATION = set(string.punctuation)


def normalize_answer(s: str) -> str:
    """Lower text and remove punctuation, articles and extra whitespace."""

    def lower(text: str) -> str:
        return text.lower()

    def remove_punc(text: str) -> str:
        return "".join(ch for ch in text if ch not in _PUNCTUATION)

    def remove_articles(text: str) -> str:
        return _ARTICLES.sub(" ", text)

    def white_space_fix(text: str) -> str:
        return " ".join(text.split())

    return white_space_fix(remove_articles(remove_punc(lower(s))))


def exact_match_score(prediction: str, ground_truth: str) -> float:
    return float(normalize_answer(prediction) == normalize_answer(ground_truth))


def f1_score(prediction: str, ground_truth: str) -> float:
    """
    Token-multiset F1 between normalized answers.

    Both empty scores 1 and exactly one empty scores 0, which is how unanswerable
    questions are scored.
    """
    prediction_tokens = normalize_answer(prediction).split()
    ground_truth_tokens = normalize_answer(ground_truth).split()
    if not prediction_tokens or not ground_truth_tokens:
        return float(prediction_tokens == ground_truth_tokens)
    common = Counter(prediction_tokens) & Counter(ground_truth_tokens)
    num_same = sum(common.values())
    if num_same == 0:
        return 0.0
    precision = num_same / len(prediction_tokens)
    recall = num_same / len(ground_truth_tokens)
    return (2 * precision * recall) / (precision + recall)


def metric_max_over_ground_truths(
    metric_fn: Callable[[str, str], float],
    prediction: str,
    ground_truths: Sequence[str],
) -> float:
    return max(metric_fn(prediction, ground_truth) for ground_truth in ground_truths)


def _gold_answers(instance: DataInstance) -> List[str]:
    golds = [answer for answer in instance.gold_answers if normalize_answer(answer)]
    if not golds:
        # unanswerable: the only correct prediction is the empty string
        return [""]
    return golds


def evaluate(
    instances: Iterable[DataInstance], predictions: PredictionSet
) -> EvalResult:
    """
    Score predictions against gold answers.

    Args:
        instances: Gold instances; duplicate qids are scored once.
        predictions: qid -> predicted answer text.

    Returns:
        EM and F1 as percentages. Questions without a prediction count as wrong
        and are listed in `missing`; predictions for unknown qids are listed in
        `unexpected`.
    """
    golds: Dict[str, List[str]] = {}
    for instance in instances:
        golds.setdefault(instance.qid, _gold_answers(instance))

    exact_scores: Dict[str, float] = {}
    f1_scores: Dict[str, float] = {}
    missing: List[str] = []
    for qid, ground_truths in golds.items():
        if qid not in predictions:
            missing.append(qid)
            exact_scores[qid] = f1_scores[qid] = 0.0
            continue
        prediction = predictions[qid]
        exact_scores[qid] = metric_max_over_ground_truths(
            exact_match_score, prediction, ground_truths
        )
        f1_scores[qid] = metric_max_over_ground_truths(
            f1_score, prediction, ground_truths
        )

    unexpected = sorted(set(predictions) - set(golds))
    if missing:
        logger.warning(f"{len(missing)} questions have no prediction; scored as wrong")

    total = len(golds)

    def percent(scores: Dict[str, float], qids: Sequence[str]) -> float:
        return 100.0 * sum(scores[q] for q in qids) / len(qids) if qids else 0.0

    qids = list(golds)
    result = EvalResult(
        exact_match=percent(exact_scores, qids),
        f1=percent(f1_scores, qids),
        n_evaluated=total,
        missing=missing,
        unexpected=unexpected,
    )

    no_answer = [q for q in qids if golds[q] == [""]]
    if no_answer:
        has_answer = [q for q in qids if golds[q] != [""]]
        result.has_answer_total = len(has_answer)
        result.has_answer_exact = percent(exact_scores, has_answer)
        result.has_answer_f1 = percent(f1_scores, has_answer)
        result.no_answer_total = len(no_answer)
        result.no_answer_exact = percent(exact_scores, no_answer)
        result.no_answer_f1 = percent(f1_scores, no_answer)
    return result


class SquadEvaluator:
    """
    Evaluator bound to one gold split, used for validation during training.
    """

    def __init__(self, instances: Iterable[DataInstance]):
        self.instances = list(instances)

    def __call__(self, predictions: PredictionSet) -> EvalResult:
        return evaluate(self.instances, predictions)

    def evaluate(self, predictions: PredictionSet) -> EvalResult:
        return evaluate(self.instances, predictions)


def load_predictions(path: str | Path) -> PredictionSet:
    try:
        with open(path, encoding="utf-8") as fp:
            predictions = json.load(fp)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: cannot load predictions ({exc})") from exc
    if not isinstance(predictions, dict):
        raise DataError(f"{path}: predictions must be a JSON object of qid -> answer")
    return {str(qid): str(answer) for qid, answer in predictions.items()}


def save_predictions(path: str | Path, predictions: PredictionSet) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(predictions, fp, ensure_ascii=False, sort_keys=True, indent=2)
