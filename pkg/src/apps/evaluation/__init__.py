from .schemas import EvalResult, PredictionSet
from .evaluator import (
    SquadEvaluator,
    evaluate,
    exact_match_score,
    f1_score,
    load_predictions,
    normalize_answer,
    save_predictions,
)

__all__ = [
    "EvalResult",
    "PredictionSet",
    "SquadEvaluator",
    "evaluate",
    "exact_match_score",
    "f1_score",
    "load_predictions",
    "normalize_answer",
    "save_predictions",
]
