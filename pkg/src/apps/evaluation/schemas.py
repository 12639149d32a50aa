from typing import Dict, List, Optional

from pydantic import BaseModel, Field

PredictionSet = Dict[str, str]


class EvalResult(BaseModel):
    exact_match: float = Field(..., ge=0.0, le=100.0)
    f1: float = Field(..., ge=0.0, le=100.0)
    n_evaluated: int
    missing: List[str] = []
    unexpected: List[str] = []

    has_answer_total: Optional[int] = None
    has_answer_exact: Optional[float] = None
    has_answer_f1: Optional[float] = None
    no_answer_total: Optional[int] = None
    no_answer_exact: Optional[float] = None
    no_answer_f1: Optional[float] = None

    def report(self) -> Dict[str, float]:
        """The community-compatible {"exact_match", "f1"} report."""
        return {"exact_match": self.exact_match, "f1": self.f1}

    def summary(self) -> str:
        return f"EM={self.exact_match:.2f} F1={self.f1:.2f} (n={self.n_evaluated})"
