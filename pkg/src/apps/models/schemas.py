from typing import Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.core.config import hash_key, settings
from src.tensor import Tensor

Mode = Literal["train", "eval", "infer"]


class EmbeddingConfig(BaseModel):
    dim: int = Field(default=50, ge=1)
    # None trains every row; 0 freezes the matrix
    trainable_top_k: Optional[int] = Field(default=1000, ge=0)


class OptimizerConfig(BaseModel):
    name: str = "adam"
    learning_rate: float = Field(default=0.001, gt=0)
    clip_norm: Optional[float] = Field(default=5.0, gt=0)
    lr_decay: Optional[float] = Field(default=None, gt=0, le=1)
    # None means one epoch of batches
    decay_steps: Optional[int] = Field(default=None, ge=1)
    staircase: bool = True
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    epsilon: float = Field(default=1e-8, gt=0)
    rho: float = Field(default=0.95, ge=0, lt=1)


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "bidaf"
    hidden_size: int = Field(default=32, ge=1)
    dropout: float = 0.2
    max_answer_length: int = Field(default=settings.MAX_ANSWER_LENGTH, ge=1)
    highway_layers: int = Field(default=2, ge=0)
    num_layers: int = Field(default=3, ge=1)
    similarity: str = "trilinear"
    use_tf: bool = True
    use_exact_match: bool = True
    use_tags: bool = True
    use_aligned_question: bool = True
    tag_dim: int = Field(default=8, ge=1)
    seed: int = settings.DEFAULT_SEED
    vocab_size: int = 0
    tag_sizes: Dict[str, int] = {}
    embedding: EmbeddingConfig = EmbeddingConfig()
    optimizer: OptimizerConfig = OptimizerConfig()

    @field_validator("dropout")
    @classmethod
    def check_dropout(cls, value: float) -> float:
        if not 0.0 <= value < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {value}")
        return value

    @field_validator("name")
    @classmethod
    def lower_name(cls, value: str) -> str:
        return value.lower()

    def architecture_hash(self) -> str:
        """Hash of everything that determines parameter names and shapes."""
        return hash_key(self.model_dump_json(exclude={"optimizer"}))


class ModelOutput(BaseModel):
    """Log-probabilities over context positions; padded positions hold ~-1e30."""

    start_log_probs: Tensor
    end_log_probs: Tensor
    loss: Optional[Tensor] = None

    model_config = ConfigDict(arbitrary_types_allowed=True)
