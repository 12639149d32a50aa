try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.core.config import settings
from src.core.exceptions import ConfigError
from src.apps.dataset.schemas import SquadVersion
from src.apps.models.schemas import EmbeddingConfig, ModelConfig, OptimizerConfig

Command = Literal["train", "evaluate", "infer"]


class RunConfig(BaseModel):
    """Effective settings of one CLI invocation: config file values overridden by flags."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    train_file: Optional[Path] = None
    dev_file: Optional[Path] = None
    embedding_file: Optional[Path] = None
    save_dir: Path = Path("runs/default")
    predictions_out: Optional[Path] = None
    predictions_file: Optional[Path] = None
    squad_version: SquadVersion = SquadVersion.V1

    model: str = "bidaf"
    seed: int = settings.DEFAULT_SEED
    epochs: int = Field(default=10, ge=1)
    batch_size: int = Field(default=32, ge=1)
    hidden_size: int = Field(default=32, ge=1)
    dropout: float = Field(default=0.2, ge=0, lt=1)
    ema_decay: Optional[float] = Field(default=0.999, ge=0, lt=1)
    patience: Optional[int] = Field(default=None, ge=1)
    eval_every: int = Field(default=1, ge=1)
    optimizer: str = "adam"
    learning_rate: float = Field(default=0.001, gt=0)
    lr_decay: Optional[float] = Field(default=None, gt=0, le=1)
    clip_norm: Optional[float] = Field(default=5.0, gt=0)
    max_answer_length: int = Field(default=settings.MAX_ANSWER_LENGTH, ge=1)

    embedding_dim: int = Field(default=50, ge=1)
    trainable_top_k: Optional[int] = Field(default=1000, ge=0)
    min_count: int = Field(default=1, ge=1)
    max_vocab_size: Optional[int] = Field(default=None, ge=2)
    lowercase: bool = False
    bucket: bool = False
    resume: bool = False

    @field_validator("model", "optimizer")
    @classmethod
    def lower(cls, value: str) -> str:
        return value.lower()

    def model_settings(self, embedding_dim: Optional[int] = None) -> ModelConfig:
        return ModelConfig(
            name=self.model,
            hidden_size=self.hidden_size,
            dropout=self.dropout,
            max_answer_length=self.max_answer_length,
            seed=self.seed,
            embedding=EmbeddingConfig(
                dim=embedding_dim or self.embedding_dim,
                trainable_top_k=self.trainable_top_k,
            ),
            optimizer=OptimizerConfig(
                name=self.optimizer,
                learning_rate=self.learning_rate,
                lr_decay=self.lr_decay,
                clip_norm=self.clip_norm,
            ),
        )

    def require_files(self, *fields: str) -> None:
        """
        Raises:
            ConfigError: If a named path is unset or does not exist.
        """
        for field in fields:
            value = getattr(self, field)
            if value is None:
                raise ConfigError(f"--{field.replace('_', '-')} is required for {self.command}")
            if not Path(value).exists():
                raise ConfigError(f"{field} {value} does not exist")


def load_run_config(
    command: Command,
    path: Optional[str | Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """
    Merge a TOML config file with flag overrides; flags left unset (None) do not override.

    Raises:
        ConfigError: If the file cannot be read or a value or key is invalid.
    """
    values: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "rb") as handle:
                values = tomllib.load(handle)
        except FileNotFoundError:
            raise ConfigError(f"Config file {path} does not exist") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"Config file {path} is not valid TOML: {exc}") from None
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    values["command"] = command
    try:
        return RunConfig(**values)
    except ValidationError as exc:
        raise ConfigError(f"Invalid configuration: {exc}") from None
