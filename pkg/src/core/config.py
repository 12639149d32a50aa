import hashlib
from typing import Literal

from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)
from dotenv import load_dotenv

load_dotenv(override=False)


def hash_key(key: str) -> str:
    return hashlib.sha256(key.encode()).hexdigest()


class Settings(BaseSettings):
    PROJECT_NAME: str = "mrckit"
    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"

    DEFAULT_DTYPE: Literal["float32", "float64"] = "float32"
    CHECKED_MODE: bool = True
    SHOW_PROGRESS: bool = True
    DEFAULT_SEED: int = 42

    PAD_TOKEN: str = "<PAD>"
    UNK_TOKEN: str = "<UNK>"
    EMBEDDING_INIT_SCALE: float = 0.05

    MAX_ANSWER_LENGTH: int = 17
    PREFETCH_DEPTH: int = 2
    BUCKET_WINDOW_FACTOR: int = 16

    INSTANCE_FORMAT_VERSION: int = 1
    CHECKPOINT_FORMAT_VERSION: int = 1
    CHECKPOINT_WRITE_ATTEMPTS: int = 3

    model_config = SettingsConfigDict(
        case_sensitive=False,
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (
            init_settings,
            env_settings,
            dotenv_settings,
            file_secret_settings,
        )


settings = Settings()
