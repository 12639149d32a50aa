from .schemas import RunConfig, load_run_config
from .commands import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_NUMERIC,
    EXIT_OK,
    build_parser,
    load_trained,
    main,
    run_evaluate,
    run_infer,
    run_train,
)

__all__ = [
    "EXIT_CONFIG",
    "EXIT_DATA",
    "EXIT_NUMERIC",
    "EXIT_OK",
    "RunConfig",
    "build_parser",
    "load_run_config",
    "load_trained",
    "main",
    "run_evaluate",
    "run_infer",
    "run_train",
]
