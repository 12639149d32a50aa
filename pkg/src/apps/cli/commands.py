"""
train / evaluate / infer: the end-to-end pipeline behind the command line.
"""

import argparse
import json
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.config import settings
from src.core.exceptions import (
    CheckpointError,
    ConfigError,
    DataError,
    MRCError,
    NumericError,
)
from src.core.logging import get_logger
from src.apps.batching import BatchGenerator, make_batches
from src.apps.dataset import DataInstance, read_squad
from src.apps.evaluation import (
    evaluate,
    load_predictions,
    save_predictions,
)
from src.apps.models import MRCModel, ModelConfig, build_model
from src.apps.preprocess import (
    FeatureVocab,
    Vocabulary,
    build_feature_vocab,
    build_vocabulary,
    extract_all,
    load_pretrained,
    random_embedding,
)
from src.apps.training import (
    BEST_CHECKPOINT,
    LAST_CHECKPOINT,
    SUMMARY_FILE,
    Trainer,
    load_checkpoint,
    restore_weights,
)
from .schemas import RunConfig, load_run_config

logger = get_logger(__name__, settings.LOG_LEVEL)

VOCAB_FILE = "vocab.txt"
FEATURE_VOCAB_FILE = "feature_vocab.json"
MODEL_CONFIG_FILE = "model_config.json"
RUN_CONFIG_FILE = "run_config.json"
PREDICTIONS_FILE = "predictions.json"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _read(path: Path, config: RunConfig) -> List[DataInstance]:
    return extract_all(read_squad(path, config.squad_version))


def _echo_config(config: RunConfig, name: str) -> None:
    config.save_dir.mkdir(parents=True, exist_ok=True)
    (config.save_dir / name).write_text(
        config.model_dump_json(indent=2) + "\n", encoding="utf-8"
    )


def _print_scores(exact_match: float, f1: float) -> None:
    print(json.dumps({"exact_match": exact_match, "f1": f1}, sort_keys=True))


def load_trained(save_dir: Path) -> Tuple[MRCModel, Vocabulary, FeatureVocab]:
    """
    Rebuild a trained model from a save_dir, with EMA weights when the checkpoint has them.

    Raises:
        CheckpointError: If the directory lacks the artifacts `train` writes.
    """
    for name in (VOCAB_FILE, FEATURE_VOCAB_FILE, MODEL_CONFIG_FILE, BEST_CHECKPOINT):
        if not (save_dir / name).exists():
            raise CheckpointError(f"{save_dir} has no {name}; run train first")
    model_config = ModelConfig.model_validate_json(
        (save_dir / MODEL_CONFIG_FILE).read_text(encoding="utf-8")
    )
    lowercase = False
    if (save_dir / RUN_CONFIG_FILE).exists():
        run = json.loads((save_dir / RUN_CONFIG_FILE).read_text(encoding="utf-8"))
        lowercase = bool(run.get("lowercase", False))
    vocab = Vocabulary.load(save_dir / VOCAB_FILE, lowercase=lowercase)
    feature_vocab = FeatureVocab.load(save_dir / FEATURE_VOCAB_FILE)

    placeholder = np.zeros((len(vocab), model_config.embedding.dim))
    model = build_model(model_config, placeholder, feature_vocab)
    checkpoint = load_checkpoint(save_dir / BEST_CHECKPOINT, model.config.architecture_hash())
    restore_weights(model, checkpoint, use_ema=True)
    return model, vocab, feature_vocab


def run_train(config: RunConfig) -> int:
    config.require_files("train_file", "dev_file")
    if config.embedding_file is not None:
        config.require_files("embedding_file")

    train = _read(config.train_file, config)
    dev = _read(config.dev_file, config)
    logger.info(f"Read {len(train)} training and {len(dev)} dev instances")

    vocab = build_vocabulary(
        train,
        min_count=config.min_count,
        max_size=config.max_vocab_size,
        lowercase=config.lowercase,
    )
    if config.embedding_file is not None:
        matrix = load_pretrained(vocab, config.embedding_file, seed=config.seed).matrix
    else:
        matrix = random_embedding(vocab, config.embedding_dim, seed=config.seed)
    feature_vocab = build_feature_vocab(train)

    model = build_model(config.model_settings(matrix.shape[1]), matrix, feature_vocab)
    model.compile()
    logger.info(f"Built {model.name} with {model.parameter_count()} parameters")

    save_dir = config.save_dir
    save_dir.mkdir(parents=True, exist_ok=True)
    vocab.save(save_dir / VOCAB_FILE)
    feature_vocab.save(save_dir / FEATURE_VOCAB_FILE)
    (save_dir / MODEL_CONFIG_FILE).write_text(
        model.config.model_dump_json(indent=2) + "\n", encoding="utf-8"
    )
    _echo_config(config, RUN_CONFIG_FILE)

    train_batches = BatchGenerator(
        train,
        vocab,
        feature_vocab,
        batch_size=config.batch_size,
        shuffle=True,
        seed=config.seed,
        bucket=config.bucket,
        prefetch_depth=settings.PREFETCH_DEPTH,
    )
    dev_batches = list(make_batches(dev, vocab, feature_vocab, batch_size=config.batch_size))

    trainer = Trainer(
        model,
        epochs=config.epochs,
        eval_every=config.eval_every,
        patience=config.patience,
        ema_decay=config.ema_decay,
        save_dir=save_dir,
        seed=config.seed,
    )
    if config.resume and (save_dir / LAST_CHECKPOINT).exists():
        trainer.resume(save_dir / LAST_CHECKPOINT)
    elif (save_dir / SUMMARY_FILE).exists():
        (save_dir / SUMMARY_FILE).unlink()

    state = trainer.train_and_evaluate(train_batches, dev_batches, dev)
    if state.best is None:
        _print_scores(0.0, 0.0)
    else:
        _print_scores(state.best.exact_match, state.best.value)
    return EXIT_OK


def _infer(config: RunConfig, instances: Sequence[DataInstance]):
    model, vocab, feature_vocab = load_trained(config.save_dir)
    batches = make_batches(instances, vocab, feature_vocab, batch_size=config.batch_size)
    return model.inference(batches)


def run_evaluate(config: RunConfig) -> int:
    config.require_files("dev_file")
    dev = _read(config.dev_file, config)
    if config.predictions_file is not None:
        config.require_files("predictions_file")
        predictions = load_predictions(config.predictions_file)
    else:
        predictions = _infer(config, dev)
    result = evaluate(dev, predictions)
    logger.info(result.summary())
    _print_scores(result.exact_match, result.f1)
    return EXIT_OK


def run_infer(config: RunConfig) -> int:
    config.require_files("dev_file")
    instances = _read(config.dev_file, config)
    predictions = _infer(config, instances)
    out = config.predictions_out or config.save_dir / PREDICTIONS_FILE
    save_predictions(out, predictions)
    _echo_config(config, "infer_config.json")
    logger.info(f"Wrote {len(predictions)} predictions to {out}")
    return EXIT_OK


COMMANDS = {"train": run_train, "evaluate": run_evaluate, "infer": run_infer}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="TOML file with run settings; flags take precedence")
    shared.add_argument("--train-file", type=Path)
    shared.add_argument("--dev-file", type=Path)
    shared.add_argument("--embedding-file", type=Path)
    shared.add_argument("--save-dir", type=Path)
    shared.add_argument("--predictions-out", type=Path)
    shared.add_argument("--predictions-file", type=Path, help="score this file instead of running a model")
    shared.add_argument("--squad-version", choices=["v1", "v2"])
    shared.add_argument("--model", choices=["bidaf", "drqa"])
    shared.add_argument("--seed", type=int)
    shared.add_argument("--epochs", type=int)
    shared.add_argument("--batch-size", type=int)
    shared.add_argument("--hidden-size", type=int)
    shared.add_argument("--dropout", type=float)
    shared.add_argument("--ema-decay", type=float)
    shared.add_argument("--patience", type=int)
    shared.add_argument("--eval-every", type=int)
    shared.add_argument("--optimizer", choices=["adam", "adadelta", "sgd"])
    shared.add_argument("--learning-rate", type=float)
    shared.add_argument("--resume", action="store_true", default=None)

    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description="Train, evaluate and run span-extraction reading comprehension models.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("train", parents=[shared], help="train a model and keep its best weights")
    subparsers.add_parser("evaluate", parents=[shared], help="print exact match and F1 on a dev file")
    subparsers.add_parser("infer", parents=[shared], help="write {qid: answer} predictions")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns 0, or 2/3/4 for configuration, data and numeric failures."""
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config")
    try:
        config = load_run_config(command, config_path, args)
        return COMMANDS[command](config)
    except (ConfigError, CheckpointError) as exc:
        logger.error(str(exc))
        return EXIT_CONFIG
    except DataError as exc:
        logger.error(str(exc))
        return EXIT_DATA
    except NumericError as exc:
        logger.error(str(exc))
        return EXIT_NUMERIC
    except MRCError as exc:
        logger.error(str(exc))
        return EXIT_CONFIG
