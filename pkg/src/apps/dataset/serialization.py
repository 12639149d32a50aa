"""
Instance files: one JSON header line followed by one DataInstance per line.
"""

import json
from pathlib import Path
from typing import List

from pydantic import ValidationError

from src.core.config import settings
from src.core.exceptions import SerializationError
from .schemas import DataInstance

FORMAT_NAME = "mrckit-instances"


def save_instances(path: str | Path, instances: List[DataInstance]) -> None:
    header = {
        "format": FORMAT_NAME,
        "version": settings.INSTANCE_FORMAT_VERSION,
        "count": len(instances),
    }
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(json.dumps(header) + "\n")
        for instance in instances:
            fp.write(instance.model_dump_json() + "\n")


def load_instances(path: str | Path) -> List[DataInstance]:
    """
    Load an instance file written by save_instances.

    Raises:
        SerializationError: On a missing or foreign header, a version mismatch, a
            record count that disagrees with the header, or any undecodable line.
            Nothing is returned for a damaged file.
    """
    try:
        with open(path, encoding="utf-8") as fp:
            lines = fp.read().split("\n")
    except (OSError, UnicodeDecodeError) as exc:
        raise SerializationError(f"{path}: cannot read instance file ({exc})") from exc

    if not lines:
        raise SerializationError(f"{path}: empty file, missing header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise SerializationError(f"{path}: unreadable header ({exc})") from exc
    if not isinstance(header, dict) or header.get("format") != FORMAT_NAME:
        raise SerializationError(f"{path}: not an instance file")
    if header.get("version") != settings.INSTANCE_FORMAT_VERSION:
        raise SerializationError(
            f"{path}: format version {header.get('version')} does not match "
            f"expected version {settings.INSTANCE_FORMAT_VERSION}"
        )

    records = [line for line in lines[1:] if line.strip()]
    if len(records) != header.get("count"):
        raise SerializationError(
            f"{path}: header announces {header.get('count')} instances, "
            f"found {len(records)}"
        )
    try:
        return [DataInstance.model_validate_json(line) for line in records]
    except ValidationError as exc:
        raise SerializationError(f"{path}: corrupted instance record ({exc})") from exc
