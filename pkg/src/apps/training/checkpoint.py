"""
Binary checkpoint container.

Layout (all integers little-endian):

    magic        8 bytes   b"MRCKPT\\x00\\x1a"
    version      u32
    meta_length  u64
    metadata     JSON, meta_length bytes
    payloads     raw little-endian tensors in metadata order
    crc32        u32 over every preceding byte

The metadata lists each tensor's name, dtype, shape and byte count, plus the
config hash, model config, optimizer scalars and train state.
"""

import json
import os
import struct
import tempfile
import zlib
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_fixed

from src.core.config import settings
from src.core.exceptions import CheckpointError, ConfigMismatchError, IntegrityError
from src.core.logging import get_logger
from .schemas import Checkpoint, TrainState

logger = get_logger(__name__, settings.LOG_LEVEL)

MAGIC = b"MRCKPT\x00\x1a"
_HEADER = struct.Struct("<8sIQ")
_CRC = struct.Struct("<I")

PARAMETER_PREFIX = "param/"
EMA_PREFIX = "ema/"
OPTIMIZER_PREFIX = "optim/"


def _little_endian(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    return array.astype(array.dtype.newbyteorder("<"), copy=False)


def _sections(checkpoint: Checkpoint) -> List[Tuple[str, np.ndarray]]:
    tensors = [(PARAMETER_PREFIX + n, a) for n, a in checkpoint.parameters.items()]
    if checkpoint.ema is not None:
        tensors += [(EMA_PREFIX + n, a) for n, a in checkpoint.ema.items()]
    if checkpoint.optimizer is not None:
        tensors += [
            (OPTIMIZER_PREFIX + n, a) for n, a in checkpoint.optimizer["arrays"].items()
        ]
    return tensors


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    tensors = _sections(checkpoint)
    payloads = [_little_endian(np.asarray(array)).tobytes() for _, array in tensors]
    metadata = {
        "config_hash": checkpoint.config_hash,
        "model_config": checkpoint.model_config_data,
        "has_ema": checkpoint.ema is not None,
        "optimizer_scalars": (
            checkpoint.optimizer["scalars"] if checkpoint.optimizer is not None else None
        ),
        "train_state": (
            checkpoint.train_state.model_dump() if checkpoint.train_state is not None else None
        ),
        "tensors": [
            {
                "name": name,
                "dtype": np.asarray(array).dtype.newbyteorder("<").str,
                "shape": list(np.shape(array)),
                "nbytes": len(payload),
            }
            for (name, array), payload in zip(tensors, payloads)
        ],
        "payload_length": sum(len(p) for p in payloads),
    }
    meta = json.dumps(metadata, sort_keys=True).encode("utf-8")
    body = _HEADER.pack(MAGIC, checkpoint.version, len(meta)) + meta + b"".join(payloads)
    return body + _CRC.pack(zlib.crc32(body))


def decode_checkpoint(raw: bytes, source: str = "<bytes>") -> Checkpoint:
    """
    Raises:
        IntegrityError: On a bad magic, truncation, length mismatch or checksum mismatch.
        CheckpointError: On an unsupported format version.
    """
    if len(raw) < _HEADER.size + _CRC.size:
        raise IntegrityError(f"{source}: file is truncated ({len(raw)} bytes)")
    magic, version, meta_length = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise IntegrityError(f"{source}: not a checkpoint file (bad magic {magic!r})")
    body, (stored_crc,) = raw[: -_CRC.size], _CRC.unpack(raw[-_CRC.size :])
    if zlib.crc32(body) != stored_crc:
        raise IntegrityError(f"{source}: checksum mismatch, the file is corrupted or truncated")
    if version != settings.CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(
            f"{source}: format version {version} is not supported "
            f"(expected {settings.CHECKPOINT_FORMAT_VERSION})"
        )

    start = _HEADER.size
    try:
        metadata = json.loads(body[start : start + meta_length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IntegrityError(f"{source}: unreadable metadata ({exc})") from None
    offset = start + meta_length
    if len(body) - offset != metadata["payload_length"]:
        raise IntegrityError(
            f"{source}: payload holds {len(body) - offset} bytes, "
            f"metadata declares {metadata['payload_length']}"
        )

    sections: Dict[str, Dict[str, np.ndarray]] = {
        PARAMETER_PREFIX: {},
        EMA_PREFIX: {},
        OPTIMIZER_PREFIX: {},
    }
    for entry in metadata["tensors"]:
        chunk = body[offset : offset + entry["nbytes"]]
        offset += entry["nbytes"]
        dtype = np.dtype(entry["dtype"])
        array = np.frombuffer(chunk, dtype=dtype).reshape(entry["shape"])
        array = array.astype(dtype.newbyteorder("="), copy=True)
        for prefix, store in sections.items():
            if entry["name"].startswith(prefix):
                store[entry["name"][len(prefix) :]] = array
                break

    optimizer: Optional[Dict[str, Any]] = None
    if metadata["optimizer_scalars"] is not None:
        optimizer = {
            "scalars": metadata["optimizer_scalars"],
            "arrays": sections[OPTIMIZER_PREFIX],
        }
    return Checkpoint(
        version=version,
        config_hash=metadata["config_hash"],
        model_config_data=metadata["model_config"],
        parameters=sections[PARAMETER_PREFIX],
        ema=sections[EMA_PREFIX] if metadata["has_ema"] else None,
        optimizer=optimizer,
        train_state=(
            TrainState(**metadata["train_state"]) if metadata["train_state"] else None
        ),
    )


@retry(
    wait=wait_fixed(0.5),
    stop=stop_after_attempt(settings.CHECKPOINT_WRITE_ATTEMPTS),
    retry=retry_if_exception_type(OSError),
    reraise=True,
)
def _atomic_write(path: Path, raw: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(raw)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(temp, path)
    except BaseException:
        if os.path.exists(temp):
            os.unlink(temp)
        raise


def save_checkpoint(path: str | Path, checkpoint: Checkpoint) -> None:
    """Write through a temporary file in the same directory and rename it into place."""
    path = Path(path)
    raw = encode_checkpoint(checkpoint)
    _atomic_write(path, raw)
    logger.debug(f"Wrote checkpoint {path} ({len(raw)} bytes)")


def load_checkpoint(path: str | Path, expected_hash: Optional[str] = None) -> Checkpoint:
    """
    Read and verify a checkpoint.

    Args:
        path: Checkpoint file.
        expected_hash: The architecture hash of the model it will be loaded into.

    Raises:
        CheckpointError: If the file is missing or has an unsupported version.
        IntegrityError: If the file is corrupted.
        ConfigMismatchError: If expected_hash differs from the stored hash.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise CheckpointError(f"Checkpoint {path} does not exist") from None
    checkpoint = decode_checkpoint(raw, str(path))
    if expected_hash is not None and checkpoint.config_hash != expected_hash:
        raise ConfigMismatchError(expected=expected_hash, found=checkpoint.config_hash)
    return checkpoint
