from .schemas import Batch
from .generator import (
    BatchGenerator,
    batch_order,
    collate,
    index_map,
    make_batches,
    prefetch,
)

__all__ = [
    "Batch",
    "BatchGenerator",
    "batch_order",
    "collate",
    "index_map",
    "make_batches",
    "prefetch",
]
