from .schemas import DataInstance, ReaderStats, SquadVersion, Token
from .tokenizer import char_span_to_token_span, tokenize
from .readers import BaseReader, SquadReader, read_squad
from .serialization import load_instances, save_instances

__all__ = [
    "BaseReader",
    "DataInstance",
    "ReaderStats",
    "SquadReader",
    "SquadVersion",
    "Token",
    "char_span_to_token_span",
    "load_instances",
    "read_squad",
    "save_instances",
    "tokenize",
]
