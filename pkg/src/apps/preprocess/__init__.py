from .schemas import EmbeddingMatrix, FeatureVocab, TAG_PAD_INDEX, TAG_UNK_INDEX
from .vocabulary import (
    PAD_INDEX,
    UNK_INDEX,
    Vocabulary,
    build_char_vocabulary,
    build_vocabulary,
)
from .embedding import load_pretrained, random_embedding
from .tagger import RuleBasedTagger, Tagger
from .features import build_feature_vocab, extract_all, extract_features

__all__ = [
    "EmbeddingMatrix",
    "FeatureVocab",
    "PAD_INDEX",
    "RuleBasedTagger",
    "TAG_PAD_INDEX",
    "TAG_UNK_INDEX",
    "Tagger",
    "UNK_INDEX",
    "Vocabulary",
    "build_char_vocabulary",
    "build_feature_vocab",
    "build_vocabulary",
    "extract_all",
    "extract_features",
    "load_pretrained",
    "random_embedding",
]
