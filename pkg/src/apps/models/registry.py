from typing import Dict, Optional, Type

import numpy as np

from src.core.exceptions import ConfigError
from src.apps.preprocess.schemas import FeatureVocab
from .base import MRCModel
from .bidaf import BiDAF
from .drqa import DrQA
from .schemas import ModelConfig

MODELS: Dict[str, Type[MRCModel]] = {BiDAF.name: BiDAF, DrQA.name: DrQA}


def get_model_class(name: str) -> Type[MRCModel]:
    try:
        return MODELS[name.lower()]
    except KeyError:
        raise ConfigError(
            f"Unknown model {name!r}; expected one of {sorted(MODELS)}"
        ) from None


def build_model(
    config: ModelConfig,
    embedding: np.ndarray,
    feature_vocab: Optional[FeatureVocab] = None,
) -> MRCModel:
    return get_model_class(config.name)(config, embedding, feature_vocab)
