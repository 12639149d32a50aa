import contextlib
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np

from src.core.exceptions import CheckpointError, ConfigError
from src.apps.layers.base import Parameter


class ExponentialMovingAverage:
    """
    Shadow copies of parameters: shadow = decay * shadow + (1 - decay) * param
    after every optimizer step, starting from the initial parameter values.
    """

    def __init__(self, parameters: Sequence[Tuple[str, Parameter]], decay: float = 0.999):
        if not 0.0 <= decay < 1.0:
            raise ConfigError(f"EMA decay must lie in [0, 1), got {decay}")
        self.decay = decay
        self.parameters = list(parameters)
        self.shadow: Dict[str, np.ndarray] = {
            name: p.data.copy() for name, p in self.parameters
        }

    def update(self) -> None:
        for name, p in self.parameters:
            self.shadow[name] = (
                self.decay * self.shadow[name] + (1.0 - self.decay) * p.data
            ).astype(p.dtype)

    @contextlib.contextmanager
    def average_parameters(self) -> Iterator[None]:
        """Swap the shadow values in; the original arrays are put back untouched on exit."""
        backup = {name: p.data for name, p in self.parameters}
        try:
            for name, p in self.parameters:
                p.data = self.shadow[name].copy()
            yield
        finally:
            for name, p in self.parameters:
                p.data = backup[name]

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: value.copy() for name, value in self.shadow.items()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        missing = sorted(set(self.shadow) - set(state))
        if missing:
            raise CheckpointError(f"EMA state lacks parameters {missing}")
        for name in self.shadow:
            self.shadow[name] = np.array(state[name], dtype=self.shadow[name].dtype)
