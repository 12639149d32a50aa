import json
from pathlib import Path
from typing import List

from .schemas import SummaryEvent


class SummaryWriter:
    """Append-only JSON-lines log of training events, one sorted-key object per line."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def write(self, event: SummaryEvent) -> None:
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(event.model_dump(), sort_keys=True) + "\n")

    def read(self) -> List[SummaryEvent]:
        if not self.path.exists():
            return []
        with self.path.open(encoding="utf-8") as handle:
            return [SummaryEvent(**json.loads(line)) for line in handle if line.strip()]

    def truncate_after(self, step: int) -> None:
        """Drop events past `step`, so a resumed run does not log the same steps twice."""
        kept = [event for event in self.read() if event.step <= step]
        with self.path.open("w", encoding="utf-8") as handle:
            for event in kept:
                handle.write(json.dumps(event.model_dump(), sort_keys=True) + "\n")
