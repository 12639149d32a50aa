import unicodedata
from abc import ABC, abstractmethod
from typing import Dict, List


class Tagger(ABC):
    """
    Source of discrete token features and normalized (lemma) forms.

    Implementations can wrap a full NLP pipeline; the framework only needs
    per-token tag sequences keyed by feature name.
    """

    @property
    @abstractmethod
    def features(self) -> List[str]: ...

    @abstractmethod
    def tag(self, words: List[str]) -> Dict[str, List[str]]: ...

    @abstractmethod
    def lemma(self, word: str) -> str: ...


class RuleBasedTagger(Tagger):
    """Coarse word classes: NUM, PUNCT, CAPITALIZED and WORD."""

    @property
    def features(self) -> List[str]:
        return ["pos"]

    def tag(self, words: List[str]) -> Dict[str, List[str]]:
        return {"pos": [self._word_class(word) for word in words]}

    @staticmethod
    def _word_class(word: str) -> str:
        if any(ch.isdigit() for ch in word) and all(
            ch.isdigit() or ch in ".,-" for ch in word
        ):
            return "NUM"
        if all(unicodedata.category(ch)[0] in "PS" for ch in word):
            return "PUNCT"
        if word[:1].isupper():
            return "CAPITALIZED"
        return "WORD"

    def lemma(self, word: str) -> str:
        folded = unicodedata.normalize("NFKD", word)
        return "".join(ch for ch in folded if not unicodedata.combining(ch)).lower()
