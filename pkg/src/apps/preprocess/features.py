from collections import Counter
from typing import Iterable, List, Literal, Optional

from src.apps.dataset.schemas import DataInstance
from .schemas import FeatureVocab
from .tagger import RuleBasedTagger, Tagger

Side = Literal["context", "question"]


def extract_features(
    instance: DataInstance, side: Side = "context", tagger: Optional[Tagger] = None
) -> DataInstance:
    """
    Add term-frequency, exact-match and tag features for one side of an instance.

    Writes `{side}_tf` (count of the lowercased token in that side / its length),
    `{side}_exact_match` (three 0/1 flags per token: original form, lowercase form,
    and lemma form appear on the other side) and `{side}_{feature}` tag sequences.

    Args:
        instance: A tokenized instance; it is updated in place.
        side: Which token sequence receives the features.
        tagger: Tagger for lemma forms and tags; RuleBasedTagger when omitted.

    Returns:
        The same instance.
    """
    tagger = tagger or RuleBasedTagger()
    if side == "context":
        words, others = instance.context_words(), instance.question_words()
    else:
        words, others = instance.question_words(), instance.context_words()

    lowered = [word.lower() for word in words]
    counts = Counter(lowered)
    length = len(words)
    tf = [counts[word] / length for word in lowered] if length else []

    original_set = set(others)
    lower_set = {word.lower() for word in others}
    lemma_set = {tagger.lemma(word) for word in others}
    exact_match = [
        [
            int(word in original_set),
            int(word.lower() in lower_set),
            int(tagger.lemma(word) in lemma_set),
        ]
        for word in words
    ]

    instance.feature_fields[f"{side}_tf"] = tf
    instance.feature_fields[f"{side}_exact_match"] = exact_match
    for feature, tags in tagger.tag(words).items():
        instance.feature_fields[f"{side}_{feature}"] = tags
    return instance


def extract_all(
    instances: Iterable[DataInstance], tagger: Optional[Tagger] = None
) -> List[DataInstance]:
    tagger = tagger or RuleBasedTagger()
    return [extract_features(instance, "context", tagger) for instance in instances]


def build_feature_vocab(
    instances: Iterable[DataInstance], tagger: Optional[Tagger] = None, side: Side = "context"
) -> FeatureVocab:
    """Tag vocabularies from already-extracted training instances."""
    tagger = tagger or RuleBasedTagger()
    instances = list(instances)
    return FeatureVocab.build(
        {
            feature: (
                instance.feature_fields.get(f"{side}_{feature}", [])
                for instance in instances
            )
            for feature in tagger.features
        }
    )
