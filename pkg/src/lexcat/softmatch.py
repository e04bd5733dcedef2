"""Soft-matching baseline: extend lexicon counts with word-vector similarity.

Tokens the lexicon does not match can still raise a category's weight when
their word embedding is similar enough to one of the category's exact
words. Only exact lexicon words anchor soft matching; wildcard stems have
no well-defined embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingStore, cosine_similarity
from .errors import InputError
from .lexicon import Lexicon, TokenSequence, category_counts
from .represent import METHOD_SOFTMATCH, Representation

INCREMENT_UNIT = "unit"
INCREMENT_SIMILARITY = "similarity"


@dataclass(frozen=True)
class SoftMatchConfig:
    threshold: float = 0.5
    increment: str = INCREMENT_UNIT

    def __post_init__(self):
        if not (0.0 < self.threshold <= 1.0):
            raise InputError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.increment not in (INCREMENT_UNIT, INCREMENT_SIMILARITY):
            raise InputError(f"unknown increment rule: {self.increment!r}")


def missing_anchor_words(lex: Lexicon, store: EmbeddingStore) -> list[str]:
    """Exact lexicon words with no stored embedding (skipped when matching)."""
    return sorted(w for w in lex.all_exact_words() if w not in store)


def _anchor_vectors(lex: Lexicon, store: EmbeddingStore) -> list[list[np.ndarray]]:
    return [
        [store.get(w) for w in lex.exact_words(i) if w in store]
        for i in range(lex.d)
    ]


def encode_soft_match(lex: Lexicon, sentence: TokenSequence, store: EmbeddingStore,
                      cfg: SoftMatchConfig = SoftMatchConfig()) -> Representation:
    """Bag-of-categories counts plus soft matches for unmatched tokens.

    For every token without a lexicon match, each category whose best
    anchor similarity strictly exceeds the threshold gains 1 (unit rule)
    or the similarity itself. Tokens absent from the store contribute
    nothing.
    """
    counts, matched = category_counts(lex, sentence)
    weights = np.asarray(counts, dtype=np.float64)
    anchors = _anchor_vectors(lex, store)
    for pos, token in enumerate(sentence):
        if matched[pos] or token not in store:
            continue
        vec = store.get(token)
        for i in range(lex.d):
            best = -np.inf
            for anchor in anchors[i]:
                try:
                    sim = cosine_similarity(vec, anchor)
                except ValueError:
                    sim = 0.0  # zero-norm stored vector: treat as no signal
                if sim > best:
                    best = sim
            if best > cfg.threshold:
                weights[i] += 1.0 if cfg.increment == INCREMENT_UNIT else best
    return Representation(categories=lex.categories, weights=weights, method=METHOD_SOFTMATCH)
