"""Encode sentences as interpretable category-weight vectors.

The weight for a category is the largest cosine similarity between the
sentence embedding and any of that category's centroids; with a single
centroid this is exactly the plain centroid-similarity formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .embedding import cosine_similarity, embed_text
from .errors import InputError, ProviderError
from .parallel import ordered_parallel_map

if TYPE_CHECKING:
    from .dictionary import CategoryDictionary

METHOD_CENTROID = "centroid"
METHOD_BOW = "bow"
METHOD_SOFTMATCH = "softmatch"


@dataclass(frozen=True, eq=False)
class Representation:
    """A category-aligned weight vector for one sentence."""

    categories: tuple[str, ...]
    weights: np.ndarray
    method: str

    def __post_init__(self):
        if len(self.weights) != len(self.categories):
            raise InputError(
                f"{len(self.weights)} weights for {len(self.categories)} categories"
            )
        if not np.isfinite(np.asarray(self.weights, dtype=np.float64)).all():
            raise InputError("non-finite weight")


def encode(dictionary: "CategoryDictionary", sentence: str, provider) -> Representation:
    """Category weights for one sentence against a built dictionary."""
    if provider.dim != dictionary.dim:
        raise InputError(
            f"provider dim {provider.dim} != dictionary dim {dictionary.dim}"
        )
    emb = embed_text(provider, sentence)
    if float(np.dot(emb.astype(np.float64), emb.astype(np.float64))) == 0.0:
        raise ProviderError(f"zero-norm embedding for sentence {sentence[:60]!r}")
    weights = np.empty(dictionary.d, dtype=np.float64)
    for i, cents in enumerate(dictionary.centroids):
        best = -np.inf
        for row in cents:
            try:
                sim = cosine_similarity(emb, row)
            except ValueError as err:
                raise InputError(
                    f"bad centroid in category {dictionary.categories[i]!r}: {err}"
                ) from err
            if sim > best:
                best = sim
        weights[i] = best
    return Representation(
        categories=dictionary.categories, weights=weights, method=METHOD_CENTROID
    )


def encode_batch(dictionary: "CategoryDictionary", sentences: Sequence[str], provider,
                 workers: int = 1) -> list[Representation]:
    """Encode many sentences; output order matches input order."""
    return ordered_parallel_map(
        lambda s: encode(dictionary, s, provider), sentences, workers=workers
    )
