import numpy as np
import pytest

from lexcat.dictionary import build_dictionary, collect_word_items
from lexcat.embedding import EmbeddingStore, PseudoEmbeddingProvider
from lexcat.lexicon import parse_category_tsv


@pytest.fixture
def toy_lexicon():
    return parse_category_tsv(
        "happy\thappy\tjoy*\tglad\n"
        "sad\tsad\tcry*\tgloomy\n"
        "social\tfriend*\tparty\ttalk\n"
    )


@pytest.fixture
def pseudo_provider():
    return PseudoEmbeddingProvider(dim=16, seed=11)


@pytest.fixture
def toy_dictionary(toy_lexicon, pseudo_provider):
    return build_dictionary(collect_word_items(toy_lexicon), pseudo_provider,
                            n_centroids=1, seed=11)


def axis_store():
    """3-d store with hand-placed vectors: cos(joyful, happy) = 0.8."""
    return EmbeddingStore(3, {
        "happy": [1.0, 0.0, 0.0],
        "sad": [0.0, 1.0, 0.0],
        "joyful": [0.8, 0.1, np.sqrt(0.35)],
    })


@pytest.fixture
def unit_axis_store():
    return axis_store()
