"""Homonym sense-separation demo with a hand-built embedding store.

Constructs contexts for two senses of "bat" whose stored sentence vectors
lean toward the matching sense's keywords, then reports the per-sense mean
similarities, the similarity ratio, and the paired t-test.

Usage: python3 scripts/wordsense_demo.py
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from lexcat.analysis import SenseData, word_sense_eval
from lexcat.dictionary import build_dictionary, collect_word_items
from lexcat.embedding import EmbeddingStore, StoreEmbeddingProvider
from lexcat.lexicon import parse_category_tsv

ANIMAL_AXIS = np.array([1.0, 0.0, 0.0], dtype=np.float32)
SPORT_AXIS = np.array([0.0, 1.0, 0.0], dtype=np.float32)

ANIMAL_SENTENCES = [f"the bat flew out of the cave at dusk {i}" for i in range(6)]
SPORT_SENTENCES = [f"he swung the bat and hit a home run {i}" for i in range(6)]
ANIMAL_KEYWORDS = ("cave", "wings", "nocturnal")
SPORT_KEYWORDS = ("baseball", "swing", "pitch")


def lean(axis, other, w):
    v = w * axis + (1 - w) * other
    return (v / np.linalg.norm(v)).astype(np.float32)


def main():
    entries = {}
    for j, kw in enumerate(ANIMAL_KEYWORDS):
        entries[kw] = lean(ANIMAL_AXIS, SPORT_AXIS, w=0.93 + 0.02 * j)
    for j, kw in enumerate(SPORT_KEYWORDS):
        entries[kw] = lean(SPORT_AXIS, ANIMAL_AXIS, w=0.93 + 0.02 * j)
    # per-sentence lean varies so the paired differences are not degenerate
    for j, s in enumerate(ANIMAL_SENTENCES):
        entries[s] = lean(ANIMAL_AXIS, SPORT_AXIS, w=0.78 + 0.03 * j)
    for j, s in enumerate(SPORT_SENTENCES):
        entries[s] = lean(SPORT_AXIS, ANIMAL_AXIS, w=0.80 + 0.03 * j)
    # category words so the dictionary spans the same 3-d space
    entries["animalia"] = ANIMAL_AXIS
    entries["athletics"] = SPORT_AXIS
    store = EmbeddingStore(3, entries)
    provider = StoreEmbeddingProvider(store)

    lex = parse_category_tsv("nature\tanimalia\nsport\tathletics\n")
    dictionary = build_dictionary(collect_word_items(lex), provider, 1, seed=0)

    data = SenseData(
        word="bat",
        senses=("animal", "sport"),
        keywords={"animal": ANIMAL_KEYWORDS, "sport": SPORT_KEYWORDS},
        sentences={"animal": list(ANIMAL_SENTENCES), "sport": list(SPORT_SENTENCES)},
    )
    report = word_sense_eval(dictionary, provider, data)
    print(f"word            : {report.word}")
    print(f"sentences used  : {report.n_sentences}")
    print(f"matching mean   : {report.mean_matching:.4f}")
    print(f"opposing mean   : {report.mean_opposing:.4f}")
    print(f"similarity ratio: {report.ratio:.4f}  (> 1 separates the senses)")
    print(f"paired t        : {report.t:.3f}   two-sided p: {report.p:.2e}")


if __name__ == "__main__":
    main()
