"""End-to-end demo: store-backed provider -> dictionary -> features -> probe.

Builds a small embedding store by hand (standing in for precomputed model
embeddings), constructs a category dictionary from a toy lexicon, encodes a
12-sentence corpus, and trains a linear probe on the features. The store
vectors lean toward a per-class axis, so the category weights genuinely
separate the classes and the probe beats the majority floor.

Usage: python3 scripts/toy_pipeline.py [--outdir runs/toy] [--seed 7]
"""

import argparse
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from lexcat.dictionary import build_dictionary, collect_word_items, save_dictionary
from lexcat.embedding import EmbeddingStore, StoreEmbeddingProvider, write_embedding_store
from lexcat.featfile import write_features
from lexcat.lexicon import parse_category_tsv
from lexcat.probe import (
    LabeledDataset,
    ProbeConfig,
    baseline_majority_mean,
    evaluate,
    train_linear_probe,
)
from lexcat.represent import encode_batch

LEXICON = (
    "happy\thappy\tjoyful\tglad\tdelighted\n"
    "sad\tsad\tcrying\tgloomy\tmiserable\n"
    "social\tfriends\tparty\ttalk\tfamily\n"
)

POSITIVE = [
    "what a joyful day with friends",
    "so glad the party went well",
    "delighted to talk with family",
    "a glad and joyful morning",
    "happy talk among friends",
    "the party made everyone glad",
]
NEGATIVE = [
    "crying alone in a gloomy room",
    "a miserable and sad evening",
    "sad news made everyone cry",
    "gloomy skies and gloomier moods",
    "the miserable silence felt sad",
    "no friends just gloom",
]

AXES = {"happy": 0, "sad": 1, "social": 2}


def lean(rng, axis, dim=8, weight=0.85):
    """Unit vector pointing mostly along one axis, with seeded jitter."""
    v = rng.normal(0.0, 0.15, size=dim)
    v[axis] += weight
    return (v / np.linalg.norm(v)).astype(np.float32)


def build_store(lex, seed):
    rng = np.random.default_rng(seed)
    entries = {}
    for i, cat in enumerate(lex.categories):
        for word in lex.exact_words(i):
            entries[word] = lean(rng, AXES[cat])
    for text in POSITIVE:
        entries[text] = lean(rng, AXES["happy"])
    for text in NEGATIVE:
        entries[text] = lean(rng, AXES["sad"])
    return EmbeddingStore(8, entries)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="runs/toy", type=pathlib.Path)
    ap.add_argument("--seed", default=7, type=int)
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    lex = parse_category_tsv(LEXICON)
    store = build_store(lex, args.seed)
    write_embedding_store(store, args.outdir / "toy.embs")
    provider = StoreEmbeddingProvider(store)

    dictionary = build_dictionary(collect_word_items(lex), provider, 1, seed=args.seed)
    save_dictionary(dictionary, args.outdir / "toy.scdi")

    sentences = POSITIVE + NEGATIVE
    labels = np.array([1] * len(POSITIVE) + [0] * len(NEGATIVE))
    reps = encode_batch(dictionary, sentences, provider, workers=4)
    features = np.stack([r.weights for r in reps])
    write_features(args.outdir / "toy_features.csv", dictionary.categories,
                   features, meta={"provider": provider.provider_id,
                                   "seed": str(args.seed)})

    # leave-every-third-out split keeps both classes in both halves
    test_mask = np.arange(len(sentences)) % 3 == 0
    train = LabeledDataset(features[~test_mask], labels[~test_mask], "train",
                           classes=("neg", "pos"))
    test = LabeledDataset(features[test_mask], labels[test_mask], "test",
                          classes=("neg", "pos"))

    model = train_linear_probe(train, "classification", ProbeConfig(seed=args.seed))
    print(f"categories      : {', '.join(dictionary.categories)}")
    print(f"train sentences : {train.n}   test sentences: {test.n}")
    print(f"probe accuracy  : {evaluate(model, test):.3f}")
    print(f"majority floor  : {baseline_majority_mean(train, test, 'classification'):.3f}")
    print(f"artifacts in    : {args.outdir}")


if __name__ == "__main__":
    main()
