"""Category embedding dictionaries.

Collect the texts a lexicon associates with each category (bare words, or
reference-corpus sentences containing them), embed them, and summarize
each category as one or more centroid vectors.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .embedding import embed_text, mean_pool
from .errors import FormatError, InputError, ProviderError
from .kmeans import kmeans
from .lexicon import Lexicon, Phrase, match_token, match_word, tokenize

SCDI_MAGIC = b"SCDI"
SCDI_VERSION = 1

MODE_WORD = "word"
MODE_REFERENCE = "reference"


@dataclass
class CategoryItems:
    """Per-category texts to embed, plus word-mode fallbacks for empties."""

    mode: str
    categories: tuple[str, ...]
    items: tuple[tuple[str, ...], ...]
    fallback: tuple[tuple[str, ...], ...] = field(default=None)  # type: ignore[assignment]
    lexicon_hash: str = ""

    def __post_init__(self):
        if self.mode not in (MODE_WORD, MODE_REFERENCE):
            raise InputError(f"unknown mode: {self.mode!r}")
        if len(self.items) != len(self.categories):
            raise InputError("items not aligned with categories")
        if self.fallback is None:
            self.fallback = tuple(() for _ in self.categories)
        if self.mode == MODE_WORD:
            for name, texts in zip(self.categories, self.items):
                if not texts:
                    raise InputError(
                        f"category {name!r} has no items in word mode"
                    )

    def item_counts(self) -> dict[str, int]:
        return {name: len(texts) for name, texts in zip(self.categories, self.items)}


def _render_pattern(pattern: str, exact_words: frozenset[str]) -> str:
    """Turn a pattern into an embeddable word.

    Exact patterns are used verbatim. A prefix stem is used only when the
    stem itself is a word listed somewhere in the lexicon; otherwise the
    shortest listed exact expansion of the stem; failing both, the raw
    stem.
    """
    if not pattern.endswith("*"):
        return pattern
    stem = pattern[:-1]
    if stem in exact_words:
        return stem
    expansions = [w for w in exact_words if w.startswith(stem)]
    if expansions:
        return min(expansions, key=lambda w: (len(w), w))
    return stem


def _render_phrase(phrase: Phrase, exact_words: frozenset[str]) -> str:
    return " ".join(_render_pattern(p, exact_words) for p in phrase)


def _word_items_for(lex: Lexicon, i: int) -> tuple[str, ...]:
    exact = lex.all_exact_words()
    seen: dict[str, None] = {}
    for p in lex.patterns[i]:
        seen.setdefault(_render_pattern(p, exact))
    for ph in lex.phrases[i]:
        seen.setdefault(_render_phrase(ph, exact))
    return tuple(seen)


def collect_word_items(lex: Lexicon) -> CategoryItems:
    """Render every category's patterns as plain words to embed."""
    items = []
    for i, name in enumerate(lex.categories):
        texts = _word_items_for(lex, i)
        if not texts:
            raise InputError(f"category {name!r} has no patterns; cannot collect words")
        items.append(texts)
    return CategoryItems(
        mode=MODE_WORD,
        categories=lex.categories,
        items=tuple(items),
        lexicon_hash=lex.fingerprint(),
    )


def _phrase_hits(lex: Lexicon, i: int, tokens: list[str]) -> bool:
    for ph in lex.phrases[i]:
        length = len(ph)
        for start in range(len(tokens) - length + 1):
            if all(match_token(p, tokens[start + j]) for j, p in enumerate(ph)):
                return True
    return False


def collect_reference_items(lex: Lexicon, corpus: Sequence[str]) -> CategoryItems:
    """Map reference sentences to every category whose words they contain.

    Categories without any matching sentence keep an empty item list; their
    word-mode items are recorded as the build-time fallback.
    """
    per_cat: list[dict[str, None]] = [dict() for _ in range(lex.d)]
    for sentence in corpus:
        tokens = tokenize(sentence)
        hits = set()
        for tok in tokens:
            hits |= match_word(lex, tok)
        for i in range(lex.d):
            if i in hits or _phrase_hits(lex, i, tokens):
                per_cat[i].setdefault(sentence)
    fallback = []
    for i in range(lex.d):
        fallback.append(() if per_cat[i] else _word_items_for(lex, i))
    return CategoryItems(
        mode=MODE_REFERENCE,
        categories=lex.categories,
        items=tuple(tuple(d) for d in per_cat),
        fallback=tuple(fallback),
        lexicon_hash=lex.fingerprint(),
    )


class CategoryDictionary:
    """Per-category centroid vectors in the source lexicon's order."""

    def __init__(self, dim: int, categories: tuple[str, ...],
                 centroids: Sequence[np.ndarray], provenance: dict):
        if dim < 1:
            raise InputError(f"dim must be positive, got {dim}")
        if len(categories) != len(centroids):
            raise InputError("centroids not aligned with categories")
        if len(set(categories)) != len(categories):
            raise InputError("duplicate category names")
        self.dim = int(dim)
        self.categories = tuple(categories)
        self.centroids = []
        for name, cents in zip(categories, centroids):
            arr = np.asarray(cents, dtype=np.float32)
            if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] != dim:
                raise InputError(
                    f"centroids for {name!r} have shape {arr.shape}, expected (P,{dim})"
                )
            if not np.isfinite(arr).all():
                raise InputError(f"non-finite centroid for {name!r}")
            arr.setflags(write=False)
            self.centroids.append(arr)
        self.centroids = tuple(self.centroids)
        self.provenance = dict(provenance)

    @property
    def d(self) -> int:
        return len(self.categories)


def build_dictionary(items: CategoryItems, provider, n_centroids: int, seed: int,
                     extra_provenance: dict | None = None) -> CategoryDictionary:
    """Embed every category's items and summarize them as centroids.

    One centroid is the column-wise mean of the item embeddings; more are
    produced by seeded k-means. Reference-mode categories with no items
    fall back to their word-mode items, recorded in provenance.
    """
    if n_centroids < 1:
        raise InputError(f"n_centroids must be >= 1, got {n_centroids}")

    texts_per_cat: list[tuple[str, ...]] = []
    fallback_used: list[str] = []
    for name, texts, fb in zip(items.categories, items.items, items.fallback):
        if not texts:
            if not fb:
                raise InputError(
                    f"category {name!r} has no items and no word fallback"
                )
            texts = fb
            fallback_used.append(name)
        texts_per_cat.append(tuple(texts))

    unique: dict[str, None] = {}
    for texts in texts_per_cat:
        for t in texts:
            unique.setdefault(t)
    unique_texts = list(unique)
    try:
        vectors = provider.embed_batch(unique_texts)
    except AttributeError:
        vectors = [provider.embed(t) for t in unique_texts]
    cache: dict[str, np.ndarray] = {}
    for text, vec in zip(unique_texts, vectors):
        arr = np.asarray(vec, dtype=np.float32)
        if arr.shape != (provider.dim,):
            raise ProviderError(
                f"provider returned shape {arr.shape} for {text!r}, expected ({provider.dim},)"
            )
        if not np.isfinite(arr).all():
            raise ProviderError(f"provider returned non-finite components for {text!r}")
        cache[text] = arr

    centroids = []
    for name, texts in zip(items.categories, texts_per_cat):
        rows = np.stack([cache[t] for t in texts])
        if n_centroids == 1:
            cents = mean_pool(rows)[None, :]
        else:
            cents = kmeans(rows.astype(np.float64), n_centroids, seed).astype(np.float32)
        centroids.append(cents)

    provenance = {
        "mode": items.mode,
        "lexicon_hash": items.lexicon_hash,
        "provider": getattr(provider, "provider_id", "unknown"),
        "seed": int(seed),
        "centroids_requested": int(n_centroids),
        "fallback_categories": sorted(fallback_used),
        "deduplicated": True,
    }
    if extra_provenance:
        provenance.update(extra_provenance)
    return CategoryDictionary(
        dim=provider.dim,
        categories=items.categories,
        centroids=centroids,
        provenance=provenance,
    )


def save_dictionary(dictionary: CategoryDictionary, path) -> None:
    """Serialize to the SCDI binary format (little-endian)."""
    with open(path, "wb") as fh:
        fh.write(SCDI_MAGIC)
        fh.write(struct.pack("<III", SCDI_VERSION, dictionary.dim, dictionary.d))
        for name, cents in zip(dictionary.categories, dictionary.centroids):
            raw = name.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", cents.shape[0]))
            fh.write(cents.astype("<f4").tobytes())
        blob = json.dumps(
            dictionary.provenance, sort_keys=True, separators=(",", ":")
        ).encode("utf-8")
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)


def load_dictionary(path) -> CategoryDictionary:
    """Load and validate an SCDI file; errors carry the byte offset."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != SCDI_MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}, expected {SCDI_MAGIC!r}", 0)
    if len(data) < 16:
        raise FormatError("truncated header", len(data))
    version, dim, n_cats = struct.unpack_from("<III", data, 4)
    if version != SCDI_VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if dim < 1:
        raise FormatError(f"dim must be positive, got {dim}", 8)
    off = 16
    names = []
    centroids = []
    for _ in range(n_cats):
        rec_off = off
        if off + 4 > len(data):
            raise FormatError("truncated record (name length)", off)
        (name_len,) = struct.unpack_from("<I", data, off)
        off += 4
        if off + name_len + 4 > len(data):
            raise FormatError("truncated record", rec_off)
        try:
            name = data[off:off + name_len].decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError("category name is not valid UTF-8", off) from None
        off += name_len
        (n_cent,) = struct.unpack_from("<I", data, off)
        off += 4
        if n_cent < 1:
            raise FormatError(f"category {name!r} has no centroids", off - 4)
        vec_bytes = n_cent * dim * 4
        if off + vec_bytes > len(data):
            raise FormatError("truncated centroid block", off)
        cents = np.frombuffer(data[off:off + vec_bytes], dtype="<f4").reshape(n_cent, dim).copy()
        if not np.isfinite(cents).all():
            raise FormatError(f"non-finite centroid for {name!r}", off)
        off += vec_bytes
        names.append(name)
        centroids.append(cents)
    if off + 4 > len(data):
        raise FormatError("missing provenance block", off)
    (blob_len,) = struct.unpack_from("<I", data, off)
    off += 4
    if off + blob_len > len(data):
        raise FormatError("truncated provenance block", off)
    try:
        provenance = json.loads(data[off:off + blob_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise FormatError("provenance is not valid JSON", off) from None
    off += blob_len
    if off != len(data):
        raise FormatError("trailing data after provenance", off)
    return CategoryDictionary(dim, tuple(names), centroids, provenance)
