"""Word-to-category lexicons: parsing, token matching, bag-of-categories.

A lexicon maps patterns to named categories. Patterns are either exact
tokens, prefix patterns (stem + trailing ``*``), or phrases (sequences of
two or more such patterns matched against token n-grams). Category order
defines the output dimension order everywhere downstream.
"""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field
from typing import IO, Iterable, Union

import numpy as np

from .errors import DicParseError, InputError

# A normalized token sequence; see tokenize().
TokenSequence = list[str]

Phrase = tuple[str, ...]

_DASH_RUN = re.compile(r"[\-‐-―]{2,}")
_UNICODE_DASH = re.compile(r"[‐-―]")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_edge_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> TokenSequence:
    """Normalize text into matchable tokens.

    NFC, lowercased, split on whitespace. Runs of two or more hyphens and
    any non-ASCII dash separate tokens; a single ASCII hyphen and internal
    apostrophes are kept. Leading/trailing punctuation is stripped.
    Deterministic and idempotent: re-tokenizing the joined output is a
    no-op.
    """
    # second NFC: lowercasing can denormalize (e.g. U+0130), and
    # idempotence requires the output to be a fixpoint
    text = unicodedata.normalize("NFC", unicodedata.normalize("NFC", text).lower())
    text = _DASH_RUN.sub(" ", text)
    text = _UNICODE_DASH.sub(" ", text)
    tokens = []
    for raw in text.split():
        tok = _strip_edge_punct(raw)
        if tok:
            tokens.append(tok)
    return tokens


def _validate_pattern(pattern: str) -> None:
    if not pattern:
        raise InputError("empty pattern")
    head = pattern[:-1] if pattern.endswith("*") else pattern
    if not head:
        raise InputError(f"prefix pattern with empty stem: {pattern!r}")
    if "*" in head:
        raise InputError(f"wildcard only allowed at the end of a pattern: {pattern!r}")


def match_token(pattern: str, token: str) -> bool:
    """True when a single pattern matches a whole normalized token."""
    if pattern.endswith("*"):
        return token.startswith(pattern[:-1])
    return token == pattern


@dataclass(frozen=True)
class Lexicon:
    """Immutable category -> patterns mapping.

    `patterns[i]` and `phrases[i]` belong to `categories[i]`. Both are kept
    in sorted canonical order so that parse/serialize round trips and all
    derived artifacts are stable.
    """

    categories: tuple[str, ...]
    patterns: tuple[tuple[str, ...], ...]
    phrases: tuple[tuple[Phrase, ...], ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.phrases is None:
            object.__setattr__(self, "phrases", tuple(() for _ in self.categories))
        if len(self.categories) < 1:
            raise InputError("lexicon must define at least one category")
        if len(set(self.categories)) != len(self.categories):
            raise InputError("duplicate category names")
        if len(self.patterns) != len(self.categories) or len(self.phrases) != len(self.categories):
            raise InputError("patterns/phrases not aligned with categories")
        object.__setattr__(
            self, "patterns", tuple(tuple(sorted(set(p))) for p in self.patterns)
        )
        object.__setattr__(
            self, "phrases", tuple(tuple(sorted(set(p))) for p in self.phrases)
        )
        for pats in self.patterns:
            for p in pats:
                _validate_pattern(p)
        for phrs in self.phrases:
            for ph in phrs:
                if len(ph) < 2:
                    raise InputError(f"phrase must have >= 2 tokens: {ph!r}")
                for p in ph:
                    _validate_pattern(p)

    @property
    def d(self) -> int:
        return len(self.categories)

    def index(self, name: str) -> int:
        try:
            return self.categories.index(name)
        except ValueError:
            raise InputError(f"unknown category: {name!r}") from None

    def exact_words(self, i: int) -> tuple[str, ...]:
        return tuple(p for p in self.patterns[i] if not p.endswith("*"))

    def all_exact_words(self) -> frozenset[str]:
        words = set()
        for pats in self.patterns:
            words.update(p for p in pats if not p.endswith("*"))
        return frozenset(words)

    def fingerprint(self) -> str:
        """Stable content hash used in dictionary provenance."""
        blob = json.dumps(
            {
                "categories": list(self.categories),
                "patterns": [list(p) for p in self.patterns],
                "phrases": [[list(ph) for ph in p] for p in self.phrases],
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _read_lines(source: Union[str, IO[str], Iterable[str]]) -> list[str]:
    if isinstance(source, str):
        return source.splitlines()
    if hasattr(source, "read"):
        return source.read().splitlines()
    return [line.rstrip("\n") for line in source]


def _normalize_pattern_field(raw: str, line_no: int) -> tuple[str, ...]:
    """Split a pattern field into one or more normalized pattern tokens."""
    parts = unicodedata.normalize("NFC", raw).lower().split()
    if not parts:
        raise DicParseError("empty pattern", line_no)
    out = []
    for part in parts:
        try:
            _validate_pattern(part)
        except InputError as exc:
            raise DicParseError(str(exc), line_no) from None
        out.append(part)
    return tuple(out)


def parse_liwc_dic(source: Union[str, IO[str], Iterable[str]]) -> Lexicon:
    """Parse a %-delimited .dic lexicon.

    Layout: a ``%`` line, then ``ID<TAB>name`` header lines, then a ``%``
    line, then word lines ``pattern<TAB>ID[<TAB>ID...]``. Category order
    follows the numeric IDs. A pattern field containing spaces is a phrase.
    """
    lines = _read_lines(source)
    ids_to_name: dict[int, str] = {}
    state = 0  # 0 = before header, 1 = in header, 2 = in body
    patterns: dict[int, list[str]] = {}
    phrases: dict[int, list[Phrase]] = {}

    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if state == 0:
            if line != "%":
                raise DicParseError("expected '%' header delimiter", line_no)
            state = 1
            continue
        if state == 1:
            if line == "%":
                if not ids_to_name:
                    raise DicParseError("header defines no categories", line_no)
                state = 2
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
                raise DicParseError(f"malformed header line: {raw!r}", line_no)
            id_text, name = fields[0].strip(), fields[1].strip()
            try:
                cat_id = int(id_text)
            except ValueError:
                raise DicParseError(f"non-numeric category ID: {id_text!r}", line_no) from None
            if cat_id in ids_to_name:
                raise DicParseError(f"duplicate category ID: {cat_id}", line_no)
            if name in ids_to_name.values():
                raise DicParseError(f"duplicate category name: {name!r}", line_no)
            ids_to_name[cat_id] = name
            patterns[cat_id] = []
            phrases[cat_id] = []
            continue
        # body
        fields = line.split("\t")
        if len(fields) < 2:
            raise DicParseError(f"word line without category IDs: {raw!r}", line_no)
        parts = _normalize_pattern_field(fields[0], line_no)
        for id_text in fields[1:]:
            id_text = id_text.strip()
            if not id_text:
                continue
            try:
                cat_id = int(id_text)
            except ValueError:
                raise DicParseError(f"non-numeric category ID: {id_text!r}", line_no) from None
            if cat_id not in ids_to_name:
                raise DicParseError(f"unknown category ID: {cat_id}", line_no)
            if len(parts) == 1:
                patterns[cat_id].append(parts[0])
            else:
                phrases[cat_id].append(parts)

    if state != 2:
        raise DicParseError("missing '%' header delimiter", len(lines) + 1)

    order = sorted(ids_to_name)
    return Lexicon(
        categories=tuple(ids_to_name[i] for i in order),
        patterns=tuple(tuple(patterns[i]) for i in order),
        phrases=tuple(tuple(phrases[i]) for i in order),
    )


def format_liwc_dic(lex: Lexicon) -> str:
    """Emit a .dic file that parses back to an identical lexicon."""
    out = ["%"]
    for i, name in enumerate(lex.categories, start=1):
        out.append(f"{i}\t{name}")
    out.append("%")
    entries: dict[str, list[int]] = {}
    for i in range(lex.d):
        for p in lex.patterns[i]:
            entries.setdefault(p, []).append(i + 1)
        for ph in lex.phrases[i]:
            entries.setdefault(" ".join(ph), []).append(i + 1)
    for pattern in sorted(entries):
        ids = "\t".join(str(c) for c in entries[pattern])
        out.append(f"{pattern}\t{ids}")
    return "\n".join(out) + "\n"


def parse_category_tsv(source: Union[str, IO[str], Iterable[str]]) -> Lexicon:
    """Parse a one-category-per-line TSV lexicon: ``name TAB word TAB word ...``."""
    lines = _read_lines(source)
    names: list[str] = []
    patterns: list[list[str]] = []
    phrases: list[list[Phrase]] = []
    for line_no, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        fields = raw.split("\t")
        name = fields[0].strip()
        if not name:
            raise DicParseError("blank category name", line_no)
        if name in names:
            raise DicParseError(f"duplicate category name: {name!r}", line_no)
        words = [f for f in fields[1:] if f.strip()]
        if not words:
            raise DicParseError(f"category {name!r} has no words", line_no)
        names.append(name)
        pats: list[str] = []
        phrs: list[Phrase] = []
        for w in words:
            parts = _normalize_pattern_field(w, line_no)
            if len(parts) == 1:
                pats.append(parts[0])
            else:
                phrs.append(parts)
        patterns.append(pats)
        phrases.append(phrs)
    if not names:
        raise DicParseError("no categories found", len(lines) + 1)
    return Lexicon(
        categories=tuple(names),
        patterns=tuple(tuple(p) for p in patterns),
        phrases=tuple(tuple(p) for p in phrases),
    )


def format_category_tsv(lex: Lexicon) -> str:
    out = []
    for i, name in enumerate(lex.categories):
        cells = list(lex.patterns[i]) + [" ".join(ph) for ph in lex.phrases[i]]
        out.append("\t".join([name] + cells))
    return "\n".join(out) + "\n"


def filter_categories(lex: Lexicon, keep: Iterable[str]) -> Lexicon:
    """Restrict to the given category names, preserving original order."""
    keep = set(keep)
    unknown = sorted(keep - set(lex.categories))
    if unknown:
        raise InputError(f"unknown categories in keep list: {', '.join(unknown)}")
    kept = [i for i, name in enumerate(lex.categories) if name in keep]
    return Lexicon(
        categories=tuple(lex.categories[i] for i in kept),
        patterns=tuple(lex.patterns[i] for i in kept),
        phrases=tuple(lex.phrases[i] for i in kept),
    )


def load_keep_list(source: Union[str, IO[str], Iterable[str]]) -> list[str]:
    """Read a keep-list file: one category name per line, ``#`` comments."""
    names = []
    for raw in _read_lines(source):
        line = raw.split("#", 1)[0].strip()
        if line and line not in names:
            names.append(line)
    return names


def match_word(lex: Lexicon, token: str) -> frozenset[int]:
    """Indices of every category with a single-token pattern matching `token`."""
    hits = set()
    for i in range(lex.d):
        if any(match_token(p, token) for p in lex.patterns[i]):
            hits.add(i)
    return frozenset(hits)


def category_counts(lex: Lexicon, sentence: TokenSequence) -> tuple[list[int], list[bool]]:
    """Raw per-category match counts plus a matched-anywhere flag per token.

    Phrase patterns match greedily (longest first, left to right) and
    consume their tokens for single-token matching within the same
    category.
    """
    counts = [0] * lex.d
    matched = [False] * len(sentence)
    n = len(sentence)
    for i in range(lex.d):
        consumed: set[int] = set()
        lengths = sorted({len(ph) for ph in lex.phrases[i]}, reverse=True)
        for length in lengths:
            candidates = [ph for ph in lex.phrases[i] if len(ph) == length]
            for start in range(n - length + 1):
                span = range(start, start + length)
                if any(pos in consumed for pos in span):
                    continue
                for ph in candidates:
                    if all(match_token(p, sentence[start + j]) for j, p in enumerate(ph)):
                        counts[i] += 1
                        consumed.update(span)
                        for pos in span:
                            matched[pos] = True
                        break
        for pos, tok in enumerate(sentence):
            if pos in consumed:
                continue
            if any(match_token(p, tok) for p in lex.patterns[i]):
                counts[i] += 1
                matched[pos] = True
    return counts, matched


def encode_bag_of_categories(lex: Lexicon, sentence: TokenSequence, normalize: bool = False):
    """Bag-of-categories baseline: per-category match counts for a sentence.

    With ``normalize`` the counts are divided by the token count (error on
    an empty sentence).
    """
    from .represent import METHOD_BOW, Representation

    counts, _ = category_counts(lex, sentence)
    if normalize:
        if not sentence:
            raise InputError("cannot normalize counts for an empty sentence")
        weights = np.asarray(counts, dtype=np.float64) / len(sentence)
    else:
        weights = np.asarray(counts, dtype=np.int64)
    return Representation(categories=lex.categories, weights=weights, method=METHOD_BOW)
