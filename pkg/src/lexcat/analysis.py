"""Statistical evaluation of interpretable features.

Covers Pearson agreement between feature weights and human category
ratings, a paired two-sided t-test (p-values via a hand-rolled regularized
incomplete beta, so the package stays numpy-only at runtime), and a
word-sense probe that compares contextual representations of a homonym
against keyword representations of each of its meanings.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dictionary import CategoryDictionary
from .embedding import EmbeddingProvider, cosine_similarity
from .errors import InputError
from .represent import Representation, encode

RATIO_DIVIDE_MEANS = "divide-means"
RATIO_MEAN_OF_RATIOS = "mean-of-ratios"

_MAX_BETACF_ITER = 300
_BETACF_EPS = 1e-14


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation with 64-bit accumulation."""
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.ndim != 1 or xv.shape != yv.shape:
        raise InputError(f"inputs must be equal-length vectors, got {xv.shape} and {yv.shape}")
    if xv.size < 2:
        raise InputError("pearson needs at least 2 observations")
    xd = xv - xv.mean()
    yd = yv - yv.mean()
    sx = float(np.sqrt(np.sum(xd * xd)))
    sy = float(np.sqrt(np.sum(yd * yd)))
    if sx == 0.0 or sy == 0.0:
        raise InputError("pearson undefined for constant input")
    return float(np.clip(np.sum(xd * yd) / (sx * sy), -1.0, 1.0))


def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for the incomplete beta (modified Lentz).
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_BETACF_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise InputError("shape parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise InputError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_bt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
              + a * math.log(x) + b * math.log1p(-x))
    bt = math.exp(log_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: int) -> float:
    """Two-sided p-value of Student's t with df degrees of freedom."""
    if df < 1:
        raise InputError(f"degrees of freedom must be >= 1, got {df}")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return float(np.clip(regularized_incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0))


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """(t, two-sided p) for the paired differences a - b."""
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if av.ndim != 1 or av.shape != bv.shape:
        raise InputError(f"inputs must be equal-length vectors, got {av.shape} and {bv.shape}")
    n = av.size
    if n < 2:
        raise InputError("paired t-test needs at least 2 pairs")
    diff = av - bv
    sd = float(np.std(diff, ddof=1))
    if sd == 0.0:
        raise InputError("paired t-test undefined: differences have zero variance")
    t = float(np.mean(diff) / (sd / math.sqrt(n)))
    return t, t_two_sided_p(t, n - 1)


@dataclass(frozen=True)
class AnnotationSet:
    """Mean human ratings per sentence on a 0-2 scale, one column per category."""

    ids: tuple[str, ...]
    categories: tuple[str, ...]
    scores: np.ndarray  # N x d float64

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 2 or scores.shape != (len(self.ids), len(self.categories)):
            raise InputError(
                f"scores shape {scores.shape} does not match "
                f"{len(self.ids)} ids x {len(self.categories)} categories")
        if len(set(self.ids)) != len(self.ids):
            raise InputError("duplicate sentence ids")
        if scores.size and (scores.min() < 0.0 or scores.max() > 2.0):
            raise InputError("annotation scores must lie in [0, 2]")
        object.__setattr__(self, "scores", scores)


def load_annotations(path) -> AnnotationSet:
    """CSV with header ``id,<category>,...`` and one row per sentence."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise InputError(f"{path}: empty annotation file")
    header = rows[0]
    if len(header) < 2 or header[0] != "id":
        raise InputError(f"{path}: header must be 'id' followed by category names")
    categories = tuple(header[1:])
    ids = []
    scores = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise InputError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
        ids.append(row[0])
        try:
            scores.append([float(v) for v in row[1:]])
        except ValueError as err:
            raise InputError(f"{path}:{lineno}: non-numeric score ({err})") from err
    return AnnotationSet(ids=tuple(ids), categories=categories,
                         scores=np.asarray(scores, dtype=np.float64))


@dataclass(frozen=True)
class AgreementReport:
    ids: tuple[str, ...]  # sentences that entered the mean
    correlations: np.ndarray
    mean_r: float
    excluded: tuple[str, ...]  # constant feature or annotation vectors


def human_agreement(features: Sequence[Representation],
                    annotations: AnnotationSet) -> AgreementReport:
    """Per-sentence Pearson r between feature weights and human scores.

    Sentences where either vector is constant carry no correlation signal
    and are excluded rather than erroring; the report tallies them.
    """
    if len(features) != len(annotations.ids):
        raise InputError(
            f"{len(features)} representations vs {len(annotations.ids)} annotated sentences")
    kept_ids: list[str] = []
    correlations: list[float] = []
    excluded: list[str] = []
    for rep, sid, scores in zip(features, annotations.ids, annotations.scores):
        if rep.categories != annotations.categories:
            raise InputError(f"category order mismatch for sentence {sid!r}")
        if np.ptp(rep.weights) == 0.0 or np.ptp(scores) == 0.0:
            excluded.append(sid)
            continue
        kept_ids.append(sid)
        correlations.append(pearson(rep.weights, scores))
    if not correlations:
        raise InputError("no sentence had non-constant features and annotations")
    corr = np.asarray(correlations, dtype=np.float64)
    return AgreementReport(ids=tuple(kept_ids), correlations=corr,
                           mean_r=float(corr.mean()), excluded=tuple(excluded))


@dataclass(frozen=True)
class SenseData:
    """Sentences for a two-sense homonym plus 3 keywords per sense."""

    word: str
    senses: tuple[str, str]
    keywords: dict[str, tuple[str, str, str]]
    sentences: dict[str, tuple[str, ...]]

    def __post_init__(self):
        if len(set(self.senses)) != 2:
            raise InputError(f"{self.word!r}: need exactly 2 distinct senses")
        for sense in self.senses:
            kws = self.keywords.get(sense)
            if kws is None or len(kws) != 3:
                raise InputError(f"{self.word!r}/{sense!r}: need exactly 3 keywords")
            if self.word in kws:
                raise InputError(f"{self.word!r}: keywords must differ from the homonym")
            if sense not in self.sentences:
                raise InputError(f"{self.word!r}/{sense!r}: no sentences")


def load_sense_data(sentences_path, keywords_path) -> dict[str, SenseData]:
    """Sense corpus: ``word,sense,text`` rows; keywords: ``word,sense,k1,k2,k3``."""
    keywords: dict[str, dict[str, tuple[str, str, str]]] = {}
    with open(keywords_path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row == ["word", "sense", "k1", "k2", "k3"]:
                continue
            if len(row) != 5:
                raise InputError(f"{keywords_path}:{lineno}: expected word,sense,k1,k2,k3")
            word, sense = row[0], row[1]
            keywords.setdefault(word, {})[sense] = (row[2], row[3], row[4])
    sentences: dict[str, dict[str, list[str]]] = {}
    order: dict[str, list[str]] = {}
    with open(sentences_path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row == ["word", "sense", "text"]:
                continue
            if len(row) != 3:
                raise InputError(f"{sentences_path}:{lineno}: expected word,sense,text")
            word, sense, text = row
            sentences.setdefault(word, {}).setdefault(sense, []).append(text)
            if sense not in order.setdefault(word, []):
                order[word].append(sense)
    out: dict[str, SenseData] = {}
    for word, by_sense in sentences.items():
        if word not in keywords:
            raise InputError(f"{word!r}: sentences present but no keywords")
        senses = order[word]
        if len(senses) != 2:
            raise InputError(f"{word!r}: need exactly 2 senses, got {len(senses)}")
        out[word] = SenseData(
            word=word, senses=(senses[0], senses[1]),
            keywords={s: keywords[word][s] for s in senses if s in keywords[word]},
            sentences={s: tuple(by_sense[s]) for s in senses})
    return out


@dataclass(frozen=True)
class WordSenseReport:
    word: str
    n_sentences: int
    matching: np.ndarray  # per-sentence mean cosine vs matching-sense keywords
    opposing: np.ndarray
    mean_matching: float
    mean_opposing: float
    ratio: float
    t: float
    p: float


def similarity_ratio(matching: np.ndarray, opposing: np.ndarray,
                     mode: str = RATIO_DIVIDE_MEANS) -> float:
    if mode == RATIO_DIVIDE_MEANS:
        return float(np.mean(matching) / np.mean(opposing))
    if mode == RATIO_MEAN_OF_RATIOS:
        return float(np.mean(np.asarray(matching) / np.asarray(opposing)))
    raise InputError(f"unknown ratio mode: {mode!r}")


def word_sense_eval(dictionary: CategoryDictionary, provider: EmbeddingProvider,
                    data: SenseData, min_per_sense: int = 5,
                    ratio_mode: str = RATIO_DIVIDE_MEANS) -> WordSenseReport:
    """Contextual-vs-keyword similarity contrast for one homonym.

    Each sentence's representation is compared (cosine over category
    weights) with representations of the 3 keywords of its own sense and
    of the opposing sense.
    """
    for sense in data.senses:
        if len(data.sentences[sense]) < min_per_sense:
            raise InputError(
                f"{data.word!r}/{sense!r}: {len(data.sentences[sense])} sentences,"
                f" need >= {min_per_sense}")
    keyword_reps = {
        sense: [encode(dictionary, kw, provider).weights for kw in data.keywords[sense]]
        for sense in data.senses
    }
    matching: list[float] = []
    opposing: list[float] = []
    for sense in data.senses:
        other = data.senses[1] if sense == data.senses[0] else data.senses[0]
        for text in data.sentences[sense]:
            rep = encode(dictionary, text, provider).weights
            matching.append(float(np.mean(
                [cosine_similarity(rep, kw) for kw in keyword_reps[sense]])))
            opposing.append(float(np.mean(
                [cosine_similarity(rep, kw) for kw in keyword_reps[other]])))
    match_arr = np.asarray(matching, dtype=np.float64)
    opp_arr = np.asarray(opposing, dtype=np.float64)
    diffs = match_arr - opp_arr
    if np.ptp(diffs) == 0.0:
        # degenerate symmetric data (both keyword sets coincide): there is
        # no contrast to test, so report the null outcome instead of the
        # zero-variance error
        if diffs[0] != 0.0:
            raise InputError(
                f"{data.word!r}: constant nonzero matching-opposing difference; "
                f"t statistic undefined")
        t, p = 0.0, 1.0
    else:
        t, p = paired_t_test(match_arr, opp_arr)
    return WordSenseReport(
        word=data.word, n_sentences=match_arr.size,
        matching=match_arr, opposing=opp_arr,
        mean_matching=float(match_arr.mean()), mean_opposing=float(opp_arr.mean()),
        ratio=similarity_ratio(match_arr, opp_arr, ratio_mode), t=t, p=p)
