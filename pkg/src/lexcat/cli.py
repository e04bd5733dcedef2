"""Command-line entry point.

Subcommands cover the full pipeline: build-dict, encode, baseline,
probe-train, probe-eval, analyze-agreement, analyze-wordsense. Every flag
can come from an optional JSON config file (``--config``); explicit flags
win. Machine-readable results go to stdout as JSON, progress to stderr.
Every output embeds the seed, provider id, and a config hash (worker
count excluded, so results are independent of parallelism).

Exit codes: 0 success, 2 input errors, 3 provider errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis, featfile, probe, softmatch
from .dictionary import (MODE_REFERENCE, MODE_WORD, build_dictionary,
                         collect_reference_items, collect_word_items,
                         load_dictionary, save_dictionary)
from .embedding import (EMBS_MAGIC, PseudoEmbeddingProvider, ServiceEmbeddingProvider,
                        StoreEmbeddingProvider, load_embedding_store)
from .errors import BatchItemError, InputError, ProviderError
from .lexicon import (Lexicon, encode_bag_of_categories, filter_categories,
                      load_keep_list, parse_category_tsv, parse_liwc_dic, tokenize)
from .represent import (METHOD_BOW, METHOD_CENTROID, METHOD_SOFTMATCH,
                        Representation, encode_batch)

_DEFAULTS = {
    "lexicon_format": "auto",
    "mode": MODE_WORD,
    "centroids": 1,
    "seed": 0,
    "dim": None,
    "workers": None,  # filled from cpu count at run time
    "normalize": False,
    "method": METHOD_BOW,
    "threshold": 0.5,
    "increment": softmatch.INCREMENT_UNIT,
    "label_column": "label",
    "learning_rate": 0.1,
    "max_iter": 2000,
    "tol": 1e-7,
    "patience": 20,
    "l2": 1e-4,
    "standardize": False,
    "ratio_mode": analysis.RATIO_DIVIDE_MEANS,
    "min_per_sense": 5,
}


@dataclass(frozen=True)
class RunConfig:
    """Merged options for one invocation (config file < flags)."""

    subcommand: str
    lexicon: str | None = None
    lexicon_format: str = "auto"
    keep: str | None = None
    mode: str = MODE_WORD
    corpus: str | None = None
    dictionary: str | None = None
    input: str | None = None
    out: str | None = None
    binary_out: str | None = None
    csv_out: str | None = None
    provider: str | None = None
    dim: int | None = None
    centroids: int = 1
    seed: int = 0
    workers: int | None = None
    normalize: bool = False
    method: str = METHOD_BOW
    threshold: float = 0.5
    increment: str = softmatch.INCREMENT_UNIT
    train: str | None = None
    test: str | None = None
    labels: str | None = None
    label_column: str = "label"
    task: str | None = None
    model: str | None = None
    model_out: str | None = None
    learning_rate: float = 0.1
    max_iter: int = 2000
    tol: float = 1e-7
    patience: int = 20
    l2: float = 1e-4
    standardize: bool = False
    baseline_train: str | None = None
    features: str | None = None
    annotations: str | None = None
    sentences: str | None = None
    keywords: str | None = None
    ratio_mode: str = analysis.RATIO_DIVIDE_MEANS
    min_per_sense: int = 5

    def config_hash(self) -> str:
        """Hash of everything that can change the output bytes.

        The worker count is excluded: results are order-stable, so any
        parallelism yields the same artifact.
        """
        payload = dataclasses.asdict(self)
        payload.pop("workers")
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def effective_workers(self) -> int:
        if self.workers is not None:
            return self.workers
        return os.cpu_count() or 1


def _require(cfg: RunConfig, *fields: str) -> None:
    missing = [f for f in fields if getattr(cfg, f) in (None, "")]
    if missing:
        raise InputError(
            f"{cfg.subcommand}: missing required option(s): "
            + ", ".join("--" + f.replace("_", "-") for f in missing))


def make_provider(spec: str, dim: int | None = None):
    """Build a provider from ``pseudo:SEED``, ``store:PATH`` or ``service:URL``."""
    kind, _, rest = spec.partition(":")
    if kind == "pseudo":
        try:
            seed = int(rest)
        except ValueError:
            raise InputError(f"pseudo provider needs an integer seed, got {rest!r}") from None
        if dim is None:
            raise InputError("pseudo provider needs --dim (or a dictionary to infer it from)")
        return PseudoEmbeddingProvider(dim=dim, seed=seed)
    if kind == "store":
        if not rest:
            raise InputError("store provider needs a path: store:PATH")
        return StoreEmbeddingProvider(load_embedding_store(rest), provider_id=f"store:{rest}")
    if kind == "service":
        if not rest:
            raise InputError("service provider needs a URL: service:URL")
        return ServiceEmbeddingProvider(rest, dim=dim)
    raise InputError(f"unknown provider spec {spec!r}; use pseudo:SEED, store:PATH or service:URL")


def load_lexicon(cfg: RunConfig) -> Lexicon:
    path = cfg.lexicon
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    fmt = cfg.lexicon_format
    if fmt == "auto":
        if path.endswith(".dic"):
            fmt = "dic"
        elif path.endswith(".tsv"):
            fmt = "tsv"
        else:
            stripped = next((ln for ln in text.splitlines() if ln.strip()), "")
            fmt = "dic" if stripped.strip() == "%" else "tsv"
    if fmt == "dic":
        lex = parse_liwc_dic(text)
    elif fmt == "tsv":
        lex = parse_category_tsv(text)
    else:
        raise InputError(f"unknown lexicon format {cfg.lexicon_format!r}")
    if cfg.keep:
        with open(cfg.keep, "r", encoding="utf-8") as fh:
            lex = filter_categories(lex, load_keep_list(fh))
    return lex


def _read_sentences(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


def _emit(payload: dict, out_path: str | None = None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    sys.stdout.write(text + "\n")


def _progress(message: str) -> None:
    print(message, file=sys.stderr)


def _base_meta(cfg: RunConfig, provider=None) -> dict:
    return {
        "seed": cfg.seed,
        "provider": getattr(provider, "provider_id", "none"),
        "config_hash": cfg.config_hash(),
    }


def cmd_build_dict(cfg: RunConfig) -> None:
    _require(cfg, "lexicon", "provider", "out")
    lex = load_lexicon(cfg)
    _progress(f"lexicon: {lex.d} categories")
    if cfg.mode == MODE_WORD:
        items = collect_word_items(lex)
    elif cfg.mode == MODE_REFERENCE:
        _require(cfg, "corpus")
        corpus = [s for s in _read_sentences(cfg.corpus) if s.strip()]
        items = collect_reference_items(lex, corpus)
    else:
        raise InputError(f"unknown mode {cfg.mode!r}")
    provider = make_provider(cfg.provider, dim=cfg.dim)
    dictionary = build_dictionary(items, provider, cfg.centroids, cfg.seed,
                                  extra_provenance={"config_hash": cfg.config_hash()})
    fallbacks = dictionary.provenance["fallback_categories"]
    if fallbacks:
        _progress(f"warning: {len(fallbacks)} categories fell back to word mode: "
                  + ", ".join(fallbacks))
    save_dictionary(dictionary, cfg.out)
    _emit({
        **_base_meta(cfg, provider),
        "categories": dictionary.d,
        "dim": dictionary.dim,
        "mode": items.mode,
        "centroids": cfg.centroids,
        "items_per_category": items.item_counts(),
        "fallback_categories": list(fallbacks),
        "out": cfg.out,
    })


def _write_outputs(cfg: RunConfig, categories, rows, method: str, provider,
                   extra_meta: dict | None = None) -> None:
    meta = {**_base_meta(cfg, provider), "method": method, **(extra_meta or {})}
    ids = [str(i) for i in range(len(rows))]
    featfile.write_features(cfg.out, categories, rows, ids=ids, meta=meta)
    if cfg.binary_out:
        featfile.write_feature_matrix(cfg.binary_out, categories, rows, ids=ids, meta=meta)


def cmd_encode(cfg: RunConfig) -> None:
    _require(cfg, "dictionary", "provider", "input", "out")
    dictionary = load_dictionary(cfg.dictionary)
    provider = make_provider(cfg.provider, dim=cfg.dim or dictionary.dim)
    if provider.dim is not None and provider.dim != dictionary.dim:
        raise InputError(
            f"provider dim {provider.dim} does not match dictionary dim {dictionary.dim}")
    sentences = _read_sentences(cfg.input)
    _progress(f"encoding {len(sentences)} sentences against {dictionary.d} categories")
    reps = encode_batch(dictionary, sentences, provider, workers=cfg.effective_workers())
    _write_outputs(cfg, dictionary.categories, [r.weights for r in reps],
                   METHOD_CENTROID, provider)
    _emit({
        **_base_meta(cfg, provider),
        "rows": len(reps),
        "categories": dictionary.d,
        "method": METHOD_CENTROID,
        "out": cfg.out,
    })


def cmd_baseline(cfg: RunConfig) -> None:
    _require(cfg, "lexicon", "input", "out")
    lex = load_lexicon(cfg)
    sentences = _read_sentences(cfg.input)
    _progress(f"{cfg.method} baseline over {len(sentences)} sentences")
    provider = None
    extra: dict = {}
    if cfg.method == METHOD_BOW:
        rows = []
        for i, line in enumerate(sentences):
            try:
                rows.append(encode_bag_of_categories(lex, tokenize(line), cfg.normalize).weights)
            except InputError as err:
                raise InputError(f"row {i}: {err}") from err
        extra["normalize"] = cfg.normalize
    elif cfg.method == METHOD_SOFTMATCH:
        _require(cfg, "provider")
        kind, _, rest = cfg.provider.partition(":")
        if kind != "store":
            raise InputError("softmatch needs word vectors from a store:PATH provider")
        store = load_embedding_store(rest)
        provider = StoreEmbeddingProvider(store, provider_id=cfg.provider)
        match_cfg = softmatch.SoftMatchConfig(threshold=cfg.threshold, increment=cfg.increment)
        missing = softmatch.missing_anchor_words(lex, store)
        if missing:
            _progress(f"warning: {len(missing)} lexicon words have no stored vector")
        rows = [softmatch.encode_soft_match(lex, tokenize(line), store, match_cfg).weights
                for line in sentences]
        extra.update(threshold=cfg.threshold, increment=cfg.increment)
    else:
        raise InputError(f"unknown baseline method {cfg.method!r}")
    _write_outputs(cfg, lex.categories, rows, cfg.method, provider, extra)
    _emit({
        **_base_meta(cfg, provider),
        "rows": len(rows),
        "categories": lex.d,
        "method": cfg.method,
        "out": cfg.out,
        **extra,
    })


def _load_dataset(cfg: RunConfig, path: str, split: str) -> probe.LabeledDataset:
    """CSV with a label column, or a binary feature matrix plus a labels CSV."""
    with open(path, "rb") as fh:
        is_binary = fh.read(4) == EMBS_MAGIC
    if not is_binary:
        return probe.load_labeled_csv(path, cfg.label_column, cfg.task, split=split)
    _require(cfg, "labels")
    _, _, ids, matrix = featfile.read_feature_matrix(path)
    by_id: dict[str, str] = {}
    with open(cfg.labels, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines or lines[0].split(",")[0] != "id":
        raise InputError(f"{cfg.labels}: labels file needs an 'id,<label>' header")
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 2:
            raise InputError(f"{cfg.labels}:{lineno}: expected id,label")
        by_id[cells[0]] = cells[1]
    try:
        raw = [by_id[i] for i in ids]
    except KeyError as err:
        raise InputError(f"{cfg.labels}: no label for row id {err.args[0]!r}") from None
    if cfg.task == probe.TASK_REGRESSION:
        try:
            targets = np.asarray([float(v) for v in raw], dtype=np.float64)
        except ValueError as err:
            raise InputError(f"{cfg.labels}: non-numeric regression target ({err})") from None
        return probe.LabeledDataset(features=matrix, targets=targets, split=split)
    classes = probe._class_order(raw)
    index = {c: i for i, c in enumerate(classes)}
    targets = np.asarray([index[v] for v in raw], dtype=np.int64)
    return probe.LabeledDataset(features=matrix, targets=targets, split=split,
                                classes=tuple(classes))


def _metric_name(task: str) -> str:
    return "accuracy" if task == probe.TASK_CLASSIFICATION else "r2"


def cmd_probe_train(cfg: RunConfig) -> None:
    _require(cfg, "train", "task", "model_out")
    train = _load_dataset(cfg, cfg.train, "train")
    _progress(f"training {cfg.task} probe on {train.n} x {train.width} features")
    probe_cfg = probe.ProbeConfig(
        learning_rate=cfg.learning_rate, max_iter=cfg.max_iter, tol=cfg.tol,
        patience=cfg.patience, l2=cfg.l2, seed=cfg.seed, standardize=cfg.standardize)
    model = probe.train_linear_probe(train, cfg.task, probe_cfg)
    probe.save_probe_model(cfg.model_out, model)
    _emit({
        **_base_meta(cfg),
        "task": cfg.task,
        "n": train.n,
        "train_" + _metric_name(cfg.task): probe.evaluate(model, train),
        "final_loss": model.meta["final_loss"],
        "epochs": model.meta["epochs"],
        "model_out": cfg.model_out,
    }, cfg.out)


def cmd_probe_eval(cfg: RunConfig) -> None:
    _require(cfg, "model", "test")
    model = probe.load_probe_model(cfg.model)
    cfg = dataclasses.replace(cfg, task=model.task)
    test = _load_dataset(cfg, cfg.test, "test")
    payload = {
        **_base_meta(cfg),
        "task": model.task,
        "n": test.n,
        "metric": _metric_name(model.task),
        _metric_name(model.task): probe.evaluate(model, test),
    }
    if cfg.baseline_train:
        train = _load_dataset(cfg, cfg.baseline_train, "train")
        payload["baseline_" + _metric_name(model.task)] = probe.baseline_majority_mean(
            train, test, model.task)
    _emit(payload, cfg.out)


def _load_feature_table(path: str):
    with open(path, "rb") as fh:
        is_binary = fh.read(4) == EMBS_MAGIC
    reader = featfile.read_feature_matrix if is_binary else featfile.read_features
    return reader(path)


def cmd_analyze_agreement(cfg: RunConfig) -> None:
    _require(cfg, "features", "annotations")
    meta, categories, ids, matrix = _load_feature_table(cfg.features)
    annotations = analysis.load_annotations(cfg.annotations)
    rows = {rid: matrix[i] for i, rid in enumerate(ids)}
    missing = [sid for sid in annotations.ids if sid not in rows]
    if missing:
        raise InputError("no features for annotated sentence(s): " + ", ".join(missing[:5]))
    feats = [Representation(categories=categories, weights=rows[sid],
                            method=meta.get("method", METHOD_CENTROID))
             for sid in annotations.ids]
    report = analysis.human_agreement(feats, annotations)
    if cfg.csv_out:
        featfile.write_features(cfg.csv_out, ("r",), [[r] for r in report.correlations],
                                ids=list(report.ids), meta=_base_meta(cfg))
    _emit({
        **_base_meta(cfg),
        "n": len(report.ids),
        "mean_r": report.mean_r,
        "excluded": list(report.excluded),
        "per_sentence": {sid: float(r) for sid, r in zip(report.ids, report.correlations)},
    }, cfg.out)


def cmd_analyze_wordsense(cfg: RunConfig) -> None:
    _require(cfg, "dictionary", "provider", "sentences", "keywords")
    dictionary = load_dictionary(cfg.dictionary)
    provider = make_provider(cfg.provider, dim=cfg.dim or dictionary.dim)
    data = analysis.load_sense_data(cfg.sentences, cfg.keywords)
    words = {}
    rows = []
    for word in sorted(data):
        report = analysis.word_sense_eval(dictionary, provider, data[word],
                                          min_per_sense=cfg.min_per_sense,
                                          ratio_mode=cfg.ratio_mode)
        _progress(f"{word}: ratio {report.ratio:.3f} over {report.n_sentences} sentences")
        words[word] = {
            "n": report.n_sentences,
            "mean_matching": report.mean_matching,
            "mean_opposing": report.mean_opposing,
            "ratio": report.ratio,
            "t": report.t,
            "p": report.p,
        }
        rows.append([report.n_sentences, report.mean_matching, report.mean_opposing,
                     report.ratio, report.t, report.p])
    if cfg.csv_out:
        featfile.write_features(
            cfg.csv_out, ("n", "mean_matching", "mean_opposing", "ratio", "t", "p"),
            rows, ids=sorted(data), meta=_base_meta(cfg, provider))
    _emit({
        **_base_meta(cfg, provider),
        "ratio_mode": cfg.ratio_mode,
        "words": words,
    }, cfg.out)


_COMMANDS = {
    "build-dict": cmd_build_dict,
    "encode": cmd_encode,
    "baseline": cmd_baseline,
    "probe-train": cmd_probe_train,
    "probe-eval": cmd_probe_eval,
    "analyze-agreement": cmd_analyze_agreement,
    "analyze-wordsense": cmd_analyze_wordsense,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexcat",
        description="Interpretable sentence features from a category lexicon "
                    "plus an embedding source.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, help_text, *specs):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with option defaults; flags win")
        for flag, kwargs in specs:
            p.add_argument(flag, **kwargs)
        return p

    lexicon_opts = [
        ("--lexicon", dict(help="lexicon file (.dic or .tsv)")),
        ("--lexicon-format", dict(choices=["auto", "dic", "tsv"], dest="lexicon_format")),
        ("--keep", dict(help="file listing category names to keep")),
    ]
    provider_opt = ("--provider", dict(help="pseudo:SEED | store:PATH | service:URL"))
    seed_opt = ("--seed", dict(type=int))
    workers_opt = ("--workers", dict(type=int))
    out_opt = ("--out", dict(help="output path"))

    add("build-dict", "build category centroids from a lexicon",
        *lexicon_opts, provider_opt, seed_opt, out_opt,
        ("--mode", dict(choices=[MODE_WORD, MODE_REFERENCE])),
        ("--corpus", dict(help="reference corpus, one sentence per line")),
        ("--centroids", dict(type=int, help="centroids per category (P)")),
        ("--dim", dict(type=int, help="embedding dim (needed for pseudo providers)")))
    add("encode", "encode sentences against a built dictionary",
        ("--dictionary", dict(help="SCDI dictionary path")),
        provider_opt, seed_opt, workers_opt, out_opt,
        ("--input", dict(help="sentences, one per line")),
        ("--binary-out", dict(dest="binary_out", help="also write a lossless binary matrix")),
        ("--dim", dict(type=int)))
    add("baseline", "lexicon-only baselines (bow, softmatch)",
        *lexicon_opts, provider_opt, seed_opt, out_opt,
        ("--input", dict(help="sentences, one per line")),
        ("--method", dict(choices=[METHOD_BOW, METHOD_SOFTMATCH])),
        ("--normalize", dict(action="store_const", const=True, default=None)),
        ("--threshold", dict(type=float)),
        ("--increment", dict(choices=[softmatch.INCREMENT_UNIT,
                                      softmatch.INCREMENT_SIMILARITY])),
        ("--binary-out", dict(dest="binary_out")))
    add("probe-train", "train a linear probe on labeled features",
        seed_opt, out_opt,
        ("--train", dict(help="labeled CSV or binary matrix (+ --labels)")),
        ("--labels", dict(help="id,label CSV for binary feature matrices")),
        ("--label-column", dict(dest="label_column")),
        ("--task", dict(choices=[probe.TASK_CLASSIFICATION, probe.TASK_REGRESSION])),
        ("--model-out", dict(dest="model_out")),
        ("--learning-rate", dict(type=float, dest="learning_rate")),
        ("--max-iter", dict(type=int, dest="max_iter")),
        ("--tol", dict(type=float)),
        ("--patience", dict(type=int)),
        ("--l2", dict(type=float)),
        ("--standardize", dict(action="store_const", const=True, default=None)))
    add("probe-eval", "evaluate a saved probe on a test split",
        seed_opt, out_opt,
        ("--model", dict(help="saved probe model path")),
        ("--test", dict(help="labeled CSV or binary matrix (+ --labels)")),
        ("--labels", dict()),
        ("--label-column", dict(dest="label_column")),
        ("--baseline-train", dict(dest="baseline_train",
                                  help="train split for the majority/mean baseline")))
    add("analyze-agreement", "Pearson agreement between features and annotations",
        seed_opt, out_opt,
        ("--features", dict(help="feature file from encode/baseline")),
        ("--annotations", dict(help="CSV: id plus one column per category")),
        ("--csv-out", dict(dest="csv_out")))
    add("analyze-wordsense", "sense-similarity contrast for homonyms",
        seed_opt, out_opt,
        ("--dictionary", dict()),
        provider_opt,
        ("--sentences", dict(help="CSV: word,sense,text")),
        ("--keywords", dict(help="CSV: word,sense,k1,k2,k3")),
        ("--ratio-mode", dict(dest="ratio_mode",
                              choices=[analysis.RATIO_DIVIDE_MEANS,
                                       analysis.RATIO_MEAN_OF_RATIOS])),
        ("--min-per-sense", dict(type=int, dest="min_per_sense")),
        ("--csv-out", dict(dest="csv_out")),
        ("--dim", dict(type=int)))
    return parser


def build_config(argv: list[str] | None = None) -> RunConfig:
    args = vars(_build_parser().parse_args(argv))
    config_path = args.pop("config", None)
    file_cfg: dict = {}
    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise InputError(f"bad config file {config_path}: {err}") from err
        if not isinstance(file_cfg, dict):
            raise InputError(f"config file {config_path} must hold a JSON object")
    valid = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(file_cfg) - valid)
    if unknown:
        raise InputError(f"unknown config file key(s): {', '.join(unknown)}")
    merged = dict(file_cfg)
    merged.update({k: v for k, v in args.items() if v is not None})
    for key, default in _DEFAULTS.items():
        merged.setdefault(key, default)
    try:
        return RunConfig(**merged)
    except TypeError as err:
        raise InputError(f"bad configuration: {err}") from err


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = build_config(argv)
        _COMMANDS[cfg.subcommand](cfg)
        return 0
    except BatchItemError as err:
        cause = err.cause
        print(f"error: {err}", file=sys.stderr)
        return 3 if isinstance(cause, ProviderError) else 2
    except ProviderError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
