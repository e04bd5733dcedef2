"""Materialize transformer embeddings into EMBS files.

The downstream featurizer never runs deep-model inference; this module
precomputes one mean-pooled sentence vector per unique input text and
serializes the result in the EMBS interchange format. Padding is always
excluded from the mean; sequence-start/end special tokens are excluded by
default (flag to include them), and the choice is recorded in the file's
provenance records.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ModelLoadError

logger = logging.getLogger(__name__)

EMBS_MAGIC = b"EMBS"
EMBS_VERSION = 1
META_PREFIX = "__meta/"

POOL_CONTENT = "mean-content"            # padding and special tokens excluded
POOL_WITH_SPECIAL = "mean-with-special"  # padding excluded, specials kept


@dataclass(frozen=True)
class ExportJob:
    """One export run: which checkpoint, which texts, where to write."""

    model: str
    texts: tuple[str, ...]
    out: str
    batch_size: int = 32
    device: str = "cpu"
    include_special_tokens: bool = False
    max_length: int | None = None

    def __post_init__(self):
        if not self.texts:
            raise InputError("no input texts")
        for t in self.texts:
            if not isinstance(t, str) or not t.strip():
                raise InputError(f"blank or non-string input text: {t!r}")
        if self.batch_size < 1:
            raise InputError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_length is not None and self.max_length < 2:
            raise InputError(f"max_length must be >= 2, got {self.max_length}")

    @property
    def pooling(self) -> str:
        return POOL_WITH_SPECIAL if self.include_special_tokens else POOL_CONTENT


def write_embs(path, dim: int, entries, meta: dict[str, str]) -> None:
    """EMBS writer: header, meta records in sorted key order, then entries.

    Kept self-contained so this package depends on the interchange format
    only, not on the consumer's code.
    """
    zeros = np.zeros(dim, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(EMBS_MAGIC)
        fh.write(struct.pack("<IIQ", EMBS_VERSION, dim, len(meta) + len(entries)))
        for k in sorted(meta):
            raw = f"{META_PREFIX}{k}={meta[k]}".encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(zeros)
        for key, vec in entries:
            raw = key.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(np.asarray(vec, dtype="<f4").tobytes())


def _load(job: ExportJob):
    import torch
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(job.model)
        model = AutoModel.from_pretrained(job.model)
    except Exception as err:
        raise ModelLoadError(f"cannot load checkpoint {job.model!r}: {err}") from err
    model.to(torch.device(job.device))
    model.eval()
    return tokenizer, model


def _effective_max_length(job: ExportJob, tokenizer, model) -> int:
    if job.max_length is not None:
        return job.max_length
    limit = int(getattr(tokenizer, "model_max_length", 0) or 0)
    positions = int(getattr(model.config, "max_position_embeddings", 0) or 0)
    # fresh tokenizers report a sentinel "no limit" in the 1e30 range
    if positions and (limit <= 0 or limit > 1_000_000):
        return positions
    if limit <= 0 or limit > 1_000_000:
        raise InputError("model declares no usable maximum length; pass max_length")
    return min(limit, positions) if positions else limit


def _batches(items, size):
    for start in range(0, len(items), size):
        yield items[start:start + size]


def export_embeddings(job: ExportJob) -> dict:
    """Embed every unique input text and write one EMBS file.

    Returns a summary dict (written path, dim, entry count, truncated count,
    pooling rule). Texts longer than the model maximum are truncated and the
    total is logged.
    """
    import torch

    tokenizer, model = _load(job)
    max_length = _effective_max_length(job, tokenizer, model)
    unique = list(dict.fromkeys(job.texts))

    vectors: list[np.ndarray] = []
    truncated = 0
    for batch in _batches(unique, job.batch_size):
        enc = tokenizer(batch, padding=True, truncation=True, max_length=max_length,
                        return_tensors="pt", return_special_tokens_mask=True)
        special = enc.pop("special_tokens_mask")
        attention = enc["attention_mask"]
        full_lengths = [len(ids) for ids in
                        tokenizer(batch, truncation=False)["input_ids"]]
        truncated += sum(1 for full, att in zip(full_lengths, attention)
                         if full > int(att.sum()))

        with torch.no_grad():
            hidden = model(**{k: v.to(job.device) for k, v in enc.items()}
                           ).last_hidden_state
        mask = attention.to(hidden.dtype)
        if not job.include_special_tokens:
            mask = mask * (1 - special.to(hidden.dtype))
        counts = mask.sum(dim=1)
        for text, count in zip(batch, counts):
            if float(count) == 0.0:
                raise InputError(f"text yields no content tokens: {text!r}")
        pooled = (hidden * mask.unsqueeze(-1)).sum(dim=1) / counts.unsqueeze(-1)
        vectors.extend(pooled.cpu().numpy().astype(np.float32))

    if truncated:
        logger.warning("%d of %d texts truncated to max length %d",
                       truncated, len(unique), max_length)

    dim = int(vectors[0].shape[0])
    meta = {
        "model": job.model,
        "pooling": job.pooling,
        "max_length": str(max_length),
        "truncated": str(truncated),
    }
    write_embs(job.out, dim, list(zip(unique, vectors)), meta)
    return {"out": str(job.out), "dim": dim, "count": len(unique),
            "truncated": truncated, "pooling": job.pooling}
