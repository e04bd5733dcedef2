"""Embedding providers, vector primitives, and the EMBS store format.

Vectors are stored as 32-bit floats; all arithmetic accumulates in 64-bit
with a fixed index order so results are identical across thread schedules.
"""

from __future__ import annotations

import json
import struct
import time
import urllib.error
import urllib.request
from hashlib import blake2b
from typing import Iterable, Mapping, Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import FormatError, KeyNotFoundError, ProviderError

EMBS_MAGIC = b"EMBS"
EMBS_VERSION = 1


@runtime_checkable
class EmbeddingProvider(Protocol):
    """Anything that maps text to a fixed-dimension vector."""

    dim: int
    provider_id: str

    def embed(self, text: str) -> np.ndarray: ...

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]: ...

# Records whose key starts with this prefix are provenance, not entries.
META_PREFIX = "__meta/"


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1].

    Accumulates in float64 regardless of input dtype. Zero-norm inputs are
    an error rather than a silent 0: callers that want leniency catch the
    ValueError and substitute.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or v.ndim != 1 or u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    nu = float(np.dot(u, u)) ** 0.5
    nv = float(np.dot(v, v)) ** 0.5
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine similarity undefined for zero-norm vector")
    sim = float(np.dot(u, v)) / (nu * nv)
    return min(1.0, max(-1.0, sim))


def mean_pool(rows: Sequence) -> np.ndarray:
    """Component-wise mean of vectors, float64 accumulation, float32 result."""
    if len(rows) == 0:
        raise ValueError("mean_pool of an empty list")
    mat = np.asarray(rows, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError("rows must all have the same length")
    return mat.mean(axis=0).astype(np.float32)


class EmbeddingStore:
    """Immutable text -> float32 vector map with a fixed dimension."""

    def __init__(self, dim: int, entries: Mapping[str, Sequence] | Iterable[tuple[str, Sequence]] = (),
                 meta: Mapping[str, str] | None = None):
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = int(dim)
        self.meta: dict[str, str] = dict(meta or {})
        self._entries: dict[str, np.ndarray] = {}
        pairs = entries.items() if isinstance(entries, Mapping) else entries
        for key, vec in pairs:
            if key in self._entries:
                raise ValueError(f"duplicate key: {key!r}")
            arr = np.asarray(vec, dtype=np.float32)
            if arr.shape != (self.dim,):
                raise ValueError(f"vector for {key!r} has shape {arr.shape}, expected ({self.dim},)")
            if not np.isfinite(arr).all():
                raise ValueError(f"non-finite components in vector for {key!r}")
            arr.setflags(write=False)
            self._entries[key] = arr

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def get(self, key: str) -> np.ndarray:
        try:
            return self._entries[key]
        except KeyError:
            raise KeyNotFoundError(key) from None

    def keys(self):
        return self._entries.keys()

    def items(self):
        return self._entries.items()


def write_embedding_store(store: EmbeddingStore, path) -> None:
    """Serialize to the EMBS binary format (little-endian).

    Canonical layout: header, then meta records in sorted key order, then
    entries in insertion order, which makes rewrites byte-identical.
    """
    zeros = np.zeros(store.dim, dtype=np.float32).tobytes()
    with open(path, "wb") as fh:
        count = len(store.meta) + len(store)
        fh.write(EMBS_MAGIC)
        fh.write(struct.pack("<IIQ", EMBS_VERSION, store.dim, count))
        for k in sorted(store.meta):
            raw = f"{META_PREFIX}{k}={store.meta[k]}".encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(zeros)
        for key, vec in store.items():
            raw = key.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(vec.astype("<f4").tobytes())


def load_embedding_store(path) -> EmbeddingStore:
    """Load and validate an EMBS file; errors carry the byte offset."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != EMBS_MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}, expected {EMBS_MAGIC!r}", 0)
    if len(data) < 20:
        raise FormatError("truncated header", len(data))
    version, dim, count = struct.unpack_from("<IIQ", data, 4)
    if version != EMBS_VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if dim < 1:
        raise FormatError(f"dim must be positive, got {dim}", 8)
    off = 20
    vec_bytes = dim * 4
    seen: set[str] = set()
    entries: list[tuple[str, np.ndarray]] = []
    meta: dict[str, str] = {}
    for _ in range(count):
        rec_off = off
        if off + 4 > len(data):
            raise FormatError("truncated record (key length)", off)
        (key_len,) = struct.unpack_from("<I", data, off)
        off += 4
        if off + key_len + vec_bytes > len(data):
            raise FormatError("truncated record", rec_off)
        try:
            key = data[off:off + key_len].decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError("key is not valid UTF-8", off) from None
        off += key_len
        vec = np.frombuffer(data[off:off + vec_bytes], dtype="<f4").copy()
        if not np.isfinite(vec).all():
            raise FormatError(f"non-finite component in vector for {key!r}", off)
        off += vec_bytes
        if key in seen:
            raise FormatError(f"duplicate key: {key!r}", rec_off)
        seen.add(key)
        if key.startswith(META_PREFIX):
            body = key[len(META_PREFIX):]
            name, _, value = body.partition("=")
            meta[name] = value
        else:
            entries.append((key, vec))
    if off != len(data):
        raise FormatError("trailing data after last record", off)
    return EmbeddingStore(dim, entries, meta=meta)


def embed_text(provider, text: str) -> np.ndarray:
    """Fetch one embedding and validate it against the provider contract."""
    vec = np.asarray(provider.embed(text), dtype=np.float32)
    if vec.shape != (provider.dim,):
        raise ProviderError(
            f"provider returned shape {vec.shape}, expected ({provider.dim},)"
        )
    if not np.isfinite(vec).all():
        raise ProviderError(f"provider returned non-finite components for {text!r}")
    return vec


class StoreEmbeddingProvider:
    """Exact-key lookup against an EmbeddingStore; misses are errors."""

    def __init__(self, store: EmbeddingStore, provider_id: str = "store"):
        self.store = store
        self.dim = store.dim
        self.provider_id = provider_id

    def embed(self, text: str) -> np.ndarray:
        return self.store.get(text)

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.store.get(t) for t in texts]


class PseudoEmbeddingProvider:
    """Seeded, non-semantic unit vectors for tests and demos.

    Each text's digest seeds an independent PRNG stream, so embed(t) is
    deterministic and callable from any number of threads.
    """

    def __init__(self, dim: int, seed: int = 0):
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = int(dim)
        self.seed = int(seed)
        self.provider_id = f"pseudo:{seed}"

    def embed(self, text: str) -> np.ndarray:
        digest = blake2b(
            text.encode("utf-8"), key=str(self.seed).encode("utf-8"), digest_size=16
        ).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "little"))
        vec = rng.standard_normal(self.dim)
        return (vec / np.linalg.norm(vec)).astype(np.float32)

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.embed(t) for t in texts]


class ServiceEmbeddingProvider:
    """HTTP embedding service client.

    Wire protocol: POST ``{"texts": [...]}``, response
    ``{"dim": n, "vectors": [[...], ...]}``. Three retries with exponential
    backoff; any non-success after that is fatal for the batch.
    """

    RETRIES = 3

    def __init__(self, url: str, dim: int | None = None, timeout: float = 10.0,
                 backoff: float = 0.5):
        self.url = url
        self.dim = dim
        self.timeout = timeout
        self.backoff = backoff
        self.provider_id = f"service:{url}"

    def _post(self, payload: dict) -> dict:
        body = json.dumps(payload).encode("utf-8")
        req = urllib.request.Request(
            self.url, data=body, headers={"Content-Type": "application/json"}
        )
        last_err: Exception | None = None
        for attempt in range(self.RETRIES):
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    return json.loads(resp.read().decode("utf-8"))
            except (urllib.error.URLError, urllib.error.HTTPError, OSError, ValueError) as err:
                last_err = err
                if attempt + 1 < self.RETRIES:
                    time.sleep(self.backoff * (2 ** attempt))
        raise ProviderError(f"embedding service failed after {self.RETRIES} attempts: {last_err}")

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        reply = self._post({"texts": list(texts)})
        if not isinstance(reply, dict) or "dim" not in reply or "vectors" not in reply:
            raise ProviderError(f"malformed service response: {reply!r}")
        dim = int(reply["dim"])
        if self.dim is None:
            self.dim = dim
        elif dim != self.dim:
            raise ProviderError(f"service dim changed from {self.dim} to {dim}")
        vectors = reply["vectors"]
        if len(vectors) != len(texts):
            raise ProviderError(
                f"service returned {len(vectors)} vectors for {len(texts)} texts"
            )
        out = []
        for text, vec in zip(texts, vectors):
            arr = np.asarray(vec, dtype=np.float32)
            if arr.shape != (dim,):
                raise ProviderError(f"bad vector shape for {text!r}: {arr.shape}")
            if not np.isfinite(arr).all():
                raise ProviderError(f"non-finite components for {text!r}")
            out.append(arr)
        return out

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]
