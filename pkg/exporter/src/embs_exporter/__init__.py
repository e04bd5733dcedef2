"""Transformer-to-EMBS embedding exporter."""

from .errors import ExportError, InputError, ModelLoadError
from .export import (
    EMBS_MAGIC,
    EMBS_VERSION,
    META_PREFIX,
    POOL_CONTENT,
    POOL_WITH_SPECIAL,
    ExportJob,
    export_embeddings,
    write_embs,
)

__version__ = "0.1.0"

__all__ = [
    "EMBS_MAGIC",
    "EMBS_VERSION",
    "META_PREFIX",
    "POOL_CONTENT",
    "POOL_WITH_SPECIAL",
    "ExportError",
    "ExportJob",
    "InputError",
    "ModelLoadError",
    "export_embeddings",
    "write_embs",
]
