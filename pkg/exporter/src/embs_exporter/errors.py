"""Exporter exception hierarchy; the CLI maps these to exit codes."""


class ExportError(Exception):
    """Base class for exporter errors."""


class InputError(ExportError):
    """Bad job parameters or texts (exit code 2)."""


class ModelLoadError(ExportError):
    """Checkpoint or tokenizer could not be loaded (exit code 3)."""
