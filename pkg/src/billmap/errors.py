"""Exception hierarchy shared across the package.

Exit codes used by the CLI: 1 for data problems, 2 for bad arguments or
configuration, 3 for numeric failures inside the algorithms.
"""

from __future__ import annotations


class BillmapError(Exception):
    exit_code = 1


class DataError(BillmapError):
    """Input data is malformed or violates a record invariant."""

    exit_code = 1


class SchemaError(DataError):
    """A required column or field is missing from the input."""


class RowError(DataError):
    """A single row failed to parse or validate."""

    def __init__(self, row_number: int, message: str):
        super().__init__(f"row {row_number}: {message}")
        self.row_number = row_number


class CorpusError(DataError):
    """Corpus-level invariant violation (e.g. duplicate bill ids)."""


class FetchError(DataError):
    """Remote catalog fetch failed after retries."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts


class PageDecodeError(DataError):
    """A catalog response page could not be decoded."""

    def __init__(self, page_index: int, message: str):
        super().__init__(f"page {page_index}: {message}")
        self.page_index = page_index


class ModelFormatError(DataError):
    """Persisted model file is corrupt or has an incompatible version."""


class ModelCompatibilityError(BillmapError):
    """Encoder output does not match the model's training feature space."""

    exit_code = 2


class ArgumentError(BillmapError):
    """Invalid argument value (maps to CLI usage errors)."""

    exit_code = 2


class NumericError(BillmapError):
    """Numeric failure: non-finite values, non-convergent fits."""

    exit_code = 3
