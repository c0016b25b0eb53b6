"""Exception hierarchy shared across the package.

``DataError`` covers malformed inputs (knowledge-graph TSV, template tables,
benchmark JSONL); ``ProviderError`` covers failures of a token-probability
provider, including external subprocess providers. The command-line driver
maps these onto distinct exit codes.
"""

from __future__ import annotations


class KgqaError(Exception):
    """Base class for all package-specific errors."""


class DataError(KgqaError):
    """A data file or record could not be parsed or validated."""


class KGParseError(DataError):
    """Malformed knowledge-graph TSV input."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class TaxonomyError(DataError):
    """Malformed or inconsistent spatial class taxonomy."""


class TemplateError(DataError):
    """Malformed template table, or no template applied where one is required."""


class BenchmarkError(DataError):
    """Malformed benchmark / QA item JSONL input."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ProviderError(KgqaError):
    """A token-probability provider failed or returned an invalid response."""


class ScoringError(KgqaError):
    """Scoring an item failed; carries the offending item id."""

    def __init__(self, item_id: str, message: str):
        super().__init__(f"item {item_id}: {message}")
        self.item_id = item_id
