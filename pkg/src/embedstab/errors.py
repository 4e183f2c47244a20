"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: DataError -> 2, NumericError -> 3.
"""


class EmbedstabError(Exception):
    pass


class DataError(EmbedstabError):
    """Malformed or missing input data (corpus files, lexicons, manifests)."""


class NumericError(EmbedstabError):
    """Numerical failure: singular systems, degenerate inputs, zero vectors."""
