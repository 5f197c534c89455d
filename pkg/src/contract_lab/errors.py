"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`ContractLabError`. The ``exit_code`` attribute is what the CLI
returns when the error escapes a subcommand.
"""

from __future__ import annotations

from dataclasses import dataclass


class ContractLabError(Exception):
    exit_code = 2


class FormatError(ContractLabError):
    """Input does not follow the expected file layout."""


@dataclass(frozen=True)
class RowIssue:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


class RowError(FormatError):
    """One or more rows could not be parsed. ``issues`` lists every one."""

    def __init__(self, issues: list[RowIssue]):
        self.issues = list(issues)
        shown = "; ".join(str(i) for i in self.issues[:5])
        more = f" (+{len(self.issues) - 5} more)" if len(self.issues) > 5 else ""
        super().__init__(f"{len(self.issues)} malformed row(s): {shown}{more}")


class DuplicateRowError(FormatError):
    def __init__(self, contract: str, date, line: int):
        self.contract = contract
        self.date = date
        self.line = line
        super().__init__(f"line {line}: duplicate row for {contract} on {date.isoformat()}")


class OrderingError(FormatError):
    pass


class BarAfterExpiryError(FormatError):
    def __init__(self, contract: str, date, expiry):
        self.contract = contract
        self.date = date
        self.expiry = expiry
        super().__init__(
            f"{contract}: bar dated {date.isoformat()} is after expiry {expiry.isoformat()}"
        )


class DomainError(ContractLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class EmptyJoinError(ContractLabError):
    pass


class EmptyPanelError(ContractLabError):
    pass


class EmptyAnalysisError(ContractLabError):
    pass


class EmptySummaryError(ContractLabError):
    """No fit succeeded for a model; always downstream of numeric failures."""

    exit_code = 3


class GenerationError(ContractLabError):
    pass


class NumericError(ContractLabError):
    exit_code = 3


class InsufficientDataError(NumericError):
    label = "insufficient data"


class CollinearityError(NumericError):
    label = "collinear"

    def __init__(self, column: str, message: str | None = None):
        self.column = column
        super().__init__(message or f"design matrix is rank deficient at column {column!r}")


class ConvergenceError(NumericError):
    pass
