"""Contract-by-contract analysis of futures volatility and basis."""

from .errors import ContractLabError

__version__ = "0.1.0"

__all__ = ["ContractLabError", "__version__"]
