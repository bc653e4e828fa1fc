"""rieszflow - Wasserstein flows of Riesz-kernel discrepancies."""

__version__ = "0.1.0"
