"""Price manipulation attack detection on transaction cash flow graphs."""

__version__ = "0.1.0"
