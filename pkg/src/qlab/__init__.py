"""qlab: gate-budgeted hypothesis testing, compression and entanglement bounds at desk scale."""

__version__ = "0.1.0"
